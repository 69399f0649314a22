import json
from enum import Enum

import numpy as np


def numpy_encoder(obj):
    """Custom JSON encoder for numpy arrays, numpy scalars and enums"""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Enum):
        return obj.value
    raise TypeError(f"Object of type {obj.__class__.__name__} is not JSON serializable")


def json_dumps(obj, indent: int = 2) -> str:
    """Helper function to dump JSON with numpy support; floats keep full precision"""
    return json.dumps(obj, default=numpy_encoder, indent=indent)
