"""
Numerical primitives shared by the tests.

Midranks, medians, the normal / Student-t / F distribution functions
(regularized incomplete beta by continued fraction), the unbiased sample
covariance and a Cholesky-based symmetric positive-definite solve that
reports rank deficiency instead of inverting.
"""

import math
from typing import Sequence, Union

import numpy as np
from scipy.linalg import solve_triangular

from app.core.config import settings
from app.core.exceptions import DomainError, SingularMatrixError

ArrayLike = Union[Sequence[float], np.ndarray]

_BETACF_EPS = 1e-15
_BETACF_FPMIN = 1e-300
# above this, log Gamma is taken from its Stirling series
_STIRLING_MIN = 20.0


def _as_vector(values: ArrayLike) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("Empty input vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError("Input vector contains NaN or infinite values")
    return arr


# ---------------------------------------------------------------------------
# Ranks and medians
# ---------------------------------------------------------------------------
def midranks(values: ArrayLike) -> np.ndarray:
    """Ascending ranks starting at 1; tied values share the mean of their ranks."""
    arr = _as_vector(values)
    sorter = np.argsort(arr, kind="mergesort")
    inverse = np.empty(sorter.size, dtype=np.intp)
    inverse[sorter] = np.arange(sorter.size, dtype=np.intp)

    ordered = arr[sorter]
    new_group = np.r_[True, ordered[1:] != ordered[:-1]]
    dense = np.cumsum(new_group)[inverse]
    bounds = np.r_[np.nonzero(new_group)[0], new_group.size]

    return 0.5 * (bounds[dense] + bounds[dense - 1] + 1)


def tie_group_sizes(values: ArrayLike) -> np.ndarray:
    """Sizes of the groups of equal values (groups of size 1 included)."""
    arr = _as_vector(values)
    _, counts = np.unique(arr, return_counts=True)
    return counts


def median(values: ArrayLike) -> float:
    # odd length -> middle element, even length -> mean of the two middle ones
    return float(np.median(_as_vector(values)))


# ---------------------------------------------------------------------------
# Distribution functions
# ---------------------------------------------------------------------------
def normal_cdf(z: float) -> float:
    if not math.isfinite(z):
        raise DomainError(f"normal_cdf requires a finite argument, got {z}")
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction of the incomplete beta function (modified Lentz)."""
    max_iter = 200 + int(20 * math.sqrt(max(a, b)))
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0

    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d

    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h

    raise DomainError(
        f"Incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )


def _stirling_tail(z: float) -> float:
    """log Gamma(z) minus its Stirling approximation, for z >= _STIRLING_MIN."""
    z2 = z * z
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z


def _log_gamma_ratio(z: float, s: float) -> float:
    """log Gamma(z + s) - log Gamma(z) without subtracting two large lgammas."""
    if z < _STIRLING_MIN:
        return math.lgamma(z + s) - math.lgamma(z)
    return (
        (z + s - 0.5) * math.log1p(s / z)
        + s * math.log(z)
        - s
        + _stirling_tail(z + s)
        - _stirling_tail(z)
    )


def _log_front(a: float, b: float, x: float, y: float) -> float:
    """log(x^a y^b / B(a, b)) with y = 1 - x supplied by the caller."""
    if min(a, b) >= _STIRLING_MIN:
        # both large: expand every lgamma and keep only the deviation terms
        skew = x * b - y * a
        return (
            a * math.log1p(skew / a)
            + b * math.log1p(-skew / b)
            + 0.5 * math.log(a * b / ((a + b) * 2.0 * math.pi))
            + _stirling_tail(a + b)
            - _stirling_tail(a)
            - _stirling_tail(b)
        )

    small, large = (a, b) if a <= b else (b, a)
    log_x = math.log1p(-y) if x > 0.5 else math.log(x)
    log_y = math.log1p(-x) if y > 0.5 else math.log(y)
    return _log_gamma_ratio(large, small) - math.lgamma(small) + a * log_x + b * log_y


def _incomplete_beta(a: float, b: float, x: float, y: float) -> float:
    if x == 0.0:
        return 0.0
    if y == 0.0:
        return 1.0
    front = math.exp(_log_front(a, b, x, y))

    # The continued fraction converges fastest on this side of the mean.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise DomainError(f"Incomplete beta requires a, b > 0 (a={a}, b={b})")
    if x < 0.0 or x > 1.0:
        raise DomainError(f"Incomplete beta requires 0 <= x <= 1, got {x}")
    return _incomplete_beta(a, b, x, 1.0 - x)


def _check_df(df: int, name: str = "df") -> None:
    if df < 1:
        raise DomainError(f"Degrees of freedom {name} must be >= 1, got {df}")


def t_cdf(x: float, df: int) -> float:
    _check_df(df)
    if x == 0.0:
        return 0.5
    denom = df + x * x
    tail = 0.5 * _incomplete_beta(df / 2.0, 0.5, df / denom, x * x / denom)
    return 1.0 - tail if x > 0 else tail


def f_cdf(x: float, d1: int, d2: int) -> float:
    _check_df(d1, "d1")
    _check_df(d2, "d2")
    if x < 0:
        raise DomainError(f"f_cdf requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    denom = d1 * x + d2
    return _incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / denom, d2 / denom)


def f_sf(x: float, d1: int, d2: int) -> float:
    """Upper tail 1 - f_cdf(x), evaluated without cancellation."""
    _check_df(d1, "d1")
    _check_df(d2, "d2")
    if x < 0:
        raise DomainError(f"f_sf requires x >= 0, got {x}")
    if x == 0.0:
        return 1.0
    denom = d1 * x + d2
    return _incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / denom, d1 * x / denom)


# ---------------------------------------------------------------------------
# Covariance and SPD solve
# ---------------------------------------------------------------------------
def sample_covariance(z: np.ndarray) -> np.ndarray:
    """Unbiased (N - 1) covariance of the rows of an N x d matrix."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] < 2:
        raise DomainError(f"Sample covariance needs N >= 2 rows, got {z.shape[0]}")

    centered = z - z.mean(axis=0)
    cov = centered.T @ centered / (z.shape[0] - 1)
    return (cov + cov.T) / 2.0


def cholesky_factor(a: np.ndarray, eps: float = None) -> np.ndarray:
    """Lower Cholesky factor of a; raises SingularMatrixError on a small pivot."""
    eps = settings.SINGULARITY_EPS if eps is None else eps
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"Expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise DomainError("Matrix is not symmetric")

    d = a.shape[0]
    tol = eps * float(np.trace(a)) / d
    lower = np.zeros_like(a)

    for j in range(d):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= tol:
            raise SingularMatrixError(
                "Singular covariance matrix: the inverse of the sample covariance "
                f"does not exist (pivot {pivot:.3e} at index {j} <= {tol:.3e})"
            )
        lower[j, j] = math.sqrt(pivot)
        lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]

    return lower


def spd_solve(a: np.ndarray, b: ArrayLike, eps: float = None) -> np.ndarray:
    """Solve a @ v = b for symmetric positive-definite a via its Cholesky factor."""
    b = np.asarray(b, dtype=float).ravel()
    lower = cholesky_factor(a, eps=eps)
    if b.size != lower.shape[0]:
        raise DomainError(f"Right-hand side has length {b.size}, expected {lower.shape[0]}")

    forward = solve_triangular(lower, b, lower=True)
    return solve_triangular(lower.T, forward, lower=False)
