"""
Synthetic paired samples with a fixed per-feature correlation.

For every feature k: x ~ N(0, std^2), e ~ N(0, std^2) and
y = rho * x + sqrt(1 - rho^2) * e + delta_k, where delta_k is the shift on
the trailing round-half-up(shifted_fraction * d) features and 0 elsewhere.
Both occasions keep the marginal std and corr(x_k, y_k) = rho.

Random numbers come from numpy's PCG64DXSM bit generator seeded through a
SeedSequence, so a trial is fully reproduced by its 64-bit seed and
independent trials use independent streams.
"""

import math
from typing import Iterable

import numpy as np

from app.schemas.bench import ScenarioConfig
from app.schemas.sample import PairedSample


class ScenarioGenerator:
    @staticmethod
    def rng_for(seed: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64DXSM(np.random.SeedSequence(seed)))

    @staticmethod
    def derive_seed(master_seed: int, indices: Iterable[int]) -> int:
        """Seed of one trial: SeedSequence(master_seed, spawn_key=indices), first 64-bit word."""
        sequence = np.random.SeedSequence(master_seed, spawn_key=tuple(int(i) for i in indices))
        return int(sequence.generate_state(1, dtype=np.uint64)[0])

    @staticmethod
    def generate_scenario(cfg: ScenarioConfig) -> PairedSample:
        rng = ScenarioGenerator.rng_for(cfg.seed)
        shape = (cfg.n, cfg.d)

        x = rng.normal(0.0, cfg.std, size=shape)
        noise = rng.normal(0.0, cfg.std, size=shape)

        delta = np.zeros(cfg.d)
        if cfg.n_shifted:
            delta[cfg.d - cfg.n_shifted :] = cfg.shift

        y = cfg.rho * x + math.sqrt(max(0.0, 1.0 - cfg.rho**2)) * noise + delta
        return PairedSample.from_arrays(x, y)
