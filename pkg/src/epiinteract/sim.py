"""Simulated cohorts with two independent binary exposures.

Random numbers come from Philox4x64-10 (a counter-based generator with
published round constants) keyed by the 64-bit seed, through numpy's
``Generator.random``.  For subject ``i`` three consecutive uniforms
``u[i, 0:3]`` decide ``X = u0 < p_x``, ``Y = u1 < p_y`` and
``Z = u2 < expit(beta0 + betaX X + betaY Y + betaXY X Y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tables import CELL_NAMES, STRATA, RecordSet


def philox(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator keyed by ``seed``; ``stream`` offsets the top counter word.

    Distinct streams never overlap unless one consumes 2**192 blocks.
    """
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, stream]))


@dataclass(frozen=True)
class SimConfig:
    n: int
    p_x: float = 0.5
    p_y: float = 0.5
    beta0: float = 0.0
    betaX: float = 0.0
    betaY: float = 0.0
    betaXY: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        for name in ("p_x", "p_y"):
            p = getattr(self, name)
            if not 0 < p < 1:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {p}")

    def linear_predictor(self, x: int, y: int) -> float:
        return self.beta0 + self.betaX * x + self.betaY * y + self.betaXY * x * y

    def cell_probabilities(self) -> dict[str, float]:
        """Analytic probability of each table cell under this configuration."""
        probs = {}
        for name in CELL_NAMES:
            x, y = STRATA[name[0]]
            z = int(name[1])
            px = self.p_x if x else 1 - self.p_x
            py = self.p_y if y else 1 - self.p_y
            pz = 1 / (1 + math.exp(-self.linear_predictor(x, y)))
            probs[name] = px * py * (pz if z else 1 - pz)
        return probs


def simulate_cohort(cfg: SimConfig) -> RecordSet:
    u = philox(cfg.seed).random((cfg.n, 3))
    x = (u[:, 0] < cfg.p_x).astype(np.int8)
    y = (u[:, 1] < cfg.p_y).astype(np.int8)
    eta = cfg.beta0 + cfg.betaX * x + cfg.betaY * y + cfg.betaXY * x * y
    z = (u[:, 2] < 1 / (1 + np.exp(-eta))).astype(np.int8)
    return RecordSet(z, x, y)
