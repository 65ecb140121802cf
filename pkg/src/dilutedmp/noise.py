"""Single-qubit Pauli priors and samplers for the two code-capacity noise models."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliConfig

__all__ = ["Prior", "NoiseKind", "NoiseModel", "prior_of", "sample", "xz_coupling", "trial_rng"]


@dataclass(frozen=True)
class Prior:
    p_I: float
    p_X: float
    p_Y: float
    p_Z: float

    def __post_init__(self):
        probs = (self.p_I, self.p_X, self.p_Y, self.p_Z)
        if min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"prior must be nonnegative and sum to 1, got {probs}")

    def table(self) -> np.ndarray:
        """psi[x, z] as a 2x2 array."""
        return np.array([[self.p_I, self.p_Z], [self.p_X, self.p_Y]])

    def log_table(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.table())

    @property
    def p_x_marginal(self) -> float:
        return self.p_X + self.p_Y

    @property
    def p_z_marginal(self) -> float:
        return self.p_Z + self.p_Y

    @classmethod
    def from_table(cls, psi) -> "Prior":
        psi = np.asarray(psi, dtype=float)
        return cls(psi[0, 0], psi[1, 0], psi[1, 1], psi[0, 1])


class NoiseKind(str, enum.Enum):
    SINGLE_X = "x"
    DEPOLARIZING = "depolarizing"

    @classmethod
    def parse(cls, value) -> "NoiseKind":
        if isinstance(value, NoiseKind):
            return value
        v = str(value).lower()
        aliases = {"x": cls.SINGLE_X, "singlex": cls.SINGLE_X, "single-x": cls.SINGLE_X,
                   "depolarizing": cls.DEPOLARIZING, "dep": cls.DEPOLARIZING}
        if v not in aliases:
            raise ValueError(f"unknown noise model {value!r}")
        return aliases[v]


@dataclass(frozen=True)
class NoiseModel:
    kind: NoiseKind
    p: float

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind.parse(self.kind))
        if not 0.0 <= self.p <= 1.0 or math.isnan(self.p):
            raise ValueError(f"physical error rate must lie in [0, 1], got {self.p}")


def prior_of(model: NoiseModel) -> Prior:
    p = model.p
    if model.kind is NoiseKind.SINGLE_X:
        return Prior(1.0 - p, p, 0.0, 0.0)
    return Prior(1.0 - p, p / 3.0, p / 3.0, p / 3.0)


def xz_coupling(prior: Prior) -> float:
    """Covariance of the X and Z error bits under ``prior``."""
    return prior.p_Y - prior.p_x_marginal * prior.p_z_marginal


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """PCG64 stream for one trial, keyed by a SeedSequence hash of (seed, *key)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(master_seed), *map(int, key)])))


def sample(model: NoiseModel, n: int, rng: "np.random.Generator | int") -> PauliConfig:
    """Draw i.i.d. single-qubit Paulis from the model's prior."""
    if not isinstance(rng, np.random.Generator):
        rng = trial_rng(rng)
    u = rng.random(n)
    prior = prior_of(model)
    c1 = prior.p_I
    c2 = c1 + prior.p_X
    c3 = c2 + prior.p_Y
    # Categories by inverse CDF: I < c1 <= X < c2 <= Y < c3 <= Z.
    x = (u >= c1) & (u < c3)
    z = u >= c2
    if prior.p_Z == 0.0:
        z &= u < c3
    return PauliConfig(x, z)
