"""Pauli configurations in (x, z) bit form, syndromes and residual classes.

Phases are dropped everywhere: decoding only needs the operator up to sign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .geometry import SurfaceCode

__all__ = [
    "PauliConfig",
    "Syndrome",
    "ResidualClass",
    "syndrome",
    "apply",
    "classify_residual",
]

_CHARS = np.array(["I", "X", "Z", "Y"])  # index = x + 2 z


@dataclass(frozen=True, eq=False)
class PauliConfig:
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.uint8)
        z = np.ascontiguousarray(self.z, dtype=np.uint8)
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("x and z parts must be 1-d arrays of equal length")
        object.__setattr__(self, "x", x & 1)
        object.__setattr__(self, "z", z & 1)

    @classmethod
    def identity(cls, n: int) -> "PauliConfig":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def from_string(cls, text: str) -> "PauliConfig":
        text = text.strip().upper()
        bad = set(text) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli characters {sorted(bad)}")
        arr = np.frombuffer(text.encode(), dtype=np.uint8)
        x = (arr == ord("X")) | (arr == ord("Y"))
        z = (arr == ord("Z")) | (arr == ord("Y"))
        return cls(x, z)

    @classmethod
    def from_support(cls, n: int, x_support=(), z_support=()) -> "PauliConfig":
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        x[list(x_support)] = 1
        z[list(z_support)] = 1
        return cls(x, z)

    def __len__(self) -> int:
        return self.x.shape[0]

    def __str__(self) -> str:
        return "".join(_CHARS[self.x + 2 * self.z])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliConfig):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def __xor__(self, other: "PauliConfig") -> "PauliConfig":
        return apply(self, other)

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def copy(self) -> "PauliConfig":
        return PauliConfig(self.x.copy(), self.z.copy())


@dataclass(frozen=True, eq=False)
class Syndrome:
    """Z-check bits (from X components) and X-check bits (from Z components)."""

    z_bits: np.ndarray
    x_bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z_bits", np.ascontiguousarray(self.z_bits, dtype=np.uint8))
        object.__setattr__(self, "x_bits", np.ascontiguousarray(self.x_bits, dtype=np.uint8))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Syndrome):
            return NotImplemented
        return np.array_equal(self.z_bits, other.z_bits) and np.array_equal(self.x_bits, other.x_bits)

    def __xor__(self, other: "Syndrome") -> "Syndrome":
        return Syndrome(self.z_bits ^ other.z_bits, self.x_bits ^ other.x_bits)

    def is_zero(self) -> bool:
        return not (self.z_bits.any() or self.x_bits.any())

    def to_bits(self) -> np.ndarray:
        """Flat layout used on the wire: Z-checks first, then X-checks."""
        return np.concatenate([self.z_bits, self.x_bits])

    @classmethod
    def from_bits(cls, code: SurfaceCode, bits) -> "Syndrome":
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        mz, mx = code.num_z_checks, code.num_x_checks
        if bits.shape[0] != mz + mx:
            raise ValueError(f"expected {mz + mx} syndrome bits, got {bits.shape[0]}")
        return cls(bits[:mz], bits[mz:])


class ResidualClass(str, enum.Enum):
    STABILIZER = "Stabilizer"
    LOGICAL_X = "LogicalX"
    LOGICAL_Z = "LogicalZ"
    LOGICAL_Y = "LogicalY"
    SYNDROME_MISMATCH = "SyndromeMismatch"

    @property
    def is_logical(self) -> bool:
        return self in (ResidualClass.LOGICAL_X, ResidualClass.LOGICAL_Z, ResidualClass.LOGICAL_Y)


def _check_len(code: SurfaceCode, e: PauliConfig):
    if len(e) != code.n:
        raise ValueError(f"length mismatch: configuration has {len(e)} qubits, code has {code.n}")


def syndrome(code: SurfaceCode, e: PauliConfig) -> Syndrome:
    _check_len(code, e)
    z_bits = (code.hz @ e.x) & 1
    x_bits = (code.hx @ e.z) & 1
    return Syndrome(z_bits, x_bits)


def apply(e1: PauliConfig, e2: PauliConfig) -> PauliConfig:
    """Componentwise product (XOR of the x and z parts)."""
    if len(e1) != len(e2):
        raise ValueError(f"length mismatch: {len(e1)} vs {len(e2)}")
    return PauliConfig(e1.x ^ e2.x, e1.z ^ e2.z)


def classify_residual(code: SurfaceCode, residual: PauliConfig) -> ResidualClass:
    if not syndrome(code, residual).is_zero():
        return ResidualClass.SYNDROME_MISMATCH
    lz = np.asarray(code.logical_z)
    lx = np.asarray(code.logical_x)
    # A residual X-part anticommutes with logical Z iff it overlaps it oddly.
    flips_z = int(residual.x[lz].sum()) & 1
    flips_x = int(residual.z[lx].sum()) & 1
    if flips_z and flips_x:
        return ResidualClass.LOGICAL_Y
    if flips_z:
        return ResidualClass.LOGICAL_X
    if flips_x:
        return ResidualClass.LOGICAL_Z
    return ResidualClass.STABILIZER
