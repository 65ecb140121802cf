"""Quaternary message-passing decoding of surface codes on diluted Tanner graphs."""

from ._backend import NAME as BACKEND
from .geometry import (
    DilutedGraph,
    DilutionSequence,
    Family,
    GeometryError,
    SparsificationPattern,
    SurfaceCode,
    build_surface_code,
    dilution_sequence,
    sparsify,
)
from .mp import MpConfig, run_mp
from .noise import NoiseModel, Prior, prior_of, sample, xz_coupling
from .pauli import PauliConfig, ResidualClass, Syndrome, classify_residual, syndrome

__version__ = "0.1.0"
