"""Landauer resistance and band spectra for the counting generalized QTM."""

from cqtm.barrier import (
    ModelParams,
    build_wm,
    dispersion,
    gamma_from_physical,
    single_barrier_coeffs,
)
from cqtm.errors import (
    DomainError,
    IntegrityError,
    MachineHalted,
    NonterminationError,
    ResonanceError,
    ResourceError,
)
from cqtm.seqgen import barrier_census, expand_sequence, potential_profile
from cqtm.spectra import (
    assemble_zn,
    band_intervals,
    brute_force_zn,
    incoherent_transmission,
    landauer,
    sweep,
)
from cqtm.xmatrix import FAST, ExtCMatrix, PreciseBackend, half_trace, log10_abs_entry, mat_mul

__version__ = "0.1.0"
