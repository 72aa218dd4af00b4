"""Displacement-channel metrology: fidelities, Fisher information, estimation and Wigner grids."""

from ._core import (
    SpreadchanError,
    __version__,
    auto_dimension,
    avg_qfi,
    canonical_state,
    cfi_quadrature,
    cfi_self_projection,
    fock_amplitudes,
    nominal_energy,
    p0,
    p0_coherent,
    p0_fock_closed,
    p0_squeezed_closed,
    qfi_bound,
    quadrature_moments_closed,
    rmse,
    simulate,
    welch_test,
    wigner,
)

__all__ = [
    "SpreadchanError",
    "__version__",
    "auto_dimension",
    "avg_qfi",
    "canonical_state",
    "cfi_quadrature",
    "cfi_self_projection",
    "fock_amplitudes",
    "nominal_energy",
    "p0",
    "p0_coherent",
    "p0_fock_closed",
    "p0_squeezed_closed",
    "qfi_bound",
    "quadrature_moments_closed",
    "rmse",
    "simulate",
    "welch_test",
    "wigner",
]
