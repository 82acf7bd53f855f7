"""Spin-1 chain toolkit for Rydberg-realized Haldane physics.

Modules
-------
algebra    spin-1 / spin-1/2 operator registries
model      Hamiltonian TermList builders and coupling tables
ed         exact diagonalization, Krylov propagation, dense observables
mps        matrix product states, measurements, topological diagnostics
dmrg       MPO compilation and two-site DMRG
protocols  preparation sweep, edge Rabi drive, ground-manifold reports
cli        command-line front end
"""

from .algebra import SpinOps, spin_algebra
from .model import (
    AKLTParams,
    CouplingTable,
    DriveSpec,
    IdealModelParams,
    SSHParams,
    Term,
    TermList,
    XXZHalfParams,
    add_drive,
    add_staggered_field,
    add_transverse_field,
    add_uniform_sz_field,
    build_terms,
    bundled_coupling_table,
    load_coupling_table,
    synthetic_uniform_table,
)
from .ed import (
    SpectrumReport,
    apply_terms,
    assemble_dense,
    ed_observables,
    krylov_propagate,
    lowest_eigenpairs,
    product_state_vector,
    string_order,
)

__version__ = "0.1.0"

__all__ = [
    "SpinOps",
    "spin_algebra",
    "AKLTParams",
    "CouplingTable",
    "DriveSpec",
    "IdealModelParams",
    "SSHParams",
    "Term",
    "TermList",
    "XXZHalfParams",
    "add_drive",
    "add_staggered_field",
    "add_transverse_field",
    "add_uniform_sz_field",
    "build_terms",
    "bundled_coupling_table",
    "load_coupling_table",
    "synthetic_uniform_table",
    "SpectrumReport",
    "apply_terms",
    "assemble_dense",
    "ed_observables",
    "krylov_propagate",
    "lowest_eigenpairs",
    "product_state_vector",
    "string_order",
]
