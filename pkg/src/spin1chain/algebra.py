"""Spin operator algebras for the spin-1 and spin-1/2 chains.

Spin-1 matrices are written in the S^z eigenbasis ordered |+>, |0>, |->
(local indices 0, 1, 2); spin-1/2 uses |up>, |down>.  All energies that
multiply these operators are E/h in MHz, so evolution phases are
2*pi*(E/h)*t with t in microseconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


def _spin1_matrices() -> dict[str, np.ndarray]:
    sx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2
    sy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / SQRT2
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    sp = sx + 1j * sy
    sm = sx - 1j * sy
    ops = {
        "Id": np.eye(3, dtype=complex),
        "Sx": sx,
        "Sy": sy,
        "Sz": sz,
        "Sp": sp,
        "Sm": sm,
        "Sp2": sp @ sp,
        "Sm2": sm @ sm,
        "Sz2": sz @ sz,
        "P+": np.diag([1.0, 0.0, 0.0]).astype(complex),
        "P0": np.diag([0.0, 1.0, 0.0]).astype(complex),
        "P-": np.diag([0.0, 0.0, 1.0]).astype(complex),
    }
    # transition operators T{a}{b} = |a><b| for the pair-matrix builders
    kets = {"+": 0, "0": 1, "-": 2}
    for a, ia in kets.items():
        for b, ib in kets.items():
            if a == b:
                continue
            m = np.zeros((3, 3), dtype=complex)
            m[ia, ib] = 1.0
            ops[f"T{a}{b}"] = m
    # products S^a S^b needed to expand (S_i . S_j)^2 into two-site factors
    for a in "xyz":
        for b in "xyz":
            ops[f"S{a}S{b}"] = ops["S" + a] @ ops["S" + b]
    return ops


def _spin_half_matrices() -> dict[str, np.ndarray]:
    sigx = np.array([[0, 1], [1, 0]], dtype=complex)
    sigy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sigz = np.diag([1.0, -1.0]).astype(complex)
    return {
        "Id": np.eye(2, dtype=complex),
        # sigma_* are Pauli matrices; Sx/Sy/Sz are the spin operators sigma/2
        "sigma_x": sigx,
        "sigma_y": sigy,
        "sigma_z": sigz,
        "sigma_p": np.array([[0, 1], [0, 0]], dtype=complex),
        "sigma_m": np.array([[0, 0], [1, 0]], dtype=complex),
        "Sx": sigx / 2,
        "Sy": sigy / 2,
        "Sz": sigz / 2,
    }


@dataclass(frozen=True)
class SpinOps:
    """Operator registry for a single site of dimension 2 or 3."""

    dimension: int
    matrices: dict[str, np.ndarray] = field(repr=False)

    def op(self, label: str) -> np.ndarray:
        try:
            return self.matrices[label]
        except KeyError:
            raise KeyError(
                f"unknown operator label {label!r} for dimension {self.dimension}"
            ) from None

    def labels(self) -> tuple[str, ...]:
        return tuple(self.matrices)

    def __getattr__(self, name: str):
        # attribute access for the common operators: ops.Sz, ops.Sp, ...
        mats = object.__getattribute__(self, "matrices")
        if name in mats:
            return mats[name]
        raise AttributeError(name)


@lru_cache(maxsize=None)
def spin_algebra(spin: str = "one") -> SpinOps:
    """Return the operator algebra for ``spin`` in {"one", "half"}.

    Spin-1 provides S^{x,y,z}, S^{+,-}, their squares, the three level
    projectors and all transition operators |a><b|; spin-1/2 provides the
    Pauli matrices, sigma^{+,-} and the spin operators sigma/2.
    """
    if spin == "one":
        return SpinOps(3, _spin1_matrices())
    if spin == "half":
        return SpinOps(2, _spin_half_matrices())
    raise ValueError(f"spin must be 'one' or 'half', got {spin!r}")


@lru_cache(maxsize=None)
def algebra_for_dim(dim: int) -> SpinOps:
    if dim == 3:
        return spin_algebra("one")
    if dim == 2:
        return spin_algebra("half")
    raise ValueError(f"no spin algebra for local dimension {dim}")


@lru_cache(maxsize=None)
def pi_rotation(axis: str, dim: int = 3) -> np.ndarray:
    """exp(i*pi*S^axis), the (-1)^{S^axis} string insertion of the string order."""
    ops = algebra_for_dim(dim)
    s = ops.op("S" + axis)
    vals, vecs = np.linalg.eigh(s)
    return (vecs * np.exp(1j * np.pi * vals)) @ vecs.conj().T
