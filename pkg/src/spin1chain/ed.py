"""Exact diagonalization and Krylov time propagation for short chains.

State vectors live in the full product basis of dimension d^L with site 0
as the most significant digit and local order |+>, |0>, |-> (spin-1) or
|up>, |down> (spin-1/2).  Serves as the ground-truth oracle for the tensor
network solvers and as the engine for the dynamics protocols.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .algebra import algebra_for_dim, pi_rotation
from .model import TermList


class ConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# matrix-free application of a TermList
# ---------------------------------------------------------------------------


class CompiledTerms:
    """TermList grouped into one local matrix per site and per pair.

    apply() works matrix-free on the (d,)*L tensor view of the state; no
    d^L x d^L matrix is ever materialized.
    """

    def __init__(self, terms: TermList):
        self.L = terms.L
        self.dim = terms.dim
        ops = algebra_for_dim(terms.dim)
        d = terms.dim
        site_mats: dict[int, np.ndarray] = {}
        pair_mats: dict[tuple[int, int], np.ndarray] = {}
        for t in terms.terms:
            if len(t.factors) == 1:
                (i, a), = t.factors
                m = site_mats.setdefault(i, np.zeros((d, d), dtype=complex))
                m += t.coeff * ops.op(a)
            else:
                (i, a), (j, b) = t.factors
                if i > j:
                    (i, a), (j, b) = (j, b), (i, a)
                m = pair_mats.setdefault((i, j), np.zeros((d * d, d * d), dtype=complex))
                m += t.coeff * np.kron(ops.op(a), ops.op(b))
        self.site_mats = site_mats
        self.pair_mats = pair_mats
        self.norm_bound = sum(np.linalg.norm(m, 2) for m in site_mats.values()) + sum(
            np.linalg.norm(m, 2) for m in pair_mats.values()
        )

    @property
    def size(self) -> int:
        return self.dim**self.L

    def apply(self, v: np.ndarray) -> np.ndarray:
        d, L = self.dim, self.L
        shape = (d,) * L
        vt = v.reshape(shape)
        out = np.zeros(shape, dtype=np.result_type(v.dtype, np.complex128))
        for i, m in self.site_mats.items():
            w = np.tensordot(m, vt, axes=([1], [i]))
            out += np.moveaxis(w, 0, i)
        for (i, j), m in self.pair_mats.items():
            w = np.tensordot(m.reshape(d, d, d, d), vt, axes=([2, 3], [i, j]))
            out += np.moveaxis(w, [0, 1], [i, j])
        return out.reshape(v.shape)


def apply_terms(terms: TermList | CompiledTerms, v: np.ndarray) -> np.ndarray:
    """Return H @ v without materializing H."""
    compiled = terms if isinstance(terms, CompiledTerms) else CompiledTerms(terms)
    if v.shape[0] != compiled.size:
        raise ValueError(f"state has dim {v.shape[0]}, expected {compiled.size}")
    return compiled.apply(v)


def assemble_dense(terms: TermList) -> np.ndarray:
    """Dense matrix of a TermList (small L only)."""
    dim = terms.dim**terms.L
    if dim > 4096:
        raise ValueError("assemble_dense is meant for small chains")
    ops = algebra_for_dim(terms.dim)
    H = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(terms.dim, dtype=complex)
    for t in terms.terms:
        facs = {site: ops.op(label) for site, label in t.factors}
        m = np.array([[t.coeff]])
        for site in range(terms.L):
            m = np.kron(m, facs.get(site, eye))
        H += m
    return H


# ---------------------------------------------------------------------------
# total-S^z sectors
# ---------------------------------------------------------------------------


def basis_sz_values(L: int, dim: int = 3) -> np.ndarray:
    """Total S^z of every product basis state, shape (dim**L,)."""
    idx = np.arange(dim**L)
    tot = np.zeros(dim**L)
    for site in range(L):
        digits = (idx // dim ** (L - 1 - site)) % dim
        if dim == 3:
            tot += 1.0 - digits
        else:
            tot += 0.5 - digits
    return tot


def sector_indices(L: int, m: float, dim: int = 3) -> np.ndarray:
    """Full-space indices of the fixed total-S^z sector."""
    return np.nonzero(np.abs(basis_sz_values(L, dim) - m) < 1e-9)[0]


def sector_csr(terms: TermList, m: float) -> tuple[sp.csr_matrix, np.ndarray]:
    """Sparse Hamiltonian restricted to the total-S^z = m sector.

    Returns (H_sector, indices) where indices are the full-space basis
    indices spanning the sector.  Requires conserves_total_sz.
    """
    if not terms.conserves_total_sz:
        raise ValueError("sector restriction requires a total-S^z conserving TermList")
    d, L = terms.dim, terms.L
    idx = sector_indices(L, m, d)
    pos = -np.ones(d**L, dtype=np.int64)
    pos[idx] = np.arange(len(idx))
    digits = np.empty((len(idx), L), dtype=np.int8)
    for site in range(L):
        digits[:, site] = (idx // d ** (L - 1 - site)) % d

    ops = algebra_for_dim(d)
    rows, cols, vals = [], [], []
    for t in terms.terms:
        if len(t.factors) == 1:
            (i, a), = t.factors
            mat = ops.op(a)
            for out_s in range(d):
                for in_s in range(d):
                    el = mat[out_s, in_s]
                    if el == 0:
                        continue
                    mask = digits[:, i] == in_s
                    src = idx[mask]
                    dst = src + (out_s - in_s) * d ** (L - 1 - i)
                    rows.append(pos[dst])
                    cols.append(pos[src])
                    vals.append(np.full(mask.sum(), t.coeff * el))
        else:
            (i, a), (j, b) = t.factors
            ma, mb = ops.op(a), ops.op(b)
            for oa in range(d):
                for ia in range(d):
                    if ma[oa, ia] == 0:
                        continue
                    for ob in range(d):
                        for ib in range(d):
                            el = ma[oa, ia] * mb[ob, ib]
                            if el == 0:
                                continue
                            mask = (digits[:, i] == ia) & (digits[:, j] == ib)
                            src = idx[mask]
                            dst = (
                                src
                                + (oa - ia) * d ** (L - 1 - i)
                                + (ob - ib) * d ** (L - 1 - j)
                            )
                            rows.append(pos[dst])
                            cols.append(pos[src])
                            vals.append(np.full(mask.sum(), t.coeff * el))
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        if np.any(rows < 0):
            raise AssertionError("term leaves the sector; conserves_total_sz flag is wrong")
    H = sp.csr_matrix(
        (vals, (rows, cols)) if len(rows) else ((), ((), ())),
        shape=(len(idx), len(idx)),
        dtype=complex,
    )
    return H, idx


# ---------------------------------------------------------------------------
# Lanczos eigensolver
# ---------------------------------------------------------------------------


def _lanczos_ground(matvec, dim, rng, *, deflate=(), tol=1e-10, maxiter=2000,
                    restart_every=300):
    """Lowest eigenpair via Lanczos with full reorthogonalization.

    ``deflate`` holds already-converged eigenvectors; the iteration is kept
    orthogonal to them, which makes repeated calls resolve degenerate
    eigenvalues one copy at a time.
    """

    def orth_to_deflated(x):
        for u in deflate:
            x = x - u * np.vdot(u, x)
        return x

    v0 = orth_to_deflated(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    nrm = np.linalg.norm(v0)
    if nrm < 1e-12:
        raise ConvergenceError("start vector annihilated by deflation")
    v0 /= nrm

    def ritz_lowest(alphas, betas, basis):
        theta, y = sla.eigh_tridiagonal(
            np.asarray(alphas), np.asarray(betas), select="i", select_range=(0, 0)
        )
        x = np.zeros(dim, dtype=complex)
        for c, u in zip(y[:, 0], basis):
            x += c * u
        x = orth_to_deflated(x)
        nx = np.linalg.norm(x)
        if nx < 1e-12:
            raise ConvergenceError("Ritz vector annihilated by deflation")
        x /= nx
        res = np.linalg.norm(orth_to_deflated(matvec(x)) - theta[0] * x)
        return theta[0], x, res

    total_iters = 0
    best = None
    while total_iters < maxiter:
        basis = [v0]
        alphas: list[float] = []
        betas: list[float] = []
        w = orth_to_deflated(matvec(v0))
        a = np.vdot(v0, w).real
        alphas.append(a)
        w = w - a * v0
        exhausted = False
        for _ in range(min(restart_every, maxiter - total_iters, dim - 1)):
            total_iters += 1
            # full reorthogonalization against the Krylov basis
            for u in basis:
                w = w - u * np.vdot(u, w)
            b = np.linalg.norm(w)
            if b < 1e-13:
                exhausted = True
                break
            v = w / b
            basis.append(v)
            betas.append(b)
            w = orth_to_deflated(matvec(v))
            a = np.vdot(v, w).real
            alphas.append(a)
            w = w - a * v - b * basis[-2]
            if len(alphas) % 10 == 0:
                best = ritz_lowest(alphas, betas, basis)
                if best[2] <= tol:
                    return best
        best = ritz_lowest(alphas, betas, basis)
        if best[2] <= tol or exhausted or len(basis) >= dim:
            # an exhausted Krylov space is exact up to roundoff
            return best
        v0 = best[1]  # restart from the current Ritz vector
    if best is not None and best[2] <= 100 * tol:
        warnings.warn(f"Lanczos residual {best[2]:.2e} above tol {tol:.2e}", stacklevel=2)
        return best
    raise ConvergenceError(f"Lanczos did not converge after {maxiter} iterations")


def lowest_eigenpairs_matvec(matvec, dim, k, *, tol=1e-10, maxiter=2000, seed=7):
    """k lowest eigenpairs of a Hermitian operator given as a matvec."""
    if k < 1:
        raise ValueError("k >= 1 required")
    if k > dim:
        raise ValueError(f"k={k} exceeds dimension {dim}")
    rng = np.random.default_rng(seed)
    vals, vecs, residuals = [], [], []
    while len(vals) < k:
        theta, x, res = _lanczos_ground(
            matvec, dim, rng, deflate=vecs, tol=tol, maxiter=maxiter
        )
        vals.append(theta)
        vecs.append(x)
        residuals.append(res)
    order = np.argsort(vals)
    return (
        np.asarray(vals)[order],
        [vecs[i] for i in order],
        np.asarray(residuals)[order],
    )


@dataclass
class SpectrumReport:
    """Low-energy spectrum with per-state observables.

    Eigenvalues ascend; vectors are full-space product-basis amplitudes.
    """

    eigenvalues: np.ndarray
    m_tot: np.ndarray
    sz_profiles: np.ndarray  # (k, L)
    residuals: np.ndarray
    vectors: list[np.ndarray] = field(repr=False)
    sector: float | None = None
    tol: float = 1e-10

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "m_tot": self.m_tot.tolist(),
            "sz_profiles": self.sz_profiles.tolist(),
            "residuals": self.residuals.tolist(),
            "sector": self.sector,
            "tol": self.tol,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def lowest_eigenpairs(
    terms: TermList,
    k: int,
    sector: float | None = None,
    *,
    tol: float = 1e-10,
    maxiter: int = 2000,
    seed: int = 7,
) -> SpectrumReport:
    """k lowest eigenpairs of the TermList via deflated Lanczos.

    With ``sector`` given, the iteration runs inside the fixed total-S^z
    subspace (requires a conserving TermList).  Near-degenerate states come
    out orthonormalized in energy order; states are labeled by M_tot.
    """
    d, L = terms.dim, terms.L
    if sector is not None:
        H, idx = sector_csr(terms, sector)
        dim = H.shape[0]
        if k > dim:
            raise ValueError(f"k={k} exceeds sector dimension {dim}")
        vals, vecs, res = lowest_eigenpairs_matvec(
            lambda x: H @ x, dim, k, tol=tol, maxiter=maxiter, seed=seed
        )
        full_vecs = []
        for v in vecs:
            w = np.zeros(d**L, dtype=complex)
            w[idx] = v
            full_vecs.append(w)
        vecs = full_vecs
    else:
        compiled = CompiledTerms(terms)
        vals, vecs, res = lowest_eigenpairs_matvec(
            compiled.apply, compiled.size, k, tol=tol, maxiter=maxiter, seed=seed
        )
    sz = basis_sz_values(L, d)
    profiles = np.array([site_magnetizations(v, L, d) for v in vecs])
    m_tot = np.array([float(np.sum(np.abs(v) ** 2 * sz)) for v in vecs])
    return SpectrumReport(
        eigenvalues=np.asarray(vals),
        m_tot=m_tot,
        sz_profiles=profiles,
        residuals=np.asarray(res),
        vectors=vecs,
        sector=sector,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# Krylov propagation
# ---------------------------------------------------------------------------


def _expm_krylov(matvec, v, angle, *, tol=1e-8, max_dim=90, _depth=0):
    """exp(-1j*angle*H) @ v for Hermitian H via a Lanczos subspace.

    The subspace grows until the standard last-component error estimate
    drops below tol; when max_dim is hit the step is split in half
    (recursively, raising ConvergenceError only past a depth cap).
    """
    if _depth > 24:
        raise ConvergenceError("Krylov step splitting exceeded depth 24; tolerance infeasible")
    nrm0 = np.linalg.norm(v)
    if nrm0 == 0:
        return v.copy()
    basis = [v / nrm0]
    alphas: list[float] = []
    betas: list[float] = []
    w = matvec(basis[0])
    a = np.vdot(basis[0], w).real
    alphas.append(a)
    w = w - a * basis[0]
    while True:
        m = len(alphas)
        theta, y = sla.eigh_tridiagonal(np.asarray(alphas), np.asarray(betas))
        u = (y * np.exp(-1j * angle * theta)) @ y[0, :].conj()
        b = np.linalg.norm(w)
        err = abs(u[-1]) * abs(angle) * b if m > 1 else b * abs(angle)
        if err <= tol or b < 1e-14 or m >= min(max_dim, len(v)):
            if err > tol and b >= 1e-14 and m >= max_dim:
                half = _expm_krylov(
                    matvec, v, angle / 2, tol=tol / 2, max_dim=max_dim, _depth=_depth + 1
                )
                return _expm_krylov(
                    matvec, half, angle / 2, tol=tol / 2, max_dim=max_dim, _depth=_depth + 1
                )
            out = np.zeros_like(basis[0])
            for c, q in zip(u, basis):
                out += c * q
            return nrm0 * out
        # extend the basis, fully reorthogonalized
        vnext = w / b
        for q in basis:
            vnext = vnext - q * np.vdot(q, vnext)
        vnext /= np.linalg.norm(vnext)
        basis.append(vnext)
        betas.append(b)
        w = matvec(vnext)
        a = np.vdot(vnext, w).real
        alphas.append(a)
        w = w - a * vnext - b * basis[-2]


def krylov_propagate(
    hamiltonian,
    v0: np.ndarray,
    t_grid,
    *,
    tol: float = 1e-8,
    max_dim: int = 90,
    observer=None,
):
    """Propagate v0 through the times in t_grid (microseconds).

    ``hamiltonian`` is a TermList/CompiledTerms (static) or a callable
    t -> TermList evaluated at each step midpoint (piecewise-constant H).
    Each step applies exp(-1j*2*pi*H*dt) with local error <= tol in norm.
    Returns the list of states at the grid times (including t_grid[0]).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be ascending")
    time_dependent = callable(hamiltonian)
    if not time_dependent:
        compiled = (
            hamiltonian
            if isinstance(hamiltonian, (CompiledTerms, sp.csr_matrix))
            else CompiledTerms(hamiltonian)
        )

    def as_matvec(obj):
        if isinstance(obj, sp.csr_matrix):
            return lambda x: obj @ x
        if isinstance(obj, CompiledTerms):
            return obj.apply
        return CompiledTerms(obj).apply

    v = v0.astype(complex).copy()
    states = [v.copy()]
    if observer is not None:
        observer(t_grid[0], v)
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        dt = t1 - t0
        if time_dependent:
            matvec = as_matvec(hamiltonian(0.5 * (t0 + t1)))
        else:
            matvec = as_matvec(compiled)
        v = _expm_krylov(matvec, v, 2 * np.pi * dt, tol=tol, max_dim=max_dim)
        states.append(v.copy())
        if observer is not None:
            observer(t1, v)
    return states


# ---------------------------------------------------------------------------
# observables on dense state vectors
# ---------------------------------------------------------------------------


def _apply_site_ops(v: np.ndarray, site_ops, L: int, dim: int) -> np.ndarray:
    vt = v.reshape((dim,) * L)
    for site, mat in site_ops:
        vt = np.moveaxis(np.tensordot(mat, vt, axes=([1], [site])), 0, site)
    return vt.reshape(v.shape)


def site_magnetizations(v: np.ndarray, L: int, dim: int = 3) -> np.ndarray:
    """<S^z_i> for every site."""
    prob = np.abs(v.reshape((dim,) * L)) ** 2
    w = np.array([1.0, 0.0, -1.0]) if dim == 3 else np.array([0.5, -0.5])
    out = np.empty(L)
    for i in range(L):
        axes = tuple(a for a in range(L) if a != i)
        out[i] = float(prob.sum(axis=axes) @ w)
    return out


def two_point_sz(v: np.ndarray, i: int, j: int, L: int, dim: int = 3) -> float:
    """<S^z_i S^z_j> (diagonal, so a probability-weighted sum)."""
    prob = np.abs(v.reshape((dim,) * L)) ** 2
    w = np.array([1.0, 0.0, -1.0]) if dim == 3 else np.array([0.5, -0.5])
    axes = tuple(a for a in range(L) if a not in (i, j))
    p2 = prob.sum(axis=axes)
    if i > j:
        p2 = p2.T
    return float(np.einsum("ab,a,b->", p2, w, w))


def string_order(v: np.ndarray, axis: str, i: int, j: int, L: int, dim: int = 3) -> float:
    """String order S^axis_{i,j} = -<S_i (prod_k exp(i*pi*S_k)) S_j>.

    Needs at least one interior site (j >= i + 2); the empty-string case is
    rejected rather than given an arbitrary convention.
    """
    if not 0 <= i < j < L:
        raise ValueError("need 0 <= i < j < L")
    if j < i + 2:
        raise ValueError("string order needs at least one interior site (j >= i + 2)")
    ops = algebra_for_dim(dim)
    s = ops.op("S" + axis)
    rot = pi_rotation(axis, dim)
    site_ops = [(i, s)] + [(k, rot) for k in range(i + 1, j)] + [(j, s)]
    w = _apply_site_ops(v, site_ops, L, dim)
    return float(np.real(-np.vdot(v, w)))


def ed_observables(v: np.ndarray, L: int, dim: int = 3, string_pairs=(), zz_pairs=()) -> dict:
    """Site magnetizations, total M, two-point <Sz Sz>, and string orders.

    string_pairs is an iterable of (axis, i, j); zz_pairs of (i, j).
    """
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"state not normalized (|v| = {nrm})")
    out = {
        "sz": site_magnetizations(v, L, dim),
        "m_tot": float(np.sum(np.abs(v) ** 2 * basis_sz_values(L, dim))),
        "zz": {(i, j): two_point_sz(v, i, j, L, dim) for i, j in zz_pairs},
    }
    strings = {}
    for axis, i, j in string_pairs:
        strings[(axis, i, j)] = string_order(v, axis, i, j, L, dim)
    out["string"] = strings
    return out


def product_state_vector(pattern, dim: int = 3) -> np.ndarray:
    """Dense product state from local labels/indices/vectors.

    Spin-1 labels: '+', '0', '-'; spin-1/2: 'up'/'down'.
    """
    label_map = {"+": 0, "0": 1, "-": 2} if dim == 3 else {"up": 0, "down": 1}
    v = np.array([1.0 + 0j])
    for p in pattern:
        if isinstance(p, str):
            local = np.zeros(dim, dtype=complex)
            local[label_map[p]] = 1.0
        elif np.isscalar(p):
            local = np.zeros(dim, dtype=complex)
            local[int(p)] = 1.0
        else:
            local = np.asarray(p, dtype=complex)
            local = local / np.linalg.norm(local)
        v = np.kron(v, local)
    return v
