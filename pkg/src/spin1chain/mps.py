"""Finite matrix product states: canonical forms, measurements, diagnostics.

Site tensors are (left bond, physical, right bond).  Operations are
functional: they return new MPS values and never mutate their inputs.
``lambdas[b]`` holds the Schmidt values of bond b (between sites b-1 and
b), normalized so sum(lambda^2) = 1; boundaries are [1.0].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .algebra import algebra_for_dim, pi_rotation


class GaugeDegeneracyError(RuntimeError):
    """Leading transfer eigenvector is degenerate; the on-bond unitary is not unique."""


@dataclass
class MPS:
    tensors: list[np.ndarray]
    lambdas: list[np.ndarray | None] = None
    center: int | None = None

    def __post_init__(self):
        if self.lambdas is None:
            self.lambdas = [None] * (self.L + 1)
            self.lambdas[0] = np.array([1.0])
            self.lambdas[self.L] = np.array([1.0])

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def dim(self) -> int:
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[0] for t in self.tensors] + [self.tensors[-1].shape[2]]

    def copy(self) -> "MPS":
        return MPS(
            [t.copy() for t in self.tensors],
            [None if l is None else l.copy() for l in self.lambdas],
            self.center,
        )

    def norm(self) -> float:
        return float(np.sqrt(abs(overlap(self, self).real)))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def product_mps(pattern, dim: int = 3) -> MPS:
    """Bond-dimension-1 product state from local labels/indices/vectors."""
    label_map = {"+": 0, "0": 1, "-": 2} if dim == 3 else {"up": 0, "down": 1}
    tensors = []
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
        tensors.append(local.reshape(1, dim, 1))
    mps = MPS(tensors, center=0)
    for b in range(len(tensors) + 1):
        mps.lambdas[b] = np.array([1.0])
    return mps


def random_mps(L: int, chi: int, dim: int = 3, rng=None) -> MPS:
    """Normalized random MPS with bond dimension min(chi, exact)."""
    rng = np.random.default_rng(rng)
    dims = [1]
    for i in range(1, L):
        dims.append(int(min(chi, dim ** i, dim ** (L - i))))
    dims.append(1)
    tensors = [
        rng.standard_normal((dims[i], dim, dims[i + 1]))
        + 1j * rng.standard_normal((dims[i], dim, dims[i + 1]))
        for i in range(L)
    ]
    return canonicalize(MPS(tensors), center=0, normalize=True)


#: AKLT site tensor (chi=2): A[a, m, b] in the |+>,|0>,|-> physical order.
def _aklt_site_tensor() -> np.ndarray:
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = np.array([[0, 0], [1, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    A = np.empty((2, 3, 2), dtype=complex)
    A[:, 0, :] = np.sqrt(2.0 / 3.0) * sp
    A[:, 1, :] = -np.sqrt(1.0 / 3.0) * sz
    A[:, 2, :] = -np.sqrt(2.0 / 3.0) * sm
    return A


def aklt_bulk_cell() -> np.ndarray:
    """Analytic two-site unit cell of the valence-bond-solid state.

    Uniform gauge by construction; the canonical reference for
    transfer-overlap comparisons (cells taken from a canonicalized finite
    chain carry independent bond rotations in the degenerate Schmidt pairs
    and are not internally consistent).
    """
    A = _aklt_site_tensor()
    return np.tensordot(A, A, axes=([2], [0])).reshape(2, 9, 2)


def aklt_mps(L: int, left_edge: str = "up", right_edge: str = "down") -> MPS:
    """Exact chi=2 valence-bond-solid state with fixed spin-1/2 edge labels.

    The boundary vectors select the dangling edge spins; 'up' on the left
    edge gives a positive edge magnetization (the three leftmost sites sum
    to +1/2 up to terms of order 3^-L).
    """
    if L < 2:
        raise ValueError("L >= 2 required")
    # the right virtual index transforms in the dual (valence-bond twist),
    # so the physical right edge spin maps to the opposite index
    left_sel = {"up": 0, "down": 1}
    right_sel = {"up": 1, "down": 0}
    A = _aklt_site_tensor()
    tensors = [A.copy() for _ in range(L)]
    tensors[0] = A[left_sel[left_edge]].reshape(1, 3, 2)
    tensors[-1] = A[:, :, right_sel[right_edge]].reshape(2, 3, 1)
    return canonicalize(MPS(tensors), center=0, normalize=True)


def mps_from_dense(v: np.ndarray, L: int, dim: int = 3, chi_max: int | None = None,
                   cutoff: float = 1e-14) -> MPS:
    """Exact (up to cutoff) MPS decomposition of a dense state vector."""
    if v.shape[0] != dim**L:
        raise ValueError("vector length does not match dim**L")
    tensors = []
    rest = v.reshape(1, -1)
    for _ in range(L - 1):
        dl = rest.shape[0]
        m = rest.reshape(dl * dim, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = s > cutoff * s[0] if s[0] > 0 else s > 0
        if chi_max is not None:
            keep[chi_max:] = False
        k = max(int(keep.sum()), 1)
        tensors.append(u[:, :k].reshape(dl, dim, k))
        rest = (s[:k, None] * vh[:k]).reshape(k, -1)
    tensors.append(rest.reshape(rest.shape[0], dim, 1))
    return canonicalize(MPS(tensors), center=L - 1)


def to_dense(mps: MPS) -> np.ndarray:
    """Dense amplitudes (site 0 = most significant digit); small L only."""
    if mps.dim**mps.L > 3**13:
        raise ValueError("to_dense is meant for short chains")
    acc = mps.tensors[0]
    for t in mps.tensors[1:]:
        acc = np.tensordot(acc, t, axes=([-1], [0]))
    return acc.reshape(-1)


# ---------------------------------------------------------------------------
# canonical forms
# ---------------------------------------------------------------------------


def _svd_trunc(m: np.ndarray, chi_max: int | None, cutoff: float):
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    total = float(np.sum(s**2))
    keep = np.ones(len(s), dtype=bool)
    if cutoff > 0 and total > 0:
        keep &= s >= cutoff * np.sqrt(total)
    if chi_max is not None:
        keep[chi_max:] = False
    if len(keep):
        keep[0] = True  # never drop the whole state
    k = int(keep.sum())
    discarded = float(np.sum(s[k:] ** 2) / total) if total > 0 else 0.0
    return u[:, :k], s[:k], vh[:k], discarded


def canonicalize(mps: MPS, center: int = 0, normalize: bool = False) -> MPS:
    """Mixed-canonical form with the orthogonality center at ``center``.

    Fills every bond's Schmidt values.  With normalize=True the state norm
    is divided out of the center tensor.
    """
    L = mps.L
    if not 0 <= center < L:
        raise IndexError(f"center {center} outside [0, {L})")
    T = [t.astype(complex).copy() for t in mps.tensors]
    lambdas: list[np.ndarray | None] = [None] * (L + 1)
    lambdas[0] = np.array([1.0])
    lambdas[L] = np.array([1.0])
    # right-canonicalize everything via LQ
    for i in range(L - 1, 0, -1):
        dl, d, dr = T[i].shape
        q, r = np.linalg.qr(T[i].reshape(dl, d * dr).T)
        k = q.shape[1]
        T[i] = q.T.reshape(k, d, dr)
        T[i - 1] = np.tensordot(T[i - 1], r.T, axes=([2], [0]))
    # left-to-right SVD sweep records Schmidt values on every bond
    for i in range(L - 1):
        dl, d, dr = T[i].shape
        u, s, vh, _ = _svd_trunc(T[i].reshape(dl * d, dr), None, 0.0)
        ns = np.linalg.norm(s)
        lambdas[i + 1] = s / ns if ns > 0 else s
        T[i] = u.reshape(dl, d, -1)
        T[i + 1] = np.tensordot((s[:, None] * vh), T[i + 1], axes=([1], [0]))
    # right-to-left SVD sweep back to the requested center
    for i in range(L - 1, center, -1):
        dl, d, dr = T[i].shape
        m = T[i].reshape(dl, d * dr)
        u, s, vh, _ = _svd_trunc(m, None, 0.0)
        ns = np.linalg.norm(s)
        lambdas[i] = s / ns if ns > 0 else s
        T[i] = vh.reshape(-1, d, dr)
        T[i - 1] = np.tensordot(T[i - 1], u * s[None, :], axes=([2], [0]))
    if normalize:
        n = np.linalg.norm(T[center])
        if n > 0:
            T[center] = T[center] / n
    return MPS(T, lambdas, center)


def truncate_bond(mps: MPS, bond: int, chi_max: int | None = None,
                  cutoff: float = 0.0) -> tuple[MPS, float]:
    """Truncate one bond; returns (new MPS, discarded weight).

    ``bond`` is in 1..L-1.  Schmidt values below cutoff (relative to the
    state norm) and beyond chi_max are dropped and the state renormalized.
    """
    if not 1 <= bond <= mps.L - 1:
        raise IndexError(f"bond {bond} outside 1..{mps.L - 1}")
    c = canonicalize(mps, center=bond - 1, normalize=True)
    theta = np.tensordot(c.tensors[bond - 1], c.tensors[bond], axes=([2], [0]))
    dl, d1, d2, dr = theta.shape
    u, s, vh, discarded = _svd_trunc(theta.reshape(dl * d1, d2 * dr), chi_max, cutoff)
    ns = np.linalg.norm(s)
    s = s / ns if ns > 0 else s
    T = [t.copy() for t in c.tensors]
    T[bond - 1] = (u * s[None, :]).reshape(dl, d1, -1)
    T[bond] = vh.reshape(-1, d2, dr)
    lambdas = [None if l is None else l.copy() for l in c.lambdas]
    lambdas[bond] = s.copy()
    return MPS(T, lambdas, bond - 1), discarded


def isometry_defect(mps: MPS) -> float:
    """Max deviation from the canonical-form isometry conditions."""
    if mps.center is None:
        return np.inf
    worst = 0.0
    for i, t in enumerate(mps.tensors):
        dl, d, dr = t.shape
        if i < mps.center:
            m = t.reshape(dl * d, dr)
            worst = max(worst, float(np.abs(m.conj().T @ m - np.eye(dr)).max()))
        elif i > mps.center:
            m = t.reshape(dl, d * dr)
            worst = max(worst, float(np.abs(m @ m.conj().T - np.eye(dl)).max()))
    return worst


# ---------------------------------------------------------------------------
# overlaps and measurements
# ---------------------------------------------------------------------------


def overlap(a: MPS, b: MPS) -> complex:
    """Exact inner product <a|b>."""
    if a.L != b.L:
        raise ValueError("length mismatch")
    E = np.ones((1, 1), dtype=complex)
    for ta, tb in zip(a.tensors, b.tensors):
        E = np.tensordot(E, ta.conj(), axes=([0], [0]))  # (kb, d, ra)
        E = np.tensordot(E, tb, axes=([0, 1], [0, 1]))  # (ra, rb)
    return complex(E[0, 0])


def expectation_product(mps: MPS, site_ops) -> complex:
    """<psi| prod_k O_k |psi> / <psi|psi> for single-site operators O_k.

    site_ops: iterable of (site, matrix) on distinct sites.
    """
    ops = dict()
    for site, mat in site_ops:
        if site in ops:
            ops[site] = np.asarray(mat) @ ops[site]
        else:
            ops[site] = np.asarray(mat)
    E = np.ones((1, 1), dtype=complex)
    N = np.ones((1, 1), dtype=complex)
    for i, t in enumerate(mps.tensors):
        tc = t.conj()
        top = np.tensordot(E, tc, axes=([0], [0]))  # (lk, d, rb)
        if i in ops:
            top = np.tensordot(top, ops[i], axes=([1], [0]))  # (lk, rb, d')
            top = np.moveaxis(top, 2, 1)
        E = np.tensordot(top, t, axes=([0, 1], [0, 1]))  # (rb, rk)
        N = np.tensordot(np.tensordot(N, tc, axes=([0], [0])), t, axes=([0, 1], [0, 1]))
    return complex(E[0, 0] / N[0, 0])


def measure_local(mps: MPS, axis: str, i: int) -> float:
    ops = algebra_for_dim(mps.dim)
    return float(expectation_product(mps, [(i, ops.op("S" + axis))]).real)


def measure_two_point(mps: MPS, axis_a: str, i: int, axis_b: str, j: int) -> float:
    ops = algebra_for_dim(mps.dim)
    val = expectation_product(mps, [(i, ops.op("S" + axis_a)), (j, ops.op("S" + axis_b))])
    return float(val.real)


def measure_string(mps: MPS, axis: str, i: int, j: int) -> float:
    """String order -<S_i (prod interior exp(i pi S)) S_j>; needs j >= i + 2."""
    if not 0 <= i < j < mps.L:
        raise ValueError("need 0 <= i < j < L")
    if j < i + 2:
        raise ValueError("string order needs at least one interior site (j >= i + 2)")
    ops = algebra_for_dim(mps.dim)
    s = ops.op("S" + axis)
    rot = pi_rotation(axis, mps.dim)
    site_ops = [(i, s)] + [(k, rot) for k in range(i + 1, j)] + [(j, s)]
    return float(-expectation_product(mps, site_ops).real)


def measure(mps: MPS, kind: str, *args) -> float:
    """Dispatcher: kind in {'local', 'two_point', 'string'}."""
    if kind == "local":
        return measure_local(mps, *args)
    if kind == "two_point":
        return measure_two_point(mps, *args)
    if kind == "string":
        return measure_string(mps, *args)
    raise ValueError(f"unknown measurement kind {kind!r}")


# ---------------------------------------------------------------------------
# entanglement reports
# ---------------------------------------------------------------------------


@dataclass
class EntanglementReport:
    bond: int
    singular_values: np.ndarray
    entropy: float
    degeneracies: list[int] = field(default_factory=list)

    @staticmethod
    def entropy_of(svals: np.ndarray) -> float:
        p = svals[svals > 1e-15] ** 2
        return float(-np.sum(p * np.log(p)))


def degeneracy_pattern(svals: np.ndarray, rel_tol: float = 1e-3,
                       floor: float = 0.0) -> list[int]:
    """Multiplicities of distinct lambda^2 clusters (descending), ignoring
    values with lambda^2 below ``floor``."""
    lam2 = np.sort(svals**2)[::-1]
    lam2 = lam2[lam2 > floor]
    groups: list[int] = []
    ref = None
    for v in lam2:
        if ref is not None and abs(ref - v) <= rel_tol * ref:
            groups[-1] += 1
        else:
            groups.append(1)
            ref = v
    return groups


def entanglement_report(mps: MPS, bond: int, rel_tol: float = 1e-3,
                        floor: float = 0.0) -> EntanglementReport:
    """Schmidt spectrum, von Neumann entropy (natural log) and degeneracy
    multiplicities at ``bond`` (1..L-1)."""
    if not 1 <= bond <= mps.L - 1:
        raise IndexError(f"bond {bond} outside 1..{mps.L - 1}")
    if mps.lambdas[bond] is None or mps.center is None:
        mps = canonicalize(mps, center=max(bond - 1, 0), normalize=True)
    svals = np.asarray(mps.lambdas[bond])
    return EntanglementReport(
        bond=bond,
        singular_values=svals,
        entropy=EntanglementReport.entropy_of(svals),
        degeneracies=degeneracy_pattern(svals, rel_tol=rel_tol, floor=floor),
    )


# ---------------------------------------------------------------------------
# transfer-matrix diagnostics on two-site unit cells
# ---------------------------------------------------------------------------


def cell_tensor(cell) -> np.ndarray:
    """Combine a sequence of site tensors into one (Dl, d_total, Dr) tensor."""
    if isinstance(cell, np.ndarray):
        return cell
    acc = cell[0]
    for t in cell[1:]:
        acc = np.tensordot(acc, t, axes=([-1], [0]))
        acc = acc.reshape(acc.shape[0], -1, acc.shape[-1])
    return acc


def _transfer_apply(ket: np.ndarray, bra: np.ndarray):
    """Map X -> sum_m ket^m @ X @ (bra^m)^dagger on (chi_ket, chi_bra) matrices."""

    def apply(X):
        # ket: (l, m, r); X: (l, l'); bra: (l', m, r')
        Y = np.tensordot(ket, X, axes=([0], [0]))  # (m, r, l')
        return np.tensordot(Y, bra.conj(), axes=([0, 2], [1, 0]))  # (r, r')

    return apply


def _dominant_eigs(apply_T, shape, n_eigs=1, tol=1e-10, maxiter=10000, seed=11):
    """Dominant eigenpairs of a linear map on matrices.

    Small maps are diagonalized densely and large ones by Arnoldi
    iteration; plain power iteration (kept as a fallback) cannot separate
    eigenvalues of equal modulus, which occur generically here, e.g. for
    unit cells carrying a residual bond-gauge rotation or for real states
    whose shift eigenvalue is a complex-conjugate pair.
    """
    dim = shape[0] * shape[1]
    if dim <= 256:
        basis = np.eye(dim)
        Tm = np.column_stack(
            [apply_T(basis[:, i].reshape(shape)).reshape(-1) for i in range(dim)]
        )
        vals, vecs = np.linalg.eig(Tm)
        order = np.argsort(-np.abs(vals))
        return [
            (complex(vals[o]), vecs[:, o].reshape(shape) / np.linalg.norm(vecs[:, o]))
            for o in order[:n_eigs]
        ]
    try:
        import scipy.sparse.linalg as spla

        op = spla.LinearOperator(
            (dim, dim),
            matvec=lambda x: apply_T(x.reshape(shape).astype(complex)).reshape(-1),
            dtype=complex,
        )
        k = min(max(n_eigs, 2), dim - 2)
        vals, vecs = spla.eigs(op, k=k, which="LM", tol=1e-12, maxiter=maxiter)
        order = np.argsort(-np.abs(vals))
        return [
            (complex(vals[o]), vecs[:, o].reshape(shape) / np.linalg.norm(vecs[:, o]))
            for o in order[:n_eigs]
        ]
    except Exception:
        pass  # fall back to power iteration with deflation
    rng = np.random.default_rng(seed)
    found: list[tuple[complex, np.ndarray]] = []

    def project(X):
        for _, v in found:
            X = X - v * np.vdot(v, X)
        return X

    for _ in range(n_eigs):
        X = project(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        X /= np.linalg.norm(X)
        lam = 0.0
        for it in range(maxiter):
            Y = project(apply_T(X))
            lam = np.vdot(X, Y)
            res = np.linalg.norm(Y - lam * X)
            ny = np.linalg.norm(Y)
            if ny < 1e-300:
                lam = 0.0
                break
            X = Y / ny
            if res <= tol * max(abs(lam), 1e-30):
                break
        else:
            raise GaugeDegeneracyError(
                f"power iteration did not isolate an eigenvalue after {maxiter} steps "
                f"(residual {res:.2e}); leading transfer spectrum may be degenerate"
            )
        found.append((complex(lam), X))
    return found


def _self_normalized(cell: np.ndarray, tol=1e-10, maxiter=10000) -> np.ndarray:
    chi = cell.shape[0]
    if cell.shape[2] != chi:
        raise ValueError("unit cell must have equal left and right bond dimensions")
    (lam, _), = _dominant_eigs(_transfer_apply(cell, cell), (chi, chi), 1, tol, maxiter)
    scale = np.sqrt(abs(lam))
    if scale == 0:
        raise ValueError("unit cell has zero transfer weight")
    return cell / scale


def transfer_overlap_per_cell(cell, reference, tol=1e-10, maxiter=10000) -> float:
    """Per-unit-cell overlap density: |leading eigenvalue| of the mixed
    transfer matrix of two self-normalized unit cells."""
    a = _self_normalized(cell_tensor(cell), tol, maxiter)
    b = _self_normalized(cell_tensor(reference), tol, maxiter)
    if a.shape[1] != b.shape[1]:
        raise ValueError("physical dimensions of the cells differ")
    (lam, _), = _dominant_eigs(
        _transfer_apply(a, b), (a.shape[0], b.shape[0]), 1, tol, maxiter
    )
    return float(min(abs(lam), 1.0))


@dataclass
class PhaseFactorResult:
    """Outcome of a projective-symmetry analysis on a bulk unit cell.

    phase is +1 / -1, or 0 when the state is not invariant under the
    symmetry (mixed transfer eigenvalue modulus below 1 - invariance_tol;
    the modulus itself is always reported).
    """

    phase: int
    eigenvalue_modulus: float
    unitarity_defect: float = np.nan
    uu_conj_trace: complex = np.nan


def symmetry_phase_factor(
    cell,
    symmetry: str = "time_reversal",
    invariance_tol: float = 1e-2,
    tol: float = 1e-10,
    maxiter: int = 10000,
) -> PhaseFactorResult:
    """Projective phase factor (+1 trivial, -1 topological) of a symmetry
    acting on a uniform unit cell.

    For time reversal the transformed cell applies exp(i pi S^y) on each
    physical leg and conjugates the ket tensor; the on-bond unitary U is
    extracted from the leading eigenvector of the generalized transfer
    matrix and the sign of U U* is returned.
    """
    if symmetry != "time_reversal":
        raise ValueError(f"unsupported symmetry {symmetry!r}")
    a = cell_tensor(cell)
    n_sites = round(np.log(a.shape[1]) / np.log(3))
    if 3**n_sites != a.shape[1]:
        raise ValueError("phase factor analysis expects spin-1 cells")
    a = _self_normalized(a, tol, maxiter)
    chi = a.shape[0]
    R = pi_rotation("y", 3)
    for _ in range(n_sites - 1):
        R = np.kron(R, pi_rotation("y", 3))
    transformed = np.tensordot(R, a.conj(), axes=([1], [1]))  # (m', l, r)
    transformed = np.moveaxis(transformed, 0, 1)

    pairs = _dominant_eigs(
        _transfer_apply(transformed, a), (chi, chi), n_eigs=min(2, chi * chi),
        tol=tol, maxiter=maxiter,
    )
    lam1 = pairs[0][0]
    modulus = abs(lam1)
    if modulus < 1.0 - invariance_tol:
        return PhaseFactorResult(phase=0, eigenvalue_modulus=modulus)
    if len(pairs) > 1 and abs(abs(pairs[1][0]) - modulus) < 1e-6:
        raise GaugeDegeneracyError(
            "leading eigenvector of the generalized transfer matrix is degenerate"
        )
    U = pairs[0][1]
    U = U * np.sqrt(chi) / np.linalg.norm(U)
    unitarity = float(np.abs(U @ U.conj().T - np.eye(chi)).max())
    z = complex(np.trace(U @ U.conj()) / chi)
    if abs(abs(z) - 1.0) > 1e-2 or abs(z.imag) > 1e-2:
        raise GaugeDegeneracyError(
            f"on-bond unitary is not determined (tr(U U*)/chi = {z:.4f})"
        )
    return PhaseFactorResult(
        phase=1 if z.real > 0 else -1,
        eigenvalue_modulus=modulus,
        unitarity_defect=unitarity,
        uu_conj_trace=z,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def save_mps(mps: MPS, path) -> None:
    """Write an MPS to ``path`` as an npz archive (shapes + complex arrays)."""
    arrays = {f"tensor_{i}": t for i, t in enumerate(mps.tensors)}
    for b, lam in enumerate(mps.lambdas):
        if lam is not None:
            arrays[f"lambda_{b}"] = lam
    meta = {"L": mps.L, "dim": mps.dim, "center": mps.center, "format": 1}
    arrays["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    np.savez_compressed(path, **arrays)


def load_mps(path) -> MPS:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        tensors = [data[f"tensor_{i}"] for i in range(meta["L"])]
        lambdas = [None] * (meta["L"] + 1)
        for b in range(meta["L"] + 1):
            key = f"lambda_{b}"
            if key in data:
                lambdas[b] = data[key]
    return MPS(tensors, lambdas, meta["center"])
