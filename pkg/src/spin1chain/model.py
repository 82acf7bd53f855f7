"""Hamiltonian builders for every model variant of the toolkit.

All Hamiltonians are exchanged as a :class:`TermList`: a weighted sum of
operator strings with one or two single-site factors.  Coefficients are
energies E/h in MHz.  Site indices are 0-based; the staggering factor
(-1)^i therefore starts positive on site 0 (see :func:`add_staggered_field`
for the sign convention of the preparation sweep).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .algebra import algebra_for_dim

# ---------------------------------------------------------------------------
# term lists
# ---------------------------------------------------------------------------

Factor = tuple[int, str]


@dataclass(frozen=True)
class Term:
    """coefficient * product of single-site operators on distinct sites."""

    coeff: complex
    factors: tuple[Factor, ...]

    def __post_init__(self):
        sites = [s for s, _ in self.factors]
        if not 1 <= len(sites) <= 2:
            raise ValueError("a term carries one or two factors")
        if len(set(sites)) != len(sites):
            raise ValueError("factors must act on distinct sites")


@dataclass(frozen=True)
class TermList:
    """Hamiltonian as a list of operator-string terms.

    ``dim`` is the local dimension (3 spin-1, 2 spin-1/2).  The summed
    operator is Hermitian: every non-Hermitian term appears together with
    its conjugate partner.
    """

    L: int
    dim: int
    terms: tuple[Term, ...]
    conserves_total_sz: bool = True

    def __post_init__(self):
        for t in self.terms:
            for site, label in t.factors:
                if not 0 <= site < self.L:
                    raise ValueError(f"site {site} outside chain of length {self.L}")
                algebra_for_dim(self.dim).op(label)  # label must resolve

    def __len__(self) -> int:
        return len(self.terms)

    def extended(self, extra: list[Term], conserves_total_sz: bool | None = None) -> "TermList":
        cons = self.conserves_total_sz if conserves_total_sz is None else conserves_total_sz
        return replace(self, terms=self.terms + tuple(extra), conserves_total_sz=cons)

    def max_range(self) -> int:
        r = 0
        for t in self.terms:
            sites = [s for s, _ in t.factors]
            if len(sites) == 2:
                r = max(r, abs(sites[0] - sites[1]))
        return r


def _pair(coeff: complex, i: int, a: str, j: int, b: str) -> Term:
    return Term(complex(coeff), ((i, a), (j, b)))


def _site(coeff: complex, i: int, a: str) -> Term:
    return Term(complex(coeff), ((i, a),))


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdealModelParams:
    """Parameters of the idealized spin-1 model.

    Dipolar XY exchange decays as r^-3, the van der Waals terms as r^-6,
    with r_ij = |i-j| * lattice_spacing and pairs kept up to range_cutoff.
    """

    J_xy: float
    D: float
    V: float
    L: int
    range_cutoff: int = 5
    lattice_spacing: float = 1.0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L >= 2 required")
        if self.range_cutoff < 1:
            raise ValueError("range_cutoff >= 1 required")


@dataclass(frozen=True)
class XXZHalfParams:
    """Effective spin-1/2 XXZ limit: V (sigma+sigma- + h.c.) - V/2 sigma^z sigma^z per pair."""

    V: float
    L: int
    range_cutoff: int = 5
    lattice_spacing: float = 1.0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L >= 2 required")
        if self.range_cutoff < 1:
            raise ValueError("range_cutoff >= 1 required")


@dataclass(frozen=True)
class SSHParams:
    """Dimerized spin-1/2 chain of L unit cells with sites (i,A),(i,B)."""

    L: int
    J_intra: float
    J_inter: float
    delta: float = 0.0
    boundary: str = "open"

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L >= 2 unit cells required")
        if self.boundary not in ("open", "periodic"):
            raise ValueError("boundary must be 'open' or 'periodic'")

    @property
    def n_sites(self) -> int:
        return 2 * self.L


@dataclass(frozen=True)
class AKLTParams:
    L: int

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L >= 2 required")


@dataclass(frozen=True)
class DriveSpec:
    """Rabi drive Omega * S^x applied to a subset of sites."""

    rabi_frequency: float
    driven_sites: frozenset[int]
    total_time: float

    def __post_init__(self):
        if self.rabi_frequency < 0:
            raise ValueError("Omega >= 0 required")
        object.__setattr__(self, "driven_sites", frozenset(self.driven_sites))


# ---------------------------------------------------------------------------
# coupling tables (distance-resolved experimental interaction strengths)
# ---------------------------------------------------------------------------

COUPLING_COLUMNS = (
    "J_p0",
    "J_m0",
    "J_00",
    "V_diag",
    "V_offd",
    "V_p0",
    "V_m0",
    "V_pp",
    "V_mm",
    "V_00",
)

CSV_HEADER = ("distance",) + COUPLING_COLUMNS

#: entries below this magnitude (h*MHz) may be omitted from tables
COUPLING_FLOOR = 0.01

#: anisotropy of the bundled experimental table, h*MHz
BUNDLED_D = -4.47


@dataclass(frozen=True)
class CouplingTable:
    """Distance-indexed interaction strengths plus the on-site anisotropy D.

    ``entries[d]`` maps column name -> value in h*MHz for distance d >= 1;
    missing entries mean zero.
    """

    D: float
    entries: dict[int, dict[str, float]] = field(repr=False)
    floor: float = COUPLING_FLOOR

    def __post_init__(self):
        for d, row in self.entries.items():
            if d < 1:
                raise ValueError("distances are 1-based")
            for key, val in row.items():
                if key not in COUPLING_COLUMNS:
                    raise ValueError(f"unknown coupling column {key!r}")
                if not math.isfinite(val):
                    raise ValueError(f"non-finite coupling {key}={val} at distance {d}")

    @property
    def max_distance(self) -> int:
        return max(self.entries) if self.entries else 0

    def get(self, distance: int, column: str) -> float:
        return self.entries.get(distance, {}).get(column, 0.0)

    def asymmetry(self, distance: int) -> float:
        """delta^{+-0} = (J^{+0} - J^{-0}) / 2 at the given distance."""
        return 0.5 * (self.get(distance, "J_p0") - self.get(distance, "J_m0"))


def parse_coupling_csv(text: str, D: float, floor: float = COUPLING_FLOOR) -> CouplingTable:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_HEADER:
        raise ValueError(
            f"coupling CSV header must be {','.join(CSV_HEADER)}, got {reader.fieldnames}"
        )
    entries: dict[int, dict[str, float]] = {}
    for row in reader:
        d = int(row["distance"])
        vals = {}
        for col in COUPLING_COLUMNS:
            cell = (row[col] or "").strip()
            if cell:
                vals[col] = float(cell)
        entries[d] = vals
    return CouplingTable(D=D, entries=entries, floor=floor)


def load_coupling_table(path, D: float, floor: float = COUPLING_FLOOR) -> CouplingTable:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_coupling_csv(fh.read(), D=D, floor=floor)


def bundled_coupling_table(D: float = BUNDLED_D) -> CouplingTable:
    """The experimental Rubidium coupling table shipped with the package."""
    text = resources.files("spin1chain.data").joinpath("rydberg_couplings.csv").read_text()
    return parse_coupling_csv(text, D=D)


def coupling_table_to_csv(table: CouplingTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(CSV_HEADER)
    for d in sorted(table.entries):
        row = [d] + [table.entries[d].get(col, "") for col in COUPLING_COLUMNS]
        writer.writerow(row)
    return out.getvalue()


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _ideal_terms(p: IdealModelParams) -> TermList:
    terms: list[Term] = []
    for i in range(p.L):
        if p.D != 0.0:
            terms.append(_site(p.D, i, "Sz2"))
    for i in range(p.L):
        for j in range(i + 1, min(i + p.range_cutoff, p.L - 1) + 1):
            r = (j - i) * p.lattice_spacing
            jxy = p.J_xy / r**3
            if jxy != 0.0:
                terms.append(_pair(jxy / 2, i, "Sp", j, "Sm"))
                terms.append(_pair(jxy / 2, i, "Sm", j, "Sp"))
            v = p.V / r**6
            if v != 0.0:
                # (V/4)[(S+_i)^2 (S-_j)^2 + h.c.] + (V/2) Sz_i Sz_j (Sz_i Sz_j - 1)
                terms.append(_pair(v / 4, i, "Sp2", j, "Sm2"))
                terms.append(_pair(v / 4, i, "Sm2", j, "Sp2"))
                terms.append(_pair(v / 2, i, "Sz2", j, "Sz2"))
                terms.append(_pair(-v / 2, i, "Sz", j, "Sz"))
    return TermList(L=p.L, dim=3, terms=tuple(terms), conserves_total_sz=True)


def _experimental_terms(table: CouplingTable, L: int) -> TermList:
    if L < 2:
        raise ValueError("L >= 2 required")
    terms: list[Term] = []
    for i in range(L):
        if table.D != 0.0:
            terms.append(_site(table.D, i, "Sz2"))
    for i in range(L):
        for j in range(i + 1, L):
            d = j - i
            if d not in table.entries:
                continue
            g = lambda col: table.get(d, col)  # noqa: E731
            if g("J_p0"):
                terms.append(_pair(g("J_p0"), i, "T+0", j, "T0+"))
                terms.append(_pair(g("J_p0"), i, "T0+", j, "T+0"))
            if g("J_m0"):
                terms.append(_pair(g("J_m0"), i, "T-0", j, "T0-"))
                terms.append(_pair(g("J_m0"), i, "T0-", j, "T-0"))
            if g("J_00"):
                # |00><+-| + |00><-+| + h.c.
                terms.append(_pair(g("J_00"), i, "T0+", j, "T0-"))
                terms.append(_pair(g("J_00"), i, "T+0", j, "T-0"))
                terms.append(_pair(g("J_00"), i, "T0-", j, "T0+"))
                terms.append(_pair(g("J_00"), i, "T-0", j, "T+0"))
            if g("V_offd"):
                terms.append(_pair(g("V_offd"), i, "T+-", j, "T-+"))
                terms.append(_pair(g("V_offd"), i, "T-+", j, "T+-"))
            if g("V_diag"):
                terms.append(_pair(g("V_diag"), i, "P+", j, "P-"))
                terms.append(_pair(g("V_diag"), i, "P-", j, "P+"))
            if g("V_p0"):
                terms.append(_pair(g("V_p0"), i, "P+", j, "P0"))
                terms.append(_pair(g("V_p0"), i, "P0", j, "P+"))
            if g("V_m0"):
                terms.append(_pair(g("V_m0"), i, "P-", j, "P0"))
                terms.append(_pair(g("V_m0"), i, "P0", j, "P-"))
            if g("V_pp"):
                terms.append(_pair(g("V_pp"), i, "P+", j, "P+"))
            if g("V_mm"):
                terms.append(_pair(g("V_mm"), i, "P-", j, "P-"))
            if g("V_00"):
                terms.append(_pair(g("V_00"), i, "P0", j, "P0"))
    return TermList(L=L, dim=3, terms=tuple(terms), conserves_total_sz=True)


def _xxz_half_terms(p: XXZHalfParams) -> TermList:
    terms: list[Term] = []
    for i in range(p.L):
        for j in range(i + 1, min(i + p.range_cutoff, p.L - 1) + 1):
            r = (j - i) * p.lattice_spacing
            v = p.V / r**6
            if v == 0.0:
                continue
            terms.append(_pair(v, i, "sigma_p", j, "sigma_m"))
            terms.append(_pair(v, i, "sigma_m", j, "sigma_p"))
            terms.append(_pair(-v / 2, i, "sigma_z", j, "sigma_z"))
    return TermList(L=p.L, dim=2, terms=tuple(terms), conserves_total_sz=True)


def _ssh_terms(p: SSHParams) -> TermList:
    terms: list[Term] = []
    n = p.n_sites

    def bond(coeff: float, a: int, b: int):
        if coeff == 0.0:
            return
        terms.append(_pair(coeff, a, "sigma_x", b, "sigma_x"))
        terms.append(_pair(coeff, a, "sigma_y", b, "sigma_y"))
        if p.delta != 0.0:
            terms.append(_pair(coeff * p.delta, a, "sigma_z", b, "sigma_z"))

    for cell in range(p.L):
        a, b = 2 * cell, 2 * cell + 1
        bond(p.J_intra, a, b)
        if cell < p.L - 1:
            bond(p.J_inter, b, 2 * cell + 2)
    if p.boundary == "periodic":
        bond(p.J_inter, 0, n - 1)  # wraps B of the last cell to A of the first
    return TermList(L=n, dim=2, terms=tuple(terms), conserves_total_sz=True)


def _aklt_terms(p: AKLTParams) -> TermList:
    # P^{S=2}_{i,i+1} = 1/2 S_i.S_j + 1/6 (S_i.S_j)^2 + 1/3
    terms: list[Term] = []
    axes = "xyz"
    for i in range(p.L - 1):
        j = i + 1
        for a in axes:
            terms.append(_pair(0.5, i, "S" + a, j, "S" + a))
        for a in axes:
            for b in axes:
                terms.append(_pair(1.0 / 6.0, i, f"S{a}S{b}", j, f"S{a}S{b}"))
        terms.append(_site(1.0 / 3.0, i, "Id"))
    return TermList(L=p.L, dim=3, terms=tuple(terms), conserves_total_sz=True)


def build_terms(variant: str, params, L: int | None = None) -> TermList:
    """Build the TermList for a model variant.

    variant: 'ideal' (IdealModelParams), 'experimental' (CouplingTable, L=...),
    'xxz_half' (XXZHalfParams), 'ssh' (SSHParams), 'aklt' (AKLTParams or L=...).
    """
    if variant == "ideal":
        return _ideal_terms(params)
    if variant == "experimental":
        if L is None:
            raise ValueError("experimental variant needs L")
        return _experimental_terms(params, L)
    if variant == "xxz_half":
        return _xxz_half_terms(params)
    if variant == "ssh":
        return _ssh_terms(params)
    if variant == "aklt":
        if isinstance(params, int):
            params = AKLTParams(L=params)
        return _aklt_terms(params)
    raise ValueError(f"unknown model variant {variant!r}")


# ---------------------------------------------------------------------------
# field / drive modifiers
# ---------------------------------------------------------------------------


def add_staggered_field(terms: TermList, mu: float) -> TermList:
    """Append mu * (-1)^i S^z_i (0-based sites, +mu on site 0).

    For mu > 0 the large-field ground state is |-+-+...>; the preparation
    sweep targets |+-+-...> and therefore applies this with a negative mu
    (see protocols.sweep_hamiltonian).
    """
    if terms.dim != 3:
        raise ValueError("staggered field is defined on spin-1 chains")
    if mu == 0.0:
        return terms
    extra = [_site(mu * (-1) ** i, i, "Sz") for i in range(terms.L)]
    return terms.extended(extra)


def add_drive(terms: TermList, drive: DriveSpec) -> TermList:
    """Append Omega * S^x_i on the driven sites; breaks total-S^z conservation."""
    if not drive.driven_sites:
        warnings.warn("empty drive site set; TermList unchanged", stacklevel=2)
        return terms
    bad = [i for i in drive.driven_sites if not 0 <= i < terms.L]
    if bad:
        raise ValueError(f"driven sites {bad} outside chain of length {terms.L}")
    if drive.rabi_frequency == 0.0:
        return terms
    label = "Sx" if terms.dim == 3 else "sigma_x"
    extra = [_site(drive.rabi_frequency, i, label) for i in sorted(drive.driven_sites)]
    return terms.extended(extra, conserves_total_sz=False)


def add_uniform_sz_field(terms: TermList, eps: float) -> TermList:
    """Append eps * sum_i S^z_i (symmetry-breaking probe field)."""
    if eps == 0.0:
        return terms
    label = "Sz" if terms.dim == 3 else "sigma_z"
    extra = [_site(eps, i, label) for i in range(terms.L)]
    return terms.extended(extra)


def add_transverse_field(terms: TermList, omega: float, kind: str = "homogeneous") -> TermList:
    """Append -Omega * sigma^x_i, homogeneous or staggered by sublattice (even/odd sites).

    The staggered variant flips the sign on odd sites, so the large-Omega
    ground state is the product |-> +> |<-| pattern used by the dimerized-chain
    preparation analysis.
    """
    if terms.dim != 2:
        raise ValueError("transverse ramp fields are defined on spin-1/2 chains")
    if omega == 0.0:
        return terms
    if kind not in ("homogeneous", "staggered"):
        raise ValueError("kind must be 'homogeneous' or 'staggered'")
    extra = []
    for i in range(terms.L):
        sign = -1.0 if (kind == "homogeneous" or i % 2 == 0) else 1.0
        extra.append(_site(sign * omega, i, "sigma_x"))
    return terms.extended(extra, conserves_total_sz=False)


def synthetic_uniform_table(J: float, V: float, distances=(1,), D: float = 0.0) -> CouplingTable:
    """CouplingTable with J^{+0}=J^{-0}=J^{00}=J and V^diag=V^offd=V at the given distances."""
    entries = {
        int(d): {"J_p0": J, "J_m0": J, "J_00": J, "V_diag": V, "V_offd": V} for d in distances
    }
    return CouplingTable(D=D, entries=entries, floor=0.0)
