import numpy as np
import pytest

from spin1chain.ed import assemble_dense, basis_sz_values
from spin1chain.model import (
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
    coupling_table_to_csv,
    parse_coupling_csv,
    synthetic_uniform_table,
)

IDX = {"+": 0, "0": 1, "-": 2}


def pair_index(a, b):
    return 3 * IDX[a] + IDX[b]


def all_variants_L(L):
    return [
        build_terms("ideal", IdealModelParams(J_xy=1.1, D=-0.7, V=0.4, L=L)),
        build_terms("experimental", bundled_coupling_table(), L=L),
        build_terms("xxz_half", XXZHalfParams(V=0.9, L=L)),
        build_terms("ssh", SSHParams(L=L, J_intra=0.2, J_inter=1.0, delta=0.5)),
        build_terms("aklt", AKLTParams(L=L)),
    ]


def test_all_variants_hermitian_on_two_sites():
    for terms in all_variants_L(2):
        H = assemble_dense(terms)
        assert np.abs(H - H.conj().T).max() <= 1e-12


@pytest.mark.parametrize("L", [2, 3, 4])
def test_total_sz_commutation(L):
    for terms in all_variants_L(L):
        if not terms.conserves_total_sz:
            continue
        H = assemble_dense(terms)
        sz_tot = np.diag(basis_sz_values(terms.L, terms.dim))
        assert np.abs(H @ sz_tot - sz_tot @ H).max() <= 1e-12


def test_ideal_two_site_m0_block():
    terms = build_terms("ideal", IdealModelParams(J_xy=1.0, D=0.0, V=0.0, L=2))
    H = assemble_dense(terms)
    block = [pair_index("+", "-"), pair_index("0", "0"), pair_index("-", "+")]
    ev = np.linalg.eigvalsh(H[np.ix_(block, block)])
    np.testing.assert_allclose(ev, [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)


def test_experimental_reproduces_pair_matrix_slots():
    table = bundled_coupling_table(D=0.0)
    H = assemble_dense(build_terms("experimental", table, L=2)).real
    g = lambda c: table.get(1, c)  # noqa: E731
    slots = {
        ("++", "++"): g("V_pp"),
        ("+0", "+0"): g("V_p0"),
        ("+-", "+-"): g("V_diag"),
        ("0+", "0+"): g("V_p0"),
        ("00", "00"): g("V_00"),
        ("0-", "0-"): g("V_m0"),
        ("-+", "-+"): g("V_diag"),
        ("-0", "-0"): g("V_m0"),
        ("--", "--"): g("V_mm"),
        ("0+", "+0"): g("J_p0"),
        ("-0", "0-"): g("J_m0"),
        ("00", "+-"): g("J_00"),
        ("00", "-+"): g("J_00"),
        ("+-", "-+"): g("V_offd"),
    }
    seen = np.zeros((9, 9), dtype=bool)
    for (bra, ket), val in slots.items():
        i, j = pair_index(*bra), pair_index(*ket)
        assert H[i, j] == val, (bra, ket)
        assert H[j, i] == val
        seen[i, j] = seen[j, i] = True
    assert np.all(H[~seen] == 0.0)


def test_experimental_nn_matrix_element():
    H = assemble_dense(build_terms("experimental", bundled_coupling_table(), L=2))
    assert H[pair_index("0", "+"), pair_index("+", "0")].real == 4.36


def test_ideal_equals_synthetic_experimental():
    for L in (2, 4):
        ti = build_terms(
            "ideal", IdealModelParams(J_xy=1.3, D=0.7, V=0.9, L=L, range_cutoff=1)
        )
        ts = build_terms("experimental", synthetic_uniform_table(1.3, 0.9, D=0.7), L=L)
        assert np.abs(assemble_dense(ti) - assemble_dense(ts)).max() <= 1e-12


def test_ideal_power_law_tails():
    terms = build_terms("ideal", IdealModelParams(J_xy=1.0, D=0.0, V=1.0, L=4))
    xy = {}
    vdw = {}
    for t in terms.terms:
        if len(t.factors) != 2:
            continue
        (i, a), (j, b) = t.factors
        if a == "Sp" and b == "Sm":
            xy[j - i] = 2 * t.coeff.real
        if a == "Sp2" and b == "Sm2":
            vdw[j - i] = 4 * t.coeff.real
    assert xy[2] == pytest.approx(1 / 8)
    assert xy[3] == pytest.approx(1 / 27)
    assert vdw[2] == pytest.approx(1 / 64)
    assert vdw[3] == pytest.approx(1 / 729)


def test_aklt_is_projector_sum():
    H = assemble_dense(build_terms("aklt", 2))
    ev = np.linalg.eigvalsh(H)
    np.testing.assert_allclose(ev, [0, 0, 0, 0, 1, 1, 1, 1, 1], atol=1e-12)
    assert ev.min() >= -1e-12  # positive semidefinite


def test_xxz_half_two_site_oracle():
    # dense 4x4: spectrum {-V/2 (x3), 3V/2}; sign flip negates it
    V = 0.7
    H = assemble_dense(build_terms("xxz_half", XXZHalfParams(V=V, L=2)))
    ev = np.sort(np.linalg.eigvalsh(H))
    np.testing.assert_allclose(ev, [-V / 2, -V / 2, -V / 2, 3 * V / 2], atol=1e-12)
    Hm = assemble_dense(build_terms("xxz_half", XXZHalfParams(V=-V, L=2)))
    np.testing.assert_allclose(
        np.sort(np.linalg.eigvalsh(Hm)), -ev[::-1], atol=1e-12
    )


def test_staggered_field_convention():
    # mu = 1 on the zero Hamiltonian: ground state |-+> (site 0 negative)
    empty = TermList(L=2, dim=3, terms=())
    H = assemble_dense(add_staggered_field(empty, 1.0))
    gs = np.linalg.eigh(H)[1][:, 0]
    assert abs(gs[pair_index("-", "+")]) == pytest.approx(1.0)


def test_staggered_field_zero_and_linearity():
    base = build_terms("ideal", IdealModelParams(J_xy=1.0, D=0.0, V=0.0, L=4))
    assert add_staggered_field(base, 0.0) is base
    rng = np.random.default_rng(0)
    v = rng.standard_normal(81) + 1j * rng.standard_normal(81)
    v /= np.linalg.norm(v)
    h1 = assemble_dense(add_staggered_field(base, 1.0)) - assemble_dense(base)
    h2 = assemble_dense(add_staggered_field(base, 2.0)) - assemble_dense(base)
    np.testing.assert_allclose(2 * np.vdot(v, h1 @ v), np.vdot(v, h2 @ v), atol=1e-12)


def test_staggered_field_spin_half_rejected():
    ssh = build_terms("ssh", SSHParams(L=2, J_intra=0.1, J_inter=1.0))
    with pytest.raises(ValueError):
        add_staggered_field(ssh, 1.0)


def test_drive_basics():
    base = build_terms("experimental", bundled_coupling_table(), L=10)
    spec = DriveSpec(rabi_frequency=0.25, driven_sites=frozenset(range(5)), total_time=2.0)
    driven = add_drive(base, spec)
    assert len(driven) == len(base) + 5
    assert driven.conserves_total_sz is False
    assert add_drive(base, DriveSpec(0.0, frozenset({1}), 1.0)) is base
    with pytest.warns(UserWarning):
        out = add_drive(base, DriveSpec(0.25, frozenset(), 1.0))
    assert out is base
    with pytest.raises(ValueError):
        add_drive(base, DriveSpec(0.25, frozenset({99}), 1.0))
    with pytest.raises(ValueError):
        DriveSpec(-0.1, frozenset({0}), 1.0)


def test_uniform_field():
    base = build_terms("ideal", IdealModelParams(J_xy=1.0, D=0.0, V=0.0, L=3))
    probed = add_uniform_sz_field(base, 0.01)
    H = assemble_dense(probed) - assemble_dense(base)
    np.testing.assert_allclose(H, 0.01 * np.diag(basis_sz_values(3, 3)), atol=1e-14)


def test_transverse_field_patterns():
    base = build_terms("ssh", SSHParams(L=2, J_intra=0.1, J_inter=1.0))
    hom = add_transverse_field(base, 0.5, "homogeneous")
    stag = add_transverse_field(base, 0.5, "staggered")
    assert hom.conserves_total_sz is False
    coeffs_h = {t.factors[0][0]: t.coeff.real for t in hom.terms[len(base):]}
    coeffs_s = {t.factors[0][0]: t.coeff.real for t in stag.terms[len(base):]}
    assert all(c == -0.5 for c in coeffs_h.values())
    assert coeffs_s[0] == -0.5 and coeffs_s[1] == 0.5
    with pytest.raises(ValueError):
        add_transverse_field(base, 0.5, "diagonal")
    spin1 = build_terms("aklt", 2)
    with pytest.raises(ValueError):
        add_transverse_field(spin1, 0.5)


def test_ssh_boundary_term_counts():
    open_ = build_terms("ssh", SSHParams(L=3, J_intra=0.2, J_inter=1.0, boundary="open"))
    per = build_terms("ssh", SSHParams(L=3, J_intra=0.2, J_inter=1.0, boundary="periodic"))
    assert len(per) - len(open_) == 2  # xx + yy on the wrap bond (delta = 0)


def test_term_validation():
    with pytest.raises(ValueError):
        Term(1.0, ((0, "Sz"), (0, "Sz")))  # same site twice
    with pytest.raises(ValueError):
        Term(1.0, ())
    with pytest.raises(ValueError):
        TermList(L=2, dim=3, terms=(Term(1.0, ((5, "Sz"),)),))
    with pytest.raises(KeyError):
        TermList(L=2, dim=3, terms=(Term(1.0, ((0, "nope"),)),))
    with pytest.raises(ValueError):
        build_terms("mystery", None)
    assert build_terms("aklt", 4).max_range() == 1


# ---------------------------------------------------------------------------
# coupling tables
# ---------------------------------------------------------------------------


def test_bundled_table_values():
    t = bundled_coupling_table()
    assert t.D == -4.47
    assert t.max_distance == 5
    assert t.get(1, "J_p0") == 4.36
    assert t.get(1, "J_m0") == 4.59
    assert t.get(1, "V_offd") == 2.38
    assert t.get(1, "V_00") == 0.0  # below the table floor, absent
    assert t.get(3, "V_diag") == 0.0
    assert t.get(5, "J_00") == 0.04
    assert t.asymmetry(1) == pytest.approx((4.36 - 4.59) / 2)


def test_coupling_csv_roundtrip():
    t = bundled_coupling_table()
    text = coupling_table_to_csv(t)
    t2 = parse_coupling_csv(text, D=t.D)
    assert t2.entries == t.entries


def test_coupling_csv_header_rejected():
    with pytest.raises(ValueError):
        parse_coupling_csv("distance,J_p0\n1,1.0\n", D=0.0)


def test_coupling_table_validation():
    with pytest.raises(ValueError):
        CouplingTable(D=0.0, entries={0: {"J_p0": 1.0}})
    with pytest.raises(ValueError):
        CouplingTable(D=0.0, entries={1: {"bogus": 1.0}})
    with pytest.raises(ValueError):
        CouplingTable(D=0.0, entries={1: {"J_p0": float("nan")}})


def test_params_validation():
    with pytest.raises(ValueError):
        IdealModelParams(J_xy=1, D=0, V=0, L=1)
    with pytest.raises(ValueError):
        IdealModelParams(J_xy=1, D=0, V=0, L=4, range_cutoff=0)
    with pytest.raises(ValueError):
        SSHParams(L=1, J_intra=0.1, J_inter=1.0)
    with pytest.raises(ValueError):
        SSHParams(L=2, J_intra=0.1, J_inter=1.0, boundary="twisted")
    with pytest.raises(ValueError):
        XXZHalfParams(V=1.0, L=1)
    with pytest.raises(ValueError):
        build_terms("experimental", bundled_coupling_table())  # L missing
