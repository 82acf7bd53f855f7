import numpy as np
import pytest

from spin1chain.ed import assemble_dense, lowest_eigenpairs, product_state_vector
from spin1chain.model import (
    DriveSpec,
    IdealModelParams,
    SSHParams,
    build_terms,
    bundled_coupling_table,
    synthetic_uniform_table,
)
from spin1chain.protocols import (
    ProtocolConfigError,
    SweepSchedule,
    _lowdin,
    ground_manifold_report,
    run_rabi,
    run_sweep_dynamic,
    run_sweep_static,
    ssh_check,
    ssh_ramp_gaps,
    staggered_pattern,
    sweep_hamiltonian,
    sweep_time_grid,
)

# small but interacting experimental chain used across the protocol tests
BASE6 = build_terms("experimental", bundled_coupling_table(), L=6)
J6 = 4.475


def small_schedule(T=2.0, n=40):
    return SweepSchedule(mu_max=20 * J6, total_time=T, linear_threshold=J6, n_samples=n)


def test_schedule_invariants():
    sch = SweepSchedule(mu_max=10.0, total_time=5.0, linear_threshold=1.0)
    assert sch.mu_of_t(0.0) == pytest.approx(10.0)
    assert sch.mu_of_t(5.0) == pytest.approx(0.0)
    ts, mus = zip(*sch.sample_points(80))
    assert all(np.diff(mus) <= 1e-12)
    assert mus[0] == pytest.approx(10.0) and mus[-1] == pytest.approx(0.0)
    assert sch.t_of_mu(sch.mu_of_t(3.3)) == pytest.approx(3.3)
    lin = SweepSchedule(mu_max=10.0, total_time=4.0, profile="linear")
    assert lin.mu_of_t(2.0) == pytest.approx(5.0)


def test_schedule_validation():
    with pytest.raises(ProtocolConfigError):
        SweepSchedule(mu_max=0.0, total_time=5.0)
    with pytest.raises(ProtocolConfigError):
        SweepSchedule(mu_max=1.0, total_time=-1.0)
    with pytest.raises(ProtocolConfigError):
        SweepSchedule(mu_max=1.0, total_time=1.0, profile="cosine")


def test_sweep_hamiltonian_sign():
    # |+-+-...> must be the large-mu ground state
    base = build_terms("ideal", IdealModelParams(J_xy=1.0, D=0.0, V=0.0, L=4))
    H = assemble_dense(sweep_hamiltonian(base, 50.0))
    gs = np.linalg.eigh(H)[1][:, 0]
    stag = product_state_vector(staggered_pattern(4))
    assert abs(np.vdot(stag, gs)) ** 2 > 0.99


def test_sweep_time_grid_resolution():
    sch = small_schedule()
    grid = sweep_time_grid(sch)
    mus = np.asarray(sch.mu_of_t(grid), dtype=float)
    assert np.abs(np.diff(mus)).max() <= 0.005 * sch.mu_max + 1e-9
    assert np.diff(grid).max() <= 0.02 + 1e-12
    assert grid[0] == 0.0 and grid[-1] == sch.total_time


def test_static_sweep_small_chain():
    sch = small_schedule(n=60)
    tr = run_sweep_static(BASE6, sch, k=8)
    assert tr.overlap_staggered[0] >= 0.99
    assert tr.overlap_final[-1] == pytest.approx(1.0, abs=1e-9)
    assert tr.min_gap() > 0
    assert np.all(tr.gap_to_rest > 0)
    # all squared overlaps in [0, 1]
    for arr in (tr.overlap_staggered, tr.overlap_aklt, tr.overlap_final):
        assert np.all(arr >= -1e-12) and np.all(arr <= 1 + 1e-9)
    # tracked states: four per sample
    assert np.all(tr.tracked.sum(axis=1) == 4)
    # continuity of the overlap curves on the default-resolution grid
    for arr in (tr.overlap_staggered, tr.overlap_aklt, tr.overlap_final):
        assert np.abs(np.diff(arr)).max() < 0.1
    # CSV round shape
    lines = tr.to_csv().strip().splitlines()
    assert len(lines) == 61
    assert lines[0].startswith("t_us,mu_hMHz,gap_to_rest")


def test_static_sweep_needs_four_tracked():
    with pytest.raises(ProtocolConfigError):
        run_sweep_static(BASE6, small_schedule(), k=3)


def test_dynamic_sweep_small_chain():
    res = run_sweep_dynamic(BASE6, small_schedule(T=4.0))
    assert res.target_m == 0.0
    assert res.initial_fidelity >= 0.99
    assert res.fidelity > 0.9
    assert np.abs(res.m_tot - res.m_tot[0]).max() <= 1e-8
    assert res.fidelity_manifold >= res.fidelity - 1e-9
    d = res.to_dict()
    assert set(d) >= {"fidelity", "initial_fidelity", "fidelity_exact_gs", "target_m"}


def test_dynamic_sweep_longer_is_better():
    f_short = run_sweep_dynamic(BASE6, small_schedule(T=1.0)).fidelity
    f_long = run_sweep_dynamic(BASE6, small_schedule(T=8.0)).fidelity
    assert f_long > f_short


def test_dynamic_sweep_odd_chain_m_plus_one():
    base = build_terms("experimental", bundled_coupling_table(), L=7)
    pattern = staggered_pattern(7)
    res = run_sweep_dynamic(base, small_schedule(T=4.0), initial_pattern=pattern)
    assert res.target_m == 1.0
    assert res.m_tot[0] == pytest.approx(1.0, abs=1e-10)
    assert res.fidelity > 0.9


def test_dynamic_sweep_bad_initial_state():
    weak = SweepSchedule(mu_max=0.5, total_time=2.0, linear_threshold=J6)
    with pytest.raises(ProtocolConfigError, match="not the instantaneous ground state"):
        run_sweep_dynamic(BASE6, weak)


# ---------------------------------------------------------------------------
# manifold report
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def manifold6():
    return ground_manifold_report(BASE6)


def test_manifold_report_labels(manifold6):
    labels = sorted(round(s["m_tot"]) for s in manifold6.states)
    assert labels == [-1, 0, 0, 1]
    assert manifold6.gap > 0
    assert manifold6.spread < manifold6.gap
    d = manifold6.to_dict()
    assert len(d["states"]) == 4
    assert "vector" not in d["states"][0]
    assert isinstance(manifold6.to_json(), str)


def test_manifold_report_edge_sums(manifold6):
    for st in manifold6.states:
        m = round(st["m_tot"])
        if m == 1:
            assert st["edge_sum_left"] > 0.3
        if m == -1:
            assert st["edge_sum_left"] < -0.3


def test_manifold_requires_conservation():
    from spin1chain.model import add_drive

    driven = add_drive(BASE6, DriveSpec(0.3, frozenset({0}), 1.0))
    with pytest.raises(ProtocolConfigError):
        ground_manifold_report(driven)


def test_manifold_not_found():
    # deep large-D chain: unique ground state, no four-state manifold
    terms = build_terms("ideal", IdealModelParams(J_xy=1.0, D=8.0, V=0.0, L=6))
    with pytest.raises(ProtocolConfigError, match="manifold"):
        ground_manifold_report(terms)


def test_flip_reflection_symmetry_ideal():
    # the conserving ideal model maps the m=+1 profile onto the reversed,
    # negated m=-1 profile
    terms = build_terms("ideal", IdealModelParams(J_xy=1.0, D=-1.0, V=0.6, L=8))
    rep = ground_manifold_report(terms)
    prof = {round(s["m_tot"]): np.array(s["sz_profile"]) for s in rep.states}
    np.testing.assert_allclose(prof[1], -prof[-1][::-1], atol=1e-6)


# ---------------------------------------------------------------------------
# Rabi drive
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def rabi6(manifold6):
    drive = DriveSpec(rabi_frequency=0.25, driven_sites=frozenset(range(3)), total_time=2.0)
    return run_rabi(BASE6, drive, n_samples=21, manifold=manifold6)


def test_rabi_warns_on_fast_drive(manifold6):
    drive = DriveSpec(rabi_frequency=2.0, driven_sites=frozenset(range(3)), total_time=0.2)
    with pytest.warns(UserWarning, match="adiabaticity"):
        run_rabi(BASE6, drive, n_samples=3, manifold=manifold6)


def test_rabi_initial_state(rabi6):
    assert rabi6.m_tot[0] == pytest.approx(-1.0, abs=1e-8)
    assert rabi6.m_edge[0] < -0.3
    assert rabi6.manifold_population[0] == pytest.approx(1.0, abs=1e-9)


def test_rabi_overlap_invariants(rabi6):
    assert np.all(rabi6.overlaps_orth >= -1e-12)
    assert np.all(rabi6.overlaps_orth.sum(axis=1) <= 1 + 1e-6)
    assert np.all(rabi6.overlaps_raw <= 1 + 1e-9)


def test_rabi_csv(rabi6):
    lines = rabi6.to_csv().strip().splitlines()
    assert lines[0].split(",") == list(rabi6.CSV_COLUMNS)
    assert len(lines) == 22


def test_rabi_zero_drive_constant():
    drive = DriveSpec(rabi_frequency=0.0, driven_sites=frozenset(range(3)), total_time=1.0)
    tr = run_rabi(BASE6, drive, n_samples=6)
    assert np.abs(tr.m_tot - tr.m_tot[0]).max() < 1e-9
    assert np.abs(tr.m_edge - tr.m_edge[0]).max() < 1e-9
    assert np.abs(tr.overlaps_orth - tr.overlaps_orth[0]).max() < 1e-9


def test_lowdin_orthonormalizes():
    rng = np.random.default_rng(4)
    vs = [rng.standard_normal(12) + 1j * rng.standard_normal(12) for _ in range(3)]
    vs = [v / np.linalg.norm(v) for v in vs]
    ws = _lowdin(vs)
    G = np.array([[np.vdot(a, b) for b in ws] for a in ws])
    np.testing.assert_allclose(G, np.eye(3), atol=1e-10)


# ---------------------------------------------------------------------------
# SSH ramp comparison
# ---------------------------------------------------------------------------


def test_ssh_check_gap_separation():
    params = SSHParams(L=4, J_intra=0.1, J_inter=1.0, delta=0.0, boundary="periodic")
    res = ssh_check(params, n_points=40)
    assert res["homogeneous"]["min_gap"] <= 0.01 * params.J_inter
    assert res["staggered"]["min_gap"] >= 0.1 * params.J_inter
    assert res["ratio"] > 10


def test_ssh_ramp_grid_refinement():
    params = SSHParams(L=3, J_intra=0.1, J_inter=1.0)
    omegas, gaps = ssh_ramp_gaps(params, "homogeneous", n_points=20, refine=1)
    assert len(omegas) == len(gaps) == 40
    assert np.all(np.diff(omegas) <= 0)
