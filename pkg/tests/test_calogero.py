import csv

import numpy as np
import pytest

from laxkit import calogero as cm
from laxkit.elliptic import Lattice

LAT = Lattice(6.0, 6.0j)


def make(family, n=2, **kw):
    kw.setdefault("q0", 0.51 * 6)
    return cm.CMSystem(family, n, LAT, **kw)


def state_for(sys_, seed=3, **kw):
    rng = np.random.default_rng(seed)
    kw.setdefault("p_scale", 0.3)
    kw.setdefault("lo", 1.2 if sys_.family != "A" else 1.0)
    kw.setdefault("hi", 2.6 if sys_.family != "A" else 5.0)
    kw.setdefault("min_gap", 0.8)
    return cm.random_state(sys_, rng, **kw)


# ---------------------------------------------------------------------------
# couplings and structure
# ---------------------------------------------------------------------------


def test_coupling_validation():
    c = cm.default_couplings("A", 2)
    c["f"][0, 1] = 2.0
    with pytest.raises(ValueError):
        cm.CMSystem("A", 2, LAT, couplings=c)
    c = cm.default_couplings("C", 2)
    c["fC"][0, 0] = 1.0
    with pytest.raises(ValueError):
        cm.CMSystem("C", 2, LAT, couplings=c)
    with pytest.raises(ValueError):
        cm.CMSystem("E", 2, LAT)


@pytest.mark.parametrize("family", ["B", "C", "D"])
def test_lax_matrix_in_defining_algebra(family):
    sys_ = make(family)
    st = state_for(sys_)
    sig = cm.family_sigma_matrix(family, 2)
    for z in (0.21 + 0.3j, 1.1 - 0.7j):
        L = cm.lax_matrix(sys_, st, z)
        assert np.linalg.norm(L.T @ sig + sig @ L) < 1e-12


def test_b_family_zero_pattern():
    sys_ = make("B")
    st = state_for(sys_)
    L = cm.lax_matrix(sys_, st, 0.21 + 0.3j)
    n = 2
    assert L[n, n] == 0
    assert np.allclose(np.diag(L[:n, n + 1:]), 0)   # skew B block
    assert np.allclose(np.diag(L[n + 1:, :n]), 0)   # skew C block


def test_a_family_pair_product_identity():
    # -L_ij L_ji = wp(q_i - q_j) - wp(z)
    sys_ = make("A", 3)
    st = state_for(sys_)
    z = 0.17 + 0.4j
    L = cm.lax_matrix(sys_, st, z)
    for i in range(3):
        for j in range(3):
            if i != j:
                lhs = -L[i, j] * L[j, i]
                rhs = LAT.wp(st.q[i] - st.q[j]) - LAT.wp(z)
                assert abs(lhs - rhs) < 1e-10


def test_b_family_column_product_identity():
    # a_i b_i = f^a f^b (wp(q_i) - wp(z - q0))
    sys_ = make("B")
    st = state_for(sys_)
    z = 0.23 + 0.31j
    L = cm.lax_matrix(sys_, st, z)
    n = 2
    for i in range(n):
        lhs = L[i, n] * L[n + 1 + i, n]
        rhs = LAT.wp(st.q[i]) - LAT.wp(z - sys_.q0)
        assert abs(lhs - rhs) < 1e-10


def test_a_family_trace_is_total_momentum():
    sys_ = make("A", 3)
    st = state_for(sys_)
    for z in (0.2 + 0.3j, 0.4 - 0.2j, 0.6 + 0.1j, 1.1 + 0.7j, 0.9 - 0.4j):
        assert abs(np.trace(cm.lax_matrix(sys_, st, z)) - st.p.sum()) < 1e-10


def test_decoupled_limit_vanishes():
    c = cm.default_couplings("A", 2)
    c["f"][:] = 0.0
    np.fill_diagonal(c["f"], 1.0)  # diagonal unused; keep validator happy
    sys_ = cm.CMSystem("A", 2, LAT, couplings=c)
    st = cm.CMState(np.array([1.1, 3.4]), np.zeros(2))
    L = cm.lax_matrix(sys_, st, 0.7 + 0.4j)
    assert np.linalg.norm(L) == 0


def test_double_periodicity_of_lax_entries():
    sys_ = make("A", 2)
    st = state_for(sys_)
    z = 0.37 + 0.21j
    L0 = cm.lax_matrix(sys_, st, z)
    for w in (2 * LAT.omega1, 2 * LAT.omega2):
        assert np.linalg.norm(cm.lax_matrix(sys_, st, z + w) - L0) < 1e-9


def test_collision_guard():
    sys_ = make("A", 2)
    with pytest.raises(cm.CollisionError):
        cm.check_state(sys_, cm.CMState(np.array([1.0, 1.0 + 1e-9]), np.zeros(2)))


# ---------------------------------------------------------------------------
# Hamiltonians: closed form vs residue route
# ---------------------------------------------------------------------------


def test_closed_forms_small_n():
    sys_ = make("A", 2)
    st = state_for(sys_)
    q, p = st.q, st.p
    manual = -0.5 * (p[0] ** 2 + p[1] ** 2) + LAT.wp(q[0] - q[1])
    assert abs(cm.hamiltonian(sys_, st) - manual) < 1e-12
    sys_ = make("C", 1)
    st1 = cm.CMState(np.array([1.3]), np.array([0.4]))
    manual = -st1.p[0] ** 2 + 2 * LAT.wp(2 * st1.q[0])
    assert abs(cm.hamiltonian(sys_, st1) - manual) < 1e-12
    sys_ = make("B", 2)
    st = state_for(sys_)
    q, p = st.q, st.p
    manual = (-(p ** 2).sum() + 2 * LAT.wp(q[0] - q[1]) + 2 * LAT.wp(q[0] + q[1])
              + 2 * LAT.wp(q).sum())
    assert abs(cm.hamiltonian(sys_, st) - manual) < 1e-12


@pytest.mark.parametrize("family", ["A", "B", "C", "D"])
def test_residue_route_matches_closed_form(family):
    sys_ = make(family)
    st = state_for(sys_)
    h1 = cm.hamiltonian(sys_, st)
    h2 = cm.hamiltonian_from_residue(sys_, st)
    assert abs(h1 - h2) < 1e-9 * max(1.0, abs(h1))


def test_physical_sign_negates():
    s1 = make("A")
    s2 = make("A", physical_sign=True)
    st = state_for(s1)
    assert abs(cm.hamiltonian(s1, st) + cm.hamiltonian(s2, st)) < 1e-14


def test_residue_hamiltonian_conventions():
    sys_ = make("A", 3)
    st = state_for(sys_)
    # residue of z^{-1} tr L: trace is constant, so this is the total momentum
    r = cm.residue_hamiltonian(sys_, st, m=1, power=1)
    assert abs(r - st.p.sum()) < 1e-10
    # m <= 0 with holomorphic integrand: no residue
    assert abs(cm.residue_hamiltonian(sys_, st, m=0, power=1)) < 1e-12
    with pytest.raises(ValueError):
        cm.residue_hamiltonian(make("D"), state_for(make("D")), power=3)


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("family", ["A", "B", "C", "D"])
def test_equations_of_motion_match_finite_differences(family):
    sys_ = make(family)
    st = state_for(sys_)
    qd, pd = cm.equations_of_motion(sys_, st)
    eps = 1e-6
    for i in range(sys_.n):
        sp_, sm = st.copy(), st.copy()
        sp_.p[i] += eps
        sm.p[i] -= eps
        num = (cm.hamiltonian(sys_, sp_) - cm.hamiltonian(sys_, sm)) / (2 * eps)
        assert abs(num - qd[i]) < 1e-5 * max(1.0, abs(qd[i]))
        sp_, sm = st.copy(), st.copy()
        sp_.q[i] += eps
        sm.q[i] -= eps
        num = -(cm.hamiltonian(sys_, sp_) - cm.hamiltonian(sys_, sm)) / (2 * eps)
        assert abs(num - pd[i]) < 1e-4 * max(1.0, abs(pd[i]))


def test_total_momentum_conserved_a_family():
    sys_ = make("A", 3)
    st = state_for(sys_)
    _, pdot = cm.equations_of_motion(sys_, st)
    assert abs(pdot.sum()) < 1e-12


def test_zero_momentum_freezes_positions():
    sys_ = make("A", 2)
    st = state_for(sys_)
    st.p[:] = 0
    qd, _ = cm.equations_of_motion(sys_, st)
    assert np.linalg.norm(qd) == 0


def test_integrate_zero_duration():
    sys_ = make("A", 2)
    st = state_for(sys_)
    traj = cm.integrate(sys_, st, 0.0, 1e-3)
    assert len(traj) == 1 and traj.completed
    with pytest.raises(ValueError):
        cm.integrate(sys_, st, 1.0, -1e-3)
    with pytest.raises(ValueError):
        cm.integrate(sys_, st, 1.0, 1e-3, scheme="euler")


def test_rk4_richardson_scaling():
    rng = np.random.default_rng(12)
    sys_, st = cm.conservation_initial_data("A", 2, rng, period=6.0)
    _, r1 = cm.run_conservation(sys_, st, 0.4, 4e-3, z_samples=[1.3 + 1.1j])
    _, r2 = cm.run_conservation(sys_, st, 0.4, 2e-3, z_samples=[1.3 + 1.1j])
    assert r1["max_H_drift"] > 8 * r2["max_H_drift"] or r2["max_H_drift"] < 1e-15


def test_leapfrog_conserves_on_short_run():
    rng = np.random.default_rng(4)
    sys_, st = cm.conservation_initial_data("A", 2, rng)
    traj, rep = cm.run_conservation(sys_, st, 1.0, 1e-3, scheme="leapfrog",
                                    z_samples=[5.0 + 4.0j])
    assert rep["max_H_drift"] < 1e-8


def test_collision_abort_carries_partial_trajectory():
    sys_ = cm.CMSystem("A", 2, Lattice(1.0, 1j))
    st = cm.CMState(np.array([0.4, 0.6]), np.array([0.0, 0.0]))  # attractive fall
    with pytest.raises(cm.CollisionError) as exc:
        cm.integrate(sys_, st, 20.0, 1e-2)
    assert exc.value.trajectory is not None
    assert not exc.value.trajectory.completed
    assert len(exc.value.trajectory) >= 1


# ---------------------------------------------------------------------------
# conservation and involution diagnostics
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("family", ["A", "D"])
def test_energy_and_spectrum_conserved(family):
    rng = np.random.default_rng(8)
    sys_, st = cm.conservation_initial_data(family, 2, rng)
    w = abs(sys_.lattice.omega1)
    traj, rep = cm.run_conservation(sys_, st, 2.0, 1e-3,
                                    z_samples=[complex(0.3 * w, 0.2 * w)])
    assert rep["max_H_drift"] < 1e-10
    assert rep["max_spec_drift"] < 1e-8


@pytest.mark.parametrize("family", ["B", "C"])
def test_energy_conserved_all_families(family):
    rng = np.random.default_rng(9)
    sys_, st = cm.conservation_initial_data(family, 2, rng)
    w = abs(sys_.lattice.omega1)
    traj, rep = cm.run_conservation(sys_, st, 1.0, 1e-3,
                                    z_samples=[complex(0.3 * w, 0.2 * w)])
    assert rep["max_H_drift"] < 1e-10
    if family == "B":
        assert rep["q0_frozen"]


def test_spectral_invariants_structure():
    sys_ = make("A", 2)
    st = state_for(sys_)
    inv = cm.spectral_invariants(sys_, st, 0.5 + 0.4j, pmax=3)
    assert len(inv["traces"]) == 3
    assert abs(inv["traces"][0] - st.p.sum()) < 1e-10
    assert len(inv["charpoly"]) == 3


def test_eigenvalue_drift_metric():
    a = np.diag([1.0, 2.0, 3.0])
    b = np.diag([3.0 + 1e-8, 1.0, 2.0])
    assert cm.eigenvalue_drift(a, b) < 2e-8


def test_poisson_bracket_antisymmetric_and_identical_zero():
    sys_ = make("A", 2)
    st = state_for(sys_)
    h = cm.residue_hamiltonian_fn(sys_, 1, 2)
    assert cm.poisson_bracket(sys_, h, h, st) == 0.0
    g = cm.residue_hamiltonian_fn(sys_, 1, 3)
    ab = cm.poisson_bracket(sys_, h, g, st)
    ba = cm.poisson_bracket(sys_, g, h, st)
    assert abs(ab + ba) < 1e-8 * max(1.0, abs(ab))


def test_momentum_commutes_with_hamiltonian():
    sys_ = make("A", 3)
    st = state_for(sys_)
    h2 = cm.residue_hamiltonian_fn(sys_, 1, 2)
    ptot = cm.residue_hamiltonian_fn(sys_, 1, 1)
    assert abs(cm.poisson_bracket(sys_, h2, ptot, st)) < 1e-8


def test_involution_table():
    sys_ = make("A", 3)
    st = state_for(sys_)
    table = cm.involution_table(sys_, st, [(2, 1), (3, 1)])
    assert max(table.values()) < 1e-6
    assert cm.involution_table(sys_, st, [(2, 1)]) == {}


@pytest.mark.xfail(strict=True,
                   reason="the symplectic-family constant-coupling Lax matrix has a "
                          "nonvanishing degree-one component at its moving points, so its "
                          "spectral invariants acquire poles there; see the decisions ledger")
def test_c_family_invariants_regular_at_moving_points():
    sys_ = make("C")
    st = state_for(sys_)
    res = cm._matrix_residue(sys_, st, st.q[0], order=1)
    nodes, r = 96, 0.1
    acc = 0
    for k in range(nodes):
        zk = st.q[0] + r * np.exp(2j * np.pi * k / nodes)
        acc += np.trace(np.linalg.matrix_power(cm.lax_matrix(sys_, st, zk), 4)) * (zk - st.q[0])
    assert abs(acc / nodes) < 1e-10


@pytest.mark.xfail(strict=True,
                   reason="the odd-orthogonal-family Lax matrix fails the eigenvector "
                          "condition at the extra frozen point, so its spectrum moves "
                          "under the canonical flow; see the decisions ledger")
def test_b_family_isospectral_under_canonical_flow():
    rng = np.random.default_rng(17)
    sys_, st = cm.conservation_initial_data("B", 2, rng)
    w = abs(sys_.lattice.omega1)
    _, rep = cm.run_conservation(sys_, st, 1.0, 1e-3, z_samples=[complex(0.3 * w, 0.2 * w)])
    assert rep["max_spec_drift"] < 1e-6


# ---------------------------------------------------------------------------
# residue structure of the A-family Lax matrix
# ---------------------------------------------------------------------------


def test_tyurin_residues_rank_one_and_nilpotent():
    sys_ = make("A", 3)
    st = state_for(sys_)
    reports = cm.tyurin_residue_check(sys_, st)
    for rep in reports:
        assert rep["sv_ratio"] < 1e-9
        assert rep["square_ratio"] < 1e-9


def test_tyurin_single_particle_trivial():
    sys_ = make("A", 1)
    st = cm.CMState(np.array([1.7]), np.array([0.3]))
    assert cm.tyurin_residue_check(sys_, st)[0]["sv_ratio"] == 0.0


def test_tyurin_flow_probe():
    rng = np.random.default_rng(21)
    sys_, st = cm.conservation_initial_data("A", 2, rng)
    dt = 1e-4
    traj = cm.integrate(sys_, st, 10 * dt, dt)
    mid = len(traj) // 2
    probe = (traj.state(mid - 1), traj.state(mid + 1), dt)
    for rep in cm.tyurin_residue_check(sys_, traj.state(mid), flow_probe=probe):
        assert rep["flow_mismatch"] < 1e-6
    with pytest.raises(ValueError):
        cm.tyurin_residue_check(make("D"), state_for(make("D")))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def test_trajectory_csv_schema(tmp_path):
    sys_ = make("A", 2)
    st = state_for(sys_)
    traj = cm.integrate(sys_, st, 0.02, 1e-2)
    path = tmp_path / "traj.csv"
    cm.write_trajectory_csv(path, sys_, traj, z_samples=[0.4 + 0.3j])
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "q_1", "q_2", "p_1", "p_2", "H", "inv_p2_z1"]
    assert len(rows) == 1 + len(traj)
    cm.write_trajectory_csv(path, sys_, traj, truncated=True)
    rows = list(csv.reader(open(path)))
    assert rows[-1][0] == "TRUNCATED"
