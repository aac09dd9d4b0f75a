"""Elliptic Calogero-Moser systems with spectral-parameter Lax matrices.

Families A (gl, n particles), B (so(2n+1)), C (sp(2n)) and D (so(2n)) with
pairwise Weierstrass interactions.  The Lax matrices are sigma-quotient
matrices on the torus; the second-order Hamiltonian has two independent
routes, a closed form and the contour residue of z^{-1} tr L(z)^2 at the
puncture, which must agree (for the B family up to the exact constant
2 n wp(q0) dropped when restricting to the frozen-q0 submanifold).

Sign convention: the stored Hamiltonian has a negative kinetic term, as the
residue normalization produces it; ``physical_sign=True`` negates it, which
reverses time but changes no conserved quantity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .elliptic import Lattice, PoleProximityError

__all__ = [
    "CMSystem",
    "CMState",
    "CollisionError",
    "default_couplings",
    "lax_matrix",
    "family_sigma_matrix",
    "hamiltonian",
    "residue_hamiltonian",
    "hamiltonian_from_residue",
    "equations_of_motion",
    "integrate",
    "Trajectory",
    "random_state",
    "conservation_initial_data",
    "spectral_invariants",
    "eigenvalue_drift",
    "poisson_bracket",
    "residue_hamiltonian_fn",
    "involution_table",
    "tyurin_residue_check",
    "run_conservation",
    "write_trajectory_csv",
]

FAMILIES = ("A", "B", "C", "D")


class CollisionError(RuntimeError):
    """Particle collision or pole encounter; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


def default_couplings(family, n):
    """Couplings satisfying the reduction products: f_ij f_ji = 1 for the A
    block, f^B_ij f^C_ji = -1 off the diagonal, f^B_ii f^C_ii = -2 for the C
    family (the sign that makes the residue route reproduce the conventional
    closed form), f^a = f^b = 1 for the B columns."""
    c = {"f": np.ones((n, n))}
    if family in ("B", "C", "D"):
        c["fB"] = np.ones((n, n))
        c["fC"] = -np.ones((n, n))
        if family == "C":
            np.fill_diagonal(c["fB"], 1.0)
            np.fill_diagonal(c["fC"], -2.0)
    if family == "B":
        c["fa"] = np.ones(n)
        c["fb"] = np.ones(n)
    return c


@dataclass
class CMSystem:
    family: str
    n: int
    lattice: Lattice = field(default_factory=Lattice)
    couplings: dict = None
    q0: complex = 0.53
    physical_sign: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.n < 1:
            raise ValueError("need at least one particle")
        if self.couplings is None:
            self.couplings = default_couplings(self.family, self.n)
        self._validate_couplings()

    def _validate_couplings(self):
        c = self.couplings
        f = np.asarray(c["f"])
        prod = f * f.T
        off = ~np.eye(self.n, dtype=bool)
        # the decoupled limit (a pair of vanishing couplings) stays admissible
        pair_zero = (f == 0) & (f.T == 0)
        bad = off & ~pair_zero & ~np.isclose(prod, 1.0, atol=1e-12)
        if bad.any():
            raise ValueError("A-block couplings must satisfy f_ij f_ji = 1")
        if self.family in ("B", "C", "D"):
            fb, fc = np.asarray(c["fB"]), np.asarray(c["fC"])
            if not np.allclose((fb * fc.T)[off], -1.0, atol=1e-12):
                raise ValueError("block couplings must satisfy fB_ij fC_ji = -1")
            if self.family == "C":
                d = np.diag(fb) * np.diag(fc)
                if not np.allclose(np.abs(d), 2.0, atol=1e-12):
                    raise ValueError("C-family diagonal couplings must have |fB_ii fC_ii| = 2")

    @property
    def matrix_size(self):
        return {"A": self.n, "B": 2 * self.n + 1, "C": 2 * self.n, "D": 2 * self.n}[self.family]

    def sign(self):
        return -1.0 if self.physical_sign else 1.0


@dataclass
class CMState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=complex)
        self.p = np.asarray(self.p, dtype=complex)

    def copy(self):
        return CMState(self.q.copy(), self.p.copy())


def _collision_arguments(sys_, q):
    """All sigma/wp arguments that must stay away from the lattice."""
    n = sys_.n
    args = []
    diff = q[:, None] - q[None, :]
    args.append(diff[~np.eye(n, dtype=bool)])
    if sys_.family in ("B", "C", "D"):
        args.append((q[:, None] + q[None, :]).ravel())
        args.append(q)
    if sys_.family == "B":
        args.append(np.array([sys_.q0]))
        args.append(q - sys_.q0)
        args.append(q + sys_.q0)
    return np.concatenate(args) if args else np.array([])


def check_state(sys_, state):
    args = _collision_arguments(sys_, state.q)
    if args.size:
        d = sys_.lattice.lattice_distance(args)
        lim = sys_.lattice.guard * abs(sys_.lattice.omega1)
        if np.any(d < lim):
            raise CollisionError("particle collision (argument on the lattice)")


def _a_block(sys_, q, p, z, fill_diag=True):
    """gl-type block with entries f_ij s(z+q_j-q_i) s(z-q_j) s(q_i) /
    (s(z) s(z-q_i) s(q_i-q_j) s(q_j)); diagonal p_j."""
    lat = sys_.lattice
    n = len(q)
    s = lat.sigma
    dmat = q[:, None] - q[None, :]
    dsafe = dmat + np.eye(n) * 0.31234  # diagonal never used
    num = s(z - dmat) * s(z - q)[None, :] * s(q)[:, None]
    with np.errstate(invalid="ignore", over="ignore"):
        den = s(z) * s(z - q)[:, None] * s(dsafe) * s(q)[None, :]
        a = np.asarray(sys_.couplings["f"], dtype=complex) * num / den
    if fill_diag:
        np.fill_diagonal(a, p)
    else:
        np.fill_diagonal(a, 0)
    return a


def _bc_blocks(sys_, q, z, symmetric):
    """The two off-diagonal blocks, skew for D/B and symmetric for C (with
    the extra diagonal entries in the symmetric case)."""
    lat = sys_.lattice
    n = len(q)
    s = lat.sigma
    fB = np.asarray(sys_.couplings["fB"], dtype=complex)
    fC = np.asarray(sys_.couplings["fC"], dtype=complex)
    psum = q[:, None] + q[None, :]
    # B_ji (j < i): fB s(z-q_j-q_i) s(z+q_i) / (s(z) s(z-q_j) s(q_i+q_j))
    bfull = s(z - psum.T) * s(z + q)[None, :] / (s(z) * s(z - q)[:, None] * s(psum.T))
    # C_ij (i > j): fC s(z+q_j+q_i) s(z-q_j) / (s(z) s(z+q_i) s(q_i+q_j))
    cfull = s(z + psum) * s(z - q)[None, :] / (s(z) * s(z + q)[:, None] * s(psum))
    B = np.zeros((n, n), dtype=complex)
    C = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    il = np.tril_indices(n, -1)
    B[iu] = (fB * bfull)[iu]
    C[il] = (fC * cfull)[il]
    if symmetric:
        B = B + B.T
        C = C + C.T
        dq = 2 * q
        bd = np.diag(fB) * s(z - dq) * s(z + q) / (s(z) * s(z - q) * s(dq))
        cd = np.diag(fC) * s(z + dq) * s(z - q) / (s(z) * s(z + q) * s(dq))
        B[np.diag_indices(n)] = bd
        C[np.diag_indices(n)] = cd
    else:
        B = B - B.T
        C = C - C.T
    return B, C


def lax_matrix(sys_, state, z):
    """Spectral-parameter Lax matrix of the configured family at z."""
    check_state(sys_, state)
    q, p = state.q, state.p
    n = sys_.n
    lat = sys_.lattice
    if sys_.family == "A":
        return _a_block(sys_, q, p, z)
    a = _a_block(sys_, q, p, z)
    sym = sys_.family == "C"
    B, C = _bc_blocks(sys_, q, z, sym)
    if sys_.family in ("C", "D"):
        return np.block([[a, B], [C, -a.T]])
    # family B: bordered so(2n+1) matrix
    s = lat.sigma
    fa = np.asarray(sys_.couplings["fa"], dtype=complex)
    fb = np.asarray(sys_.couplings["fb"], dtype=complex)
    q0 = sys_.q0
    avec = fa * s(z - q0 - q) * s(z) / (s(z - q0) * s(z - q) * s(q))
    bvec = fb * s(z - q0 + q) * s(z - q) / (s(z) * s(z - q0) * s(q))
    L = np.zeros((2 * n + 1, 2 * n + 1), dtype=complex)
    L[:n, :n] = a
    L[:n, n] = avec
    L[:n, n + 1:] = B
    L[n, :n] = -bvec
    L[n, n + 1:] = -avec
    L[n + 1:, :n] = C
    L[n + 1:, n] = bvec
    L[n + 1:, n + 1:] = -a.T
    return L


def family_sigma_matrix(family, n):
    """Defining bilinear form of the matrix family (None for A)."""
    if family == "A":
        return None
    if family == "D":
        return np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    if family == "C":
        return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    m = np.zeros((2 * n + 1, 2 * n + 1))
    m[:n, n + 1:] = np.eye(n)
    m[n, n] = 1.0
    m[n + 1:, :n] = np.eye(n)
    return m


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------


def _pair_wp(lat, q, plus=False):
    n = len(q)
    iu = np.triu_indices(n, 1)
    args = (q[:, None] + q[None, :]) if plus else (q[:, None] - q[None, :])
    return lat.wp(args[iu]).sum()


def hamiltonian(sys_, state):
    """Second-order Hamiltonian in closed form (residue-normalized sign:
    negative kinetic term; B family restricted to the frozen-q0 submanifold, constants
    dropped)."""
    check_state(sys_, state)
    lat = sys_.lattice
    q, p = state.q, state.p
    if sys_.family == "A":
        h = -0.5 * np.sum(p * p) + _pair_wp(lat, q)
    else:
        h = -np.sum(p * p) + 2 * _pair_wp(lat, q) + 2 * _pair_wp(lat, q, plus=True)
        if sys_.family == "C":
            h = h + 2 * lat.wp(2 * q).sum()
        elif sys_.family == "B":
            h = h + 2 * lat.wp(q).sum()
    h = complex(h)
    h = h if abs(h.imag) > 1e-30 else h
    return sys_.sign() * (h.real if abs(h.imag) < 1e-9 * max(1.0, abs(h.real)) else h)


def _pole_set(sys_, state):
    q = state.q
    poles = [np.array([0.0 + 0j]), q]
    if sys_.family in ("B", "C", "D"):
        poles.append(-q)
    if sys_.family == "B":
        poles.append(np.array([sys_.q0 + 0j]))
    return np.concatenate(poles)


def residue_hamiltonian(sys_, state, m=1, power=2, center=0.0, nodes=64, radius=None):
    """res_{z=center} z^{-m} tr L(z)^power dz by trapezoidal contour
    quadrature (exponentially accurate on the annulus of analyticity).

    The radius defaults to one third of the distance from the center to the
    nearest other pole of the integrand.
    """
    if sys_.family in ("B", "C", "D") and power % 2:
        raise ValueError("odd trace powers vanish identically for this family")
    lat = sys_.lattice
    poles = _pole_set(sys_, state)
    dist = lat.lattice_distance(poles - center)
    dist = dist[dist > 1e-12]
    if radius is None:
        if dist.size == 0:
            radius = 0.1 * abs(lat.omega1)
        else:
            radius = float(np.min(dist)) / 3.0
    if radius < 10 * lat.guard * abs(lat.omega1):
        raise ValueError("contour radius collides with a neighbouring pole")
    acc = 0.0 + 0.0j
    for k in range(nodes):
        zk = center + radius * np.exp(2j * np.pi * k / nodes)
        L = lax_matrix(sys_, state, zk)
        acc += np.trace(np.linalg.matrix_power(L, power)) * (zk - center) ** (1 - m)
    return acc / nodes


def hamiltonian_from_residue(sys_, state, nodes=64):
    """Second-order Hamiltonian through the residue route: -1/2 of the
    residue of z^{-1} tr L^2, plus the exact constant 2 n wp(q0) restoring
    the B-family restriction convention."""
    val = -0.5 * residue_hamiltonian(sys_, state, m=1, power=2, nodes=nodes)
    if sys_.family == "B":
        val = val + 2 * sys_.n * sys_.lattice.wp(sys_.q0)
    v = complex(val)
    out = v.real if abs(v.imag) < 1e-9 * max(1.0, abs(v.real)) else v
    return sys_.sign() * out


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------


def equations_of_motion(sys_, state):
    """(qdot, pdot) for the closed-form Hamiltonian, analytic gradients."""
    check_state(sys_, state)
    lat = sys_.lattice
    q, p = state.q, state.p
    n = sys_.n
    diff = q[:, None] - q[None, :]
    np.fill_diagonal(diff, 0.31234)
    wp_d = lat.wp_prime(diff)
    np.fill_diagonal(wp_d, 0.0)
    if sys_.family == "A":
        qdot = -p
        pdot = -wp_d.sum(axis=1)
    else:
        ssum = q[:, None] + q[None, :]
        np.fill_diagonal(ssum, 0.31234)
        wp_s = lat.wp_prime(ssum)
        np.fill_diagonal(wp_s, 0.0)
        qdot = -2 * p
        pdot = -2 * (wp_d.sum(axis=1) + wp_s.sum(axis=1))
        if sys_.family == "C":
            pdot = pdot - 4 * lat.wp_prime(2 * q)
        elif sys_.family == "B":
            pdot = pdot - 2 * lat.wp_prime(q)
    s = sys_.sign()
    return s * qdot, s * pdot


@dataclass
class Trajectory:
    times: np.ndarray
    qs: np.ndarray
    ps: np.ndarray
    completed: bool = True

    def state(self, i):
        return CMState(self.qs[i], self.ps[i])

    def __len__(self):
        return len(self.times)


def _rk4_step(sys_, state, dt):
    def rhs(q, p):
        return equations_of_motion(sys_, CMState(q, p))

    q, p = state.q, state.p
    k1q, k1p = rhs(q, p)
    k2q, k2p = rhs(q + dt / 2 * k1q, p + dt / 2 * k1p)
    k3q, k3p = rhs(q + dt / 2 * k2q, p + dt / 2 * k2p)
    k4q, k4p = rhs(q + dt * k3q, p + dt * k3p)
    return CMState(
        q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q),
        p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p),
    )


def _leapfrog_step(sys_, state, dt):
    # separable H = T(p) + V(q): kick-drift-kick
    q, p = state.q, state.p
    _, pdot = equations_of_motion(sys_, CMState(q, p))
    p = p + dt / 2 * pdot
    qdot, _ = equations_of_motion(sys_, CMState(q, p))
    q = q + dt * qdot
    _, pdot = equations_of_motion(sys_, CMState(q, p))
    p = p + dt / 2 * pdot
    return CMState(q, p)


_STEPPERS = {"rk4": _rk4_step, "leapfrog": _leapfrog_step}


def integrate(sys_, state0, t_end, dt, scheme="rk4", record_every=1):
    """Fixed-step integration; aborts with the partial trajectory attached
    on collision."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if scheme not in _STEPPERS:
        raise ValueError(f"scheme must be one of {sorted(_STEPPERS)}")
    step = _STEPPERS[scheme]
    nsteps = int(round(t_end / dt)) if t_end > 0 else 0
    times = [0.0]
    qs = [state0.q.copy()]
    ps = [state0.p.copy()]
    state = state0.copy()
    try:
        check_state(sys_, state)
        for k in range(1, nsteps + 1):
            state = step(sys_, state, dt)
            if not (np.all(np.isfinite(state.q)) and np.all(np.isfinite(state.p))):
                raise CollisionError("state left the representable range")
            if k % record_every == 0 or k == nsteps:
                times.append(k * dt)
                qs.append(state.q.copy())
                ps.append(state.p.copy())
    except (CollisionError, PoleProximityError) as exc:
        traj = Trajectory(np.array(times), np.array(qs), np.array(ps), completed=False)
        raise CollisionError(str(exc), trajectory=traj) from None
    return Trajectory(np.array(times), np.array(qs), np.array(ps))


def random_state(sys_, rng, p_scale=0.7, lo=None, hi=None, min_gap=None):
    """Real collision-free initial data inside the fundamental real period.

    The pair potentials are attractive at short range (the coupling
    reduction fixes the sign), so long integrations need generous initial
    separations; the defaults scale with the real period.
    """
    n = sys_.n
    w = abs(sys_.lattice.omega1)
    if lo is None or hi is None:
        lo, hi = (0.1 * w, 0.44 * w) if sys_.family != "A" else (0.08 * w, 0.9 * w)
    if min_gap is None:
        min_gap = 0.35 * (hi - lo) / max(n, 1)
    for _ in range(400):
        q = np.sort(rng.uniform(lo, hi, n))
        if n > 1 and np.min(np.diff(q)) < min_gap:
            continue
        if sys_.family == "B" and np.min(np.abs(np.concatenate([q - sys_.q0, q + sys_.q0]))) < 0.03 * w:
            continue
        p = rng.uniform(-p_scale, p_scale, n)
        st = CMState(q.astype(complex), p.astype(complex))
        try:
            check_state(sys_, st)
            return st
        except CollisionError:
            continue
    raise RuntimeError("could not sample a collision-free state")


def conservation_initial_data(family, n, rng, period=40.0):
    """System and seeded real state suited to long conservation runs: a
    square lattice with real period 2*``period``, evenly spread positions
    with jitter, and small momenta.

    The pair interaction is attractive at short range, so runaway infall
    bounds the usable horizon; with gaps of several length units and momenta
    of a few percent the fall time stays well beyond T = 10."""
    lat = Lattice(period, period * 1j)
    q0 = 0.085 * period
    sys_ = CMSystem(family, n, lat, q0=q0)
    if family == "A":
        lo, hi = 0.1 * period, 1.82 * period
    else:
        lo, hi = 0.22 * period, 0.9 * period
    base = np.linspace(lo, hi, n + 1)[:n]
    gap = (hi - lo) / max(n, 1)
    q = base + rng.uniform(0.05, 0.35, n) * gap
    p = rng.uniform(-0.06, 0.06, n)
    state = CMState(q.astype(complex), p.astype(complex))
    check_state(sys_, state)
    return sys_, state


# ---------------------------------------------------------------------------
# conserved-quantity diagnostics
# ---------------------------------------------------------------------------


def spectral_invariants(sys_, state, z, pmax=4):
    """tr L(z)^p for p = 1..pmax plus characteristic polynomial coefficients."""
    L = lax_matrix(sys_, state, z)
    traces = []
    acc = np.eye(L.shape[0], dtype=complex)
    for _ in range(pmax):
        acc = acc @ L
        traces.append(complex(np.trace(acc)))
    charpoly = np.poly(L)
    return {"traces": traces, "charpoly": charpoly}


def eigenvalue_drift(l0, l1):
    """Greedy matched multiset distance between eigenvalue sets."""
    a = list(np.linalg.eigvals(l0))
    b = list(np.linalg.eigvals(l1))
    worst = 0.0
    while a:
        i, j = min(
            ((i, j) for i in range(len(a)) for j in range(len(b))),
            key=lambda ij: abs(a[ij[0]] - b[ij[1]]),
        )
        worst = max(worst, abs(a[i] - b[j]))
        a.pop(i)
        b.pop(j)
    return worst


def poisson_bracket(sys_, ha, hb, state, rel_step=1e-6):
    """Canonical bracket sum_i (dHa/dq_i dHb/dp_i - dHa/dp_i dHb/dq_i) with
    central differences; returns exactly 0.0 when ha is hb."""
    if ha is hb:
        return 0.0
    n = sys_.n

    def grad(h):
        gq = np.zeros(n, dtype=complex)
        gp = np.zeros(n, dtype=complex)
        for i in range(n):
            hq = rel_step * (1 + abs(state.q[i]))
            sp_, sm = state.copy(), state.copy()
            sp_.q[i] += hq
            sm.q[i] -= hq
            gq[i] = (h(sp_) - h(sm)) / (2 * hq)
            hp = rel_step * (1 + abs(state.p[i]))
            sp_, sm = state.copy(), state.copy()
            sp_.p[i] += hp
            sm.p[i] -= hp
            gp[i] = (h(sp_) - h(sm)) / (2 * hp)
        return gq, gp

    gqa, gpa = grad(ha)
    gqb, gpb = grad(hb)
    return complex(np.sum(gqa * gpb - gpa * gqb))


def residue_hamiltonian_fn(sys_, m, power, nodes=64):
    """Hamiltonian functional state -> res z^{-m} tr L^power for brackets."""

    def h(state):
        return residue_hamiltonian(sys_, state, m=m, power=power, nodes=nodes)

    return h


def involution_table(sys_, state, specs, nodes=64, rel_step=1e-6):
    """Pairwise Poisson brackets of residue Hamiltonians.

    ``specs`` is a list of (power, m) labels; returns a dict mapping pairs of
    labels to |bracket|."""
    fns = {spec: residue_hamiltonian_fn(sys_, spec[1], spec[0], nodes=nodes) for spec in specs}
    out = {}
    for i, sa in enumerate(specs):
        for sb in specs[i + 1:]:
            val = poisson_bracket(sys_, fns[sa], fns[sb], state, rel_step=rel_step)
            out[(sa, sb)] = abs(val)
    return out


def _matrix_residue(sys_, state, center, order=1, nodes=64, cluster_tol=None):
    """Laurent coefficient matrix of L(z) at degree -order around center.

    Poles within ``cluster_tol`` of the center count as enclosed (needed when
    probing a slightly moved pole along a trajectory)."""
    lat = sys_.lattice
    if cluster_tol is None:
        cluster_tol = 1e-4 * abs(lat.omega1)
    poles = _pole_set(sys_, state)
    dist = lat.lattice_distance(poles - center)
    dist = dist[dist > cluster_tol]
    radius = float(np.min(dist)) / 3.0
    acc = np.zeros((sys_.matrix_size, sys_.matrix_size), dtype=complex)
    for k in range(nodes):
        zk = center + radius * np.exp(2j * np.pi * k / nodes)
        acc += lax_matrix(sys_, state, zk) * (zk - center) ** order
    return acc / nodes


def tyurin_residue_check(sys_, state, flow_probe=None):
    """Rank-one residue structure of the A-family Lax matrix at z = q_i.

    Returns per-particle dicts with the singular-value ratio s2/s1 of the
    residue (rank-one test), the squared-residue norm ratio (the
    orthogonality of the rank-one factors), and, when ``flow_probe`` is
    given as (state_minus, state_plus, dt), the mismatch between the
    observed velocity and the one read from the moving double pole of dL/dt.
    """
    if sys_.family != "A":
        raise ValueError("residue structure check applies to the A family")
    reports = []
    for i in range(sys_.n):
        if sys_.n == 1:
            reports.append({"sv_ratio": 0.0, "square_ratio": 0.0})
            continue
        r = _matrix_residue(sys_, state, state.q[i], order=1)
        svals = np.linalg.svd(r, compute_uv=False)
        sv_ratio = float(svals[1] / svals[0]) if svals[0] > 0 else 0.0
        sq_ratio = float(np.linalg.norm(r @ r) / np.linalg.norm(r) ** 2)
        rep = {"sv_ratio": sv_ratio, "square_ratio": sq_ratio}
        if flow_probe is not None:
            sm, sp_, dt = flow_probe
            # double-pole coefficient of dL/dt at q_i equals qdot_i * residue
            c2 = (_matrix_residue(sys_, sp_, state.q[i], order=2)
                  - _matrix_residue(sys_, sm, state.q[i], order=2)) / (2 * dt)
            qdot_pred = np.vdot(r, c2) / np.vdot(r, r)
            qdot_obs = (sp_.q[i] - sm.q[i]) / (2 * dt)
            rep["flow_mismatch"] = abs(qdot_pred - qdot_obs)
        reports.append(rep)
    return reports


def run_conservation(sys_, state0, t_end, dt, scheme="rk4", z_samples=None,
                     pmax=4, record_every=50, rng=None):
    """Integrate and measure energy drift and isospectrality.

    Returns (trajectory, report) where the report carries the maximal
    relative H drift and the maximal eigenvalue-multiset drift of L(z0)
    over the sample spectral parameters.
    """
    if z_samples is None:
        rng = rng or np.random.default_rng(0)
        z_samples = [complex(rng.uniform(0.2, 0.6), rng.uniform(0.15, 0.5)) for _ in range(3)]
    traj = integrate(sys_, state0, t_end, dt, scheme=scheme, record_every=record_every)
    h0 = hamiltonian(sys_, traj.state(0))
    l0 = {z: lax_matrix(sys_, traj.state(0), z) for z in z_samples}
    max_h = 0.0
    max_spec = 0.0
    for i in range(1, len(traj)):
        st = traj.state(i)
        max_h = max(max_h, abs(hamiltonian(sys_, st) - h0) / max(1e-300, abs(h0)))
        for z in z_samples:
            max_spec = max(max_spec, eigenvalue_drift(l0[z], lax_matrix(sys_, st, z)))
    report = {
        "family": sys_.family,
        "n": sys_.n,
        "dt": dt,
        "T": t_end,
        "scheme": scheme,
        "max_H_drift": max_h,
        "max_spec_drift": max_spec,
        "z_samples": [str(z) for z in z_samples],
        "completed": bool(traj.completed),
    }
    if sys_.family == "B":
        report["q0"] = str(sys_.q0)
        report["q0_frozen"] = True
    return traj, report


def write_trajectory_csv(path, sys_, traj, z_samples=(), truncated=False):
    """CSV schema: t, q_1..q_n, p_1..p_n, H, inv_p2_z1, ... (real parts,
    imaginary parts appended only when states are complex)."""
    n = sys_.n
    header = ["t"] + [f"q_{i+1}" for i in range(n)] + [f"p_{i+1}" for i in range(n)] + ["H"]
    for k in range(len(z_samples)):
        header.append(f"inv_p2_z{k+1}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(traj)):
            st = traj.state(i)
            row = [traj.times[i]]
            row += [x.real for x in st.q]
            row += [x.real for x in st.p]
            row.append(hamiltonian(sys_, st))
            for z in z_samples:
                row.append(complex(np.trace(lax_matrix(sys_, st, z) @ lax_matrix(sys_, st, z))).real)
            w.writerow(row)
        if truncated:
            w.writerow(["TRUNCATED"] + [""] * (len(header) - 1))
