"""Exact genus-zero realization of the graded current algebra.

The base curve is the projective line.  Marked data: a set of P points and
Q points (free poles, with degrees balanced by a weight schedule so every
homogeneous subspace has the same divisor degree) and a set of gamma points
carrying the depth-k local expansion conditions of the grading.  All spaces
are cut out as exact rational nullspaces; dimensions are therefore integers
computed without any tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import Mat, fdiv, nullspace, rref
from .ratfunc import INF, Poly, RatFunc, RationalMatrix, rat_const

__all__ = [
    "SphereConfig",
    "Slice",
    "SliceDimensionError",
    "divisor_for_degree",
    "section_basis",
    "build_homogeneous_subspace",
    "build_lax_space",
    "SliceWindow",
    "almost_graded_bound",
    "standard_connection_form",
    "connection_form_tail",
    "check_connection_form",
    "pairing_one_form",
    "cocycle_eta",
    "cocycle_holomorphy_tail",
    "cocycle_table_json",
    "gradient_invariant",
    "construct_m_operator",
    "MOperatorResult",
    "lax_tangency_check",
    "TangencyReport",
    "slice_to_json",
]


class SliceDimensionError(AssertionError):
    """Raised when an exact slice dimension misses N dim(g) (non-generic
    point configuration or rank-deficient condition system)."""

    def __init__(self, expected, achieved, degree):
        self.expected = expected
        self.achieved = achieved
        self.degree = degree
        super().__init__(f"slice degree {degree}: dim {achieved}, expected {expected}")


@dataclass
class SphereConfig:
    """Marked-point data for the genus-zero current algebra.

    ``q_points`` may contain INF.  Weight schedules are supported for one or
    two Q points: the degree at the Q points grows linearly with the slice
    index m, totalling m N + N - 1, so every divisor has degree
    N - 1 + k |Gamma|.

    ``gamma_frames`` optionally conjugates the grading at each gamma point by
    an exact group element (the grading type is fixed, its frame varies from
    point to point).  Generic frames are what make the expansion conditions
    transversal when several gamma points carry depth >= 2 conditions; with
    a common frame those conditions can be rank-deficient, which the slice
    builder reports through :class:`SliceDimensionError`.
    """

    dec: object
    p_points: tuple
    q_points: tuple
    gamma_points: tuple
    gamma_frames: tuple = None

    def __post_init__(self):
        if self.dec.alg.kind == "g2":
            raise NotImplementedError(
                "genus-zero realization works over exact rationals; the G2 "
                "realization needs Q(sqrt2) matrix entries"
            )
        pts = list(self.p_points) + list(self.q_points) + list(self.gamma_points)
        if len(set(pts)) != len(pts):
            raise ValueError("marked points must be pairwise distinct")
        if INF in self.gamma_points or INF in self.p_points:
            raise ValueError("infinity is supported as a Q point only")
        if len(self.q_points) not in (1, 2):
            raise ValueError("weight schedules implemented for 1 or 2 Q points")
        if self.gamma_frames is None:
            self.gamma_frames = tuple(Mat.identity(self.dec.alg.size) for _ in self.gamma_points)
        else:
            self.gamma_frames = tuple(self.gamma_frames)
            if len(self.gamma_frames) != len(self.gamma_points):
                raise ValueError("one frame per gamma point required")
        from .exact import mat_inverse

        self._frame_inv = tuple(mat_inverse(g) for g in self.gamma_frames)
        self._conj_basis = tuple(
            tuple(gi @ b @ g for b in self.dec.alg.basis)
            for g, gi in zip(self.gamma_frames, self._frame_inv)
        )

    def frame(self, gi):
        return self.gamma_frames[gi]

    def to_reference_frame(self, gi, m):
        """Conjugate a matrix at the gi-th gamma point back to the frame in
        which the stored grading element is diagonal."""
        return self._frame_inv[gi] @ m @ self.gamma_frames[gi]

    def grading_element_at(self, gi):
        """The grading element in the global frame at the gi-th gamma."""
        g, gi_ = self.gamma_frames[gi], self._frame_inv[gi]
        return g @ self.dec.h @ gi_

    @property
    def n_points(self):
        return len(self.p_points)

    @property
    def alg(self):
        return self.dec.alg

    def q_degrees(self, m):
        """Divisor coefficients at the Q points for slice index m (the
        balanced-rounding schedule; bounded deviation from a_j m)."""
        n = self.n_points
        total = m * n + n - 1
        if len(self.q_points) == 1:
            return (total,)
        half = Fraction(m * n, 2)
        d1 = math.ceil(half)
        return (d1, total - d1)

    def a_weights(self):
        n = self.n_points
        if len(self.q_points) == 1:
            return (Fraction(n),)
        return (Fraction(n, 2), Fraction(n, 2))

    def l_value(self):
        """The filtration count (sum dim of negative filtrations + 1) |Gamma|
        divided by dim g; must be an integer for the second-member space
        dimension formula to close."""
        dec = self.dec
        s = sum(dec.dim_filtration(i) for i in range(-dec.depth, 0)) + 1
        val = Fraction(s * len(self.gamma_points), dec.alg.dim)
        if val.denominator != 1:
            raise ValueError(
                f"gamma count {len(self.gamma_points)} incompatible: "
                f"({s} * |Gamma|) / dim g = {val} is not an integer"
            )
        return int(val)


def divisor_for_degree(cfg, m):
    """Divisor of the homogeneous subspace of degree m: poles bounded by -m
    at P points, by the schedule at Q points, and by the depth at gammas."""
    d = {}
    for p in cfg.p_points:
        d[p] = -m
    for q, w in zip(cfg.q_points, cfg.q_degrees(m)):
        d[q] = w
    for g in cfg.gamma_points:
        d[g] = cfg.dec.depth
    return d


def section_basis(divisor):
    """Exact basis of scalar rational functions f with (f) + D >= 0.

    At genus zero the space has dimension deg D + 1 (empty if deg D < 0):
    numerator monomials times the fixed zero/pole skeleton.
    """
    zeros = Poly([1])
    poles = Poly([1])
    total = 0
    for c, w in divisor.items():
        total += w
        if c is INF:
            continue
        lin = Poly([-Fraction(c), 1])
        for _ in range(abs(w)):
            if w > 0:
                poles = poles * lin
            else:
                zeros = zeros * lin
    if total < 0:
        return []
    out = []
    mono = Poly([1])
    for _ in range(total + 1):
        out.append(RatFunc(zeros * mono, poles))
        mono = mono * Poly.x()
    return out


@dataclass
class Slice:
    """Homogeneous subspace: exact basis of matrix rational functions."""

    degree: object
    basis: list
    divisor: dict

    @property
    def dim(self):
        return len(self.basis)


def _expansion_condition_rows(cfg, scalars, p_range, mode):
    """Linear conditions imposing the local expansion shape at every gamma.

    mode "lax": coefficient at degree p lies in the level-p filtration for
    p in p_range.  mode "mop": same for p <= -2, while at p = -1 one free
    multiple of the grading element h is allowed (one auxiliary unknown per
    gamma point, appended after the section*basis unknowns).

    Returns (rows, n_aux).
    """
    dec = cfg.dec
    alg = cfg.alg
    size = alg.size
    k = dec.depth
    ncand = len(scalars) * alg.dim
    gammas = list(cfg.gamma_points)
    n_aux = len(gammas) if mode == "mop" else 0
    rows = []
    for gi, g in enumerate(gammas):
        tails = [f.laurent_at(Fraction(g), k - 1) for f in scalars]
        conj = cfg._conj_basis[gi]
        for p in p_range:
            for u in range(size):
                for v in range(size):
                    if dec.delta[u][v] <= p:
                        continue
                    row = [0] * (ncand + n_aux)
                    nonzero = False
                    for si, tail in enumerate(tails):
                        c = tail.get(p)
                        if not c:
                            continue
                        for bi in range(alg.dim):
                            e = conj[bi].rows[u][v]
                            if e:
                                row[si * alg.dim + bi] = c * e
                                nonzero = True
                    if mode == "mop" and p == -1:
                        hv = dec.h.rows[u][v]
                        if hv:
                            row[ncand + gi] = -hv
                            nonzero = True
                    if nonzero:
                        rows.append(row)
    return rows, n_aux


def _assemble(cfg, scalars, coords):
    alg = cfg.alg
    out = RationalMatrix.zeros(alg.size)
    for si, f in enumerate(scalars):
        for bi, b in enumerate(alg.basis):
            c = coords[si * alg.dim + bi]
            if c:
                out = out + RationalMatrix.from_scalar_matrix(b, f * c)
    return out


def build_homogeneous_subspace(cfg, m, check_dim=True):
    """Exact basis of the degree-m subspace; dimension must be N dim(g)."""
    div = divisor_for_degree(cfg, m)
    scalars = section_basis(div)
    dec = cfg.dec
    rows, _ = _expansion_condition_rows(cfg, scalars, range(-dec.depth, dec.depth), "lax")
    ncand = len(scalars) * cfg.alg.dim
    null = nullspace(rows, ncand) if rows else [[1 if i == j else 0 for i in range(ncand)] for j in range(ncand)]
    basis = [_assemble(cfg, scalars, v) for v in null]
    expected = cfg.n_points * cfg.alg.dim
    if check_dim and len(basis) != expected:
        raise SliceDimensionError(expected, len(basis), m)
    return Slice(m, basis, div)


def build_lax_space(cfg, pole_orders):
    """Space of algebra-valued functions with (L) + D + k Gamma >= 0 and the
    local expansion conditions; ``pole_orders`` maps points of Pi to their
    (nonnegative) allowed pole order."""
    div = dict(pole_orders)
    for g in cfg.gamma_points:
        div[g] = cfg.dec.depth
    scalars = section_basis(div)
    dec = cfg.dec
    rows, _ = _expansion_condition_rows(cfg, scalars, range(-dec.depth, dec.depth), "lax")
    ncand = len(scalars) * cfg.alg.dim
    null = nullspace(rows, ncand) if rows else [[1 if i == j else 0 for i in range(ncand)] for j in range(ncand)]
    return Slice(None, [_assemble(cfg, scalars, v) for v in null], div)


# ---------------------------------------------------------------------------
# almost-graded structure
# ---------------------------------------------------------------------------


class SliceWindow:
    """Slices over a contiguous degree range, with exact membership tests
    for the span of any sub-range (solvers cached per sub-range).

    The homogeneous subspaces defined by divisor bounds are not disjoint, so
    "the band of degrees hit by a commutator" is measured as the smallest
    window whose span contains it exactly.
    """

    def __init__(self, cfg, lo, hi):
        self.cfg = cfg
        self.lo = lo
        self.hi = hi
        self.slices = {m: build_homogeneous_subspace(cfg, m) for m in range(lo, hi + 1)}
        self._samples = self._sample_points()
        self._evals = {
            m: [[b.eval(x) for x in self._samples] for b in self.slices[m].basis]
            for m in self.slices
        }
        self._columns = {
            m: [[a for ev in evs for a in ev.flatten()] for evs in self._evals[m]]
            for m in self._evals
        }
        self._solvers = {}

    def _sample_points(self):
        # Sampling is an exact membership test: any discrepancy function lies
        # in a space of rational functions whose pole + zero budget is below
        # the sample count, so vanishing at all samples forces vanishing.
        finite = [p for p in (*self.cfg.p_points, *self.cfg.q_points, *self.cfg.gamma_points) if p is not INF]
        max_deg = max(
            sum(abs(w) for w in divisor_for_degree(self.cfg, m).values())
            for m in (self.lo, self.hi)
        )
        count = 3 * max_deg + 2 * self.cfg.dec.depth + 8
        pts = []
        x = Fraction(3, 7)
        while len(pts) < count:
            if x not in finite:
                pts.append(x)
            x = x + 1
        return pts

    def _sample_vector(self, mat):
        out = []
        for x in self._samples:
            ev = mat.eval(x)
            out.extend(ev.flatten())
        return out

    def _solver(self, lo, hi):
        from .exact import ColumnSolver

        key = (lo, hi)
        if key not in self._solvers:
            cols = []
            for m in range(lo, hi + 1):
                cols.extend(self._columns[m])
            self._solvers[key] = ColumnSolver(cols)
        return self._solvers[key]

    def decompose_in(self, mat, lo, hi, verify=False):
        """Exact coordinates over the union of slice bases for degrees in
        [lo, hi], as a dict degree -> {basis index: coefficient}, or None.

        ``verify`` additionally reconstructs the matrix function and compares
        it symbolically (the sampling test is already exact by the degree
        argument; the flag provides an independent route for tests).
        """
        coords = self._solver(lo, hi).solve(self._sample_vector(mat))
        if coords is None:
            return None
        out = {}
        recon = None
        pos = 0
        for m in range(lo, hi + 1):
            for j in range(self.slices[m].dim):
                c = coords[pos]
                pos += 1
                if c:
                    out.setdefault(m, {})[j] = c
                    if verify:
                        term = self.slices[m].basis[j].scale(rat_const(c))
                        recon = term if recon is None else recon + term
        if verify:
            recon = RationalMatrix.zeros(self.cfg.alg.size) if recon is None else recon
            if not (recon - mat).is_zero():
                return None
        return out

    def minimal_band(self, mat, start):
        """Smallest S with mat in the span of degrees [start, start + S];
        None if no sub-window up to the top contains it."""
        for hi in range(start, self.hi + 1):
            if self.decompose_in(mat, start, hi) is not None:
                return hi - start
        return None

    def minimal_band_of_bracket(self, m, i, n, j):
        """Smallest S for the commutator of basis elements (m, i) and (n, j),
        computed entirely in sample space (exact by the degree argument)."""
        vec = []
        for a, b in zip(self._evals[m][i], self._evals[n][j]):
            vec.extend(a.comm(b).flatten())
        if all(not c for c in vec):
            return 0
        start = m + n
        for hi in range(start, self.hi + 1):
            if self._solver(start, hi).solve(vec) is not None:
                return hi - start
        return None


def almost_graded_bound(window, pairs, rng=None, max_pairs_per_sum=None):
    """Measured upper width S of the commutator band.

    For each degree pair (m, n), commutators of slice basis elements are
    expanded over windows starting at m + n (the band never starts lower)
    and the smallest covering width is recorded; the maximum over all pairs
    is the measured S.  An expansion failure inside the available window is
    reported as an error.
    """
    s_max = 0
    for m, n in pairs:
        am, an = window.slices[m], window.slices[n]
        idx_pairs = [(i, j) for i in range(am.dim) for j in range(an.dim)]
        if rng is not None and max_pairs_per_sum is not None and len(idx_pairs) > max_pairs_per_sum:
            idx_pairs = [idx_pairs[rng.randrange(len(idx_pairs))] for _ in range(max_pairs_per_sum)]
        for i, j in idx_pairs:
            s = window.minimal_band_of_bracket(m, i, n, j)
            if s is None:
                raise ValueError(
                    f"commutator of degrees ({m},{n}) escapes the window [{window.lo},{window.hi}]"
                )
            s_max = max(s_max, s)
    return s_max


# ---------------------------------------------------------------------------
# central-extension cocycle
# ---------------------------------------------------------------------------


def standard_connection_form(cfg):
    """Diagonal connection form with expansion h/(z - gamma) + regular at
    every gamma and poles otherwise only at the first Q point (none needed
    when infinity is a Q point)."""
    z = RatFunc(Poly.x())
    out = RationalMatrix.zeros(cfg.alg.size)
    correction = None if INF in cfg.q_points else next(q for q in cfg.q_points if q is not INF)
    for gi, g in enumerate(cfg.gamma_points):
        scalar = 1 / (z - Fraction(g))
        if correction is not None:
            scalar = scalar - 1 / (z - Fraction(correction))
        out = out + RationalMatrix.from_scalar_matrix(cfg.grading_element_at(gi), scalar)
    return out


def connection_form_tail(cfg, omega, gamma_index):
    """Deviation of omega from h_gamma/(z-gamma) + regular at a gamma point:
    the returned dict of negative-degree coefficient matrices must be empty."""
    z = RatFunc(Poly.x())
    gamma = cfg.gamma_points[gamma_index]
    h_g = cfg.grading_element_at(gamma_index)
    rm = omega - RationalMatrix.from_scalar_matrix(h_g, 1 / (z - Fraction(gamma)))
    out = {}
    for p in range(-cfg.dec.depth - 2, 0):
        c = rm.laurent_coefficient(Fraction(gamma), p)
        if not c.is_zero():
            out[p] = c
    return out


def pairing_one_form(l1, l2, omega=None):
    """Scalar F with F dz = <L, (d - ad omega) L'> under the trace pairing."""
    f = (l1 @ l2.derivative()).trace()
    if omega is not None:
        f = f - (l1 @ (omega @ l2 - l2 @ omega)).trace()
    return f


def check_connection_form(cfg, omega):
    """Reject a connection form whose expansion at some gamma point is not
    h_gamma/(z - gamma) + regular."""
    for gi in range(len(cfg.gamma_points)):
        tail = connection_form_tail(cfg, omega, gi)
        if tail:
            raise ValueError(
                f"connection form violates the required expansion at gamma point "
                f"{cfg.gamma_points[gi]}: nonzero degrees {sorted(tail)}"
            )


def cocycle_eta(cfg, l1, l2, omega, validate=False):
    """Local 2-cocycle: sum of residues over the P points of the pairing
    one-form.  Exact rational output; ``validate`` additionally checks the
    connection form's expansion at every gamma point first."""
    if validate:
        check_connection_form(cfg, omega)
    f = pairing_one_form(l1, l2, omega)
    return sum((f.residue_at(p) for p in cfg.p_points), Fraction(0))


def cocycle_holomorphy_tail(cfg, l1, l2, omega, gamma):
    """Negative Laurent tail of the pairing one-form at a gamma point
    (expected empty for valid algebra elements)."""
    f = pairing_one_form(l1, l2, omega)
    tail = f.laurent_at(Fraction(gamma), -1)
    return {p: c for p, c in tail.items() if c}


# ---------------------------------------------------------------------------
# invariant gradients and the second Lax-pair member
# ---------------------------------------------------------------------------


def gradient_invariant(l, power, orthogonal_or_symplectic=False):
    """Gradient of the trace-power invariant: p L^(p-1).

    Odd powers are rejected for the orthogonal/symplectic families (their
    odd trace powers vanish identically, so only even ones are invariants).
    """
    if power < 1:
        raise ValueError("power must be >= 1")
    if orthogonal_or_symplectic and power % 2:
        raise ValueError("odd trace powers are not invariants of this family")
    if isinstance(l, RationalMatrix):
        return l.matpow(power - 1).scale(rat_const(power))
    out = Mat.identity(l.n)
    for _ in range(power - 1):
        out = out @ l
    return out.scale(power)


@dataclass
class MOperatorResult:
    matrix: object
    prenorm_dim: int
    expected_prenorm_dim: int
    pole_order: int
    l_value: int
    nu: dict


def construct_m_operator(cfg, l, power, pole_point, order, norm_points):
    """Unique second Lax-pair member attached to (trace power, point, order).

    The returned function has its only pole away from the gamma points at
    ``pole_point``, matches w^-order * gradient(L) there up to O(1), carries
    the allowed h/z singular terms at the gammas, and vanishes at the
    normalization points (l - g + 1 = l + 1 of them at genus zero).
    """
    dec = cfg.dec
    alg = cfg.alg
    k = dec.depth
    l_val = cfg.l_value()
    if len(norm_points) != l_val + 1:
        raise ValueError(f"need {l_val + 1} normalization points, got {len(norm_points)}")
    grad = gradient_invariant(l, power, alg.has_defining_form)
    pole_point = Fraction(pole_point)
    tail = {
        -i: grad.laurent_coefficient(pole_point, order - i) if order - i >= 0 else None
        for i in range(1, order + 1)
    }
    sing = {i: m for i, m in tail.items() if m is not None and not m.is_zero()}
    d = -min(sing, default=0)
    div = {pole_point: d}
    for q in cfg.q_points:
        div.setdefault(q, 0)
    for p in cfg.p_points:
        div.setdefault(p, 0)
    for g in cfg.gamma_points:
        div[g] = k
    scalars = section_basis(div)
    rows, n_aux = _expansion_condition_rows(cfg, scalars, range(-k, 0), "mop")
    ncand = len(scalars) * alg.dim
    prenorm = nullspace(rows, ncand + n_aux) if rows else None
    prenorm_dim = len(prenorm) if prenorm is not None else ncand + n_aux
    expected = alg.dim * (d + l_val + 1)
    # affine part: singular match at the pole point, zeros at norm points
    aug = [row + [Fraction(0)] for row in rows]
    size = alg.size
    tails = [f.laurent_at(pole_point, -1) for f in scalars]
    for i in range(1, d + 1):
        target = sing.get(-i)
        for u in range(size):
            for v in range(size):
                row = [0] * (ncand + n_aux)
                nz = False
                for si, t in enumerate(tails):
                    c = t.get(-i)
                    if not c:
                        continue
                    for bi, b in enumerate(alg.basis):
                        e = b.rows[u][v]
                        if e:
                            row[si * alg.dim + bi] = c * e
                            nz = True
                rhs = target.rows[u][v] if target is not None else 0
                if nz or rhs:
                    aug.append(row + [Fraction(rhs)])
    for pt in norm_points:
        vals = [f.eval(Fraction(pt)) for f in scalars]
        for u in range(size):
            for v in range(size):
                row = [0] * (ncand + n_aux)
                nz = False
                for si, val in enumerate(vals):
                    if not val:
                        continue
                    for bi, b in enumerate(alg.basis):
                        e = b.rows[u][v]
                        if e:
                            row[si * alg.dim + bi] = val * e
                            nz = True
                if nz:
                    aug.append(row + [Fraction(0)])
    red, pivots = rref(aug)
    ncols = ncand + n_aux
    if any(p == ncols for p in pivots):
        raise ValueError("inconsistent constraint system (non-generic data)")
    if len(pivots) < ncols:
        free = ncols - len(pivots)
        raise ValueError(f"solution not unique: {free} residual degrees of freedom")
    x = [Fraction(0)] * ncols
    for r, c in enumerate(pivots):
        x[c] = red[r][ncols]
    m_op = _assemble(cfg, scalars, x[:ncand])
    nus = {g: x[ncand + gi] for gi, g in enumerate(cfg.gamma_points)}
    return MOperatorResult(m_op, prenorm_dim, expected, d, l_val, nus)


@dataclass
class TangencyReport:
    ok: bool
    gamma_residuals: dict
    divisor_violations: list
    nu: dict

    def __bool__(self):
        return self.ok


def lax_tangency_check(cfg, l, m_op, pole_orders):
    """Verify the Lax-equation tangency structure of [L, M].

    At every gamma point the bracket must expand with the coefficients
    induced by the point-motion relations (degrees -k-1 .. 0), and away from
    the gammas the bracket's divisor must be bounded by the pole budget of L
    (``pole_orders``), the nontrivial cancellation coming from the gradient
    structure of M at its private pole.
    """
    dec = cfg.dec
    alg = cfg.alg
    k = dec.depth
    bracket = l.comm(m_op)
    gamma_residuals = {}
    nus = {}
    h = dec.h
    j0 = next(i for i in range(h.n) if h.rows[i][i])
    ok = True
    for gidx, g in enumerate(cfg.gamma_points):
        gf = Fraction(g)
        lc = {p: cfg.to_reference_frame(gidx, l.laurent_coefficient(gf, p)) for p in range(-k, 2)}
        mc = {p: cfg.to_reference_frame(gidx, m_op.laurent_coefficient(gf, p)) for p in range(-k, k + 1)}
        nu = fdiv(mc[-1].rows[j0][j0], h.rows[j0][j0]) if k >= 1 else Fraction(0)
        nus[g] = nu
        mreg = dict(mc)
        mreg[-1] = mc[-1] - h.scale(nu)
        bad = []
        if not dec.in_filtration(mreg[-1], -1):
            bad.append(("m-expansion", -1))
        for p in range(-k, -1):
            if not dec.in_filtration(mreg[p], p):
                bad.append(("m-expansion", p))
        # degrees below -k-1 must be absent
        if bracket.order_at(gf) is not None and bracket.order_at(gf) < -k - 1:
            bad.append(("pole-order", bracket.order_at(gf)))
        z_dot = -nu
        br = {p: cfg.to_reference_frame(gidx, bracket.laurent_coefficient(gf, p)) for p in range(-k - 1, 1)}
        bottom = br[-k - 1] - lc[-k].scale(-k * z_dot)
        if not bottom.is_zero():
            bad.append(("bottom", -k - 1))
        for p in range(-k, 1):
            conv = Mat.zeros(alg.size)
            for i in range(-k, p + k + 1):
                j = p - i
                conv = conv + lc[i].comm(mreg[j])
            ldot_p = conv + (lc[p + 1].scale(p + 1) - h.comm(lc[p + 1])).scale(nu)
            expected = ldot_p + lc[p + 1].scale((p + 1) * z_dot)
            if not (br[p] - expected).is_zero():
                bad.append(("coefficient", p))
        if bad:
            ok = False
        gamma_residuals[g] = bad
    divisor_violations = []
    allowed = set(Fraction(g) for g in cfg.gamma_points)
    finite_pts = [p for p in pole_orders if p is not INF]
    for i in range(bracket.n):
        for j in range(bracket.m):
            e = bracket.rows[i][j]
            if e.is_zero():
                continue
            orders, leftover = e.poles_within(list(allowed) + finite_pts)
            if leftover:
                divisor_violations.append(((i, j), "stray-pole"))
                continue
            for pt, o in orders.items():
                if pt in allowed:
                    continue
                if o > pole_orders.get(pt, 0):
                    divisor_violations.append(((i, j), pt, o))
            o_inf = e.order_at(INF)
            if o_inf is not None and -o_inf > pole_orders.get(INF, 0):
                divisor_violations.append(((i, j), INF, -o_inf))
    if divisor_violations:
        ok = False
    return TangencyReport(ok, gamma_residuals, divisor_violations, nus)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def cocycle_table_json(cfg, window, omega):
    """Exact cocycle values on slice basis pairs, fractions as strings."""
    out = []
    for m in range(window.lo, window.hi + 1):
        for n in range(window.lo, window.hi + 1):
            for i, bi in enumerate(window.slices[m].basis):
                for j, bj in enumerate(window.slices[n].basis):
                    v = cocycle_eta(cfg, bi, bj, omega)
                    if v:
                        out.append({"m": m, "n": n, "i": i, "j": j, "eta": str(v)})
    return {"window": [window.lo, window.hi], "nonzero": out}


def slice_to_json(sl):
    """JSON-ready description with exact fraction strings."""

    def fstr(fr):
        return str(Fraction(fr))

    def rat(e):
        return {"num": [fstr(c) for c in e.num.coeffs], "den": [fstr(c) for c in e.den.coeffs]}

    return {
        "degree": sl.degree,
        "dim": sl.dim,
        "divisor": [["inf" if p is INF else fstr(p), int(w)] for p, w in sl.divisor.items()],
        "basis": [[[rat(e) for e in row] for row in b.rows] for b in sl.basis],
    }
