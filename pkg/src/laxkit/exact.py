"""Exact scalars and exact linear algebra.

Everything structural in this package (root systems, matrix realizations,
graded decompositions, genus-zero function spaces) is computed over exact
fields: the rationals, extended by sqrt(2) for the 7-dimensional realization
of G2 and by sqrt(3) for its root coordinates.  Scalars are plain ``int``,
``fractions.Fraction``, or :class:`Quad` (an element of Q(sqrt(d))); integer
entries stay integers so that the hot commutator loops run on machine ints.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = [
    "Quad",
    "Mat",
    "sqrt2",
    "sqrt3",
    "fdiv",
    "is_integer_scalar",
    "as_integer",
    "rref",
    "nullspace",
    "rank",
    "ColumnSolver",
    "mat_inverse",
    "scalar_str",
]


class Quad:
    """Element a + b*sqrt(d) of the real quadratic field Q(sqrt(d)).

    ``d`` must be a positive non-square integer; elements with different
    ``d`` never mix.  Arithmetic coerces ints and Fractions.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=2):
        self.a = a if isinstance(a, Fraction) else Fraction(a)
        self.b = b if isinstance(b, Fraction) else Fraction(b)
        self.d = d

    def _coerce(self, other):
        if isinstance(other, Quad):
            if other.d != self.d:
                raise TypeError(f"mixed quadratic fields Q(sqrt{self.d})/Q(sqrt{other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return Quad(other, 0, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad(o.a - self.a, o.b - self.b, self.d)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad(self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def inverse(self):
        n = self.a * self.a - self.d * self.b * self.b
        if n == 0:
            raise ZeroDivisionError("zero element of quadratic field")
        return Quad(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self):
        return Quad(-self.a, -self.b, self.d)

    def __eq__(self, other):
        if isinstance(other, Quad):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * float(self.d) ** 0.5

    def __repr__(self):
        if self.b == 0:
            return str(self.a)
        return f"({self.a}+{self.b}*sqrt{self.d})"


def sqrt2(coeff=1):
    return Quad(0, coeff, 2)


def sqrt3(coeff=1):
    return Quad(0, coeff, 3)


def fdiv(a, b):
    """Exact division that never produces floats."""
    if isinstance(a, Quad) or isinstance(b, Quad):
        if not isinstance(a, Quad):
            a = Quad(a, 0, b.d)
        return a / b
    return Fraction(a) / Fraction(b)


def is_integer_scalar(x):
    if isinstance(x, int):
        return True
    if isinstance(x, Fraction):
        return x.denominator == 1
    if isinstance(x, Quad):
        return x.b == 0 and x.a.denominator == 1
    return False


def as_integer(x):
    if not is_integer_scalar(x):
        raise ValueError(f"not an integer scalar: {x!r}")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator
    return x.a.numerator


def scalar_str(x):
    """Serialize an exact scalar, fractions as 'p/q' strings."""
    if isinstance(x, Quad):
        return f"{x.a}+{x.b}*sqrt({x.d})"
    return str(Fraction(x))


# ---------------------------------------------------------------------------
# small exact matrices (Lie algebra elements)
# ---------------------------------------------------------------------------


class Mat:
    """Immutable dense matrix over exact scalars."""

    __slots__ = ("rows", "n", "m")

    def __init__(self, rows):
        self.rows = tuple(tuple(r) for r in rows)
        self.n = len(self.rows)
        self.m = len(self.rows[0]) if self.rows else 0

    @classmethod
    def zeros(cls, n, m=None):
        m = n if m is None else m
        return cls([[0] * m for _ in range(n)])

    @classmethod
    def identity(cls, n):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def unit(cls, n, i, j, value=1):
        rows = [[0] * n for _ in range(n)]
        rows[i][j] = value
        return cls(rows)

    @classmethod
    def diag(cls, entries):
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    def __add__(self, other):
        return Mat([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return Mat([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self):
        return Mat([[-a for a in r] for r in self.rows])

    def scale(self, c):
        if c == 1:
            return self
        return Mat([[c * a for a in r] for r in self.rows])

    def __matmul__(self, other):
        ocols = list(zip(*other.rows))
        return Mat(
            [[sum(a * b for a, b in zip(row, col)) for col in ocols] for row in self.rows]
        )

    def comm(self, other):
        return self @ other - other @ self

    @property
    def T(self):
        return Mat(list(zip(*self.rows)))

    def trace(self):
        return sum(self.rows[i][i] for i in range(min(self.n, self.m)))

    def is_zero(self):
        return all(not a for r in self.rows for a in r)

    def __eq__(self, other):
        return isinstance(other, Mat) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def flatten(self):
        return [a for r in self.rows for a in r]

    def is_diagonal(self):
        return all(not self.rows[i][j] for i in range(self.n) for j in range(self.m) if i != j)

    def __repr__(self):
        return "Mat(" + "; ".join(" ".join(str(a) for a in r) for r in self.rows) + ")"


# ---------------------------------------------------------------------------
# exact linear algebra
# ---------------------------------------------------------------------------


def rref(rows, pivot_cols=None):
    """Reduced row echelon form over the scalar field.

    Returns (new_rows, pivot_columns).  Input is not modified.  If
    ``pivot_cols`` is given, pivots are only sought in the first that many
    columns (the rest are carried along, e.g. an augmented block).
    """
    a = [list(r) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    stop = ncols if pivot_cols is None else pivot_cols
    pivots = []
    r = 0
    for c in range(stop):
        pr = None
        for i in range(r, nrows):
            if a[i][c]:
                pr = i
                break
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        inv = fdiv(1, a[r][c])
        a[r] = [inv * x for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def nullspace(rows, ncols=None):
    """Exact basis of the right nullspace of the given row list."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for empty system")
        return [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]
    ncols = len(rows[0]) if ncols is None else ncols
    red, pivots = rref(rows)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for r, c in enumerate(pivots):
            v[c] = -red[r][f]
        basis.append(v)
    return basis


def rank(rows):
    """Matrix rank by fraction-free (Bareiss) elimination when the entries
    are rational, falling back to field elimination otherwise."""
    if not rows or not rows[0]:
        return 0
    flat = [x for r in rows for x in r]
    if all(isinstance(x, (int, Fraction)) for x in flat):
        den = 1
        for x in flat:
            if isinstance(x, Fraction):
                den = den * x.denominator // _gcd(den, x.denominator)
        a = [[int(x * den) if isinstance(x, Fraction) else x * den for x in r] for r in rows]
        return _bareiss_rank(a)
    _, pivots = rref(rows)
    return len(pivots)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _bareiss_rank(a):
    nrows, ncols = len(a), len(a[0])
    prev = 1
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if a[i][c]:
                pr = i
                break
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        piv = a[r][c]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                a[i][j] = (piv * a[i][j] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = piv
        r += 1
        if r == nrows:
            break
    return r


class ColumnSolver:
    """Repeated exact solves of ``B x = v`` for a fixed column family B.

    The elimination of ``[B | I]`` is performed once; each solve is then a
    single matrix-vector product plus a consistency check on non-pivot rows.
    """

    def __init__(self, columns):
        self.ncols = len(columns)
        self.nrows = len(columns[0]) if columns else 0
        aug = []
        for i in range(self.nrows):
            row = [columns[j][i] for j in range(self.ncols)]
            row.extend(1 if k == i else 0 for k in range(self.nrows))
            aug.append(row)
        red, pivots = rref(aug, pivot_cols=self.ncols)
        self._pivots = pivots
        self._red = red
        self.rank = len(pivots)

    def solve(self, v):
        """Coordinates x with B x = v, or None if v is outside the span."""
        nc = self.ncols
        x = [0] * nc
        for r in range(len(self._red)):
            s = sum(self._red[r][nc + k] * v[k] for k in range(self.nrows) if v[k])
            if r < self.rank:
                x[self._pivots[r]] = s
            elif s:
                return None
        # rows below the rank already checked; verify residual via pivot rows
        return x


def mat_inverse(m):
    """Exact inverse of a square :class:`Mat`."""
    n = m.n
    aug = [list(m.rows[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return Mat([row[n:] for row in red])
