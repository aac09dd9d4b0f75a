from fractions import Fraction as F

import pytest

from laxkit.ratfunc import INF, Poly, RatFunc, RationalMatrix, rat_const, rat_z


def test_poly_divmod_and_gcd():
    a = Poly([2, 3, 1])   # (z+1)(z+2)
    b = Poly([1, 1])      # z+1
    q, r = a.divmod(b)
    assert r.is_zero() and q == Poly([2, 1])
    assert a.gcd(Poly([3, 4, 1])) == Poly([1, 1])  # common factor z+1, monic


def test_poly_shift_valuation():
    p = Poly([1, 2, 1])
    assert p.shift(F(-1)).valuation() == 2
    assert Poly([]).valuation() is None


def test_geometric_series_oracle():
    z = rat_z()
    tail = (1 / (1 - z)).laurent_at(F(0), 6)
    assert all(tail[i] == 1 for i in range(7))


def test_orders_and_residues():
    z = rat_z()
    g = (z * z + 3) / ((z - 1) * (z + 2))
    assert g.order_at(F(1)) == -1
    assert g.order_at(INF) == 0
    assert (1 / (z * z)).order_at(INF) == 2
    assert (z ** 0 * z * z * z).order_at(INF) == -3
    # total residue over the sphere vanishes
    assert g.residue_at(F(1)) + g.residue_at(F(-2)) + g.residue_at(INF) == 0


def test_laurent_at_infinity():
    z = rat_z()
    h = z * z / (z - 1)
    assert h.laurent_at(INF, 2) == {-1: F(1), 0: F(1), 1: F(1), 2: F(1)}
    assert h.residue_at(INF) == -1


def test_derivative_product_rule():
    z = rat_z()
    a = (z + 2) / (z * z - 3)
    b = (2 * z - 1) / (z + 5)
    assert (a * b).derivative() == a.derivative() * b + a * b.derivative()


def test_poles_within():
    z = rat_z()
    g = 1 / ((z - 3) * (z - 4) ** 2)
    orders, leftover = g.poles_within([F(3), F(4)])
    assert orders == {F(3): 1, F(4): 2} and leftover == 0
    orders, leftover = g.poles_within([F(3)])
    assert orders == {F(3): 1} and leftover == 2


def test_eval_at_pole_raises():
    z = rat_z()
    with pytest.raises(ZeroDivisionError):
        (1 / (z - 1)).eval(F(1))


def test_matrix_operations():
    z = rat_z()
    m = RationalMatrix([[z, 1 / (z - 1)], [rat_const(0), z * z]])
    assert m.matpow(2).rows[0][0] == z * z
    assert m.matpow(0).rows[0][1].is_zero()
    assert m.order_at(F(1)) == -1
    assert m.laurent_coefficient(F(1), -1)[0, 1] == 1
    assert m.comm(m).is_zero()
    assert m.trace() == z + z * z
    ev = m.eval(F(2))
    assert ev[0, 0] == 2 and ev[0, 1] == 1
