"""Property-based checks on exact and round-trip invariants."""
from fractions import Fraction

from flint import acb, arb
from hypothesis import given, settings, strategies as st

from weilmaass.bigarith import from_decimal, make_context, to_decimal, to_float, unit_circle_exp
from weilmaass.fundom import in_closed_domain, pullback
from weilmaass.harness import nearest_integer
from weilmaass.maassform import HarmonicParams, delta_to_index, index_to_delta
from weilmaass.weilrep import MetaplecticElement, mp_compose, word_decomposition, S

CTX = make_context(30)


@given(st.integers(-10**40, 10**40), st.integers(-200, 200))
def test_decimal_round_trip(man, exp):
    with CTX:
        x = (arb(man) * arb(2) ** exp).mid()
    assert from_decimal(to_decimal(x, CTX), CTX) == x


@given(st.fractions(), st.integers(-10**6, 10**6))
def test_unit_circle_exp_periodic(f, k):
    with CTX:
        d = unit_circle_exp(f) - unit_circle_exp(f + k)
    assert to_float(abs(d)) < 1e-30


@settings(max_examples=200)
@given(st.floats(-1e3, 1e3), st.floats(1e-4, 1e2))
def test_pullback_lands_in_domain(x, y):
    with CTX:
        z = acb(repr(x), repr(y))
        res = pullback(z)
        assert in_closed_domain(res.z_star)
        assert to_float(abs(res.map.act(res.z_star) - z)) < 1e-18 * max(1.0, abs(x), 1 / y)


@given(st.sampled_from([1, 2, 5, 11, 37]), st.booleans(), st.integers(-5000, 5000))
def test_delta_index_bijection(N, conj, delta):
    p = HarmonicParams(N, Fraction(1, 2), conj)
    try:
        n, h = delta_to_index(p, delta)
    except ValueError:
        assert all((r * r - delta) % (4 * N) for r in range(2 * N))
        return
    assert p.admissible(n, h)
    assert index_to_delta(p, n, h) == delta


@given(st.integers(-50, 50), st.integers(-50, 50))
def test_word_decomposition_for_lower_triangular_products(p, q):
    A = mp_compose(mp_compose(MetaplecticElement(1, p, 0, 1), S), MetaplecticElement(1, q, 0, 1))
    prod = MetaplecticElement(1, 0, 0, 1)
    for tok, e in word_decomposition(A):
        prod = mp_compose(prod, MetaplecticElement(1, e, 0, 1) if tok == "T" else S)
    assert prod == A


@given(st.integers(-10**6, 10**6), st.floats(-0.49, 0.49))
def test_nearest_integer(k, frac):
    got, dist = nearest_integer(float(k) + frac)
    assert got == k
    assert abs(dist - abs(frac)) < 1e-9
