import json
from fractions import Fraction

import pytest
from flint import acb, arb

from weilmaass.bigarith import make_context, to_float
from weilmaass.maassform import (CoefficientTable, CongruenceError, HarmonicParams,
                                 PrincipalPart, build_index_set, delta_index_map,
                                 delta_to_index, evaluate_truncated, index_to_delta, pairing)

P11 = HarmonicParams(11, Fraction(1, 2), True)


def test_params_validation():
    with pytest.raises(ValueError):
        HarmonicParams(0, Fraction(1, 2), False)
    with pytest.raises(ValueError):
        HarmonicParams(5, Fraction(3, 2), False)
    with pytest.raises(ValueError):
        HarmonicParams(5, Fraction(1, 2), False, mode="weird")
    HarmonicParams(5, Fraction(3, 2), False, mode="holomorphic")
    HarmonicParams(5, Fraction(-3, 2), False)


def test_non_prime_advisory():
    assert HarmonicParams(6, Fraction(1, 2), False).advisories()
    assert not P11.advisories()
    with pytest.warns(UserWarning):
        from weilmaass.maassform import warn_advisories
        warn_advisories(HarmonicParams(6, Fraction(1, 2), False))


def test_params_json_round_trip():
    p = HarmonicParams(37, Fraction(-1, 2), False, "harmonic")
    assert HarmonicParams.from_json(json.loads(json.dumps(p.to_json()))) == p
    with pytest.raises(ValueError):
        HarmonicParams.from_json({"N": 3, "rep": "sigma"})


def test_principal_part_congruence():
    pp = PrincipalPart(P11, {(-5, 7): 1, (-5, 15): -1})
    assert pp.K == 5
    with pytest.raises(CongruenceError):
        PrincipalPart(P11, {(-5, 6): 1})
    with pytest.raises(CongruenceError):
        PrincipalPart(P11, {(3, 7): 1})
    with pytest.raises(ValueError):
        PrincipalPart(P11, {(-5, 7): 0})
    # zero-valued terms off the congruence are ignored
    assert (-5, 6) not in PrincipalPart(P11, {(-5, 7): 1, (-5, 6): 0}).terms


def test_principal_part_from_json_rationals(ctx30):
    pp = PrincipalPart.from_json(P11, [{"n": -5, "h": 7, "re": "1/3", "im": "0"}], ctx30)
    with ctx30:
        assert to_float(abs(pp.get(-5, 7) - arb(1) / 3)) < 1e-29


def test_index_set():
    idx = build_index_set(P11, 2)
    for n, h in idx:
        assert P11.admissible(n, h) and 0 < abs(n) <= 88
    assert len(idx) == len(set(idx.indices))
    hol = build_index_set(HarmonicParams(1, Fraction(1, 2), False, "holomorphic"), 3)
    assert all(n > 0 for n, _ in hol)
    assert sorted(hol.indices) == sorted([(1, 1), (4, 0), (5, 1), (8, 0), (9, 1), (12, 0)])


def test_delta_labels():
    assert delta_to_index(P11, -7) == (7, 9)
    assert delta_to_index(P11, 1) == (-1, 1)
    assert index_to_delta(P11, 7, 9) == -7
    p37 = HarmonicParams(37, Fraction(1, 2), False)
    assert delta_to_index(p37, -3) == (-3, 21)
    assert delta_index_map(p37, (-3, 21), "to_delta") == -3
    with pytest.raises(ValueError):
        delta_to_index(P11, 2)
    with pytest.raises(CongruenceError):
        index_to_delta(P11, 7, 8)


def _small_table(ctx):
    pp = PrincipalPart(P11, {(-5, 7): 1, (-5, 15): -1})
    t = CoefficientTable(P11, pp, ctx)
    with ctx:
        t.set(7, 9, arb(1) / 3, arb("1e-20"), 1)
        t.set(-1, 1, acb(arb(2).sqrt(), "-0.5"), arb("1e-20"), 1)
        t.set(7, 13, arb.pi(), arb("1e-12"), 2)
    return t


def test_table_json_round_trip_bit_identical(ctx30):
    t = _small_table(ctx30)
    t2 = CoefficientTable.from_json(json.loads(json.dumps(t.to_json())))
    assert t2.params == t.params and t2.ctx == t.ctx
    assert t2.principal.terms == t.principal.terms
    for key, e in t.entries.items():
        e2 = t2.entries[key]
        assert e2.value == e.value and e2.err_bound == e.err_bound and e2.phase == e.phase


def test_table_rejects_bad_entries(ctx30):
    t = _small_table(ctx30)
    with pytest.raises(CongruenceError):
        t.set(7, 8, 1, "1e-3", 1)
    with pytest.raises(ValueError):
        t.set(7, 9, 1, 0, 1)
    with pytest.raises(ValueError):
        t.set(7, 9, 1, "1e-3", 3)


def test_evaluate_truncated_is_two_n_vector(ctx30):
    t = _small_table(ctx30)
    vals = evaluate_truncated(t, acb("0.1", "1.2"))
    assert len(vals) == 22
    assert vals[0] == 0


def test_pairing(ctx30):
    pp = PrincipalPart(P11, {(-5, 7): 1, (-5, 15): -1})
    with ctx30:
        v = pairing(pp, {(5, 7): acb(3), (5, 15): acb(1)})
    assert v == acb(2)
    with pytest.raises(KeyError):
        pairing(pp, {(5, 7): acb(3)})
