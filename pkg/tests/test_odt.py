import math

import pytest
from hypothesis import given, settings, strategies as st

from cmtorsion import odt
from cmtorsion.odt import Kind, NeverRealizableInOddDegree, TorsionGroup as G
from cmtorsion.numtheory import factorize
from oracles import transcribed_threshold


def orders(d):
    return [g.order() for g in odt.groups(d) if g.kind != Kind.Z2xZ2]


@pytest.mark.parametrize("ell,n,delta", [(3, 1, 0), (7, 2, 2), (3, 2, 1), (3, 3, 2), (11, 1, 0)])
def test_delta(ell, n, delta):
    assert odt.delta(ell, n) == delta


def test_delta_rejects():
    with pytest.raises(ValueError):
        odt.delta(5, 1)
    with pytest.raises(ValueError):
        odt.delta(7, 0)


@pytest.mark.parametrize("group,value", [
    (G.cyclic(11), 5), (G.two_cyclic(23), 33), (G.cyclic(3, 3), 9), (G.two_cyclic(3, 2), 9),
    (G.cyclic(3), 1), (G.two_cyclic(3), 1), (G(Kind.Z2xZ2), 1), (G.two_cyclic(7), 3),
])
def test_threshold_values(group, value, hcache):
    assert odt.threshold(group, hcache).value == value


def test_never_realizable(hcache):
    with pytest.raises(NeverRealizableInOddDegree):
        odt.threshold(G.cyclic(7), hcache)
    assert not odt.realizable(G.cyclic(7), 3**10, hcache)


def test_bad_groups():
    with pytest.raises(ValueError):
        G.cyclic(13)
    with pytest.raises(ValueError):
        G.cyclic(15)


def test_realizable_examples(hcache):
    assert odt.realizable(G.cyclic(19), 9, hcache)
    assert not odt.realizable(G.cyclic(19), 3, hcache)
    assert odt.realizable(G.two_cyclic(3), 1, hcache)
    with pytest.raises(odt.EvenDegreeError):
        odt.realizable(G.cyclic(3), 2, hcache)


def test_groups_examples(hcache):
    assert orders(1) == [1, 2, 3, 4, 6]
    assert orders(3) == [1, 2, 3, 4, 6, 9, 14]
    assert orders(81) == [1, 2, 3, 4, 6, 9, 14, 18, 19, 27, 38, 54, 81, 163]
    assert len(odt.groups(1)) == 6


def test_groups_rejects_even():
    with pytest.raises(odt.EvenDegreeError):
        odt.groups(4)


@pytest.mark.parametrize("d,t", [(1, 6), (9, 27), (21, 43)])
def test_t_cm(d, t, hcache):
    assert odt.t_cm(d, hcache) == t


def test_olson_and_equivalence(hcache):
    assert odt.is_olson(7, hcache)
    assert not odt.is_olson(3, hcache)
    assert odt.equivalent(25, 5, hcache)
    assert odt.equivalent(75, 15, hcache)
    assert not odt.equivalent(15, 5, hcache)
    assert odt.fingerprint(1, hcache) == ()


def test_generators(hcache):
    gens = odt.olson_generators(10**5, hcache)
    assert gens.values()[:15] == [2, 3, 5, 913, 1631, 1703, 2051, 2891, 3247, 3401, 3619,
                                  4067, 5327, 6251, 6617]
    assert gens.values()[37] == 32927
    assert odt.olson_generators(12, hcache).values() == [2, 3, 5]
    # witnesses are the primes, not their indices
    assert dict(gens.elements)[3] == (7,)
    vals = gens.values()
    assert not any(b % a == 0 for i, a in enumerate(vals) for b in vals[i + 1:])


def test_generators_need_cache():
    from cmtorsion.classnum import batch_class_numbers
    with pytest.raises(ValueError):
        odt.olson_generators(1000, batch_class_numbers(500))


@pytest.mark.parametrize("d,r", [(1, 1), (5, 2), (3, 2)])
def test_r_count(d, r, hcache):
    assert odt.r_count(d, hcache) == r


def test_r_count_brute(hcache):
    gvals = {hcache[e] * (e - 1) // 2 for e in hcache.ells() if e <= 4001}
    for d in range(1, 2001, 2):
        want = sum(1 for e in range(1, d + 1) if d % e == 0 and e in gvals)
        assert odt.r_count(d, hcache) == want


odd = st.integers(0, 5000).map(lambda k: 2 * k + 1)


@settings(max_examples=200, deadline=None)
@given(odd, st.integers(0, 30).map(lambda k: 2 * k + 1))
def test_monotone_under_multiples(d, k):
    small = set(odt.groups(d))
    assert small <= set(odt.groups(d * k))


@settings(max_examples=200, deadline=None)
@given(odd)
def test_structure(d):
    gs = odt.groups(d)
    assert set(odt.OLSON_GROUPS) <= set(gs)
    assert gs == sorted(gs)
    for g in gs:
        if g.kind == Kind.CYCLIC:
            assert g.ell % 8 == 3
        if g.kind == Kind.TWO_CYCLIC and g.ell % 8 == 3 and (g.ell, g.n) != (3, 1):
            base = odt.threshold(G.cyclic(g.ell, g.n)).value
            assert d % (3 * base) == 0
    top = max(gs, key=lambda g: g.order())
    assert d % odt.threshold(top).value == 0
    assert odt.class_representative(d) in [x for x in range(1, d + 1, 2) if d % x == 0]
    assert odt.equivalent(d, odt.class_representative(d))


@settings(max_examples=100, deadline=None)
@given(d=odd)
def test_threshold_matches_transcription(d, hcache):
    for g in odt.groups(d, hcache):
        if g.kind in (Kind.CYCLIC, Kind.TWO_CYCLIC):
            kind = "C" if g.kind == Kind.CYCLIC else "2C"
            want = transcribed_threshold(kind, g.ell, g.n, hcache.get(g.ell))
            assert odt.threshold(g, hcache).value == want


def test_group_count_cap_small(hcache):
    for d in range(1, 20001, 2):
        assert len(odt.groups(d, hcache)) <= odt.tau_cap(d)


def test_watkins_shortcut_agrees_with_class_number():
    # l = 2d + 1 = 3000047 is prime and past the Watkins range, so groups()
    # skips it without computing h; the actual h is far from 1
    from cmtorsion.classnum import class_number
    d = 1500023
    assert class_number(2 * d + 1) > 1
    assert odt.is_olson(d)


def test_group_labels():
    assert str(G(Kind.Z2xZ2)) == "Z/2⊕Z/2"
    assert str(G.two_cyclic(7)) == "Z/14"
    assert str(G(Kind.TRIVIAL)) == "Z/1"
