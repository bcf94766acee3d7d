from fractions import Fraction
from itertools import combinations
from math import comb

import pytest

from kwbound.boolfunc import maj
from kwbound.bounds import InvalidGroupSpec, integral_bound, lp_bound, strengthened_bound
from kwbound.builders import (TangencyScheme, brec_bound, brec_scheme, build_brec, build_urec,
                              cert_brec2, cert_maj, cert_maj3, maj_bound, maj_epsilon,
                              maj_scheme, urec_bound, urec_scheme)
from kwbound.certificates import (CliqueSpec, DualCertificate, RankSpec, check_rank,
                                  validate_clique, verify_certificate)
from kwbound.commmatrix import (brec2_submatrix, build_matrix, fig1_matrix, maj_matrix,
                                singleton_cells)
from kwbound.rects import Rect, enumerate_all_mono_rects, rect_closure_check, rects_intersect
from kwbound.report import family_groups, report
from kwbound.search import min_disjoint_cover


# -- lp_bound / strengthened_bound --------------------------------------------

def test_lp_fig1():
    res = lp_bound(fig1_matrix())
    assert res.final and res.value == Fraction(9, 2)


def test_lp_one_by_one():
    m = build_matrix(maj(3), "general", (["110"], ["100"]))
    assert lp_bound(m).value == 1


@pytest.mark.slow
def test_lp_maj5_beats_khrapchenko():
    res = lp_bound(maj_matrix(2))
    assert res.final and res.value >= 9


def test_lp_certificate_is_dual_feasible():
    res = lp_bound(fig1_matrix())
    v = verify_certificate(res.certificate.matrix, res.certificate)
    assert v.feasible and v.objective == res.lower


def test_lp_time_budget_gives_proven_interval():
    m = maj_matrix(2)
    res = lp_bound(m, time_budget=0)
    assert res.lower <= Fraction(55, 6) <= res.upper
    v = verify_certificate(m, res.certificate)
    assert v.feasible and v.objective == res.lower


def test_strengthened_fig1_clique():
    cliques, ranks = family_groups("maj", 1)
    assert len(cliques) == 1 and len(cliques[0].pairs) == 3
    res = strengthened_bound(fig1_matrix(), cliques, ranks)
    assert res.final and res.value == 5


def test_strengthened_without_groups_is_lp():
    m = fig1_matrix("monotone")
    assert strengthened_bound(m).value == lp_bound(m).value


def test_strengthened_brec2_reaches_twenty():
    m = brec2_submatrix()[0]
    cliques, ranks = family_groups("brec", 2)
    assert len(cliques) == 12 and len(ranks) == 1
    res = strengthened_bound(m, cliques, ranks)
    assert res.lower >= 20


def test_strengthened_rejects_bad_clique():
    m = fig1_matrix()
    sing = dict(singleton_cells(m))
    by = {}
    for s, i in sing.items():
        by.setdefault(i, []).append(s)
    bad = CliqueSpec(((by[1][0], by[2][0]),))  # different indices
    with pytest.raises(InvalidGroupSpec):
        strengthened_bound(m, [bad])


def test_adding_cliques_never_lowers_value():
    m = fig1_matrix()
    (clique,), _ = family_groups("maj", 1)
    base = lp_bound(m).value
    for k in range(1, 4):
        sub = CliqueSpec(clique.pairs[:k])
        assert strengthened_bound(m, [sub]).value >= base


def test_integral_bound_is_ceiling():
    assert integral_bound(Fraction(9, 2)) == 5
    assert integral_bound(Fraction(5)) == 5
    assert integral_bound(Fraction(74, 9)) == 9


# -- verify_certificate --------------------------------------------------------

def test_verify_cert_maj3():
    cert = cert_maj3()
    v = verify_certificate(cert.matrix, cert)
    assert v.feasible and v.objective == 5 and v.declared_matches


def test_verify_all_zero():
    v = verify_certificate(fig1_matrix(), DualCertificate(fig1_matrix()))
    assert v.feasible and v.objective == 0


def test_verify_overweight_singleton():
    m = fig1_matrix()
    s, i = singleton_cells(m)[0]
    r, c = m.locate(s)
    v = verify_certificate(m, DualCertificate(m, {s: Fraction(2)}, objective=Fraction(2)))
    assert v.feasible is False
    assert [(rect, val) for rect, val in v.violations] == [(Rect.of(i, [r], [c]), 2)]


def test_verify_reports_bad_clique():
    m = fig1_matrix()
    s = [x for x, _ in singleton_cells(m)]
    v = verify_certificate(m, DualCertificate(m, {}, [CliqueSpec(((s[0], s[0]),))]))
    assert v.feasible is False and v.problems


def test_certificate_json_roundtrip():
    cert = cert_brec2()
    again = DualCertificate.from_json(cert.to_json())
    assert again.to_json() == cert.to_json()
    named = DualCertificate.from_json(cert.to_json(inline_matrix=False), cert.matrix)
    assert named.computed_objective() == 20


# -- cert_maj3 / cert_maj ------------------------------------------------------

def test_cert_maj3_shape():
    cert = cert_maj3()
    assert sorted(cert.weights.values()) == [1] * 6
    assert cert.objective == 5 == cert.computed_objective()
    (q,) = cert.cliques
    assert q.z == -1 and len(q.pairs) == 3
    assert not validate_clique(cert.matrix, q)


def test_maj_epsilon_and_objective():
    assert maj_epsilon(2) == Fraction(1, 5)
    assert maj_bound(2) == Fraction(45, 4)
    assert maj_bound(3) == Fraction(560, 29)
    assert maj_scheme(3).kstar == Fraction(29, 4)


def test_cert_maj2_structure_and_verifies():
    l = 2
    cert = cert_maj(l)
    m = cert.matrix
    assert m.shape == (10, 10)
    assert len(cert.cliques) == l * l * (l + 1) * comb(2 * l + 1, l) // 6 == 20
    assert len(cert.cliques) == comb(2 * l + 1, 3) * comb(2 * l - 2, l - 1)
    scheme = maj_scheme(l)
    assert all(q.z == scheme.c for q in cert.cliques)
    assert all(not validate_clique(m, q) for q in cert.cliques)
    assert cert.computed_objective() == Fraction(45, 4)
    v = verify_certificate(m, cert)
    assert v.feasible and v.objective == Fraction(45, 4)
    assert integral_bound(v.objective) == 12 > (l + 1) ** 2


def test_cert_maj3_l3_declared():
    cert = cert_maj(3)
    assert cert.matrix.shape == (35, 35)
    assert cert.computed_objective() == cert.objective == Fraction(560, 29)


def test_cert_maj_range():
    with pytest.raises(ValueError):
        cert_maj(4)


# -- cert_brec2 ----------------------------------------------------------------

def test_cert_brec2_groups():
    cert = cert_brec2()
    m = cert.matrix
    assert len(cert.weights) == 36 and set(cert.weights.values()) == {1}
    assert len(cert.cliques) == 12 and all(len(q.pairs) == 3 for q in cert.cliques)
    assert all(q.z == -1 and not validate_clique(m, q) for q in cert.cliques)
    (g,) = cert.ranks
    assert len(g.pairs) == 18 and g.alpha == 4 and g.z == -1
    assert sorted(g.witness) == [9, 17, 25, 33, 41, 49, 57, 65, 73]
    rc = check_rank(m, g)
    assert not rc.problems and rc.matching_bound == 4
    assert cert.computed_objective() == 36 - 12 - 4 == 20


def test_brec2_witness_geometry():
    m = brec2_submatrix()[0]
    span = rect_closure_check(m, (5, 45))
    corners = sorted(m.serial(r, c) for r, c in span.cells())
    assert corners == [5, 9, 41, 45]
    assert {9, 41} <= set(cert_brec2().ranks[0].witness)


def test_clique_pairs_share_row_and_col():
    # re-derived for every built clique, never trusted
    for cert in (cert_maj3(), cert_maj(2), cert_brec2()):
        m = cert.matrix
        for q in cert.cliques:
            spans = [rect_closure_check(m, p) for p in q.pairs]
            assert all(rects_intersect(a, b) for a, b in combinations(spans, 2))


# -- tangency schemes ----------------------------------------------------------

@pytest.mark.parametrize("h", [1, 2, 3, 4])
def test_printed_scheme_weights(h):
    u = urec_scheme(h)
    assert u.a == Fraction(24 * 2 ** h - 16, 9 * 4 ** h)
    assert u.b == Fraction(-16, 9 * 4 ** h)
    b = brec_scheme(h)
    assert b.a == Fraction(2 * 6 ** h - 4 ** h, 9 ** h)
    assert b.b == Fraction(-(4 ** h), 9 ** h)


def test_tangency_identity():
    for kstar in (Fraction(3, 2), Fraction(29, 4), Fraction(9, 4), Fraction(17, 3)):
        s = TangencyScheme(kstar)
        # 1 - value(k) = ((k - kstar) / kstar)^2
        for k in range(0, 40):
            assert 1 - s.value(k) == ((k - kstar) / kstar) ** 2
        assert s.value(kstar) == 1


def test_brec_h1_degenerates_to_four():
    s = brec_scheme(1)
    assert s.a == Fraction(8, 9) and s.b == Fraction(-4, 9)
    assert 6 * s.a + 3 * s.b == 4 == brec_bound(1) - Fraction(13, 36) * Fraction(8, 3)


def test_declared_values():
    assert urec_bound(2) == Fraction(74, 9)
    assert urec_bound(3) == Fraction(109, 9)
    assert brec_bound(2) == Fraction(1504, 81)


# -- recursive builders ----------------------------------------------------------

def test_build_urec2_certifies_74_9():
    built = build_urec(2)
    assert built.declared == Fraction(74, 9)
    assert built.value >= Fraction(74, 9)
    if not built.accepted:
        assert built.fallback is not None and built.fallback.final


def test_build_urec2_monotone_scheme_verifies():
    built = build_urec(2, "monotone")
    assert built.accepted and built.value == Fraction(74, 9)


def test_build_brec2_verifies():
    built = build_brec(2)
    assert built.value >= Fraction(1504, 81) > 16


@pytest.mark.parametrize("builder", [build_urec, build_brec])
def test_builder_range(builder):
    with pytest.raises(ValueError):
        builder(4)


# -- weak duality and restriction soundness ---------------------------------------

def test_certificates_below_strengthened_optimum():
    for cert in (cert_maj3(), cert_brec2()):
        cliques = [CliqueSpec(q.pairs) for q in cert.cliques]
        ranks = [RankSpec(g.pairs, g.alpha, g.witness) for g in cert.ranks]
        assert verify_certificate(cert.matrix, cert).feasible
        assert cert.computed_objective() <= strengthened_bound(cert.matrix, cliques,
                                                               ranks).lower


def test_restriction_soundness_fig1():
    cert = cert_maj3()
    m = cert.matrix
    cover = min_disjoint_cover(m, enumerate_all_mono_rects(m)).count
    assert cert.computed_objective() <= cover


# -- report ----------------------------------------------------------------------

def test_report_maj1_all():
    reps = {r.method: r for r in report("maj", 1, ["all"])}
    assert reps["lp"].value == Fraction(9, 2)
    for method in ("lp+clique", "cover", "certificate", "brute", "upper-formula"):
        assert reps[method].value == 5, method
    assert reps["lp"].integral == 5


def test_report_urec2_certificate_and_upper():
    cert, upper = report("urec", 2, ["certificate", "upper-formula"])
    assert cert.value >= Fraction(74, 9) and cert.integral == 9
    assert upper.value == 9


def test_report_brec2_certificate():
    (rep,) = report("brec", 2, ["certificate"])
    assert rep.value == 20 and rep.status == "verified" and rep.integral == 20


def test_report_unknown_method():
    with pytest.raises(ValueError):
        report("maj", 1, ["magic"])
