"""Acceptance criteria 1-8, each checked at its stated value and time limit.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion.
"""

import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from kwbound.boolfunc import (brute_force_formula_size, formula_size, formula_to_function, maj,
                              urec_formula, urec_maj)
from kwbound.bounds import integral_bound, lp_bound, strengthened_bound
from kwbound.builders import build_brec, build_urec, cert_brec2, cert_maj, cert_maj3
from kwbound.certificates import CliqueSpec, validate_clique, verify_certificate
from kwbound.commmatrix import brec2_submatrix, build_matrix, fig1_matrix
from kwbound.rects import enumerate_all_mono_rects, rect_closure_check
from kwbound.report import FULL_LP_SECONDS, full_matrix
from kwbound.search import min_disjoint_cover

TESTS = Path(__file__).parent


class Clock:
    def __init__(self):
        self.start = time.perf_counter()

    @property
    def seconds(self) -> float:
        return time.perf_counter() - self.start


@pytest.mark.criterion(1)
def test_criterion_1_maj3_lp(criterion):
    clock = Clock()
    m = build_matrix(maj(3), "general", "terms")
    res = lp_bound(m)
    criterion.append(f"LP {res.lower} in {clock.seconds:.2f}s")
    assert res.final and res.value == Fraction(9, 2)
    assert clock.seconds < 1


@pytest.mark.criterion(2)
def test_criterion_2_maj3_five(criterion):
    clock = Clock()
    cert = cert_maj3()
    v = verify_certificate(cert.matrix, cert)
    assert v.feasible and v.objective == 5
    strong = strengthened_bound(cert.matrix, [CliqueSpec(q.pairs) for q in cert.cliques])
    assert strong.lower >= 5
    m = fig1_matrix()
    cover = min_disjoint_cover(m, enumerate_all_mono_rects(m)).count
    assert cover == 5
    general = brute_force_formula_size(maj(3)).size
    monotone = brute_force_formula_size(maj(3), monotone_only=True).size
    criterion.append(f"cert {v.objective}, strengthened {strong.lower}, cover {cover}, "
                     f"brute {general}/{monotone} in {clock.seconds:.2f}s")
    assert general == monotone == 5
    assert clock.seconds < 10


@pytest.mark.slow
@pytest.mark.criterion(3)
def test_criterion_3_maj_closed_form(criterion):
    clock = Clock()
    c2 = cert_maj(2)
    assert c2.matrix.shape == (10, 10)
    v2 = verify_certificate(c2.matrix, c2)
    assert v2.feasible and v2.objective == Fraction(45, 4)
    assert integral_bound(v2.objective) == 12 > 9
    c3 = cert_maj(3)
    assert c3.matrix.shape == (35, 35)
    v3 = verify_certificate(c3.matrix, c3)
    criterion.append(f"MAJ5 {v2.objective}, MAJ7 {v3.objective} in {clock.seconds:.1f}s")
    assert v3.feasible and v3.objective == Fraction(560, 29)
    assert clock.seconds < 300


def _formula_exhaustive(h: int) -> int:
    phi = urec_formula(h)
    assert formula_to_function(phi, 2 * h + 1) == urec_maj(h)
    return formula_size(phi)


@pytest.mark.slow
@pytest.mark.criterion(4)
def test_criterion_4_urec(criterion):
    clock = Clock()
    b2 = build_urec(2)
    size2 = _formula_exhaustive(2)
    t2 = clock.seconds
    criterion.append(f"h=2 {'scheme' if b2.accepted else 'fallback'} {b2.value}, "
                     f"formula {size2}, {t2:.1f}s")
    assert b2.value >= Fraction(74, 9) and integral_bound(b2.value) == 9 == size2
    assert t2 < 300
    clock = Clock()
    b3 = build_urec(3)
    size3 = _formula_exhaustive(3)
    t3 = clock.seconds
    state = "scheme" if b3.accepted else (
        "fallback" if b3.fallback is not None and b3.fallback.final else "interval")
    criterion.append(f"h=3 {state} {b3.value}, formula {size3}, {t3:.1f}s")
    if b3.value < Fraction(109, 9):
        mono = build_urec(3, "monotone")
        criterion.append(f"monotone cells: {'scheme' if mono.accepted else 'solver'} "
                         f"{mono.value}")
    assert b3.value >= Fraction(109, 9) and integral_bound(b3.value) == 13 == size3
    assert t3 < 1800


@pytest.mark.criterion(5)
def test_criterion_5_brec2_twenty(criterion):
    clock = Clock()
    cert = cert_brec2()
    m = cert.matrix
    assert len(cert.cliques) == 12
    assert all(not validate_clique(m, q) for q in cert.cliques)
    (rank,) = cert.ranks
    witness = set(rank.witness)
    assert witness == {9, 17, 25, 33, 41, 49, 57, 65, 73}
    for a, b in rank.pairs:
        span = rect_closure_check(m, (a, b))
        assert sum(m.serial(r, c) in witness for r, c in span.cells()) >= 2
    assert rank.alpha == len(witness) // 2 == 4
    v = verify_certificate(m, cert)
    criterion.append(f"objective {v.objective} in {clock.seconds:.1f}s")
    assert v.feasible and not v.problems and v.objective == 20
    assert clock.seconds < 120


@pytest.mark.slow
@pytest.mark.criterion(6)
def test_criterion_6_brec2_lp_gap(criterion):
    clock = Clock()
    sub = lp_bound(brec2_submatrix()[0])
    assert sub.final
    criterion.append(f"9x9 LP {sub.value}")
    assert sub.value < 20 and sub.value <= Fraction(33, 2)
    full = lp_bound(full_matrix("brec", 2), time_budget=FULL_LP_SECONDS)
    if full.final:
        criterion.append(f"27x27 LP {full.value}")
    else:
        criterion.append(f"27x27 LP in [{float(full.lower):.4f}, {float(full.upper):.4f}] "
                         f"after the {FULL_LP_SECONDS}s budget")
    criterion.append(f"{clock.seconds:.1f}s")
    assert clock.seconds < 1800


@pytest.mark.slow
@pytest.mark.criterion(7)
def test_criterion_7_brec_scheme(criterion):
    clock = Clock()
    built = build_brec(2)
    state = "scheme" if built.accepted else "fallback"
    criterion.append(f"{state} {built.value} in {clock.seconds:.1f}s")
    assert built.value >= Fraction(1504, 81) > 16
    assert clock.seconds < 1800


@pytest.mark.slow
@pytest.mark.criterion(8)
def test_criterion_8_properties(criterion):
    clock = Clock()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           str(TESTS / "test_properties.py")],
                          capture_output=True, text=True, cwd=TESTS.parent)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr
    criterion.append(f"{tail} ({clock.seconds:.1f}s)")
    assert proc.returncode == 0
    assert clock.seconds < 600
