"""The thirteen acceptance criteria, one check each.

Run under pytest (a summary line per criterion is printed at the end of the
session) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import sympy

from artifact import oracle, so3nat
from artifact.cli import so3_closure_audit
from artifact.exact import SurdScalar, fmt_rational
from artifact.lattice import enumerate_coefficients, integral_lattice, iter_short_vector_chunks
from artifact.rootsys import build_root_system, root_datum, rho_pairing, two_rho
from artifact.symspec import (
    MetricSpec,
    component_length_sum,
    degsing,
    enumerate_spectrum,
    f_mod4,
    group_factor,
    maximal_rank_factor,
    morse_index,
    product_space,
    recover_rank,
    smallest_regular_len2,
    wave_analysis,
)

GOLDEN = Path(__file__).parent / "data" / "appendix_golden.json"

RESULTS: dict[int, tuple[bool, str]] = {}


def _split_name(name: str) -> tuple[str, int | None]:
    if name[0] in "EFG":
        return name, None
    label = name.rstrip("0123456789")
    return label, int(name[len(label):])


# -- 1 ------------------------------------------------------------------------------

def criterion_1():
    start = time.perf_counter()
    golden = json.loads(GOLDEN.read_text())
    mismatches = []
    for name, expected in golden.items():
        data = root_datum(build_root_system(*_split_name(name)))
        got = {"root_count": data["root_count"], "two_rho": data["two_rho"], "center": data["center"],
               "simples": sorted(data["simples"]) if expected["simples"] is not None else None}
        for key in expected:
            if json.dumps(expected[key], sort_keys=True) != json.dumps(got[key], sort_keys=True):
                mismatches.append(f"{name}.{key}")
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 10
    return ok, f"{len(golden)} systems, mismatches={mismatches or 'none'}, {elapsed:.1f}s"


# -- 2 ------------------------------------------------------------------------------

def criterion_2():
    bad = []
    golden = json.loads(GOLDEN.read_text())
    for name in golden:
        rs = build_root_system(*_split_name(name))
        for i in rs.simples:
            value = rho_pairing(rs, rs.roots[i].coroot)
            if value != 1:
                bad.append(f"{name}:{fmt_rational(value)}")
    return not bad, f"rho(simple coroot) != 1 for {bad or 'none'}"


# -- 3 ------------------------------------------------------------------------------

def f_lemma_rows():
    rows = []
    for n in range(1, 6):
        for k in range(1, n + 2):
            if (n + 1) % k == 0:
                rows.append(("A", n, () if k == n + 1 else (f"{k}L1",)))
    for n in (2, 3, 4):
        rows += [("B", n, ()), ("B", n, ("e1",))]
    for n in (3, 4, 5, 6):
        rows += [("C", n, ()), ("C", n, ("F",))]
    for n in (4, 5, 6, 7):
        if n % 2:
            rows += [("D", n, g) for g in ((), ("2F",), ("F",))]
        else:
            rows += [("D", n, g) for g in ((), ("e1",), ("F",), ("e1+F",), ("full",))]
    rows += [("E7", None, ()), ("E7", None, ("F",))]
    return rows


def f_lemma_violations(label, rank, gamma, bound=40) -> tuple[int, int]:
    """Brute-force the congruence on every integral-lattice vector up to ``bound``."""
    factor = group_factor(label, rank)
    rs = factor.rs
    lat = integral_lattice(label, rank, gamma)
    basis = [list(b) for b in lat.basis]
    gram = [[sum(a * b for a, b in zip(u, w)) for w in basis] for u in basis]
    den = 1
    for row in gram:
        for x in row:
            den = math.lcm(den, x.denominator)
    gram_int = np.array([[int(x * den) for x in row] for row in gram], dtype=np.int64)
    # weighted plain root sum = mult * <2 rho, v> = 2 <2 rho, B^T x>
    rho_coeffs = [2 * sum(a * b for a, b in zip(two_rho(rs), u)) for u in basis]
    rden = 1
    for x in rho_coeffs:
        rden = math.lcm(rden, x.denominator)
    rho_int = np.array([int(x * rden) for x in rho_coeffs], dtype=np.int64)
    f_cache: dict[int, int] = {}
    checked = violations = 0
    for chunk in iter_short_vector_chunks(gram, bound):
        xs = np.asarray(chunk, dtype=np.int64)
        norms = np.einsum("ij,jk,ik->i", xs, gram_int, xs)
        sums = xs @ rho_int
        if np.any(sums % rden):
            violations += int(np.sum(sums % rden != 0))
        sums //= rden
        values, inverse = np.unique(norms, return_inverse=True)
        for norm in values.tolist():
            if norm not in f_cache:
                f_cache[norm] = f_mod4(factor, gamma, 1, Fraction(norm, den))
        expected = np.array([f_cache[norm] for norm in values.tolist()], dtype=np.int64)[inverse]
        violations += int(np.sum((sums - expected) % 4 != 0))
        checked += len(xs)
    return checked, violations


def criterion_3():
    start = time.perf_counter()
    total = bad = 0
    failing = []
    for label, rank, gamma in f_lemma_rows():
        checked, violations = f_lemma_violations(label, rank, gamma)
        total += checked
        bad += violations
        if violations:
            failing.append(f"{label}{rank or ''}{list(gamma)}")
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 60
    return ok, f"{len(f_lemma_rows())} rows, {total} vectors, {bad} violations {failing or ''}, {elapsed:.1f}s"


# -- 4 ------------------------------------------------------------------------------

def criterion_4():
    space = product_space(group_factor("A", 1), group_factor("A", 1, ["L1"]))
    metric = MetricSpec([], ["1/4", 1])
    report = enumerate_spectrum(space, metric, Fraction(5, 2))
    classes = report.classes.get(Fraction(5, 2), ())
    dims = sorted(c.dim_fix for c in classes)
    residues = sorted(c.morse_mod4 for c in classes)
    wave = {t.len2: t for t in wave_analysis(report)}[Fraction(5, 2)]
    ok = (len(classes) == 2 and dims == [10, 10] and (residues[1] - residues[0]) % 4 == 2
          and not wave.certified_nonzero)
    return ok, f"classes={len(classes)} dim_fix={dims} residues={residues} certified={wave.certified_nonzero}"


# -- 5 ------------------------------------------------------------------------------

def criterion_5():
    notes, ok = [], True
    for n in (2, 3):
        space = product_space(maximal_rank_factor("B", n))
        factor = space.factors[0]
        v = tuple(Fraction(x) for x in (7, 6) + (0,) * (n - 2))
        w = tuple(Fraction(x) for x in (9, 2) + (0,) * (n - 2))
        sv, sw = component_length_sum(factor, v) % 4, component_length_sum(factor, w) % 4
        want = 3 if n % 2 == 0 else 1
        dv, dw = degsing(space, ((), v)), degsing(space, ((), w))
        mv, mw = morse_index(space, ((), v)), morse_index(space, ((), w))
        good = (sum(x * x for x in v) == 85 == sum(x * x for x in w) and sv == want
                and sw == (want + 2) % 4 and dv == dw == (n - 2) ** 2 and (mv - mw) % 4 == 2)
        ok &= good
        notes.append(f"B{n}: sums {sv},{sw} degsing {dv},{dw} morse {mv},{mw}")
    return ok, "; ".join(notes)


# -- 6 ------------------------------------------------------------------------------

def _standard(space):
    return MetricSpec.standard(space)


def criterion_6():
    start = time.perf_counter()
    spaces = {
        "SU(3)": product_space(group_factor("A", 2)),
        "Spin(5)": product_space(group_factor("B", 2)),
        "G2": product_space(group_factor("G2")),
        "Sp(3)": product_space(group_factor("C", 3)),
        "SU(2)xSU(2)": product_space(group_factor("A", 1), group_factor("A", 1)),
    }
    notes, ok = [], True
    for name, space in spaces.items():
        bound = Fraction(4)
        report = enumerate_spectrum(space, _standard(space), bound)
        while report.class_count < 50:
            bound *= 2
            report = enumerate_spectrum(space, _standard(space), bound)
        buckets: dict = {}
        for c in report.all_classes():
            buckets.setdefault((c.len2, c.dim_fix), set()).add(c.morse_mod4)
        mixed = [k for k, v in buckets.items() if len(v) > 1]
        ok &= not mixed
        notes.append(f"{name}: {report.class_count} classes, {len(mixed)} mixed")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    return ok, "; ".join(notes) + f"; {elapsed:.1f}s"


# -- 7 ------------------------------------------------------------------------------

def criterion_7():
    spaces = {
        "SU(2)": product_space(group_factor("A", 1)),
        "SO(3)": product_space(group_factor("A", 1, ["L1"])),
        "SU(3)": product_space(group_factor("A", 2)),
        "SU(4)/Z2": product_space(group_factor("A", 3, ["2L1"])),
        "SU(2)xSU(2)": product_space(group_factor("A", 1), group_factor("A", 1)),
        "Spin(5)": product_space(group_factor("B", 2)),
    }
    notes, ok = [], True
    for name, space in spaces.items():
        metric = _standard(space)
        bound = smallest_regular_len2(space, metric)
        rank = recover_rank(enumerate_spectrum(space, metric, bound), space.dimension)
        ok &= rank == space.rank
        notes.append(f"{name}={rank}")
    return ok, " ".join(notes)


# -- 8 ------------------------------------------------------------------------------

def _oracle_unclean_coeffs(alpha: Fraction, A: Fraction, bound: Fraction) -> list[Fraction]:
    """Type II periods ``n^2 A`` whose rotation angle ``n A / (2 alpha)`` is a whole turn."""
    out, n = [], 1
    while n * n * A <= bound:
        if (n * A / (2 * alpha)).denominator == 1:
            out.append(n * n * A)
        n += 1
    return out


RATIONAL_RATIOS = [Fraction(2), Fraction(1, 3), Fraction(2, 5), Fraction(1, 2), Fraction(2, 3),
                   Fraction(3), Fraction(3, 2), Fraction(5, 4), Fraction(4, 5), Fraction(7, 3),
                   Fraction(10), Fraction(1, 10), Fraction(6, 7), Fraction(9, 4), Fraction(5),
                   Fraction(1, 6), Fraction(8, 3), Fraction(11, 5), Fraction(3, 8), Fraction(13, 2)]
SURD_RATIOS = ["sqrt(2)", "sqrt(3)", "1+sqrt(5)", "3/2*sqrt(2)", "2-sqrt(3)"]


def criterion_8():
    bad = []
    bound = Fraction(400)
    for alpha in (Fraction(1), Fraction(3, 2)):
        for ratio in RATIONAL_RATIOS:
            A = alpha * ratio
            verdict = so3nat.classify_cleanliness(so3nat.SO3Metric(alpha, A))
            got = [x.as_fraction() for x in verdict.unclean_period_coeffs(bound)]
            want = _oracle_unclean_coeffs(alpha, A, bound)
            j, k = verdict.j, verdict.k
            if verdict.clean or Fraction(2 * j, k) != ratio or math.gcd(j, k) != 1 or got != want:
                bad.append(str(ratio))
    for text in SURD_RATIOS:
        if not so3nat.classify_cleanliness(so3nat.SO3Metric(1, SurdScalar.of(text))).clean:
            bad.append(text)
    return not bad, f"{len(RATIONAL_RATIOS)} rational x 2 alphas, {len(SURD_RATIOS)} surd; bad={bad or 'none'}"


# -- 9 ------------------------------------------------------------------------------

def criterion_9():
    notes, ok = [], True
    for alpha, A in ((1, 1), (1, "1/2"), (1, 10), (2, 3)):
        audit = so3_closure_audit(so3nat.SO3Metric(alpha, SurdScalar.of(A)), 20, random.Random(7))
        good = audit["max_period_residual"] < 1e-9 and audit["min_midpoint_residual"] > 1e-3
        ok &= good
        notes.append(f"({alpha},{A}): {len(audit['periods'])} closures max {audit['max_period_residual']:.1e}, "
                     f"gaps min {audit['min_midpoint_residual']:.1e}")
    return ok, "; ".join(notes)


# -- 10 -----------------------------------------------------------------------------

def criterion_10():
    metric = so3nat.SO3Metric(1, Fraction(2, 3))
    v = so3nat.type2_velocity(metric)
    inertia = (1.0, 2 / 3)
    predicted = max(c.dim for c in so3nat.fix_components(metric, Fraction(2, 3))) + 1
    first = oracle.monodromy_fixed_dim(inertia, v, math.sqrt(2 / 3) * oracle.ELL0)
    unclean = oracle.monodromy_fixed_dim(inertia, v, math.sqrt(6) * oracle.ELL0)
    ok = first == predicted and unclean >= predicted + 2
    return ok, f"prediction {predicted}, r=A -> {first}, r=9A -> {unclean}"


# -- 11 -----------------------------------------------------------------------------

TYPE3_CASES = [(1, "1/2", 1, 2), (1, "1/2", 2, 3), (1, 2, 3, 7), (1, 10, 1, 2)]


def type3_counts(alpha, A, p, q) -> tuple[int, int, bool]:
    metric = so3nat.SO3Metric(alpha, SurdScalar.of(A))
    exact_count = so3nat.type3_morse_index(metric, p, q)
    length = math.sqrt(float(so3nat.type3_len2(metric, p, q))) * oracle.ELL0
    rep = oracle.conjugate_report((float(metric.alpha), float(metric.A)),
                                  so3nat.type3_velocity(metric, p, q), length)
    audited = not rep.tangencies and rep.parity_consistent
    return exact_count, rep.count, audited


def criterion_11():
    notes, ok = [], True
    for case in TYPE3_CASES:
        exact_count, numeric, audited = type3_counts(*case)
        ok &= exact_count == numeric and audited
        notes.append(f"{case}: exact {exact_count} numeric {numeric}")
    return ok, "; ".join(notes)


# -- 12 -----------------------------------------------------------------------------

def criterion_12():
    pi, sqrt = sympy.pi, sympy.sqrt
    ell0 = 2 * sqrt(2) * pi
    notes, ok = [], True
    round_ = so3nat.wave0_taumin(so3nat.SO3Metric(1, 1))
    target = -16 * sqrt(2) * pi
    rendered = round_.to_json()["value"]["float"]
    good = sympy.simplify(round_.value - target) == 0 and f"{rendered:.12g}" == f"{float(target):.12g}"
    ok &= good
    notes.append(f"round {rendered}")
    for alpha, A, case in ((1, Fraction(1, 2), "A<alpha"), (1, 2, "A>alpha"), (3, 2, "A<alpha"),
                           (2, Fraction(7, 2), "A>alpha")):
        w = so3nat.wave0_taumin(so3nat.SO3Metric(alpha, A), morse=0)
        a, b = sympy.Rational(alpha), sympy.Rational(A)
        vol = a * sqrt(b) * 16 * sqrt(2) * pi ** 2
        if case == "A<alpha":
            tau = sqrt(b) * ell0
            want = vol / (pi * tau)
        else:
            tau = sqrt(a) * ell0
            want = (2 * pi) ** sympy.Rational(-3, 2) * 2 * pi / sqrt(tau) * vol
        good = w.case == case and sympy.simplify(w.magnitude - want) == 0
        ok &= good
        notes.append(f"({alpha},{A}) {case} {'ok' if good else 'MISMATCH'}")
    return ok, "; ".join(notes)


# -- 13 -----------------------------------------------------------------------------

def random_form(rng: random.Random, dim: int) -> list[list[Fraction]]:
    while True:
        m = [[Fraction(rng.randint(-3, 3), rng.choice((1, 2, 3))) for _ in range(dim)] for _ in range(dim)]
        g = [[sum(m[k][i] * m[k][j] for k in range(dim)) + (Fraction(1, 2) if i == j else 0)
              for j in range(dim)] for i in range(dim)]
        if all(g[i][i] >= Fraction(1, 2) for i in range(dim)):
            return g


def criterion_13():
    rng = random.Random(20240601)
    notes, ok = [], True
    for trial in range(10):
        dim = rng.randint(2, 6)
        bound = Fraction(rng.randint(4, 30))
        gram = random_form(rng, dim)
        fast = sorted(tuple(int(a) for a in x) for x in enumerate_coefficients(gram, bound, dedup=False))
        brute = oracle.brute_enumerate(gram, bound)
        ok &= fast == brute
        notes.append(f"d{dim}/b{bound}:{len(brute)}")
    return ok, " ".join(notes)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 14)}


@pytest.mark.parametrize("number", list(CRITERIA))
def test_criterion(number):
    ok, detail = CRITERIA[number]()
    RESULTS[number] = (ok, detail)
    assert ok, f"criterion {number}: {detail}"


def summary_line(number: int) -> str:
    ok, detail = RESULTS[number]
    return f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def summary_lines() -> list[str]:
    return [summary_line(n) for n in sorted(RESULTS)]


if __name__ == "__main__":
    for number, check in CRITERIA.items():
        try:
            RESULTS[number] = check()
        except Exception as exc:  # report and keep going
            RESULTS[number] = (False, f"error: {exc!r}")
        print(summary_line(number), flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
