import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import oracle
from artifact.exact import SurdScalar
from artifact.so3nat import (
    Component,
    SO3Error,
    SO3Metric,
    certified_singular_support,
    classify_cleanliness,
    conjugate_frequency_squared,
    dg_volume,
    epsilon_set,
    fix_components,
    isolated_conjugate_time,
    length_spectrum,
    sigma,
    type3_conjugate_times,
    type3_len2,
    type3_morse_index,
    type3_velocity,
    wave0_taumin,
)

F = Fraction
HALF = SO3Metric(1, F(1, 2))


def brute_epsilon(r, alpha, A):
    """Scan a generous box of ``(p, q)`` and test every condition in exact arithmetic."""
    c = A / (alpha - A)
    target = r / alpha
    out = []
    for p in range(1, 60):
        for q in range(1, 60):
            if math.gcd(p, q) == 1 and F(q, p) > abs(c) and q * q + c * p * p == target:
                out.append((p, q))
    return sorted(out)


ratios = st.sampled_from([F(1, 2), F(1, 3), F(2, 3), F(3, 2), F(2), F(5, 2), F(10), F(1, 10)])


@settings(max_examples=40, deadline=None)
@given(ratios, st.integers(1, 8), st.integers(1, 8))
def test_epsilon_set_matches_box_scan(ratio, p, q):
    metric = SO3Metric(1, ratio)
    c = ratio / (1 - ratio)
    if math.gcd(p, q) != 1 or F(q, p) <= abs(c):
        return
    r = q * q + c * p * p
    assert epsilon_set(r, metric) == brute_epsilon(r, F(1), ratio)
    assert (p, q) in epsilon_set(r, metric)


@pytest.mark.parametrize("alpha, A, r, expected", [
    (1, F(1, 2), 5, [(1, 2)]),
    (1, 10, F(26, 9), [(1, 2)]),
    (1, F(1, 2), 4, []),
    (1, F(1, 2), 0, []),
])
def test_epsilon_set_examples(alpha, A, r, expected):
    assert epsilon_set(r, SO3Metric(alpha, A)) == expected


def test_epsilon_set_needs_distinct_parameters():
    with pytest.raises(SO3Error):
        epsilon_set(1, SO3Metric(1, 1))


def test_spectrum_table_for_half():
    table = [(p.len2_coeff, sorted(p.types_present)) for p in length_spectrum(HALF, 5)]
    assert table == [
        (SurdScalar(0), []), (SurdScalar(F(1, 2)), ["II"]), (SurdScalar(1), ["I"]),
        (SurdScalar(2), ["II"]), (SurdScalar(4), ["I"]), (SurdScalar(F(9, 2)), ["II"]),
        (SurdScalar(5), ["III"]),
    ]


@pytest.mark.parametrize("alpha, A", [(1, F(1, 2)), (1, 2), (1, "sqrt(2)"), (2, 3)])
def test_every_period_closes_under_the_flow(alpha, A):
    """Integrate the Euler equations independently and return to the identity."""
    metric = SO3Metric(alpha, A)
    inertia = oracle.Inertia.of(metric)
    seen = 0
    for period in length_spectrum(metric, metric.alpha * 16)[1:]:
        length = math.sqrt(float(period.len2_coeff)) * oracle.ELL0
        for comp in period.components:
            if comp.type != "III":
                continue
            state = oracle.euler_flow(inertia, type3_velocity(metric, *comp.pq), length)
            assert np.linalg.norm(state.attitude - np.eye(3)) < 1e-7
            seen += 1
    assert seen


def test_type3_does_not_close_early():
    inertia = oracle.Inertia.of(HALF)
    v = type3_velocity(HALF, 1, 2)
    length = math.sqrt(float(type3_len2(HALF, 1, 2))) * oracle.ELL0
    for frac in (0.25, 0.5, 0.75):
        state = oracle.euler_flow(inertia, v, frac * length)
        assert np.linalg.norm(state.attitude - np.eye(3)) > 1e-2


def test_type3_velocity_is_unit():
    v = type3_velocity(HALF, 1, 2)
    assert oracle.Inertia.of(HALF).norm2(v) == pytest.approx(1.0)


@pytest.mark.parametrize("alpha, A, p, q, value", [
    (1, F(1, 2), 2, 3, F(5, 4)),
    (1, F(1, 2), 1, 2, F(3)),
    (1, 2, 1, 3, F(5)),
])
def test_sigma(alpha, A, p, q, value):
    assert sigma(SO3Metric(alpha, A), p, q) == value


@pytest.mark.parametrize("p, q", [(1, 1), (2, 4), (0, 3)])
def test_type3_pair_validation(p, q):
    with pytest.raises(SO3Error):
        sigma(HALF, p, q)


def test_frequency_matches_sympy_closed_form():
    al, A = sympy.Integer(1), sympy.Rational(1, 2)
    s = sympy.Rational(5, 4)
    abar = A * al / (al - A)
    expected = A / (2 * al**2) + (s / (s + 1)) / (2 * (abar + al))
    assert conjugate_frequency_squared(HALF, 2, 3).to_sympy() == expected


def test_isolated_time_only_when_axis_heavier():
    assert isolated_conjugate_time(HALF, 1, 2) is None
    metric = SO3Metric(1, 2)
    s = sigma(metric, 1, 3)
    assert isolated_conjugate_time(metric, 1, 3) == SurdScalar(4) * (s + 1) / s


def test_conjugate_times_sorted_and_below_bound():
    metric = SO3Metric(1, 2)
    times = type3_conjugate_times(metric, 1, 3, type3_len2(metric, 1, 3, 2))
    values = [t.time for t in times]
    assert values == sorted(values)
    assert values[-1] < math.sqrt(float(type3_len2(metric, 1, 3, 2))) * oracle.ELL0
    assert {t.kind for t in times} == {"periodic", "isolated"}


@pytest.mark.parametrize("alpha, A, p, q, index", [
    (1, F(1, 2), 1, 2, 2), (1, F(1, 2), 2, 3, 3), (1, 2, 3, 7, 7), (1, 10, 1, 2, 4),
])
def test_type3_morse_index_from_formula(alpha, A, p, q, index):
    assert type3_morse_index(SO3Metric(alpha, A), p, q) == index


def test_morse_index_grows_with_iterates():
    indices = [type3_morse_index(HALF, 1, 2, m) for m in (1, 2, 3)]
    assert indices == sorted(indices) and indices[0] < indices[-1]


@pytest.mark.parametrize("A, clean, k", [
    (F(1, 2), False, 4), (2, False, 1), (F(2, 3), False, 3), ("sqrt(2)", True, None), (1, True, None),
])
def test_cleanliness(A, clean, k):
    verdict = classify_cleanliness(SO3Metric(1, A))
    assert verdict.clean is clean and verdict.k == k


def test_unclean_periods_are_type2_multiples():
    verdict = classify_cleanliness(SO3Metric(1, 2))
    assert verdict.unclean_period_coeffs(20) == [SurdScalar(2), SurdScalar(8), SurdScalar(18)]


def test_clean_metric_respects_exclusion_rule():
    metric = SO3Metric(1, "sqrt(2)")
    for period in length_spectrum(metric, 12):
        types = period.types_present
        assert not ({"I", "II"} <= types or {"I", "III"} <= types)


def test_round_metric_has_single_type():
    comps = fix_components(SO3Metric(1, 1), 4, morse="exact")
    assert [(c.type, c.dim, c.m, c.morse) for c in comps] == [("I", 5, 2, 2)]


def test_fix_components_rejects_non_period():
    with pytest.raises(SO3Error):
        fix_components(HALF, F(3, 4))


def test_dg_volume_type2():
    comp = Component("II", 3, 1, orbits=2)
    assert sympy.simplify(dg_volume(comp, HALF, F(1, 2)).expr - 8 * sympy.pi) == 0


def test_volume_closed_form():
    assert sympy.simplify(SO3Metric(1, 1).volume() - 16 * sympy.sqrt(2) * sympy.pi**2) == 0


def test_wave0_round():
    w = wave0_taumin(SO3Metric(1, 1))
    assert sympy.simplify(w.value + 16 * sympy.sqrt(2) * sympy.pi) == 0


def test_wave0_axis_lighter_magnitude():
    w = wave0_taumin(HALF, morse=0)
    assert sympy.simplify(w.magnitude - 8) == 0
    assert w.parity == "odd" and w.phase_exponent == 1


def test_wave0_axis_heavier_reports_branch():
    w = wave0_taumin(SO3Metric(1, 2), morse=0)
    assert w.parity == "even" and w.branch_note


def test_singular_support_split():
    support = certified_singular_support(HALF, 6)
    assert support.undetermined == [SurdScalar(5)]
    assert SurdScalar(F(1, 2)) in support.certified


@pytest.mark.parametrize("alpha, A", [(0, 1), (1, -2)])
def test_metric_must_be_positive(alpha, A):
    with pytest.raises(SO3Error):
        SO3Metric(alpha, A)


def test_metric_rejects_mixed_fields():
    with pytest.raises(ValueError):
        SO3Metric("sqrt(2)", "sqrt(3)")
