"""Closed geodesics, cleanliness and wave data of ``g(alpha, alpha, A)`` on SO(3).

The metric is ``alpha`` times the bi-invariant metric on the plane spanned by
``Theta_1, Theta_2`` and ``A`` times it on ``Theta_3``.  The bi-invariant metric
has curvature 1/8, so its unit one-parameter subgroups close after
``ELL0 = 2 sqrt(2) pi``.  Every squared length is stored as an exact
coefficient ``r`` with ``length**2 = r * ELL0**2``; ``alpha``, ``A`` and ``r``
live in Q or in one real quadratic field.

Geodesic families:

* Type I: one-parameter subgroups in the ``alpha`` plane, ``r = alpha m^2``.
* Type II: the subgroup along ``Theta_3``, ``r = A m^2``, seen from both
  orientations.
* Type III: products ``exp(tV) exp(-tW)`` indexed by coprime ``(p, q)`` with
  ``q/p > |A/(A - alpha)|`` and ``r = alpha m^2 (q^2 + p^2 A/(alpha - A))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import mpmath
import sympy

from .exact import SurdScalar, fmt_rational, rational_sqrt

ELL0_SQUARED_OVER_PI2 = 8


class SO3Error(ValueError):
    pass


def _s(x) -> SurdScalar:
    return SurdScalar.of(x)


def _floor(x: SurdScalar) -> int:
    n = math.floor(float(x))
    while _s(n + 1) <= x:
        n += 1
    while _s(n) > x:
        n -= 1
    return n


def _integer_sqrt(x: SurdScalar) -> int | None:
    """``n`` if ``x == n**2`` for a positive integer ``n``."""
    if not x.is_rational or x.q <= 0:
        return None
    root = rational_sqrt(x.q)
    if root is None or root.denominator != 1:
        return None
    return int(root)


@dataclass(frozen=True)
class SO3Metric:
    alpha: SurdScalar
    A: SurdScalar

    def __init__(self, alpha, A):
        a, b = _s(alpha), _s(A)
        if a.sign() <= 0 or b.sign() <= 0:
            raise SO3Error("alpha and A must be positive")
        a + b  # raises on mixed quadratic fields
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "A", b)

    @property
    def bi_invariant(self) -> bool:
        return self.alpha == self.A

    @property
    def ratio(self) -> SurdScalar:
        """``A / alpha``."""
        return self.A / self.alpha

    @property
    def c(self) -> SurdScalar:
        """``A / (alpha - A)``, the weight of ``p^2`` in Type III lengths."""
        self._require_distinct()
        return self.A / (self.alpha - self.A)

    @property
    def abar(self) -> SurdScalar:
        self._require_distinct()
        return self.A * self.alpha / (self.alpha - self.A)

    def _require_distinct(self):
        if self.bi_invariant:
            raise SO3Error("Type III geodesics exist only when alpha != A")

    def volume(self) -> sympy.Expr:
        """Riemannian volume ``alpha sqrt(A) * 16 sqrt(2) pi^2``."""
        return self.alpha.to_sympy() * sympy.sqrt(self.A.to_sympy()) * 16 * sympy.sqrt(2) * sympy.pi ** 2

    def to_json(self) -> dict:
        return {"alpha": _scalar_json(self.alpha), "A": _scalar_json(self.A)}


def _scalar_json(x: SurdScalar):
    return fmt_rational(x.q) if x.is_rational else x.to_json()


def _render(x) -> dict:
    """Exact string plus a 12-significant-digit float rendering."""
    if isinstance(x, SurdScalar):
        return {"exact": _scalar_json(x), "float": float(f"{float(x):.12g}")}
    expr = sympy.nsimplify(x) if not isinstance(x, sympy.Basic) else x
    return {"exact": sympy.sstr(sympy.simplify(expr)), "float": float(f"{float(sympy.N(expr, 30)):.12g}")}


# -- Type III parameters -------------------------------------------------------

def _check_pair(metric: SO3Metric, p: int, q: int):
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise SO3Error(f"(p, q) = ({p}, {q}) must be a coprime pair of positive integers")
    bound = metric.c if metric.c.sign() > 0 else -metric.c
    if not _s(Fraction(q, p)) > bound:
        raise SO3Error(f"(p, q) = ({p}, {q}) violates q/p > |A/(A - alpha)|")


def sigma(metric: SO3Metric, p: int, q: int) -> SurdScalar:
    """``alpha^2 (q^2/p^2 - A^2/(alpha - A)^2)``: squared ratio of the plane and axis parts."""
    _check_pair(metric, p, q)
    return metric.alpha ** 2 * (_s(Fraction(q * q, p * p)) - metric.c ** 2)


def type3_len2(metric: SO3Metric, p: int, q: int, m: int = 1) -> SurdScalar:
    _check_pair(metric, p, q)
    return metric.alpha * (m * m) * (_s(q * q) + metric.c * (p * p))


def type3_velocity(metric: SO3Metric, p: int, q: int, orientation: int = 1) -> tuple[float, float, float]:
    """A unit body velocity of the Type III geodesic for ``(p, q)``."""
    s = float(sigma(metric, p, q))
    axis = float(metric.abar + metric.alpha) * (1 if orientation > 0 else -1)
    w = (math.sqrt(s), 0.0, axis)
    n = math.sqrt(float(metric.alpha) * s + float(metric.A) * axis * axis)
    return tuple(x / n for x in w)


def type1_velocity(metric: SO3Metric) -> tuple[float, float, float]:
    return (1.0 / math.sqrt(float(metric.alpha)), 0.0, 0.0)


def type2_velocity(metric: SO3Metric) -> tuple[float, float, float]:
    return (0.0, 0.0, 1.0 / math.sqrt(float(metric.A)))


# -- closed geodesics ------------------------------------------------------------

def epsilon_set(r, metric: SO3Metric) -> list[tuple[int, int]]:
    """Coprime ``(p, q)`` with ``q/p > |c|`` and ``q^2 + c p^2 = r/alpha``.

    For ``A < alpha`` the constraint is an ellipse and ``p`` is bounded by
    ``c p^2 < r/alpha``.  For ``A > alpha`` it is a hyperbola; the slope
    condition forces ``|c|(|c| - 1) p^2 < r/alpha``.  Both loops stop on an
    exact inequality.
    """
    metric._require_distinct()
    r = _s(r)
    if r.sign() <= 0:
        return []
    target = r / metric.alpha
    c = metric.c
    abs_c = c if c.sign() > 0 else -c
    p_limit = c if c.sign() > 0 else abs_c * (abs_c - 1)
    out = []
    p = 1
    while p_limit * (p * p) < target:
        q = _integer_sqrt(target - c * (p * p))
        if q is not None and math.gcd(p, q) == 1 and _s(Fraction(q, p)) > abs_c:
            out.append((p, q))
        p += 1
    return out


def _primitive_type3_values(metric: SO3Metric, bound: SurdScalar) -> list[tuple[SurdScalar, int, int]]:
    """All ``(alpha (q^2 + c p^2), p, q)`` not exceeding ``bound``."""
    target = bound / metric.alpha
    c = metric.c
    abs_c = c if c.sign() > 0 else -c
    p_limit = c if c.sign() > 0 else abs_c * (abs_c - 1)
    out = []
    p = 1
    while p_limit * (p * p) < target:
        q = _floor(abs_c * p) + 1
        while _s(q * q) + c * (p * p) <= target:
            if math.gcd(p, q) == 1:
                out.append((metric.alpha * (_s(q * q) + c * (p * p)), p, q))
            q += 1
        p += 1
    return out


@dataclass(frozen=True)
class Component:
    """One family of fixed-point components of the time-``tau`` flow."""

    type: str
    dim: int
    m: int
    pq: tuple[int, int] | None = None
    orbits: int = 1
    morse: int | None = None
    morse_source: str | None = None

    def to_json(self) -> dict:
        out = {"type": self.type, "dim": self.dim, "iterate": self.m, "orbits": self.orbits}
        if self.pq is not None:
            out["pq"] = list(self.pq)
        out["morse"] = self.morse
        out["morse_source"] = self.morse_source
        return out


@dataclass(frozen=True)
class SO3Period:
    len2_coeff: SurdScalar
    components: tuple[Component, ...]
    clean: bool

    @property
    def types_present(self) -> frozenset[str]:
        return frozenset(c.type for c in self.components)

    def to_json(self, metric: SO3Metric | None = None) -> dict:
        comps = []
        for comp in self.components:
            item = comp.to_json()
            if metric is not None and self.len2_coeff.sign() > 0:
                item["dg_volume"] = dg_volume(comp, metric, self.len2_coeff).to_json()
            comps.append(item)
        return {
            "len2_coeff": _render(self.len2_coeff),
            "length": _render(sympy.sqrt(self.len2_coeff.to_sympy()) * 2 * sympy.sqrt(2) * sympy.pi),
            "types_present": sorted(self.types_present),
            "clean": self.clean,
            "components": comps,
        }


def fix_components(metric: SO3Metric, r, morse: str | None = None) -> list[Component]:
    """Fixed-point components of the flow at the period with coefficient ``r``.

    ``morse="exact"`` fills Type III indices from the conjugate-time formula;
    ``morse="numeric"`` additionally fills Type I and II indices from the
    numeric Jacobi oracle.
    """
    r = _s(r)
    if r.sign() <= 0:
        raise SO3Error("periods are positive")
    comps: list[Component] = []
    m1 = _integer_sqrt(r / metric.alpha)
    if metric.bi_invariant:
        if m1 is None:
            raise SO3Error(f"r = {r} is not a period")
        return [Component("I", 5, m1, morse=2 * (m1 - 1) if morse else None,
                          morse_source="constant curvature" if morse else None)]
    if m1 is not None:
        comps.append(Component("I", 4, m1))
    m2 = _integer_sqrt(r / metric.A)
    if m2 is not None:
        comps.append(Component("II", 3, m2, orbits=2))
    m = 1
    while r / (metric.alpha * (m * m)) > 1:
        for p, q in epsilon_set(r / (m * m), metric):
            comps.append(Component("III", 4, m, (p, q), orbits=2))
        m += 1
    if not comps:
        raise SO3Error(f"r = {r} is not a period")
    if morse:
        comps = [_with_morse(metric, comp, numeric=(morse == "numeric")) for comp in comps]
    return comps


def _with_morse(metric: SO3Metric, comp: Component, numeric: bool) -> Component:
    if comp.type == "III":
        idx = type3_morse_index(metric, *comp.pq, m=comp.m)
        return Component(comp.type, comp.dim, comp.m, comp.pq, comp.orbits, idx, "exact formula")
    if not numeric:
        return comp
    from . import oracle

    if comp.type == "I":
        v, unit = type1_velocity(metric), metric.alpha
    else:
        v, unit = type2_velocity(metric), metric.A
    length = comp.m * math.sqrt(float(unit)) * oracle.ELL0
    idx = oracle.numeric_conjugate_count((float(metric.alpha), float(metric.A)), v, length)
    return Component(comp.type, comp.dim, comp.m, comp.pq, comp.orbits, idx, "numeric")


def _period_is_clean(metric: SO3Metric, r: SurdScalar) -> bool:
    verdict = classify_cleanliness(metric)
    if verdict.clean:
        return True
    n = _integer_sqrt(r / metric.A)
    return n is None or n % verdict.k != 0


def length_spectrum(metric: SO3Metric, bound_coeff, morse: str | None = None) -> list[SO3Period]:
    """All periods with coefficient ``r <= bound_coeff``, the trivial one included."""
    bound = _s(bound_coeff)
    if bound.sign() < 0:
        raise SO3Error("bound must be nonnegative")
    values: set[SurdScalar] = set()
    for unit in {metric.alpha, metric.A}:
        m = 1
        while unit * (m * m) <= bound:
            values.add(unit * (m * m))
            m += 1
    if not metric.bi_invariant:
        for value, _p, _q in _primitive_type3_values(metric, bound):
            m = 1
            while value * (m * m) <= bound:
                values.add(value * (m * m))
                m += 1
    periods = [SO3Period(_s(0), (), True)]
    verdict = classify_cleanliness(metric)
    for r in sorted(values, key=lambda x: (float(x), x.q, x.r)):
        comps = tuple(fix_components(metric, r, morse))
        period = SO3Period(r, comps, _period_is_clean(metric, r))
        if verdict.clean and not metric.bi_invariant:
            types = period.types_present
            if {"I", "II"} <= types or {"I", "III"} <= types:
                raise AssertionError(f"exclusion rule violated at r = {r}")
        periods.append(period)
    return periods


# -- cleanliness -----------------------------------------------------------------

@dataclass(frozen=True)
class Cleanliness:
    clean: bool
    j: int | None = None
    k: int | None = None
    A: SurdScalar | None = None

    def unclean_period_coeffs(self, bound) -> list[SurdScalar]:
        """``(m k)^2 A`` for ``m >= 1`` up to ``bound``."""
        if self.clean:
            return []
        bound = _s(bound)
        out, m = [], 1
        while self.A * ((m * self.k) ** 2) <= bound:
            out.append(self.A * ((m * self.k) ** 2))
            m += 1
        return out

    def to_json(self, bound=None) -> dict:
        if self.clean:
            return {"verdict": "clean"}
        out = {"verdict": "unclean", "j": self.j, "k": self.k}
        if bound is not None:
            out["unclean_period_coeffs"] = [_scalar_json(x) for x in self.unclean_period_coeffs(bound)]
        return out


def classify_cleanliness(metric: SO3Metric) -> Cleanliness:
    """Unclean exactly when ``A/alpha`` is rational and not 1.

    Writing ``A = 2 alpha j / k`` in lowest terms, the unclean periods are the
    Type II periods whose winding number is a multiple of ``k``.
    """
    ratio = metric.ratio
    if not ratio.is_rational or ratio == 1:
        return Cleanliness(True)
    half = ratio.q / 2
    return Cleanliness(False, half.numerator, half.denominator, metric.A)


# -- Duistermaat-Guillemin volumes ----------------------------------------------

@dataclass(frozen=True)
class DGVolume:
    expr: sympy.Expr

    @property
    def value(self) -> float:
        return float(sympy.N(self.expr, 30))

    def to_json(self) -> dict:
        return {"exact": sympy.sstr(self.expr), "float": float(f"{self.value:.12g}")}


def _tau(r: SurdScalar) -> sympy.Expr:
    return 2 * sympy.sqrt(2) * sympy.pi * sympy.sqrt(r.to_sympy())


def dg_volume(component: Component, metric: SO3Metric, r) -> DGVolume:
    """Total DG measure of one orbit of ``component`` at the period ``r``."""
    r = _s(r)
    vol = metric.volume()
    tau = _tau(r)
    if component.type == "I" and component.dim == 5:
        expr = 4 * sympy.pi * vol
    elif component.type == "I":
        expr = 2 * sympy.pi * vol / sympy.sqrt(tau)
    elif component.type == "II":
        expr = vol / tau
    elif component.type == "III":
        s = sigma(metric, *component.pq).to_sympy()
        expr = 2 * sympy.pi / sympy.sqrt(tau) * sympy.sqrt(s / (s + 1)) * vol
    else:
        raise SO3Error(f"unknown component type {component.type!r}")
    return DGVolume(sympy.simplify(expr))


# -- wave invariant at the systole ------------------------------------------------

@dataclass(frozen=True)
class WaveZero:
    case: str
    tau_min_len2: SurdScalar
    parity: str
    magnitude: sympy.Expr
    phase_exponent: int | None
    morse: int | None
    value: sympy.Expr | None = None
    branch_note: str | None = None

    def to_json(self) -> dict:
        out = {
            "case": self.case,
            "tau_min_len2": _render(self.tau_min_len2),
            "parity": self.parity,
            "magnitude": {"exact": sympy.sstr(self.magnitude),
                          "float": float(f"{float(sympy.N(self.magnitude, 30)):.12g}")},
            "phase": None if self.phase_exponent is None else f"i^(-{self.phase_exponent})",
            "morse": self.morse,
        }
        if self.value is not None:
            out["value"] = {"exact": sympy.sstr(self.value),
                            "float": float(f"{float(sympy.N(self.value, 30)):.12g}")}
        if self.branch_note:
            out["note"] = self.branch_note
        return out


def wave0_taumin(metric: SO3Metric, morse: int | None = None) -> WaveZero:
    """Leading wave coefficient at the shortest period.

    ``morse`` is the common index of the systolic geodesics; when omitted it is
    computed with the numeric Jacobi oracle.
    """
    vol = metric.volume()
    if metric.bi_invariant:
        value = -vol / sympy.pi
        return WaveZero("bi-invariant", metric.alpha, "odd", sympy.simplify(vol / sympy.pi), None, 0,
                        sympy.simplify(value))
    if metric.A < metric.alpha:
        r = metric.A
        if morse is None:
            morse = _with_morse(metric, Component("II", 3, 1, orbits=2), numeric=True).morse
        mag = sympy.simplify(vol / (sympy.pi * _tau(r)))
        return WaveZero("A<alpha", r, "odd", mag, (morse + 1) % 4, morse)
    r = metric.alpha
    if morse is None:
        morse = _with_morse(metric, Component("I", 4, 1), numeric=True).morse
    mag = sympy.simplify((2 * sympy.pi) ** sympy.Rational(-3, 2) * 2 * sympy.pi / sympy.sqrt(_tau(r)) * vol)
    return WaveZero("A>alpha", r, "even", mag, morse % 4, morse,
                    branch_note="the branch of (1/(2 pi i))^(3/2) is not fixed; magnitude and "
                                "the i^(-morse) factor are reported separately")


# -- Type III conjugate points ----------------------------------------------------

@dataclass(frozen=True)
class ConjugateTime:
    time: float
    multiplicity: int
    kind: str
    n: int | None = None

    def to_json(self) -> dict:
        return {"time": float(f"{self.time:.12g}"), "multiplicity": self.multiplicity,
                "kind": self.kind, "n": self.n}


def conjugate_frequency_squared(metric: SO3Metric, p: int, q: int) -> SurdScalar:
    """``a^2 = phi^2 + (sigma/(sigma+1)) / (2 (Abar + alpha))`` with ``phi^2 = A/(2 alpha^2)``."""
    s = sigma(metric, p, q)
    phi2 = metric.A / (metric.alpha ** 2 * 2)
    return phi2 + (s / (s + 1)) / ((metric.abar + metric.alpha) * 2)


def isolated_conjugate_time(metric: SO3Metric, p: int, q: int) -> SurdScalar | None:
    """``4 alpha^2 / ((A - alpha) sigma/(sigma+1))`` when ``alpha < A``."""
    if not metric.alpha < metric.A:
        return None
    s = sigma(metric, p, q)
    return metric.alpha ** 2 * 4 / ((metric.A - metric.alpha) * (s / (s + 1)))


def _time_below(t: SurdScalar, len2: SurdScalar) -> int:
    """Sign of ``t - sqrt(8 pi^2 len2)``; ``t`` has no factor of pi, so never zero."""
    with mpmath.workdps(60):
        lhs = mpmath.mpf(t.q.numerator) / t.q.denominator + \
            mpmath.mpf(t.r.numerator) / t.r.denominator * mpmath.sqrt(t.d)
        rhs = mpmath.sqrt(8 * (mpmath.mpf(len2.q.numerator) / len2.q.denominator
                               + mpmath.mpf(len2.r.numerator) / len2.r.denominator * mpmath.sqrt(len2.d))) * mpmath.pi
        diff = lhs - rhs
        if abs(diff) < mpmath.mpf(10) ** -45:
            raise SO3Error("conjugate time too close to the bound to separate")
        return -1 if diff < 0 else 1


def type3_conjugate_times(metric: SO3Metric, p: int, q: int, up_to) -> list[ConjugateTime]:
    """Conjugate times of the Type III geodesic strictly before ``sqrt(up_to) * ELL0``.

    ``up_to`` is a squared-length coefficient.  Periodic times ``2 pi n / a``
    are compared exactly through ``n^2 < 2 a^2 up_to``; the isolated time
    carries no factor of pi, so it never coincides with a periodic one and is
    compared with a 60-digit evaluation.
    """
    _check_pair(metric, p, q)
    up_to = _s(up_to)
    a2 = conjugate_frequency_squared(metric, p, q)
    out = []
    if up_to.sign() > 0:
        n = 1
        while _s(n * n) < a2 * up_to * 2:
            out.append(ConjugateTime(2 * math.pi * n / math.sqrt(float(a2)), 1, "periodic", n))
            n += 1
        extra = isolated_conjugate_time(metric, p, q)
        if extra is not None and _time_below(extra, up_to) < 0:
            out.append(ConjugateTime(float(extra), 1, "isolated"))
    return sorted(out, key=lambda c: c.time)


def type3_morse_index(metric: SO3Metric, p: int, q: int, m: int = 1) -> int:
    """Interior conjugate points, with multiplicity, along ``m`` turns of the geodesic."""
    return sum(c.multiplicity for c in type3_conjugate_times(metric, p, q, type3_len2(metric, p, q, m)))


# -- singular support ---------------------------------------------------------------

@dataclass
class SingularSupport:
    certified: list[SurdScalar] = field(default_factory=list)
    undetermined: list[SurdScalar] = field(default_factory=list)
    unclean: list[SurdScalar] = field(default_factory=list)

    def to_json(self) -> dict:
        return {k: [_scalar_json(x) for x in getattr(self, k)]
                for k in ("certified", "undetermined", "unclean")}


def certified_singular_support(metric: SO3Metric, bound_coeff) -> SingularSupport:
    """Sort periods by whether the leading wave term is provably nonzero.

    Type I components are alone in their period for clean metrics and give
    a nonzero even term.  The two Type II orbits share one Morse index, so the
    odd term cannot cancel.  Periods carried only by Type III components are
    left undetermined.
    """
    out = SingularSupport()
    for period in length_spectrum(metric, bound_coeff):
        if period.len2_coeff.sign() == 0:
            continue
        if not period.clean:
            out.unclean.append(period.len2_coeff)
        elif metric.bi_invariant or period.types_present & {"I", "II"}:
            out.certified.append(period.len2_coeff)
        else:
            out.undetermined.append(period.len2_coeff)
    return out
