"""Spectral engine for compact symmetric spaces ``Gamma \\ (T^d x M_1 x ... x M_q)``.

Vectors of the maximal flat are handled as tuples of components: the torus
component first (possibly empty) and then one component per factor, each in
that factor's ambient root-system coordinates.  Flat vectors of the total
ambient dimension are accepted too and split automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from . import exact
from .exact import RatVec, dot, fmt_rational, fmt_vec, frac, norm2
from .lattice import (
    IntegerLattice,
    QuadraticForm,
    coroot_lattice,
    enumerate_coefficients,
    integral_lattice_of,
    product_integral_lattice,
)
from .rootsys import (
    RootSystemError,
    WeightedRootSystem,
    build_root_system,
    center_class_vector,
    degree_of_singularity,
    dominant_representative,
    weighted_pos_sum,
)

FACTOR_KINDS = ("group", "typeI", "maximal_rank")


class SpaceError(ValueError):
    """Invalid space, metric or vector."""


class NotSplitRankError(SpaceError):
    """The mod-4 function is undefined for factors with odd multiplicities."""


# ---------------------------------------------------------------------------
# specifications


@dataclass(frozen=True)
class Factor:
    kind: str
    rs: WeightedRootSystem
    gamma: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise SpaceError(f"unknown factor kind {self.kind!r}; expected one of {FACTOR_KINDS}")
        if self.kind == "group" and any(m != 2 for m in self.rs.mult):
            raise SpaceError("group factors carry multiplicity 2 on every root")
        if self.kind == "maximal_rank" and any(m != 1 for m in self.rs.mult):
            raise SpaceError("maximal-rank factors carry multiplicity 1 on every root")
        if self.kind == "group" and not self.rs.reduced:
            raise SpaceError("a group factor needs a reduced root system")

    @property
    def split_rank(self) -> bool:
        return all(m % 2 == 0 for m in self.rs.mult)

    @property
    def dimension(self) -> int:
        return self.rs.dimension

    @property
    def name(self) -> str:
        return f"{self.kind}:{self.rs.name}"


def group_factor(label: str, rank: int | None = None, gamma: Sequence[str] = ()) -> Factor:
    return Factor("group", build_root_system(label, rank, 2), tuple(gamma))


def type1_factor(label: str, rank: int | None, mult_profile: Mapping[str, int] | int,
                 gamma: Sequence[str] = ()) -> Factor:
    return Factor("typeI", build_root_system(label, rank, mult_profile), tuple(gamma))


def maximal_rank_factor(label: str, rank: int | None, gamma: Sequence[str] = ()) -> Factor:
    return Factor("maximal_rank", build_root_system(label, rank, 1), tuple(gamma))


@dataclass(frozen=True)
class SymmetricSpaceSpec:
    torus_dim: int = 0
    factors: tuple[Factor, ...] = ()
    gamma: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        if self.torus_dim < 0:
            raise SpaceError("torus dimension must be nonnegative")
        if not self.factors and not self.torus_dim:
            raise SpaceError("a space needs at least one factor or a torus")
        # validates descriptors, arity and the trivial torus intersection eagerly
        _ = self.lattice

    @cached_property
    def lattice(self) -> IntegerLattice:
        return product_integral_lattice([(f.rs, f.gamma) for f in self.factors],
                                        self.torus_dim, self.gamma)

    @property
    def ambient_dims(self) -> list[int]:
        return [self.torus_dim] + [f.rs.ambient_dim for f in self.factors]

    @property
    def ambient_dim(self) -> int:
        return sum(self.ambient_dims)

    @property
    def dimension(self) -> int:
        return self.torus_dim + sum(f.dimension for f in self.factors)

    @property
    def rank(self) -> int:
        return self.torus_dim + sum(f.rs.rank for f in self.factors)

    def split(self, v) -> tuple[RatVec, ...]:
        """Normalise ``v`` to a tuple of components (torus first)."""
        if len(v) == len(self.factors) + 1 and all(isinstance(c, (tuple, list)) for c in v):
            comps = tuple(exact.vec(c) if len(c) else () for c in v)
        elif len(v) == len(self.factors) and self.torus_dim == 0 and \
                all(isinstance(c, (tuple, list)) for c in v):
            comps = ((),) + tuple(exact.vec(c) for c in v)
        else:
            flat = exact.vec(v)
            if len(flat) != self.ambient_dim:
                raise SpaceError(f"vector has {len(flat)} coordinates, expected {self.ambient_dim}")
            out, pos = [], 0
            for d in self.ambient_dims:
                out.append(flat[pos:pos + d])
                pos += d
            comps = tuple(out)
        for d, c in zip(self.ambient_dims, comps):
            if len(c) != d:
                raise SpaceError("component dimensions do not match the space")
        for f, c in zip(self.factors, comps[1:]):
            f.rs.check(c)
        return comps

    def join(self, comps: Sequence[RatVec]) -> RatVec:
        return tuple(x for c in comps for x in c)

    def projected_gamma(self, j: int) -> tuple[str, ...]:
        """Descriptors generating the projection of Gamma to the centre of factor ``j``."""
        gens = list(self.factors[j].gamma)
        q = len(self.factors)
        for tup in self.gamma:
            tup = list(tup)
            if len(tup) == q + 1:
                tup = tup[1:]
            gens.append(str(tup[j]))
        return tuple(gens)


@dataclass(frozen=True)
class MetricSpec:
    torus_gram: tuple[tuple[Fraction, ...], ...] = ()
    scales: tuple[Fraction, ...] = ()

    def __init__(self, torus_gram=(), scales=()):
        g = tuple(tuple(frac(x) for x in row) for row in torus_gram)
        s = tuple(frac(x) for x in scales)
        if g:
            QuadraticForm(g)
        if any(c <= 0 for c in s):
            raise SpaceError("metric scales must be positive rationals")
        object.__setattr__(self, "torus_gram", g)
        object.__setattr__(self, "scales", s)

    @classmethod
    def standard(cls, space: SymmetricSpaceSpec) -> "MetricSpec":
        d = space.torus_dim
        return cls([[1 if i == j else 0 for j in range(d)] for i in range(d)],
                   [1] * len(space.factors))

    def check(self, space: SymmetricSpaceSpec) -> "MetricSpec":
        if len(self.torus_gram) != space.torus_dim:
            raise SpaceError("torus Gram matrix does not match the torus dimension")
        if len(self.scales) != len(space.factors):
            raise SpaceError(f"expected {len(space.factors)} scales, got {len(self.scales)}")
        return self


def product_space(*factors: Factor, torus_dim: int = 0,
                  gamma: Sequence[Sequence[str]] = ()) -> SymmetricSpaceSpec:
    return SymmetricSpaceSpec(torus_dim, tuple(factors), tuple(tuple(map(str, g)) for g in gamma))


# ---------------------------------------------------------------------------
# per-vector invariants


def component_norms(space: SymmetricSpaceSpec, metric: MetricSpec, v) -> tuple[Fraction, ...]:
    metric.check(space)
    comps = space.split(v)
    t = comps[0]
    g = metric.torus_gram
    torus = sum((g[i][j] * t[i] * t[j] for i in range(len(t)) for j in range(len(t))), Fraction(0))
    return (torus,) + tuple(c * norm2(x) for c, x in zip(metric.scales, comps[1:]))


def squared_length(space: SymmetricSpaceSpec, metric: MetricSpec, v) -> Fraction:
    return sum(component_norms(space, metric, v), Fraction(0))


def _as_int(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise SpaceError(f"{what} is not an integer ({fmt_rational(x)}); is v in the integral lattice?")
    return int(x)


def morse_index(space: SymmetricSpaceSpec, v) -> int:
    """Morse index of the closed geodesic with initial vector ``v`` (root formula)."""
    comps = space.split(v)
    total = Fraction(0)
    for f, c in zip(space.factors, comps[1:]):
        rs = f.rs
        for i in rs.positives:
            val = dot(rs.roots[i].functional, c)
            if val:
                total += rs.mult[i] * (abs(val) - 1)
    return _as_int(total, "Morse index")


def degsing(space: SymmetricSpaceSpec, v) -> int:
    comps = space.split(v)
    return sum(degree_of_singularity(f.rs, c) for f, c in zip(space.factors, comps[1:]))


def dim_fix(space: SymmetricSpaceSpec, v) -> int:
    """Dimension of the component of the fixed set in the unit sphere bundle through ``v``."""
    comps = space.split(v)
    if all(exact.is_zero(c) for c in comps):
        raise SpaceError("v = 0 has no fixed-set component")
    out = space.torus_dim
    for f, c in zip(space.factors, comps[1:]):
        rs = f.rs
        if exact.is_zero(c):
            out += rs.rank + rs.mult_sum
        else:
            out += rs.rank + 2 * rs.mult_sum - degree_of_singularity(rs, c)
    return out


def dominant_components(space: SymmetricSpaceSpec, v) -> tuple[RatVec, ...]:
    comps = space.split(v)
    return (comps[0],) + tuple(dominant_representative(f.rs, c)
                               for f, c in zip(space.factors, comps[1:]))


# ---------------------------------------------------------------------------
# mod-4 functions


@dataclass(frozen=True)
class GammaProjection:
    order: int
    integral_coordinates: bool   # Lambda_I contained in Z^n (D_n tests)


_PROJECTION_CACHE: dict[tuple, GammaProjection] = {}


def _gamma_projection(rs: WeightedRootSystem, gamma: Sequence[str]) -> GammaProjection:
    # The projection only depends on the coroot lattice, which is fixed by the
    # root system's name (multiplicities do not enter).
    key = (rs.name, rs.rank, tuple(gamma))
    cached = _PROJECTION_CACHE.get(key)
    if cached is None:
        lat = integral_lattice_of(rs, gamma)
        order = lat.index_of(coroot_lattice(rs))
        integral = all(x.denominator == 1 for b in lat.basis for x in b)
        cached = _PROJECTION_CACHE[key] = GammaProjection(order, integral)
    return cached


def _parity_of(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise SpaceError(f"{what} = {fmt_rational(x)} is not an integer, so no lattice vector attains it")
    return int(x) % 2


def f_mod4(factor: Factor, gamma_j: Sequence[str], c, s) -> int:
    """Value in {0, 2} of the per-type mod-4 function at metric-scaled norm ``s``.

    ``gamma_j`` generates the projection of Gamma to this factor's centre,
    ``c`` is the factor's metric scale and the lemmas are stated in ``s / c``.
    """
    c, s = frac(c), frac(s)
    if c <= 0 or s < 0:
        raise SpaceError("scale must be positive and norm nonnegative")
    rs = factor.rs
    if factor.kind == "maximal_rank" or not factor.split_rank:
        raise NotSplitRankError(
            f"f undefined: {factor.name} has odd multiplicities (not split-rank)")
    if factor.kind == "typeI":
        if all(m % 4 == 0 for m in rs.mult):
            return 0
        raise SpaceError("Type I split-rank factors carry multiplicities divisible by 4; "
                         "declare multiplicity-2 factors as groups")
    x = s / c
    proj = _gamma_projection(rs, gamma_j)
    n, label = rs.rank, rs.label
    if label == "A":
        if n % 2 == 1 and proj.order == n + 1:
            return 2 if _parity_of((n + 1) * x, "(n+1)s/c") else 0
        return 0
    if label == "B":
        if proj.order == 2:
            return 2 if _parity_of(x, "s/c") else 0
        return 0
    if label == "C":
        if n % 4 in (1, 2) and proj.order == 2:
            return 0 if x.denominator == 1 else 2
        return 0
    if label == "D":
        if n % 4 in (2, 3) and not proj.integral_coordinates:
            return 0 if x.denominator == 1 else 2
        return 0
    if label == "E7":
        if proj.order == 2:
            return 0 if x.denominator == 1 else 2
        return 0
    if label in ("E6", "E8", "F4", "G2"):
        return 0
    raise SpaceError(f"Gamma case table has no row for {rs.name}")


def predicted_morse_mod4(space: SymmetricSpaceSpec, metric: MetricSpec, v) -> int:
    """Residue predicted from component norms and the fixed-set dimension."""
    metric.check(space)
    comps = space.split(v)
    if all(exact.is_zero(c) for c in comps[1:]):
        return 0
    norms = component_norms(space, metric, comps)[1:]
    fsum = sum(f_mod4(f, space.projected_gamma(j), c, s)
               for j, (f, c, s) in enumerate(zip(space.factors, metric.scales, norms)))
    return (fsum - dim_fix(space, comps) + space.dimension) % 4


def component_length_sum(factor: Factor, v: RatVec) -> Fraction:
    """The weighted plain root sum whose residue the mod-4 function predicts."""
    return weighted_pos_sum(factor.rs, v, use_abs=False)


# ---------------------------------------------------------------------------
# spectrum


@dataclass(frozen=True)
class GeodesicClass:
    v: tuple[RatVec, ...]
    len2: Fraction
    degsing: int
    dim_fix: int
    morse: int

    @property
    def morse_mod4(self) -> int:
        return self.morse % 4

    @property
    def parity(self) -> str:
        return "even" if self.dim_fix % 2 == 0 else "odd"

    def to_json(self) -> dict:
        return {"v": [fmt_vec(c) for c in self.v], "len2": fmt_rational(self.len2),
                "degsing": self.degsing, "dim_fix": self.dim_fix, "morse": self.morse,
                "morse_mod4": self.morse_mod4}


@dataclass(frozen=True)
class SpectrumReport:
    space: SymmetricSpaceSpec
    metric: MetricSpec
    bound: Fraction
    classes: dict = field(default_factory=dict)   # len2 -> tuple[GeodesicClass, ...]

    @property
    def lengths(self) -> list[Fraction]:
        return sorted(self.classes)

    @property
    def class_count(self) -> int:
        return sum(len(v) for v in self.classes.values())

    def all_classes(self) -> list[GeodesicClass]:
        return [c for r in self.lengths for c in self.classes[r]]


def _canonical_key(space: SymmetricSpaceSpec, comps: tuple[RatVec, ...]) -> tuple[RatVec, ...]:
    plus = dominant_components(space, comps)
    minus = dominant_components(space, tuple(exact.neg(c) for c in comps))
    return min(plus, minus)


def metric_gram(space: SymmetricSpaceSpec, metric: MetricSpec) -> list[list[Fraction]]:
    metric.check(space)
    basis = [space.split(b) for b in space.lattice.basis]

    def inner(a, b):
        t = metric.torus_gram
        out = sum((t[i][j] * a[0][i] * b[0][j] for i in range(len(a[0])) for j in range(len(b[0]))),
                  Fraction(0))
        for c, x, y in zip(metric.scales, a[1:], b[1:]):
            out += c * dot(x, y)
        return out

    return [[inner(a, b) for b in basis] for a in basis]


def enumerate_spectrum(space: SymmetricSpaceSpec, metric: MetricSpec, bound) -> SpectrumReport:
    """All closed-geodesic classes with squared length at most ``bound``.

    Classes are Weyl orbits of integral-lattice vectors, identified with their
    negatives (time reversal); each is represented by its per-factor dominant
    form.
    """
    bound = frac(bound)
    metric.check(space)
    if bound <= 0:
        return SpectrumReport(space, metric, bound, {})
    lat = space.lattice
    xs = enumerate_coefficients(metric_gram(space, metric), bound, dedup=True)
    seen: dict[tuple, GeodesicClass] = {}
    for v in lat.to_ambient(xs):
        comps = space.split(v)
        key = _canonical_key(space, comps)
        if key in seen:
            continue
        seen[key] = GeodesicClass(
            v=key, len2=squared_length(space, metric, key), degsing=degsing(space, key),
            dim_fix=dim_fix(space, key), morse=morse_index(space, key))
    grouped: dict[Fraction, list[GeodesicClass]] = {}
    for key in sorted(seen):
        cls = seen[key]
        grouped.setdefault(cls.len2, []).append(cls)
    return SpectrumReport(space, metric, bound, {r: tuple(grouped[r]) for r in sorted(grouped)})


# ---------------------------------------------------------------------------
# wave terms


@dataclass(frozen=True)
class ParityBlock:
    max_dim: int
    residues: tuple[int, ...]

    @property
    def certified_nonzero(self) -> bool:
        return bool(self.residues) and len(set(self.residues)) == 1

    @property
    def verdict(self) -> str:
        return "nonzero" if self.certified_nonzero else "cancellation possible"


@dataclass(frozen=True)
class WaveTermReport:
    len2: Fraction
    blocks: dict   # parity -> ParityBlock

    @property
    def certified_nonzero(self) -> bool:
        return any(b.certified_nonzero for b in self.blocks.values())

    def to_json(self) -> dict:
        return {
            "len2": fmt_rational(self.len2),
            "certified_nonzero": self.certified_nonzero,
            "parities": {p: {"max_dim": b.max_dim, "residues": list(b.residues),
                             "certified_nonzero": b.certified_nonzero, "verdict": b.verdict}
                         for p, b in sorted(self.blocks.items())},
        }


def wave_analysis(report: SpectrumReport) -> list[WaveTermReport]:
    out = []
    for r in report.lengths:
        blocks = {}
        for parity in ("even", "odd"):
            members = [c for c in report.classes[r] if c.parity == parity]
            if not members:
                continue
            top = max(c.dim_fix for c in members)
            residues = tuple(sorted(c.morse_mod4 for c in members if c.dim_fix == top))
            blocks[parity] = ParityBlock(top, residues)
        out.append(WaveTermReport(r, blocks))
    return out


# ---------------------------------------------------------------------------
# rank, CLU and class H


class RankRecoveryError(SpaceError):
    def __init__(self, message: str, smallest_regular_len2: Fraction | None = None):
        self.smallest_regular_len2 = smallest_regular_len2
        super().__init__(message)


def _is_regular_class(space: SymmetricSpaceSpec, cls: GeodesicClass) -> bool:
    return cls.degsing == 0 and all(not exact.is_zero(c) for c in cls.v[1:])


def smallest_regular_len2(space: SymmetricSpaceSpec, metric: MetricSpec,
                          start=Fraction(1), limit=Fraction(10**6)) -> Fraction:
    bound = frac(start)
    while bound <= limit:
        rep = enumerate_spectrum(space, metric, bound)
        regular = [c.len2 for c in rep.all_classes() if _is_regular_class(space, c)]
        if regular:
            return min(regular)
        bound *= 2
    raise RankRecoveryError("no regular lattice vector found below the search limit")


def recover_rank(report: SpectrumReport, dim_U: int) -> int:
    """Rank from the largest fixed-set dimension: ``2 dim U - max dim Fix``."""
    space = report.space
    if not space.factors:
        raise RankRecoveryError(
            f"flat torus of dimension d={space.torus_dim}: no roots, rank recovery needs a group part")
    if not any(_is_regular_class(space, c) for c in report.all_classes()):
        smallest = smallest_regular_len2(space, report.metric, max(report.bound, Fraction(1)))
        raise RankRecoveryError(
            f"no regular vector within bound {fmt_rational(report.bound)}; "
            f"the smallest regular class has len2 {fmt_rational(smallest)}", smallest)
    top = max(c.dim_fix for c in report.all_classes())
    return 2 * dim_U - top


@dataclass(frozen=True)
class CLUVerdict:
    clu: bool
    bound: Fraction
    witness: tuple[GeodesicClass, GeodesicClass] | None = None

    def to_json(self) -> dict:
        out = {"verdict": "CLU_up_to_bound" if self.clu else "witness",
               "bound": fmt_rational(self.bound)}
        if self.witness:
            out["witness"] = [w.to_json() for w in self.witness]
        return out


def clu_check(report: SpectrumReport) -> CLUVerdict:
    space, metric = report.space, report.metric
    for r in report.lengths:
        members = report.classes[r]
        first = members[0]
        ref = component_norms(space, metric, first.v)
        for other in members[1:]:
            if component_norms(space, metric, other.v) != ref:
                return CLUVerdict(False, report.bound, (first, other))
    return CLUVerdict(True, report.bound)


@dataclass(frozen=True)
class ClassHVerdict:
    member: bool
    reasons: tuple[str, ...]

    def to_json(self) -> dict:
        return {"in_class_H": self.member, "reasons": list(self.reasons)}


def _clause(factor: Factor, proj: GammaProjection) -> tuple[bool, str]:
    rs = factor.rs
    n, label = rs.rank, rs.label
    name = rs.name
    if factor.kind == "typeI":
        return True, f"{name} Type I: no restriction"
    if label == "A" and n % 2 == 1:
        ok = proj.order < n + 1
        return ok, f"SU({n + 1}), n odd: projection of order {proj.order} " + \
            ("is proper" if ok else f"is all of Z{n + 1}")
    if label == "B":
        ok = proj.order == 1
        return ok, f"Spin({2 * n + 1}): projection of order {proj.order} " + \
            ("is trivial" if ok else "is Z2, must be trivial")
    if label == "C" and n % 4 in (1, 2):
        ok = proj.order == 1
        return ok, f"Sp({n}), n = {n % 4} mod 4: projection of order {proj.order} " + \
            ("is trivial" if ok else "must be trivial")
    if label == "D" and n % 4 in (2, 3):
        ok = proj.integral_coordinates
        return ok, f"Spin({2 * n}), n = {n % 4} mod 4: projection " + \
            ("lies in the class of e1" if ok else "leaves the class of e1")
    if label == "E7":
        ok = proj.order == 1
        return ok, f"E7: projection of order {proj.order} " + ("is trivial" if ok else "must be trivial")
    return True, f"{name}: no restriction"


def in_class_H(space: SymmetricSpaceSpec) -> ClassHVerdict:
    for f in space.factors:
        if not f.split_rank or f.kind == "maximal_rank":
            raise NotSplitRankError(f"{f.name} is outside the classified split-rank list")
    if not space.factors:
        return ClassHVerdict(True, ("flat torus",))
    if len(space.factors) == 1 and space.torus_dim == 0:
        return ClassHVerdict(True, (f"irreducible: {space.factors[0].rs.name}",))
    projections = [_gamma_projection(f.rs, space.projected_gamma(j)) for j, f in enumerate(space.factors)]
    if all(p.order == 1 for p in projections):
        return ClassHVerdict(True, ("Gamma is trivial",))
    results = [_clause(f, p) for f, p in zip(space.factors, projections)]
    return ClassHVerdict(all(ok for ok, _ in results), tuple(msg for _, msg in results))
