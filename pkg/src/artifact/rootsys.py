"""The ten indecomposable root systems in explicit ambient coordinates.

Every system lives in a subspace ``V`` of some ``R^N`` with the standard inner
product, and a root ``beta`` is stored as the vector ``beta*`` with
``beta(v) = <beta*, v>``.  The Weyl chamber of each type is fixed by a regular
"chamber vector"; positive roots are those positive on it and the simple roots
are the indecomposable positive roots, listed in a fixed preferred order.

>>> rs = build_root_system("B", 2)
>>> len(rs.roots), [fmt_vec(rs.roots[i].functional) for i in rs.simples]
(8, [['1', '-1'], ['0', '1']])
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import sympy

from .exact import (
    RatVec,
    add,
    dot,
    fmt_vec,
    frac,
    hnf_rows,
    is_zero,
    norm2,
    rational_inverse,
    scale,
    smith_normal_form,
    sub,
    to_integer_rows,
    vec,
)

LABELS = ("A", "B", "C", "D", "BC", "E6", "E7", "E8", "F4", "G2")
FIXED_RANK = {"E6": 6, "E7": 7, "E8": 8, "F4": 4, "G2": 2}
MIN_RANK = {"A": 1, "B": 2, "C": 3, "D": 4, "BC": 1}


class RootSystemError(ValueError):
    """Invalid label, rank, multiplicity profile or vector."""


@dataclass(frozen=True)
class Root:
    functional: RatVec
    coroot: RatVec


@dataclass(frozen=True)
class FiniteAbelianGroup:
    invariant_factors: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        out = 1
        for f in self.invariant_factors:
            out *= f
        return out

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "1"
        return " + ".join(f"Z{f}" for f in self.invariant_factors)


@dataclass(frozen=True)
class WeightedRootSystem:
    label: str
    rank: int
    ambient_dim: int
    subspace_basis: tuple[RatVec, ...]
    normals: tuple[RatVec, ...]
    chamber: RatVec
    roots: tuple[Root, ...]
    positives: tuple[int, ...]
    simples: tuple[int, ...]
    mult: tuple[int, ...]
    orbit: tuple[str, ...]
    _index: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def reduced(self) -> bool:
        return self.label != "BC"

    @property
    def name(self) -> str:
        return self.label if self.label in FIXED_RANK else f"{self.label}{self.rank}"

    def root_index(self, functional: RatVec) -> int:
        return self._index[tuple(functional)]

    def positive_roots(self) -> list[Root]:
        return [self.roots[i] for i in self.positives]

    def simple_roots(self) -> list[Root]:
        return [self.roots[i] for i in self.simples]

    @property
    def mult_sum(self) -> int:
        """Sum of multiplicities over positive roots."""
        return sum(self.mult[i] for i in self.positives)

    @property
    def dimension(self) -> int:
        """Dimension of the associated compact space: rank plus positive multiplicities."""
        return self.rank + self.mult_sum

    def contains(self, v: RatVec) -> bool:
        return len(v) == self.ambient_dim and all(dot(n, v) == 0 for n in self.normals)

    def check(self, v: RatVec) -> RatVec:
        v = vec(v)
        if len(v) != self.ambient_dim:
            raise RootSystemError(
                f"{self.name}: vector has {len(v)} coordinates, expected {self.ambient_dim}")
        for n in self.normals:
            if dot(n, v) != 0:
                raise RootSystemError(f"{self.name}: vector {fmt_vec(v)} is not in the subspace V")
        return v


# ---------------------------------------------------------------------------
# per-type raw data


def _e(n: int, *entries: tuple[int, object]) -> RatVec:
    out = [Fraction(0)] * n
    for i, x in entries:
        out[i] = frac(x)
    return tuple(out)


def _signed_pairs(n: int, coords: Sequence[int]) -> list[RatVec]:
    out = []
    for a, b in itertools.combinations(coords, 2):
        for sa, sb in itertools.product((1, -1), repeat=2):
            out.append(_e(n, (a, sa), (b, sb)))
    return out


def _e8_roots() -> list[RatVec]:
    roots = _signed_pairs(8, range(8))
    half = Fraction(1, 2)
    for signs in itertools.product((1, -1), repeat=8):
        if signs.count(-1) % 2 == 0:
            roots.append(tuple(half * s for s in signs))
    return roots


def _raw(label: str, n: int):
    """Return (ambient_dim, roots, normals, chamber, preferred simples or None)."""
    h = Fraction(1, 2)
    if label == "A":
        N = n + 1
        roots = [_e(N, (a, 1), (b, -1)) for a in range(N) for b in range(N) if a != b]
        chamber = vec(n - 2 * i for i in range(N))
        simples = [_e(N, (i, 1), (i + 1, -1)) for i in range(n)]
        return N, roots, [vec([1] * N)], chamber, simples
    if label in ("B", "C", "D", "BC"):
        roots = _signed_pairs(n, range(n))
        if label in ("B", "BC"):
            roots += [_e(n, (i, s)) for i in range(n) for s in (1, -1)]
        if label in ("C", "BC"):
            roots += [_e(n, (i, 2 * s)) for i in range(n) for s in (1, -1)]
        chamber = vec(range(n, 0, -1))
        simples = [_e(n, (i, 1), (i + 1, -1)) for i in range(n - 1)]
        last = {"B": _e(n, (n - 1, 1)), "C": _e(n, (n - 1, 2)),
                "D": _e(n, (n - 2, 1), (n - 1, 1)), "BC": _e(n, (n - 1, 1))}[label]
        return n, roots, [], chamber, simples + [last]
    if label == "F4":
        roots = _signed_pairs(4, range(4)) + [_e(4, (i, s)) for i in range(4) for s in (1, -1)]
        roots += [tuple(h * s for s in signs) for signs in itertools.product((1, -1), repeat=4)]
        simples = [vec(h, -h, -h, -h), _e(4, (3, 1)), _e(4, (2, 1), (3, -1)), _e(4, (1, 1), (2, -1))]
        return 4, roots, [], vec(8, 3, 2, 1), simples
    if label == "G2":
        third = Fraction(1, 3)
        roots = [_e(3, (a, 1), (b, -1)) for a in range(3) for b in range(3) if a != b]
        for i in range(3):
            proj = tuple((1 if j == i else 0) - third for j in range(3))
            roots += [proj, tuple(-x for x in proj)]
        simples = [_e(3, (0, 1), (1, -1)), vec(-third, 2 * third, -third)]
        return 3, roots, [vec(1, 1, 1)], vec(3, 2, -5), simples
    if label == "E8":
        simples = [vec(h, -h, -h, -h, -h, -h, -h, h), _e(8, (0, 1), (1, 1))]
        simples += [_e(8, (j - 1, 1), (j - 2, -1)) for j in range(2, 8)]
        return 8, _e8_roots(), [], vec(0, 1, 2, 3, 4, 5, 6, 23), simples
    if label == "E7":
        normals = [_e(8, (6, 1), (7, 1))]
        roots = [r for r in _e8_roots() if all(dot(r, m) == 0 for m in normals)]
        return 8, roots, normals, vec(6, 5, 4, 3, 2, 1, 11, -11), None
    if label == "E6":
        normals = [_e(8, (6, 1), (7, 1)), _e(8, (5, 1), (6, -1))]
        roots = [r for r in _e8_roots() if all(dot(r, m) == 0 for m in normals)]
        return 8, roots, normals, vec(5, 4, 3, 2, 1, 6, 6, -6), None
    raise RootSystemError(f"unknown root system label {label!r}")


def _orbit_names(label: str, roots: Sequence[RatVec]) -> list[str]:
    lengths = sorted({norm2(r) for r in roots})
    if label == "BC":
        names = dict(zip(lengths, ("short", "medium", "long")))
    elif len(lengths) == 1:
        names = {lengths[0]: "all"}
    else:
        names = dict(zip(lengths, ("short", "long")))
    return [names[norm2(r)] for r in roots]


def _indecomposables(positives: Sequence[RatVec]) -> set[RatVec]:
    pos = set(positives)
    sums = {add(a, b) for a in positives for b in positives}
    return {r for r in pos if r not in sums}


def _validate_rank(label: str, rank: int | None) -> int:
    if label not in LABELS:
        raise RootSystemError(f"unknown root system label {label!r}; expected one of {LABELS}")
    if label in FIXED_RANK:
        if rank is not None and rank != FIXED_RANK[label]:
            raise RootSystemError(f"{label} has rank {FIXED_RANK[label]}, not {rank}")
        return FIXED_RANK[label]
    if rank is None or int(rank) < MIN_RANK[label]:
        raise RootSystemError(f"type {label} requires rank >= {MIN_RANK[label]}, got {rank}")
    return int(rank)


def normalize_label(label: str, rank: int | None = None) -> tuple[str, int]:
    """Accept ``("E", 7)``, ``("E7", None)``, ``("B", 3)`` and similar spellings."""
    label = label.strip().upper()
    if label in ("E", "F", "G") and rank is not None:
        label = f"{label}{rank}"
    return label, _validate_rank(label, rank)


@lru_cache(maxsize=None)
def _build(label: str, rank: int, profile: tuple) -> WeightedRootSystem:
    ambient, raw_roots, normals, chamber, preferred = _raw(label, rank)
    raw_roots = sorted(set(raw_roots))
    orbits = _orbit_names(label, raw_roots)
    known = set(orbits)
    prof = dict(profile)
    default = prof.pop("*", 1)
    for key, val in prof.items():
        if key not in known:
            raise RootSystemError(
                f"{label}{rank}: unknown orbit {key!r} in multiplicity profile; orbits are {sorted(known)}")
    mult = [int(prof.get(o, default)) for o in orbits]
    if any(m <= 0 for m in mult):
        raise RootSystemError("multiplicities must be positive integers")

    roots = tuple(Root(r, scale(Fraction(2) / norm2(r), r)) for r in raw_roots)
    index = {r: i for i, r in enumerate(raw_roots)}
    for r in raw_roots:
        if dot(r, chamber) == 0:
            raise RootSystemError(f"chamber vector of {label}{rank} is not regular")
    positives = tuple(i for i, r in enumerate(raw_roots) if dot(r, chamber) > 0)
    simple_set = _indecomposables([raw_roots[i] for i in positives])
    if preferred is None:
        preferred = sorted(simple_set, reverse=True)
    if set(preferred) != simple_set or len(preferred) != rank:
        raise AssertionError(f"{label}{rank}: preferred simple roots disagree with the chamber")
    simples = tuple(index[r] for r in preferred)
    return WeightedRootSystem(
        label=label, rank=rank, ambient_dim=ambient,
        subspace_basis=tuple(preferred), normals=tuple(normals), chamber=chamber,
        roots=roots, positives=positives, simples=simples,
        mult=tuple(mult), orbit=tuple(orbits), _index=index)


def build_root_system(label: str, rank: int | None = None,
                      mult_profile: Mapping[str, int] | int | None = None) -> WeightedRootSystem:
    """Construct the weighted root system of the given type.

    ``mult_profile`` maps orbit names (``"short"``, ``"long"``, ``"medium"``
    for BC, ``"all"`` for simply-laced types) to multiplicities; an ``int``
    sets every multiplicity.
    """
    label, rank = normalize_label(label, rank)
    if mult_profile is None:
        profile: tuple = ()
    elif isinstance(mult_profile, int):
        profile = (("*", mult_profile),)
    else:
        profile = tuple(sorted((str(k), int(v)) for k, v in mult_profile.items()))
    if any(v <= 0 for _, v in profile):
        raise RootSystemError("multiplicities must be positive integers")
    return _build(label, rank, profile)


# ---------------------------------------------------------------------------
# evaluation


def pairing(rs: WeightedRootSystem, root_index: int, v: RatVec) -> Fraction:
    v = rs.check(v)
    return dot(rs.roots[root_index].functional, v)


def reflect(rs: WeightedRootSystem, root_index: int, v: RatVec) -> RatVec:
    root = rs.roots[root_index]
    return sub(v, scale(dot(root.functional, v), root.coroot))


def dominant_representative(rs: WeightedRootSystem, v: RatVec) -> RatVec:
    """Reflect at the lowest-index negative simple root until none is negative."""
    v = rs.check(v)
    simples = [(i, rs.roots[i]) for i in rs.simples]
    while True:
        for _, root in simples:
            val = dot(root.functional, v)
            if val < 0:
                v = sub(v, scale(val, root.coroot))
                break
        else:
            return v


def weighted_pos_sum(rs: WeightedRootSystem, v: RatVec, use_abs: bool = False) -> Fraction:
    v = rs.check(v)
    total = Fraction(0)
    for i in rs.positives:
        val = dot(rs.roots[i].functional, v)
        total += rs.mult[i] * (abs(val) if use_abs else val)
    return total


def two_rho(rs: WeightedRootSystem) -> RatVec:
    """Sum of positive roots, every multiplicity taken as 1."""
    out = (Fraction(0),) * rs.ambient_dim
    for i in rs.positives:
        out = add(out, rs.roots[i].functional)
    return out


def rho_pairing(rs: WeightedRootSystem, v: RatVec) -> Fraction:
    v = rs.check(v)
    return dot(two_rho(rs), v) / 2


def degree_of_singularity(rs: WeightedRootSystem, v: RatVec) -> int:
    v = rs.check(v)
    return sum(rs.mult[i] for i in rs.positives if dot(rs.roots[i].functional, v) == 0)


def is_regular(rs: WeightedRootSystem, v: RatVec) -> bool:
    return degree_of_singularity(rs, v) == 0


# ---------------------------------------------------------------------------
# lattices and centre


def _basis_from(vectors: Sequence[RatVec]) -> tuple[RatVec, ...]:
    rows, den = to_integer_rows(list(vectors))
    return tuple(tuple(Fraction(a, den) for a in r) for r in hnf_rows(rows))


@lru_cache(maxsize=None)
def _coroot_basis(label: str, rank: int) -> tuple[RatVec, ...]:
    rs = build_root_system(label, rank)
    return _basis_from([r.coroot for r in rs.roots])


@lru_cache(maxsize=None)
def _central_basis(label: str, rank: int) -> tuple[RatVec, ...]:
    # dual of the root lattice inside V: (P P^T)^{-1} P with P a root-lattice basis
    rs = build_root_system(label, rank)
    p = _basis_from([r.functional for r in rs.roots])
    ppt = [[dot(a, b) for b in p] for a in p]
    inv = rational_inverse(ppt)
    dual = [tuple(sum((inv[i][k] * p[k][j] for k in range(len(p))), Fraction(0))
                  for j in range(rs.ambient_dim)) for i in range(len(p))]
    return _basis_from(dual)


def coroot_lattice_basis(rs: WeightedRootSystem) -> tuple[RatVec, ...]:
    return _coroot_basis(rs.label, rs.rank)


def central_lattice_basis(rs: WeightedRootSystem) -> tuple[RatVec, ...]:
    return _central_basis(rs.label, rs.rank)


def coordinates(basis: Sequence[RatVec], v: RatVec) -> tuple[Fraction, ...] | None:
    """Coordinates of ``v`` in a (linearly independent) basis, exactly."""
    b = sympy.Matrix([[sympy.Rational(a.numerator, a.denominator) for a in row] for row in basis]).T
    t = sympy.Matrix([sympy.Rational(a.numerator, a.denominator) for a in v])
    try:
        sol, params = b.gauss_jordan_solve(t)
    except ValueError:
        return None
    if params.shape[0]:
        raise ValueError("basis is not linearly independent")
    return tuple(frac(x) for x in sol)


def center_structure(rs: WeightedRootSystem) -> tuple[FiniteAbelianGroup, tuple[RatVec, ...]]:
    """Invariant factors of ``Lambda_Z / Lambda_coroot`` with lifted generators."""
    return _center(rs.label, rs.rank)


@lru_cache(maxsize=None)
def _center(label: str, rank: int) -> tuple[FiniteAbelianGroup, tuple[RatVec, ...]]:
    rs = build_root_system(label, rank)
    zb = central_lattice_basis(rs)
    cb = coroot_lattice_basis(rs)
    m = []
    for c in cb:
        x = coordinates(zb, c)
        if x is None or any(a.denominator != 1 for a in x):
            raise AssertionError("coroot lattice is not contained in the central lattice")
        m.append([int(a) for a in x])
    s, _left, right = smith_normal_form(m)
    rinv = sympy.Matrix(right).inv()
    factors, gens = [], []
    for i in range(len(s)):
        d = abs(s[i][i])
        if d > 1:
            factors.append(d)
            row = [int(rinv[i, j]) for j in range(rinv.cols)]
            g = (Fraction(0),) * rs.ambient_dim
            for k, cval in enumerate(row):
                g = add(g, scale(cval, zb[k]))
            gens.append(g)
    return FiniteAbelianGroup(tuple(factors)), tuple(gens)


# ---------------------------------------------------------------------------
# named centre classes


def named_vector(rs: WeightedRootSystem, symbol: str) -> RatVec:
    """Ambient vector of a named generator: ``L<j>``, ``e<j>``, ``F``."""
    n, N = rs.rank, rs.ambient_dim
    m = re.fullmatch(r"([LeF])(\d*)", symbol)
    if not m:
        raise RootSystemError(f"unknown centre symbol {symbol!r}")
    kind, idx = m.group(1), m.group(2)
    if kind == "L":
        if rs.label != "A" or not idx or not 1 <= int(idx) <= N:
            raise RootSystemError(f"L<j> classes exist only for type A (got {symbol!r} for {rs.name})")
        j = int(idx) - 1
        return tuple(Fraction(1 if k == j else 0) - Fraction(1, N) for k in range(N))
    if kind == "e":
        if not idx or not 1 <= int(idx) <= N:
            raise RootSystemError(f"coordinate index out of range in {symbol!r}")
        return _e(N, (int(idx) - 1, 1))
    if idx:
        raise RootSystemError(f"unknown centre symbol {symbol!r}")
    h = Fraction(1, 2)
    if rs.label in ("C", "D"):
        return tuple(h for _ in range(N))
    if rs.label == "E7":
        return vec(1, 1, 1, 0, 0, 0, h, -h)
    if rs.label == "E6":
        t = Fraction(2, 3)
        return vec(0, 0, 0, 0, 0, t, t, -t)
    raise RootSystemError(f"no F class is defined for type {rs.name}")


_TERM = re.compile(r"\s*([+-]?)\s*(\d*)\s*\*?\s*([A-Za-z]\d*)\s*")


def center_class_vector(rs: WeightedRootSystem, text: str) -> RatVec:
    """Parse a centre-class descriptor such as ``"2L1"`` or ``"e1+F"``.

    ``"0"``, ``"1"`` and ``"trivial"`` denote the identity class.  The result
    must lie in the central lattice, otherwise it does not name an element of
    the centre and is rejected.
    """
    text = str(text).strip()
    zero_vec = (Fraction(0),) * rs.ambient_dim
    if text in ("0", "1", "trivial", ""):
        return zero_vec
    pos, total = 0, zero_vec
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise RootSystemError(f"cannot parse centre class {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        coeff = int(m.group(2)) if m.group(2) else 1
        total = add(total, scale(sign * coeff, named_vector(rs, m.group(3))))
        pos = m.end()
    rs.check(total)
    zb = central_lattice_basis(rs)
    x = coordinates(zb, total)
    if x is None or any(a.denominator != 1 for a in x):
        raise RootSystemError(f"{text!r} is not an element of the centre of {rs.name}")
    return total


def center_generators(rs: WeightedRootSystem, descriptors: Sequence[str]) -> list[RatVec]:
    """Lift a list of descriptors; ``"full"`` expands to the centre's generators."""
    out = []
    for d in descriptors:
        if str(d).strip() == "full":
            out.extend(center_structure(rs)[1])
        else:
            out.append(center_class_vector(rs, d))
    return out


def root_datum(rs: WeightedRootSystem) -> dict:
    """Canonical JSON-ready description (roots sorted lexicographically)."""
    group, gens = center_structure(rs)
    return {
        "label": rs.label,
        "rank": rs.rank,
        "ambient_dim": rs.ambient_dim,
        "root_count": len(rs.roots),
        "positive_count": len(rs.positives),
        "roots": [
            {"functional": fmt_vec(r.functional), "coroot": fmt_vec(r.coroot),
             "positive": i in set(rs.positives), "orbit": rs.orbit[i], "mult": rs.mult[i]}
            for i, r in enumerate(rs.roots)
        ],
        "simples": [fmt_vec(rs.roots[i].functional) for i in rs.simples],
        "two_rho": fmt_vec(two_rho(rs)),
        "coroot_lattice": [fmt_vec(b) for b in coroot_lattice_basis(rs)],
        "central_lattice": [fmt_vec(b) for b in central_lattice_basis(rs)],
        "center": list(group.invariant_factors),
        "center_generators": [fmt_vec(g) for g in gens],
    }
