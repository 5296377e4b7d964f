"""Integer lattices: canonical bases, integral lattices and exact short-vector enumeration.

The enumerator is a Fincke-Pohst style layered search.  For every layer the
Schur complement of the Gram matrix is scaled to integers, so the test
``a x^2 + 2 b x + c <= N`` that bounds the next coordinate is carried out in
exact integer arithmetic, vectorised over all partial vectors with numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
import sympy

from . import exact
from .exact import RatVec, dot, frac, lcm_denominator, leading_minors, schur_complement
from .rootsys import (
    WeightedRootSystem,
    build_root_system,
    center_generators,
    central_lattice_basis,
    coordinates,
    coroot_lattice_basis,
)

_INT64_SAFE = 2**62


class LatticeError(ValueError):
    pass


class IndefiniteFormError(LatticeError):
    """Raised when a Gram matrix fails the exact leading-minor test."""

    def __init__(self, minor_index: int, value: Fraction):
        self.minor_index = minor_index
        self.value = value
        super().__init__(
            f"quadratic form is not positive definite: leading minor {minor_index} "
            f"equals {exact.fmt_rational(value)}")


@dataclass(frozen=True)
class IntegerLattice:
    """A lattice given by a canonical (Hermite normal form) basis."""

    basis: tuple[RatVec, ...]
    ambient_dim: int

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coords(self, v: RatVec) -> tuple[Fraction, ...] | None:
        return coordinates(self.basis, exact.vec(v))

    def contains(self, v: RatVec) -> bool:
        x = self.coords(v)
        return x is not None and all(a.denominator == 1 for a in x)

    def contains_lattice(self, other: "IntegerLattice") -> bool:
        return all(self.contains(b) for b in other.basis)

    def index_of(self, sub: "IntegerLattice") -> int:
        """Index ``[self : sub]`` for a full-rank sublattice."""
        if sub.rank != self.rank or not self.contains_lattice(sub):
            raise LatticeError("index requires a full-rank sublattice")
        m = sympy.Matrix([[int(a) for a in self.coords(b)] for b in sub.basis])
        return abs(int(m.det()))

    def gram(self, inner=dot) -> list[list[Fraction]]:
        return [[inner(a, b) for b in self.basis] for a in self.basis]

    def vector(self, x: Sequence[int]) -> RatVec:
        out = (Fraction(0),) * self.ambient_dim
        for c, b in zip(x, self.basis):
            if c:
                out = exact.add(out, exact.scale(int(c), b))
        return out

    def to_ambient(self, xs: np.ndarray) -> list[RatVec]:
        """Map an integer coefficient array (rows) to ambient rational vectors."""
        rows, den = exact.to_integer_rows(list(self.basis))
        bint = np.array(rows, dtype=object)
        out = (np.asarray(xs, dtype=object) @ bint) if len(xs) else np.zeros((0, self.ambient_dim))
        return [tuple(Fraction(int(a), den) for a in row) for row in out]

    def __eq__(self, other):
        return isinstance(other, IntegerLattice) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)


@dataclass(frozen=True)
class QuadraticForm:
    """A symmetric rational Gram matrix, verified positive definite on construction."""

    gram: tuple[tuple[Fraction, ...], ...]

    def __init__(self, gram):
        g = tuple(tuple(frac(x) for x in row) for row in gram)
        n = len(g)
        if any(len(row) != n for row in g):
            raise LatticeError("Gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise LatticeError("Gram matrix must be symmetric")
        for k, m in enumerate(leading_minors(g), start=1):
            if m <= 0:
                raise IndefiniteFormError(k, m)
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return len(self.gram)

    def __call__(self, x: Sequence) -> Fraction:
        n = self.dim
        return sum((self.gram[i][j] * x[i] * x[j] for i in range(n) for j in range(n)), Fraction(0))


# ---------------------------------------------------------------------------
# construction


def lattice_from_generators(gens: Sequence[RatVec]) -> IntegerLattice:
    gens = [exact.vec(g) for g in gens]
    if not gens:
        raise LatticeError("a lattice needs at least one generator")
    dims = {len(g) for g in gens}
    if len(dims) != 1:
        raise LatticeError("generators have inconsistent dimensions")
    rows, den = exact.to_integer_rows(gens)
    basis = tuple(tuple(Fraction(a, den) for a in r) for r in exact.hnf_rows(rows))
    if not basis:
        raise LatticeError("generators span the zero lattice")
    return IntegerLattice(basis, dims.pop())


def coroot_lattice(rs: WeightedRootSystem) -> IntegerLattice:
    return IntegerLattice(coroot_lattice_basis(rs), rs.ambient_dim)


def central_lattice(rs: WeightedRootSystem) -> IntegerLattice:
    return IntegerLattice(central_lattice_basis(rs), rs.ambient_dim)


def integral_lattice_of(rs: WeightedRootSystem, gamma: Sequence[str] = ()) -> IntegerLattice:
    """Preimage of the centre subgroup generated by ``gamma`` (descriptor strings)."""
    gens = list(coroot_lattice_basis(rs)) + center_generators(rs, list(gamma))
    lat = lattice_from_generators(gens)
    if not (lat.contains_lattice(coroot_lattice(rs)) and central_lattice(rs).contains_lattice(lat)):
        raise AssertionError("integral lattice escaped the coroot/central sandwich")
    return lat


def integral_lattice(factor_type: str, rank: int | None, gamma: Sequence[str] = ()) -> IntegerLattice:
    """Integral lattice of ``U~ / Gamma`` for a simple group type."""
    return integral_lattice_of(build_root_system(factor_type, rank), gamma)


def product_integral_lattice(factors: Sequence[tuple[WeightedRootSystem, Sequence[str]]],
                             torus_dim: int = 0,
                             gamma_generators: Sequence[Sequence[str]] = ()) -> IntegerLattice:
    """Integral lattice of ``(T^d x prod U~_j) / Gamma`` in the orthogonal direct sum.

    Ambient coordinates are the torus coordinates followed by each factor's
    ambient coordinates.  Each entry of ``gamma_generators`` is a tuple with
    one centre-class descriptor per factor, optionally preceded by a torus
    entry, which must be ``"0"`` because Gamma meets the torus trivially.
    """
    dims = [rs.ambient_dim for rs, _ in factors]
    total = torus_dim + sum(dims)
    offsets = [torus_dim + sum(dims[:j]) for j in range(len(dims))]

    def embed(j: int, v: RatVec) -> RatVec:
        out = [Fraction(0)] * total
        out[offsets[j]:offsets[j] + dims[j]] = v
        return tuple(out)

    gens: list[RatVec] = []
    for i in range(torus_dim):
        gens.append(tuple(Fraction(1 if k == i else 0) for k in range(total)))
    for j, (rs, own) in enumerate(factors):
        gens.extend(embed(j, v) for v in integral_lattice_of(rs, own).basis)
    for tup in gamma_generators:
        tup = [str(t) for t in tup]
        if len(tup) == len(factors) + 1 and torus_dim:
            torus_part, tup = tup[0], tup[1:]
            if torus_part.strip() not in ("0", "trivial"):
                raise LatticeError("Gamma must meet the torus trivially: torus components must be 0")
        if len(tup) != len(factors):
            raise LatticeError(
                f"product generator {tup} has arity {len(tup)}, expected {len(factors)}")
        v = (Fraction(0),) * total
        for j, ((rs, _), d) in enumerate(zip(factors, tup)):
            w = center_generators(rs, [d])
            if len(w) != 1:
                raise LatticeError("'full' is not allowed inside a product generator tuple")
            v = exact.add(v, embed(j, w[0]))
        gens.append(v)
    if not gens:
        raise LatticeError("empty space")
    return lattice_from_generators(gens)


def smith_normal_form(m):
    """``(S, left, right)`` with ``left * M * right == S``; see :mod:`artifact.exact`."""
    return exact.smith_normal_form(m)


# ---------------------------------------------------------------------------
# enumeration


@dataclass(frozen=True)
class _Layer:
    a: int
    cross: tuple[int, ...]          # coupling of the new coordinate to the tail
    tail: tuple[tuple[int, ...], ...]
    bound: int


def _plan(gram: Sequence[Sequence[Fraction]], bound: Fraction) -> tuple[list[_Layer], bool]:
    n = len(gram)
    layers = []
    biggest = 0
    for k in range(n):
        s = schur_complement(gram, k)
        m = lcm_denominator([x for row in s for x in row] + [bound])
        si = [[int(x * m) for x in row] for row in s]
        nk = int(bound * m)
        layers.append(_Layer(si[0][0], tuple(si[0][1:]), tuple(tuple(r[1:]) for r in si[1:]), nk))
        biggest = max([biggest, abs(nk)] + [abs(x) for row in si for x in row])
    inv = exact.rational_inverse(gram)
    box = max(math.isqrt(int(bound * inv[i][i])) + 1 for i in range(n))
    # magnitudes seen in b^2 and a*N must fit comfortably in int64
    use_object = (biggest * n * box) ** 2 * 4 > _INT64_SAFE or biggest * biggest * 4 > _INT64_SAFE
    return layers, use_object


def _isqrt_vec(x: np.ndarray) -> np.ndarray:
    if x.dtype == object:
        return np.array([math.isqrt(int(v)) for v in x], dtype=object)
    r = np.floor(np.sqrt(x.astype(np.float64))).astype(np.int64)
    while True:
        hi = (r + 1) * (r + 1) <= x
        if not hi.any():
            break
        r = r + hi
    while True:
        lo = r * r > x
        if not lo.any():
            break
        r = r - lo
    return r


def _extend(layer: _Layer, tails: np.ndarray, dtype) -> np.ndarray:
    """Add one coordinate in front of every partial vector in ``tails``."""
    a, N = layer.a, layer.bound
    if tails.shape[1]:
        cross = np.array(layer.cross, dtype=dtype)
        tmat = np.array(layer.tail, dtype=dtype)
        b = tails @ cross
        c = np.einsum("ij,ij->i", tails @ tmat, tails) if dtype != object else \
            np.array([int(v) for v in ((tails @ tmat) * tails).sum(axis=1)], dtype=object)
    else:
        b = np.zeros(len(tails), dtype=dtype)
        c = np.zeros(len(tails), dtype=dtype)
    disc = b * b - a * (c - N)
    ok = disc >= 0
    tails, b, disc = tails[ok], b[ok], disc[ok]
    if not len(tails):
        return np.zeros((0, tails.shape[1] + 1), dtype=dtype)
    r = _isqrt_vec(disc)
    lo = -((b + r) // a)
    hi = (r - b) // a
    cnt = hi - lo + 1
    keep = cnt > 0
    tails, lo, cnt = tails[keep], lo[keep], cnt[keep]
    cnt_i = cnt.astype(np.int64)
    total = int(cnt_i.sum())
    owner = np.repeat(np.arange(len(tails)), cnt_i)
    starts = np.repeat(np.cumsum(cnt_i) - cnt_i, cnt_i)
    step = (np.arange(total) - starts)
    if dtype == object:
        step = step.astype(object)
    x = lo[owner] + step
    return np.column_stack([x.astype(dtype), tails[owner]]) if total else \
        np.zeros((0, tails.shape[1] + 1), dtype=dtype)


def iter_short_vector_chunks(gram: Sequence[Sequence], bound) -> Iterator[np.ndarray]:
    """Yield integer arrays (one per value of the last coordinate) of all ``x`` with
    ``x^T G x <= bound``, the zero vector included.  Exact."""
    g = QuadraticForm(gram).gram
    bound = frac(bound)
    n = len(g)
    if bound < 0:
        return
    layers, use_object = _plan(g, bound)
    dtype = object if use_object else np.int64
    top = layers[n - 1]
    start = np.zeros((1, 0), dtype=dtype)
    first = _extend(top, start, dtype)
    for value in first[:, 0]:
        block = np.array([[value]], dtype=dtype)
        for k in range(n - 2, -1, -1):
            block = _extend(layers[k], block, dtype)
            if not len(block):
                break
        if len(block):
            yield block


def _first_nonzero_positive(xs: np.ndarray) -> np.ndarray:
    nz = xs != 0
    has = nz.any(axis=1)
    first = np.argmax(nz, axis=1)
    vals = xs[np.arange(len(xs)), first]
    return has & (vals > 0)


def enumerate_coefficients(gram: Sequence[Sequence], bound, dedup: bool = True) -> np.ndarray:
    """All nonzero integer ``x`` with ``x^T G x <= bound``, canonically ordered.

    Ordering is by the value of the form, then lexicographically.  With
    ``dedup`` only the representative whose first nonzero entry is positive is
    kept from each ``+-x`` pair.
    """
    g = QuadraticForm(gram).gram
    n = len(g)
    chunks = list(iter_short_vector_chunks(g, bound))
    if not chunks:
        return np.zeros((0, n), dtype=np.int64)
    xs = np.concatenate(chunks)
    nonzero = (xs != 0).any(axis=1)
    xs = xs[nonzero]
    if dedup:
        xs = xs[_first_nonzero_positive(xs)]
    gi, den = exact.to_integer_rows([list(r) for r in g])
    gmat = np.array(gi, dtype=object)
    vals = np.array([int(v) for v in ((xs.astype(object) @ gmat) * xs.astype(object)).sum(axis=1)],
                    dtype=object) if len(xs) else np.zeros(0, dtype=object)
    order = sorted(range(len(xs)), key=lambda i: (vals[i], tuple(int(a) for a in xs[i])))
    return xs[order] if len(order) else xs


def enumerate_up_to(lat: IntegerLattice, q: QuadraticForm | None, bound, dedup: bool = True) -> list[RatVec]:
    """All nonzero lattice vectors with ``q <= bound`` as ambient rational vectors.

    ``q`` is a Gram matrix on the lattice basis; ``None`` means the ambient
    Euclidean form restricted to the lattice.
    """
    if q is None:
        q = QuadraticForm(lat.gram())
    elif not isinstance(q, QuadraticForm):
        q = QuadraticForm(q)
    if q.dim != lat.rank:
        raise LatticeError("form dimension does not match the lattice rank")
    xs = enumerate_coefficients(q.gram, bound, dedup=dedup)
    return lat.to_ambient(xs)
