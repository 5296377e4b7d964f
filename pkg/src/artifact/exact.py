"""Exact rational and quadratic-surd arithmetic shared by every module.

Vectors are plain tuples of :class:`fractions.Fraction`.  Integer normal
forms are delegated to :mod:`sympy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

import sympy
from sympy.matrices.normalforms import hermite_normal_form
from sympy.matrices.normalforms import smith_normal_decomp

RatVec = tuple  # tuple[Fraction, ...]
Rational = Union[int, Fraction]


def frac(x) -> Fraction:
    """Coerce ints, Fractions, strings like ``"3/4"`` and sympy rationals."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, float):
        raise TypeError(f"refusing to convert float {x!r} to an exact rational")
    raise TypeError(f"cannot interpret {x!r} as a rational")


def vec(*xs) -> RatVec:
    if len(xs) == 1 and not isinstance(xs[0], (int, Fraction, str)):
        xs = tuple(xs[0])
    return tuple(frac(x) for x in xs)


def zero(n: int) -> RatVec:
    return (Fraction(0),) * n


def add(u: RatVec, w: RatVec) -> RatVec:
    return tuple(a + b for a, b in zip(u, w))


def sub(u: RatVec, w: RatVec) -> RatVec:
    return tuple(a - b for a, b in zip(u, w))


def scale(c, u: RatVec) -> RatVec:
    c = frac(c)
    return tuple(c * a for a in u)


def neg(u: RatVec) -> RatVec:
    return tuple(-a for a in u)


def dot(u: RatVec, w: RatVec) -> Fraction:
    return sum((a * b for a, b in zip(u, w)), Fraction(0))


def norm2(u: RatVec) -> Fraction:
    return dot(u, u)


def is_zero(u: RatVec) -> bool:
    return all(a == 0 for a in u)


def lcm_denominator(values: Iterable[Fraction]) -> int:
    return reduce(math.lcm, (frac(v).denominator for v in values), 1)


def fmt_rational(x) -> str:
    """Canonical string: ``"p/q"`` or ``"p"`` for integers."""
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_vec(u: RatVec) -> list[str]:
    return [fmt_rational(a) for a in u]


# ---------------------------------------------------------------------------
# matrices


def to_integer_rows(rows: Sequence[RatVec]) -> tuple[list[list[int]], int]:
    """Scale a rational matrix to integers, returning (rows, denominator)."""
    den = lcm_denominator(a for r in rows for a in r)
    return [[int(a * den) for a in r] for r in rows], den


def leading_minors(gram: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Exact leading principal minors, by fraction-valued Gaussian elimination."""
    n = len(gram)
    m = [[frac(x) for x in row] for row in gram]
    minors: list[Fraction] = []
    det = Fraction(1)
    for k in range(n):
        pivot = m[k][k]
        det *= pivot
        minors.append(det)
        if pivot == 0:
            minors.extend([Fraction(0)] * (n - k - 1))
            return minors
        for i in range(k + 1, n):
            f = m[i][k] / pivot
            if f:
                for j in range(k, n):
                    m[i][j] -= f * m[k][j]
    return minors


def schur_complement(gram: Sequence[Sequence[Fraction]], k: int) -> list[list[Fraction]]:
    """Schur complement of the leading ``k x k`` block (eliminates coords < k)."""
    n = len(gram)
    m = [[frac(x) for x in row] for row in gram]
    for p in range(k):
        pivot = m[p][p]
        for i in range(p + 1, n):
            f = m[i][p] / pivot
            if f:
                for j in range(p, n):
                    m[i][j] -= f * m[p][j]
    return [row[k:] for row in m[k:]]


def rational_inverse(mat: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    inv = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in map(frac, row)]
                        for row in mat]).inv()
    return [[frac(inv[i, j]) for j in range(inv.cols)] for i in range(inv.rows)]


def hnf_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Canonical integer basis (as rows) of the row lattice of an integer matrix.

    Uses sympy's column Hermite normal form on the transpose, so the result is
    unique for a given lattice.  Zero rows in the input are harmless.
    """
    mat = sympy.Matrix(rows).T
    h = hermite_normal_form(mat)
    out = [[int(h[i, j]) for i in range(h.rows)] for j in range(h.cols)]
    return [r for r in out if any(r)]


def smith_normal_form(mat: Sequence[Sequence[int]]):
    """Return ``(S, left, right)`` with ``left * M * right == S`` diagonal."""
    m = sympy.Matrix(mat)
    s, left, right = smith_normal_decomp(m)
    as_list = lambda a: [[int(a[i, j]) for j in range(a.cols)] for i in range(a.rows)]
    return as_list(s), as_list(left), as_list(right)


def solve_in_span(basis: Sequence[RatVec], v: RatVec) -> RatVec | None:
    """Coefficients ``x`` with ``sum x_i basis_i == v`` or ``None``."""
    b = sympy.Matrix([[sympy.Rational(a.numerator, a.denominator) for a in row] for row in basis]).T
    target = sympy.Matrix([sympy.Rational(a.numerator, a.denominator) for a in v])
    try:
        sol, params = b.gauss_jordan_solve(target)
    except ValueError:
        return None
    if params.shape[0]:
        sol = sol.subs({p: 0 for p in params})
    return tuple(frac(sympy.nsimplify(s)) for s in sol)


# ---------------------------------------------------------------------------
# quadratic surds


def _squarefree_split(d: int) -> tuple[int, int]:
    """Write ``d = k**2 * m`` with ``m`` squarefree; return ``(k, m)``."""
    k, m = 1, 1
    for p, e in sympy.factorint(d).items():
        k *= p ** (e // 2)
        m *= p ** (e % 2)
    return k, m


@dataclass(frozen=True)
class SurdScalar:
    """An element ``q + r*sqrt(d)`` of a real quadratic field (or of Q)."""

    q: Fraction
    r: Fraction = Fraction(0)
    d: int = 1

    def __post_init__(self):
        q, r, d = frac(self.q), frac(self.r), int(self.d)
        if d < 1:
            raise ValueError("surd radicand must be a positive integer")
        if r != 0 and d > 1:
            k, d = _squarefree_split(d)
            r *= k
        if d == 1:
            q, r = q + r, Fraction(0)
        if r == 0:
            d = 1
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "d", d)

    # -- construction ------------------------------------------------------
    @classmethod
    def of(cls, x) -> "SurdScalar":
        if isinstance(x, SurdScalar):
            return x
        if isinstance(x, dict):
            return cls(frac(x.get("q", 0)), frac(x.get("r", 0)), int(x.get("d", 1)))
        if isinstance(x, str):
            return parse_surd(x)
        return cls(frac(x))

    @property
    def is_rational(self) -> bool:
        return self.r == 0

    def _field(self, other: "SurdScalar") -> int:
        if self.d != 1 and other.d != 1 and self.d != other.d:
            raise ValueError(f"mixed quadratic fields Q(sqrt {self.d}) and Q(sqrt {other.d})")
        return max(self.d, other.d)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        o = SurdScalar.of(other)
        return SurdScalar(self.q + o.q, self.r + o.r, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return SurdScalar(-self.q, -self.r, self.d)

    def __sub__(self, other):
        return self + (-SurdScalar.of(other))

    def __rsub__(self, other):
        return SurdScalar.of(other) - self

    def __mul__(self, other):
        o = SurdScalar.of(other)
        d = self._field(o)
        return SurdScalar(self.q * o.q + self.r * o.r * d, self.q * o.r + self.r * o.q, d)

    __rmul__ = __mul__

    def conjugate(self) -> "SurdScalar":
        return SurdScalar(self.q, -self.r, self.d)

    def field_norm(self) -> Fraction:
        return self.q * self.q - self.r * self.r * self.d

    def inverse(self) -> "SurdScalar":
        n = self.field_norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        c = self.conjugate()
        return SurdScalar(c.q / n, c.r / n, self.d)

    def __truediv__(self, other):
        return self * SurdScalar.of(other).inverse()

    def __rtruediv__(self, other):
        return SurdScalar.of(other) * self.inverse()

    def __pow__(self, k: int):
        out = SurdScalar(Fraction(1))
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    # -- order -------------------------------------------------------------
    def sign(self) -> int:
        sq = (self.q > 0) - (self.q < 0)
        sr = (self.r > 0) - (self.r < 0)
        if sr == 0:
            return sq
        if sq == 0 or sq == sr:
            return sr
        # opposite signs: compare q^2 with r^2 d
        diff = self.q * self.q - self.r * self.r * self.d
        return sq if diff > 0 else sr

    def __eq__(self, other):
        try:
            o = SurdScalar.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self.q, self.r, self.d) == (o.q, o.r, o.d)

    def __hash__(self):
        return hash((self.q, self.r, self.d))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self):
        return float(self.q) + float(self.r) * math.sqrt(self.d)

    # -- helpers -----------------------------------------------------------
    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.q

    def to_sympy(self):
        q = sympy.Rational(self.q.numerator, self.q.denominator)
        if self.is_rational:
            return q
        r = sympy.Rational(self.r.numerator, self.r.denominator)
        return q + r * sympy.sqrt(self.d)

    def to_json(self):
        return {"q": fmt_rational(self.q), "r": fmt_rational(self.r), "d": self.d}

    def __str__(self):
        if self.is_rational:
            return fmt_rational(self.q)
        return f"{fmt_rational(self.q)}+{fmt_rational(self.r)}*sqrt({self.d})"

    def __repr__(self):
        return f"SurdScalar({self})"


def parse_surd(text: str) -> SurdScalar:
    """Parse ``"3/4"``, ``"sqrt(2)"``, ``"1+2*sqrt(3)/5"`` or ``"p/q:surd d"``.

    The ``p/q:surd d`` form means ``(p/q)*sqrt(d)``.
    """
    text = text.strip()
    if ":surd" in text:
        coeff, d = text.split(":surd")
        return SurdScalar(Fraction(0), frac(coeff), int(d))
    expr = sympy.expand(sympy.sympify(text, rational=True))
    q, r, d = Fraction(0), Fraction(0), 1
    for term in sympy.Add.make_args(expr):
        c, rest = term.as_coeff_Mul()
        if not c.is_Rational:
            raise ValueError(f"cannot parse {text!r} as a quadratic surd")
        if rest == 1:
            q += frac(c)
            continue
        if rest.is_Pow and rest.exp == sympy.Rational(1, 2) and rest.base.is_Integer:
            rd = int(rest.base)
            if d not in (1, rd):
                raise ValueError(f"{text!r} mixes two quadratic fields")
            d = rd
            r += frac(c)
            continue
        raise ValueError(f"cannot parse {text!r} as a quadratic surd")
    return SurdScalar(q, r, d)


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or ``None``."""
    x = frac(x)
    if x < 0:
        return None
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None
