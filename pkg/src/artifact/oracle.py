"""Floating-point verifiers for the exact machinery.

Everything here is deliberately independent of the exact modules: rotations
come from ``scipy.spatial.transform.Rotation``, the geodesic flow of a
left-invariant metric on SO(3) is integrated as a rigid body with
``scipy.integrate.solve_ivp``, and lattice enumeration is a plain box scan.

Coordinates on the Lie algebra are taken in the basis ``Theta_i =
hat(e_i)/sqrt(2)``, which is orthonormal for the bi-invariant metric of
constant curvature 1/8.  A body velocity ``w`` therefore moves the attitude
by ``R' = R hat(w) / sqrt(2)`` and a unit one-parameter subgroup closes after
``ELL0 = 2*sqrt(2)*pi``.  The metric ``g(alpha, alpha, A)`` is the inertia
tensor ``diag(alpha, alpha, A)`` in the same basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar
from scipy.spatial.transform import Rotation

from .exact import frac, rational_inverse

ELL0 = 2.0 * math.sqrt(2.0) * math.pi
SQRT2 = math.sqrt(2.0)

INTEGRATION_TOL = 1e-10
CLOSURE_TOL = 1e-9
EIGEN_TOL = 1e-5


class NumericGuardError(RuntimeError):
    """A numeric computation could not certify its own answer."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


def hat(w: Sequence[float]) -> np.ndarray:
    """Skew matrix with ``hat(w) @ x == cross(w, x)``."""
    x, y, z = (float(c) for c in w)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def theta(i: int) -> np.ndarray:
    """The bi-invariant orthonormal basis element ``Theta_i`` (i = 1, 2, 3)."""
    e = np.zeros(3)
    e[i - 1] = 1.0
    return hat(e) / SQRT2


def algebra_element(w: Sequence[float]) -> np.ndarray:
    """``sum_i w_i Theta_i`` as a skew matrix."""
    return hat(w) / SQRT2


def so3_exp(x: np.ndarray) -> np.ndarray:
    """Matrix exponential of a skew 3x3 matrix (Rodrigues)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (3, 3):
        raise ValueError("so3_exp expects a 3x3 matrix")
    if not np.allclose(x, -x.T, atol=1e-12 * max(1.0, np.abs(x).max())):
        raise ValueError("so3_exp expects a skew-symmetric matrix")
    return Rotation.from_rotvec(vee(x)).as_matrix()


def closure_residual(v: Sequence[float], w: Sequence[float], length: float) -> float:
    """Frobenius distance from ``exp(L V) exp(-L W)`` to the identity.

    ``v`` and ``w`` are given in Theta coordinates (3-vectors) or as skew
    matrices.
    """
    def as_matrix(x):
        arr = np.asarray(x, dtype=float)
        return arr if arr.shape == (3, 3) else algebra_element(arr)

    g = so3_exp(length * as_matrix(v)) @ so3_exp(-length * as_matrix(w))
    return float(np.linalg.norm(g - np.eye(3)))


@dataclass(frozen=True)
class Inertia:
    """Float view of ``g(alpha, alpha, A)``."""

    alpha: float
    A: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.A > 0):
            raise ValueError("metric parameters must be positive")

    @classmethod
    def of(cls, metric) -> "Inertia":
        if isinstance(metric, Inertia):
            return metric
        if isinstance(metric, tuple):
            return cls(float(metric[0]), float(metric[1]))
        return cls(float(metric.alpha), float(metric.A))

    @property
    def diag(self) -> np.ndarray:
        return np.array([self.alpha, self.alpha, self.A])

    def norm2(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(np.dot(self.diag * w, w))

    def unit(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return w / math.sqrt(self.norm2(w))


def geodesic_pair(metric, w: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Split a body velocity into ``(V, W)`` with geodesic ``exp(tV) exp(-tW)``."""
    inertia = Inertia.of(metric)
    w = np.asarray(w, dtype=float)
    ratio = inertia.A / inertia.alpha
    v_part = np.array([w[0], w[1], ratio * w[2]])
    w_part = np.array([0.0, 0.0, (ratio - 1.0) * w[2]])
    return v_part, w_part


@dataclass(frozen=True)
class FlowState:
    attitude: np.ndarray
    body_velocity: np.ndarray
    time: float = 0.0


def _euler_rhs(diag: np.ndarray):
    def rhs(_t, y):
        w = y[:3]
        r = y[3:12].reshape(3, 3)
        dw = np.cross(diag * w, w) / SQRT2 / diag
        dr = r @ hat(w) / SQRT2
        return np.concatenate([dw, dr.ravel()])

    return rhs


def euler_flow(metric, state: FlowState | Sequence[float], t: float,
               rtol: float = 1e-12, atol: float = 1e-13) -> FlowState:
    """Integrate the geodesic flow for time ``t`` from ``state``.

    A bare 3-vector is read as a body velocity starting at the identity.
    """
    inertia = Inertia.of(metric)
    if not isinstance(state, FlowState):
        state = FlowState(np.eye(3), np.asarray(state, dtype=float))
    y0 = np.concatenate([state.body_velocity, np.asarray(state.attitude).ravel()])
    if t == 0:
        return state
    sol = solve_ivp(_euler_rhs(inertia.diag), (0.0, t), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        last = float(sol.t[-1]) if len(sol.t) else 0.0
        raise NumericGuardError(f"integration failed at t={last}: {sol.message}",
                                {"last_good_time": last})
    y = sol.y[:, -1]
    return FlowState(y[3:12].reshape(3, 3), y[:3], state.time + t)


# -- linearized flow ---------------------------------------------------------

def _variational_rhs(diag: np.ndarray, ncols: int):
    """Flow plus linearization in left-trivialized coordinates.

    A perturbation is ``(xi, dw)`` with ``dR = R hat(xi)`` and ``dw`` the
    change of body velocity.
    """
    def rhs(_t, y):
        w = y[:3]
        r = y[3:12].reshape(3, 3)
        xi = y[12:12 + 3 * ncols].reshape(3, ncols)
        dw = y[12 + 3 * ncols:].reshape(3, ncols)
        m = diag * w
        w_dot = np.cross(m, w) / SQRT2 / diag
        r_dot = r @ hat(w) / SQRT2
        xi_dot = (np.cross(xi.T, w).T + dw) / SQRT2
        dm = diag[:, None] * dw
        dw_dot = ((np.cross(dm.T, w) + np.cross(m, dw.T)).T / SQRT2) / diag[:, None]
        return np.concatenate([w_dot, r_dot.ravel(), xi_dot.ravel(), dw_dot.ravel()])

    return rhs


def _linearized(inertia: Inertia, w0: np.ndarray, xi0: np.ndarray, dw0: np.ndarray, t_end: float,
                dense: bool = False):
    ncols = xi0.shape[1]
    y0 = np.concatenate([w0, np.eye(3).ravel(), xi0.ravel(), dw0.ravel()])
    sol = solve_ivp(_variational_rhs(inertia.diag, ncols), (0.0, t_end), y0, method="DOP853",
                    rtol=1e-12, atol=1e-13, dense_output=dense)
    if not sol.success:
        raise NumericGuardError(f"variational integration failed: {sol.message}",
                                {"last_good_time": float(sol.t[-1])})
    return sol


@dataclass
class MonodromyReport:
    fixed_dim: int
    kernel_dim: int
    singular_values: list[float]
    closure_residual: float
    velocity_residual: float
    scaling_chain_ok: bool
    tol: float

    def to_json(self) -> dict:
        return {
            "fixed_dim": self.fixed_dim,
            "kernel_dim": self.kernel_dim,
            "singular_values": [float(f"{s:.6e}") for s in self.singular_values],
            "closure_residual": float(f"{self.closure_residual:.3e}"),
            "velocity_residual": float(f"{self.velocity_residual:.3e}"),
            "scaling_chain_ok": self.scaling_chain_ok,
            "tol": self.tol,
        }


def monodromy_report(metric, v: Sequence[float], tau: float, tol: float = EIGEN_TOL) -> MonodromyReport:
    """Fixed space of the time-``tau`` linearized flow on the 6-dim tangent space.

    The kernel of ``M - I`` contains the tangent space of the fixed component
    (flow direction included).  The velocity-scaling direction is never fixed
    because the period depends on speed, but ``M - I`` maps it onto the flow
    direction, so it is a generalized eigenvector for eigenvalue 1.  The
    reported ``fixed_dim`` is the resulting algebraic count
    ``kernel_dim + 1``.
    """
    inertia = Inertia.of(metric)
    w0 = np.asarray(v, dtype=float)
    sol = _linearized(inertia, w0, np.hstack([np.eye(3), np.zeros((3, 3))]),
                      np.hstack([np.zeros((3, 3)), np.eye(3)]), tau)
    y = sol.y[:, -1]
    r_end = y[3:12].reshape(3, 3)
    closure = float(np.linalg.norm(r_end - np.eye(3)))
    vel = float(np.linalg.norm(y[:3] - w0))
    if closure > 1e-7 or vel > 1e-7:
        raise NumericGuardError("initial velocity does not close at the given period",
                                {"closure_residual": closure, "velocity_residual": vel})
    xi = y[12:30].reshape(3, 6)
    dw = y[30:48].reshape(3, 6)
    mono = np.vstack([xi, dw])
    diff = mono - np.eye(6)
    svals = np.linalg.svd(diff, compute_uv=False)
    straddling = [s for s in svals if tol / 100 <= s <= tol * 100]
    if straddling:
        raise NumericGuardError("eigenvalue-1 cluster straddles the tolerance",
                                {"singular_values": svals.tolist(), "tol": tol})
    kernel = int(np.sum(svals < tol))
    # the scaling direction (0, w0) must map to a multiple of the flow vector
    flow = np.concatenate([w0 / SQRT2, np.cross(inertia.diag * w0, w0) / SQRT2 / inertia.diag])
    image = diff @ np.concatenate([np.zeros(3), w0])
    cross = np.linalg.norm(image - flow * (image @ flow) / (flow @ flow))
    chain_ok = bool(cross < 1e-6 * max(1.0, np.linalg.norm(image)) and np.linalg.norm(image) > tol)
    return MonodromyReport(kernel + (1 if chain_ok else 0), kernel, svals.tolist(), closure, vel,
                           chain_ok, tol)


def monodromy_fixed_dim(metric, v: Sequence[float], tau: float, tol: float = EIGEN_TOL) -> int:
    return monodromy_report(metric, v, tau, tol).fixed_dim


@dataclass
class ConjugateReport:
    instants: list[tuple[float, int]]
    count: int
    tangencies: list[float] = field(default_factory=list)
    sign_changes: int = 0

    @property
    def parity_consistent(self) -> bool:
        return self.sign_changes % 2 == self.count % 2

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "instants": [[float(f"{t:.10g}"), m] for t, m in self.instants],
            "tangencies": [float(f"{t:.10g}") for t in self.tangencies],
            "determinant_sign_changes": self.sign_changes,
            "parity_consistent": self.parity_consistent,
        }


def conjugate_report(metric, v: Sequence[float], length: float, samples: int = 4000,
                     zero_tol: float = 1e-7, rank_tol: float = 1e-4) -> ConjugateReport:
    """Conjugate instants along the geodesic with initial body velocity ``v``.

    The velocity is normalized to unit speed, so instants are arc lengths.
    Jacobi fields vanishing at the start are integrated for all three
    initial derivatives; an instant is conjugate when the 3x3 matrix of their
    values is singular, with multiplicity equal to the rank drop.  Local
    minima of the relative smallest singular value are refined with a
    bounded Brent search.
    """
    inertia = Inertia.of(metric)
    w0 = inertia.unit(v)
    if length <= 0:
        return ConjugateReport([], 0)
    sol = _linearized(inertia, w0, np.zeros((3, 3)), np.eye(3), length, dense=True)

    def jacobi(t):
        return sol.sol(t)[12:21].reshape(3, 3)

    def rel_svals(t):
        s = np.linalg.svd(jacobi(t), compute_uv=False)
        return s / s[0]

    ts = np.linspace(0.0, length, samples + 1)[1:]
    mins = np.array([rel_svals(t)[-1] for t in ts])
    dets = np.array([np.linalg.det(jacobi(t)) for t in ts])
    sign_changes = int(np.sum(np.sign(dets[1:]) * np.sign(dets[:-1]) < 0))
    instants: list[tuple[float, int]] = []
    tangencies: list[float] = []
    step = ts[1] - ts[0]
    for i in range(1, len(ts) - 1):
        if not (mins[i] <= mins[i - 1] and mins[i] <= mins[i + 1]):
            continue
        lo, hi = ts[i] - step, min(ts[i] + step, length)
        res = minimize_scalar(lambda t: rel_svals(t)[-1], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13})
        t_star = float(res.x)
        s = rel_svals(t_star)
        if s[-1] < zero_tol:
            if not (0.0 < t_star < length) or length - t_star < 1e-9:
                continue
            mult = int(np.sum(s < rank_tol))
            if instants and abs(instants[-1][0] - t_star) < 1e-8:
                continue
            instants.append((t_star, mult))
        elif s[-1] < 1e3 * zero_tol:
            tangencies.append(t_star)
    count = sum(m for _, m in instants)
    return ConjugateReport(instants, count, tangencies, sign_changes)


def numeric_conjugate_count(metric, v: Sequence[float], length: float, **kwargs) -> int:
    report = conjugate_report(metric, v, length, **kwargs)
    if report.tangencies:
        raise NumericGuardError("near-zero non-crossing of the Jacobi determinant",
                                report.to_json())
    return report.count


# -- lattice oracle ----------------------------------------------------------

def brute_enumerate(gram: Sequence[Sequence], bound, *, max_dim: int = 6,
                    max_bound=30) -> list[tuple[int, ...]]:
    """Every nonzero integer ``x`` with ``x^T G x <= bound`` by a full box scan.

    Both members of each ``+-x`` pair are returned.  The box half-widths are
    ``floor(sqrt(bound * (G^-1)_ii))``, exact for a positive definite ``G``.
    """
    g = [[frac(x) for x in row] for row in gram]
    n = len(g)
    bound = frac(bound)
    if n > max_dim or bound > max_bound:
        raise ValueError(f"brute force limited to dim <= {max_dim} and bound <= {max_bound}")
    if n == 0 or bound <= 0:
        return []
    inv = rational_inverse(g)
    widths = []
    for i in range(n):
        x = bound * inv[i][i]
        widths.append(math.isqrt(x.numerator // x.denominator))
    den = 1
    for row in g:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    gi = np.array([[int(x * den) for x in row] for row in g], dtype=object)
    limit = bound * den
    axes = [np.arange(-w, w + 1, dtype=np.int64) for w in widths]
    out: list[tuple[int, ...]] = []
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, n - 1) \
        if n > 1 else np.zeros((1, 0), dtype=np.int64)
    rest_obj = rest.astype(object)
    for x0 in axes[0]:
        pts = np.hstack([np.full((len(rest), 1), x0, dtype=object), rest_obj])
        vals = ((pts @ gi) * pts).sum(axis=1)
        keep = [i for i, val in enumerate(vals) if val <= limit]
        for i in keep:
            t = tuple(int(a) for a in pts[i])
            if any(t):
                out.append(t)
    return sorted(out)
