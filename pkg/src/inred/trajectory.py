"""Constraint-set geometry and finite-horizon trajectory machinery.

This is the floating-point side of the package: sampled signals on uniform
grids, exact-per-step discretization of the LTI dynamics through augmented
matrix exponentials, and the sampled checks used by the certification layer
(interiority windows, boundary residence, signal comparison).

The discretization is exact for inputs representable by their declared
interpolation rule, so halving the step changes trajectories only at the
round-off level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence, Union

import numpy as np
from scipy.linalg import expm

from .exact import DimensionMismatch, Subspace

if TYPE_CHECKING:  # pragma: no cover
    from .geometry import SystemQuadruple

#: default absolute tolerance for membership classification
MEMBERSHIP_TOL = 1e-9
#: default relative tolerance for signal equality
SIGNAL_TOL = 1e-6


class GridMismatch(ValueError):
    """Signals do not share the same sampling grid."""


# ---------------------------------------------------------------------------
# grids and signals


@dataclass(frozen=True)
class Grid:
    """Uniform time grid: n samples starting at t0, spaced by dt."""

    t0: float
    dt: float
    n: int

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("grid step must be positive")
        if self.n < 2:
            raise ValueError("grid needs at least two samples")

    @classmethod
    def from_horizon(cls, t0: float, dt: float, horizon: float) -> "Grid":
        return cls(t0, dt, int(round(horizon / dt)) + 1)

    @property
    def horizon(self) -> float:
        return (self.n - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def index_of(self, t: float) -> int:
        """Grid index of a node time; raises when t is off-grid."""
        k = int(round((t - self.t0) / self.dt))
        if k < 0 or k >= self.n or abs(self.t0 + k * self.dt - t) > 1e-9 * (1 + abs(t)):
            raise ValueError(f"time {t} is not a node of the grid")
        return k


class Interpolation(str, Enum):
    PIECEWISE_LINEAR = "linear"
    ZERO_ORDER_HOLD = "zoh"


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Vector signal sampled on a uniform grid, with its interpolation rule."""

    t0: float
    dt: float
    values: np.ndarray
    interpolation: Interpolation = Interpolation.PIECEWISE_LINEAR

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("signal values must be a 2-D array (samples x dim)")
        if vals.shape[0] < 2:
            raise ValueError("signal needs at least two samples")
        if self.dt <= 0:
            raise ValueError("signal step must be positive")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def grid(self) -> Grid:
        return Grid(self.t0, self.dt, self.n_samples)

    def times(self) -> np.ndarray:
        return self.grid.times()

    def same_grid(self, other: "SampledSignal") -> bool:
        return (
            self.n_samples == other.n_samples
            and math.isclose(self.t0, other.t0, abs_tol=1e-12)
            and math.isclose(self.dt, other.dt, rel_tol=1e-12)
        )

    def scaled(self, c: float) -> "SampledSignal":
        return SampledSignal(self.t0, self.dt, c * self.values, self.interpolation)

    def resample(self, grid: Grid) -> "SampledSignal":
        """Evaluate the declared interpolant on another grid spanning the same range."""
        tsrc = self.times()
        tdst = grid.times()
        if tdst[0] < tsrc[0] - 1e-12 or tdst[-1] > tsrc[-1] + 1e-9 * self.dt:
            raise GridMismatch("target grid extends beyond the signal's support")
        tdst = np.clip(tdst, tsrc[0], tsrc[-1])
        if self.interpolation is Interpolation.ZERO_ORDER_HOLD:
            idx = np.minimum(
                np.floor((tdst - self.t0) / self.dt + 1e-9).astype(int),
                self.n_samples - 1,
            )
            out = self.values[idx]
        else:
            out = np.column_stack([
                np.interp(tdst, tsrc, self.values[:, j]) for j in range(self.dim)
            ])
        return SampledSignal(grid.t0, grid.dt, out, self.interpolation)


@dataclass(frozen=True, eq=False)
class TrajectoryTriple:
    """Input/state/output triple on a common grid, from initial state x0."""

    u: SampledSignal
    x: SampledSignal
    y: SampledSignal
    x0: np.ndarray

    def __post_init__(self) -> None:
        if not (self.u.same_grid(self.x) and self.u.same_grid(self.y)):
            raise GridMismatch("u, x, y must share one grid")
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if not np.allclose(self.x.values[0], x0, atol=1e-9):
            raise ValueError("state signal does not start at x0")
        x0 = x0.copy()
        x0.flags.writeable = False
        object.__setattr__(self, "x0", x0)


# ---------------------------------------------------------------------------
# constraint sets


@dataclass(frozen=True)
class FullSpace:
    """The whole ambient space; everything is interior."""

    dim: int


@dataclass(frozen=True)
class LinearSubspaceSet:
    """A linear subspace used as constraint set.

    A proper subspace has empty interior in the ambient space, so its members
    are boundary points by definition.
    """

    space: Subspace


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box, possibly unbounded; `strict` marks the open variant."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    strict: bool = False

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.lower)
        up = tuple(float(v) for v in self.upper)
        if len(lo) != len(up):
            raise DimensionMismatch("box bounds have different lengths")
        if any(l > u for l, u in zip(lo, up)):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def dim(self) -> int:
        return len(self.lower)


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """Points with G x <= g (strict: G x < g); rows are normalized for margins."""

    G: np.ndarray
    g: np.ndarray
    strict: bool = False

    def __post_init__(self) -> None:
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        g = np.asarray(self.g, dtype=float).reshape(-1)
        if G.shape[0] != g.shape[0]:
            raise DimensionMismatch("polyhedron G rows must match g length")
        norms = np.linalg.norm(G, axis=1)
        if np.any(norms == 0):
            raise ValueError("polyhedron rows must be nonzero")
        G = G.copy(); G.flags.writeable = False
        g = g.copy(); g.flags.writeable = False
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "g", g)

    @property
    def dim(self) -> int:
        return self.G.shape[1]


ConstraintSet = Union[FullSpace, LinearSubspaceSet, Box, Polyhedron]


def constraint_dim(cs: ConstraintSet) -> int:
    if isinstance(cs, FullSpace):
        return cs.dim
    if isinstance(cs, LinearSubspaceSet):
        return cs.space.ambient_dim
    return cs.dim


def is_strict(cs: ConstraintSet) -> bool:
    return getattr(cs, "strict", False)


class Status(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Membership:
    status: Status
    margin: float


def _classify(margin: float, tol: float) -> Membership:
    if margin > tol:
        return Membership(Status.INTERIOR, margin)
    if margin < -tol:
        return Membership(Status.OUTSIDE, margin)
    return Membership(Status.BOUNDARY, 0.0)


def membership(cs: ConstraintSet, v: Sequence[float], tol: float = MEMBERSHIP_TOL) -> Membership:
    """Classify a point against a constraint set, with a distance-like margin.

    For boxes and polyhedra the margin is the least slack (normalized per row
    for polyhedra); classification is against the closure, so `strict` sets
    report Boundary for points on their frontier even though those points are
    not members.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != constraint_dim(cs):
        raise DimensionMismatch("point dimension does not match constraint set")
    if isinstance(cs, FullSpace):
        return Membership(Status.INTERIOR, math.inf)
    if isinstance(cs, LinearSubspaceSet):
        space = cs.space
        if space.is_full():
            return Membership(Status.INTERIOR, math.inf)
        if space.is_zero():
            dist = float(np.linalg.norm(v))
        else:
            basis = space.to_float()
            coeff, *_ = np.linalg.lstsq(basis, v, rcond=None)
            dist = float(np.linalg.norm(v - basis @ coeff))
        if dist <= tol:
            return Membership(Status.BOUNDARY, 0.0)
        return Membership(Status.OUTSIDE, -dist)
    if isinstance(cs, Box):
        lo = np.asarray(cs.lower)
        up = np.asarray(cs.upper)
        slacks = np.concatenate([
            np.where(np.isinf(lo), math.inf, v - lo),
            np.where(np.isinf(up), math.inf, up - v),
        ])
        return _classify(float(np.min(slacks)), tol)
    if isinstance(cs, Polyhedron):
        norms = np.linalg.norm(cs.G, axis=1)
        slacks = (cs.g - cs.G @ v) / norms
        return _classify(float(np.min(slacks)), tol)
    raise TypeError(f"unknown constraint set {type(cs).__name__}")


def _in_set(m: Membership, strict: bool) -> bool:
    if m.status is Status.OUTSIDE:
        return False
    if m.status is Status.BOUNDARY and strict:
        return False
    return True


# ---------------------------------------------------------------------------
# simulation


def _float_system(sys: "SystemQuadruple") -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    return sys.A.to_float(), sys.B.to_float(), sys.C.to_float(), sys.D.to_float()


def _step_matrices(A: np.ndarray, B: np.ndarray, dt: float,
                   interpolation: Interpolation) -> tuple[np.ndarray, ...]:
    n, m = B.shape
    if interpolation is Interpolation.ZERO_ORDER_HOLD:
        M = np.zeros((n + m, n + m))
        M[:n, :n] = A
        M[:n, n:] = B
        E = expm(M * dt)
        return E[:n, :n], E[:n, n:]
    # piecewise linear: augment with the input and its (constant) slope
    M = np.zeros((n + 2 * m, n + 2 * m))
    M[:n, :n] = A
    M[:n, n:n + m] = B
    M[n:n + m, n + m:] = np.eye(m)
    E = expm(M * dt)
    return E[:n, :n], E[:n, n:n + m], E[:n, n + m:]


def _simulate_arrays(A: np.ndarray, B: np.ndarray, C: np.ndarray, D: np.ndarray,
                     x0: np.ndarray, u: SampledSignal) -> tuple[np.ndarray, np.ndarray]:
    n = A.shape[0]
    N = u.n_samples
    x = np.empty((N, n))
    x[0] = x0
    uv = u.values
    if u.interpolation is Interpolation.ZERO_ORDER_HOLD:
        Phi, G0 = _step_matrices(A, B, u.dt, u.interpolation)
        for k in range(N - 1):
            x[k + 1] = Phi @ x[k] + G0 @ uv[k]
    else:
        Phi, G0, G1 = _step_matrices(A, B, u.dt, u.interpolation)
        slopes = (uv[1:] - uv[:-1]) / u.dt
        for k in range(N - 1):
            x[k + 1] = Phi @ x[k] + G0 @ uv[k] + G1 @ slopes[k]
    y = x @ C.T + uv @ D.T
    return x, y


def simulate(sys: "SystemQuadruple", x0: Sequence[float], u: SampledSignal) -> TrajectoryTriple:
    """Simulate the quadruple from x0 under u, exactly per step.

    The per-step propagator is the augmented matrix exponential matching the
    input's interpolation rule (first-order hold for piecewise-linear inputs,
    zero-order hold otherwise), so inputs representable by their declared
    interpolation incur only rounding error.
    """
    A, B, C, D = _float_system(sys)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != A.shape[0]:
        raise DimensionMismatch("x0 length does not match the state dimension")
    if u.dim != B.shape[1]:
        raise DimensionMismatch("input signal dimension does not match B")
    x, y = _simulate_arrays(A, B, C, D, x0, u)
    xs = SampledSignal(u.t0, u.dt, x, Interpolation.PIECEWISE_LINEAR)
    ys = SampledSignal(u.t0, u.dt, y, u.interpolation)
    return TrajectoryTriple(u=u, x=xs, y=ys, x0=x0)


# ---------------------------------------------------------------------------
# sampled checks


@dataclass(frozen=True)
class AdmissibilityResult:
    ok: bool
    first_violation: Optional[float]


def check_admissible(triple: TrajectoryTriple, u_set: ConstraintSet, x_set: ConstraintSet,
                     tol: float = MEMBERSHIP_TOL) -> AdmissibilityResult:
    """True when (u(t), x(t)) stays in U x X at every grid node."""
    times = triple.u.times()
    su, sx = is_strict(u_set), is_strict(x_set)
    for k, t in enumerate(times):
        if not _in_set(membership(u_set, triple.u.values[k], tol), su):
            return AdmissibilityResult(False, float(t))
        if not _in_set(membership(x_set, triple.x.values[k], tol), sx):
            return AdmissibilityResult(False, float(t))
    return AdmissibilityResult(True, None)


@dataclass(frozen=True)
class InteriorWindow:
    t1: float
    t2: float
    r_u_min: float
    r_x_min: float


def interior_window(triple: TrajectoryTriple, u_set: ConstraintSet, x_set: ConstraintSet,
                    rho: int, tol: float = MEMBERSHIP_TOL) -> Optional[InteriorWindow]:
    """Widest grid-aligned open window where u is interior (and x, when rho = 0).

    Returns the window endpoints together with the minimum margins over its
    nodes, or None when no window spanning at least two grid steps exists.
    Endpoints are grid nodes that themselves satisfy the interiority test, so
    the reported open interval is contained in the true one.
    """
    times = triple.u.times()
    N = len(times)
    ok = np.empty(N, dtype=bool)
    mu = np.empty(N)
    mx = np.full(N, math.inf)
    for k in range(N):
        m_u = membership(u_set, triple.u.values[k], tol)
        ok[k] = m_u.status is Status.INTERIOR
        mu[k] = m_u.margin
        if rho == 0:
            m_x = membership(x_set, triple.x.values[k], tol)
            ok[k] = ok[k] and m_x.status is Status.INTERIOR
            mx[k] = m_x.margin
    best: Optional[tuple[int, int]] = None
    start = None
    for k in range(N + 1):
        if k < N and ok[k]:
            if start is None:
                start = k
        elif start is not None:
            if best is None or (k - 1 - start) > (best[1] - best[0]):
                best = (start, k - 1)
            start = None
    if best is None or best[1] - best[0] < 2:
        return None
    i, j = best
    return InteriorWindow(
        t1=float(times[i]),
        t2=float(times[j]),
        r_u_min=float(np.min(mu[i:j + 1])),
        r_x_min=float(np.min(mx[i:j + 1])),
    )


def boundary_residence(triple: TrajectoryTriple, u_set: ConstraintSet, x_set: ConstraintSet,
                       rho: int, tol: float = MEMBERSHIP_TOL,
                       breakpoints: Sequence[float] = ()) -> bool:
    """Necessary condition for an admissible pair not to be input redundant.

    True when, at every node of the continuity set (the grid minus the
    declared breakpoints of u), the input sits on the boundary of its set
    (for rho > 0), or the input or the state does (for rho = 0).  Points of a
    strict (open) set are never on the set's own frontier, so strict sets can
    never satisfy the test.
    """
    times = triple.u.times()
    su, sx = is_strict(u_set), is_strict(x_set)
    half = 0.5 * triple.u.dt
    for k, t in enumerate(times):
        if any(abs(t - b) <= half for b in breakpoints):
            continue
        on_u = (not su) and membership(u_set, triple.u.values[k], tol).status is Status.BOUNDARY
        if rho > 0:
            if not on_u:
                return False
        else:
            on_x = (not sx) and membership(x_set, triple.x.values[k], tol).status is Status.BOUNDARY
            if not (on_u or on_x):
                return False
    return True


@dataclass(frozen=True)
class TripleComparison:
    u_equal: bool
    x_equal: bool
    y_equal: bool


def _signals_equal(a: SampledSignal, b: SampledSignal, tol: float) -> bool:
    sup_diff = float(np.max(np.abs(a.values - b.values))) if a.values.size else 0.0
    scale = max(
        float(np.max(np.abs(a.values))) if a.values.size else 0.0,
        float(np.max(np.abs(b.values))) if b.values.size else 0.0,
    )
    return sup_diff <= tol * (1.0 + scale)


def compare_triples(a: TrajectoryTriple, b: TrajectoryTriple,
                    tol: float = SIGNAL_TOL) -> TripleComparison:
    """Grid sup-norm equality of the three signal pairs, relative tolerance."""
    if not a.u.same_grid(b.u):
        raise GridMismatch("triples live on different grids")
    return TripleComparison(
        u_equal=_signals_equal(a.u, b.u, tol),
        x_equal=_signals_equal(a.x, b.x, tol),
        y_equal=_signals_equal(a.y, b.y, tol),
    )
