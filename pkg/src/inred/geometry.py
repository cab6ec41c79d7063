"""Geometric control algorithms over exact rationals.

Computes the classical subspaces of the geometric approach (the largest
controlled invariant subspace in a given set, the weakly unobservable
subspace, its controllable part) together with friends (invariance-realizing
feedbacks), the reduction of a linearly constrained system to an equivalent
unconstrained one, bases adapted to the subspace chain, and Gramian-based
minimum-energy transfer inputs.

Everything except the Gramian transfer is exact; that one function is the
single place where this module leaves rational arithmetic, and its output is
meant to be verified by simulation, never trusted blindly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .exact import (
    DimensionMismatch,
    RationalMatrix,
    Subspace,
    complete_basis,
    image,
    kernel,
    preimage,
    restriction_matrix,
)
from .trajectory import (
    Grid,
    GridMismatch,
    Interpolation,
    SampledSignal,
    TrajectoryTriple,
)


class NotControlledInvariant(ValueError):
    """No feedback makes the subspace invariant."""


class NotOutputNulling(ValueError):
    """No feedback keeps the subspace invariant while nulling the output."""


class DegenerateStateSpace(ValueError):
    """The reduced state space collapses to the origin (dim V* = 0)."""


class PinnedInvalid(ValueError):
    """Supplied insertion/friend/reparametrization matrices violate their invariants."""


class SingularGramian(ValueError):
    """Reachability Gramian is numerically singular over the requested horizon."""


@dataclass(frozen=True)
class SystemQuadruple:
    """State-space quadruple (A, B, C, D) with exact rational entries.

    Reduced systems may legitimately have zero input columns, so only the
    state and output dimensions are required to be positive.
    """

    A: RationalMatrix
    B: RationalMatrix
    C: RationalMatrix
    D: RationalMatrix

    def __post_init__(self) -> None:
        n = self.A.rows
        if self.A.cols != n or n < 1:
            raise DimensionMismatch("A must be square and non-empty")
        if self.B.rows != n:
            raise DimensionMismatch("B must have as many rows as A")
        if self.C.cols != n or self.C.rows < 1:
            raise DimensionMismatch("C must have as many columns as A")
        if self.D.shape != (self.C.rows, self.B.cols):
            raise DimensionMismatch("D must be (p x m)")

    @classmethod
    def from_rows(cls, A, B, C, D) -> "SystemQuadruple":
        return cls(
            RationalMatrix.from_rows(A),
            RationalMatrix.from_rows(B),
            RationalMatrix.from_rows(C),
            RationalMatrix.from_rows(D),
        )

    @property
    def n(self) -> int:
        return self.A.rows

    @property
    def m(self) -> int:
        return self.B.cols

    @property
    def p(self) -> int:
        return self.C.rows


# ---------------------------------------------------------------------------
# invariant subspaces


def max_controlled_invariant(A: RationalMatrix, B: RationalMatrix, K: Subspace) -> Subspace:
    """Largest (A, B)-controlled invariant subspace contained in K.

    Standard fixpoint: V0 = K, V_{i+1} = K n A^{-1}(V_i + im B); stationary
    after at most dim K steps.
    """
    if K.ambient_dim != A.rows:
        raise DimensionMismatch("constraint subspace must live in the state space")
    im_b = image(B)
    V = K
    for _ in range(A.rows + 1):
        V_next = K & preimage(A, V + im_b)
        if V_next == V:
            return V
        V = V_next
    return V


def weakly_unobservable(sys: SystemQuadruple) -> Subspace:
    """States from which some input keeps the output identically zero.

    Fixpoint on V_{i+1} = {x : [A; C] x in (V_i x {0}) + im [B; D]},
    starting from the whole state space.
    """
    stacked = RationalMatrix.vstack(sys.A, sys.C)
    im_bd = image(RationalMatrix.vstack(sys.B, sys.D))
    n, p = sys.n, sys.p
    V = Subspace.full(n)
    for _ in range(n + 1):
        lifted = image(RationalMatrix.vstack(V.basis, RationalMatrix.zeros(p, V.dim)))
        V_next = preimage(stacked, lifted + im_bd)
        if V_next == V:
            return V
        V = V_next
    return V


def _friend_matrix(A: RationalMatrix, B: RationalMatrix, W: Subspace,
                   CD: Optional[tuple[RationalMatrix, RationalMatrix]]) -> Optional[RationalMatrix]:
    """F with (A+BF)W <= W (and (C+DF)W = 0 when CD given), zero on a complement."""
    n, m = A.rows, B.cols
    if W.is_zero():
        return RationalMatrix.zeros(m, n)
    T = W.basis
    k = W.dim
    lhs = RationalMatrix.hstack(B, -T)
    rhs = -(A @ T)
    if CD is not None:
        C, D = CD
        lhs = RationalMatrix.vstack(lhs, RationalMatrix.hstack(D, RationalMatrix.zeros(C.rows, k)))
        rhs = RationalMatrix.vstack(rhs, -(C @ T))
    sol = lhs.solve_columns(rhs)
    if sol is None:
        return None
    f_on_w = sol.block(0, m, 0, k)
    Tc = complete_basis(T, [RationalMatrix.identity(n)])
    S = RationalMatrix.hstack(T, Tc)
    return RationalMatrix.hstack(f_on_w, RationalMatrix.zeros(m, n - k)) @ S.inverse()


def friend(sys: SystemQuadruple, W: Subspace, output_nulling: bool = False) -> RationalMatrix:
    """A feedback F making W invariant for A+BF, output-nulling on request.

    The defining linear systems are solved exactly with free variables pinned
    to zero, and F vanishes on a fixed complement of W, so the choice is
    deterministic.
    """
    if W.ambient_dim != sys.n:
        raise DimensionMismatch("subspace must live in the state space")
    CD = (sys.C, sys.D) if output_nulling else None
    F = _friend_matrix(sys.A, sys.B, W, CD)
    if F is not None:
        return F
    if output_nulling and _friend_matrix(sys.A, sys.B, W, None) is not None:
        raise NotOutputNulling("subspace is controlled invariant but not output-nulling")
    raise NotControlledInvariant("subspace is not controlled invariant")


def _output_nulling_structure(sys: SystemQuadruple) -> tuple[Subspace, RationalMatrix, RationalMatrix]:
    """(V, F, L): weakly unobservable subspace, an output-nulling friend, and
    an injective L spanning B^{-1}V n ker D."""
    V = weakly_unobservable(sys)
    F = friend(sys, V, output_nulling=True)
    L = (preimage(sys.B, V) & kernel(sys.D)).basis
    return V, F, L


def _reachable_under(closed: RationalMatrix, seed: Subspace) -> Subspace:
    """Smallest closed-invariant subspace containing the seed (Krylov fixpoint)."""
    R = seed
    for _ in range(closed.rows + 1):
        R_next = R + image(closed @ R.basis)
        if R_next == R:
            return R
        R = R_next
    return R


def controllable_weakly_unobservable(sys: SystemQuadruple) -> Subspace:
    """States reachable from (and returnable to) the origin with zero output.

    Realized as the reachable set of (A+BF, BL) for an output-nulling friend
    F and L spanning B^{-1}V n ker D; contained in the weakly unobservable
    subspace by construction.
    """
    V, F, L = _output_nulling_structure(sys)
    closed = sys.A + sys.B @ F
    return _reachable_under(closed, image(sys.B @ L))


# ---------------------------------------------------------------------------
# constrained-to-unconstrained reduction


@dataclass(frozen=True)
class PinnedBases:
    """Caller-supplied insertion/friend/reparametrization matrices, used verbatim."""

    R: Optional[RationalMatrix] = None
    F: Optional[RationalMatrix] = None
    L: Optional[RationalMatrix] = None


@dataclass(frozen=True)
class ReducedSystem:
    """Unconstrained quadruple equivalent to the constrained dynamics on V*.

    `sys` acts on coordinates of V* (the largest controlled invariant
    subspace inside the state constraint set); R inserts the input constraint
    set, T inserts V*, F is the friend used for the reduction and L
    reparametrizes the inputs that keep the state in V*.
    """

    sys: SystemQuadruple
    R: RationalMatrix
    T: RationalMatrix
    F: RationalMatrix
    L: RationalMatrix

    @property
    def l(self) -> int:
        return self.T.cols

    @property
    def input_dim(self) -> int:
        return self.L.cols


def reduce_system(sys: SystemQuadruple, u_set: Subspace, x_set: Subspace,
                  pinned: Optional[PinnedBases] = None) -> ReducedSystem:
    """Reduce a linearly constrained system to an equivalent unconstrained one.

    Canonical choices: R and L are the canonical echelon bases of their
    spans, F is the deterministic friend of V*.  Pinned matrices are
    validated and used verbatim; the classification this reduction feeds is
    independent of any valid choice.
    """
    if u_set.ambient_dim != sys.m:
        raise DimensionMismatch("input constraint set must live in R^m")
    if x_set.ambient_dim != sys.n:
        raise DimensionMismatch("state constraint set must live in R^n")
    pinned = pinned or PinnedBases()

    if pinned.R is not None:
        R = pinned.R
        if R.rows != sys.m or R.rank() != R.cols or image(R) != u_set:
            raise PinnedInvalid("R must be an injective insertion of the input set")
    else:
        R = u_set.basis
    B_u = sys.B @ R
    D_u = sys.D @ R

    v_star = max_controlled_invariant(sys.A, B_u, x_set)
    if v_star.dim == 0:
        raise DegenerateStateSpace("V* is trivial; use the degenerate analysis")
    T = v_star.basis

    if pinned.F is not None:
        F = pinned.F
        if F.shape != (R.cols, sys.n):
            raise PinnedInvalid("F has the wrong shape")
        if T.solve_columns((sys.A + B_u @ F) @ T) is None:
            raise PinnedInvalid("F is not a friend of V*")
    else:
        F = _friend_matrix(sys.A, B_u, v_star, None)
        assert F is not None  # V* is controlled invariant by construction

    pre = preimage(B_u, v_star)
    if pinned.L is not None:
        L = pinned.L
        if L.rows != R.cols or L.rank() != L.cols or image(L) != pre:
            raise PinnedInvalid("L must be injective with image the preimage of V*")
    else:
        L = pre.basis

    A_f = restriction_matrix(sys.A + B_u @ F, v_star)
    B_f = T.solve_columns(B_u @ L)
    assert B_f is not None  # im(B_u L) <= V* by choice of L
    C_f = (sys.C + D_u @ F) @ T
    D_f = D_u @ L
    return ReducedSystem(
        sys=SystemQuadruple(A_f, B_f, C_f, D_f), R=R, T=T, F=F, L=L,
    )


def lift_trajectory(bundle: ReducedSystem, eta0: Sequence[float],
                    w: SampledSignal, eta: SampledSignal, phi: SampledSignal) -> TrajectoryTriple:
    """Map a reduced-system trajectory (w, eta, phi) to a constrained-system one.

    The embedding (w, eta, phi) -> (R L w + R F T eta, T eta, phi) is linear
    and injective, so distinct reduced trajectories lift to distinct
    constrained ones.
    """
    if not (w.same_grid(eta) and w.same_grid(phi)):
        raise GridMismatch("w, eta, phi must share one grid")
    eta0 = np.asarray(eta0, dtype=float).reshape(-1)
    if not np.allclose(eta.values[0], eta0, atol=1e-9):
        raise ValueError("eta does not start at eta0")
    RL = (bundle.R @ bundle.L).to_float()
    RFT = (bundle.R @ bundle.F @ bundle.T).to_float()
    Tf = bundle.T.to_float()
    u_vals = w.values @ RL.T + eta.values @ RFT.T
    x_vals = eta.values @ Tf.T
    u = SampledSignal(w.t0, w.dt, u_vals, w.interpolation)
    x = SampledSignal(w.t0, w.dt, x_vals, Interpolation.PIECEWISE_LINEAR)
    return TrajectoryTriple(u=u, x=x, y=phi, x0=Tf @ eta0)


# ---------------------------------------------------------------------------
# adapted bases and Gramian transfers


@dataclass(frozen=True)
class AdaptedBasis:
    """State basis adapted to the chain R(sys) <= V(sys) <= R^n.

    Columns of Ta span the controllable weakly unobservable subspace, those
    of [Ta Tb] the weakly unobservable one, and [Ta Tb Tc] is invertible.
    (A11, B1) are the controllable top-left blocks of the transformed
    closed-loop pair; F and L are the feedback and input reparametrization
    realizing the transformation.
    """

    Ta: RationalMatrix
    Tb: RationalMatrix
    Tc: RationalMatrix
    A11: RationalMatrix
    B1: RationalMatrix
    F: RationalMatrix
    L: RationalMatrix

    @property
    def transform(self) -> RationalMatrix:
        return RationalMatrix.hstack(self.Ta, self.Tb, self.Tc)


def adapted_basis(sys: SystemQuadruple) -> AdaptedBasis:
    """Build the adapted basis and the transformed controllable blocks.

    In the new basis the closed-loop dynamics is block upper triangular, the
    input enters only the first block, and the output reads only the last;
    these zero patterns are asserted exactly.
    """
    V, F, L = _output_nulling_structure(sys)
    closed = sys.A + sys.B @ F
    BL = sys.B @ L
    Rsub = _reachable_under(closed, image(BL))
    Ta = Rsub.basis
    Tb = complete_basis(Ta, [V.basis])
    Tc = complete_basis(RationalMatrix.hstack(Ta, Tb), [RationalMatrix.identity(sys.n)])
    S = RationalMatrix.hstack(Ta, Tb, Tc)
    S_inv = S.inverse()
    A_bar = S_inv @ closed @ S
    B_bar = S_inv @ BL
    ra, rb = Ta.cols, Tb.cols
    n = sys.n
    if not (A_bar.block(ra, n, 0, ra).is_zero()
            and A_bar.block(ra + rb, n, ra, ra + rb).is_zero()
            and B_bar.block(ra, n, 0, B_bar.cols).is_zero()
            and ((sys.C + sys.D @ F) @ S).block(0, sys.p, 0, ra + rb).is_zero()
            and (sys.D @ L).is_zero()):
        raise AssertionError("adapted basis lost its structural zero pattern")
    return AdaptedBasis(
        Ta=Ta, Tb=Tb, Tc=Tc,
        A11=A_bar.block(0, ra, 0, ra),
        B1=B_bar.block(0, ra, 0, B_bar.cols),
        F=F, L=L,
    )


def _as_float(mat) -> np.ndarray:
    if isinstance(mat, RationalMatrix):
        return mat.to_float()
    return np.atleast_2d(np.asarray(mat, dtype=float))


def reachability_gramian(A: np.ndarray, B: np.ndarray, duration: float) -> np.ndarray:
    """Finite-horizon reachability Gramian, by one augmented matrix exponential."""
    n = A.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = A
    M[:n, n:] = B @ B.T
    M[n:, n:] = -A.T
    E = expm(M * duration)
    # E12 = int_0^T e^{(T-s)A} Q e^{-sA'} ds, so right-multiplying by e^{TA'}
    # yields the Gramian.
    return E[:n, n:] @ E[:n, :n].T


GRAMIAN_RCOND_MIN = 1e-12


def _transfer_data(A: np.ndarray, B: np.ndarray, p0: np.ndarray, pf: np.ndarray,
                   duration: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Sampled transfer input w and the exact state response phi at the nodes.

    The state samples come from the closed-form solution
    phi(t) = e^{tA} p0 + W(t) e^{(T-t)A'} eta, built incrementally, so the
    endpoint matches pf to round-off regardless of the grid.
    """
    n = A.shape[0]
    dt = duration / steps
    W_total = reachability_gramian(A, B, duration)
    rcond = 1.0 / np.linalg.cond(W_total) if n else 1.0
    if not np.isfinite(rcond) or rcond < GRAMIAN_RCOND_MIN:
        raise SingularGramian(
            f"reciprocal condition {rcond:.2e} below {GRAMIAN_RCOND_MIN:.0e}"
        )
    eta = np.linalg.solve(W_total, pf - expm(A * duration) @ p0)
    E = expm(A * dt)
    W_dt = reachability_gramian(A, B, dt)
    # backward factors v_k = e^{(T - t_k) A'} eta
    v = np.empty((steps + 1, n))
    v[steps] = eta
    for k in range(steps - 1, -1, -1):
        v[k] = E.T @ v[k + 1]
    w = v @ B
    phi = np.empty((steps + 1, n))
    free = p0.copy()
    W = np.zeros((n, n))
    for k in range(steps + 1):
        phi[k] = free + W @ v[k]
        if k < steps:
            free = E @ free
            W = E @ W @ E.T + W_dt
    return w, phi


def gramian_transfer_input(A11, B1, phi_a0: Sequence[float], phi_af: Sequence[float],
                           duration: float, dt: float = 1e-3) -> SampledSignal:
    """Minimum-energy input transferring the controllable block between states.

    Returns w(t) = B1' e^{(T-t) A11'} W_r(T)^{-1} (phi_af - e^{T A11} phi_a0)
    sampled on a uniform grid over [0, T].  Raises SingularGramian when the
    Gramian's reciprocal condition estimate falls below 1e-12 (in particular
    when (A11, B1) is not controllable over the horizon).
    """
    if duration <= 0:
        raise ValueError("transfer duration must be positive")
    A = _as_float(A11)
    B = _as_float(B1)
    p0 = np.asarray(phi_a0, dtype=float).reshape(-1)
    pf = np.asarray(phi_af, dtype=float).reshape(-1)
    if p0.shape[0] != A.shape[0] or pf.shape[0] != A.shape[0]:
        raise DimensionMismatch("endpoint vectors must match the block dimension")
    steps = max(2, int(round(duration / dt)))
    w, _ = _transfer_data(A, B, p0, pf, duration, steps)
    return SampledSignal(0.0, duration / steps, w, Interpolation.PIECEWISE_LINEAR)
