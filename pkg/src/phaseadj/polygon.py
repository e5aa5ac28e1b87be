"""
Closing a chain of fixed-length edges into a polygon in the complex plane.

Given lengths ``d_1 >= d_2 >= ... >= d_N > 0`` the goal is a set of directions
``varphi_i`` with ``sum_i d_i exp(j varphi_i) = 0``.  Two constructions are
provided: a closed-form three-block triangle and a sequential walk that keeps
track of which directions leave the remaining edges closable.

Indices ``i``, ``k``, ``l`` and ``m`` are 1-based, as in the usual statement
of the polygon inequality; arrays are plain 0-based numpy arrays.

This module is the readable scalar route.  :mod:`phaseadj.kernels` contains
the batched version of the same walk used by the adjuster.
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (BrokenTriangle, EmptyArcSet, EmptyInterval,
                     IndexOutOfRange, InfeasibleEdges, ZeroModulus)

TWO_PI = 2.0 * math.pi
# relative tolerance on triangle inequalities before declaring drift
TRIANGLE_TOL = 1e-9
# absolute tolerance (rad) under which two candidate phases count as a tie
TIE_TOL = 1e-12
# chain moduli below this fraction of sum(d) are treated as the zero vector
ZERO_MODULUS_TOL = 1e-14


def _clamped_acos(c):
    return math.acos(min(1.0, max(-1.0, c)))


def as_edges(d) -> np.ndarray:
    d = np.asarray(d, dtype=float).ravel()
    if d.size == 0 or np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise ValueError("edge lengths must be finite and strictly positive")
    if np.any(np.diff(d) > 0):
        raise ValueError("edge lengths must be sorted in non-increasing order")
    return d


def partial_sum_Q(d, k: int, l: int) -> float:
    """Sum of ``d_k .. d_l`` (1-based, inclusive)."""
    d = np.asarray(d, dtype=float)
    if not 1 <= k <= l <= d.size:
        raise IndexOutOfRange(f"need 1 <= k <= l <= {d.size}, got k={k}, l={l}")
    return float(d[k - 1:l].sum())


def is_polygon_feasible(d) -> bool:
    """True iff the longest edge does not exceed the sum of the others."""
    d = as_edges(d)
    return bool(d[0] <= d[1:].sum())


def _split_gaps(d):
    # |Q(2,i) - Q(i+1,N)| for i = 2..N-1
    cs = np.cumsum(d)
    left = cs[1:-1] - cs[0]
    right = cs[-1] - cs[1:-1]
    return np.abs(left - right)


def best_split_index(d) -> int:
    """Split ``m`` in ``2..N-1`` balancing ``Q(2,m)`` against ``Q(m+1,N)``.

    Ties go to the smallest index.
    """
    d = as_edges(d)
    if d.size < 3:
        raise ValueError("need at least three edges")
    return int(np.argmin(_split_gaps(d))) + 2


def lemma1_gap(d) -> float:
    """``min_i |Q(2,i) - Q(i+1,N)|``; never exceeds ``d_1`` on feasible input."""
    d = as_edges(d)
    if d.size < 3:
        raise ValueError("need at least three edges")
    return float(_split_gaps(d).min())


@dataclass(frozen=True)
class TriangleSolution:
    m: int
    alpha1: float
    alpha2: float
    phases: np.ndarray


def triangle_construct(d) -> TriangleSolution:
    """Close the polygon by folding it into a triangle.

    Edge 1 points along ``pi``, edges ``2..m`` share direction ``alpha1`` and
    edges ``m+1..N`` share ``alpha1 + alpha2 + pi``, where the three blocks
    have lengths ``d_1``, ``Q(2,m)`` and ``Q(m+1,N)``.
    """
    d = as_edges(d)
    if d.size < 3:
        raise ValueError("need at least three edges")
    if not is_polygon_feasible(d):
        raise InfeasibleEdges(
            f"d_1 = {d[0]:.6g} exceeds the sum of the others {d[1:].sum():.6g}")
    m = best_split_index(d)
    d1 = d[0]
    a = d[1:m].sum()
    b = d[m:].sum()
    alpha1 = _clamped_acos((d1 * d1 + a * a - b * b) / (2.0 * d1 * a))
    alpha2 = _clamped_acos((a * a + b * b - d1 * d1) / (2.0 * a * b))
    phases = np.empty(d.size)
    phases[0] = math.pi
    phases[1:m] = alpha1
    phases[m:] = alpha1 + alpha2 + math.pi
    return TriangleSolution(m, alpha1, alpha2, phases)


def closure_residual(d, phases) -> float:
    """``|sum_i d_i exp(j phase_i)|``."""
    return float(abs(np.sum(np.asarray(d) * np.exp(1j * np.asarray(phases)))))


@dataclass(frozen=True)
class PhaseArcSet:
    """Union of closed arcs on the circle.

    Each arc is stored as ``(start, width)`` with ``start`` in ``[0, 2 pi)``
    and ``width`` in ``[0, 2 pi]``; an arc covers ``start .. start + width``
    counter-clockwise, so wrap-around through ``0`` needs no special casing.
    Overlapping or touching arcs are merged on construction.
    """

    arcs: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        arcs = []
        for start, width in self.arcs:
            if width < 0:
                raise ValueError("arc width must be non-negative")
            arcs.append((start % TWO_PI, min(float(width), TWO_PI)))
        object.__setattr__(self, "arcs", tuple(_merge_arcs(arcs)))

    @classmethod
    def from_bounds(cls, *bounds: Tuple[float, float]) -> "PhaseArcSet":
        """Build from ``(lo, hi)`` pairs with ``lo <= hi`` (any real values)."""
        return cls(tuple((lo, hi - lo) for lo, hi in bounds))

    @classmethod
    def full_circle(cls) -> "PhaseArcSet":
        return cls(((0.0, TWO_PI),))

    @classmethod
    def points(cls, *phis: float) -> "PhaseArcSet":
        return cls(tuple((p, 0.0) for p in phis))

    @property
    def is_empty(self) -> bool:
        return not self.arcs

    @property
    def is_full(self) -> bool:
        return any(w >= TWO_PI for _, w in self.arcs)

    def bounds(self):
        """Arcs as ``(lo, hi)`` with ``lo`` in ``[0, 2 pi)``; ``hi`` may exceed 2 pi."""
        return [(s, s + w) for s, w in self.arcs]

    def contains(self, phi: float, tol: float = 0.0) -> bool:
        for start, width in self.arcs:
            if width >= TWO_PI:
                return True
            off = (phi - start) % TWO_PI
            if off <= width + tol or off >= TWO_PI - tol:
                return True
        return False

    def reflected(self, theta: float) -> "PhaseArcSet":
        """Image under ``phi -> theta - phi``."""
        return PhaseArcSet(tuple((theta - s - w, w) for s, w in self.arcs))

    def endpoints(self):
        out = []
        for start, width in self.arcs:
            out.append(start % TWO_PI)
            out.append((start + width) % TWO_PI)
        return out


def _merge_pair(a, b):
    (s0, w0), (s1, w1) = a, b
    off = (s1 - s0) % TWO_PI
    if off <= w0:
        return s0, min(TWO_PI, max(w0, off + w1))
    back = (s0 - s1) % TWO_PI
    if back <= w1:
        return s1, min(TWO_PI, max(w1, back + w0))
    return None


def _merge_arcs(arcs):
    arcs = sorted(arcs)
    merging = True
    while merging and len(arcs) > 1:
        merging = False
        for p in range(len(arcs)):
            for q in range(p + 1, len(arcs)):
                joined = _merge_pair(arcs[p], arcs[q])
                if joined is not None:
                    arcs = sorted(arcs[:p] + arcs[p + 1:q] + arcs[q + 1:] + [joined])
                    merging = True
                    break
            if merging:
                break
    if any(w >= TWO_PI for _, w in arcs):
        return [(0.0, TWO_PI)]
    return arcs


def circular_distance(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def select_phase(arcs: PhaseArcSet, reference: float) -> float:
    """Point of ``arcs`` closest to ``reference`` on the unit circle.

    Minimizing the chord ``|exp(j phi) - exp(j reference)|`` is the same as
    minimizing the circular distance, so the answer is the reference itself
    when it lies in an arc and the nearest arc endpoint otherwise.  Ties go to
    the smaller angle in ``[0, 2 pi)``.  The result is reduced to ``[0, 2 pi)``.
    """
    if arcs.is_empty:
        raise EmptyArcSet("no feasible phase to choose from")
    if arcs.contains(reference):
        return reference % TWO_PI
    best = None
    best_dist = math.inf
    for p in arcs.endpoints():
        dist = circular_distance(p, reference)
        if dist < best_dist - TIE_TOL:
            best, best_dist = p, dist
        elif abs(dist - best_dist) <= TIE_TOL and p < best:
            best = p
    return best


@dataclass(frozen=True)
class ChainState:
    """Partial sum ``x exp(j gamma)`` after the first ``i`` edges."""

    i: int
    x: float
    gamma: float

    @property
    def vector(self) -> complex:
        return self.x * complex(math.cos(self.gamma), math.sin(self.gamma))

    @classmethod
    def start(cls, d1: float) -> "ChainState":
        return cls(1, float(d1), math.pi)


def step_feasible_modulus_interval(x_prev: float, d, i: int):
    """Range ``[x_min, x_max]`` of ``|x_i|`` that keeps ``x_i, d_{i+1}..d_N`` closable."""
    d = np.asarray(d, dtype=float)
    n = d.size
    if not 2 <= i <= n - 2:
        raise IndexOutOfRange(f"step index must lie in 2..{n - 2}, got {i}")
    di = d[i - 1]
    rest_after_next = d[i + 1:].sum()
    rest = d[i:].sum()
    x_min = max(abs(x_prev - di), d[i] - rest_after_next)
    x_max = min(x_prev + di, rest)
    if x_min > x_max:
        # rounding drift of the partial sum is tolerated, real gaps are not
        if x_min - x_max > TRIANGLE_TOL * (d.sum() + x_prev):
            raise EmptyInterval(
                f"step {i}: x_min={x_min:.17g} exceeds x_max={x_max:.17g}")
        x_min = x_max
    return x_min, x_max


def step_phase_arcs(x_prev: float, gamma_prev: float, d, i: int) -> PhaseArcSet:
    """Directions for edge ``i`` that leave the remaining edges closable."""
    if x_prev <= 0:
        raise ZeroModulus("partial sum is the zero vector; every direction works")
    d = np.asarray(d, dtype=float)
    x_min, x_max = step_feasible_modulus_interval(x_prev, d, i)
    di = d[i - 1]
    denom = 2.0 * x_prev * di
    # fold-back and straight-on limits are exact; acos is ill-conditioned there
    if x_min == abs(x_prev - di):
        delta_min = 0.0
    else:
        delta_min = _clamped_acos((x_prev ** 2 + di ** 2 - x_min ** 2) / denom)
    if x_max == x_prev + di:
        delta_max = math.pi
    else:
        delta_max = _clamped_acos((x_prev ** 2 + di ** 2 - x_max ** 2) / denom)
    c = gamma_prev + math.pi
    return PhaseArcSet.from_bounds(
        (c - delta_max, c - delta_min), (c + delta_min, c + delta_max))


def advance_chain(state: ChainState, d_i: float, phi_star: float) -> ChainState:
    """Add edge ``d_i exp(j phi_star)`` to the partial sum.

    A result at rounding level of the two lengths is snapped to the zero
    vector, whose phase is 0 by convention.
    """
    z = state.vector + d_i * complex(math.cos(phi_star), math.sin(phi_star))
    x = abs(z)
    if x <= ZERO_MODULUS_TOL * (state.x + d_i):
        return ChainState(state.i + 1, 0.0, 0.0)
    return ChainState(state.i + 1, x, math.atan2(z.imag, z.real))


def final_two_edges(state: ChainState, d_last2: float, d_last: float,
                    scale: Optional[float] = None) -> PhaseArcSet:
    """Candidate directions (at most two) for the second-to-last edge.

    ``scale`` sets the size used for the relative triangle check and defaults
    to the perimeter of the closing triangle.
    """
    x = state.x
    if scale is None:
        scale = x + d_last2 + d_last
    violation = max(d_last2 - x - d_last, x - d_last2 - d_last,
                    d_last - x - d_last2)
    if violation > TRIANGLE_TOL * scale:
        raise BrokenTriangle(
            f"sides {x:.17g}, {d_last2:.17g}, {d_last:.17g} do not form a triangle")
    if x <= ZERO_MODULUS_TOL * scale:
        return PhaseArcSet.full_circle()
    delta = _clamped_acos((x * x + d_last2 ** 2 - d_last ** 2) / (2.0 * x * d_last2))
    c = state.gamma + math.pi
    return PhaseArcSet.points(c - delta, c + delta)


def closing_phase(state: ChainState, d_last2: float, phi_last2: float) -> float:
    """Direction of the final edge: from the partial-sum tip back to the origin."""
    tip = advance_chain(state, d_last2, phi_last2)
    return tip.gamma + math.pi


def sequential_construct(d, theta: Optional[Sequence[float]] = None,
                         reference: Optional[Sequence[float]] = None) -> np.ndarray:
    """Walk the edges in order, picking each direction from its feasible set.

    The choice for edge ``i`` is made in the rotated frame ``theta_i - varphi_i``
    as the feasible value nearest ``reference[i]`` (see :func:`select_phase`).
    With both left as ``None`` the walk heads for direction ``0`` in that frame.

    Returns
    -------
    ndarray
        Polygon directions ``varphi`` with ``sum d exp(j varphi) ~ 0``.
    """
    d = as_edges(d)
    n = d.size
    if n < 3:
        raise ValueError("need at least three edges")
    if not is_polygon_feasible(d):
        raise InfeasibleEdges(
            f"d_1 = {d[0]:.6g} exceeds the sum of the others {d[1:].sum():.6g}")
    theta = np.zeros(n) if theta is None else np.asarray(theta, dtype=float)
    reference = np.zeros(n) if reference is None else np.asarray(reference, dtype=float)
    total = d.sum()

    def pick(arcs, idx):
        chosen = select_phase(arcs.reflected(theta[idx]), reference[idx])
        return theta[idx] - chosen

    phases = np.empty(n)
    phases[0] = math.pi
    state = ChainState.start(d[0])
    for i in range(2, n - 1):
        if state.x <= ZERO_MODULUS_TOL * total:
            arcs = PhaseArcSet.full_circle()
        else:
            arcs = step_phase_arcs(state.x, state.gamma, d, i)
        phases[i - 1] = pick(arcs, i - 1)
        state = advance_chain(state, d[i - 1], phases[i - 1])
    arcs = final_two_edges(state, d[-2], d[-1], scale=total)
    phases[-2] = pick(arcs, n - 2)
    phases[-1] = closing_phase(state, d[-2], phases[-2])
    return phases
