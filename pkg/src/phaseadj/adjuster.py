"""
Phase-only adjustment of the array response at one angle.

The level constraint ``|w^H a(theta_c)|^2 = rho |w^H a(theta_0)|^2`` is
replaced by the linear one ``w^H h = 0`` with
``h = a(theta_c) - sqrt(rho) exp(j psi) a(theta_0)``.  Keeping the element
magnitudes fixed turns that into closing a polygon whose edges are
``v_n = h_n |w_n|``; see :mod:`phaseadj.polygon`.

The free phase ``psi`` is scanned on a uniform grid (``PHASEADJ_PSI_GRID``
candidates, 64 by default) and the candidate distorting the existing
beampattern the least is kept.
"""
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .array_model import (ArrayGeometry, as_weights, from_db, power_response,
                          steering_vector, to_db, MAIN_BEAM_TOL)
from .errors import (BrokenTriangle, DegenerateMainBeam, InfeasibleEdges,
                     InvalidSpec, LengthMismatch, NoFeasiblePsi,
                     TooFewActiveEdges)
from .polygon import (PhaseArcSet, TRIANGLE_TOL, select_phase,
                      triangle_construct)

__all__ = [
    "AdjustmentSpec", "RotationProblem", "SortPermutation", "AdjustmentReport",
    "compose_h", "compose_rotation_problem", "sort_edges", "reference_weight",
    "select_phase", "choose_psi", "adjust", "triangle_adjust", "PhaseArcSet",
    "distortion_metric",
]

TWO_PI = 2.0 * math.pi
DEFAULT_PSI_GRID = 64
INACTIVE_TOL = 1e-14
PAIR_TOL = 1e-12
# distortion metric: -90..90 deg in 0.05 deg steps, +-2 deg around theta_c left out
DISTORTION_STEP_DEG = 0.05
DISTORTION_GUARD_DEG = 2.0
# power floor for the dB difference, keeps exact nulls finite
DISTORTION_FLOOR = 1e-30


def psi_grid_size() -> int:
    raw = os.environ.get("PHASEADJ_PSI_GRID", "")
    if not raw.strip():
        return DEFAULT_PSI_GRID
    k = int(raw)
    if k < 1:
        raise ValueError("PHASEADJ_PSI_GRID must be a positive integer")
    return k


@dataclass(frozen=True)
class AdjustmentSpec:
    """What to adjust: level ``rhoC`` (linear) at ``thetaC`` relative to ``theta0``.

    Angles are radians.  ``psiC`` pins the free phase; ``None`` lets
    :func:`choose_psi` pick it.
    """

    theta0: float
    thetaC: float
    rhoC: float
    psiC: Optional[float] = None

    def __post_init__(self):
        for name in ("theta0", "thetaC"):
            val = getattr(self, name)
            if not (math.isfinite(val) and abs(val) <= math.pi / 2 + 1e-12):
                raise InvalidSpec(f"{name} must lie in [-90, 90] degrees, got {val!r} rad")
        if not (math.isfinite(self.rhoC) and self.rhoC >= 0):
            raise InvalidSpec(f"rhoC must be a finite non-negative ratio, got {self.rhoC!r}")
        if self.thetaC == self.theta0 and self.rhoC != 1.0:
            raise InvalidSpec("thetaC equals theta0 but rhoC is not 1")
        if self.psiC is not None:
            if not math.isfinite(self.psiC):
                raise InvalidSpec("psiC must be finite")
            object.__setattr__(self, "psiC", float(self.psiC) % TWO_PI)

    @classmethod
    def from_degrees(cls, theta0_deg, thetaC_deg, rhoC_db, psiC=None):
        """``rhoC_db=None`` requests an exact null."""
        rho = 0.0 if rhoC_db is None else float(from_db(rhoC_db))
        return cls(math.radians(theta0_deg), math.radians(thetaC_deg), rho, psiC)


def compose_h(geom: ArrayGeometry, spec: AdjustmentSpec, psi: Optional[float] = None):
    """``a(thetaC) - sqrt(rhoC) exp(j psi) a(theta0)``; ``psi`` defaults to ``spec.psiC``.

    ``psi`` may be an array, giving one row per value.
    """
    if psi is None:
        psi = spec.psiC
    if psi is None:
        raise ValueError("no psi given and spec.psiC is unset")
    coef = math.sqrt(spec.rhoC) * np.exp(1j * np.asarray(psi, dtype=float))
    a_c = steering_vector(geom, spec.thetaC)
    a_0 = steering_vector(geom, spec.theta0)
    return a_c - np.multiply.outer(coef, a_0)


@dataclass(frozen=True)
class RotationProblem:
    """Edges ``v_n = h_n |w_n|`` split into magnitude and phase."""

    magnitudes: np.ndarray
    phases: np.ndarray
    active: np.ndarray

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    @property
    def trivially_satisfied(self) -> bool:
        """No edge has any length: every choice of phases already sums to zero."""
        return self.n_active == 0


def _active_mask(mags):
    peak = mags.max(axis=-1, keepdims=True)
    return (mags > INACTIVE_TOL * peak) & (peak > 0)


def compose_rotation_problem(h, w_pre) -> RotationProblem:
    h = np.asarray(h, dtype=complex).ravel()
    w_pre = np.asarray(w_pre, dtype=complex).ravel()
    if h.size != w_pre.size:
        raise LengthMismatch(f"h has {h.size} entries, w_pre has {w_pre.size}")
    v = h * np.abs(w_pre)
    mags = np.abs(v)
    return RotationProblem(mags, np.angle(v), _active_mask(mags))


@dataclass(frozen=True)
class SortPermutation:
    """``forward[i]`` is the original index of the ``i``-th longest active edge."""

    forward: np.ndarray

    @property
    def inverse(self) -> dict:
        return {int(n): i for i, n in enumerate(self.forward)}

    def to_original(self, sorted_values, fill, size):
        """Scatter values given in sorted order back to original positions."""
        out = np.full(size, fill, dtype=np.result_type(sorted_values, fill))
        out[self.forward] = sorted_values
        return out


def sort_edges(rp: RotationProblem):
    """Sort the active edges by decreasing length.

    Returns ``(d, perm)``.  Fewer than three active edges only close in the
    two-equal-edges case, which is returned as is; everything else raises
    :class:`TooFewActiveEdges`.
    """
    idx = np.flatnonzero(rp.active)
    order = idx[np.argsort(-rp.magnitudes[idx], kind="stable")]
    d = rp.magnitudes[order]
    if d.size < 3:
        if d.size == 2 and abs(d[0] - d[1]) <= PAIR_TOL * d[0]:
            pass
        else:
            raise TooFewActiveEdges(
                f"{d.size} active edge(s) with lengths {d.tolist()} cannot close")
    return d, SortPermutation(order)


def reference_weight(w_pre, h):
    """Minimum-norm change of ``w_pre`` meeting ``h^H w = 0`` exactly.

    Amplitudes are not preserved; only the phases of the result are used, to
    steer each phase choice of the polygon walk.  Stacked ``h`` rows give one
    reference per row.
    """
    w_pre = np.asarray(w_pre, dtype=complex)
    h = np.asarray(h, dtype=complex)
    hh = np.sum(np.abs(h) ** 2, axis=-1)
    if np.any(hh == 0):
        raise ValueError("h is the zero vector")
    proj = np.sum(np.conj(h) * w_pre, axis=-1) / hh
    return w_pre - h * np.expand_dims(proj, -1)


def distortion_grid():
    n = int(round(180.0 / DISTORTION_STEP_DEG)) + 1
    return np.linspace(-90.0, 90.0, n)


def _normalized_db(geom, weights, theta_0, sin_grid):
    # weights: (N, K); returns (G, K) dB normalized at theta_0
    power = kernels.pattern_power(geom.positions, sin_grid, weights)
    resp0 = steering_vector(geom, theta_0) @ np.conj(weights)
    ratio = power / (np.abs(resp0) ** 2)
    return to_db(np.maximum(ratio, DISTORTION_FLOOR))


def distortion_metric(geom, w_pre, w_new, theta_0, theta_c):
    """Mean absolute dB change of the pattern outside +-2 deg of ``theta_c``.

    ``w_new`` may hold several candidates as columns of an ``(N, K)`` array.
    """
    grid_deg = distortion_grid()
    keep = np.abs(grid_deg - math.degrees(theta_c)) > DISTORTION_GUARD_DEG
    s = np.sin(np.radians(grid_deg[keep]))
    w_new = np.asarray(w_new, dtype=complex)
    single = w_new.ndim == 1
    cols = w_new[:, None] if single else w_new
    before = _normalized_db(geom, np.asarray(w_pre, dtype=complex)[:, None], theta_0, s)
    after = _normalized_db(geom, cols, theta_0, s)
    metric = np.mean(np.abs(after - before), axis=0)
    return float(metric[0]) if single else metric


@dataclass
class AdjustmentReport:
    w_new: np.ndarray
    psi_used: float
    residual: float
    level: float
    distortion: float
    h: np.ndarray = field(repr=False)

    @property
    def level_db(self) -> float:
        return float(to_db(self.level))


# --------------------------------------------------------------------------
# batched solve over psi candidates


def _candidate_weights(w_pre, h_rows, method):
    """Phase-only weights for every row of ``h_rows``.

    Returns ``(weights, ok, why)``: ``weights`` is ``(K, N)``, ``ok`` marks
    rows that produced a valid closure and ``why`` holds the exception class
    for rows that did not.
    """
    k_rows, n = h_rows.shape
    mag_w = np.abs(w_pre)
    v = h_rows * mag_w
    mags = np.abs(v)
    thetas = np.angle(v)
    active = _active_mask(mags)
    counts = active.sum(axis=1)

    weights = np.tile(w_pre, (k_rows, 1))
    ok = np.zeros(k_rows, dtype=bool)
    why = [None] * k_rows

    # sort active edges to the front, longest first
    key = np.where(active, -mags, np.inf)
    order = np.argsort(key, axis=1, kind="stable")
    d = np.take_along_axis(mags, order, axis=1)
    th = np.take_along_axis(thetas, order, axis=1)
    lead = d[:, 0]
    rest = np.where(np.arange(n) < counts[:, None], d, 0.0)[:, 1:].sum(axis=1)

    trivial = counts == 0
    ok[trivial] = True
    pair = (counts == 2) & (np.abs(d[:, 0] - d[:, 1]) <= PAIR_TOL * d[:, 0])
    poly = (counts >= 3) & (lead <= rest)
    for r in np.flatnonzero(~(trivial | pair | poly)):
        why[r] = InfeasibleEdges if counts[r] >= 3 else TooFewActiveEdges

    phi_sorted = np.zeros((k_rows, n))
    if np.any(pair):
        phi_sorted[pair, 0] = np.pi
        phi_sorted[pair, 1] = 0.0
    rows = np.flatnonzero(poly)
    if rows.size:
        if method == "triangle":
            for r in rows:
                c = counts[r]
                phi_sorted[r, :c] = triangle_construct(d[r, :c]).phases
            viol = np.zeros(rows.size)
        else:
            wbar = reference_weight(w_pre, h_rows[rows])
            ref = np.take_along_axis(np.angle(wbar), order[rows], axis=1)
            # the longest edge is pinned to element phase theta - pi; rotate the
            # reference (pattern-neutral) so it agrees on that element
            ref += (th[rows, 0] - np.pi - ref[:, 0])[:, None]
            phi_sorted[rows], viol = kernels.chain_phases(
                d[rows], th[rows], ref, counts[rows])
        bad = viol > TRIANGLE_TOL
        for r in rows[bad]:
            why[r] = BrokenTriangle
        poly[rows[bad]] = False

    solved = np.flatnonzero(pair | poly)
    for r in solved:
        c = counts[r]
        idx = order[r, :c]
        # inactive entries keep w_pre untouched
        weights[r, idx] = mag_w[idx] * np.exp(1j * (th[r, :c] - phi_sorted[r, :c]))
    ok[solved] = True
    return weights, ok, why


def _main_beam_ok(geom, weights, theta_0):
    resp0 = steering_vector(geom, theta_0) @ np.conj(weights.T)
    tol = MAIN_BEAM_TOL * np.linalg.norm(weights, axis=1) * math.sqrt(weights.shape[1])
    return np.abs(resp0) > tol


def _psi_candidates(spec, psi_grid):
    if spec.psiC is not None:
        return np.array([spec.psiC])
    if spec.rhoC == 0.0:
        return np.array([0.0])
    k = psi_grid_size() if psi_grid is None else int(psi_grid)
    if k < 1:
        raise ValueError("psi grid needs at least one candidate")
    return TWO_PI * np.arange(k) / k


def _solve(geom, w_pre, spec, method, psi_grid):
    w_pre = as_weights(w_pre, geom)
    psis = _psi_candidates(spec, psi_grid)
    h_rows = compose_h(geom, spec, psis)
    weights, ok, why = _candidate_weights(w_pre, h_rows, method)
    ok &= _main_beam_ok(geom, weights, spec.theta0)

    if not ok.any():
        if psis.size == 1:
            err = why[0] or DegenerateMainBeam
            raise err(f"phase-only adjustment impossible at psi={psis[0]:.6g}")
        raise NoFeasiblePsi(
            f"none of {psis.size} psi candidates admits a phase-only solution")

    cand = np.flatnonzero(ok)
    if cand.size == 1:
        best = cand[0]
        dist = distortion_metric(geom, w_pre, weights[best], spec.theta0, spec.thetaC)
    else:
        metrics = distortion_metric(geom, w_pre, weights[cand].T, spec.theta0, spec.thetaC)
        pos = int(np.argmin(metrics))
        best, dist = cand[pos], float(metrics[pos])

    w_new = weights[best]
    h = h_rows[best]
    return AdjustmentReport(
        w_new=w_new,
        psi_used=float(psis[best]),
        residual=float(abs(np.vdot(w_new, h))),
        level=power_response(w_new, geom, spec.thetaC, spec.theta0),
        distortion=dist,
        h=h,
    )


def choose_psi(geom: ArrayGeometry, spec: AdjustmentSpec, w_pre,
               psi_grid: Optional[int] = None) -> float:
    """Pick ``psi`` from a uniform grid, minimizing :func:`distortion_metric`.

    Infeasible candidates are skipped; ties go to the lowest grid index.
    An explicit ``spec.psiC`` is returned unchanged.
    """
    if spec.psiC is not None:
        return spec.psiC
    return _solve(geom, w_pre, spec, "polygon", psi_grid).psi_used


def adjust(geom: ArrayGeometry, w_pre, spec: AdjustmentSpec,
           psi_grid: Optional[int] = None) -> AdjustmentReport:
    """Change only the phases of ``w_pre`` so the level at ``thetaC`` is ``rhoC``.

    Each edge direction is taken from its feasible set as close as possible
    to the phase of :func:`reference_weight`, which keeps the rest of the
    beampattern near the original.

    Raises
    ------
    Infeasible
        No phase-only solution (for the given ``psiC``, or for any grid value).
    DegenerateMainBeam
        The result has no response at ``theta0``.
    """
    return _solve(geom, w_pre, spec, "polygon", psi_grid)


def triangle_adjust(geom: ArrayGeometry, w_pre, spec: AdjustmentSpec,
                    psi_grid: Optional[int] = None) -> AdjustmentReport:
    """Same as :func:`adjust` with the closed-form triangle closure.

    Cheaper, but it ignores the original pattern; kept for comparison.
    """
    return _solve(geom, w_pre, spec, "triangle", psi_grid)
