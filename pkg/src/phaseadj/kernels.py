"""
Hot loops: the batched polygon walk and beampattern evaluation.

Each kernel has a numba implementation and a pure-numpy one with identical
semantics.  Which one runs is fixed at import time by
:data:`phaseadj._accel.USE_NUMBA` (see ``PHASEADJ_DISABLE_NUMBA``); both are
importable directly for testing and benchmarking.

The walk works on rows of sorted edge lengths ``d`` together with the
rotation angles ``theta`` of each edge and a reference phase per edge.  For
edge ``i`` it picks the element phase ``theta_i - varphi_i`` closest to the
reference among those keeping the rest of the polygon closable, exactly as
:func:`phaseadj.polygon.sequential_construct` does one arc set at a time.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

TWO_PI = 2.0 * math.pi
TIE_TOL = 1e-12
ZERO_MODULUS_TOL = 1e-14


# --------------------------------------------------------------------------
# polygon walk, numba


@njit(cache=True)
def _pick_numba(theta_i, ref_i, gamma, dmin, dmax):
    # element phases allowed: c + s with dmin <= |s| <= dmax, c = theta_i - gamma - pi
    c = theta_i - gamma - math.pi
    t = (ref_i - c + math.pi) % TWO_PI - math.pi
    a = abs(t)
    if a < dmin:
        target = dmin
        tie = 2.0 * a <= TIE_TOL
    elif a > dmax:
        target = dmax
        tie = 2.0 * (math.pi - a) <= TIE_TOL
    else:
        return gamma + math.pi - t
    if tie:
        lo = (c - target) % TWO_PI
        hi = (c + target) % TWO_PI
        s = -target if lo < hi else target
    elif t >= 0.0:
        s = target
    else:
        s = -target
    return gamma + math.pi - s


@njit(cache=True)
def _clamp(c):
    if c > 1.0:
        return 1.0
    if c < -1.0:
        return -1.0
    return c


@njit(cache=True)
def _chain_row_numba(d, theta, ref, out):
    n = d.shape[0]
    suffix = np.zeros(n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + d[k]
    total = suffix[0]
    ztol = ZERO_MODULUS_TOL * total
    viol = 0.0

    out[0] = math.pi
    x = d[0]
    g = math.pi
    for i in range(1, n - 2):
        di = d[i]
        if x <= ztol:
            phi = theta[i] - ref[i]
        else:
            xmin = max(abs(x - di), d[i + 1] - suffix[i + 2])
            xmax = min(x + di, suffix[i + 1])
            if xmin > xmax:
                viol = max(viol, (xmin - xmax) / total)
                xmin = xmax
            denom = 2.0 * x * di
            # fold-back and straight-on limits are exact; acos is ill-conditioned there
            if xmin == abs(x - di):
                dmin = 0.0
            else:
                dmin = math.acos(_clamp((x * x + di * di - xmin * xmin) / denom))
            if xmax == x + di:
                dmax = math.pi
            else:
                dmax = math.acos(_clamp((x * x + di * di - xmax * xmax) / denom))
            phi = _pick_numba(theta[i], ref[i], g, dmin, dmax)
        out[i] = phi
        zr = x * math.cos(g) + di * math.cos(phi)
        zi = x * math.sin(g) + di * math.sin(phi)
        x = math.hypot(zr, zi)
        g = math.atan2(zi, zr) if x > 0.0 else 0.0

    a = d[n - 2]
    b = d[n - 1]
    v = max(a - x - b, x - a - b, b - x - a)
    if v > 0.0:
        viol = max(viol, v / total)
    if x <= ztol:
        phi = theta[n - 2] - ref[n - 2]
    else:
        delta = math.acos(_clamp((x * x + a * a - b * b) / (2.0 * x * a)))
        phi = _pick_numba(theta[n - 2], ref[n - 2], g, delta, delta)
    out[n - 2] = phi
    zr = x * math.cos(g) + a * math.cos(phi)
    zi = x * math.sin(g) + a * math.sin(phi)
    out[n - 1] = math.atan2(zi, zr) + math.pi
    return viol


@njit(cache=True)
def _chain_rows_numba(d, theta, ref, counts):
    rows = d.shape[0]
    out = np.zeros(d.shape)
    viol = np.zeros(rows)
    for r in range(rows):
        n = counts[r]
        viol[r] = _chain_row_numba(d[r, :n], theta[r, :n], ref[r, :n], out[r, :n])
    return out, viol


# --------------------------------------------------------------------------
# polygon walk, numpy (vectorized across rows of equal length)


def _pick_numpy(theta_i, ref_i, gamma, dmin, dmax):
    c = theta_i - gamma - np.pi
    t = np.mod(ref_i - c + np.pi, TWO_PI) - np.pi
    a = np.abs(t)
    below = a < dmin
    above = a > dmax
    target = np.where(below, dmin, dmax)
    tie = np.where(below, 2.0 * a <= TIE_TOL, 2.0 * (np.pi - a) <= TIE_TOL)
    lo = np.mod(c - target, TWO_PI)
    hi = np.mod(c + target, TWO_PI)
    s_tie = np.where(lo < hi, -target, target)
    s_out = np.where(tie, s_tie, np.where(t >= 0.0, target, -target))
    s = np.where(below | above, s_out, t)
    return gamma + np.pi - s


def _chain_block_numpy(d, theta, ref):
    rows, n = d.shape
    suffix = np.zeros((rows, n + 1))
    suffix[:, :n] = np.cumsum(d[:, ::-1], axis=1)[:, ::-1]
    total = suffix[:, 0]
    ztol = ZERO_MODULUS_TOL * total
    viol = np.zeros(rows)
    out = np.empty((rows, n))

    out[:, 0] = np.pi
    x = d[:, 0].copy()
    g = np.full(rows, np.pi)
    for i in range(1, n - 2):
        di = d[:, i]
        xmin = np.maximum(np.abs(x - di), d[:, i + 1] - suffix[:, i + 2])
        xmax = np.minimum(x + di, suffix[:, i + 1])
        viol = np.maximum(viol, np.maximum(xmin - xmax, 0.0) / total)
        xmin = np.minimum(xmin, xmax)
        zero = x <= ztol
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = 2.0 * x * di
            dmin = np.arccos(np.clip((x * x + di * di - xmin * xmin) / denom, -1, 1))
            dmax = np.arccos(np.clip((x * x + di * di - xmax * xmax) / denom, -1, 1))
        dmin = np.where(zero | (xmin == np.abs(x - di)), 0.0, dmin)
        dmax = np.where(zero | (xmax == x + di), np.pi, dmax)
        phi = _pick_numpy(theta[:, i], ref[:, i], g, dmin, dmax)
        phi = np.where(zero, theta[:, i] - ref[:, i], phi)
        out[:, i] = phi
        z = x * np.exp(1j * g) + di * np.exp(1j * phi)
        x = np.abs(z)
        g = np.where(x > 0.0, np.angle(z), 0.0)

    a = d[:, n - 2]
    b = d[:, n - 1]
    v = np.maximum(np.maximum(a - x - b, x - a - b), b - x - a)
    viol = np.maximum(viol, np.maximum(v, 0.0) / total)
    zero = x <= ztol
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.arccos(np.clip((x * x + a * a - b * b) / (2.0 * x * a), -1, 1))
    delta = np.where(zero, 0.0, delta)
    phi = _pick_numpy(theta[:, n - 2], ref[:, n - 2], g, delta, delta)
    phi = np.where(zero, theta[:, n - 2] - ref[:, n - 2], phi)
    out[:, n - 2] = phi
    z = x * np.exp(1j * g) + a * np.exp(1j * phi)
    out[:, n - 1] = np.angle(z) + np.pi
    return out, viol


def _chain_rows_numpy(d, theta, ref, counts):
    out = np.zeros(d.shape)
    viol = np.zeros(d.shape[0])
    for n in np.unique(counts):
        rows = np.flatnonzero(counts == n)
        o, v = _chain_block_numpy(d[rows, :n], theta[rows, :n], ref[rows, :n])
        out[rows, :n] = o
        viol[rows] = v
    return out, viol


def chain_phases(d, theta, ref, counts=None):
    """Run the reference-guided polygon walk on every row.

    Parameters
    ----------
    d : ndarray, shape (K, M)
        Edge lengths, each row sorted non-increasing over its first
        ``counts[k]`` entries (the rest is padding and ignored).
    theta, ref : ndarray, shape (K, M)
        Rotation angle and reference element phase of each edge.
    counts : ndarray of int, optional
        Number of edges per row, each at least 3.  Defaults to ``M``.

    Returns
    -------
    varphi : ndarray, shape (K, M)
        Polygon directions (zero in the padding).
    violation : ndarray, shape (K,)
        Largest relative breach of a modulus interval or of the closing
        triangle inequality met on the way; rounding level when healthy.
    """
    d = np.ascontiguousarray(np.atleast_2d(d), dtype=float)
    theta = np.ascontiguousarray(np.atleast_2d(theta), dtype=float)
    ref = np.ascontiguousarray(np.atleast_2d(ref), dtype=float)
    if counts is None:
        counts = np.full(d.shape[0], d.shape[1], dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if np.any(counts < 3):
        raise ValueError("each row needs at least three edges")
    if USE_NUMBA:
        return _chain_rows_numba(d, theta, ref, counts)
    return _chain_rows_numpy(d, theta, ref, counts)


# --------------------------------------------------------------------------
# beampattern


@njit(cache=True)
def _pattern_power_numba(x, s, w):
    n_grid = s.shape[0]
    n_el, n_w = w.shape
    wc = np.conj(w)
    out = np.empty((n_grid, n_w))
    for gi in range(n_grid):
        acc = np.zeros(n_w, dtype=np.complex128)
        for n in range(n_el):
            ph = TWO_PI * x[n] * s[gi]
            a = complex(math.cos(ph), math.sin(ph))
            for k in range(n_w):
                acc[k] += wc[n, k] * a
        for k in range(n_w):
            out[gi, k] = acc[k].real ** 2 + acc[k].imag ** 2
    return out


def _pattern_power_numpy(x, s, w):
    steer = np.exp(1j * TWO_PI * np.multiply.outer(s, x))
    resp = steer @ np.conj(w)
    return resp.real ** 2 + resp.imag ** 2


def pattern_power(positions, sin_grid, weights):
    """Unnormalized power ``|w_k^H a(theta_g)|^2`` for every grid point and column.

    ``weights`` has one column per weight vector, shape ``(N, K)``; the result
    has shape ``(G, K)``.
    """
    x = np.ascontiguousarray(positions, dtype=float)
    s = np.ascontiguousarray(sin_grid, dtype=float)
    w = np.ascontiguousarray(weights, dtype=complex)
    if USE_NUMBA:
        return _pattern_power_numba(x, s, w)
    return _pattern_power_numpy(x, s, w)
