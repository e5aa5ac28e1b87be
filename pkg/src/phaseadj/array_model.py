"""
Linear-array model: geometry, steering vectors, weights and beampatterns.

Angles are in radians throughout the library; conversion to degrees happens
at the file/CLI boundary. Element positions are in carrier wavelengths.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateMainBeam, LengthMismatch

MAIN_BEAM_TOL = 1e-12


@dataclass(frozen=True)
class ArrayGeometry:
    """Isotropic elements on a line.

    Parameters
    ----------
    positions : array_like
        Element coordinates in wavelengths, any order.
    """

    positions: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float).ravel()
        if x.size < 1:
            raise ValueError("geometry needs at least one element")
        if not np.all(np.isfinite(x)):
            raise ValueError("element positions must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @property
    def size(self) -> int:
        return self.positions.size

    def __len__(self):
        return self.size


def as_weights(w, geom: ArrayGeometry) -> np.ndarray:
    """Validate a weight vector against ``geom`` and return it as complex."""
    w = np.asarray(w, dtype=complex).ravel()
    if w.size != geom.size:
        raise LengthMismatch(
            f"weight vector has {w.size} entries, geometry has {geom.size}")
    if not np.any(w):
        raise ValueError("weight vector is identically zero")
    return w


def to_db(level):
    """Power ratio to dB; an exact zero maps to ``-inf``."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(level)


def from_db(level_db):
    return 10.0 ** (np.asarray(level_db, dtype=float) / 10.0)


def steering_vector(geom: ArrayGeometry, theta):
    """Steering vector(s) ``exp(j 2 pi x_n sin(theta))``.

    A scalar angle returns shape ``(N,)``; an array of angles returns one row
    per angle.
    """
    theta = np.asarray(theta, dtype=float)
    phase = 2.0 * np.pi * np.multiply.outer(np.sin(theta), geom.positions)
    return np.exp(1j * phase)


def _check_main_beam(resp0, w):
    tol = MAIN_BEAM_TOL * np.linalg.norm(w) * np.sqrt(w.size)
    if abs(resp0) <= tol:
        raise DegenerateMainBeam(
            f"|w^H a(theta0)| = {abs(resp0):.3e} is below {tol:.3e}")


def power_response(w, geom: ArrayGeometry, theta_c, theta_0) -> float:
    """Normalized power response ``|w^H a(theta_c)|^2 / |w^H a(theta_0)|^2``."""
    w = as_weights(w, geom)
    resp0 = np.vdot(w, steering_vector(geom, theta_0))
    _check_main_beam(resp0, w)
    if theta_c == theta_0:
        return 1.0
    resp_c = np.vdot(w, steering_vector(geom, theta_c))
    return float(abs(resp_c) ** 2 / abs(resp0) ** 2)


def sample_pattern(w, geom: ArrayGeometry, theta_0, grid):
    """Sample the normalized beampattern in dB.

    Parameters
    ----------
    w : array_like
        Complex weights, one per element.
    geom : ArrayGeometry
    theta_0 : float
        Main-beam axis (radians); the pattern is 0 dB there.
    grid : array_like
        Non-empty sequence of angles in radians.

    Returns
    -------
    grid : ndarray
        The sampling angles, as given.
    power_db : ndarray
        ``10 log10`` of the normalized power response at each angle.
    """
    w = as_weights(w, geom)
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("sampling grid is empty")
    resp0 = np.vdot(w, steering_vector(geom, theta_0))
    _check_main_beam(resp0, w)
    power = kernels.pattern_power(geom.positions, np.sin(grid), w[:, None])[:, 0]
    ratio = power / abs(resp0) ** 2
    ratio[grid == theta_0] = 1.0
    return grid, to_db(ratio)


def build_preassigned_weight(geom: ArrayGeometry, gains, theta_0) -> np.ndarray:
    """Beam steered to ``theta_0`` with amplitude taper ``gains``."""
    g = np.asarray(gains, dtype=float).ravel()
    if g.size != geom.size:
        raise LengthMismatch(
            f"{g.size} gains given for {geom.size} elements")
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise ValueError("gains must be finite and positive")
    return g * steering_vector(geom, theta_0)
