"""Harmonic radiation patterns, pattern metrics and Dolph-Chebyshev tapers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, MetricsUndefined
from .geometry import BETA
from .modulation import joint_coefficients

DEFAULT_STEP_DEG = 0.02


def angle_grid(step_deg: float = DEFAULT_STEP_DEG) -> np.ndarray:
    """Uniform elevation grid over [0, 180] degrees, endpoints included."""
    n = int(round(180.0 / step_deg))
    if n < 2 or not math.isclose(n * step_deg, 180.0, rel_tol=1e-9):
        raise InvalidArgument(f"step {step_deg} does not divide 180 degrees")
    return np.linspace(0.0, 180.0, n + 1)


@dataclass(frozen=True, eq=False)
class PatternSamples:
    harmonic: int
    angles: np.ndarray
    magnitudes: np.ndarray

    def to_db(self, reference: float) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(self.magnitudes / reference)


@dataclass(frozen=True)
class PatternMetrics:
    peak_direction: float
    peak_db: float
    sll_db: float
    fnbw_deg: float
    first_null_left: float
    first_null_right: float
    sll_direction: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: dict) -> "PatternMetrics":
        return cls(**{f: float(data[f]) for f in cls.__dataclass_fields__})


def steering_matrix(positions, angles_deg, phi_deg: float = 0.0) -> np.ndarray:
    """exp(j beta r_n . a_r) on the cut at azimuth ``phi_deg``; shape (n_angles, N)."""
    th = np.radians(np.asarray(angles_deg, dtype=float))
    ph = math.radians(phi_deg)
    direction = np.stack([np.sin(th) * math.cos(ph), np.sin(th) * math.sin(ph), np.cos(th)], axis=-1)
    return np.exp(1j * BETA * direction @ np.asarray(positions, dtype=float).T)


def harmonic_pattern(design, k: int, grid=None, phi_deg: float = 0.0) -> PatternSamples:
    """Sample |mu_k(theta)| for harmonic ``k`` of a design.

    Parameters
    ----------
    design : TmaDesign
    k : int
        Harmonic index; only k = 1 (mod 4) radiates.
    grid : array_like, optional
        Elevation angles in degrees within [0, 180]; defaults to a 0.02 degree grid.
    phi_deg : float
        Azimuth of the cut. Irrelevant for arrays on the z-axis.
    """
    angles = angle_grid() if grid is None else np.asarray(grid, dtype=float)
    if angles.ndim != 1 or angles.size < 3 or np.any(np.diff(angles) <= 0):
        raise InvalidArgument("grid must be strictly increasing with at least 3 points")
    if angles[0] < 0.0 or angles[-1] > 180.0:
        raise InvalidArgument("grid must lie within [0, 180] degrees")
    s = design.schedule
    weights = design.weights.complex * joint_coefficients(s.xi_on, s.xi_on + s.tau, k)
    field = steering_matrix(design.geometry.positions, angles, phi_deg) @ weights
    return PatternSamples(int(k), angles, np.abs(field))


def _parabolic(x, y, i):
    """Vertex of the parabola through samples i-1, i, i+1 (uniform spacing)."""
    if i <= 0 or i >= len(y) - 1:
        return x[i], y[i]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2.0 * y1 + y2
    if den == 0.0:
        return x[i], y[i]
    delta = min(max(0.5 * (y0 - y2) / den, -0.5), 0.5)
    h = 0.5 * (x[i + 1] - x[i - 1])
    return x[i] + delta * h, y1 - 0.25 * (y0 - y2) * delta


def pattern_metrics(samples: PatternSamples, reference_peak: float | None = None) -> PatternMetrics:
    """Peak, first-null beamwidth and sidelobe level of a sampled pattern.

    Extrema are refined with a three-point parabola fitted to |mu|^2, which
    is locally quadratic both at lobe peaks and at simple nulls. The first
    nulls are the first local minima on either side of the global peak (a
    grid edge counts if the pattern keeps falling). The sidelobe level is
    the largest value outside the main lobe, edges included.

    Parameters
    ----------
    samples : PatternSamples
    reference_peak : float, optional
        Linear magnitude used as 0 dB; defaults to this pattern's own peak.

    Raises
    ------
    MetricsUndefined
        If the global maximum is not strictly inside the grid.
    """
    x = samples.angles
    mag = samples.magnitudes
    pw = mag * mag
    n = mag.size
    i = int(np.argmax(mag))
    if i == 0 or i == n - 1 or not (mag[i] > 0.0) or not (mag[i] > mag[i - 1] or mag[i] > mag[i + 1]):
        raise MetricsUndefined("pattern has no interior peak")

    peak_dir, peak_pw = _parabolic(x, pw, i)
    peak = math.sqrt(max(peak_pw, mag[i] ** 2))
    ref = peak if reference_peak is None else float(reference_peak)
    if not ref > 0.0:
        raise InvalidArgument("reference_peak must be positive")

    left = i
    while left > 0 and mag[left - 1] <= mag[left]:
        left -= 1
    right = i
    while right < n - 1 and mag[right + 1] <= mag[right]:
        right += 1
    null_left = _parabolic(x, pw, left)[0]
    null_right = _parabolic(x, pw, right)[0]

    sll_lin, sll_dir = 0.0, float("nan")
    for lo, hi in ((0, left), (right + 1, n)):
        if hi > lo:
            j = lo + int(np.argmax(mag[lo:hi]))
            d, p = _parabolic(x, pw, j)
            val = math.sqrt(max(p, mag[j] ** 2))
            if val > sll_lin:
                sll_lin, sll_dir = val, d

    def db(v):
        return 20.0 * math.log10(v / ref) if v > 0.0 else -math.inf

    return PatternMetrics(
        peak_direction=float(peak_dir),
        peak_db=0.0 if ref == peak else db(peak),
        sll_db=db(sll_lin),
        fnbw_deg=float(null_right - null_left),
        first_null_left=float(null_left),
        first_null_right=float(null_right),
        sll_direction=float(sll_dir),
    )


def peak_magnitude(samples: PatternSamples) -> float:
    """Parabola-refined global maximum of |mu|."""
    pw = samples.magnitudes ** 2
    i = int(np.argmax(pw))
    return math.sqrt(max(_parabolic(samples.angles, pw, i)[1], pw[i]))


def chebyshev_taper(n_elements: int, sll_target: float) -> np.ndarray:
    """Dolph-Chebyshev amplitudes for a uniformly spaced array, max = 1.

    The array factor sum_n a_n w**(2n - M), w = exp(j psi/2), M = N - 1, is
    matched to T_M(y) with y = x0 (w + 1/w)/2. The Laurent coefficients of
    T_M(y) are built with the recurrence T_{k+1} = 2 y T_k - T_{k-1}, which
    stays accurate for large N (a power-basis expansion does not).

    Parameters
    ----------
    n_elements : int
        At least 2.
    sll_target : float
        Equi-ripple sidelobe level in dB, negative.
    """
    if int(n_elements) != n_elements or n_elements < 2:
        raise InvalidArgument(f"Chebyshev taper needs at least 2 elements, got {n_elements}")
    if not sll_target < 0.0:
        raise InvalidArgument(f"sll_target must be negative dB, got {sll_target}")
    order = int(n_elements) - 1
    ratio = 10.0 ** (-sll_target / 20.0)
    x0 = math.cosh(math.acosh(ratio) / order)
    # Index j holds the coefficient of w**(j - order).
    width = 2 * order + 1
    prev = np.zeros(width)
    prev[order] = 1.0
    cur = np.zeros(width)
    cur[order - 1] = cur[order + 1] = 0.5 * x0
    for _ in range(order - 1):
        shifted = np.zeros(width)
        shifted[1:] += cur[:-1]
        shifted[:-1] += cur[1:]
        prev, cur = cur, x0 * shifted - prev
    amps = cur[0::2]
    return amps / amps.max()
