"""Brute-force validators for the closed-form expressions.

Nothing here calls the closed forms it is meant to check: harmonic
coefficients come from integrating the switching waveforms piece by piece,
total power from an explicitly truncated harmonic series, and far-field
integrals from Gauss-Legendre x uniform quadrature over the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import InvalidArgument
from .geometry import BETA, ArrayGeometry, ArrayKind
from .modulation import (Branch, ElementSchedule, ExcitationWeights, ModulationSchedule,
                         overlap_matrices, waveform_value)
from .power import TmaDesign


@dataclass(frozen=True)
class OracleConfig:
    """Resolution of the brute-force checks.

    truncation : harmonics |k| <= truncation are summed.
    waveform_samples : samples per period for the sampled-quadrature coefficient.
    sphere_grid : (n_theta, n_phi) nodes for sphere integrals.
    """

    truncation: int = 10_000
    waveform_samples: int = 2 ** 16
    sphere_grid: Tuple[int, int] = (512, 512)

    def __post_init__(self):
        object.__setattr__(self, "sphere_grid", tuple(int(v) for v in self.sphere_grid))
        if self.truncation < 1:
            raise InvalidArgument("truncation must be >= 1")
        if self.waveform_samples < 16:
            raise InvalidArgument("waveform_samples must be >= 16")
        if len(self.sphere_grid) != 2 or min(self.sphere_grid) < 8:
            raise InvalidArgument("sphere_grid needs two counts, each >= 8")


# --------------------------------------------------------------------------
# Harmonic coefficients from the time domain

def waveform_pieces(entry: ElementSchedule, branch: Branch) -> List[Tuple[float, float, float]]:
    """Constant pieces ``(start, end, value)`` of a waveform inside [0, 1).

    Pulses that wrap past t = 1 are split in two.
    """
    start = entry.xi_on - (0.25 if Branch(branch) is Branch.Q else 0.0)
    pieces = []
    for offset, value in ((0.0, 1.0), (0.5, -1.0)):
        a = (start + offset) % 1.0
        b = a + entry.tau
        if b <= 1.0:
            pieces.append((a, b, value))
        else:
            pieces.append((a, 1.0, value))
            pieces.append((0.0, b - 1.0, value))
    return [p for p in pieces if p[1] > p[0]]


def time_domain_coefficients(entry: ElementSchedule, branch: Branch, k) -> np.ndarray:
    """Fourier coefficients (1/T) int U(t) exp(-j 2 pi k t) dt for an array of k.

    Each constant piece is integrated with its exact antiderivative, so there
    is no quadrature error.
    """
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape, dtype=complex)
    nz = k != 0
    kn = k[nz]
    for a, b, value in waveform_pieces(entry, branch):
        out[~nz] += value * (b - a)
        out[nz] += value * (np.exp(-2j * np.pi * kn * a) - np.exp(-2j * np.pi * kn * b)) \
            / (2j * np.pi * kn)
    return out


def time_domain_coefficient(entry: ElementSchedule, branch: Branch, k: int) -> complex:
    """Single harmonic coefficient by exact piecewise integration."""
    return complex(time_domain_coefficients(entry, branch, np.array([k]))[0])


def sampled_coefficient(entry: ElementSchedule, branch: Branch, k: int,
                        config: OracleConfig = OracleConfig()) -> complex:
    """Midpoint-rule estimate of the coefficient from waveform samples.

    Error is O(1/waveform_samples) because of the jumps; useful as a check
    on the piece bookkeeping itself.
    """
    m = config.waveform_samples
    t = (np.arange(m) + 0.5) / m
    return complex(np.mean(waveform_value(entry, branch, t) * np.exp(-2j * np.pi * k * t)))


def _harmonics(config: OracleConfig) -> np.ndarray:
    return np.arange(-config.truncation, config.truncation + 1)


def _joint_series(schedule: ModulationSchedule, k) -> np.ndarray:
    """(N, len(k)) joint coefficients alpha_i - j alpha_q from the time domain."""
    rows = []
    for e in schedule.entries:
        rows.append(time_domain_coefficients(e, Branch.I, k) - 1j * time_domain_coefficients(e, Branch.Q, k))
    return np.array(rows)


def series_overlaps(entry_n: ElementSchedule, entry_m: ElementSchedule,
                    config: OracleConfig = OracleConfig()) -> Tuple[float, float]:
    """Truncated sums of alpha_ni conj(alpha_mi) and alpha_ni conj(alpha_mq)."""
    k = _harmonics(config)
    a_ni = time_domain_coefficients(entry_n, Branch.I, k)
    a_mi = time_domain_coefficients(entry_m, Branch.I, k)
    a_mq = time_domain_coefficients(entry_m, Branch.Q, k)
    return float(np.real(np.sum(a_ni * np.conj(a_mi)))), float(np.real(np.sum(a_ni * np.conj(a_mq))))


# --------------------------------------------------------------------------
# Power oracles

def series_total_power(design: TmaDesign, config: OracleConfig = OracleConfig()) -> float:
    """Total power as 4 pi sum_nm A_n A_m* kernel_nm sum_{|k|<=K} alpha_n,k conj(alpha_m,k)."""
    alpha = _joint_series(design.schedule, _harmonics(config))
    cross = alpha @ alpha.conj().T
    A = design.weights.complex
    weights = A[:, None] * np.conj(A[None, :]) * design.geometry.kernel_matrix()
    return float(4.0 * np.pi * np.real(np.sum(weights * cross)))


def _sphere_nodes(config: OracleConfig):
    n_theta, n_phi = config.sphere_grid
    u, w_u = np.polynomial.legendre.leggauss(n_theta)  # u = cos(theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1.0 - u * u)
    dirs = np.stack([s[:, None] * np.cos(phi)[None, :],
                     s[:, None] * np.sin(phi)[None, :],
                     np.broadcast_to(u[:, None], (n_theta, n_phi))], axis=-1)
    weights = w_u[:, None] * np.full(n_phi, 2.0 * np.pi / n_phi)[None, :]
    return dirs.reshape(-1, 3), weights.ravel()


def sphere_kernel(delta_r, config: OracleConfig = OracleConfig()) -> complex:
    """Numerical int int exp(j beta dr . a_r) sin(theta) dtheta dphi; ideally 4 pi sinc(beta R)."""
    dirs, w = _sphere_nodes(config)
    return complex(np.sum(w * np.exp(1j * BETA * dirs @ np.asarray(delta_r, dtype=float))))


def sphere_integral_power(design: TmaDesign, config: OracleConfig = OracleConfig()) -> float:
    """Total power with every pair's spatial integral done numerically.

    The temporal cross terms come from the overlap routines (sum_k alpha_n,k
    conj(alpha_m,k) = 2 (tau_nm + j tau'_nm), and 4 tau_n on the diagonal),
    so agreement with ``total_power`` isolates the sin(beta R)/(beta R) kernel.
    """
    pos = design.geometry.positions
    n = len(pos)
    tnm, tpnm = overlap_matrices(design.schedule)
    cross = 2.0 * (tnm + 1j * tpnm)
    np.fill_diagonal(cross, 4.0 * design.schedule.tau)
    A = design.weights.complex
    total = 0.0
    for i in range(n):
        for j in range(n):
            integral = 4.0 * np.pi if i == j else sphere_kernel(pos[i] - pos[j], config)
            total += A[i] * np.conj(A[j]) * integral * cross[i, j]
    return float(np.real(total))


def harmonic_power_integral(design: TmaDesign, k: int, config: OracleConfig = OracleConfig()) -> float:
    """int int |mu_k(theta, phi)|^2 sin(theta) dtheta dphi by quadrature.

    mu_k is assembled from time-domain coefficients, so neither the joint
    coefficient closed form nor the useful-power closed forms are used.
    """
    alpha = _joint_series(design.schedule, np.array([k]))[:, 0]
    dirs, w = _sphere_nodes(config)
    mu = np.exp(1j * BETA * dirs @ design.geometry.positions.T) @ (design.weights.complex * alpha)
    return float(np.sum(w * np.abs(mu) ** 2))


# --------------------------------------------------------------------------
# Random designs and the verification suite

def random_design(rng: np.random.Generator, n_elements: int, planar: bool = False) -> TmaDesign:
    """Random geometry, weights and schedule (pulses may wrap past t = 1).

    Duties start at 0.05: the truncated series loses about 1e-5/tau relative
    accuracy at K = 10**4, so shorter pulses would test the truncation, not
    the closed form.
    """
    if planar:
        pos = np.zeros((n_elements, 3))
        pos[:, :2] = rng.uniform(0.0, 2.0, size=(n_elements, 2))
        geom = ArrayGeometry(pos, ArrayKind.PLANAR)
    else:
        pos = np.zeros((n_elements, 3))
        pos[:, 2] = np.sort(rng.uniform(0.0, 3.0, size=n_elements))
        geom = ArrayGeometry(pos, ArrayKind.LINEAR_Z)
    xi_on = rng.uniform(-1.0, 2.0, size=n_elements)
    tau = rng.uniform(0.05, 0.5, size=n_elements)
    weights = ExcitationWeights(rng.uniform(0.1, 1.0, n_elements), rng.uniform(-np.pi, np.pi, n_elements))
    return TmaDesign(geom, weights, ModulationSchedule.from_arrays(xi_on, xi_on + tau))


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    count: int = 0
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.max_error <= self.tolerance)


def verify(design: TmaDesign | None = None, n_random: int = 20, seed: int = 0,
           config: OracleConfig = OracleConfig(truncation=10_000, sphere_grid=(128, 128))) -> List[CheckResult]:
    """Run every oracle against its closed form.

    Checks the given design (if any) plus ``n_random`` random designs, half
    of them planar. Returns one ``CheckResult`` per suite with the largest
    observed relative (or absolute, for coefficients) error.
    """
    from .modulation import branch_coefficient, overlap_tau, overlap_tau_prime
    from .power import total_power, useful_power_minus3, useful_power_plus1

    rng = np.random.default_rng(seed)
    designs = [] if design is None else [design]
    designs += [random_design(rng, int(rng.integers(1, 9)), planar=bool(i % 2)) for i in range(n_random)]

    err = {"coefficients": 0.0, "overlaps": 0.0, "total_power": 0.0,
           "useful_plus1": 0.0, "useful_minus3": 0.0, "sphere_kernel": 0.0}
    for d in designs:
        for e in d.schedule.entries:
            ks = np.arange(-9, 10)
            for br in (Branch.I, Branch.Q):
                td = time_domain_coefficients(e, br, ks)
                cf = np.array([branch_coefficient(e, br, int(k)) for k in ks])
                err["coefficients"] = max(err["coefficients"], float(np.max(np.abs(td - cf))))
        entries = d.schedule.entries
        for a in range(len(entries)):
            for b in range(len(entries)):
                t_s, tp_s = series_overlaps(entries[a], entries[b], config)
                err["overlaps"] = max(err["overlaps"], abs(t_s - overlap_tau(entries[a], entries[b])),
                                      abs(tp_s - overlap_tau_prime(entries[a], entries[b])))
        p = total_power(d)
        scale = 16.0 * np.pi * float(np.sum(d.weights.amplitudes ** 2 * d.schedule.tau)) or 1.0
        err["total_power"] = max(err["total_power"], abs(series_total_power(d, config) - p) / scale)
        err["sphere_kernel"] = max(err["sphere_kernel"], abs(sphere_integral_power(d, config) - p) / scale)
        for key, k, fn in (("useful_plus1", 1, useful_power_plus1), ("useful_minus3", -3, useful_power_minus3)):
            err[key] = max(err[key], abs(harmonic_power_integral(d, k, config) - fn(d)) / scale)

    tol = {"coefficients": 1e-12, "overlaps": 5e-4, "total_power": 5e-4,
           "useful_plus1": 1e-4, "useful_minus3": 1e-4, "sphere_kernel": 1e-6}
    return [CheckResult(name, err[name], tol[name], len(designs)) for name in err]
