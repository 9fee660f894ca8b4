"""Single-sideband switching schedules and their harmonic content.

Each element is driven by an in-phase and a quadrature branch. The in-phase
waveform of element n is tri-valued: +1 on [xi_on, xi_off), -1 on the same
interval shifted by half a period, and 0 elsewhere (all times in units of
the modulation period, taken mod 1). The quadrature waveform is the
in-phase one shifted a quarter period, U_q(t) = U_i(t + 1/4), which gives
alpha_q,k = alpha_i,k * exp(j*pi*k/2). The branches are combined with a
-90 degree shift, which cancels every harmonic except k = +1, -3, +5, -7, ...
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import InvalidArgument, UnsupportedSteering
from .geometry import BETA, ArrayGeometry

# Slack on the duty cap, so arcsin(1)/pi and friends are accepted.
_TAU_SLACK = 1e-12

# exp(j*pi*k/2) for k mod 4, exact in floating point.
_J_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


class Branch(str, enum.Enum):
    I = "i"
    Q = "q"


class BeamMode(str, enum.Enum):
    DUAL = "dual"
    SINGLE = "single"


@dataclass(frozen=True)
class ElementSchedule:
    """Normalized turn-on/turn-off times of one element.

    Values may lie outside [0, 1); they are interpreted on the unit circle.
    The duty ``tau = xi_off - xi_on`` must lie in [0, 1/2], otherwise the
    anti-phase half would overlap the positive pulse.
    """

    xi_on: float
    xi_off: float

    def __post_init__(self):
        if not (math.isfinite(self.xi_on) and math.isfinite(self.xi_off)):
            raise InvalidArgument("switching times must be finite")
        tau = self.xi_off - self.xi_on
        if not (-_TAU_SLACK <= tau <= 0.5 + _TAU_SLACK):
            raise InvalidArgument(f"duty xi_off - xi_on = {tau} outside [0, 1/2]")

    @property
    def tau(self) -> float:
        return min(max(self.xi_off - self.xi_on, 0.0), 0.5)


@dataclass(frozen=True)
class ModulationSchedule:
    entries: Tuple[ElementSchedule, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise InvalidArgument("schedule needs at least one element")

    @classmethod
    def from_arrays(cls, xi_on, xi_off) -> "ModulationSchedule":
        xi_on = np.asarray(xi_on, dtype=float).ravel()
        xi_off = np.asarray(xi_off, dtype=float).ravel()
        if xi_on.shape != xi_off.shape:
            raise InvalidArgument("xi_on and xi_off lengths differ")
        return cls(tuple(ElementSchedule(float(a), float(b)) for a, b in zip(xi_on, xi_off)))

    def __len__(self):
        return len(self.entries)

    @property
    def xi_on(self) -> np.ndarray:
        return np.array([e.xi_on for e in self.entries])

    @property
    def xi_off(self) -> np.ndarray:
        return np.array([e.xi_off for e in self.entries])

    @property
    def tau(self) -> np.ndarray:
        return np.array([e.tau for e in self.entries])


@dataclass(frozen=True, eq=False)
class ExcitationWeights:
    """Static complex weights A_n = a_n exp(j phi_n)."""

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=float).ravel()
        ph = np.array(self.phases, dtype=float).ravel()
        if amp.shape != ph.shape:
            raise InvalidArgument("amplitudes and phases lengths differ")
        if not (np.all(np.isfinite(amp)) and np.all(np.isfinite(ph))):
            raise InvalidArgument("weights must be finite")
        if np.any(amp < 0):
            raise InvalidArgument("amplitudes must be non-negative")
        amp.setflags(write=False)
        ph.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "phases", ph)

    def __len__(self):
        return self.amplitudes.size

    @property
    def complex(self) -> np.ndarray:
        return self.amplitudes * np.exp(1j * self.phases)


@dataclass(frozen=True)
class BeamTask:
    """Main-lobe directions (degrees) of the +1st and -3rd harmonics.

    In single-beam mode the -3rd harmonic direction is arbitrary; 120 degrees
    is used unless given.
    """

    theta_plus1: float
    theta_minus3: float = 120.0
    mode: BeamMode = BeamMode.DUAL

    def __post_init__(self):
        object.__setattr__(self, "mode", BeamMode(self.mode))
        for name in ("theta_plus1", "theta_minus3"):
            v = getattr(self, name)
            if not (0.0 < v < 180.0):
                raise InvalidArgument(f"{name} must lie strictly inside (0, 180) degrees, got {v}")


# --------------------------------------------------------------------------
# Waveforms and overlap calculus

def _branch_offset(branch: Branch) -> float:
    return -0.25 if Branch(branch) is Branch.Q else 0.0


def waveform_value(entry: ElementSchedule, branch: Branch, t):
    """Sample the tri-valued waveform at normalized time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    start = entry.xi_on + _branch_offset(branch)
    tau = entry.tau
    pos = np.mod(t - start, 1.0) < tau
    neg = np.mod(t - start - 0.5, 1.0) < tau
    return pos.astype(float) - neg.astype(float)


def _arc_overlap(a, len_a, b, len_b):
    """Length of the intersection of two arcs [a, a+len_a) and [b, b+len_b)
    on the unit circle. Both lengths must be at most 1/2."""
    a = np.mod(a, 1.0)
    b = np.mod(b, 1.0)
    total = 0.0
    for shift in (-1.0, 0.0, 1.0):
        lo = np.maximum(a, b + shift)
        hi = np.minimum(a + len_a, b + shift + len_b)
        total = total + np.maximum(hi - lo, 0.0)
    return total


def _signed_overlap(on_n, tau_n, on_m, tau_m):
    """(1/T) * integral of U_n(t) U_m(t) dt for tri-valued waveforms whose
    positive pulses start at ``on_n``/``on_m``. Broadcasts."""
    same = _arc_overlap(on_n, tau_n, on_m, tau_m) + _arc_overlap(on_n + 0.5, tau_n, on_m + 0.5, tau_m)
    anti = _arc_overlap(on_n, tau_n, on_m + 0.5, tau_m) + _arc_overlap(on_n + 0.5, tau_n, on_m, tau_m)
    return same - anti


def overlap_tau(entry_n: ElementSchedule, entry_m: ElementSchedule) -> float:
    """Same-phase minus anti-phase overlap of U_ni and U_mi over one period.

    Equals sum_k alpha_ni,k conj(alpha_mi,k).
    """
    return float(_signed_overlap(entry_n.xi_on, entry_n.tau, entry_m.xi_on, entry_m.tau))


def overlap_tau_prime(entry_n: ElementSchedule, entry_m: ElementSchedule) -> float:
    """Signed overlap of U_ni against the quadrature waveform U_mq.

    Equals sum_k alpha_ni,k conj(alpha_mq,k); antisymmetric in (n, m).
    """
    return float(_signed_overlap(entry_n.xi_on, entry_n.tau,
                                 entry_m.xi_on + _branch_offset(Branch.Q), entry_m.tau))


def overlap_matrices(schedule: ModulationSchedule):
    """All-pairs ``(tau_nm, tau'_nm)`` as two (N, N) arrays."""
    on = schedule.xi_on
    tau = schedule.tau
    tnm = _signed_overlap(on[:, None], tau[:, None], on[None, :], tau[None, :])
    tpnm = _signed_overlap(on[:, None], tau[:, None], on[None, :] - 0.25, tau[None, :])
    return tnm, tpnm


# --------------------------------------------------------------------------
# Harmonic coefficients

def _as_harmonic(k) -> int:
    if int(k) != k:
        raise InvalidArgument(f"harmonic index must be an integer, got {k}")
    return int(k)


def branch_coefficient(entry: ElementSchedule, branch: Branch, k: int) -> complex:
    """k-th Fourier coefficient of the in-phase or quadrature waveform."""
    k = _as_harmonic(k)
    if k % 2 == 0:
        return 0j
    tau = entry.tau
    coef = (2.0 * math.sin(math.pi * k * tau) / (math.pi * k)
            * complex(np.exp(-1j * math.pi * k * (entry.xi_on + entry.xi_off))))
    if Branch(branch) is Branch.Q:
        coef *= _J_POWERS[k % 4]
    return complex(coef)


def joint_harmonic_coefficient(entry: ElementSchedule, k: int) -> complex:
    """alpha_i,k + exp(-j pi/2) alpha_q,k; nonzero only for k = 1 (mod 4)."""
    return branch_coefficient(entry, Branch.I, k) - 1j * branch_coefficient(entry, Branch.Q, k)


def joint_coefficients(xi_on, xi_off, k: int) -> np.ndarray:
    """Vectorized joint coefficient over arrays of switching times.

    Uses the reduced form 4 sin(pi k tau)/(pi k) exp(-j pi k (on + off)) for
    k = 1 (mod 4) and exact zero otherwise.
    """
    k = _as_harmonic(k)
    xi_on = np.asarray(xi_on, dtype=float)
    xi_off = np.asarray(xi_off, dtype=float)
    if k % 4 != 1:
        return np.zeros(np.broadcast(xi_on, xi_off).shape, dtype=complex)
    tau = xi_off - xi_on
    return 4.0 * np.sin(np.pi * k * tau) / (np.pi * k) * np.exp(-1j * np.pi * k * (xi_on + xi_off))


# --------------------------------------------------------------------------
# Steering

def steering_solution(z, theta_plus1: float, theta_minus3: float, sigma):
    """Phases and switching times placing the +1st and -3rd harmonic beams.

    Pure array form of the steering solve; ``z`` in wavelengths, angles in
    degrees, ``sigma = sin(pi * tau)``. Works on any broadcastable shapes, so
    a whole population of sigma vectors can be solved at once.
    """
    z = np.asarray(z, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    c1 = math.cos(math.radians(theta_plus1))
    c3 = math.cos(math.radians(theta_minus3))
    phases = -0.25 * BETA * z * (3.0 * c1 + c3)
    centre = BETA * z * (c1 - c3)
    half = 4.0 * np.arcsin(sigma)
    xi_on = (centre - half) / (8.0 * np.pi)
    xi_off = (centre + half) / (8.0 * np.pi)
    return np.broadcast_to(phases, xi_on.shape), xi_on, xi_off


def check_sigma(sigma, n_elements: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (n_elements,):
        raise InvalidArgument(f"sigma must have length {n_elements}, got shape {sigma.shape}")
    if not np.all((sigma >= 0.0) & (sigma <= 1.0)):
        raise InvalidArgument("every sigma must lie in [0, 1]")
    return sigma


def solve_steering(geometry: ArrayGeometry, task: BeamTask, sigma: Sequence[float]):
    """Solve phases and schedule for a beam task.

    Returns
    -------
    phases : ndarray
        Static phases phi_n in radians.
    schedule : ModulationSchedule
    """
    if not geometry.on_z_axis:
        raise UnsupportedSteering("closed-form steering requires every element on the z-axis")
    sigma = check_sigma(sigma, geometry.n_elements)
    phases, xi_on, xi_off = steering_solution(geometry.z, task.theta_plus1, task.theta_minus3, sigma)
    return np.array(phases), ModulationSchedule.from_arrays(xi_on, xi_off)
