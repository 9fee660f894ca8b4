"""Closed-form radiated, useful and lost power of a single-sideband TMA.

Powers are in the unnormalized units of the far-field integral
2*pi * int sum_k |mu_k(theta)|^2 sin(theta) dtheta, so a lone element with
|A| = 1 and duty tau radiates 16*pi*tau.

The pair term uses tau_nm Re(A_n A_m*) - tau'_nm Im(A_n A_m*). The minus
sign follows from tau'_nm = sum_k alpha_ni,k conj(alpha_mq,k) and is
confirmed against the truncated harmonic series in ``ssbtma.oracle``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDesign, InvalidArgument
from .geometry import ArrayGeometry, CarrierConfig
from .modulation import BeamTask, ExcitationWeights, ModulationSchedule, _signed_overlap, solve_steering


@dataclass(frozen=True, eq=False)
class TmaDesign:
    geometry: ArrayGeometry
    weights: ExcitationWeights
    schedule: ModulationSchedule
    carrier: CarrierConfig = CarrierConfig()

    def __post_init__(self):
        n = self.geometry.n_elements
        if len(self.weights) != n or len(self.schedule) != n:
            raise InvalidArgument(
                f"geometry has {n} elements but weights have {len(self.weights)} "
                f"and schedule has {len(self.schedule)}"
            )

    @property
    def n_elements(self) -> int:
        return self.geometry.n_elements

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry.to_dict(),
            "amplitudes": self.weights.amplitudes.tolist(),
            "phases_rad": self.weights.phases.tolist(),
            "xi_on": self.schedule.xi_on.tolist(),
            "xi_off": self.schedule.xi_off.tolist(),
            "carrier_frequency_hz": self.carrier.carrier_frequency,
            "modulation_frequency_hz": self.carrier.modulation_frequency,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TmaDesign":
        return cls(
            ArrayGeometry.from_dict(data["geometry"]),
            ExcitationWeights(data["amplitudes"], data["phases_rad"]),
            ModulationSchedule.from_arrays(data["xi_on"], data["xi_off"]),
            CarrierConfig(data["carrier_frequency_hz"], data["modulation_frequency_hz"]),
        )


@dataclass(frozen=True)
class PowerReport:
    total: float
    useful_plus1: float
    useful_minus3: float
    loss_dual: float
    loss_single: float
    eta_dual: float
    eta_single: float

    @property
    def loss_dual_fraction(self) -> float:
        return 1.0 - self.eta_dual

    @property
    def loss_single_fraction(self) -> float:
        return 1.0 - self.eta_single

    def loss_fraction(self, mode) -> float:
        return self.loss_single_fraction if str(getattr(mode, "value", mode)) == "single" \
            else self.loss_dual_fraction

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "useful_plus1": self.useful_plus1,
            "useful_minus3": self.useful_minus3,
            "loss_dual": self.loss_dual,
            "loss_single": self.loss_single,
            "eta_dual": self.eta_dual,
            "eta_single": self.eta_single,
            "loss_dual_fraction": self.loss_dual_fraction,
            "loss_single_fraction": self.loss_single_fraction,
            "loss_dual_percent": round(100.0 * self.loss_dual_fraction, 2),
            "loss_single_percent": round(100.0 * self.loss_single_fraction, 2),
            "eta_dual_percent": round(100.0 * self.eta_dual, 2),
            "eta_single_percent": round(100.0 * self.eta_single, 2),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PowerReport":
        return cls(**{f: float(data[f]) for f in cls.__dataclass_fields__})


def steered_design(geometry: ArrayGeometry, task: BeamTask, sigma, amplitudes,
                   carrier: CarrierConfig = CarrierConfig()) -> TmaDesign:
    """Design whose phases and schedule come from the steering solve for ``task``."""
    phases, schedule = solve_steering(geometry, task, sigma)
    return TmaDesign(geometry, ExcitationWeights(amplitudes, phases), schedule, carrier)


# --------------------------------------------------------------------------
# Array-level closed forms. Leading axes of A, xi_on, xi_off are batch axes;
# the last axis runs over elements. ``kernel`` is the (N, N) coupling matrix.

def _pair_sum(kernel, values):
    """Sum of ``kernel * values`` over the strict upper triangle (each unordered pair once)."""
    n = kernel.shape[-1]
    mask = np.triu(np.ones((n, n), dtype=bool), k=1)
    return np.sum(np.where(mask, kernel * values, 0.0), axis=(-2, -1))


def _outer_conj(A):
    return A[..., :, None] * np.conj(A[..., None, :])


def total_power_arrays(A, xi_on, xi_off, kernel):
    tau = xi_off - xi_on
    self_term = 16.0 * np.pi * np.sum(np.abs(A) ** 2 * tau, axis=-1)
    if kernel.shape[-1] < 2:
        return self_term
    on_n, on_m = xi_on[..., :, None], xi_on[..., None, :]
    tau_n, tau_m = tau[..., :, None], tau[..., None, :]
    tnm = _signed_overlap(on_n, tau_n, on_m, tau_m)
    tpnm = _signed_overlap(on_n, tau_n, on_m - 0.25, tau_m)
    Z = _outer_conj(A)
    return self_term + 16.0 * np.pi * _pair_sum(kernel, tnm * Z.real - tpnm * Z.imag)


def useful_plus1_arrays(A, xi_on, xi_off, kernel):
    tau = xi_off - xi_on
    s = xi_on + xi_off
    self_term = 32.0 / np.pi * np.sum(np.abs(A) ** 2 * (1.0 - np.cos(2.0 * np.pi * tau)), axis=-1)
    if kernel.shape[-1] < 2:
        return self_term
    sn = np.sin(np.pi * tau)
    rot = np.exp(1j * np.pi * (s[..., None, :] - s[..., :, None]))
    pair = sn[..., :, None] * sn[..., None, :] * np.real(_outer_conj(A) * rot)
    return self_term + 128.0 / np.pi * _pair_sum(kernel, pair)


def useful_minus3_arrays(A, xi_on, xi_off, kernel):
    tau = xi_off - xi_on
    s = xi_on + xi_off
    self_term = 32.0 / (9.0 * np.pi) * np.sum(np.abs(A) ** 2 * (1.0 - np.cos(6.0 * np.pi * tau)),
                                              axis=-1)
    if kernel.shape[-1] < 2:
        return self_term
    sn = np.sin(3.0 * np.pi * tau)
    rot = np.exp(3j * np.pi * (s[..., :, None] - s[..., None, :]))
    pair = sn[..., :, None] * sn[..., None, :] * np.real(_outer_conj(A) * rot)
    return self_term + 128.0 / (9.0 * np.pi) * _pair_sum(kernel, pair)


# --------------------------------------------------------------------------
# Design-level API

def _unpack(design: TmaDesign):
    s = design.schedule
    return design.weights.complex, s.xi_on, s.xi_on + s.tau, design.geometry.kernel_matrix()


def total_power(design: TmaDesign) -> float:
    """Total power radiated over all harmonics."""
    return float(total_power_arrays(*_unpack(design)))


def useful_power_plus1(design: TmaDesign) -> float:
    """Power carried by the +1st harmonic."""
    return float(useful_plus1_arrays(*_unpack(design)))


def useful_power_minus3(design: TmaDesign) -> float:
    """Power carried by the -3rd harmonic."""
    return float(useful_minus3_arrays(*_unpack(design)))


def report_from_powers(total: float, plus1: float, minus3: float) -> PowerReport:
    if not total > 0.0:
        raise DegenerateDesign(f"total radiated power is {total}; every element is switched off")
    return PowerReport(
        total=float(total),
        useful_plus1=float(plus1),
        useful_minus3=float(minus3),
        loss_dual=float(total - plus1 - minus3),
        loss_single=float(total - plus1),
        eta_dual=float((plus1 + minus3) / total),
        eta_single=float(plus1 / total),
    )


def power_report(design: TmaDesign) -> PowerReport:
    """Total, useful and lost power with dual- and single-beam efficiencies.

    Raises
    ------
    DegenerateDesign
        If the design radiates no power.
    """
    args = _unpack(design)
    return report_from_powers(total_power_arrays(*args), useful_plus1_arrays(*args),
                              useful_minus3_arrays(*args))
