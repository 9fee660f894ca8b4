"""Array geometry, carrier settings and the pairwise spatial coupling kernel.

Positions are stored in wavelengths, so the wavenumber is exactly 2*pi and
the carrier frequency never enters the power expressions.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CoincidentElementsWarning, InvalidArgument

#: Wavenumber in radians per wavelength.
BETA = 2.0 * np.pi

# Below this argument sin(x)/x is evaluated from its Taylor series.
_SERIES_CUTOFF = 1e-6


class ArrayKind(str, enum.Enum):
    LINEAR_Z = "linear-z"
    PLANAR = "planar"
    VOLUMETRIC = "volumetric"


@dataclass(frozen=True)
class CarrierConfig:
    """Carrier and switching frequencies in Hz."""

    carrier_frequency: float = 1e9
    modulation_frequency: float = 50e6

    def __post_init__(self):
        if not (self.carrier_frequency > self.modulation_frequency > 0):
            raise InvalidArgument(
                "need carrier_frequency > modulation_frequency > 0, got "
                f"{self.carrier_frequency} and {self.modulation_frequency}"
            )

    @property
    def modulation_period(self) -> float:
        return 1.0 / self.modulation_frequency

    @property
    def angular_frequency(self) -> float:
        return 2.0 * np.pi * self.carrier_frequency

    @property
    def wavelength(self) -> float:
        return 299_792_458.0 / self.carrier_frequency


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Element positions (x, y, z) in wavelengths.

    Parameters
    ----------
    positions : array_like, shape (N, 3)
    kind : ArrayKind
        Descriptive tag. ``LINEAR_Z`` is checked: every element must lie on
        the z-axis.
    """

    positions: np.ndarray
    kind: ArrayKind = ArrayKind.VOLUMETRIC
    _kernel: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise InvalidArgument("positions must have shape (N, 3) with N >= 1")
        if not np.all(np.isfinite(pos)):
            raise InvalidArgument("positions must be finite")
        kind = ArrayKind(self.kind)
        if kind is ArrayKind.LINEAR_Z and np.any(pos[:, :2] != 0.0):
            raise InvalidArgument("linear-z geometry requires x = y = 0 for every element")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "kind", kind)

        dist = self.distance_matrix()
        off_diag = ~np.eye(len(pos), dtype=bool)
        if np.any(dist[off_diag] == 0.0):
            warnings.warn("geometry contains coincident elements", CoincidentElementsWarning,
                          stacklevel=3)
        kern = sinc_kernel(BETA * dist)
        kern.setflags(write=False)
        object.__setattr__(self, "_kernel", kern)

    def __len__(self):
        return self.positions.shape[0]

    @property
    def n_elements(self) -> int:
        return self.positions.shape[0]

    @property
    def z(self) -> np.ndarray:
        return self.positions[:, 2]

    @property
    def on_z_axis(self) -> bool:
        """True when every element has x = y = 0, whatever the ``kind`` tag says."""
        return bool(np.all(self.positions[:, :2] == 0.0))

    def distance_matrix(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def kernel_matrix(self) -> np.ndarray:
        """Matrix of sin(beta R)/(beta R) over all element pairs (read-only)."""
        return self._kernel

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "positions": self.positions.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ArrayGeometry":
        return cls(np.asarray(data["positions"], dtype=float), ArrayKind(data["kind"]))


def sinc_kernel(x):
    """Unnormalized sinc, sin(x)/x, with the removable singularity handled.

    Uses 1 - x**2/6 + x**4/120 for |x| < 1e-6.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)


def linear_uniform(n_elements: int, spacing: float) -> ArrayGeometry:
    """Uniform linear array along z: element n sits at z = n * spacing."""
    if int(n_elements) != n_elements or n_elements < 1:
        raise InvalidArgument(f"n_elements must be a positive integer, got {n_elements}")
    if not (spacing > 0) or not math.isfinite(spacing):
        raise InvalidArgument(f"spacing must be positive, got {spacing}")
    pos = np.zeros((int(n_elements), 3))
    pos[:, 2] = spacing * np.arange(int(n_elements))
    return ArrayGeometry(pos, ArrayKind.LINEAR_Z)


def _check_index(geometry: ArrayGeometry, i: int) -> int:
    if int(i) != i or not 0 <= i < geometry.n_elements:
        raise InvalidArgument(f"element index {i} out of range for {geometry.n_elements} elements")
    return int(i)


def pair_distance(geometry: ArrayGeometry, n: int, m: int) -> float:
    """Euclidean distance between elements n and m, in wavelengths."""
    n = _check_index(geometry, n)
    m = _check_index(geometry, m)
    return float(np.linalg.norm(geometry.positions[n] - geometry.positions[m]))


def coupling_kernel(geometry: ArrayGeometry, n: int, m: int) -> float:
    """sin(beta R)/(beta R) for the pair (n, m); 1 when R = 0."""
    return float(sinc_kernel(BETA * pair_distance(geometry, n, m)))
