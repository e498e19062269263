"""Problem-instance types, steering vectors, channels and scenario generation.

All geometry is one-dimensional: antennas sit on a line at coordinates
``positions`` (meters) and every propagation direction is described by a
single angle in radians, measured so that the per-element phase is
``2*pi/wavelength * x * cos(angle)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InfeasibleRegionError

FEASIBILITY_SLACK = 1e-12


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna positions together with the moving region and minimum spacing."""

    positions: np.ndarray
    x_min: float
    x_max: float
    d0: float

    def __post_init__(self):
        pos = _frozen(self.positions, float)
        if pos.ndim != 1:
            raise ValueError("positions must be a 1-D vector")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max")
        if self.d0 <= 0:
            raise ValueError("d0 must be positive")
        # Exact equality N*d0 == span is common (tight layouts), allow rounding.
        if len(pos) * self.d0 > (self.x_max - self.x_min) * (1 + 1e-12):
            raise InfeasibleRegionError(
                f"{len(pos)} antennas at spacing {self.d0} do not fit in "
                f"[{self.x_min}, {self.x_max}]"
            )
        object.__setattr__(self, "positions", pos)

    @property
    def num_antennas(self) -> int:
        return len(self.positions)

    def with_positions(self, positions) -> "ArrayGeometry":
        return ArrayGeometry(positions, self.x_min, self.x_max, self.d0)


@dataclass(frozen=True)
class PathCluster:
    """Multipath description of one user link: per-path angles and complex gains."""

    angles: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        angles = _frozen(self.angles, float)
        gains = _frozen(self.gains, complex)
        if angles.shape != gains.shape or angles.ndim != 1:
            raise ValueError("angles and gains must be 1-D vectors of equal length")
        if np.any(angles < 0) or np.any(angles > np.pi):
            raise ValueError("path angles must lie in [0, pi]")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "gains", gains)

    @property
    def num_paths(self) -> int:
        return len(self.angles)


@dataclass(frozen=True)
class Scenario:
    """One ISAC problem instance (channels, scatterers and noise levels)."""

    wavelength: float
    num_antennas: int
    users: tuple
    user_noise: np.ndarray
    target_angle: float
    target_gain: complex
    clutter_angles: np.ndarray
    clutter_gains: np.ndarray
    sensing_noise: float

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be positive")
        users = tuple(self.users)
        noise = _frozen(self.user_noise, float)
        if noise.shape != (len(users),):
            raise ValueError("user_noise needs one entry per user")
        if np.any(noise <= 0) or self.sensing_noise <= 0:
            raise ValueError("noise powers must be positive")
        c_angles = _frozen(self.clutter_angles, float).reshape(-1)
        c_gains = _frozen(self.clutter_gains, complex).reshape(-1)
        if c_angles.shape != c_gains.shape:
            raise ValueError("clutter angles and gains must have equal length")
        angles = np.concatenate([c_angles, [self.target_angle]])
        if np.any(angles < 0) or np.any(angles > np.pi):
            raise ValueError("angles must lie in [0, pi]")
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "user_noise", noise)
        object.__setattr__(self, "clutter_angles", c_angles)
        object.__setattr__(self, "clutter_gains", c_gains)
        object.__setattr__(self, "target_gain", complex(self.target_gain))

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def num_clutters(self) -> int:
        return len(self.clutter_angles)

    def fingerprint(self) -> str:
        """Stable hash of every numeric field, used to check paired seeding."""
        import hashlib

        h = hashlib.sha256()
        h.update(np.float64(self.wavelength).tobytes())
        h.update(np.int64(self.num_antennas).tobytes())
        for user in self.users:
            h.update(user.angles.tobytes())
            h.update(user.gains.tobytes())
        h.update(self.user_noise.tobytes())
        h.update(np.float64(self.target_angle).tobytes())
        h.update(np.complex128(self.target_gain).tobytes())
        h.update(self.clutter_angles.tobytes())
        h.update(self.clutter_gains.tobytes())
        h.update(np.float64(self.sensing_noise).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class ScenarioParams:
    """Knobs for random scenario generation."""

    num_users: int = 4
    num_clutters: int = 3
    num_antennas: int = 4
    num_paths: int = 13
    wavelength: float = 0.1
    target_angle: float = np.pi / 3
    gain_variance: float = 1.0
    user_noise: float = 1.0
    sensing_noise: float = 1.0

    def __post_init__(self):
        if self.num_users < 1 or self.num_antennas < 1 or self.num_paths < 1:
            raise ValueError("K, N and L_p must be positive")
        if self.num_clutters < 0:
            raise ValueError("C must be nonnegative")
        if min(self.wavelength, self.gain_variance, self.user_noise, self.sensing_noise) <= 0:
            raise ValueError("wavelength, gain variance and noise powers must be positive")
        if not 0 <= self.target_angle <= np.pi:
            raise ValueError("target angle must lie in [0, pi]")


def steering_vector(positions, angle, wavelength) -> np.ndarray:
    """Far-field array response of a linear array.

    Works elementwise, so ``positions`` may have any shape (a batch of
    layouts, for instance).
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    phase = (2 * np.pi / wavelength) * np.asarray(positions, dtype=float) * np.cos(angle)
    return np.exp(1j * phase)


def user_channel(scenario: Scenario, k: int, positions) -> np.ndarray:
    """Multipath channel ``h_k(x)`` from the transmit array to user ``k``."""
    if not 0 <= k < scenario.num_users:
        raise IndexError(f"user index {k} out of range for K={scenario.num_users}")
    cluster = scenario.users[k]
    positions = np.asarray(positions, dtype=float)
    beta = (2 * np.pi / scenario.wavelength) * np.cos(cluster.angles)
    # (..., N, L) phase grid, summed over paths.
    resp = np.exp(1j * positions[..., None] * beta)
    scale = np.sqrt(scenario.num_antennas / cluster.num_paths)
    return scale * (resp @ cluster.gains)


def channel_matrix(scenario: Scenario, positions) -> np.ndarray:
    """Stack all user channels as the columns of an N x K matrix."""
    return np.stack(
        [user_channel(scenario, k, positions) for k in range(scenario.num_users)], axis=-1
    )


def target_steering(scenario: Scenario, positions) -> np.ndarray:
    return steering_vector(positions, scenario.target_angle, scenario.wavelength)


def clutter_steering(scenario: Scenario, positions) -> np.ndarray:
    """N x C matrix of clutter steering vectors."""
    positions = np.asarray(positions, dtype=float)
    beta = (2 * np.pi / scenario.wavelength) * np.cos(scenario.clutter_angles)
    return np.exp(1j * positions[..., None] * beta)


def is_feasible(geometry: ArrayGeometry) -> bool:
    """True when every antenna is inside the region and pairwise gaps are >= d0."""
    return positions_feasible(geometry.positions, geometry.x_min, geometry.x_max, geometry.d0)


def positions_feasible(positions, x_min, x_max, d0) -> bool:
    pos = np.sort(np.asarray(positions, dtype=float))
    if pos.size == 0:
        return True
    if pos[0] < x_min - FEASIBILITY_SLACK or pos[-1] > x_max + FEASIBILITY_SLACK:
        return False
    return bool(np.all(np.diff(pos) >= d0 - FEASIBILITY_SLACK))


def ula_positions(num_antennas: int, spacing: float, origin: float = 0.0) -> np.ndarray:
    return origin + spacing * np.arange(num_antennas)


def _complex_gaussian(rng: np.random.Generator, variance: float, size) -> np.ndarray:
    scale = np.sqrt(variance / 2)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def generate_scenario(seed: int, params: ScenarioParams) -> Scenario:
    """Draw a random scenario.

    The generator is numpy's PCG64 seeded through ``SeedSequence(seed)``, so a
    given seed yields the same scenario on every platform. Draw order is
    fixed: user angles, user gains, target gain, clutter angles, clutter
    gains.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    K, L, C = params.num_users, params.num_paths, params.num_clutters
    user_angles = rng.uniform(0.0, np.pi, size=(K, L))
    user_gains = _complex_gaussian(rng, params.gain_variance, (K, L))
    target_gain = _complex_gaussian(rng, params.gain_variance, 1)[0]
    clutter_angles = rng.uniform(0.0, np.pi, size=C)
    clutter_gains = _complex_gaussian(rng, params.gain_variance, C)
    users = tuple(PathCluster(user_angles[k], user_gains[k]) for k in range(K))
    return Scenario(
        wavelength=params.wavelength,
        num_antennas=params.num_antennas,
        users=users,
        user_noise=np.full(K, params.user_noise),
        target_angle=params.target_angle,
        target_gain=target_gain,
        clutter_angles=clutter_angles,
        clutter_gains=clutter_gains,
        sensing_noise=params.sensing_noise,
    )


def substream_seed(master_seed: int, index: int) -> int:
    """Derive a 64-bit scenario seed from a master seed and a scenario index."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_scenario(
    users: Sequence[tuple],
    *,
    wavelength: float = 0.1,
    num_antennas: int,
    user_noise=1.0,
    target_angle: float = np.pi / 3,
    target_gain: complex = 1.0,
    clutter_angles=(),
    clutter_gains=(),
    sensing_noise: float = 1.0,
) -> Scenario:
    """Convenience constructor from ``(angles, gains)`` pairs."""
    clusters = tuple(PathCluster(np.atleast_1d(a), np.atleast_1d(g)) for a, g in users)
    noise = np.broadcast_to(np.asarray(user_noise, dtype=float), (len(clusters),))
    return Scenario(
        wavelength=wavelength,
        num_antennas=num_antennas,
        users=clusters,
        user_noise=noise,
        target_angle=target_angle,
        target_gain=target_gain,
        clutter_angles=np.asarray(clutter_angles, dtype=float),
        clutter_gains=np.asarray(clutter_gains, dtype=complex),
        sensing_noise=sensing_noise,
    )
