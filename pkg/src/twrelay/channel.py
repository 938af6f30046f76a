"""Channel generation and SVD decomposition into subchannel gains.

A system has two source nodes (n1 and n2 antennas) and one relay (n_r
antennas). Four complex channel matrices connect them: uplinks h1r, h2r
(node -> relay) and downlinks hr1, hr2 (relay -> node). Random
realizations are drawn i.i.d. circularly-symmetric complex Gaussian with
unit variance, the standard Rayleigh-fading model.

Decomposing each downlink H_ri = U * diag(omega) * V^H turns the relay's
broadcast into parallel scalar subchannels with gains
alpha_i(k) = omega(k)^2 / sigma_i^2, which is what every optimization
routine downstream operates on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankZeroError

__all__ = [
    "SystemConfig",
    "ChannelSet",
    "DirectionGains",
    "SubchannelGains",
    "generate_channels",
    "decompose",
    "synthetic_gains",
]

# Singular values below this fraction of the largest are treated as zero.
RANK_CUTOFF = 1e-12


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, power budgets (W), noise variances (W) and RNG seed."""

    n1: int
    n2: int
    n_r: int
    p1_max: float = 1.0
    p2_max: float = 1.0
    pr_max: float = 1.0
    sigma1_sq: float = 1.0
    sigma2_sq: float = 1.0
    sigmar_sq: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n1, self.n2, self.n_r) < 1:
            raise ValueError("antenna counts must be >= 1")
        if min(self.sigma1_sq, self.sigma2_sq, self.sigmar_sq) <= 0.0:
            raise ValueError("noise variances must be positive")
        if min(self.p1_max, self.p2_max, self.pr_max) < 0.0:
            raise ValueError("power budgets must be nonnegative")


@dataclass(frozen=True)
class ChannelSet:
    """One realization of the four channel matrices.

    h1r, h2r are n_r x n_i uplinks; hr1, hr2 are n_i x n_r downlinks.
    """

    h1r: np.ndarray
    h2r: np.ndarray
    hr1: np.ndarray
    hr2: np.ndarray


@dataclass(frozen=True)
class DirectionGains:
    """Diagonalized relay->node direction.

    alpha is sorted descending and strictly positive (length = numerical
    rank of the downlink); omega carries the matching singular values and
    v_factor the full n_r x n_r right singular-vector matrix needed to
    rebuild relay covariances from per-subchannel powers.
    """

    alpha: np.ndarray
    omega: np.ndarray
    v_factor: np.ndarray


@dataclass(frozen=True)
class SubchannelGains:
    """Per-direction subchannel gains for one channel realization."""

    direction1: DirectionGains
    direction2: DirectionGains
    n_r: int

    @property
    def alpha1(self) -> np.ndarray:
        return self.direction1.alpha

    @property
    def alpha2(self) -> np.ndarray:
        return self.direction2.alpha

    def pooled(self) -> np.ndarray:
        """Both gain lists merged and re-sorted descending."""
        return np.sort(np.concatenate([self.alpha1, self.alpha2]))[::-1]


def generate_channels(config: SystemConfig, trial_index: int) -> ChannelSet:
    """Draw one channel realization, deterministic in (seed, trial_index).

    Entries are i.i.d. CN(0, 1): independent real/imaginary parts, each
    N(0, 1/2). Each trial gets its own hash-derived RNG stream, so trials
    can be evaluated in any order (or in parallel) with identical results.
    """
    if trial_index < 0:
        raise ValueError("trial_index must be nonnegative")
    seq = np.random.SeedSequence(entropy=config.seed, spawn_key=(trial_index,))
    rng = np.random.default_rng(seq)

    def draw(rows: int, cols: int) -> np.ndarray:
        re = rng.standard_normal((rows, cols))
        im = rng.standard_normal((rows, cols))
        return (re + 1j * im) / np.sqrt(2.0)

    return ChannelSet(
        h1r=draw(config.n_r, config.n1),
        h2r=draw(config.n_r, config.n2),
        hr1=draw(config.n1, config.n_r),
        hr2=draw(config.n2, config.n_r),
    )


def _decompose_one(h: np.ndarray, sigma_sq: float) -> DirectionGains:
    _, s, vh = np.linalg.svd(h, full_matrices=True)
    if s.size == 0 or s[0] <= 0.0:
        raise RankZeroError("downlink channel has no nonzero singular value")
    kept = s >= RANK_CUTOFF * s[0]
    if not np.any(kept):
        raise RankZeroError("downlink channel has no nonzero singular value")
    omega = s[kept]
    return DirectionGains(
        alpha=omega**2 / sigma_sq,
        omega=omega,
        v_factor=vh.conj().T,
    )


def decompose(channels: ChannelSet, config: SystemConfig) -> SubchannelGains:
    """SVD-decompose both downlinks into sorted subchannel gains.

    Raises RankZeroError if either direction is numerically rank zero
    (caller should abort the trial).
    """
    for name, mat, rows in (
        ("hr1", channels.hr1, config.n1),
        ("hr2", channels.hr2, config.n2),
    ):
        if mat.shape != (rows, config.n_r):
            raise ValueError(f"{name} has shape {mat.shape}, expected {(rows, config.n_r)}")
        if not np.all(np.isfinite(mat)):
            raise ValueError(f"{name} contains non-finite entries")
    return SubchannelGains(
        direction1=_decompose_one(channels.hr1, config.sigma1_sq),
        direction2=_decompose_one(channels.hr2, config.sigma2_sq),
        n_r=config.n_r,
    )


def synthetic_gains(alpha1, alpha2) -> SubchannelGains:
    """Build SubchannelGains directly from gain lists (unit noise).

    Useful for hand-constructed instances and tests: the unitary factors
    are identities, so relay covariances come out diagonal.
    """
    a1 = np.sort(np.asarray(alpha1, dtype=float))[::-1]
    a2 = np.sort(np.asarray(alpha2, dtype=float))[::-1]
    if a1.size == 0 or a2.size == 0 or np.any(a1 <= 0) or np.any(a2 <= 0):
        raise ValueError("gain lists must be nonempty and strictly positive")
    n_r = int(max(a1.size, a2.size))
    return SubchannelGains(
        direction1=DirectionGains(alpha=a1, omega=np.sqrt(a1), v_factor=np.eye(n_r, dtype=complex)),
        direction2=DirectionGains(alpha=a2, omega=np.sqrt(a2), v_factor=np.eye(n_r, dtype=complex)),
        n_r=n_r,
    )
