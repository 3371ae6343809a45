"""Stochastic virtual experiment: Poisson counts, fringe fits, flatness.

A sweep walks the shared waveplate angle alpha over a grid; the device phase
is theta' = 4 * alpha.  Per grid point the expected pair count for detectors
(i, j) is ``pair_rate * eta_i * eta_j * P(i, j) + accidental_rate * eta_i *
eta_j`` and heralded singles follow the one-photon distribution; both are
sampled Poisson.  Counts are bit-deterministic for a fixed seed: grid point
k draws from a Philox stream keyed (seed, k), so results do not depend on
evaluation order.

Accidentals are modeled as an alpha-independent per-pair rate (uncorrelated
pair events inside the coincidence window), scaled by the same detector
efficiencies as real counts.  An optional per-detector efficiency drift
(a bounded sinusoid in theta') exists to exercise the residual-amplitude
analysis with a known injected systematic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .circuits import physical_unitary
from .interference import coincidence_probability, singles_distribution

__all__ = [
    "PAIRS",
    "LIVE_PAIRS",
    "SUPPRESSED_PAIRS",
    "SINGLES_INPUTS",
    "theta_prime",
    "SweepConfig",
    "CountRecord",
    "FitResult",
    "FitError",
    "simulate_sweep",
    "subtract_accidentals",
    "fit_fringe",
    "relative_standard_error",
    "residual_phase_amplitude",
    "fit_pair_fringes",
]

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
# detector pairs with a phase-sensitive fringe vs the structurally
# suppressed ones (both detectors on one output rail)
LIVE_PAIRS = ((0, 1), (0, 3), (1, 2), (2, 3))
SUPPRESSED_PAIRS = ((0, 2), (1, 3))
SINGLES_INPUTS = (0, 1)

# Device lever arm between the waveplate angle and the network phase.
THETA_PER_ALPHA = 4.0


def theta_prime(alpha: float) -> float:
    """Network phase produced by waveplate angle alpha (unwrapped)."""
    return THETA_PER_ALPHA * alpha


class FitError(RuntimeError):
    """Fringe fit is impossible on the given points."""


@dataclass(frozen=True)
class SweepConfig:
    """Sweep settings; rates are expected events per grid point."""

    alpha_grid: tuple[float, ...]
    pair_rate: float = 0.0
    singles_rate: float = 0.0
    efficiencies: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    accidental_rate: float = 0.0
    x: float = 1.0
    seed: int = 0
    # detector -> (relative amplitude, phase): eta_j *= 1 + amp*cos(theta' + phase)
    efficiency_drift: dict[int, tuple[float, float]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        object.__setattr__(self, "efficiencies", tuple(float(e) for e in self.efficiencies))
        if not self.alpha_grid:
            raise ValueError("alpha_grid must be nonempty")
        if self.pair_rate < 0 or self.singles_rate < 0 or self.accidental_rate < 0:
            raise ValueError("rates must be nonnegative")
        if len(self.efficiencies) != 4 or any(not (0.0 < e <= 1.0) for e in self.efficiencies):
            raise ValueError("efficiencies must be four values in (0, 1]")
        if not (0.0 <= self.x <= 1.0):
            raise ValueError("x must lie in [0, 1]")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.efficiency_drift:
            for det, (amp, _) in self.efficiency_drift.items():
                if not 0 <= int(det) < 4:
                    raise ValueError(f"drift detector {det} out of range")
                if abs(amp) >= 1.0:
                    raise ValueError("drift amplitude must keep efficiencies positive")


@dataclass
class CountRecord:
    """Counts for one grid point; singles are keyed by heralded input."""

    alpha: float
    pair_counts: dict[tuple[int, int], float]
    singles_counts: dict[int, np.ndarray]
    accidentals_estimate: dict[tuple[int, int], float]


@dataclass
class FitResult:
    offset: float
    amplitude: float
    phase0: float
    visibility: float
    amplitude_fraction: float


def _efficiencies_at(config: SweepConfig, alpha: float) -> np.ndarray:
    eta = np.array(config.efficiencies, dtype=float)
    if config.efficiency_drift:
        th = theta_prime(alpha)
        for det, (amp, phase) in config.efficiency_drift.items():
            eta[int(det)] *= 1.0 + amp * math.cos(th + phase)
    return eta


def simulate_sweep(config: SweepConfig) -> list[CountRecord]:
    """Poisson-sample pair and singles counts over the alpha grid."""
    records = []
    for idx, alpha in enumerate(config.alpha_grid):
        rng = np.random.Generator(np.random.Philox(key=[int(config.seed), idx]))
        u = physical_unitary(alpha)
        eta = _efficiencies_at(config, alpha)
        pair_counts: dict[tuple[int, int], float] = {}
        accidentals: dict[tuple[int, int], float] = {}
        for i, j in PAIRS:
            prob = coincidence_probability(u, (0, 1), (i, j), config.x)
            background = config.accidental_rate * eta[i] * eta[j]
            lam = config.pair_rate * eta[i] * eta[j] * prob + background
            pair_counts[(i, j)] = int(rng.poisson(lam))
            accidentals[(i, j)] = background
        singles: dict[int, np.ndarray] = {}
        for inp in SINGLES_INPUTS:
            probs = singles_distribution(u, inp)
            lam = config.singles_rate * eta * probs
            singles[inp] = rng.poisson(lam).astype(np.int64)
        records.append(
            CountRecord(
                alpha=alpha,
                pair_counts=pair_counts,
                singles_counts=singles,
                accidentals_estimate=accidentals,
            )
        )
    return records


def subtract_accidentals(records: list[CountRecord], accidental_rate: float) -> list[CountRecord]:
    """Reduce every pair count by the accidental rate, floored at zero.

    Uses each record's per-pair accidentals estimate when present (so
    efficiency-scaled backgrounds subtract correctly); the flat
    ``accidental_rate`` is the fallback.
    """
    if accidental_rate < 0:
        raise ValueError("accidental rate must be nonnegative")
    out = []
    for rec in records:
        new_pairs = {}
        for pair, count in rec.pair_counts.items():
            background = rec.accidentals_estimate.get(pair, accidental_rate)
            new_pairs[pair] = max(float(count) - background, 0.0)
        out.append(
            CountRecord(
                alpha=rec.alpha,
                pair_counts=new_pairs,
                singles_counts={k: v.copy() for k, v in rec.singles_counts.items()},
                accidentals_estimate=dict(rec.accidentals_estimate),
            )
        )
    return out


def fit_fringe(points) -> FitResult:
    """Least-squares fit of y = A + B cos(theta + phi) on (theta, y) points.

    Linear in the basis {1, cos theta, sin theta}; needs at least four
    points spanning more than pi of phase.  Visibility is |B| / A.
    """
    pts = [(float(t), float(y)) for t, y in points]
    if len(pts) < 4:
        raise FitError(f"need at least 4 points, got {len(pts)}")
    theta = np.array([t for t, _ in pts])
    y = np.array([v for _, v in pts])
    if float(theta.max() - theta.min()) <= math.pi:
        raise FitError("fit grid must span more than pi of phase")
    design = np.column_stack([np.ones_like(theta), np.cos(theta), np.sin(theta)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise FitError("degenerate fit grid (singular design matrix)")
    offset, a, b = (float(c) for c in coef)
    amplitude = math.hypot(a, b)
    phase0 = math.atan2(-b, a)
    if phase0 <= -math.pi:
        phase0 += 2.0 * math.pi
    if offset <= 0.0:
        if amplitude <= 1e-12 and float(np.max(np.abs(y))) <= 1e-12:
            raise FitError("all-zero trace has no fringe to fit")
        raise FitError(f"fitted offset {offset} is not positive")
    fraction = amplitude / offset
    return FitResult(
        offset=offset,
        amplitude=amplitude,
        phase0=phase0,
        visibility=fraction,
        amplitude_fraction=fraction,
    )


def relative_standard_error(values) -> float:
    """Sample standard deviation of a trace about its mean, over the mean."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least two points")
    mean = float(arr.mean())
    if mean <= 0.0:
        raise ValueError("relative standard error undefined for nonpositive mean")
    return float(arr.std(ddof=1) / mean)


def residual_phase_amplitude(records: list[CountRecord], pair: tuple[int, int]) -> float:
    """Fitted fringe amplitude fraction |B|/A of one pair's raw counts.

    The flatness figure of merit for nominally suppressed pairs: near zero
    for an ideal simulation and tracking the size of an injected
    efficiency systematic.
    """
    pair = (int(pair[0]), int(pair[1]))
    points = [(theta_prime(rec.alpha), rec.pair_counts[pair]) for rec in records]
    return fit_fringe(points).amplitude_fraction


def fit_pair_fringes(records: list[CountRecord]) -> dict[tuple[int, int], FitResult | None]:
    """Fit every pair trace vs theta'; all-zero traces fit as None."""
    out: dict[tuple[int, int], FitResult | None] = {}
    for pair in PAIRS:
        points = [(theta_prime(rec.alpha), rec.pair_counts[pair]) for rec in records]
        if max(abs(v) for _, v in points) == 0:
            out[pair] = None
            continue
        out[pair] = fit_fringe(points)
    return out
