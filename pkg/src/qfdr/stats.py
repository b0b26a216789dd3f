"""Error analysis for measured work statistics.

Covers the full certification pipeline: binomial parameter errors, the
parametric bootstrap of the correction Q, sigma distances of measured points
from classical reference boundaries, a binned drift diagnostic, and the
linear-regression calibration of rotation pulse durations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .analytics import (
    MONTE_CARLO,
    FdrEstimate,
    SweepPoint,
    delta_free_energy,
    flip_probability,
    make_estimate,
)
from .protocol import COHERENT, COHERENT_NORM_DH, WorkSampleSet
from .qubit import BETA_CAP, ThermalSpec, population_to_beta


def binomial_error(p_hat: float, trials: int) -> float:
    """Standard deviation of a binomial frequency estimate, sqrt(p(1-p)/n)."""
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError(f"p_hat must lie in [0, 1], got {p_hat}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    return math.sqrt(p_hat * (1.0 - p_hat) / trials)


def beta_error(p_hat: float, trials: int) -> float:
    """Statistical error of the fitted inverse temperature.

    Propagates the binomial error of the occupation estimate through
    beta = 2 artanh(1 - 2p): sigma_beta = sigma_p / (p (1 - p)).
    """
    if not 0.0 < p_hat < 0.5:
        raise ValueError(f"p_hat must lie in (0, 0.5), got {p_hat}")
    return binomial_error(p_hat, trials) / (p_hat * (1.0 - p_hat))


def _beta_from_frequency(p_hat: float) -> float:
    if p_hat <= 0.0:
        return BETA_CAP
    if p_hat >= 0.5:
        return 0.0
    return population_to_beta(p_hat)


@dataclass(frozen=True)
class BootstrapReport:
    """Spread of the correction across regenerated synthetic datasets."""

    resamples: int
    q_values: np.ndarray
    sigma_q: float
    sigma_beta: float
    n_steps: int
    norm_dh: float

    @property
    def sigma_rescaled(self) -> float:
        """Bootstrap error on the plotted scale, N sigma_Q / |dH|."""
        return self.n_steps * self.sigma_q / self.norm_dh


def bootstrap_q(
    thermal: ThermalSpec,
    n_steps: int,
    runs: int,
    resamples: int = 200,
    seed: int = 0,
    flip_probability_override: float | None = None,
) -> BootstrapReport:
    """Parametric bootstrap of the coherent correction.

    Each resample regenerates runs * n_steps independent two-point
    measurements from the fitted parameters: the qubit starts dark and is
    excited with probability p, and the readout pair differs with the flip
    probability (the ideal sin^2(pi/(4N)) unless overridden).  From every
    synthetic dataset the mean work, work variance, refitted beta and the
    correction Q are computed; the reported sigma is the sample standard
    deviation of those Q values.  Deterministic for a fixed seed.
    """
    if resamples < 2:
        raise ValueError(f"resamples must be >= 2, got {resamples}")
    if runs < 1 or n_steps < 1:
        raise ValueError("runs and n_steps must be >= 1")
    p = thermal.population
    p_flip = (
        flip_probability(n_steps)
        if flip_probability_override is None
        else flip_probability_override
    )
    if not 0.0 <= p_flip <= 1.0:
        raise ValueError(f"flip probability must lie in [0, 1], got {p_flip}")

    # each resample owns a disjoint slice of the counter-based stream
    blocks_per_resample = (2 * runs * n_steps + 3) // 4 + 1
    q_values = np.empty(resamples)
    betas = np.empty(resamples)
    for r in range(resamples):
        bit_generator = Philox(key=seed)
        bit_generator.advance(r * blocks_per_resample)
        rng = Generator(bit_generator)
        first = rng.random((runs, n_steps)) < p
        flipped = rng.random((runs, n_steps)) < p_flip
        work = np.where(flipped, np.where(first, -1.0, 1.0), 0.0)
        totals = work.sum(axis=1)
        beta_hat = _beta_from_frequency(float(first.mean()))
        variance = float(totals.var(ddof=1)) if runs > 1 else 0.0
        q_values[r] = beta_hat / 2.0 * variance - float(totals.mean())
        betas[r] = beta_hat

    return BootstrapReport(
        resamples=resamples,
        q_values=q_values,
        sigma_q=float(q_values.std(ddof=1)),
        sigma_beta=float(betas.std(ddof=1)),
        n_steps=n_steps,
        norm_dh=COHERENT_NORM_DH,
    )


def estimate_from_samples(samples: WorkSampleSet) -> FdrEstimate:
    """Monte Carlo estimate of the correction from recorded trajectories.

    Mirrors the experimental analysis: for coherent protocols beta is
    refitted from the first-readout frequencies; for incoherent protocols
    (where the occupation varies per step) the spec's beta is used.
    """
    spec = samples.spec
    totals = samples.totals
    mean = float(totals.mean())
    variance = float(totals.var(ddof=1)) if totals.size > 1 else 0.0
    if spec.kind == COHERENT:
        p_hat = float(samples.first_excited_counts.sum()) / (spec.n_steps * samples.runs)
        beta = _beta_from_frequency(p_hat)
        delta_f = 0.0
    else:
        beta = spec.thermal.beta
        delta_f = delta_free_energy(spec)
    return make_estimate(
        mean_work=mean,
        var_work=variance,
        beta=beta,
        delta_f=delta_f,
        n_steps=spec.n_steps,
        norm_dh=spec.norm_dh,
        source=MONTE_CARLO,
    )


@dataclass(frozen=True)
class SigmaDistance:
    """How many statistical sigmas a measured point sits above a reference."""

    point: SweepPoint
    reference: str
    reference_value: float
    sigma_stat: float
    distance_sigma: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.distance_sigma >= self.threshold


def sigma_distance(
    point: SweepPoint,
    sigma_stat: float,
    reference_value: float,
    reference: str = "incoherent_boundary",
    threshold: float = 10.0,
) -> SigmaDistance:
    """Distance of a measured sweep point from a classical reference value."""
    if sigma_stat <= 0.0:
        raise ValueError(f"sigma_stat must be > 0, got {sigma_stat}")
    distance = (point.rescaled_q - reference_value) / sigma_stat
    return SigmaDistance(
        point=point,
        reference=reference,
        reference_value=reference_value,
        sigma_stat=sigma_stat,
        distance_sigma=distance,
        threshold=threshold,
    )


@dataclass(frozen=True)
class DriftReport:
    """Binned-spread diagnostic for slow parameter drifts."""

    bins: int
    bin_size: int
    frequency: float
    observed_spread: float
    expected_spread: float
    excess_spread: float
    flagged: bool


def drift_scan(outcomes: np.ndarray, bin_size: int, threshold: float = 0.01) -> DriftReport:
    """Compare the per-bin frequency spread against the binomial expectation.

    The binary sequence is partitioned into floor(len/K) bins of size K.  The
    observed standard deviation of the bin frequencies is compared to the
    binomial expectation sqrt(p(1-p)/K); a drifting parameter inflates the
    spread while i.i.d. data stays at the expectation.  Drift is flagged when
    the excess reaches ``threshold``.
    """
    outcomes = np.asarray(outcomes).astype(np.float64)
    if bin_size < 1:
        raise ValueError(f"bin_size must be >= 1, got {bin_size}")
    if outcomes.size < 2 * bin_size:
        raise ValueError(
            f"need at least two bins: sequence of length {outcomes.size} with bin_size {bin_size}"
        )
    n_bins = outcomes.size // bin_size
    used = outcomes[: n_bins * bin_size].reshape(n_bins, bin_size)
    frequencies = used.mean(axis=1)
    p_hat = float(used.mean())
    observed = float(frequencies.std(ddof=1))
    expected = binomial_error(p_hat, bin_size)
    excess = observed - expected
    return DriftReport(
        bins=n_bins,
        bin_size=bin_size,
        frequency=p_hat,
        observed_spread=observed,
        expected_spread=expected,
        excess_spread=excess,
        flagged=excess >= threshold,
    )


def calibrate_rotation_time(
    samples: list[tuple[float, float]], target_theta: float
) -> float:
    """Pulse duration reaching a target rotation angle, by linear regression.

    The bright probability follows sin^2(Omega t / 2); over a narrow window
    of durations (at most ~0.2 rad of phase) it is effectively linear, so an
    ordinary least-squares line through the provided (duration, probability)
    points is solved for the duration where it reaches sin^2(theta/2).
    Callers are responsible for clustering the samples near the target.
    """
    if len(samples) < 2:
        raise ValueError("need at least two calibration samples")
    durations = np.array([t for t, _ in samples], dtype=np.float64)
    probabilities = np.array([p for _, p in samples], dtype=np.float64)
    if np.ptp(durations) == 0.0:
        raise ValueError("singular design: all durations are equal")
    slope, intercept = np.polyfit(durations, probabilities, 1)
    if slope == 0.0:
        raise ValueError("degenerate fit: zero slope")
    target_probability = math.sin(target_theta / 2.0) ** 2
    return float((target_probability - intercept) / slope)
