"""Step-work distributions and seeded Monte Carlo sampling of work trajectories.

Two protocol families are supported:

* coherent: the Hamiltonian eigenbasis is rotated from -sigma_z/2 to
  +sigma_y/2 in N equal pulses of angle pi/(2N), with a perfect Gibbs reset
  before every step.  Each step flips the qubit with probability
  sin^2(pi/(4N)), so the step work w in {-1, 0, +1} follows an exact
  three-outcome table.
* incoherent: the gap is ramped from omega_start to omega_end in N quenches
  with the eigenbasis pinned to sigma_z.  A step thermalized at gap omega_j
  yields w = +delta/2 with the thermal occupation of the excited level and
  w = -delta/2 otherwise, delta being the gap increment.

Thermal resets make the steps statistically independent, so a trajectory
total is just a sum of independent draws from the per-step tables.  Sampling
uses a counter-based Philox stream partitioned per run, which makes results
bit-for-bit identical no matter how the runs are split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .qubit import ThermalSpec

COHERENT = "coherent"
INCOHERENT = "incoherent"

# Operator norm of the Hamiltonian change for the coherent ramp
# (-sigma_z/2 -> +sigma_y/2).
COHERENT_NORM_DH = 1.0 / math.sqrt(2.0)

PROB_ATOL = 1e-12

# Philox advances its counter in blocks of four 64-bit words and one double
# consumes one word, so per-run draw budgets must be a multiple of 4.
_PHILOX_BLOCK = 4


@dataclass(frozen=True)
class SpamModel:
    """Conditional readout-error probabilities of the second measurement.

    ``p_bright_given_0`` is the probability of reading the ground state as
    bright, ``p_dark_given_1`` of reading the excited state as dark.
    """

    p_bright_given_0: float
    p_dark_given_1: float

    def __post_init__(self) -> None:
        for name in ("p_bright_given_0", "p_dark_given_1"):
            value = getattr(self, name)
            if not 0.0 <= value < 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5), got {value}")

    @property
    def is_trivial(self) -> bool:
        return self.p_bright_given_0 == 0.0 and self.p_dark_given_1 == 0.0


@dataclass(frozen=True)
class ProtocolSpec:
    """A coherent or incoherent driving schedule.

    The coherent step angle is always derived as pi/(2 * n_steps); the total
    rotation is fixed at a quarter turn.  Incoherent endpoints are gaps in
    units of the initial gap.
    """

    kind: str
    n_steps: int
    thermal: ThermalSpec
    omega_start: float = 1.0
    omega_end: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in (COHERENT, INCOHERENT):
            raise ValueError(f"kind must be '{COHERENT}' or '{INCOHERENT}', got {self.kind!r}")
        if not isinstance(self.n_steps, (int, np.integer)) or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if self.kind == INCOHERENT:
            if self.omega_start <= 0.0 or self.omega_end <= 0.0:
                raise ValueError("incoherent gaps must be positive")

    @classmethod
    def coherent(cls, n_steps: int, thermal: ThermalSpec) -> "ProtocolSpec":
        return cls(kind=COHERENT, n_steps=n_steps, thermal=thermal)

    @classmethod
    def incoherent(
        cls, n_steps: int, thermal: ThermalSpec, omega_start: float, omega_end: float
    ) -> "ProtocolSpec":
        return cls(
            kind=INCOHERENT,
            n_steps=n_steps,
            thermal=thermal,
            omega_start=omega_start,
            omega_end=omega_end,
        )

    @property
    def step_angle(self) -> float:
        """Per-step rotation angle of the coherent protocol, pi/(2N)."""
        if self.kind != COHERENT:
            raise ValueError("step_angle is defined for coherent protocols only")
        return math.pi / (2.0 * self.n_steps)

    @property
    def gap_step(self) -> float:
        """Per-step gap increment of the incoherent protocol."""
        if self.kind != INCOHERENT:
            raise ValueError("gap_step is defined for incoherent protocols only")
        return (self.omega_end - self.omega_start) / self.n_steps

    def gap(self, step_index: int) -> float:
        """Gap omega_j = omega_start + (omega_end - omega_start) * j / N."""
        if self.kind != INCOHERENT:
            raise ValueError("gap(j) is defined for incoherent protocols only")
        return self.omega_start + self.gap_step * step_index

    @property
    def norm_dh(self) -> float:
        """Operator norm of the total Hamiltonian change."""
        if self.kind == COHERENT:
            return COHERENT_NORM_DH
        return abs(self.omega_end - self.omega_start) / 2.0

    @property
    def speed(self) -> float:
        """Driving speed, norm of the Hamiltonian change per step."""
        return self.norm_dh / self.n_steps


@dataclass(frozen=True)
class StepWorkDistribution:
    """Exact probability table over the work outcomes of a single step."""

    works: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        works = np.asarray(self.works, dtype=np.float64)
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "works", works)
        object.__setattr__(self, "probs", probs)
        if works.shape != probs.shape or works.ndim != 1:
            raise ValueError("works and probs must be 1-d arrays of equal length")
        if np.any(probs < -PROB_ATOL):
            raise ValueError(f"negative probability in {probs}")
        if abs(probs.sum() - 1.0) > PROB_ATOL:
            raise ValueError(f"probabilities sum to {probs.sum()}, not 1")

    def mean(self) -> float:
        return float(self.works @ self.probs)

    def variance(self) -> float:
        m = self.mean()
        return float((self.works - m) ** 2 @ self.probs)


def coherent_step_distribution(spec: ProtocolSpec) -> StepWorkDistribution:
    """Three-outcome work table of one coherent step.

    With thermal occupation p and flip probability s = sin^2(pi/(4N)):
    P(w=+1) = (1-p) s, P(w=-1) = p s, P(w=0) = 1 - s.  Validated elsewhere
    against the density-matrix simulation of the full step.
    """
    if spec.kind != COHERENT:
        raise ValueError("coherent_step_distribution requires a coherent spec")
    p = spec.thermal.population
    s = math.sin(spec.step_angle / 2.0) ** 2
    return StepWorkDistribution(
        works=np.array([-1.0, 0.0, 1.0]),
        probs=np.array([p * s, 1.0 - s, (1.0 - p) * s]),
    )


def incoherent_step_distribution(spec: ProtocolSpec, step_index: int) -> StepWorkDistribution:
    """Two-outcome work table of incoherent quench number ``step_index``.

    The qubit is thermalized at gap omega_j, then the gap jumps by delta with
    the eigenbasis fixed, so the work is +delta/2 when the excited level was
    occupied (probability exp(-beta omega_j) / (1 + exp(-beta omega_j))) and
    -delta/2 otherwise.  A zero quench collapses to the single outcome w = 0.
    """
    if spec.kind != INCOHERENT:
        raise ValueError("incoherent_step_distribution requires an incoherent spec")
    if not 0 <= step_index < spec.n_steps:
        raise IndexError(f"step_index {step_index} outside [0, {spec.n_steps})")
    delta = spec.gap_step
    if delta == 0.0:
        return StepWorkDistribution(works=np.array([0.0]), probs=np.array([1.0]))
    p_excited = _excited_at_gap(spec.thermal.beta, spec.gap(step_index))
    works = np.array([-delta / 2.0, delta / 2.0])
    probs = np.array([1.0 - p_excited, p_excited])
    order = np.argsort(works)
    return StepWorkDistribution(works=works[order], probs=probs[order])


def _excited_at_gap(beta: float, omega: float) -> float:
    e = math.exp(-min(beta * omega, 745.0))
    return e / (1.0 + e)


def apply_spam(dist: StepWorkDistribution, spam: SpamModel) -> StepWorkDistribution:
    """Perturb a coherent step table by second-readout misclassification.

    P'(+1) = (1 - p_dark_given_1) P(+1) + p_bright_given_0 P(0)
    P'(-1) = (1 - p_bright_given_0) P(-1) + p_dark_given_1 P(0)

    and P'(0) takes the remainder.  Only defined on the coherent support
    {-1, 0, +1}.
    """
    if dist.works.shape != (3,) or not np.array_equal(dist.works, [-1.0, 0.0, 1.0]):
        raise ValueError(
            "apply_spam supports coherent three-outcome tables with works (-1, 0, +1) only"
        )
    p_minus, p_zero, p_plus = dist.probs
    pb = spam.p_bright_given_0
    pd = spam.p_dark_given_1
    plus = (1.0 - pd) * p_plus + pb * p_zero
    minus = (1.0 - pb) * p_minus + pd * p_zero
    return StepWorkDistribution(
        works=np.array([-1.0, 0.0, 1.0]),
        probs=np.array([minus, 1.0 - plus - minus, plus]),
    )


@dataclass(frozen=True)
class WorkSampleSet:
    """Monte Carlo work totals plus the aggregates needed to refit p and p_f.

    ``first_excited_counts[j]`` counts excited first readouts at step j over
    all runs; ``flip_counts[j]`` counts nonzero-work outcomes at step j for
    coherent protocols and positive-work outcomes for incoherent ones.
    Identical (spec, spam, seed, runs) reproduce identical totals bit for bit.
    """

    totals: np.ndarray
    first_excited_counts: np.ndarray
    flip_counts: np.ndarray
    seed: int
    spec: ProtocolSpec
    spam: SpamModel | None = None

    @property
    def runs(self) -> int:
        return int(self.totals.size)


def _run_budget(n_steps: int) -> int:
    # two doubles per step (first readout, work outcome), padded to the
    # Philox block size so per-run counter offsets stay aligned
    need = 2 * n_steps
    return ((need + _PHILOX_BLOCK - 1) // _PHILOX_BLOCK) * _PHILOX_BLOCK


def _chunk_uniforms(seed: int, start_run: int, n_runs: int, budget: int) -> np.ndarray:
    bit_generator = Philox(key=seed)
    bit_generator.advance(start_run * (budget // _PHILOX_BLOCK))
    return Generator(bit_generator).random((n_runs, budget))


def _sample_chunk(
    spec: ProtocolSpec,
    tables: list[StepWorkDistribution],
    seed: int,
    start_run: int,
    n_runs: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = spec.n_steps
    u = _chunk_uniforms(seed, start_run, n_runs, _run_budget(n))
    u_first = u[:, 0 : 2 * n : 2]
    u_work = u[:, 1 : 2 * n : 2]

    if spec.kind == COHERENT:
        first = u_first < spec.thermal.population
        table = tables[0]
        cumulative = np.cumsum(table.probs)
        outcome = np.searchsorted(cumulative, u_work, side="right")
        work = table.works[np.minimum(outcome, table.works.size - 1)]
        flips = work != 0.0
    else:
        # the second readout repeats the first outcome, so the work sign is
        # fixed by the first readout alone
        p_excited = np.array(
            [_excited_at_gap(spec.thermal.beta, spec.gap(j)) for j in range(n)]
        )
        first = u_first < p_excited[None, :]
        half_step = spec.gap_step / 2.0
        work = np.where(first, half_step, -half_step)
        flips = work > 0.0

    totals = work.sum(axis=1)
    return totals, first.sum(axis=0, dtype=np.int64), flips.sum(axis=0, dtype=np.int64)


def sample_work(
    spec: ProtocolSpec,
    spam: SpamModel | None,
    runs: int,
    seed: int,
    workers: int = 1,
) -> WorkSampleSet:
    """Draw ``runs`` independent trajectory totals W = sum of N step works.

    Steps within a run are independent draws from the exact per-step tables
    (SPAM-perturbed when ``spam`` is given).  Each run owns a fixed slice of
    a counter-based random stream, so any partition of the runs across
    ``workers`` yields the same totals as a single-worker execution.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if spam is not None and not spam.is_trivial and spec.kind != COHERENT:
        raise ValueError("SPAM perturbation is supported for coherent protocols only")

    if spec.kind == COHERENT:
        table = coherent_step_distribution(spec)
        if spam is not None:
            table = apply_spam(table, spam)
        tables = [table]
    else:
        tables = []

    bounds = np.linspace(0, runs, min(workers, runs) + 1).astype(int)
    chunks = [(int(a), int(b - a)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if len(chunks) == 1:
        results = [_sample_chunk(spec, tables, seed, *chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [
                pool.submit(_sample_chunk, spec, tables, seed, start, count)
                for start, count in chunks
            ]
            results = [f.result() for f in futures]

    totals = np.concatenate([r[0] for r in results])
    first_counts = np.sum([r[1] for r in results], axis=0)
    flip_counts = np.sum([r[2] for r in results], axis=0)
    return WorkSampleSet(
        totals=totals,
        first_excited_counts=first_counts,
        flip_counts=flip_counts,
        seed=seed,
        spec=spec,
        spam=spam,
    )


def sample_table_totals(
    dist: StepWorkDistribution, n_steps: int, runs: int, seed: int
) -> np.ndarray:
    """Totals of ``n_steps`` i.i.d. draws from an arbitrary step table.

    Lower-level sibling of :func:`sample_work` for cross-checking analytic
    results against tables that do not come from a protocol spec.
    """
    if runs < 1 or n_steps < 1:
        raise ValueError("runs and n_steps must be >= 1")
    budget = ((n_steps + _PHILOX_BLOCK - 1) // _PHILOX_BLOCK) * _PHILOX_BLOCK
    bit_generator = Philox(key=seed)
    u = Generator(bit_generator).random((runs, budget))[:, :n_steps]
    cumulative = np.cumsum(dist.probs)
    outcome = np.searchsorted(cumulative, u, side="right")
    work = dist.works[np.minimum(outcome, dist.works.size - 1)]
    return work.sum(axis=1)
