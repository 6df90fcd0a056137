"""Eve's attack round: interception, mass placement, field sensing, and inference.

One round runs the pipeline prepare -> split -> dual-basis measurement
(outcome s) -> mass moved to site s -> noisy field sensing -> Gaussian
maximum-likelihood inference of Alice's preparation -> resend. The field
Eve senses carries the nonlinear mixture term, so its residual after
subtracting her own configuration field identifies the preparation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .errors import ValidationError
from .gravity import Geometry, NonlinearParams, config_field, decay_factor, general_field
from .qubits import (
    SYMBOLS,
    Bb84Symbol,
    QubitState,
    branch_weights,
    eve_dual_basis_measure,
    prepare,
    split,
    state_overlap,
)

POSTERIOR_TOLERANCE = 1e-9

CHANCE_LEVEL = 0.25


@dataclass(frozen=True)
class SensorModel:
    """Gaussian field sensor: per-component noise sigma (m/s^2) and reading count."""

    sigma: float
    samples: int = 1

    def __post_init__(self) -> None:
        if (
            not isinstance(self.sigma, (int, float))
            or isinstance(self.sigma, bool)
            or not math.isfinite(float(self.sigma))
            or float(self.sigma) <= 0.0
        ):
            raise ValidationError(f"sensor.sigma: must be a positive number, got {self.sigma!r}")
        if (
            not isinstance(self.samples, (int, np.integer))
            or isinstance(self.samples, bool)
            or int(self.samples) < 1
        ):
            raise ValidationError(f"sensor.samples: must be an integer >= 1, got {self.samples!r}")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "samples", int(self.samples))


class StrategyMode(enum.Enum):
    """How Eve chooses the state she forwards to Bob."""

    CLONE_INFERRED = "CloneInferred"
    RESEND_MEASURED = "ResendMeasured"
    THRESHOLD = "Threshold"


@dataclass(frozen=True)
class EveStrategy:
    """Resend policy plus the posterior confidence threshold used by Threshold mode."""

    mode: StrategyMode
    tau: float = 0.9

    def __post_init__(self) -> None:
        try:
            mode = StrategyMode(self.mode)
        except ValueError:
            names = [m.value for m in StrategyMode]
            raise ValidationError(
                f"eve.strategy: unknown strategy {self.mode!r}; expected one of {names}"
            ) from None
        if (
            not isinstance(self.tau, (int, float))
            or isinstance(self.tau, bool)
            or not 0.0 < float(self.tau) <= 1.0
        ):
            raise ValidationError(f"eve.tau: must lie in (0, 1], got {self.tau!r}")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "tau", float(self.tau))


@dataclass(frozen=True)
class EveRecord:
    """Eve's per-round transcript: outcome, inference, and what she resent."""

    outcome: Bb84Symbol
    inferred: Bb84Symbol
    posterior: tuple[float, float, float, float]
    resent: Bb84Symbol
    cloned: bool

    def __post_init__(self) -> None:
        values = tuple(float(p) for p in self.posterior)
        if (
            len(values) != 4
            or any(p < 0.0 for p in values)
            or abs(sum(values) - 1.0) > POSTERIOR_TOLERANCE
        ):
            raise ValidationError(
                f"posterior must be non-negative and sum to 1: {self.posterior!r}"
            )
        object.__setattr__(self, "posterior", values)


def _outcome_log_likelihood() -> np.ndarray:
    # log P(outcome s | preparation h) = log of the branch weight of s under h;
    # zero-probability pairs get -inf so they can never be inferred.
    table = np.empty((4, 4))
    for s in SYMBOLS:
        for h in SYMBOLS:
            w = branch_weights(h).w[s]
            table[s, h] = math.log(w) if w > 0.0 else -math.inf
    table.setflags(write=False)
    return table


_OUTCOME_LOG_LIKELIHOOD = _outcome_log_likelihood()


def sense(true_field, sensor: SensorModel, rng: np.random.Generator) -> np.ndarray:
    """Noisy sensor readings of a field, shape (samples, field_dim).

    Each reading is the true field plus independent zero-mean Gaussian noise
    of standard deviation sensor.sigma per component.
    """
    field = np.asarray(true_field, dtype=np.float64)
    if field.ndim != 1:
        raise ValidationError("sense: true field must be a flat vector")
    noise = rng.standard_normal((sensor.samples, field.shape[0]))
    return field + sensor.sigma * noise


def hypothesis_residuals(params: NonlinearParams, geom: Geometry) -> np.ndarray:
    """Expected nonlinear residual per preparation hypothesis, shape (4, field_dim).

    Row h is decay_factor(params) * mix_field(branch_weights(h)); this is what
    remains of the sensed field once Eve subtracts the configuration field of
    her own outcome.
    """
    return decay_factor(params) * geom.mix_matrix


def infer_alice_state(
    readings,
    eve_outcome: Bb84Symbol,
    geom: Geometry,
    params: NonlinearParams,
    sensor: SensorModel,
    rng: np.random.Generator,
    born_factor: bool = True,
) -> tuple[Bb84Symbol, np.ndarray]:
    """Gaussian maximum-likelihood identification of Alice's preparation.

    Subtracts the configuration field of Eve's own outcome from the readings,
    scores the four preparation hypotheses against their expected nonlinear
    residuals under the sensor's Gaussian noise, and optionally multiplies in
    the probability of Eve's outcome under each hypothesis (born_factor).
    Ties in the maximum are broken uniformly at random; one uniform draw is
    consumed on every call so the stream position never depends on the data.

    Returns (inferred symbol, posterior over the four preparations).
    """
    data = np.asarray(readings, dtype=np.float64)
    if data.ndim == 1:
        data = data[np.newaxis, :]
    if data.size == 0:
        raise ValidationError("infer_alice_state: readings must be non-empty")
    if data.ndim != 2 or data.shape[1] != geom.field_dim:
        raise ValidationError(
            f"infer_alice_state: readings must have shape (k, {geom.field_dim}), got {data.shape}"
        )
    outcome = Bb84Symbol(eve_outcome)
    count = data.shape[0]
    residuals = hypothesis_residuals(params, geom)
    statistic = data.sum(axis=0) - count * config_field(outcome, geom)
    inv_var = 1.0 / (sensor.sigma * sensor.sigma)
    logits = (
        residuals @ statistic - 0.5 * count * (residuals * residuals).sum(axis=1)
    ) * inv_var
    if born_factor:
        logits = logits + _OUTCOME_LOG_LIKELIHOOD[outcome]
    peak = logits.max()
    weights = np.exp(logits - peak)
    posterior = weights / weights.sum()
    ties = np.flatnonzero(logits == peak)
    u = rng.random()
    inferred = SYMBOLS[int(ties[min(int(u * ties.size), ties.size - 1)])]
    return inferred, posterior


def attack_round(
    prepared: Bb84Symbol,
    geom: Geometry,
    params: NonlinearParams,
    sensor: SensorModel,
    strategy: EveStrategy,
    rng: np.random.Generator,
    born_factor: bool = True,
) -> tuple[QubitState, EveRecord]:
    """One full interception; returns (state resent to Bob, EveRecord).

    Draw order from `rng`: one uniform for the dual-basis outcome, the sensor
    noise block, one uniform for inference tie-breaking. Resend rule:
    CloneInferred forwards the inferred preparation, ResendMeasured forwards
    Eve's measured outcome, Threshold forwards the inferred preparation only
    when the posterior peak reaches tau and the outcome otherwise.
    """
    prepared = Bb84Symbol(prepared)
    if not isinstance(strategy, EveStrategy):
        raise ValidationError(f"attack_round: strategy must be an EveStrategy, got {strategy!r}")
    arms = split(prepare(prepared))
    outcome = eve_dual_basis_measure(arms.internal, rng)
    true_field = general_field(outcome, branch_weights(prepared), params, geom)
    readings = sense(true_field, sensor, rng)
    inferred, posterior = infer_alice_state(
        readings, outcome, geom, params, sensor, rng, born_factor
    )
    if strategy.mode is StrategyMode.CLONE_INFERRED:
        resent = inferred
    elif strategy.mode is StrategyMode.RESEND_MEASURED:
        resent = outcome
    else:
        resent = inferred if float(posterior.max()) >= strategy.tau else outcome
    record = EveRecord(
        outcome=outcome,
        inferred=inferred,
        posterior=tuple(float(p) for p in posterior),
        resent=resent,
        cloned=resent == prepared,
    )
    return prepare(resent), record


@dataclass(frozen=True)
class AccuracyEstimate:
    """Analytic accuracy summary for the four-hypothesis field classifier.

    per_hypothesis holds a union-bound lower bound on the accuracy for each
    true preparation; mean averages them over a uniform preparation. The
    closest hypothesis pair is reported with its separation d_min and the
    exact two-hypothesis accuracy Phi(d_min / 2) evaluated by quadrature.
    chance is the four-hypothesis guessing level.
    """

    per_hypothesis: tuple[float, float, float, float]
    mean: float
    chance: float
    closest_pair: tuple[Bb84Symbol, Bb84Symbol]
    d_min: float
    two_hypothesis_exact: float


def _phi_by_quadrature(x: float) -> float:
    """Standard normal CDF evaluated by adaptive quadrature."""
    if x > 12.0:
        return 1.0  # tail mass below double precision
    value, _ = integrate.quad(
        lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi), -np.inf, x
    )
    return float(value)


def analytic_accuracy(
    params: NonlinearParams, geom: Geometry, sensor: SensorModel
) -> AccuracyEstimate:
    """Analytic accuracy estimate for the field classifier.

    Pairwise separations d = sqrt(samples) * |r_i - r_j| / sigma between the
    hypothesis residuals feed a union bound: the accuracy for true hypothesis
    i is at least 1 - min(1, sum over j != i of Q(d_ij / 2)), with Q the
    standard normal tail. All separations are zero in the degenerate
    decay_factor = 0 case, where the bound collapses to 0 and only the chance
    level 1/4 remains informative.
    """
    residuals = hypothesis_residuals(params, geom)
    scale = math.sqrt(sensor.samples) / sensor.sigma
    separations = np.zeros((4, 4))
    closest = None
    for i in range(4):
        for j in range(i + 1, 4):
            d = scale * float(np.linalg.norm(residuals[i] - residuals[j]))
            separations[i, j] = separations[j, i] = d
            if closest is None or d < closest[0]:
                closest = (d, i, j)
    bounds = []
    for i in range(4):
        tail_sum = sum(float(stats.norm.sf(separations[i, j] / 2.0)) for j in range(4) if j != i)
        bounds.append(max(0.0, 1.0 - min(1.0, tail_sum)))
    d_min, a, b = closest
    return AccuracyEstimate(
        per_hypothesis=tuple(bounds),
        mean=float(np.mean(bounds)),
        chance=CHANCE_LEVEL,
        closest_pair=(SYMBOLS[a], SYMBOLS[b]),
        d_min=d_min,
        two_hypothesis_exact=_phi_by_quadrature(d_min / 2.0),
    )


def monte_carlo_accuracy(
    params: NonlinearParams,
    geom: Geometry,
    sensor: SensorModel,
    n_trials: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo accuracy of the field classifier over uniform preparations.

    Vectorized replica of infer_alice_state's field scoring: the sufficient
    statistic is sampled directly from its Gaussian law, so the outcome-based
    factor plays no role (matching analytic_accuracy). Ties are broken
    uniformly at random.
    """
    if not isinstance(n_trials, (int, np.integer)) or n_trials < 1:
        raise ValidationError(f"monte_carlo_accuracy: n_trials must be >= 1, got {n_trials!r}")
    residuals = hypothesis_residuals(params, geom)
    count = sensor.samples
    sigma = sensor.sigma
    truths = rng.integers(4, size=n_trials)
    noise = rng.standard_normal((int(n_trials), geom.field_dim))
    statistic = count * residuals[truths] + sigma * math.sqrt(count) * noise
    logits = (
        statistic @ residuals.T - 0.5 * count * (residuals * residuals).sum(axis=1)
    ) / (sigma * sigma)
    peaks = logits.max(axis=1, keepdims=True)
    is_peak = logits == peaks
    n_ties = is_peak.sum(axis=1)
    pick = np.minimum((rng.random(int(n_trials)) * n_ties).astype(np.int64), n_ties - 1)
    rank = np.cumsum(is_peak, axis=1) - 1
    chosen = (is_peak & (rank == pick[:, np.newaxis])).argmax(axis=1)
    return float(np.mean(chosen == truths))


def cloning_fidelity(
    strategy: EveStrategy,
    params: NonlinearParams,
    geom: Geometry,
    sensor: SensorModel,
    n_trials: int,
    rng: np.random.Generator,
    born_factor: bool = True,
) -> float:
    """Average |<prepared|resent>|^2 over uniformly drawn preparations."""
    if not isinstance(n_trials, (int, np.integer)) or n_trials < 1:
        raise ValidationError(f"cloning_fidelity: n_trials must be >= 1, got {n_trials!r}")
    total = 0.0
    for _ in range(int(n_trials)):
        prepared = SYMBOLS[int(rng.integers(4))]
        resent_state, _ = attack_round(prepared, geom, params, sensor, strategy, rng, born_factor)
        overlap = state_overlap(prepare(prepared), resent_state)
        total += overlap.real**2 + overlap.imag**2
    return total / int(n_trials)
