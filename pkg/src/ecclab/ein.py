"""Statistical inference of the ECC scheme and raw-error parameters from
post-correction error-count histograms.

Model selection is maximum-a-posteriori with a uniform prior over candidate
schemes: for each candidate we maximize a multinomial log-likelihood over a
grid of raw-error parameters (each parameter point scored against a simulated
predicted histogram), then take the argmax across candidates. Confidence
intervals come from multinomial bootstrap resampling of the observation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import einsim
from .code import CodeSpec
from .einsim import ErrorCountHistogram
from .errmodel import CellLayout, ErrorModelParams, counter_rng, ALL_TRUE

__all__ = [
    "CandidateModel",
    "InferenceResult",
    "BootstrapInterval",
    "default_rber_grid",
    "log_likelihood",
    "map_estimate",
    "infer_theta",
    "bootstrap_ci",
    "clear_prediction_cache",
]


def default_rber_grid(points: int = 10000, low: float = 1e-6, high: float = 0.1):
    """The full-scale grid: uniformly spaced raw error rates. Desk-scale runs
    usually pass something far coarser."""
    return [float(r) for r in np.linspace(low, high, points)]

_STREAM_BOOTSTRAP = 7

# predicted histograms depend only on (model, simulation seed), not on the
# observation, so they are shared across repeated inferences
_PREDICTION_CACHE: dict[tuple, ErrorCountHistogram] = {}


def clear_prediction_cache() -> None:
    _PREDICTION_CACHE.clear()


@dataclass(frozen=True)
class CandidateModel:
    """One (scheme, error-model) hypothesis with its predicted histogram."""

    spec: CodeSpec | None
    params: ErrorModelParams
    predicted: ErrorCountHistogram

    @property
    def spec_name(self) -> str:
        return "none" if self.spec is None else self.spec.name

    @property
    def spec_n(self) -> int:
        return 0 if self.spec is None else self.spec.n


@dataclass(frozen=True)
class BootstrapInterval:
    low: float
    high: float
    p5: float
    p95: float


@dataclass(frozen=True)
class InferenceResult:
    ranked: list  # [(CandidateModel, log_likelihood)] sorted best first
    map_model: CandidateModel
    map_log_likelihood: float
    bootstrap: dict[str, BootstrapInterval] = field(default_factory=dict)


def _spec_key(spec: CodeSpec | None) -> tuple:
    if spec is None:
        return ("none",)
    return (spec.name, spec.n, spec.k, spec.d, spec.H.tobytes())


def _predict(spec: CodeSpec | None, params: ErrorModelParams, burst_bits: int,
             sim_budget: int, seed: int, workers: int = 1) -> ErrorCountHistogram:
    key = (_spec_key(spec), params.rber, params.pattern.kind, params.pattern.seed,
           params.layout.kind, params.layout.block_len, burst_bits, sim_budget, seed)
    hist = _PREDICTION_CACHE.get(key)
    if hist is None:
        hist = einsim.simulate_histogram(spec, params, burst_bits, sim_budget, seed,
                                         workers=workers)
        _PREDICTION_CACHE[key] = hist
    return hist


def _smoothed_log_probs(model: CandidateModel) -> np.ndarray:
    """Predicted bin probabilities with additive smoothing so zero-mass bins
    stay finitely unlikely instead of blowing up the log-likelihood."""
    probs = model.predicted.probabilities()
    eps = 1.0 / (10.0 * model.predicted.total_words)
    return np.log((probs + eps) / (1.0 + eps * probs.size))


def log_likelihood(observed: ErrorCountHistogram, model: CandidateModel) -> float:
    """Multinomial log-likelihood of the observation under the model."""
    if observed.word_bits != model.predicted.word_bits:
        raise ValueError(
            f"histogram domains differ: observed word_bits={observed.word_bits}, "
            f"model word_bits={model.predicted.word_bits}")
    return float(observed.counts @ _smoothed_log_probs(model))


def _rank_key(entry):
    model, ll = entry
    return (-ll, model.spec_n, model.spec_name)


def map_estimate(observed: ErrorCountHistogram, candidate_specs, rber_grid, patterns,
                 sim_budget: int, seed: int, layout: CellLayout = CellLayout(ALL_TRUE),
                 resamples: int = 0, workers: int = 1) -> InferenceResult:
    """Select the most likely (scheme, theta) pair for the observation.

    For every candidate scheme, the likelihood is maximized over the theta
    grid (rber values x data patterns); candidates are then ranked by their
    best log-likelihood under a uniform prior. Ties break toward smaller
    codeword length, then lexicographic scheme name, so results are
    reproducible.
    """
    specs = list(candidate_specs)
    rbers = [float(r) for r in rber_grid]
    pats = list(patterns)
    if not specs:
        raise ValueError("candidate list must be nonempty")
    if not rbers or not pats:
        raise ValueError("theta grid must be nonempty")
    burst = observed.word_bits
    for spec in specs:
        if spec is not None and burst % spec.k != 0:
            raise ValueError(f"burst of {burst} bits cannot hold {spec.name} datawords")

    ranked = []
    for spec in specs:
        best = None
        for pat in pats:
            for rber in rbers:
                params = ErrorModelParams(rber=rber, pattern=pat, layout=layout)
                predicted = _predict(spec, params, burst, sim_budget, seed, workers)
                model = CandidateModel(spec=spec, params=params, predicted=predicted)
                ll = log_likelihood(observed, model)
                if best is None or ll > best[1]:
                    best = (model, ll)
        ranked.append(best)
    ranked.sort(key=_rank_key)

    bootstrap = {}
    if resamples > 0:
        for model, _ in ranked:
            bootstrap[model.spec_name] = bootstrap_ci(observed, model, resamples, seed)

    return InferenceResult(ranked=ranked, map_model=ranked[0][0],
                           map_log_likelihood=ranked[0][1], bootstrap=bootstrap)


def infer_theta(observed: ErrorCountHistogram, known_spec: CodeSpec | None, rber_grid,
                patterns, sim_budget: int, seed: int,
                layout: CellLayout = CellLayout(ALL_TRUE),
                workers: int = 1) -> tuple[ErrorModelParams, float]:
    """Maximize the likelihood over theta with the scheme held fixed."""
    result = map_estimate(observed, [known_spec], rber_grid, patterns, sim_budget,
                          seed, layout=layout, workers=workers)
    model, ll = result.ranked[0]
    return model.params, ll


def bootstrap_ci(observed: ErrorCountHistogram, model: CandidateModel,
                 resamples: int, seed: int) -> BootstrapInterval:
    """Log-likelihood spread over multinomial resamples of the observation."""
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    probs = observed.probabilities()
    log_p = _smoothed_log_probs(model)
    rng = counter_rng(seed, 0, 0, _STREAM_BOOTSTRAP)
    draws = rng.multinomial(observed.total_words, probs, size=resamples)
    lls = draws @ log_p
    return BootstrapInterval(low=float(lls.min()), high=float(lls.max()),
                             p5=float(np.percentile(lls, 5)),
                             p95=float(np.percentile(lls, 95)))
