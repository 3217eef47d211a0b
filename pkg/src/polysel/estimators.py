"""Posterior summaries from a sampler run.

The PosteriorTable is the single source of truth: the sampler registers
every model whose marginal it computes (visited or merely screened in a
proposal neighborhood), so the renormalization estimator can spread mass
over far more models than the chain ever occupies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import terms as tm
from .marginals import Dataset, GPriorEvaluator, predict_model
from .priors import PriorSpec, log_prior
from .space import Model, ModelSpace


class PosteriorTable:
    """Map model key -> (log marginal, log prior, visit count)."""

    def __init__(self, space: ModelSpace):
        self.space = space
        self._entries: dict[int, list] = {}
        self.iterations = 0

    def record_evaluation(self, bits: int, log_marginal: float, log_prior: float) -> None:
        if bits not in self._entries:
            self._entries[bits] = [float(log_marginal), float(log_prior), 0]

    def record_visit(self, bits: int) -> None:
        self._entries[bits][2] += 1
        self.iterations += 1

    def get(self, bits: int):
        e = self._entries.get(bits)
        return None if e is None else tuple(e)

    def log_posterior(self, bits: int) -> float:
        e = self._entries[bits]
        return e[0] + e[1]

    def log_marginal(self, bits: int) -> float:
        return self._entries[bits][0]

    def keys(self):
        return self._entries.keys()

    def items(self):
        return self._entries.items()

    def __len__(self):
        return len(self._entries)

    def __contains__(self, bits: int) -> bool:
        return bits in self._entries


def with_prior(table: PosteriorTable, spec: PriorSpec) -> PosteriorTable:
    """Same marginals and visits, log priors recomputed under another spec.

    Marginals do not depend on the model prior, so one run can be
    re-scored under any prior family after the fact.
    """
    out = PosteriorTable(table.space)
    for bits, (lm, _, visits) in table.items():
        out._entries[bits] = [lm, log_prior(Model(table.space, bits), spec), visits]
    out.iterations = table.iterations
    return out


def renormalize(table: PosteriorTable) -> dict[int, float]:
    """p(M) proportional to m(y|M) pi(M) over every tabled model."""
    if len(table) == 0:
        raise ValueError("empty posterior table")
    keys = list(table.keys())
    lp = np.array([e[0] + e[1] for e in table._entries.values()])
    probs = np.exp(lp - logsumexp(lp))
    probs /= probs.sum()
    return dict(zip(keys, probs))


def frequency(table: PosteriorTable) -> dict[int, float]:
    """Chain occupancy proportions over visited models."""
    if table.iterations <= 0:
        raise ValueError("no recorded iterations")
    t = float(table.iterations)
    return {bits: e[2] / t for bits, e in table.items() if e[2] > 0}


def tvd(p: dict[int, float], q: dict[int, float]) -> float:
    """Total variation distance; missing keys count as probability zero."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def inclusion_probabilities(table: PosteriorTable) -> dict[tm.Term, float]:
    """Per-node inclusion probabilities under the renormalized posterior."""
    probs = renormalize(table)
    space = table.space
    out = {t: 0.0 for t in space.nodes}
    for bits, pr in probs.items():
        b = bits
        while b:
            lsb = b & -b
            out[space.nodes[lsb.bit_length() - 1]] += pr
            b ^= lsb
    return out


def _ranked(probs: dict[int, float]) -> list[tuple[int, float]]:
    # ties broken by model key for a deterministic permutation rank
    return sorted(probs.items(), key=lambda kv: (-kv[1], kv[0]))


def rank_of(table: PosteriorTable, target: Model) -> int | None:
    """1-based rank of the target under the renormalized posterior, or
    None when the target was never evaluated."""
    probs = renormalize(table)
    if target.bits not in probs:
        return None
    for r, (bits, _) in enumerate(_ranked(probs), start=1):
        if bits == target.bits:
            return r
    return None


def model_average_predict(
    table: PosteriorTable,
    dataset: Dataset,
    new_mains,
    k: int,
    evaluator: GPriorEvaluator | None = None,
) -> np.ndarray:
    """Prediction averaged over the top-k models, with their renormalized
    probabilities rescaled to sum to one within the top-k set."""
    if k < 1:
        raise ValueError("k must be >= 1")
    top = _ranked(renormalize(table))[:k]
    z = sum(pr for _, pr in top)
    new_mains = np.asarray(new_mains, dtype=float)
    yhat = np.zeros(new_mains.shape[0])
    for bits, pr in top:
        yhat += (pr / z) * predict_model(dataset, Model(table.space, bits), new_mains, evaluator)
    return yhat


@dataclass
class PosteriorSummary:
    """Renormalization and frequency estimates plus selection reports."""

    renorm: dict[int, float]
    freq: dict[int, float]
    hpm: int
    top: list[tuple[int, float, float]]  # (bits, prob, log posterior)
    inclusion: dict[tm.Term, float]
    true_prob: float | None = None
    true_rank: int | None = None
    found: bool = False


def summarize(
    table: PosteriorTable, top_k: int = 10, true_model: Model | None = None
) -> PosteriorSummary:
    probs = renormalize(table)
    ranked = _ranked(probs)
    freq = frequency(table) if table.iterations > 0 else {}
    top = [(bits, pr, table.log_posterior(bits)) for bits, pr in ranked[:top_k]]
    summary = PosteriorSummary(
        renorm=probs,
        freq=freq,
        hpm=ranked[0][0],
        top=top,
        inclusion=inclusion_probabilities(table),
    )
    if true_model is not None:
        summary.true_prob = probs.get(true_model.bits, 0.0)
        summary.true_rank = rank_of(table, true_model)
        summary.found = summary.true_rank is not None
    return summary


def report_dict(summary: PosteriorSummary, space: ModelSpace, diagnostics: dict | None = None) -> dict:
    """JSON-ready report: models as sorted term-string lists."""

    def model_json(bits):
        return Model(space, bits).term_strings()

    out = {
        "hpm": model_json(summary.hpm),
        "top_k": [
            {"model": model_json(bits), "log_post": lp, "prob": pr}
            for bits, pr, lp in summary.top
        ],
        "inclusion": {tm.term_str(t): p for t, p in summary.inclusion.items()},
        "diagnostics": diagnostics or {},
    }
    if summary.true_rank is not None or summary.true_prob is not None:
        out["true_model"] = {
            "prob": summary.true_prob,
            "rank": summary.true_rank,
            "found": summary.found,
        }
    return out
