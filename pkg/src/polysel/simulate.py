"""Simulation harness: data generation, selection scoring, and the
posterior-concentration experiments.

Replications derive independent seeds from (seed, n, replication), so
they can be farmed out in any order and aggregated by medians.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from . import terms as tm
from .estimators import (
    PosteriorTable,
    frequency,
    renormalize,
    summarize,
    tvd,
    with_prior,
)
from .marginals import Dataset, DesignContext, GPriorEvaluator, _columns
from .priors import PriorFamily, PriorSpec, log_prior
from .sampler import SamplerConfig, run
from .space import Heredity, Model, ModelSpace


class Allocation(Enum):
    EQUAL = "equal"
    DECREASING = "decreasing"
    INCREASING = "increasing"


@dataclass(frozen=True)
class SimDesign:
    """One simulation scenario.  ``true_terms`` is the set of mean terms;
    it need not satisfy the heredity condition of the space it is used in."""

    n: int
    snr: float
    allocation: Allocation
    true_terms: tuple[tm.Term, ...]
    replications: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.snr <= 0 or self.replications < 1:
            raise ValueError("need n >= 1, snr > 0, replications >= 1")


def _alloc_weight(allocation: Allocation, o: int) -> float:
    if allocation is Allocation.EQUAL:
        return 1.0
    if allocation is Allocation.DECREASING:
        return 2.0 ** (1 - o)
    return 2.0 ** (o - 1)


def true_signal(design: SimDesign, mains: np.ndarray):
    """Scaled coefficients and mean vector: the per-order magnitude pattern
    is rescaled so Var(mean)/sigma^2 equals the target SNR (sigma = 1)."""
    ts = [tuple(t) for t in design.true_terms if any(t)]
    if not ts:
        return [], np.zeros(0), np.zeros(mains.shape[0])
    pattern = np.array([_alloc_weight(design.allocation, tm.order(t)) for t in ts])
    z = _columns(mains, ts) @ pattern
    v = float(z.var())
    c = math.sqrt(design.snr / v) if v > 0 else 0.0
    return ts, c * pattern, c * z


def generate(design: SimDesign, space: ModelSpace, rng: np.random.Generator) -> Dataset:
    """Standard-normal mains, unit-variance Gaussian noise around the
    SNR-scaled true mean."""
    mains = rng.standard_normal((design.n, space.p))
    _, _, mean = true_signal(design, mains)
    y = mean + rng.standard_normal(design.n)
    return Dataset(y, mains, [f"x{j + 1}" for j in range(space.p)])


@dataclass(frozen=True)
class SelectionScore:
    tp_rate: float
    fp_rate: float
    true_prob: float | None
    true_rank: int | None
    found: bool


def score(summary, true_terms, space: ModelSpace) -> SelectionScore:
    """True/false positive rates of the HPM against the true term set.

    FP rate is counted against all selectable nodes outside the truth;
    an empty selectable truth makes the TP rate vacuously 1.
    """
    true_sel = set()
    for t in true_terms:
        t = tuple(t)
        if t in space.base:
            continue
        if t not in space.node_pos:
            raise ValueError(f"true term {tm.term_str(t)} lies outside the full model")
        true_sel.add(t)
    hpm_sel = set(Model(space, summary.hpm).selected_terms())
    denom_fp = space.n_nodes - len(true_sel)
    tp = 1.0 if not true_sel else len(hpm_sel & true_sel) / len(true_sel)
    fp = 0.0 if denom_fp == 0 else len(hpm_sel - true_sel) / denom_fp
    return SelectionScore(tp, fp, summary.true_prob, summary.true_rank, summary.found)


def closure_model(space: ModelSpace, true_terms) -> Model:
    """Smallest strong-heredity model of the space containing the terms."""
    want = set()
    for t in true_terms:
        t = tuple(t)
        if t not in space.full:
            raise ValueError(f"term {tm.term_str(t)} lies outside the full model")
        for q in space.all_terms:
            if tm.precedes(q, t):
                want.add(q)
    return space.model_from_terms(want)


def prior_vector(space: ModelSpace, spec: PriorSpec, bits_list) -> np.ndarray:
    return np.array([log_prior(Model(space, b), spec) for b in bits_list])


def exact_posterior(
    space: ModelSpace,
    dataset: Dataset,
    spec: PriorSpec,
    evaluator: GPriorEvaluator | None = None,
    cap: int = 200_000,
    log_priors: np.ndarray | None = None,
) -> tuple[tuple[int, ...], np.ndarray]:
    """Posterior over the whole enumerated space; the oracle the sampler's
    estimators are judged against."""
    bits_list = space.enumerated_bits(cap=cap)
    ctx = DesignContext(dataset, space, evaluator)
    lm = np.fromiter((ctx.log_bf_bits(b) for b in bits_list), dtype=float, count=len(bits_list))
    if log_priors is None:
        log_priors = prior_vector(space, spec, bits_list)
    lp = lm + log_priors
    probs = np.exp(lp - logsumexp(lp))
    probs /= probs.sum()
    return bits_list, probs


def _rep_rng(seed, *tags) -> np.random.Generator:
    return np.random.default_rng([int(seed)] + [int(t) for t in tags])


def _rep_seed(seed, *tags) -> int:
    return int(np.random.SeedSequence([int(seed)] + [int(t) for t in tags]).generate_state(1)[0])


def theorem1_experiment(
    space: ModelSpace,
    design: SimDesign,
    n_grid,
    spec: PriorSpec | None = None,
    evaluator: GPriorEvaluator | None = None,
) -> tuple[list[dict], Model]:
    """Exact posterior mass of the strong-heredity closure of the true
    model along a sample-size grid, one row per (n, replication)."""
    if space.heredity is not Heredity.STRONG:
        raise ValueError("closure concentration is a strong-heredity experiment")
    spec = spec or PriorSpec(PriorFamily.HIP)
    target = closure_model(space, design.true_terms)
    bits_list = space.enumerated_bits()
    pos = {b: i for i, b in enumerate(bits_list)}
    lp = prior_vector(space, spec, bits_list)
    rows = []
    for n in n_grid:
        for r in range(design.replications):
            rng = _rep_rng(design.seed, n, r)
            ds = generate(replace(design, n=int(n)), space, rng)
            _, probs = exact_posterior(space, ds, spec, evaluator, log_priors=lp)
            rows.append(
                {"n": int(n), "replication": r, "prob_closure": float(probs[pos[target.bits]])}
            )
    return rows, target


def theorem2_experiment(
    n: int = 10_000,
    beta: float = 1.0,
    replications: int = 20,
    seed: int = 0,
    spec: PriorSpec | None = None,
    evaluator: GPriorEvaluator | None = None,
) -> list[dict]:
    """Posterior mass split between the two minimal weak-heredity models
    nesting a pure-interaction truth (y = beta * x1 x2 + noise): their
    combined mass concentrates while the split stays random."""
    spec = spec or PriorSpec(PriorFamily.HIP)
    space = ModelSpace.full_surface(2, 2, Heredity.WEAK)
    m1 = space.model_from_terms([(1, 0), (1, 1)])
    m2 = space.model_from_terms([(0, 1), (1, 1)])
    bits_list = space.enumerated_bits()
    pos = {b: i for i, b in enumerate(bits_list)}
    lp = prior_vector(space, spec, bits_list)
    rows = []
    for r in range(replications):
        rng = _rep_rng(seed, r)
        mains = rng.standard_normal((n, 2))
        y = beta * mains[:, 0] * mains[:, 1] + rng.standard_normal(n)
        ds = Dataset(y, mains, ["x1", "x2"])
        _, probs = exact_posterior(space, ds, spec, evaluator, log_priors=lp)
        p1, p2 = float(probs[pos[m1.bits]]), float(probs[pos[m2.bits]])
        rows.append(
            {"replication": r, "mass_m1": p1, "mass_m2": p2, "combined": p1 + p2}
        )
    return rows


def selection_experiment(
    space: ModelSpace,
    design: SimDesign,
    priors: list[PriorSpec],
    iterations: int = 10_000,
    walk_prior: PriorSpec | None = None,
    evaluator: GPriorEvaluator | None = None,
    top_k: int = 10,
) -> list[dict]:
    """Selection scores per (replication, prior): one random walk per
    dataset, re-scored under each prior through the shared marginals."""
    walk_prior = walk_prior or PriorSpec(PriorFamily.HIP)
    true_model = space.model_from_terms(design.true_terms)
    rows = []
    for r in range(design.replications):
        ds = generate(design, space, _rep_rng(design.seed, design.n, r))
        cfg = SamplerConfig(
            iterations=iterations, prior=walk_prior, seed=_rep_seed(design.seed, design.n, r)
        )
        table, _ = run(ds, space, cfg, evaluator)
        for spec in priors:
            scored = table if spec == walk_prior else with_prior(table, spec)
            summ = summarize(scored, top_k=top_k, true_model=true_model)
            sc = score(summ, design.true_terms, space)
            rows.append(
                {
                    "replication": r,
                    "n": design.n,
                    "snr": design.snr,
                    "allocation": design.allocation.value,
                    "prior": spec.label(),
                    "tp_rate": sc.tp_rate,
                    "fp_rate": sc.fp_rate,
                    "true_prob": sc.true_prob,
                    "true_rank": sc.true_rank,
                    "found": sc.found,
                }
            )
    return rows


def tvd_experiment(
    space: ModelSpace,
    design: SimDesign,
    n_values,
    iterations: int,
    spec: PriorSpec | None = None,
    evaluator: GPriorEvaluator | None = None,
) -> list[dict]:
    """Renormalization vs visit-frequency accuracy against the enumerated
    posterior, one row per (n, replication)."""
    spec = spec or PriorSpec(PriorFamily.HIP)
    bits_list = space.enumerated_bits()
    lp = prior_vector(space, spec, bits_list)
    rows = []
    for n in n_values:
        for r in range(design.replications):
            ds = generate(replace(design, n=int(n)), space, _rep_rng(design.seed, n, r))
            exact_bits, exact_probs = exact_posterior(space, ds, spec, evaluator, log_priors=lp)
            exact = dict(zip(exact_bits, exact_probs))
            cfg = SamplerConfig(
                iterations=iterations, prior=spec, seed=_rep_seed(design.seed, n, r)
            )
            table, _ = run(ds, space, cfg, evaluator)
            rows.append(
                {
                    "n": int(n),
                    "replication": r,
                    "tvd_renorm": tvd(renormalize(table), exact),
                    "tvd_freq": tvd(frequency(table), exact),
                    "n_evaluated": len(table),
                }
            )
    return rows


def median_summary(rows: list[dict], by: tuple[str, ...], fields: tuple[str, ...]) -> list[dict]:
    """Median of selected fields grouped by key columns; None values are
    dropped (e.g. ranks of never-found models)."""
    groups: dict = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in by), []).append(row)
    out = []
    for key, members in sorted(groups.items(), key=lambda kv: tuple(map(str, kv[0]))):
        agg = dict(zip(by, key))
        agg["replication"] = "median"
        for f in fields:
            vals = [m[f] for m in members if m.get(f) is not None]
            agg[f] = statistics.median(vals) if vals else None
        out.append(agg)
    return out


# The largest preset true model: three mains, two squares, two
# interactions inside the five-predictor quadratic surface.
TRUE_MODEL_QUAD5 = (
    (1, 0, 0, 0, 0),
    (0, 1, 0, 0, 0),
    (0, 0, 1, 0, 0),
    (2, 0, 0, 0, 0),
    (0, 2, 0, 0, 0),
    (1, 1, 0, 0, 0),
    (1, 0, 1, 0, 0),
)
