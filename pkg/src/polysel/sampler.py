"""Metropolis-Hastings random walk over a model space.

Three proposal kernels are mixed at configurable frequencies: a local
jump toggling one extreme or addable node, an intermediate jump making
one such proposal per order in an ascending or descending sweep, and a
global jump drawing a fresh model from the prior.  Local and
intermediate proposals are biased toward the posterior renormalized over
the proposal set, mixed with a uniform floor so every neighbor keeps
probability at least (1 - weight)/N of being proposed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import PosteriorTable
from .marginals import Dataset, DesignContext, GPriorEvaluator
from .priors import PriorSpec, log_prior, sample_model
from .space import Model, ModelSpace

KERNEL_LOCAL = "local"
KERNEL_INTERMEDIATE = "intermediate"
KERNEL_GLOBAL = "global"


@dataclass
class SamplerConfig:
    """Run settings; all randomness flows from the single seed."""

    iterations: int
    prior: PriorSpec
    seed: int = 0
    kernel_weights: tuple[float, float, float] = (0.5, 0.4, 0.1)  # local, intermediate, global
    posterior_weight: float = 0.5  # share of the restricted posterior in proposals

    def __post_init__(self):
        w = tuple(float(x) for x in self.kernel_weights)
        if len(w) != 3 or any(x < 0 for x in w) or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("kernel weights must be three nonnegatives summing to 1")
        self.kernel_weights = w
        if not 0.0 <= self.posterior_weight <= 1.0:
            raise ValueError("posterior weight must lie in [0, 1]")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")


def run(
    dataset: Dataset,
    space: ModelSpace,
    config: SamplerConfig,
    evaluator=None,
    start: Model | None = None,
    trace_path=None,
) -> tuple[PosteriorTable, list[tuple]]:
    """Run the chain; returns the posterior table and the trace.

    Trace entries are (iteration, model key, kernel tag, accepted flag)
    for the post-decision state of each iteration.  Identical
    (seed, config, dataset) give bit-identical results.
    """
    walk = _Walk(dataset, space, config, evaluator)
    start_bits = 0 if start is None else start.bits
    if not space.is_valid_bits(start_bits):
        raise ValueError("start model violates the heredity condition")
    if trace_path is None:
        return walk.run(start_bits, None)
    with open(trace_path, "w") as fh:
        return walk.run(start_bits, fh)


class _Walk:
    def __init__(self, dataset, space, config, evaluator):
        self.space = space
        self.cfg = config
        self.rng = np.random.default_rng(config.seed)
        self.table = PosteriorTable(space)
        self._logpost: dict[int, float] = {}
        evaluator = evaluator or GPriorEvaluator()
        if isinstance(evaluator, GPriorEvaluator):
            ctx = DesignContext(dataset, space, evaluator)
            self._marginal = ctx.log_bf_bits
        else:
            self._marginal = lambda bits: evaluator.log_marginal(dataset, Model(space, bits))

    # -- scoring ---------------------------------------------------------

    def score(self, bits: int) -> float:
        lp = self._logpost.get(bits)
        if lp is None:
            lm = self._marginal(bits)
            lpri = log_prior(Model(self.space, bits), self.cfg.prior)
            self.table.record_evaluation(bits, lm, lpri)
            lp = lm + lpri
            self._logpost[bits] = lp
        return lp

    # -- proposal machinery ------------------------------------------------

    def neighborhood(self, bits: int, order: int | None = None) -> list[int]:
        """The model itself plus every one-node toggle keeping validity,
        optionally restricted to toggles of one order."""
        mask = self.space.extreme_mask(bits) | self.space.addable_mask(bits)
        if order is not None:
            mask &= self.space.order_mask(order)
        out = [bits]
        while mask:
            lsb = mask & -mask
            out.append(bits ^ lsb)
            mask ^= lsb
        return out

    def mixture_probs(self, models: list[int]) -> list[float]:
        lam = self.cfg.posterior_weight
        lps = [self.score(b) for b in models]
        mx = max(lps)
        ws = [math.exp(v - mx) for v in lps]
        tot = sum(ws)
        floor = (1.0 - lam) / len(models)
        return [lam * w / tot + floor for w in ws]

    def _draw(self, probs: list[float]) -> int:
        r = self.rng.random()
        acc = 0.0
        for j, pr in enumerate(probs):
            acc += pr
            if r < acc:
                return j
        return len(probs) - 1

    def _accept(self, cur: int, prop: int, lqf: float, lqr: float) -> tuple[int, bool]:
        ratio = self.score(prop) - self.score(cur) + lqr - lqf
        if ratio >= 0.0:
            return prop, True
        r = self.rng.random()
        if r > 0.0 and math.log(r) < ratio:
            return prop, True
        return cur, False

    # -- kernels ----------------------------------------------------------

    def local(self, cur: int) -> tuple[int, bool]:
        nb = self.neighborhood(cur)
        q = self.mixture_probs(nb)
        j = self._draw(q)
        prop = nb[j]
        if prop == cur:
            return cur, True
        nb_r = self.neighborhood(prop)
        q_r = self.mixture_probs(nb_r)
        return self._accept(cur, prop, math.log(q[j]), math.log(q_r[nb_r.index(cur)]))

    def global_(self, cur: int) -> tuple[int, bool]:
        prop = sample_model(self.cfg.prior, self.space, self.rng).bits
        self.score(prop)
        self.score(cur)
        # proposal density equals the prior, so only the Bayes factor remains
        ratio = self.table.log_marginal(prop) - self.table.log_marginal(cur)
        if ratio >= 0.0:
            return prop, True
        r = self.rng.random()
        if r > 0.0 and math.log(r) < ratio:
            return prop, True
        return cur, False

    def intermediate(self, cur: int) -> tuple[int, bool]:
        orders = self.space.orders
        ascending = self.rng.random() < 0.5
        seq = orders if ascending else tuple(reversed(orders))
        states = [cur]
        lqf = 0.0
        for k in seq:
            stage = self.neighborhood(states[-1], order=k)
            q = self.mixture_probs(stage)
            j = self._draw(q)
            lqf += math.log(q[j])
            states.append(stage[j])
        prop = states[-1]
        # Reverse trajectory: sweep the opposite direction, undoing the
        # forward toggle of each order; its stage sets are induced by the
        # forward trajectory's intermediate states.  The 1/2 direction
        # factor is symmetric and cancels from the ratio.
        lqr = 0.0
        last = len(seq)
        for t, k in enumerate(reversed(seq)):
            src = states[last - t]
            tgt = states[last - t - 1]
            stage = self.neighborhood(src, order=k)
            q = self.mixture_probs(stage)
            lqr += math.log(q[stage.index(tgt)])
        return self._accept(cur, prop, lqf, lqr)

    # -- main loop -----------------------------------------------------------

    def run(self, start_bits: int, trace_fh) -> tuple[PosteriorTable, list[tuple]]:
        self.score(start_bits)
        wl, wi, _ = self.cfg.kernel_weights
        cur = start_bits
        trace = []
        for it in range(1, self.cfg.iterations + 1):
            u = self.rng.random()
            if u < wl:
                kernel = KERNEL_LOCAL
                cur, acc = self.local(cur)
            elif u < wl + wi:
                kernel = KERNEL_INTERMEDIATE
                cur, acc = self.intermediate(cur)
            else:
                kernel = KERNEL_GLOBAL
                cur, acc = self.global_(cur)
            self.table.record_visit(cur)
            trace.append((it, cur, kernel, acc))
            if trace_fh is not None:
                trace_fh.write(
                    json.dumps(
                        {
                            "iter": it,
                            "model": Model(self.space, cur).term_strings(),
                            "kernel": kernel,
                            "accepted": acc,
                            "log_post": self._logpost[cur],
                        }
                    )
                    + "\n"
                )
        return self.table, trace
