"""Model-space priors: closed-form log probabilities and generative draws.

Six families are supported.  EPP is uniform over the space.  The rest
factor over orders of the node DAG: HUP shares one inclusion probability
across the whole model, HIP gives every node its own, HOP ties nodes of
equal order, and HLP/HTP tie nodes of equal order and equal length/type.
Hyperparameters follow two schemes: all Beta(1,1), or Beta(1, ch) where
ch counts the nodes currently addable in the node's group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import betaln

from .space import Heredity, Model, ModelSpace
from .terms import Term


class PriorFamily(Enum):
    EPP = "epp"
    HUP = "hup"
    HIP = "hip"
    HOP = "hop"
    HLP = "hlp"
    HTP = "htp"


class HyperScheme(Enum):
    ALL_ONES = "11"
    CHILD_PENALTY = "ch"


_GROUPED = (PriorFamily.HIP, PriorFamily.HOP, PriorFamily.HLP, PriorFamily.HTP)
_PENALIZABLE = (PriorFamily.HIP, PriorFamily.HLP, PriorFamily.HTP)


@dataclass(frozen=True)
class PriorSpec:
    """Prior family plus hyperparameter scheme.

    ``whm_parent_penalty`` grows b with the number of missing parents
    (b += 2 per missing parent), so a node with all parents present keeps
    its scheme value; it only makes sense on weak-heredity spaces and is
    limited to the per-node and grouped families that can express it.
    """

    family: PriorFamily
    scheme: HyperScheme = HyperScheme.ALL_ONES
    whm_parent_penalty: bool = False

    def __post_init__(self):
        if self.whm_parent_penalty and self.family not in _PENALIZABLE:
            raise ValueError("parent-count penalty applies to HIP/HLP/HTP only")

    def label(self) -> str:
        if self.family is PriorFamily.EPP:
            return "epp"
        tag = f"{self.family.value}.{self.scheme.value}"
        return tag + "+whm" if self.whm_parent_penalty else tag

    @classmethod
    def parse(cls, text: str) -> "PriorSpec":
        """Parse labels like ``hip.ch``, ``hop.11``, ``epp``, ``htp.11+whm``."""
        text = text.strip().lower()
        whm = text.endswith("+whm")
        if whm:
            text = text[: -len("+whm")]
        if "." in text:
            fam, _, sch = text.partition(".")
        else:
            fam, sch = text, "11"
        try:
            family = PriorFamily(fam)
            scheme = HyperScheme(sch)
        except ValueError:
            raise ValueError(f"unknown prior spec {text!r}") from None
        return cls(family, scheme, whm)


def _check(model: Model, spec: PriorSpec) -> None:
    if spec.whm_parent_penalty and model.space.heredity is not Heredity.WEAK:
        raise ValueError("parent-count penalty requires a weak-heredity space")
    if not model.is_valid():
        raise ValueError("model violates the heredity condition")


def log_prior(model: Model, spec: PriorSpec) -> float:
    """log pi(M | space, spec); exact in log space via log-beta."""
    _check(model, spec)
    space, bits = model.space, model.bits
    if spec.family is PriorFamily.EPP:
        return -math.log(space.model_count())
    if spec.family is PriorFamily.HUP:
        if space.n_nodes == 0:
            return 0.0
        n_inc = bits.bit_count()
        n_child = space.addable_mask(bits).bit_count()
        b = float(space.n_nodes) if spec.scheme is HyperScheme.CHILD_PENALTY else 1.0
        return float(betaln(n_inc + 1.0, n_child + b) - betaln(1.0, b))
    return _log_grouped(space, bits, spec)


def _log_grouped(space: ModelSpace, bits: int, spec: PriorSpec) -> float:
    child_pen = spec.scheme is HyperScheme.CHILD_PENALTY
    whm = spec.whm_parent_penalty
    fam = spec.family
    lp = 0.0
    for j in space.orders:
        elig = [i for i in space.order_ids(j) if space.eligible(i, bits)]
        if not elig:
            continue
        if fam is PriorFamily.HIP:
            b0 = float(len(elig)) if child_pen else 1.0
            for i in elig:
                b = b0 + 2.0 * space.missing_parents(i, bits) if whm else b0
                if bits >> i & 1:
                    lp -= math.log1p(b)
                else:
                    lp += math.log(b) - math.log1p(b)
        elif fam is PriorFamily.HOP:
            n_inc = sum(bits >> i & 1 for i in elig)
            b = float(len(elig)) if child_pen else 1.0
            lp += betaln(n_inc + 1.0, len(elig) - n_inc + b) - betaln(1.0, b)
        else:  # HLP / HTP: group-exchangeable within an order
            for ids in _groups(space, elig, fam, whm, bits).values():
                n_inc = sum(bits >> i & 1 for i in ids)
                b = float(len(ids)) if child_pen else 1.0
                if whm:
                    b += 2.0 * space.missing_parents(ids[0], bits)
                lp += betaln(n_inc + 1.0, len(ids) - n_inc + b) - betaln(1.0, b)
    return float(lp)


def _groups(space, elig, fam, whm, bits):
    groups: dict = {}
    for i in elig:
        key = space.node_length(i) if fam is PriorFamily.HLP else space.node_type(i)
        if whm:
            key = (key, space.missing_parents(i, bits))
        groups.setdefault(key, []).append(i)
    return groups


def whm_conditional_beta(term: Term, model: Model) -> tuple[float, float]:
    """Beta parameters (a, b) for one node's conditional inclusion under
    the weak-heredity parent-count penalty: a=1, b grows by 2 per parent
    missing from the model, reproducing inclusion odds 1/2, 1/4, ... as
    parents drop out."""
    space = model.space
    if space.heredity is not Heredity.WEAK:
        raise ValueError("parent-count penalty requires a weak-heredity space")
    i = space.node_pos.get(tuple(term))
    if i is None:
        raise ValueError("term is not a selectable node of this space")
    return 1.0, 1.0 + 2.0 * space.missing_parents(i, model.bits)


def sample_model(spec: PriorSpec, space: ModelSpace, rng: np.random.Generator) -> Model:
    """Generative draw from the prior.

    Sweeps orders from lowest to highest; eligibility at order j is fully
    decided by the lower orders.  HUP draws its single latent inclusion
    probability before the sweep; HOP/HLP/HTP draw one per group as the
    group's hyperparameters become known.
    """
    if spec.whm_parent_penalty and space.heredity is not Heredity.WEAK:
        raise ValueError("parent-count penalty requires a weak-heredity space")
    fam = spec.family
    if fam is PriorFamily.EPP:
        models = space.enumerated_bits()
        return Model(space, models[int(rng.integers(len(models)))])
    child_pen = spec.scheme is HyperScheme.CHILD_PENALTY
    whm = spec.whm_parent_penalty
    bits = 0
    if fam is PriorFamily.HUP:
        if space.n_nodes == 0:
            return Model(space, 0)
        pi = rng.beta(1.0, float(space.n_nodes) if child_pen else 1.0)
    for j in space.orders:
        elig = [i for i in space.order_ids(j) if space.eligible(i, bits)]
        if not elig:
            continue
        if fam is PriorFamily.HUP:
            for i in elig:
                if rng.random() < pi:
                    bits |= 1 << i
        elif fam is PriorFamily.HIP:
            b0 = float(len(elig)) if child_pen else 1.0
            for i in elig:
                b = b0 + 2.0 * space.missing_parents(i, bits) if whm else b0
                if rng.random() < 1.0 / (1.0 + b):
                    bits |= 1 << i
        elif fam is PriorFamily.HOP:
            pj = rng.beta(1.0, float(len(elig)) if child_pen else 1.0)
            for i in elig:
                if rng.random() < pj:
                    bits |= 1 << i
        else:
            for ids in _groups(space, elig, fam, whm, bits).values():
                b = float(len(ids)) if child_pen else 1.0
                if whm:
                    b += 2.0 * space.missing_parents(ids[0], bits)
                pg = rng.beta(1.0, b)
                for i in ids:
                    if rng.random() < pg:
                        bits |= 1 << i
    return Model(space, bits)


def prior_table(
    space: ModelSpace, specs: list[PriorSpec], cap: int = 10_000
) -> tuple[list[Model], np.ndarray]:
    """Probabilities of every model under each spec (rows follow
    enumeration order); raises CapExceeded on oversized spaces."""
    models = space.enumerate_models(cap=cap)
    probs = np.empty((len(models), len(specs)))
    for c, spec in enumerate(specs):
        for r, m in enumerate(models):
            probs[r, c] = math.exp(log_prior(m, spec))
    return models, probs
