"""Heredity-constrained model spaces over polynomial term DAGs.

A space is fixed by a base model (terms always included), a full model
(the largest candidate), and a heredity condition.  Candidate models are
bitsets over the selectable nodes ``full \\ base``, indexed in canonical
order, so model keys are plain integers: cheap to hash, cache, and
serialize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from . import terms as tm
from .terms import Term


class Heredity(Enum):
    STRONG = "strong"
    WEAK = "weak"


class CapExceeded(Exception):
    """Enumeration would exceed the caller's cap; sample instead."""


def bit_ids(bits: int) -> list[int]:
    """Indices of set bits, ascending."""
    out = []
    while bits:
        lsb = bits & -bits
        out.append(lsb.bit_length() - 1)
        bits ^= lsb
    return out


class ModelSpace:
    """Frozen descriptor of a heredity-constrained model space.

    Immutable after construction (enumeration results are memoized);
    safe to share across threads for reads.
    """

    def __init__(
        self,
        p: int,
        base: Iterable[Term],
        full: Iterable[Term],
        heredity: Heredity = Heredity.STRONG,
        model_count: int | None = None,
    ):
        base_set = frozenset(tuple(t) for t in base)
        full_set = frozenset(tuple(t) for t in full)
        if p < 1 or p > tm.MAX_VARS:
            raise ValueError(f"p must be in 1..{tm.MAX_VARS}")
        if not base_set <= full_set:
            raise ValueError("base model must be nested in the full model")
        for name, s in (("base", base_set), ("full", full_set)):
            for t in s:
                if len(t) != p or any(e < 0 for e in t):
                    raise ValueError(f"{name} term {t} invalid for p={p}")
                if tm.order(t) > tm.MAX_DEGREE:
                    raise ValueError(f"{name} term {t} exceeds degree cap {tm.MAX_DEGREE}")
                if not tm.parents(t) <= s:
                    raise ValueError(f"{name} model is not parent-closed at {tm.term_str(t)}")

        self.p = p
        self.heredity = heredity
        self.base = base_set
        self.full = full_set
        self.all_terms = tm.canonical_sort(full_set)
        self.base_terms = tm.canonical_sort(base_set)
        self.nodes: tuple[Term, ...] = tuple(t for t in self.all_terms if t not in base_set)
        self.n_nodes = len(self.nodes)
        self.node_pos = {t: i for i, t in enumerate(self.nodes)}

        self._strong = heredity is Heredity.STRONG
        self._node_order = [tm.order(t) for t in self.nodes]
        self._node_length = [tm.length(t) for t in self.nodes]
        self._node_type = [tm.term_type(t) for t in self.nodes]
        par_sel, n_par_base, n_par_tot = [], [], []
        for t in self.nodes:
            ps = tm.parents(t)
            mask, nb = 0, 0
            for q in ps:
                if q in base_set:
                    nb += 1
                else:
                    mask |= 1 << self.node_pos[q]
            par_sel.append(mask)
            n_par_base.append(nb)
            n_par_tot.append(len(ps))
        self._par_sel = par_sel
        self._n_par_base = n_par_base
        self._n_par_tot = n_par_tot
        child_sel = [0] * self.n_nodes
        for i, mask in enumerate(par_sel):
            for q in bit_ids(mask):
                child_sel[q] |= 1 << i
        self._child_sel = child_sel

        self.orders: tuple[int, ...] = tuple(sorted(set(self._node_order)))
        self._order_ids = {
            j: tuple(i for i, o in enumerate(self._node_order) if o == j) for j in self.orders
        }
        self._order_masks = {
            j: sum(1 << i for i in ids) for j, ids in self._order_ids.items()
        }
        self._model_count = model_count
        self._enum_cache: tuple[int, ...] | None = None

    @classmethod
    def full_surface(
        cls,
        p: int,
        degree: int,
        heredity: Heredity = Heredity.STRONG,
        base: Iterable[Term] | None = None,
    ) -> "ModelSpace":
        """Space whose full model is the complete degree-``degree`` surface."""
        full = tm.generate_full_surface(p, degree)
        base = (tm.intercept(p),) if base is None else tuple(base)
        return cls(p, base, full, heredity)

    # -- node-level structure ------------------------------------------------

    def node_order(self, i: int) -> int:
        return self._node_order[i]

    def node_length(self, i: int) -> int:
        return self._node_length[i]

    def node_type(self, i: int) -> tuple[int, ...]:
        return self._node_type[i]

    def order_ids(self, j: int) -> tuple[int, ...]:
        return self._order_ids.get(j, ())

    def order_mask(self, j: int) -> int:
        return self._order_masks.get(j, 0)

    def missing_parents(self, i: int, bits: int) -> int:
        """Parents of node ``i`` that are neither in the base nor included."""
        have = self._n_par_base[i] + (self._par_sel[i] & bits).bit_count()
        return self._n_par_tot[i] - have

    # -- heredity machinery --------------------------------------------------

    def eligible(self, i: int, bits: int) -> bool:
        """May node ``i`` be included given the inclusions in ``bits``?

        Nodes whose entire parent set lies in the base are always
        eligible; under weak heredity one included-or-base parent
        suffices, under strong heredity all parents must be available.
        """
        if self._strong:
            req = self._par_sel[i]
            return bits & req == req
        return (
            self._n_par_base[i] > 0
            or bits & self._par_sel[i] != 0
            or self._n_par_tot[i] == 0
        )

    def is_valid_bits(self, bits: int) -> bool:
        m = bits
        while m:
            lsb = m & -m
            if not self.eligible(lsb.bit_length() - 1, bits):
                return False
            m ^= lsb
        return True

    def extreme_mask(self, bits: int) -> int:
        """Included nodes whose removal keeps the model valid."""
        out = 0
        m = bits
        while m:
            lsb = m & -m
            i = lsb.bit_length() - 1
            m ^= lsb
            kids = self._child_sel[i] & bits
            if self._strong:
                if kids == 0:
                    out |= lsb
                continue
            rest = bits ^ lsb
            ok = True
            while kids:
                klsb = kids & -kids
                ci = klsb.bit_length() - 1
                kids ^= klsb
                if self._n_par_base[ci] == 0 and self._par_sel[ci] & rest == 0:
                    ok = False
                    break
            if ok:
                out |= lsb
        return out

    def addable_mask(self, bits: int) -> int:
        """Excluded nodes whose addition keeps the model valid."""
        out = 0
        for i in range(self.n_nodes):
            if not bits >> i & 1 and self.eligible(i, bits):
                out |= 1 << i
        return out

    # -- enumeration and counting ---------------------------------------------

    def iter_model_bits(self, cap: int | None = None) -> Iterator[int]:
        """Depth-first enumeration of every valid model, each exactly once.

        Nodes are visited in canonical order, so a node's heredity
        precondition is already decided when it is reached.  Order is
        deterministic across runs.
        """
        n, count = self.n_nodes, 0
        eligible = self.eligible
        stack = [(0, 0)]
        while stack:
            i, bits = stack.pop()
            while i < n:
                if eligible(i, bits):
                    stack.append((i + 1, bits | 1 << i))
                i += 1
            count += 1
            if cap is not None and count > cap:
                raise CapExceeded(f"model count exceeds cap {cap}")
            yield bits

    def enumerated_bits(self, cap: int = 200_000) -> tuple[int, ...]:
        if self._enum_cache is None:
            self._enum_cache = tuple(self.iter_model_bits(cap=cap))
            self._model_count = len(self._enum_cache)
        return self._enum_cache

    def enumerate_models(self, cap: int = 200_000) -> list["Model"]:
        return [Model(self, b) for b in self.enumerated_bits(cap=cap)]

    def model_count(self, cap: int = 200_000) -> int:
        """Exact size of the model space (closed form for quadratic surfaces)."""
        if self._model_count is None:
            if self._is_quadratic_surface():
                self._model_count = count_quadratic_space(self.p, self.heredity)
            else:
                self.enumerated_bits(cap=cap)
        return self._model_count

    def _is_quadratic_surface(self) -> bool:
        return self.base == {tm.intercept(self.p)} and self.full == set(
            tm.generate_full_surface(self.p, 2)
        )

    # -- model construction ----------------------------------------------------

    def model(self, bits: int = 0) -> "Model":
        return Model(self, bits)

    def base_model(self) -> "Model":
        return Model(self, 0)

    def full_model(self) -> "Model":
        return Model(self, (1 << self.n_nodes) - 1)

    def model_from_terms(self, ts: Iterable[Term | str]) -> "Model":
        """Model holding the given terms; base terms may be listed or omitted."""
        bits = 0
        for t in ts:
            t = tm.parse_term(t, self.p) if isinstance(t, str) else tuple(t)
            if t in self.base:
                continue
            i = self.node_pos.get(t)
            if i is None:
                raise ValueError(f"term {tm.term_str(t)} is not selectable in this space")
            bits |= 1 << i
        return Model(self, bits)

    def __repr__(self):
        return (
            f"ModelSpace(p={self.p}, nodes={self.n_nodes}, "
            f"heredity={self.heredity.value})"
        )


@dataclass(frozen=True)
class Model:
    """A candidate model: the base plus a bitset of selectable nodes."""

    space: ModelSpace
    bits: int = 0

    def is_valid(self) -> bool:
        return self.space.is_valid_bits(self.bits)

    def size(self) -> int:
        return self.bits.bit_count()

    def node_ids(self) -> list[int]:
        return bit_ids(self.bits)

    def selected_terms(self) -> tuple[Term, ...]:
        nodes = self.space.nodes
        return tuple(nodes[i] for i in bit_ids(self.bits))

    def terms(self) -> tuple[Term, ...]:
        """Base and selected terms together, canonically ordered."""
        return tm.canonical_sort(self.space.base | set(self.selected_terms()))

    def term_strings(self) -> list[str]:
        return [tm.term_str(t) for t in self.terms()]

    def extreme_nodes(self) -> frozenset[Term]:
        nodes = self.space.nodes
        return frozenset(nodes[i] for i in bit_ids(self.space.extreme_mask(self.bits)))

    def addable_children(self) -> frozenset[Term]:
        nodes = self.space.nodes
        return frozenset(nodes[i] for i in bit_ids(self.space.addable_mask(self.bits)))

    def __contains__(self, t: Term) -> bool:
        t = tuple(t)
        if t in self.space.base:
            return True
        i = self.space.node_pos.get(t)
        return i is not None and bool(self.bits >> i & 1)

    def __repr__(self):
        return f"Model({'+'.join(self.term_strings())})"


def count_quadratic_space(p: int, heredity: Heredity) -> int:
    """Exact count of heredity-valid models over the full quadratic surface.

    Conditioning on the set of k included mains: under strong heredity
    the square x_j^2 needs x_j and the interaction x_i*x_j needs both
    endpoints, giving 2^(k(k+1)/2) quadratic choices; under weak heredity
    one endpoint suffices, giving 2^k * 2^(C(p,2) - C(p-k,2)).
    """
    if p < 1:
        raise ValueError("p must be positive")
    total = 0
    for k in range(p + 1):
        if heredity is Heredity.STRONG:
            total += math.comb(p, k) << (k * (k + 1) // 2)
        else:
            total += math.comb(p, k) << (k + math.comb(p, 2) - math.comb(p - k, 2))
    return total


def export_dot(model: Model, name: str = "model") -> str:
    """DOT digraph of a model: one node per term, edges for immediate precedence."""
    if not model.is_valid():
        raise ValueError("model violates the heredity condition")
    ts = model.terms()
    tset = set(ts)
    lines = [f"digraph {name} {{"]
    for t in ts:
        lines.append(f'  "{tm.term_str(t)}";')
    for t in ts:
        for c in tm.canonical_sort(tm.children_within(t, tset)):
            lines.append(f'  "{tm.term_str(t)}" -> "{tm.term_str(c)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
