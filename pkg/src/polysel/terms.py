"""Multi-index algebra for polynomial terms.

A term is a tuple of non-negative integer exponents, one slot per
predictor: ``(2, 0, 1)`` stands for ``x1^2*x3``.  The all-zeros tuple is
the intercept.  Terms are plain tuples so they hash fast and sort
deterministically; everything else in the package is built on the
canonical ordering defined by :func:`generate_full_surface`.
"""

from __future__ import annotations

import math
import re
from typing import Iterable

Term = tuple[int, ...]

# Caps keep exponent vectors packable into fixed-width keys and full
# surfaces materializable in memory.
MAX_VARS = 32
MAX_DEGREE = 15
MAX_SURFACE_TERMS = 5_000_000


def intercept(p: int) -> Term:
    return (0,) * p


def order(t: Term) -> int:
    """Total degree of a term: the sum of its exponents."""
    return sum(t)


def length(t: Term) -> int:
    """Number of distinct predictors appearing in the term."""
    return sum(1 for e in t if e)


def term_type(t: Term) -> tuple[int, ...]:
    """The nonzero exponents as an increasing sequence."""
    return tuple(sorted(e for e in t if e))


def length_and_type(t: Term) -> tuple[int, tuple[int, ...]]:
    tt = term_type(t)
    return len(tt), tt


def precedes(a: Term, b: Term) -> bool:
    """Component-wise partial order: ``a`` precedes ``b`` iff a_j <= b_j for all j."""
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return all(x <= y for x, y in zip(a, b))


def parents(t: Term) -> frozenset[Term]:
    """Terms reached by decrementing one strictly positive exponent."""
    out = []
    for j, e in enumerate(t):
        if e > 0:
            out.append(t[:j] + (e - 1,) + t[j + 1 :])
    return frozenset(out)


def children_within(t: Term, full: Iterable[Term]) -> frozenset[Term]:
    """Terms of ``full`` reached by incrementing one exponent of ``t``."""
    members = frozenset(full)
    out = []
    for j, e in enumerate(t):
        c = t[:j] + (e + 1,) + t[j + 1 :]
        if c in members:
            out.append(c)
    return frozenset(out)


def canonical_sort(ts: Iterable[Term]) -> tuple[Term, ...]:
    """Ascending total degree, then lexicographic on the exponent tuple."""
    return tuple(sorted(ts, key=lambda t: (sum(t), t)))


def generate_full_surface(p: int, degree: int) -> tuple[Term, ...]:
    """All terms of total degree <= ``degree`` in canonical order.

    The count is C(p + degree, degree); the ordering fixes node indices
    (and therefore model keys) for the whole system.
    """
    if p < 1 or degree < 1:
        raise ValueError("need p >= 1 and degree >= 1")
    if p > MAX_VARS or degree > MAX_DEGREE:
        raise ValueError(f"capped at p <= {MAX_VARS}, degree <= {MAX_DEGREE}")
    n_terms = math.comb(p + degree, degree)
    if n_terms > MAX_SURFACE_TERMS:
        raise ValueError(f"surface would hold {n_terms} terms; refusing to materialize")
    out: list[Term] = []
    for o in range(degree + 1):
        out.extend(_compositions(p, o))
    return tuple(out)


def _compositions(p: int, total: int):
    # length-p tuples summing to `total`, ascending lexicographic
    if p == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(p - 1, total - head):
            yield (head,) + tail


def term_str(t: Term) -> str:
    """Human-readable rendering: ``x1^2*x3``; the intercept renders as ``1``."""
    if not any(t):
        return "1"
    parts = []
    for j, e in enumerate(t):
        if e == 1:
            parts.append(f"x{j + 1}")
        elif e > 1:
            parts.append(f"x{j + 1}^{e}")
    return "*".join(parts)


_FACTOR_RE = re.compile(r"^x(\d+)(?:\^(\d+))?$")


def parse_term(text: str, p: int) -> Term:
    """Inverse of :func:`term_str` for a space with ``p`` predictors."""
    text = text.strip()
    if text == "1":
        return intercept(p)
    exps = [0] * p
    for factor in text.split("*"):
        m = _FACTOR_RE.match(factor.strip())
        if not m:
            raise ValueError(f"cannot parse term {text!r}")
        j = int(m.group(1))
        if not 1 <= j <= p:
            raise ValueError(f"predictor x{j} out of range (p={p}) in {text!r}")
        if exps[j - 1]:
            raise ValueError(f"repeated predictor in term {text!r}")
        exps[j - 1] = int(m.group(2) or 1)
    return tuple(exps)
