"""Frozen exact prior probabilities for the 13-model strong-heredity
space over the quadratic surface in two predictors (intercept-only base).

Keys are the selected terms (base omitted); columns are
(hip.11, hip.ch, hop.11, hop.ch, hup.11, hup.ch, hlp.11, hlp.ch),
with hlp == htp on this space since the maximum order is below four.
"""

from fractions import Fraction as F

X1, X2 = (1, 0), (0, 1)
X1SQ, X1X2, X2SQ = (2, 0), (1, 1), (0, 2)

COLUMNS = ("hip.11", "hip.ch", "hop.11", "hop.ch", "hup.11", "hup.ch", "hlp.11", "hlp.ch")

TABLE = {
    frozenset(): (F(1, 4), F(4, 9), F(1, 3), F(1, 2), F(1, 3), F(5, 7), F(1, 3), F(1, 2)),
    frozenset({X1}): (F(1, 8), F(1, 9), F(1, 12), F(1, 12), F(1, 12), F(5, 56), F(1, 12), F(1, 12)),
    frozenset({X2}): (F(1, 8), F(1, 9), F(1, 12), F(1, 12), F(1, 12), F(5, 56), F(1, 12), F(1, 12)),
    frozenset({X1, X1SQ}): (F(1, 8), F(1, 9), F(1, 12), F(1, 12), F(1, 12), F(5, 168), F(1, 12), F(1, 12)),
    frozenset({X2, X2SQ}): (F(1, 8), F(1, 9), F(1, 12), F(1, 12), F(1, 12), F(5, 168), F(1, 12), F(1, 12)),
    frozenset({X1, X2}): (F(1, 32), F(3, 64), F(1, 12), F(1, 12), F(1, 60), F(1, 72), F(1, 18), F(1, 24)),
    frozenset({X1, X2, X1SQ}): (F(1, 32), F(1, 64), F(1, 36), F(1, 60), F(1, 60), F(1, 168), F(1, 36), F(1, 72)),
    frozenset({X1, X2, X1X2}): (F(1, 32), F(1, 64), F(1, 36), F(1, 60), F(1, 60), F(1, 168), F(1, 18), F(1, 24)),
    frozenset({X1, X2, X2SQ}): (F(1, 32), F(1, 64), F(1, 36), F(1, 60), F(1, 60), F(1, 168), F(1, 36), F(1, 72)),
    frozenset({X1, X2, X1SQ, X1X2}): (F(1, 32), F(1, 192), F(1, 36), F(1, 120), F(1, 30), F(1, 252), F(1, 36), F(1, 72)),
    frozenset({X1, X2, X1SQ, X2SQ}): (F(1, 32), F(1, 192), F(1, 36), F(1, 120), F(1, 30), F(1, 252), F(1, 18), F(1, 72)),
    frozenset({X1, X2, X1X2, X2SQ}): (F(1, 32), F(1, 192), F(1, 36), F(1, 120), F(1, 30), F(1, 252), F(1, 36), F(1, 72)),
    frozenset({X1, X2, X1SQ, X1X2, X2SQ}): (F(1, 32), F(1, 576), F(1, 12), F(1, 120), F(1, 6), F(1, 252), F(1, 18), F(1, 72)),
}

assert all(sum(row[c] for row in TABLE.values()) == 1 for c in range(len(COLUMNS)))
