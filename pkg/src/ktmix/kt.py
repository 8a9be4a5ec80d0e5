"""Sequential Krichevsky-Trofimov probability assignment on a finite alphabet.

After n observations with per-symbol counts c[x], the predictive probability
of symbol x is (c[x] + 1/2) / (n + m/2) for alphabet size m.  The induced
sequence probability sums to exactly 1 over all length-n sequences, and its
per-symbol codelength approaches the source entropy for any i.i.d. source.

All accumulation happens in natural-log domain; counts are stored sparsely
because level alphabets can be large while samples touch few cells.  The
closed Gamma-function form of the sequence probability is provided as an
independent cross-check of the sequential recursion, which is the
authoritative path.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

__all__ = ["KtState", "kt_log_prob_closed_form"]


class KtState:
    """Counts and accumulated log-probability for one alphabet.

    Single-writer: observe() mutates in place and returns the log predictive
    increment.  Distinct states may be updated concurrently.
    """

    __slots__ = ("alphabet_size", "counts", "total", "log_prob")

    def __init__(self, alphabet_size: int):
        if alphabet_size < 1:
            raise ValueError("alphabet size must be at least 1")
        self.alphabet_size = int(alphabet_size)
        self.counts: dict[int, int] = {}
        self.total = 0
        self.log_prob = 0.0

    def _check_symbol(self, symbol: int):
        if not 0 <= symbol < self.alphabet_size:
            raise ValueError(f"symbol {symbol} out of range for alphabet of {self.alphabet_size}")

    def predictive(self, symbol: int) -> float:
        """(c[x] + 1/2) / (n + m/2); does not mutate the state."""
        self._check_symbol(symbol)
        return (self.counts.get(symbol, 0) + 0.5) / (self.total + 0.5 * self.alphabet_size)

    def log_predictive(self, symbol: int) -> float:
        return math.log(self.predictive(symbol))

    def observe(self, symbol: int) -> float:
        inc = self.log_predictive(symbol)
        self.counts[symbol] = self.counts.get(symbol, 0) + 1
        self.total += 1
        self.log_prob += inc
        return inc

    def observe_many(self, symbols) -> float:
        """Observe a whole batch; returns the total log-probability increment.

        Computes the same sequential product as a loop of observe() calls,
        with the factors regrouped per symbol, so results agree up to float
        rounding.
        """
        symbols = np.asarray(symbols, dtype=np.int64)
        if symbols.ndim != 1:
            raise ValueError("symbol batch must be one-dimensional")
        if symbols.size == 0:
            return 0.0
        if symbols.min() < 0 or symbols.max() >= self.alphabet_size:
            raise ValueError("symbol out of range in batch")
        half_m = 0.5 * self.alphabet_size
        denominator = float(np.log(self.total + np.arange(symbols.size) + half_m).sum())
        numerator = 0.0
        uniq, batch_counts = np.unique(symbols, return_counts=True)
        for sym, cnt in zip(uniq.tolist(), batch_counts.tolist()):
            before = self.counts.get(sym, 0)
            numerator += float(np.log(np.arange(before, before + cnt) + 0.5).sum())
            self.counts[sym] = before + cnt
        self.total += symbols.size
        inc = numerator - denominator
        self.log_prob += inc
        return inc

    def copy(self) -> "KtState":
        dup = KtState(self.alphabet_size)
        dup.counts = dict(self.counts)
        dup.total = self.total
        dup.log_prob = self.log_prob
        return dup


def kt_log_prob_closed_form(counts, alphabet_size: int) -> float:
    """log of the sequence probability from final counts, via log-Gamma.

    Equals Gamma(m/2) * prod_x Gamma(c[x]+1/2) / (Gamma(n+m/2) * Gamma(1/2)^m)
    in log form.  Exists to cross-validate the sequential recursion; symbols
    with zero count contribute nothing.
    """
    if isinstance(counts, dict):
        items = counts.items()
    else:
        items = enumerate(counts)
    m = int(alphabet_size)
    if m < 1:
        raise ValueError("alphabet size must be at least 1")
    total = 0
    result = 0.0
    base = float(gammaln(0.5))
    for sym, cnt in items:
        if not 0 <= sym < m:
            raise ValueError(f"symbol {sym} out of range")
        if cnt < 0:
            raise ValueError("counts must be nonnegative")
        if cnt:
            result += float(gammaln(cnt + 0.5)) - base
            total += int(cnt)
    result += float(gammaln(0.5 * m)) - float(gammaln(total + 0.5 * m))
    return result
