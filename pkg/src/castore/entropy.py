"""Empirical word frequencies and l-empirical entropy of finite strings.

All logarithms are base 2. Only words that actually occur are visited; the
sum over the full A^l is dominated by zero terms.
"""

import csv
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .compressor.stream import SymbolStream

L_MAX_CAP = 24


@dataclass
class EntropyProfile:
    alphabet_size: int
    length: int
    values: dict = field(default_factory=dict)   # l -> bits/symbol

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["l", "H_l_bits"])
            for l in sorted(self.values):
                w.writerow([l, repr(float(self.values[l]))])


def _window_counts(symbols, a, l):
    """Counts of the distinct overlapping length-l windows."""
    n = symbols.shape[0]
    m = n - l + 1
    if a ** l < 2 ** 62:
        codes = np.zeros(m, dtype=np.int64)
        for j in range(l):
            codes = codes * a + symbols[j:j + m]
        _, counts = np.unique(codes, return_counts=True)
        return counts
    windows = np.lib.stride_tricks.sliding_window_view(symbols, l)
    _, counts = np.unique(windows, axis=0, return_counts=True)
    return counts


def word_frequency(s: SymbolStream, w: SymbolStream) -> Fraction:
    """Fraction of the n-l+1 overlapping windows of ``s`` equal to ``w``."""
    n, l = len(s), len(w)
    if l == 0 or l > n:
        raise ValueError(f"need 1 <= |w| <= |s|, got |w|={l}, |s|={n}")
    windows = np.lib.stride_tricks.sliding_window_view(s.symbols, l)
    hits = int(np.all(windows == w.symbols, axis=1).sum())
    return Fraction(hits, n - l + 1)


def empirical_entropy(s: SymbolStream, l: int) -> float:
    n = len(s)
    if not 1 <= l <= n:
        raise ValueError(f"need 1 <= l <= |s|, got l={l}, |s|={n}")
    counts = _window_counts(s.symbols, s.alphabet_size, l)
    total = n - l + 1
    p = counts / total
    h = float(-(p * np.log2(p)).sum()) / l
    return max(h, 0.0)


def entropy_profile(s: SymbolStream, l_max: int, cap: int = L_MAX_CAP) -> EntropyProfile:
    """Entropies for l = 1..l_max; l_max is capped at ``cap`` (word table size)."""
    if not 1 <= l_max <= min(len(s), cap):
        raise ValueError(f"l_max must be in [1, min(|s|, {cap})], got {l_max}")
    values = {l: empirical_entropy(s, l) for l in range(1, l_max + 1)}
    return EntropyProfile(s.alphabet_size, len(s), values)
