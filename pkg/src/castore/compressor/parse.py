"""Dictionary parses: CASToRe word-word pairs and the classical LZ78 baseline."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .stream import SymbolStream


@dataclass(frozen=True)
class ParseWord:
    """One emitted pair.

    ``extension`` is a word id when ``literal`` is False, a symbol when it
    is True, and None for the trailing pair that only repeats ``prefix_id``.
    """

    index: int
    prefix_id: int
    extension: Optional[int]
    literal: bool = False

    def as_pair(self):
        return (self.prefix_id, self.extension)


@dataclass(frozen=True, eq=False)
class ParseResult:
    """Pairs in emission order, stored column-wise.

    Every pair but a trailing ``(W, None)`` registers a new dictionary word
    whose id is the pair's 1-based index.
    """

    alphabet_size: int
    source_length: int
    prefix_ids: np.ndarray
    kinds: np.ndarray
    values: np.ndarray

    def __len__(self):
        return int(self.kinds.shape[0])

    @property
    def words(self):
        out = []
        for i, (p, k, v) in enumerate(zip(self.prefix_ids.tolist(),
                                          self.kinds.tolist(),
                                          self.values.tolist()), start=1):
            if k == K.EXT_WORD:
                out.append(ParseWord(i, p, v))
            elif k == K.EXT_LITERAL:
                out.append(ParseWord(i, p, v, literal=True))
            else:
                out.append(ParseWord(i, p, None))
        return out

    @property
    def has_tail(self):
        """True when the last pair is a ``(W, None)`` remainder."""
        return len(self) > 0 and int(self.kinds[-1]) == K.EXT_NONE

    def expansions(self):
        """Symbol tuple spelled by each pair, in order."""
        words = [()]
        out = []
        for w in self.words:
            text = words[w.prefix_id]
            if w.extension is None:
                out.append(text)
                continue
            text = text + ((w.extension,) if w.literal else words[w.extension])
            words.append(text)
            out.append(text)
        return out


def _as_array(stream):
    return stream.symbols


def parse_castore(stream: SymbolStream) -> ParseResult:
    """Greedy two-phase parse: longest word W, then longest word Y after it.

    Equal-length matches are the same trie node, so no tie-breaking exists.
    """
    p, k, v = K.castore_pairs(_as_array(stream), stream.alphabet_size)
    return ParseResult(stream.alphabet_size, len(stream), p, k, v)


def parse_lz78(stream: SymbolStream) -> ParseResult:
    p, k, v = K.lz78_pairs(_as_array(stream), stream.alphabet_size)
    return ParseResult(stream.alphabet_size, len(stream), p, k, v)


def bit_cost(parse: ParseResult) -> int:
    """I_Z of the parse: 4-bit preamble plus the cost of every pair.

    Pair t (1-based) spends ceil(log2(t+1)) bits on its prefix id and one
    flag bit on its extension kind, then either a word-id field of the same
    width or a literal of ceil(log2 a) bits.
    """
    return int(K.pairs_cost(parse.kinds, parse.alphabet_size))
