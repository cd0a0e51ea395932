from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class SymbolStream:
    """A finite sequence over the integer alphabet ``range(alphabet_size)``."""

    alphabet_size: int
    symbols: np.ndarray

    def __post_init__(self):
        if self.alphabet_size < 1:
            raise ValueError(f"alphabet_size must be positive, got {self.alphabet_size}")
        arr = np.ascontiguousarray(self.symbols, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("symbols must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= self.alphabet_size):
            raise ValueError(
                f"symbols must lie in [0, {self.alphabet_size}); "
                f"found range [{arr.min()}, {arr.max()}]"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "symbols", arr)

    def __len__(self):
        return int(self.symbols.shape[0])

    def __getitem__(self, item):
        if isinstance(item, slice):
            return SymbolStream(self.alphabet_size, self.symbols[item])
        return int(self.symbols[item])

    def __eq__(self, other):
        if not isinstance(other, SymbolStream):
            return NotImplemented
        return (self.alphabet_size == other.alphabet_size
                and np.array_equal(self.symbols, other.symbols))

    def __repr__(self):
        head = self.symbols[:12].tolist()
        more = ", ..." if len(self) > 12 else ""
        return f"SymbolStream(a={self.alphabet_size}, n={len(self)}, {head}{more})"

    @classmethod
    def from_text(cls, text, alphabet):
        """Map each character of ``text`` to its index in ``alphabet``."""
        index = {ch: i for i, ch in enumerate(alphabet)}
        try:
            syms = [index[ch] for ch in text]
        except KeyError as exc:
            raise ValueError(f"character {exc.args[0]!r} not in alphabet {alphabet!r}") from None
        return cls(len(alphabet), np.array(syms, dtype=np.int64))

    def to_text(self, alphabet):
        return "".join(alphabet[s] for s in self.symbols)
