"""Bit-exact container around the CASToRe parse.

Layout (MSB-first bit stream, zero-padded to a whole byte)::

    magic        4 bits   0b1010
    alphabet     varint   7-bit groups, low group first, high bit = more
    length       varint   same encoding
    pairs        for t = 1, 2, ...:
                   prefix id   ceil(log2(t+1)) bits  (0 = null word)
                   kind flag   1 bit                 (1 = literal)
                   literal     ceil(log2 a) bits     if flag = 1
                   word id     ceil(log2(t+1)) bits  if flag = 0 (0 = none)

Decoding stops once ``length`` symbols have been produced.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .parse import parse_castore
from .stream import SymbolStream

MAX_SOURCE_LENGTH = 1 << 40


class DecodeError(ValueError):
    """Malformed container; ``offset`` is the bit position of the bad field."""

    def __init__(self, reason, offset):
        super().__init__(f"{reason} at bit offset {offset}")
        self.reason = reason
        self.offset = offset


_REASONS = {
    K.ERR_TRUNCATED: "truncated payload",
    K.ERR_MAGIC: "bad magic",
    K.ERR_PREFIX_RANGE: "prefix word id out of range",
    K.ERR_EXTENSION_RANGE: "extension word id out of range",
    K.ERR_LITERAL_RANGE: "literal symbol out of range",
    K.ERR_OVERRUN: "word overruns declared length",
    K.ERR_EARLY_END: "end marker before declared length",
    K.ERR_VARINT: "oversized varint",
    K.ERR_NULL_EXTENSION: "null prefix without literal",
}


@dataclass(frozen=True)
class CompressedStream:
    alphabet_size: int
    source_length: int
    data: bytes
    bit_length: int

    @property
    def header_bits(self):
        """Varint header size; the 4-bit magic is counted with the payload."""
        return int(K.varint_bits(self.alphabet_size) + K.varint_bits(self.source_length))

    @property
    def payload_bits(self):
        return self.bit_length - self.header_bits

    def to_bytes(self):
        return self.data

    @classmethod
    def from_bytes(cls, data):
        buf = np.frombuffer(bytes(data), dtype=np.uint8)
        status, offset, a, n = K.read_header(buf)
        if status != K.OK:
            raise DecodeError(_REASONS[status], int(offset))
        return cls(int(a), int(n), bytes(data), len(buf) * 8)


def compress(stream: SymbolStream) -> CompressedStream:
    parse = parse_castore(stream)
    buf, total = K.encode(parse.prefix_ids, parse.kinds, parse.values,
                          stream.alphabet_size, len(stream))
    return CompressedStream(stream.alphabet_size, len(stream), buf.tobytes(), int(total))


def decompress(c: CompressedStream) -> SymbolStream:
    buf = np.frombuffer(c.data, dtype=np.uint8)
    status, pos, a, n = K.read_header(buf)
    if status != K.OK:
        raise DecodeError(_REASONS[status], int(pos))
    if a < 1:
        raise DecodeError("alphabet size must be positive", 4)
    if n > MAX_SOURCE_LENGTH:
        raise DecodeError(f"declared length {n} exceeds limit", 4 + int(K.varint_bits(a)))
    limit = min(len(buf) * 8, c.bit_length)
    status, offset, out = K.decode(buf, pos, a, n, limit)
    if status != K.OK:
        raise DecodeError(_REASONS[status], int(offset))
    return SymbolStream(int(a), out)


def compress_windowed(stream: SymbolStream, window_len: int) -> list:
    """Cost of each full window compressed with a fresh dictionary.

    The trailing partial window is dropped. Costs are preamble plus pairs,
    i.e. the payload cost without the varint header.
    """
    if window_len < 1:
        raise ValueError(f"window_len must be >= 1, got {window_len}")
    costs = K.castore_window_costs(stream.symbols, stream.alphabet_size, int(window_len))
    return costs.tolist()
