from .codec import (
    CompressedStream,
    DecodeError,
    compress,
    compress_windowed,
    decompress,
)
from .parse import ParseResult, ParseWord, bit_cost, parse_castore, parse_lz78
from .stream import SymbolStream

__all__ = [
    "CompressedStream",
    "DecodeError",
    "ParseResult",
    "ParseWord",
    "SymbolStream",
    "bit_cost",
    "compress",
    "compress_windowed",
    "decompress",
    "parse_castore",
    "parse_lz78",
]
