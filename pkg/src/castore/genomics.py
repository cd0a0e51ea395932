"""Windowed complexity spectra of nucleotide sequences.

A spectrum maps a window length L to the mean of I_Z(window) / L over the
full windows of a sequence, each window compressed with a fresh dictionary.
Extensivity is judged against a shuffled copy of the same sequence: raw
spectra of memoryless sources also drift down slowly with L (dictionary
warm-up), so the classification uses the ratio original / shuffled.
"""

import csv
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .compressor import compress_windowed
from .compressor.stream import SymbolStream

log = logging.getLogger(__name__)

NUCLEOTIDES = "ACGT"
REGION_LABELS = ("coding", "intron", "intergenic", "unlabeled")
DEFAULT_WINDOWS = tuple(2 ** k for k in range(9, 18))
FLATNESS_TAU = 0.05

_CODE = np.full(256, -1, dtype=np.int64)
for _i, _c in enumerate(NUCLEOTIDES):
    _CODE[ord(_c)] = _i
    _CODE[ord(_c.lower())] = _i


class FastaError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class NucleotideSequence:
    id: str
    residues: SymbolStream
    region_label: str = "unlabeled"
    dropped: int = 0

    def __len__(self):
        return len(self.residues)

    @classmethod
    def from_string(cls, seq_id, text, region_label="unlabeled"):
        residues, dropped = sanitize(text)
        return cls(seq_id, residues, region_label, dropped)


def sanitize(text):
    """Fold case and drop anything outside ACGT; returns (stream, dropped)."""
    raw = np.frombuffer(text.encode("ascii", "replace"), dtype=np.uint8)
    codes = _CODE[raw]
    keep = codes >= 0
    return SymbolStream(4, codes[keep]), int((~keep).sum())


def parse_fasta(path):
    """Records in file order. Non-ACGT residues are dropped and counted."""
    records = []
    header, chunks, header_line = None, [], 0

    def flush():
        seq = NucleotideSequence.from_string(header, "".join(chunks))
        if seq.dropped:
            log.info("%s: dropped %d non-ACGT characters", seq.id, seq.dropped)
        records.append(seq)

    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith(">"):
                if header is not None:
                    flush()
                name = line[1:].split()
                if not name:
                    raise FastaError("header without an identifier", lineno)
                header, chunks, header_line = name[0], [], lineno
            elif header is None:
                raise FastaError("sequence data before the first '>' header", lineno)
            else:
                chunks.append(line)
    if header is None:
        raise FastaError("no FASTA records found", max(header_line, 1))
    flush()
    return records


def read_region_labels(path):
    """Sidecar of ``id<TAB>label`` lines."""
    labels = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1].strip() not in REGION_LABELS:
                raise FastaError(f"expected 'id<TAB>{{{','.join(REGION_LABELS)}}}'", lineno)
            labels[parts[0].strip()] = parts[1].strip()
    return labels


# ------------------------------------------------------------ synthetic data


def iid_sequence(n, seed, probs=None, seq_id="iid"):
    rng = np.random.default_rng(seed)
    syms = rng.choice(4, size=n, p=probs)
    return NucleotideSequence(seq_id, SymbolStream(4, syms))


def markov_sequence(n, seed, stay=0.7, seq_id="markov"):
    """First-order chain that repeats the previous base with probability ``stay``."""
    rng = np.random.default_rng(seed)
    change = rng.random(n) >= stay
    steps = np.where(change, rng.integers(1, 4, size=n), 0)
    syms = np.cumsum(steps) % 4
    return NucleotideSequence(seq_id, SymbolStream(4, syms))


def duplication_sequence(n, seed, copy_prob=0.6, reach=8192, min_len=32, max_len=256,
                         mutation=0.02, seq_id="duplication"):
    """Expansion-copy process with correlations of bounded range.

    Built left to right from blocks: with probability ``copy_prob`` a block
    copies an earlier segment that starts at most ``reach`` symbols back (with
    point mutations), otherwise it is fresh uniform noise. Redundancy is
    therefore visible only to windows longer than about ``reach``.
    """
    rng = np.random.default_rng(seed)
    out = np.empty(n + max_len, dtype=np.int64)
    pos = 0
    while pos < n:
        m = int(rng.integers(min_len, max_len + 1))
        if pos >= min_len and rng.random() < copy_prob:
            back = int(rng.integers(min_len, min(reach, pos) + 1))
            src = pos - back
            if back >= m:
                out[pos:pos + m] = out[src:src + m]
            else:   # overlapping copy extends a tandem repeat
                for k in range(m):
                    out[pos + k] = out[src + k]
            hit = rng.random(m) < mutation
            out[pos:pos + m][hit] = rng.integers(0, 4, size=int(hit.sum()))
        else:
            out[pos:pos + m] = rng.integers(0, 4, size=m)
        pos += m
    return NucleotideSequence(seq_id, SymbolStream(4, out[:n]))


def shuffle_baseline(seq: NucleotideSequence, seed) -> NucleotideSequence:
    """Uniform random permutation of the residues (composition kept)."""
    rng = np.random.default_rng(seed)
    syms = rng.permutation(seq.residues.symbols)
    return NucleotideSequence(f"{seq.id}/shuffled", SymbolStream(4, syms), seq.region_label)


# ----------------------------------------------------------------- spectra


@dataclass
class SpectrumEntry:
    L: int
    mean_ratio: float      # bits per symbol
    stdev: float
    n_windows: int


@dataclass
class WindowSpectrum:
    sequence_id: str
    entries: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def lengths(self):
        return np.array([e.L for e in self.entries])

    @property
    def means(self):
        return np.array([e.mean_ratio for e in self.entries])


def window_spectrum(seq: NucleotideSequence, window_lengths=DEFAULT_WINDOWS) -> WindowSpectrum:
    spec = WindowSpectrum(seq.id)
    n = len(seq)
    for L in sorted(set(int(v) for v in window_lengths)):
        if L < 1 or L > n:
            msg = f"window length {L} skipped for {seq.id} (length {n})"
            log.warning(msg)
            spec.warnings.append(msg)
            continue
        ratios = np.asarray(compress_windowed(seq.residues, L), dtype=float) / L
        spec.entries.append(SpectrumEntry(L, float(ratios.mean()), float(ratios.std()), int(ratios.size)))
    return spec


def max_relative_drop(values):
    """Largest (v_i - v_j) / v_i over i < j; 0 for non-decreasing input."""
    v = np.asarray(values, dtype=float)
    best = 0.0
    peak = -np.inf
    for x in v:
        peak = max(peak, x)
        if peak > 0:
            best = max(best, (peak - x) / peak)
    return best


def knee_length(lengths, values, tau=FLATNESS_TAU) -> Optional[int]:
    """Smallest L after which every successive relative drop stays below tau/2.

    None when the curve has not flattened within the sampled lengths.
    """
    v = np.asarray(values, dtype=float)
    steps = (v[:-1] - v[1:]) / v[:-1]
    for k in range(len(steps)):
        if np.all(steps[k:] < tau / 2):
            return int(lengths[k])
    return None


@dataclass
class ExtensivityReport:
    sequence_id: str
    original: WindowSpectrum
    shuffled: WindowSpectrum
    ratio_curve: list            # (L, original / shuffled)
    flatness: float              # max relative drop of the ratio curve
    raw_flatness: float          # same statistic on the original spectrum
    extensive: bool
    knee: Optional[int]
    tau: float = FLATNESS_TAU

    def rows(self):
        shuf = {e.L: e.mean_ratio for e in self.shuffled.entries}
        for e in self.original.entries:
            yield (self.sequence_id, e.L, e.mean_ratio, e.stdev, e.n_windows, shuf.get(e.L, float("nan")))


def extensivity_report(seq: NucleotideSequence, window_lengths=DEFAULT_WINDOWS, seed=0,
                       tau=FLATNESS_TAU) -> ExtensivityReport:
    original = window_spectrum(seq, window_lengths)
    shuffled = window_spectrum(shuffle_baseline(seq, seed), window_lengths)
    L = original.lengths
    ratio = original.means / shuffled.means
    flat = max_relative_drop(ratio)
    extensive = flat < tau
    knee = None if extensive or len(L) < 2 else knee_length(L, ratio, tau)
    return ExtensivityReport(seq.id, original, shuffled, list(zip(L.tolist(), ratio.tolist())),
                             float(flat), float(max_relative_drop(original.means)),
                             bool(extensive), knee, tau)


CSV_COLUMNS = ["sequence_id", "L", "mean_bits_per_symbol", "stdev", "n_windows", "shuffled_mean"]


def write_reports_csv(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rep in reports:
            for sid, L, mean, sd, nw, shuf in rep.rows():
                w.writerow([sid, L, repr(mean), repr(sd), nw, repr(shuf)])
