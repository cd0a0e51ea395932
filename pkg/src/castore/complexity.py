"""Information curves I_Z(s^n), finite-n complexity estimates and scaling fits."""

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .compressor import _kernels as K
from .compressor.stream import SymbolStream

# |relative change of the ratio per decade| below this counts as flat
TREND_TOLERANCE = 0.10


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class InformationCurve:
    n: np.ndarray
    bits: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        n = np.asarray(self.n, dtype=np.int64)
        bits = np.asarray(self.bits, dtype=float)
        if n.shape != bits.shape or n.ndim != 1:
            raise ValueError("n and bits must be 1-d arrays of equal length")
        if n.size > 1 and np.any(np.diff(n) <= 0):
            raise ValueError("sample points must be strictly increasing")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return int(self.n.size)

    @property
    def bits_per_symbol(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.n > 0, self.bits / np.maximum(self.n, 1), np.nan)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "bits", "bits_per_symbol", "pi_ratio"])
            for n, b, r in zip(self.n.tolist(), self.bits.tolist(), self.bits_per_symbol.tolist()):
                pi = repr(b / pi_baseline(n)) if n >= 4 else ""
                w.writerow([n, int(b) if float(b).is_integer() else repr(b), repr(r), pi])


@dataclass(frozen=True)
class ScalingFit:
    model: str                 # "power_law" | "linear" | "pi_relative"
    exponent_or_rate: float
    prefactor: float
    residual: float            # RMS of log2 residuals
    fit_range: tuple

    def to_json(self):
        d = asdict(self)
        d["fit_range"] = list(d["fit_range"])
        return json.dumps(d, indent=2)


@dataclass(frozen=True)
class ComplexityEstimate:
    bits_per_symbol: float
    trend: str                 # "increasing" | "flat" | "decreasing"
    relative_slope: float


def geometric_points(n_max, per_decade=10, n_min=16):
    """Sorted unique integer sample points, log-spaced up to and including n_max."""
    if n_max < 1:
        return np.zeros(0, dtype=np.int64)
    n_min = min(n_min, n_max)
    decades = max(math.log10(n_max / n_min), 0.0)
    k = max(int(round(decades * per_decade)) + 1, 2)
    pts = np.unique(np.round(np.geomspace(n_min, n_max, k)).astype(np.int64))
    return pts


def information_curve(s: SymbolStream, sample_points=None, source_id="") -> InformationCurve:
    """Container size of every requested prefix, from one checkpointed pass.

    The value at n equals ``compress(s[:n]).bit_length`` exactly.
    """
    if sample_points is None:
        sample_points = geometric_points(len(s))
    pts = np.asarray(sample_points, dtype=np.int64)
    if pts.size and (np.any(np.diff(pts) <= 0)):
        raise ValueError("sample points must be sorted and distinct")
    if pts.size and (pts[0] < 0 or pts[-1] > len(s)):
        raise ValueError(f"sample points must lie in [0, {len(s)}]")
    a = s.alphabet_size
    costs = K.castore_cost_curve(s.symbols, a, pts)
    header = np.array([K.varint_bits(a) + K.varint_bits(int(n)) for n in pts], dtype=np.int64)
    return InformationCurve(pts, (costs + header).astype(float), source_id)


def relative_slope(n, y):
    """Least-squares d ln(y) / d log10(n): relative change per decade."""
    n = np.asarray(n, dtype=float)
    y = np.asarray(y, dtype=float)
    if n.size < 2:
        raise ValueError("need at least two points")
    return float(np.polyfit(np.log10(n), np.log(y), 1)[0])


def _last_decade(n):
    mask = n >= n[-1] / 10.0
    if mask.sum() < 2:
        mask[-2:] = True
    return mask


def complexity_estimate(curve: InformationCurve) -> ComplexityEstimate:
    """Ratio bits/n at the largest sample, with a trend over the last decade."""
    if len(curve) == 0:
        raise ValueError("empty curve")
    n, bits = curve.n, curve.bits
    if n[-1] <= 0:
        raise ValueError("curve has no positive sample point")
    ratio = bits[-1] / n[-1]
    keep = n > 0
    n, bits = n[keep], bits[keep]
    if n.size < 2:
        return ComplexityEstimate(float(ratio), "flat", 0.0)
    m = _last_decade(n)
    slope = relative_slope(n[m], bits[m] / n[m])
    if slope > TREND_TOLERANCE:
        trend = "increasing"
    elif slope < -TREND_TOLERANCE:
        trend = "decreasing"
    else:
        trend = "flat"
    return ComplexityEstimate(float(ratio), trend, slope)


def _select(curve, fit_range, min_samples=8, min_decades=2.0):
    n, bits = curve.n.astype(float), curve.bits
    if fit_range is None:
        if len(curve) == 0:
            raise FitError("empty curve")
        # widen down to the nearest sample so the window really spans min_decades
        below = n[n <= n[-1] / 10 ** min_decades * (1 + 1e-12)]
        fit_range = (below[-1] if below.size else n[0], n[-1])
    lo, hi = fit_range
    m = (n >= lo * (1 - 1e-12)) & (n <= hi * (1 + 1e-12)) & (n > 0) & (bits > 0)
    if m.sum() < min_samples:
        raise FitError(f"need >= {min_samples} samples in fit range {fit_range}, got {int(m.sum())}")
    span = math.log10(n[m][-1] / n[m][0])
    if span < min_decades - 1e-9:
        raise FitError(f"fit range spans {span:.2f} decades, need >= {min_decades}")
    return n[m], bits[m], (int(n[m][0]), int(n[m][-1]))


def fit_power_law(curve: InformationCurve, fit_range=None) -> ScalingFit:
    """Slope of log2(bits) against log2(n); default window is the top two decades."""
    n, bits, rng = _select(curve, fit_range)
    x, y = np.log2(n), np.log2(bits)
    p, c = np.polyfit(x, y, 1)
    resid = y - (p * x + c)
    return ScalingFit("power_law", float(p), float(2.0 ** c),
                      float(np.sqrt(np.mean(resid ** 2))), rng)


def _fit_affine(model, basis, n, bits, rng):
    slope, intercept = np.polyfit(basis, bits, 1)
    pred = slope * basis + intercept
    with np.errstate(divide="ignore", invalid="ignore"):
        resid = np.log2(bits) - np.log2(np.maximum(pred, 1e-300))
    return ScalingFit(model, float(slope), float(intercept),
                      float(np.sqrt(np.mean(resid ** 2))), rng)


def fit_linear(curve: InformationCurve, fit_range=None) -> ScalingFit:
    """bits ~ h n + c; h estimates the entropy rate."""
    n, bits, rng = _select(curve, fit_range)
    return _fit_affine("linear", n, n, bits, rng)


def fit_pi_relative(curve: InformationCurve, fit_range=None) -> ScalingFit:
    """bits ~ S Pi(n) + c, the mild-chaos growth model."""
    n, bits, rng = _select(curve, fit_range)
    if n[0] < 4:
        raise FitError("pi-relative fit needs n >= 4")
    basis = np.array([pi_baseline(int(v)) for v in n])
    return _fit_affine("pi_relative", basis, n, bits, rng)


def pi_baseline(n: int) -> float:
    """log2(n) * log2(log2(n)); defined for n >= 4."""
    if n < 4:
        raise ValueError(f"pi_baseline needs n >= 4, got {n}")
    ln = math.log2(n)
    return ln * math.log2(ln)


def s_ratio_curve(curve: InformationCurve):
    """Pointwise bits / Pi(n)."""
    if len(curve) and curve.n.min() < 4:
        raise ValueError("every sample point must be >= 4")
    return [(int(n), float(b) / pi_baseline(int(n))) for n, b in zip(curve.n, curve.bits)]


def s_ratio_trend(curve: InformationCurve) -> float:
    """Relative change per decade of S(n) over the last sampled decade."""
    pts = s_ratio_curve(curve)
    n = np.array([p[0] for p in pts], dtype=float)
    s = np.array([p[1] for p in pts])
    m = _last_decade(n)
    return relative_slope(n[m], s[m])
