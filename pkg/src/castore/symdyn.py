"""Orbits of the Manneville and logistic maps and their symbolic coding.

Manneville map f(x) = x + x**z (mod 1). Its partition is built from the
preimage chain x_0 > x_1 > ... of the point that f sends to 1; cell A_0 is
(x_0, 1] and A_k = (x_k, x_{k-1}]. Cells deeper than ``k_max - 1`` are merged
into the catch-all symbol ``k_max``.

The logistic map uses the binary partition {[0, 1/2], (1/2, 1]} split at
its critical point.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np
from numba import njit
from scipy.optimize import bisect

from .complexity import (
    FitError,
    complexity_estimate,
    fit_power_law,
    geometric_points,
    information_curve,
    s_ratio_curve,
    s_ratio_trend,
)
from .compressor.stream import SymbolStream

log = logging.getLogger(__name__)

LAMBDA_INF = 3.56994567187
DEFAULT_K_MAX = 64
DEFAULT_BURN_IN = 10_000
ESCAPE_TOLERANCE = 1e-12
WORKERS_ENV = "CASTORE_WORKERS"


class NumericError(RuntimeError):
    pass


@dataclass(frozen=True)
class MannevillePartition:
    z: float
    boundaries: np.ndarray   # x_0 > x_1 > ... > x_{k_max}
    k_max: int

    @property
    def alphabet_size(self):
        return self.k_max + 1

    def ascending(self):
        """x_{k_max-1} < ... < x_0, the cut points actually used for coding."""
        return self.boundaries[:self.k_max][::-1].copy()

    def cell_of(self, x):
        """Symbol of a single point, straight from the cell definitions."""
        for k in range(self.k_max):
            if x > self.boundaries[k]:
                return k
        return self.k_max


def manneville_map(x, z):
    y = x + x ** z
    return y - 1.0 if y >= 1.0 else y


def manneville_partition(z: float, k_max: int = DEFAULT_K_MAX, xtol: float = 1e-15) -> MannevillePartition:
    if z <= 1:
        raise ValueError(f"z must exceed 1, got {z}")
    if k_max < 2:
        raise ValueError(f"k_max must be >= 2, got {k_max}")
    xs = np.empty(k_max + 1)
    target, hi = 1.0, 1.0
    for k in range(k_max + 1):
        g = lambda x, t=target: x + x ** z - t
        root, info = bisect(g, 0.0, hi, xtol=xtol, maxiter=200, full_output=True, disp=False)
        if not info.converged or abs(g(root)) > 1e-14:
            raise NumericError(
                f"bisection for x_{k} (z={z}, target={target!r}) failed: "
                f"converged={info.converged}, iterations={info.iterations}, "
                f"residual={g(root):.3e}"
            )
        xs[k] = root
        target = hi = root
    return MannevillePartition(float(z), xs, int(k_max))


@dataclass(frozen=True)
class OrbitConfig:
    map: str                          # "manneville" | "logistic"
    parameter: float                  # z or lambda
    orbit_length: int
    seed: int = 0
    initial_condition: Optional[float] = None
    sampling: str = "uniform"         # "uniform" | "invariant_burn_in"
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.orbit_length < 1:
            raise ValueError("orbit_length must be >= 1")
        if self.map == "manneville":
            if self.parameter <= 1:
                raise ValueError("Manneville z must exceed 1")
        elif self.map == "logistic":
            if not 1.0 <= self.parameter <= 4.0:
                raise ValueError("logistic lambda must lie in [1, 4]")
        else:
            raise ValueError(f"unknown map {self.map!r}")
        if self.sampling not in ("uniform", "invariant_burn_in"):
            raise ValueError(f"unknown sampling rule {self.sampling!r}")
        if self.initial_condition is not None and not 0.0 <= self.initial_condition <= 1.0:
            raise ValueError("initial condition must lie in [0, 1]")


@njit(cache=True)
def _manneville_orbit(x, z, n, cuts, k_max, out):
    for i in range(n):
        out[i] = k_max - np.searchsorted(cuts, x)
        y = x + x ** z
        x = y - 1.0 if y >= 1.0 else y
    return x


@njit(cache=True)
def _logistic_orbit(x, lam, n, out):
    # returns the index of the first iterate outside [0, 1] (tolerance), or -1
    for i in range(n):
        if x < -ESCAPE_TOLERANCE or x > 1.0 + ESCAPE_TOLERANCE:
            return i
        out[i] = 1 if x > 0.5 else 0
        x = lam * x * (1.0 - x)
    return -1


@njit(cache=True)
def _iterate(x, kind, p, steps):
    for _ in range(steps):
        if kind == 0:
            y = x + x ** p
            x = y - 1.0 if y >= 1.0 else y
        else:
            x = p * x * (1.0 - x)
    return x


def initial_point(cfg: OrbitConfig) -> float:
    if cfg.initial_condition is not None:
        x = float(cfg.initial_condition)
    else:
        x = float(np.random.default_rng(cfg.seed).uniform())
    if cfg.sampling == "invariant_burn_in":
        x = float(_iterate(x, 0 if cfg.map == "manneville" else 1, cfg.parameter, cfg.burn_in))
    return x


def symbolic_orbit(cfg: OrbitConfig, partition: Optional[MannevillePartition] = None) -> SymbolStream:
    """Cell indices visited by the orbit, starting with the initial point itself."""
    x = initial_point(cfg)
    out = np.empty(cfg.orbit_length, dtype=np.int64)
    if cfg.map == "manneville":
        if partition is None:
            partition = manneville_partition(cfg.parameter)
        if partition.z != cfg.parameter:
            raise ValueError(f"partition built for z={partition.z}, orbit uses z={cfg.parameter}")
        _manneville_orbit(x, float(cfg.parameter), cfg.orbit_length, partition.ascending(),
                          partition.k_max, out)
        return SymbolStream(partition.alphabet_size, out)
    bad = _logistic_orbit(x, float(cfg.parameter), cfg.orbit_length, out)
    if bad >= 0:
        raise NumericError(f"logistic orbit left [0, 1] at step {bad} (lambda={cfg.parameter})")
    return SymbolStream(2, out)


def derive_seeds(master_seed: int, count: int):
    """Per-job seeds from a master seed; independent of execution order."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def worker_count(default=1):
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, default)))
    except ValueError:
        return default


def _map_jobs(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# ------------------------------------------------------------- Manneville


@dataclass
class OrbitFit:
    orbit_id: int
    initial_condition: float
    exponent: float
    residual: float
    fit_range: tuple = ()
    error: str = ""


@dataclass
class MannevilleResult:
    z: float
    sampling: str
    orbit_length: int
    k_max: int
    orbits: list = field(default_factory=list)

    @property
    def theoretical_exponent(self):
        return theoretical_exponent(self.z)

    @property
    def exponents(self):
        return np.array([o.exponent for o in self.orbits if not o.error])

    @property
    def mean_exponent(self):
        e = self.exponents
        return float(e.mean()) if e.size else float("nan")


def theoretical_exponent(z):
    """Growth exponent of the mean information: 1/(z-1) for z >= 2, else 1."""
    return 1.0 / (z - 1.0) if z >= 2 else 1.0


def _manneville_job(job):
    orbit_id, z, length, seed, sampling, burn_in, k_max, points, fit_range = job
    cfg = OrbitConfig("manneville", z, length, seed=seed, sampling=sampling, burn_in=burn_in)
    x0 = initial_point(cfg)
    try:
        part = manneville_partition(z, k_max)
        stream = symbolic_orbit(cfg, part)
        curve = information_curve(stream, points, source_id=f"manneville z={z} orbit={orbit_id}")
        fit = fit_power_law(curve, fit_range)
    except (NumericError, FitError) as exc:
        return OrbitFit(orbit_id, x0, float("nan"), float("nan"), (), str(exc))
    return OrbitFit(orbit_id, x0, fit.exponent_or_rate, fit.residual, fit.fit_range)


def manneville_experiment(z, n_orbits=20, orbit_length=10 ** 6, sampling="uniform", seed=0,
                          k_max=DEFAULT_K_MAX, sample_points=None, fit_range=None,
                          burn_in=DEFAULT_BURN_IN, workers=None) -> MannevilleResult:
    """Fit the information growth exponent on many orbits of one map."""
    if sample_points is None:
        sample_points = geometric_points(orbit_length)
    points = np.asarray(sample_points, dtype=np.int64)
    seeds = derive_seeds(seed, n_orbits)
    jobs = [(i, float(z), int(orbit_length), s, sampling, int(burn_in), int(k_max), points, fit_range)
            for i, s in enumerate(seeds)]
    fits = _map_jobs(_manneville_job, jobs, workers or worker_count())
    for f in fits:
        if f.error:
            log.warning("orbit %d failed: %s", f.orbit_id, f.error)
    return MannevilleResult(float(z), sampling, int(orbit_length), int(k_max), fits)


# --------------------------------------------------------------- logistic


def load_feigenbaum_config(path=None):
    """Parameter ladders from a key = value file (bundled defaults if None)."""
    if path is None:
        text = resources.files("castore.data").joinpath("feigenbaum.cfg").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    cfg = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return {
        "lambda_inf": float(cfg.get("lambda_inf", LAMBDA_INF)),
        "below": [float(v) for v in cfg.get("below", "").split(",") if v.strip()],
        "above": [float(v) for v in cfg.get("above", "").split(",") if v.strip()],
    }


@dataclass
class LogisticRun:
    lam: float
    curve: object
    s_ratio: list
    s_trend: float
    estimate: object
    exponent: float
    error: str = ""


def _logistic_job(job):
    lam, length, seed, points, burn_in = job
    cfg = OrbitConfig("logistic", lam, length, seed=seed,
                      sampling="invariant_burn_in" if burn_in else "uniform", burn_in=burn_in)
    try:
        stream = symbolic_orbit(cfg)
    except NumericError as exc:
        return LogisticRun(lam, None, [], float("nan"), None, float("nan"), str(exc))
    curve = information_curve(stream, points, source_id=f"logistic lambda={lam!r}")
    try:
        exponent = fit_power_law(curve).exponent_or_rate
    except FitError:
        exponent = float("nan")
    return LogisticRun(lam, curve, s_ratio_curve(curve), s_ratio_trend(curve),
                       complexity_estimate(curve), exponent)


def logistic_experiment(lambdas=None, orbit_length=10 ** 6, seed=0, sample_points=None,
                        burn_in=1000, workers=None):
    """S(n) = I_Z / Pi(n) curves for each parameter value.

    With ``lambdas=None`` the bundled cascade ladders plus the threshold are used.
    """
    if lambdas is None:
        ladder = load_feigenbaum_config()
        lambdas = ladder["below"] + [ladder["lambda_inf"]] + ladder["above"]
    if sample_points is None:
        sample_points = geometric_points(orbit_length)
    points = np.asarray(sample_points, dtype=np.int64)
    if points.size and points[0] < 4:
        raise ValueError("S(n) needs sample points >= 4")
    seeds = derive_seeds(seed, len(lambdas))
    jobs = [(float(l), int(orbit_length), s, points, int(burn_in)) for l, s in zip(lambdas, seeds)]
    return _map_jobs(_logistic_job, jobs, workers or worker_count())
