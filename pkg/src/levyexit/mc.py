"""Monte Carlo oracle: direct Euler simulation of exit times and exit sides.

Paths follow X_{k+1} = X_k + f(X_k) dt + sqrt(a dt) G_k + (eps dt)^(1/alpha) S_k
with independent Gaussian and stable increments; exit is detected on the
post-step landing position (X <= c leaves left, X >= d right, however far the
jump overshoots).

Reproducibility contract: path i draws from three private substreams (angle,
exponential, Gaussian), each a PCG64 generator seeded with output number
3*i + s + 1 (s = 0, 1, 2) of the splitmix64 sequence started at base_seed.
Every trajectory is therefore a pure function of (base_seed, path index),
regardless of batching, block size, or worker count.  Aggregation reads the
per-path results in index order, so estimates are bitwise reproducible.

The number of worker threads honors the LEVYEXIT_WORKERS environment
variable (default 1); workers only partition the path index range.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .levy import ALPHA_ONE_GUARD, NoiseParams, sample_standard_stable
from .model import drift_function
from .solver import EscapeTarget

__all__ = [
    "SimConfig",
    "McEstimate",
    "PathOutcome",
    "simulate_exit",
    "mc_mean_exit_time",
    "mc_escape_probability",
    "empirical_cf_check",
    "stable_increment_scale",
    "stream_seed",
]

DEFAULT_MAX_TIME = 1e4
_BLOCK = 512  # increments drawn per refill; results do not depend on it
_BATCH = 8192  # paths simulated per vectorized batch
_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

WORKERS_ENV = "LEVYEXIT_WORKERS"


def stable_increment_scale(epsilon: float, alpha: float, dt: float) -> float:
    """Scale multiplying a standard stable draw over one step: (eps dt)^(1/alpha).
    Self-similarity makes this exact in distribution, no small-jump truncation."""
    return (epsilon * dt) ** (1.0 / alpha)


def stream_seed(base_seed: int, path_index: int, stream: int) -> int:
    """Output number 3*path_index + stream + 1 of splitmix64 run from base_seed."""
    k = 3 * path_index + stream + 1
    z = (base_seed + k * _GOLDEN) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


@dataclass(frozen=True)
class SimConfig:
    """Path count, step, horizon, and seed for one simulation campaign.

    max_time = None defers to the caller's horizon choice (the CLI uses
    100x the solver estimate); plain library calls fall back to 1e4.
    """

    dt: float
    n_paths: int
    base_seed: int = 0
    max_time: float | None = None

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.max_time is not None and self.max_time < 100 * self.dt:
            raise ValueError(
                f"max_time={self.max_time} shorter than 100 steps of dt={self.dt}"
            )

    def horizon(self) -> float:
        return DEFAULT_MAX_TIME if self.max_time is None else self.max_time


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_paths: int
    n_censored: int
    stderr_defined: bool = True

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.n_paths

    @property
    def unreliable(self) -> bool:
        return self.censored_fraction > 0.01


class PathOutcome(NamedTuple):
    exit_time: float | None  # None when censored
    side: str | None  # "left" | "right" | None


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _run_batch(drift_fn, noise: NoiseParams, c, d, x0, dt, max_steps, base_seed,
               first_index, count, steps_out, sides_out):
    """Simulate paths first_index .. first_index+count-1, writing exit step
    numbers and sides (-1 left, +1 right, 0 censored) into the output slices."""
    from numpy.random import PCG64, Generator

    a, eps, alpha = noise.a, noise.epsilon, noise.alpha
    use_w = eps > 0 and abs(alpha - 1.0) >= ALPHA_ONE_GUARD
    use_g = a > 0
    cs = stable_increment_scale(eps, alpha, dt) if eps > 0 else 0.0
    cg = math.sqrt(a * dt)

    def gen(i, stream):
        return Generator(PCG64(stream_seed(base_seed, first_index + i, stream)))

    gv = [gen(i, 0) for i in range(count)] if eps > 0 else None
    gw = [gen(i, 1) for i in range(count)] if use_w else None
    gg = [gen(i, 2) for i in range(count)] if use_g else None

    x = np.full(count, float(x0))
    ids = np.arange(count)  # batch-local path ids of the still-alive
    step = 0
    while ids.size and step < max_steps:
        block = min(_BLOCK, max_steps - step)
        nal = ids.size
        s_block = g_block = None
        if eps > 0:
            v = np.empty((nal, block))
            for row, pid in enumerate(ids):
                v[row] = gv[pid].uniform(-math.pi / 2, math.pi / 2, block)
            if use_w:
                w = np.empty((nal, block))
                for row, pid in enumerate(ids):
                    w[row] = gw[pid].standard_exponential(block)
            else:
                w = 1.0  # unused by the alpha = 1 branch
            s_block = np.ascontiguousarray(sample_standard_stable(alpha, v, w).T)
        if use_g:
            gmat = np.empty((nal, block))
            for row, pid in enumerate(ids):
                gmat[row] = gg[pid].standard_normal(block)
            g_block = np.ascontiguousarray(gmat.T)
        cols = np.arange(nal)
        for k in range(block):
            step += 1
            xn = x + drift_fn(x) * dt
            if s_block is not None:
                xn += cs * s_block[k].take(cols)
            if g_block is not None:
                xn += cg * g_block[k].take(cols)
            left = xn <= c
            done = left | (xn >= d)
            if done.any():
                hit = ids[done]
                steps_out[hit] = step
                sides_out[hit] = np.where(left[done], -1, 1)
                keep = ~done
                x = xn[keep]
                ids = ids[keep]
                cols = cols[keep]
                if ids.size == 0:
                    break
            else:
                x = xn
    # paths still alive at the horizon stay (0, 0): censored


def _simulate_paths(x0, m, n: NoiseParams, bounds, cfg: SimConfig):
    """All-paths driver; returns (exit_steps, sides) indexed by path."""
    c, d = bounds
    if not c < x0 < d:
        raise ValueError(f"x0={x0} outside the open interval ({c}, {d})")
    drift_fn = drift_function(m)
    max_steps = int(math.floor(cfg.horizon() / cfg.dt + 1e-9))
    steps = np.zeros(cfg.n_paths, dtype=np.int64)
    sides = np.zeros(cfg.n_paths, dtype=np.int8)

    def run_range(lo, hi):
        for start in range(lo, hi, _BATCH):
            cnt = min(_BATCH, hi - start)
            _run_batch(drift_fn, n, c, d, x0, cfg.dt, max_steps, cfg.base_seed,
                       start, cnt, steps[start:start + cnt], sides[start:start + cnt])

    workers = _worker_count()
    if workers == 1:
        run_range(0, cfg.n_paths)
    else:
        chunk = -(-cfg.n_paths // workers)
        spans = [(lo, min(lo + chunk, cfg.n_paths)) for lo in range(0, cfg.n_paths, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda span: run_range(*span), spans))
    return steps, sides


def simulate_exit(x0, m, n: NoiseParams, g_bounds, cfg: SimConfig,
                  path_index: int) -> PathOutcome:
    """Outcome of the single path path_index under cfg.base_seed."""
    one = SimConfig(dt=cfg.dt, n_paths=1, base_seed=cfg.base_seed, max_time=cfg.max_time)
    c, d = g_bounds
    if not c < x0 < d:
        raise ValueError(f"x0={x0} outside the open interval ({c}, {d})")
    drift_fn = drift_function(m)
    max_steps = int(math.floor(one.horizon() / one.dt + 1e-9))
    steps = np.zeros(1, dtype=np.int64)
    sides = np.zeros(1, dtype=np.int8)
    _run_batch(drift_fn, n, c, d, x0, one.dt, max_steps, one.base_seed,
               path_index, 1, steps, sides)
    if sides[0] == 0:
        return PathOutcome(None, None)
    return PathOutcome(float(steps[0]) * one.dt, "left" if sides[0] < 0 else "right")


def mc_mean_exit_time(x0, m, n: NoiseParams, bounds, cfg: SimConfig) -> McEstimate:
    """Sample mean exit time over non-censored paths."""
    steps, sides = _simulate_paths(x0, m, n, bounds, cfg)
    exited = sides != 0
    n_censored = int(cfg.n_paths - exited.sum())
    times = steps[exited] * cfg.dt
    if times.size == 0:
        return McEstimate(math.nan, 0.0, cfg.n_paths, n_censored, stderr_defined=False)
    mean = float(np.mean(times))
    if times.size < 2:
        return McEstimate(mean, 0.0, cfg.n_paths, n_censored, stderr_defined=False)
    stderr = float(np.std(times, ddof=1) / math.sqrt(times.size))
    return McEstimate(mean, stderr, cfg.n_paths, n_censored)


def mc_escape_probability(x0, m, n: NoiseParams, bounds, cfg: SimConfig,
                          target: EscapeTarget) -> McEstimate:
    """Fraction of non-censored paths landing in the target exterior set."""
    steps, sides = _simulate_paths(x0, m, n, bounds, cfg)
    exited = sides != 0
    n_censored = int(cfg.n_paths - exited.sum())
    m_used = int(exited.sum())
    if m_used == 0:
        return McEstimate(math.nan, 0.0, cfg.n_paths, n_censored, stderr_defined=False)
    want = -1 if target is EscapeTarget.LEFT_EXTINCTION else 1
    p_hat = float(np.mean(sides[exited] == want))
    if m_used < 2:
        return McEstimate(p_hat, 0.0, cfg.n_paths, n_censored, stderr_defined=False)
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / m_used)
    return McEstimate(p_hat, stderr, cfg.n_paths, n_censored)


def empirical_cf_check(alpha: float, n_samples: int, lambdas, base_seed: int = 0) -> float:
    """Max over lambdas of |mean cos(lam S) - exp(-|lam|^alpha)| for n_samples draws."""
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie strictly in (0, 2), got {alpha}")
    if n_samples < 10**4:
        raise ValueError(f"need at least 1e4 samples for a meaningful check, got {n_samples}")
    from numpy.random import PCG64, Generator

    rng = Generator(PCG64(base_seed))
    v = rng.uniform(-math.pi / 2, math.pi / 2, n_samples)
    w = rng.standard_exponential(n_samples)
    s = sample_standard_stable(alpha, v, w)
    worst = 0.0
    for lam in lambdas:
        dev = abs(float(np.mean(np.cos(lam * s))) - math.exp(-abs(lam) ** alpha))
        worst = max(worst, dev)
    return worst
