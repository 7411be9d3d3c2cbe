"""Moment verification and sampler timing tables for the a-remainder."""

from __future__ import annotations

import time

import numpy as np

from . import rng as rngmod
from .errors import ValidationError
from .remainder import RemainderSpec, remainder_moments, sample_mixture_jump, sample_remainder_ar, sample_remainders

MOMENT_COLUMNS = ["a", "n", "theoretical", "mc"]
BENCH_COLUMNS = ["sampler", "n_sim", "seconds_total", "seconds_per_draw", "acceptance_rate"]
DEFAULT_SIZES = (10**3, 10**4, 10**5, 10**6)


def remainder_draws(spec: RemainderSpec, n_sim: int, seed: int, key: int = 0, workers: int = 1) -> np.ndarray:
    """``n_sim`` Z_a draws, block-seeded so the result ignores ``workers``."""
    parts = rngmod.map_blocks(
        lambda b, s, e: sample_remainders(spec, rngmod.substream(seed, rngmod.SAMPLER, key, b), e - s),
        n_sim, workers,
    )
    return np.concatenate(parts)


def moment_table(delta: float, gamma: float, a_list, n_sim: int, seed: int, n_max: int = 5, workers: int = 1):
    """Rows (a, n, theoretical, mc) for raw moments n = 1..n_max of Z_a."""
    if n_sim < 1:
        raise ValidationError("n_sim must be >= 1", ["n_sim >= 1"])
    rows = []
    for i, a in enumerate(a_list):
        spec = RemainderSpec.from_B(delta, gamma, a)
        z = remainder_draws(spec, n_sim, seed, key=i, workers=workers)
        for n in range(1, n_max + 1):
            rows.append(dict(a=float(a), n=n, theoretical=remainder_moments(spec, n), mc=float(np.mean(z**n))))
    return rows


def _time(fn, reps):
    t0 = time.perf_counter()
    out = None
    for _ in range(reps):
        out = fn()
    return time.perf_counter() - t0, out


def benchmark_table(sizes=DEFAULT_SIZES, reps: int = 100, delta: float = 5.0, gamma: float = 1.5,
                    a: float = 0.5, seed: int = 0):
    """Mean wall time of the two jump samplers per size, plus an AR/mixture ratio row.

    Both samplers draw ``n_sim`` jumps of the a-remainder; that is where the
    two schemes differ (the IG head and Poisson count are shared).
    """
    if reps < 1 or any(n < 1 for n in sizes):
        raise ValidationError("sizes and reps must be >= 1", ["sizes >= 1", "reps >= 1"])
    spec = RemainderSpec.from_B(delta, gamma, a)
    rows, ratios = [], []
    for i, n in enumerate(sizes):
        g_mix = rngmod.substream(seed, rngmod.SAMPLER, 100, i, 0)
        g_ar = rngmod.substream(seed, rngmod.SAMPLER, 100, i, 1)
        t_mix, _ = _time(lambda: sample_mixture_jump(spec, g_mix, n), reps)
        t_ar, ar = _time(lambda: sample_remainder_ar(spec, g_ar, n), reps)
        rows.append(dict(sampler="mixture", n_sim=n, seconds_total=t_mix / reps,
                         seconds_per_draw=t_mix / reps / n, acceptance_rate=None))
        rows.append(dict(sampler="ar", n_sim=n, seconds_total=t_ar / reps,
                         seconds_per_draw=t_ar / reps / n, acceptance_rate=ar.acceptance_rate))
        ratios.append(dict(sampler="ratio_ar_over_mixture", n_sim=n, seconds_total=t_ar / t_mix,
                           seconds_per_draw=None, acceptance_rate=None))
    return rows + ratios
