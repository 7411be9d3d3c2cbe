"""Joint path simulation of the SSD, LSSD and BBSD models on a time grid.

Each grid step draws the subordinator increments (IG for ``I_j``, ``G_j``,
``H_1``; exact a-remainder for ``Z_a``), forms ``dH_2 = a dH_1 + dZ_a`` and
then the Brownian parts in conditional-normal form.  Brownian motions that are
read on both ``H_1`` and ``a H_1`` are split into a normal on ``a dH_1`` and an
independent one on ``(1 - a) dH_1``.  Increments are independent across steps,
so the joint law of ``(Y_1(t_k), Y_2(t_k))`` matches the closed-form chf at
every grid time.

Paths are produced in blocks of :data:`sdnig.rng.BLOCK_SIZE`; every block and
every random component has its own substream of the master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .errors import ValidationError
from .ig import ig_from_B, sample_ig_T
from .models import BbsdParams, LssdParams, SsdParams
from .remainder import RemainderSpec, sample_remainders

MODEL_CODES = {"SSD": 0, "LSSD": 1, "BBSD": 2}


@dataclass
class PathBatch:
    times: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    seed: int
    model_tag: str
    clocks: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.y1.shape[0]

    def terminal(self):
        return self.y1[:, -1], self.y2[:, -1]


def check_grid(grid) -> np.ndarray:
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValidationError("time grid needs at least two points", ["grid size"])
    if t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValidationError("time grid must start at 0 and be strictly increasing", ["grid order"])
    return t


def _remainder_steps(scale_per_time, shape, a, dts, stream, nb):
    """(nb, n_steps) Z_a increments; base IG_B(scale * dt, shape) per step."""
    out = np.zeros((nb, dts.size))
    if a == 1.0:
        return out
    for k, dt in enumerate(dts):
        spec = RemainderSpec(ig_from_B(scale_per_time * dt, shape), a)
        out[:, k] = sample_remainders(spec, stream, nb)
    return out


def _cum(x):
    out = np.zeros((x.shape[0], x.shape[1] + 1))
    np.cumsum(x, axis=1, out=out[:, 1:])
    return out


def _streams(seed, tag, block):
    code = MODEL_CODES[tag]
    return {name: rngmod.substream(seed, rngmod.SIMULATE, code, block, c) for name, c in rngmod.COMPONENTS.items()}


def _ssd_block(p, dts, seed, block, nb, lssd: bool, keep_clocks: bool):
    s = _streams(seed, "LSSD" if lssd else "SSD", block)
    size = (nb, dts.size)
    I = [
        sample_ig_T(p.I_law(j, 1.0)[0] * dts, (p.idio_scale(j) * dts) ** 2, s[f"I{j}"], size)
        for j in (1, 2)
    ]
    dH1 = sample_ig_T(p.A * dts / p.B, (p.A * dts) ** 2, s["H1"], size)
    dZ = _remainder_steps(p.A, p.B, p.a, dts, s["Z"], nb)
    dH2 = p.a * dH1 + dZ
    if not lssd:
        dG1 = I[0] + p.alpha1 * dH1
        dG2 = I[1] + p.alpha2 * dH2
        y1 = p.mu1 * dG1 + p.sigma1 * np.sqrt(dG1) * s["W1"].standard_normal(size)
        y2 = p.mu2 * dG2 + p.sigma2 * np.sqrt(dG2) * s["W2"].standard_normal(size)
    else:
        idio1 = p.mu1 * I[0] + p.sigma1 * np.sqrt(I[0]) * s["W1"].standard_normal(size)
        idio2 = p.mu2 * I[1] + p.sigma2 * np.sqrt(I[1]) * s["W2"].standard_normal(size)
        c1 = s["WC"].standard_normal(size)
        c2 = s["WC"].standard_normal(size)
        c3 = s["WC"].standard_normal(size)
        shared = np.sqrt(p.a * dH1)
        w1 = shared * c1 + np.sqrt((1.0 - p.a) * dH1) * c3
        w2 = shared * (p.rho * c1 + math.sqrt(1.0 - p.rho**2) * c2)
        wt = np.sqrt(dZ) * s["WT"].standard_normal(size)
        y1 = idio1 + p.alpha1 * p.mu1 * dH1 + math.sqrt(p.alpha1) * p.sigma1 * w1
        y2 = idio2 + p.alpha2 * p.mu2 * dH2 + math.sqrt(p.alpha2) * p.sigma2 * (w2 + wt)
        dG1 = I[0] + p.alpha1 * dH1
        dG2 = I[1] + p.alpha2 * dH2
    clocks = {}
    if keep_clocks:
        clocks = {"H1": _cum(dH1), "H2": _cum(dH2), "Z": _cum(dZ), "G1": _cum(dG1), "G2": _cum(dG2)}
    return _cum(y1), _cum(y2), clocks


def _bbsd_block(p: BbsdParams, dts, seed, block, nb, keep_clocks: bool):
    s = _streams(seed, "BBSD", block)
    size = (nb, dts.size)
    G = [sample_ig_T(dts, dts**2 / p.nu(j), s[f"G{j}"], size) for j in (1, 2)]
    X = [p.beta(j) * G[j - 1] + p.gam(j) * np.sqrt(G[j - 1]) * s[f"W{j}"].standard_normal(size) for j in (1, 2)]
    dH1 = sample_ig_T(dts, dts**2 / p.nuR, s["H1"], size)
    root = 1.0 / math.sqrt(p.nuR)
    dZ = _remainder_steps(root, root, p.a, dts, s["Z"], nb)
    dH2 = p.a * dH1 + dZ
    n_a = s["WC"].standard_normal(size)
    n_rest = s["WC"].standard_normal(size)
    w_shared = np.sqrt(p.a * dH1) * n_a
    w_h1 = w_shared + np.sqrt((1.0 - p.a) * dH1) * n_rest
    wt = np.sqrt(dZ) * s["WT"].standard_normal(size)
    r1 = p.betaR1 * dH1 + p.gammaR1 * w_h1
    r2 = p.betaR2 * dH2 + p.gammaR2 * (w_shared + wt)
    y1 = X[0] + p.a1 * r1
    y2 = X[1] + p.a2 * r2
    clocks = {}
    if keep_clocks:
        clocks = {"H1": _cum(dH1), "H2": _cum(dH2), "Z": _cum(dZ), "G1": _cum(G[0]), "G2": _cum(G[1])}
    return _cum(y1), _cum(y2), clocks


def simulate(p, grid, n_paths: int, seed: int, workers: int = 1, keep_clocks: bool = False) -> PathBatch:
    """Simulate ``n_paths`` joint trajectories of ``(Y_1, Y_2)`` on ``grid``."""
    times = check_grid(grid)
    if n_paths < 1:
        raise ValidationError("n_paths must be >= 1", ["n_paths >= 1"])
    dts = np.diff(times)
    tag = p.model_tag

    def run(block, start, stop):
        nb = stop - start
        if tag == "BBSD":
            return _bbsd_block(p, dts, seed, block, nb, keep_clocks)
        return _ssd_block(p, dts, seed, block, nb, tag == "LSSD", keep_clocks)

    parts = rngmod.map_blocks(run, n_paths, workers)
    y1 = np.concatenate([q[0] for q in parts])
    y2 = np.concatenate([q[1] for q in parts])
    clocks = {}
    if keep_clocks:
        clocks = {k: np.concatenate([q[2][k] for q in parts]) for k in parts[0][2]}
    return PathBatch(times, y1, y2, int(seed), tag, clocks)


def simulate_ssd(p: SsdParams, grid, n_paths, seed, **kw) -> PathBatch:
    if type(p) is not SsdParams:
        raise ValidationError("simulate_ssd needs SsdParams", ["model tag"])
    return simulate(p, grid, n_paths, seed, **kw)


def simulate_lssd(p: LssdParams, grid, n_paths, seed, **kw) -> PathBatch:
    if not isinstance(p, LssdParams):
        raise ValidationError("simulate_lssd needs LssdParams", ["model tag"])
    return simulate(p, grid, n_paths, seed, **kw)


def simulate_bbsd(p: BbsdParams, grid, n_paths, seed, **kw) -> PathBatch:
    if not isinstance(p, BbsdParams):
        raise ValidationError("simulate_bbsd needs BbsdParams", ["model tag"])
    return simulate(p, grid, n_paths, seed, **kw)


def terminal_values(p, T: float, n_paths: int, seed: int, workers: int = 1):
    """(Y_1(T), Y_2(T)) from a one-step simulation."""
    return simulate(p, [0.0, T], n_paths, seed, workers).terminal()
