"""The a-remainder of an IG_B(delta, gamma) law and the IG-OU skeleton.

For ``0 < a < 1`` the remainder ``Z_a`` satisfies ``Y = a Y' + Z_a`` in law
with ``Y, Y' ~ IG_B(delta, gamma)``.  It is drawn exactly as

    Z_a = W_0 + sum_{i=1}^{N} W_i,
    W_0 ~ IG_B(delta (1 - sqrt(a)), gamma),
    N   ~ Poisson(delta (1 - sqrt(a)) gamma),

where each jump ``W_i`` is a gamma(1/2) variable whose rate ``gamma^2 Y / 2``
is mixed over ``Y = (1 + (a^{-1/2} - 1) U)^2``, ``U`` uniform.  The gamma(1/2)
draw is a squared standard normal divided by twice the rate, so no step of the
scheme loops on rejection.  The acceptance-rejection sampler with the
gamma(1/2, gamma^2/2) envelope is kept as a baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .ig import IGLaw, ig_chf, ig_from_B, sample_ig_T


@dataclass(frozen=True)
class RemainderSpec:
    base: IGLaw
    a: float
    delta_t: float | None = None
    lambda_ou: float | None = None

    def __post_init__(self):
        if not (0 < self.a <= 1):
            raise DomainError(f"self-decomposability parameter a must lie in (0, 1], got {self.a!r}")
        if self.lambda_ou is not None and self.delta_t is not None:
            if not math.isclose(self.a, math.exp(-self.lambda_ou * self.delta_t), rel_tol=1e-12):
                raise DomainError("a must equal exp(-lambda_ou * delta_t)")

    @classmethod
    def from_B(cls, delta: float, gamma: float, a: float) -> "RemainderSpec":
        return cls(ig_from_B(delta, gamma), a)

    @classmethod
    def from_ou(cls, base: IGLaw, lambda_ou: float, delta_t: float) -> "RemainderSpec":
        if lambda_ou < 0 or delta_t <= 0:
            raise DomainError("need lambda_ou >= 0 and delta_t > 0")
        return cls(base, math.exp(-lambda_ou * delta_t), delta_t=delta_t, lambda_ou=lambda_ou)

    @property
    def delta(self) -> float:
        return self.base.a_scale

    @property
    def gamma(self) -> float:
        return self.base.b_shape

    @property
    def degenerate(self) -> bool:
        return self.a == 1.0

    @property
    def head_scale(self) -> float:
        """delta (1 - sqrt(a)): IG_B scale of W_0; times gamma it is the Poisson mean."""
        return self.delta * (1.0 - math.sqrt(self.a))

    @property
    def poisson_mean(self) -> float:
        return self.head_scale * self.gamma

    def over(self, dt: float) -> "RemainderSpec":
        """Spec of the Levy increment Z_a(t + dt) - Z_a(t): base scale grows linearly in dt."""
        return replace(self, base=ig_from_B(self.delta * dt, self.gamma), delta_t=None, lambda_ou=None)


@dataclass
class RemainderDecomposition:
    w0: float
    n_jumps: int
    jumps: list = field(default_factory=list)

    @property
    def z(self) -> float:
        return math.fsum([self.w0, *self.jumps])


@dataclass
class ARDraws:
    """Jump draws from the rejection baseline plus out-of-band telemetry."""

    draws: np.ndarray
    proposals: int
    accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else float("nan")


def remainder_chf(spec: RemainderSpec, u):
    u = np.asarray(u, dtype=complex)
    if spec.degenerate:
        return np.ones_like(u)[()]
    return ig_chf(spec.base, u) / ig_chf(spec.base, spec.a * u)


def jump_pdf(spec: RemainderSpec, w):
    """Density of a single jump W_i (Delta = 1, lambda = -log a)."""
    w = np.asarray(w, dtype=float)
    g, a = spec.gamma, spec.a
    out = np.zeros_like(w)
    pos = w > 0
    wp = w[pos]
    out[pos] = (
        1.0 / (g * math.sqrt(2 * math.pi)) * wp**-1.5 / (a**-0.5 - 1.0)
        * (np.exp(-0.5 * g * g * wp) - np.exp(-0.5 * g * g * wp / a))
    )
    return out


def sample_mixture_jump(spec: RemainderSpec, rng: np.random.Generator, size=None):
    u = rng.random(size)
    n = rng.standard_normal(size)
    y = (1.0 + (spec.a**-0.5 - 1.0) * u) ** 2
    # gamma(1/2, rate r) == N^2 / (2 r), here r = gamma^2 y / 2
    return n * n / (spec.gamma**2 * y)


def sample_remainder_ar(spec: RemainderSpec, rng: np.random.Generator, size: int) -> ARDraws:
    """Jump draws by rejection from c * gamma(1/2, gamma^2/2), c = (1 + a^{-1/2}) / 2."""
    if spec.degenerate:
        raise DomainError("no jumps exist at a = 1")
    g2 = spec.gamma**2
    k = 1.0 / spec.a - 1.0
    norm = 1.0 / (spec.a**-0.5 - 1.0)
    c = 0.5 * (1.0 + spec.a**-0.5)
    out = np.empty(size)
    filled = proposals = 0
    while filled < size:
        m = max(int((size - filled) * c * 1.05) + 16, 64)
        n = rng.standard_normal(m)
        u = rng.random(m)
        w = n * n / g2
        x = 0.5 * g2 * w
        # f/g = (1 - e^{-x k}) / (2 x (a^{-1/2} - 1)); accept with prob (f/g)/c
        ratio = -np.expm1(-x * k) * norm / (2.0 * x)
        acc = w[u * c <= ratio]
        proposals += m
        take = min(acc.size, size - filled)
        if take < acc.size:
            # count proposals only up to the last accepted one used
            idx = np.flatnonzero(u * c <= ratio)[take - 1] if take else -1
            proposals -= m - (idx + 1)
        out[filled:filled + take] = acc[:take]
        filled += take
    return ARDraws(draws=out, proposals=proposals, accepted=size)


def sample_remainder(spec: RemainderSpec, rng: np.random.Generator) -> RemainderDecomposition:
    """One Z_a draw with its decomposition into the IG head and mixture jumps."""
    if spec.degenerate:
        return RemainderDecomposition(0.0, 0, [])
    d0 = spec.head_scale
    w0 = float(sample_ig_T(d0 / spec.gamma, d0 * d0, rng))
    n = int(rng.poisson(spec.poisson_mean))
    jumps = [float(w) for w in sample_mixture_jump(spec, rng, n)]
    return RemainderDecomposition(w0, n, jumps)


def sample_remainders(spec: RemainderSpec, rng: np.random.Generator, size: int, method: str = "mixture"):
    """Vectorised Z_a draws. ``method`` selects the jump sampler: "mixture" or "ar"."""
    if spec.degenerate:
        return np.zeros(size)
    d0 = spec.head_scale
    w0 = sample_ig_T(d0 / spec.gamma, d0 * d0, rng, size)
    counts = rng.poisson(spec.poisson_mean, size)
    total = int(counts.sum())
    if method == "mixture":
        jumps = sample_mixture_jump(spec, rng, total)
    elif method == "ar":
        jumps = sample_remainder_ar(spec, rng, total).draws
    else:
        raise ValueError(f"unknown jump sampler {method!r}")
    owner = np.repeat(np.arange(size), counts)
    return w0 + np.bincount(owner, weights=jumps, minlength=size)


def remainder_cumulant(spec: RemainderSpec, k: int) -> float:
    return (1.0 - spec.a**k) * spec.base.cumulant(k)


def remainder_moments(spec: RemainderSpec, n: int) -> float:
    """Exact n-th raw moment of Z_a, n = 1..5, from its cumulants."""
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= 5):
        raise DomainError(f"moment order must be an integer in 1..5, got {n!r}")
    kap = [0.0] + [remainder_cumulant(spec, k) for k in range(1, n + 1)]
    m = [1.0]
    for j in range(1, n + 1):
        m.append(sum(math.comb(j - 1, i - 1) * kap[i] * m[j - i] for i in range(1, j + 1)))
    return m[n]


def igou_step(spec: RemainderSpec, x_prev, rng: np.random.Generator):
    """One exact IG-OU transition over ``spec.delta_t``: a x + Z_a."""
    x_prev = np.asarray(x_prev, dtype=float)
    if np.any(x_prev < 0):
        raise DomainError("IG-OU state must be nonnegative")
    if x_prev.ndim == 0:
        return spec.a * float(x_prev) + sample_remainder(spec, rng).z
    return spec.a * x_prev + sample_remainders(spec, rng, x_prev.size).reshape(x_prev.shape)


def igou_path(spec: RemainderSpec, x0: float, n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Skeleton x_0, x_1, ..., x_n of a single IG-OU path on a uniform grid."""
    zs = sample_remainders(spec, rng, n_steps)
    out = np.empty(n_steps + 1)
    out[0] = x0
    for i in range(n_steps):
        out[i + 1] = spec.a * out[i] + zs[i]
    return out
