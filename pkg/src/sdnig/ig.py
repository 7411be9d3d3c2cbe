"""Inverse Gaussian laws in the (mu, lambda) and (a, b) parametrizations.

``IG_T(mu, lam)`` has mean ``mu`` and shape ``lam``; ``IG_B(a, b)`` has scale
``a`` and shape ``b``.  The two are linked by ``mu = a / b`` and ``lam = a**2``.

The characteristic function

    phi(u) = exp{ lam/mu * (1 - sqrt(1 - 2 i u mu^2 / lam)) }

is analytic in ``u`` on the half plane ``Im(u) > -lam / (2 mu^2)``, which in
IG_B terms reads ``Im(u) > -b^2 / 2``.  Outside that strip the principal square
root jumps branch, so evaluation there raises :class:`DomainError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import SHAPE_RTOL
from .errors import ClosureError, DomainError


@dataclass(frozen=True)
class IGLaw:
    mu: float
    lam: float
    a_scale: float
    b_shape: float

    def __post_init__(self):
        for name in ("mu", "lam", "a_scale", "b_shape"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"IGLaw.{name} must be positive and finite, got {v!r}")

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def var(self) -> float:
        return self.mu**3 / self.lam

    @property
    def strip_bound(self) -> float:
        """Lower bound on Im(u) for which the chf is analytic."""
        return -0.5 * self.b_shape**2

    def cumulant(self, k: int) -> float:
        """k-th cumulant: a * (2k-3)!! * b^(1-2k)."""
        return self.a_scale * _double_factorial(2 * k - 3) * self.b_shape ** (1 - 2 * k)


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def ig_from_T(mu: float, lam: float) -> IGLaw:
    mu, lam = float(mu), float(lam)
    if not (mu > 0 and lam > 0):
        raise DomainError(f"IG_T needs mu > 0 and lambda > 0, got mu={mu}, lambda={lam}")
    a = math.sqrt(lam)
    return IGLaw(mu=mu, lam=lam, a_scale=a, b_shape=a / mu)


def ig_from_B(a: float, b: float) -> IGLaw:
    a, b = float(a), float(b)
    if not (a > 0 and b > 0):
        raise DomainError(f"IG_B needs a > 0 and b > 0, got a={a}, b={b}")
    return IGLaw(mu=a / b, lam=a * a, a_scale=a, b_shape=b)


def ig_pdf(law: IGLaw, x):
    """Density in the (mu, lambda) form. Zero off the positive half line."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    mu, lam = law.mu, law.lam
    out[pos] = np.sqrt(lam / (2 * np.pi * xp**3)) * np.exp(-lam * (xp - mu) ** 2 / (2 * mu**2 * xp))
    return out[()] if out.ndim == 0 else out


def ig_pdf_B(law: IGLaw, x):
    """Density in the (a, b) form; same law as :func:`ig_pdf`."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    a, b = law.a_scale, law.b_shape
    out[pos] = a / np.sqrt(2 * np.pi) * xp**-1.5 * np.exp(a * b - 0.5 * (a * a / xp + b * b * xp))
    return out[()] if out.ndim == 0 else out


def _check_strip(radicand, bound_msg: str):
    if np.any(np.real(radicand) <= 0) or not np.all(np.isfinite(radicand)):
        raise DomainError(f"chf argument outside the analyticity strip ({bound_msg})")


def ig_chf(law: IGLaw, u):
    """chf at real or complex ``u`` (Appendix form with mu, lambda)."""
    u = np.asarray(u, dtype=complex)
    rad = 1.0 - 2j * u * law.mu**2 / law.lam
    _check_strip(rad, f"Im(u) > {law.strip_bound:.6g}")
    out = np.exp(law.lam / law.mu * (1.0 - np.sqrt(rad)))
    return out[()] if out.ndim == 0 else out


def ig_chf_B(law: IGLaw, u):
    """chf in the (a, b) form: exp{-a (sqrt(b^2 - 2iu) - b)}."""
    u = np.asarray(u, dtype=complex)
    rad = law.b_shape**2 - 2j * u
    _check_strip(rad, f"Im(u) > {law.strip_bound:.6g}")
    out = np.exp(-law.a_scale * (np.sqrt(rad) - law.b_shape))
    return out[()] if out.ndim == 0 else out


def ig_log_chf_T(u, mu, lam):
    """log phi(u; mu, lambda) for the IG_T law, used for composite arguments.

    ``mu`` and ``lam`` are plain numbers so model code can evaluate
    ``phi(u; A t, A^2 t^2)`` without building a law object per horizon.
    """
    u = np.asarray(u, dtype=complex)
    rad = 1.0 - 2j * u * mu**2 / lam
    _check_strip(rad, f"Im(u) > {-lam / (2 * mu**2):.6g}")
    return lam / mu * (1.0 - np.sqrt(rad))


def ig_chf_T(u, mu, lam):
    return np.exp(ig_log_chf_T(u, mu, lam))


def ig_sample(law: IGLaw, rng: np.random.Generator, size=None):
    """Exact IG draws by the transform method (one squared normal, one uniform)."""
    return sample_ig_T(law.mu, law.lam, rng, size)


def sample_ig_T(mu, lam, rng: np.random.Generator, size=None):
    """Vectorised IG_T draws; ``mu``/``lam`` may be arrays broadcast against ``size``."""
    y = rng.standard_normal(size) ** 2
    u = rng.random(size)
    mu = np.asarray(mu, dtype=float)
    my = mu * y
    # stable form of mu + mu^2 y/(2 lam) - mu/(2 lam) sqrt(4 mu lam y + mu^2 y^2)
    x = mu - 2.0 * mu * my / (np.sqrt(4.0 * lam * my + my * my) + my)
    x = np.where(u <= mu / (mu + x), x, mu * mu / x)
    return x


def ig_sum_law(x: IGLaw, y: IGLaw) -> IGLaw:
    """Law of X + Y for independent X ~ IG_B(a1, b), Y ~ IG_B(a2, b)."""
    if not math.isclose(x.b_shape, y.b_shape, rel_tol=SHAPE_RTOL):
        raise ClosureError(
            f"sum closure needs equal IG_B shapes, got b={x.b_shape!r} and b={y.b_shape!r}"
        )
    return ig_from_B(x.a_scale + y.a_scale, x.b_shape)


def ig_scale_law(c: float, x: IGLaw) -> IGLaw:
    """Law of cX: IG_T(c mu, c lam), i.e. IG_B(sqrt(c) a, b / sqrt(c)).

    Follows from the chf: a (sqrt(b^2 - 2iuc) - b) = sqrt(c) a (sqrt(b^2/c - 2iu) - b/sqrt(c)).
    """
    if not c > 0:
        raise DomainError(f"scale factor must be positive, got {c!r}")
    return ig_from_T(c * x.mu, c * x.lam)
