"""Bivariate NIG models driven by self-decomposable IG subordinators.

Three constructions share the pair ``H_2(t) = a H_1(t) + Z_a(t)``:

* SSD  -- subordinator-level dependence, ``G_j = I_j + alpha_j H_j`` and
  independent Brownian motions on ``G_j``.
* LSSD -- as SSD, but the common part runs correlated Brownian motions
  (correlation ``rho``) on ``H_1`` and ``a H_1``, plus an independent one on ``Z_a``.
* BBSD -- process-level dependence, ``Y_j = X_j + a_j R_j`` with ``R_1, R_2``
  sharing one Brownian motion on ``H_1`` / ``a H_1``.

Everything here is closed form: parameter validation, joint and marginal
characteristic functions, correlations, and the martingale drift correction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import DomainError, ValidationError
from .ig import ig_log_chf_T


def _check(violations, ok, msg):
    if not ok:
        violations.append(msg)


@dataclass(frozen=True)
class SsdParams:
    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    alpha1: float
    alpha2: float
    A: float
    a: float
    B: float = 1.0

    model_tag = "SSD"

    def __post_init__(self):
        v = []
        for name in ("sigma1", "sigma2", "alpha1", "alpha2", "A", "B"):
            _check(v, getattr(self, name) > 0, f"{name} > 0")
        _check(v, 0 < self.a <= 1, "0 < a <= 1")
        if not v:
            for j in (1, 2):
                _check(v, self.idio_scale(j) > 0, f"A_{j} = B/gamma_{j} - A*gamma_{j} > 0 (needs A < B/alpha_{j})")
        if v:
            raise ValidationError(f"invalid {self.model_tag} parameters: " + "; ".join(v), v)

    def mu(self, j):
        return self.mu1 if j == 1 else self.mu2

    def sigma(self, j):
        return self.sigma1 if j == 1 else self.sigma2

    def alpha(self, j):
        return self.alpha1 if j == 1 else self.alpha2

    def gamma(self, j):
        return math.sqrt(self.alpha(j))

    def idio_scale(self, j):
        """A_j such that E[G_j(t)] = t."""
        g = self.gamma(j)
        return self.B / g - self.A * g

    # IG_T parameters of the building blocks over a horizon t
    def I_law(self, j, t):
        Aj, g = self.idio_scale(j), self.gamma(j)
        return Aj * g * t / self.B, (Aj * t) ** 2

    def H_law(self, t):
        return self.A * t / self.B, (self.A * t) ** 2

    def to_dict(self):
        return {"model": self.model_tag, **asdict(self)}


@dataclass(frozen=True)
class LssdParams(SsdParams):
    rho: float = 0.0

    model_tag = "LSSD"

    def __post_init__(self):
        if not -1 <= self.rho <= 1:
            raise ValidationError("invalid LSSD parameters: |rho| <= 1", ["|rho| <= 1"])
        super().__post_init__()


@dataclass(frozen=True)
class BbsdParams:
    beta1: float
    beta2: float
    gamma1: float
    gamma2: float
    nu1: float
    nu2: float
    betaR1: float
    betaR2: float
    gammaR1: float
    gammaR2: float
    nuR: float
    a1: float
    a2: float
    a: float

    model_tag = "BBSD"

    def __post_init__(self):
        v = []
        for name in ("gamma1", "gamma2", "nu1", "nu2", "gammaR1", "gammaR2", "nuR"):
            _check(v, getattr(self, name) > 0, f"{name} > 0")
        _check(v, 0 < self.a <= 1, "0 < a <= 1")
        if v:
            raise ValidationError("invalid BBSD parameters: " + "; ".join(v), v)

    def beta(self, j):
        return self.beta1 if j == 1 else self.beta2

    def gam(self, j):
        return self.gamma1 if j == 1 else self.gamma2

    def nu(self, j):
        return self.nu1 if j == 1 else self.nu2

    def betaR(self, j):
        return self.betaR1 if j == 1 else self.betaR2

    def gammaR(self, j):
        return self.gammaR1 if j == 1 else self.gammaR2

    def load(self, j):
        return self.a1 if j == 1 else self.a2

    def G_law(self, j, t):
        return t, t * t / self.nu(j)

    def H_law(self, t):
        return t, t * t / self.nuR

    def to_dict(self):
        return {"model": self.model_tag, **asdict(self)}


MODELS = {"SSD": SsdParams, "LSSD": LssdParams, "BBSD": BbsdParams}


def params_from_dict(d: dict):
    d = dict(d)
    tag = str(d.pop("model", "")).upper()
    if tag not in MODELS:
        raise ValidationError(f"unknown model tag {tag!r}; expected one of {sorted(MODELS)}", ["model tag"])
    cls = MODELS[tag]
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - names)
    missing = sorted(n for n in names if n not in d and n not in ("B", "rho"))
    if unknown or missing:
        raise ValidationError(
            f"{tag} parameter file: unknown fields {unknown}, missing fields {missing}",
            [f"field {n}" for n in unknown + missing],
        )
    try:
        vals = {k: float(v) for k, v in d.items()}
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{tag} parameter values must be numbers: {exc}", ["numeric fields"]) from exc
    return cls(**vals)


# ---------------------------------------------------------------- chf

def _bm_arg(u, drift, vol):
    """Exponent of a drifted BM on a unit clock: E[e^{iu(drift s + vol W(s))}] = e^{i s * this}."""
    return u * drift + 0.5j * vol * vol * u * u


def _log_remainder(v, a, mu, lam):
    if a == 1.0:
        return np.zeros_like(v)
    return ig_log_chf_T(v, mu, lam) - ig_log_chf_T(a * v, mu, lam)


def log_chf_ssd(p: SsdParams, t, u1, u2):
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    psi1 = _bm_arg(u1, p.mu1, p.sigma1)
    psi2 = _bm_arg(u2, p.mu2, p.sigma2)
    hm, hl = p.H_law(t)
    out = ig_log_chf_T(psi1, *p.I_law(1, t)) + ig_log_chf_T(psi2, *p.I_law(2, t))
    out = out + ig_log_chf_T(p.alpha1 * psi1 + p.a * p.alpha2 * psi2, hm, hl)
    return out + _log_remainder(p.alpha2 * psi2, p.a, hm, hl)


def log_chf_lssd(p: LssdParams, t, u1, u2):
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    a = p.a
    s1 = p.alpha1 * p.sigma1**2
    s2 = p.alpha2 * p.sigma2**2
    s12 = math.sqrt(p.alpha1 * p.alpha2) * p.sigma1 * p.sigma2 * p.rho
    hm, hl = p.H_law(t)
    vh = (
        p.alpha1 * p.mu1 * u1 + a * p.alpha2 * p.mu2 * u2
        + 0.5j * ((1 - a) * s1 * u1 * u1 + a * (s1 * u1 * u1 + 2 * s12 * u1 * u2 + s2 * u2 * u2))
    )
    vz = p.alpha2 * p.mu2 * u2 + 0.5j * s2 * u2 * u2
    out = ig_log_chf_T(_bm_arg(u1, p.mu1, p.sigma1), *p.I_law(1, t))
    out = out + ig_log_chf_T(_bm_arg(u2, p.mu2, p.sigma2), *p.I_law(2, t))
    return out + ig_log_chf_T(vh, hm, hl) + _log_remainder(vz, a, hm, hl)


def log_xi_bbsd(p: BbsdParams, t, w1, w2):
    """Log chf of (R_1(t), R_2(t)) at (w1, w2)."""
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    a = p.a
    g1, g2 = p.gammaR1, p.gammaR2
    hm, hl = p.H_law(t)
    common = (
        w1 * p.betaR1 + a * w2 * p.betaR2
        + 0.5j * (w1 * w1 * g1 * g1 + 2 * a * w1 * w2 * g1 * g2 + a * w2 * w2 * g2 * g2)
    )
    v2 = _bm_arg(w2, p.betaR2, g2)
    return ig_log_chf_T(common, hm, hl) + _log_remainder(v2, a, hm, hl)


def log_chf_bbsd(p: BbsdParams, t, u1, u2):
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    out = ig_log_chf_T(_bm_arg(u1, p.beta1, p.gamma1), *p.G_law(1, t))
    out = out + ig_log_chf_T(_bm_arg(u2, p.beta2, p.gamma2), *p.G_law(2, t))
    return out + log_xi_bbsd(p, t, p.a1 * u1, p.a2 * u2)


_LOG_CHF = {"SSD": log_chf_ssd, "LSSD": log_chf_lssd, "BBSD": log_chf_bbsd}


def log_joint_chf(p, t, u1, u2):
    return _LOG_CHF[p.model_tag](p, t, u1, u2)


def joint_chf(p, t, u1, u2):
    """E[exp(i u1 Y_1(t) + i u2 Y_2(t))]."""
    out = np.exp(log_joint_chf(p, t, u1, u2))
    return out[()] if np.ndim(out) == 0 else out


def chf_ssd(p, t, u1, u2):
    return joint_chf(p, t, u1, u2)


chf_lssd = chf_bbsd = chf_ssd


def char_exponent(p, j: int, u):
    """Per-unit-time log chf of Y_j: E[e^{iuY_j(t)}] = exp(t * char_exponent)."""
    u = np.asarray(u, dtype=complex)
    zero = np.zeros_like(u)
    out = log_joint_chf(p, 1.0, u, zero) if j == 1 else log_joint_chf(p, 1.0, zero, u)
    return out[()] if np.ndim(out) == 0 else out


def drift_correction(p, j: int) -> float:
    """omega_j with E[exp(omega_j t + Y_j(t))] = 1."""
    try:
        psi = complex(char_exponent(p, j, -1j))
    except DomainError as exc:
        raise DomainError(
            f"{p.model_tag} leg {j}: E[exp(Y_{j}(1))] is infinite, no martingale drift exists ({exc})"
        ) from exc
    return -psi.real


def nig_marginal_log_chf(u, drift, vol, clock_var, t=1.0):
    """Subordinated BM drift*G + vol*W(G) with G ~ IG_T(t, t^2/clock_var)."""
    return ig_log_chf_T(_bm_arg(np.asarray(u, dtype=complex), drift, vol), t, t * t / clock_var)


# ---------------------------------------------------------------- moments

def covariance(p, t: float = 1.0):
    """(Var Y_1(t), Var Y_2(t), Cov(Y_1(t), Y_2(t))) in closed form."""
    tag = p.model_tag
    if tag in ("SSD", "LSSD"):
        v1 = (p.sigma1**2 + p.mu1**2 * p.alpha1 / p.B**2) * t
        v2 = (p.sigma2**2 + p.mu2**2 * p.alpha2 / p.B**2) * t
        var_h = p.A * t / p.B**3
        cov = p.mu1 * p.mu2 * p.alpha1 * p.alpha2 * p.a * var_h
        if tag == "LSSD":
            cov += p.a * p.rho * p.sigma1 * p.sigma2 * math.sqrt(p.alpha1 * p.alpha2) * p.A * t / p.B
        return v1, v2, cov
    v = []
    for j in (1, 2):
        x = p.gam(j) ** 2 + p.beta(j) ** 2 * p.nu(j)
        r = p.gammaR(j) ** 2 + p.betaR(j) ** 2 * p.nuR
        v.append((x + p.load(j) ** 2 * r) * t)
    cov = p.a1 * p.a2 * p.a * (p.betaR1 * p.betaR2 * p.nuR + p.gammaR1 * p.gammaR2) * t
    return v[0], v[1], cov


def correlation_closed_form(p, t: float = 1.0) -> float:
    v1, v2, cov = covariance(p, t)
    return cov / math.sqrt(v1 * v2)


def correlation_ssd(mu1, mu2, sigma1, sigma2, alpha1, alpha2, A, a):
    """Correlation formula on raw numbers (no feasibility check on A)."""
    den = math.sqrt(sigma1**2 + mu1**2 * alpha1) * math.sqrt(sigma2**2 + mu2**2 * alpha2)
    return mu1 * mu2 * alpha1 * alpha2 * a * A / den


def correlation_lssd(mu1, mu2, sigma1, sigma2, alpha1, alpha2, A, a, rho):
    den = math.sqrt(sigma1**2 + mu1**2 * alpha1) * math.sqrt(sigma2**2 + mu2**2 * alpha2)
    return a * (mu1 * mu2 * alpha1 * alpha2 * A + rho * A * sigma1 * sigma2 * math.sqrt(alpha1 * alpha2)) / den


def mean(p, t: float = 1.0):
    if p.model_tag in ("SSD", "LSSD"):
        return p.mu1 * t, p.mu2 * t
    return tuple((p.beta(j) + p.load(j) * p.betaR(j)) * t for j in (1, 2))
