"""Two-step calibration: NIG marginals from vanilla calls, then dependence
from a target log-return correlation.

Step 1 fits ``(mu_j, sigma_j, alpha_j)`` of each leg, where leg ``j`` is the
subordinated Brownian motion ``mu G + sigma W(G)`` with an IG clock of unit
mean and variance ``alpha`` per unit time.  The objective is the sum of
squared relative pricing errors ``eps_i = (C_i^model - C_i) / C_i``.

Step 2 never touches the marginals.  For SSD/LSSD the dependence parameters
enter only through the common subordinator; for BBSD the leg's IG clock is
split as ``(1 - w_j) G_j + w_j H`` with ``w_j = alpha_j / nu_R``, which keeps
each margin exactly NIG(mu_j, sigma_j, alpha_j).

Both steps use Nelder-Mead from a fixed grid of starts on an unconstrained
reparametrisation (logs for positive quantities, logistic/tanh maps for
bounded ones), so every iterate is a feasible parameter set.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from scipy.stats import qmc

from .errors import ConvergenceError, DomainError, ValidationError
from .models import (
    BbsdParams,
    LssdParams,
    SsdParams,
    correlation_closed_form,
    nig_marginal_log_chf,
)
from .pricing import DEFAULT_FOURIER, exp_levy_log_forward_chf, log_forward_chf, vanilla_prices_fourier

N_STARTS = 10
CAP_TOL = 1e-3
# feasible A is kept strictly inside (0, B / max alpha)
A_MARGIN = 1.0 - 1e-9


@dataclass(frozen=True)
class VanillaQuote:
    underlying_id: str
    maturity: float
    strike: float
    price: float

    def __post_init__(self):
        v = [f"{k} > 0" for k in ("maturity", "strike", "price") if not getattr(self, k) > 0]
        if v:
            raise ValidationError(f"invalid quote {self}: " + "; ".join(v), v)


@dataclass(frozen=True)
class NigMarginal:
    """Leg law mu G + sigma W(G), G an IG clock with E G(1) = 1, Var G(1) = alpha."""

    mu: float
    sigma: float
    alpha: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.alpha > 0):
            raise ValidationError("NIG marginal needs sigma > 0 and alpha > 0", ["sigma > 0", "alpha > 0"])

    def log_chf(self, u):
        return nig_marginal_log_chf(u, self.mu, self.sigma, self.alpha)

    def cumulants(self):
        return _subordinated_cumulants(self.mu, self.sigma, 1.0, self.alpha)

    def as_tuple(self):
        return (self.mu, self.sigma, self.alpha)


@dataclass
class MarginalFit:
    marginal: NigMarginal
    errors: np.ndarray
    objective: float
    converged: bool
    starts: list = field(default_factory=list)


@dataclass
class DependenceFit:
    params: object
    dependence: dict
    rho_mod: float
    rho_mkt: float
    capped: bool
    diagnostics: dict = field(default_factory=dict)


@dataclass
class CalibrationResult:
    model_tag: str
    marginals: tuple
    dependence: dict
    params: object
    errors: dict
    rho_mod: float
    rho_mkt: float
    capped: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_abs_error(self) -> float:
        return max(float(np.max(np.abs(e))) for e in self.errors.values())

    def to_report(self) -> dict:
        return {
            "model": self.model_tag,
            "marginals": [dict(leg=j + 1, mu=m.mu, sigma=m.sigma, alpha=m.alpha) for j, m in enumerate(self.marginals)],
            "dependence": dict(self.dependence),
            "params": self.params.to_dict(),
            "errors": {k: [float(x) for x in v] for k, v in self.errors.items()},
            "max_abs_error": self.max_abs_error,
            "rho_mod": self.rho_mod,
            "rho_mkt": self.rho_mkt,
            "correlation_cap_reached": self.capped,
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------- cumulants

def _subordinated_cumulants(drift, vol, m, v):
    """First three cumulants of drift G + vol W(G), G IG with mean m, variance v."""
    k3g = 3.0 * v * v / m
    return (
        drift * m,
        vol * vol * m + drift * drift * v,
        3.0 * drift * vol * vol * v + drift**3 * k3g,
    )


def leg_cumulants(p, j: int):
    """First three unit-time cumulants of Y_j for any of the three models."""
    if p.model_tag in ("SSD", "LSSD"):
        return _subordinated_cumulants(p.mu(j), p.sigma(j), 1.0, p.alpha(j) / p.B**2)
    x = _subordinated_cumulants(p.beta(j), p.gam(j), 1.0, p.nu(j))
    s = p.load(j)
    r = _subordinated_cumulants(p.betaR(j), p.gammaR(j), 1.0, p.nuR)
    return tuple(x[k] + s ** (k + 1) * r[k] for k in range(3))


def nig_from_cumulants(k1: float, k2: float, k3: float) -> NigMarginal:
    """The NIG marginal with the given mean, variance and third cumulant."""
    if k1 == 0 or k3 / k1 <= 0:
        raise DomainError("third cumulant must be nonzero with the sign of the mean")
    alpha = k3 / (3.0 * k1 * k2)
    s2 = k2 - k1 * k1 * alpha
    if s2 <= 0:
        raise DomainError("cumulants are outside the NIG range (sigma^2 <= 0)")
    return NigMarginal(k1, math.sqrt(s2), alpha)


# ---------------------------------------------------------------- step 1

def _group_by_maturity(quotes):
    groups = {}
    for i, q in enumerate(quotes):
        groups.setdefault(q.maturity, []).append(i)
    return groups


def _check_leg_quotes(quotes):
    if len(quotes) < 4:
        raise ValidationError(f"need >= 4 quotes per leg, got {len(quotes)}", ["n_quotes >= 4"])
    seen = set()
    for q in quotes:
        key = (q.maturity, q.strike)
        if key in seen:
            raise ValidationError(f"duplicate strike {q.strike} at maturity {q.maturity}", ["unique strikes"])
        seen.add(key)


def model_prices(log_chf_unit, quotes, f0: float, r: float, cfg=DEFAULT_FOURIER) -> np.ndarray:
    """Model call prices for ``quotes`` on one leg given its unit-time log chf."""
    out = np.empty(len(quotes))
    for T, idx in _group_by_maturity(quotes).items():
        chf = exp_levy_log_forward_chf(log_chf_unit, T, f0)
        prices, _ = vanilla_prices_fourier(chf, [quotes[i].strike for i in idx], T, r, cfg)
        out[idx] = prices
    return out


def quote_errors(log_chf_unit, quotes, f0: float, r: float, cfg=DEFAULT_FOURIER) -> np.ndarray:
    obs = np.array([q.price for q in quotes])
    return (model_prices(log_chf_unit, quotes, f0, r, cfg) - obs) / obs


def _to_marginal(theta):
    return NigMarginal(float(theta[0]), float(np.exp(theta[1])), float(np.exp(theta[2])))


def marginal_starts(n: int = N_STARTS) -> np.ndarray:
    """Deterministic start grid: an unscrambled Halton sequence mapped to
    mu in [-1, 1], sigma in [0.05, 1], alpha in [0.005, 0.5] (log-uniform)."""
    h = qmc.Halton(d=3, scramble=False).random(n + 1)[1:]
    lo = np.array([-1.0, math.log(0.05), math.log(0.005)])
    hi = np.array([1.0, math.log(1.0), math.log(0.5)])
    return lo + h * (hi - lo)


# marginal objective is a sum of squared relative errors; 1e-16 means |eps| ~ 1e-8
_NM_MARGINAL = dict(xatol=1e-7, fatol=1e-16, maxiter=3000, maxfev=6000)
_NM_DEPENDENCE = dict(xatol=1e-10, fatol=1e-18, maxiter=4000, maxfev=8000)


def calibrate_leg(quotes, f0: float, r: float, starts=None, workers: int = 1, cfg=DEFAULT_FOURIER,
                  max_iter: int | None = None) -> MarginalFit:
    """Least-squares NIG fit of one leg to its call quotes.

    Raises :class:`ConvergenceError` (carrying the best fit) when no start
    converges within the iteration budget.
    """
    opts = dict(_NM_MARGINAL) if max_iter is None else dict(_NM_MARGINAL, maxiter=max_iter, maxfev=2 * max_iter)
    quotes = list(quotes)
    _check_leg_quotes(quotes)
    starts = marginal_starts() if starts is None else np.asarray(starts, dtype=float)

    def objective(theta):
        if not np.all(np.isfinite(theta)) or abs(theta[1]) > 30 or abs(theta[2]) > 30:
            return 1e6
        try:
            eps = quote_errors(_to_marginal(theta).log_chf, quotes, f0, r, cfg)
        except DomainError:
            return 1e6
        val = float(eps @ eps)
        return val if math.isfinite(val) else 1e6

    def run(x0):
        return minimize(objective, x0, method="Nelder-Mead", options=opts)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        results = list(ex.map(run, starts))
    # best objective, ties broken by start index
    best = min(range(len(results)), key=lambda i: (results[i].fun, i))
    res = results[best]
    marginal = _to_marginal(res.x)
    starts_info = [dict(start=i, fun=float(q.fun), success=bool(q.success), nfev=int(q.nfev)) for i, q in enumerate(results)]
    converged = any(q.success for q in results)
    errors = quote_errors(marginal.log_chf, quotes, f0, r, cfg)
    fit = MarginalFit(marginal, errors, float(res.fun), converged, starts_info)
    if not converged:
        raise ConvergenceError("marginal fit did not converge within the iteration budget", best=fit)
    return fit


def split_legs(quotes, forwards: dict):
    """Quotes grouped per leg, in the order of ``forwards``."""
    legs = list(forwards)
    if len(legs) != 2:
        raise ValidationError("need forwards for exactly two underlyings", ["two legs"])
    unknown = sorted({q.underlying_id for q in quotes} - set(legs))
    if unknown:
        raise ValidationError(f"quotes reference unknown underlyings {unknown}", ["known underlying_id"])
    return {leg: [q for q in quotes if q.underlying_id == leg] for leg in legs}


def calibrate_marginals(quotes, forwards: dict, r: float, workers: int = 1, cfg=DEFAULT_FOURIER,
                        max_iter: int | None = None):
    """Fit each leg separately; returns ``{underlying_id: MarginalFit}``."""
    return {leg: calibrate_leg(qs, forwards[leg], r, workers=workers, cfg=cfg, max_iter=max_iter)
            for leg, qs in split_legs(quotes, forwards).items()}


# ---------------------------------------------------------------- step 2

def bbsd_from_marginals(m1: NigMarginal, m2: NigMarginal, nuR: float, a: float, sign: int = 1) -> BbsdParams:
    """BBSD parameters whose legs are exactly NIG(m1) and NIG(m2).

    Needs ``nuR > max(alpha_1, alpha_2)``.  ``sign = -1`` flips the loading of
    leg 2 (and its common drift) to produce negative correlation.
    """
    if not nuR > max(m1.alpha, m2.alpha):
        raise DomainError("convolution condition needs nu_R > max(alpha_1, alpha_2)")
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1", ["sign in {+1, -1}"])
    kw = {}
    for j, m, s in ((1, m1, 1), (2, m2, sign)):
        w = m.alpha / nuR
        kw[f"beta{j}"] = m.mu * (1.0 - w)
        kw[f"gamma{j}"] = m.sigma * math.sqrt(1.0 - w)
        kw[f"nu{j}"] = m.alpha / (1.0 - w)
        kw[f"betaR{j}"] = s * m.mu * w
        kw[f"gammaR{j}"] = m.sigma * math.sqrt(w)
        kw[f"a{j}"] = float(s)
    return BbsdParams(nuR=nuR, a=a, **kw)


def _ssd_like(cls, m1, m2, A, a, B=1.0, **extra):
    return cls(mu1=m1.mu, mu2=m2.mu, sigma1=m1.sigma, sigma2=m2.sigma,
               alpha1=m1.alpha, alpha2=m2.alpha, A=A, a=a, B=B, **extra)


def _dependence_space(model: str, m1: NigMarginal, m2: NigMarginal, B: float):
    """(names, builder(theta, fixed) -> (params, dep dict), start grid)."""
    a_cap = B / max(m1.alpha, m2.alpha) * A_MARGIN
    grid = np.linspace(-3.0, 3.0, 5)
    if model in ("SSD", "LSSD"):
        names = ["A", "a"] + (["rho"] if model == "LSSD" else [])

        def build(vals):
            A, a = vals["A"], vals["a"]
            if model == "SSD":
                return _ssd_like(SsdParams, m1, m2, A, a, B)
            return _ssd_like(LssdParams, m1, m2, A, a, B, rho=vals["rho"])

        maps = {"A": lambda x: a_cap * expit(x), "a": expit, "rho": np.tanh}
        return names, build, maps, grid
    names = ["nuR", "a"]
    amax = max(m1.alpha, m2.alpha)
    maps = {"nuR": lambda x: amax / (expit(x) * A_MARGIN), "a": expit}
    return names, None, maps, grid


def _start_grid(n_free: int, grid: np.ndarray, n: int = N_STARTS) -> np.ndarray:
    h = qmc.Halton(d=max(n_free, 1), scramble=False).random(n + 1)[1:, :n_free]
    return grid[0] + h * (grid[-1] - grid[0])


def calibrate_dependence(marginals, rho_mkt: float, model: str, fixed: dict | None = None,
                         B: float = 1.0) -> DependenceFit:
    """Fit the dependence parameters to ``rho_mkt`` via closed-form correlations.

    ``fixed`` pins some of them (e.g. ``{"a": 0.99}``).  For BBSD both loading
    signs are tried; ``dependence["sign"]`` reports the one used.
    """
    m1, m2 = marginals
    if not abs(rho_mkt) < 1:
        raise ValidationError("|rho_mkt| must be < 1", ["|rho_mkt| < 1"])
    if model not in ("SSD", "LSSD", "BBSD"):
        raise ValidationError(f"unknown model {model!r}", ["model in {SSD, LSSD, BBSD}"])
    fixed = dict(fixed or {})
    names, build, maps, grid = _dependence_space(model, m1, m2, B)
    bad = sorted(set(fixed) - set(names) - {"sign"})
    if bad:
        raise ValidationError(f"cannot fix {bad} for {model}", ["fixed names"])
    free = [n for n in names if n not in fixed]
    signs = [fixed["sign"]] if "sign" in fixed else ([1, -1] if model == "BBSD" else [None])

    def params_of(theta, sign):
        vals = {n: fixed[n] for n in names if n in fixed}
        # clipping keeps the bounded maps away from exact 0 / inf
        vals.update({n: float(maps[n](x)) for n, x in zip(free, np.clip(theta, -40.0, 40.0))})
        if model == "BBSD":
            return bbsd_from_marginals(m1, m2, vals["nuR"], vals["a"], sign), vals
        return build(vals), vals

    best = None
    runs = []
    for sign in signs:
        def objective(theta, sign=sign):
            try:
                p, _ = params_of(theta, sign)
            except (ValidationError, DomainError):
                return 1e6
            return (correlation_closed_form(p) - rho_mkt) ** 2

        starts = _start_grid(len(free), grid) if free else [np.zeros(0)]
        for i, x0 in enumerate(starts):
            if free:
                res = minimize(objective, x0, method="Nelder-Mead", options=_NM_DEPENDENCE)
                x, fun, ok = res.x, float(res.fun), bool(res.success)
            else:
                x, fun, ok = x0, objective(x0), True
            runs.append(dict(sign=sign, start=i, fun=fun, success=ok))
            if best is None or fun < best[0]:
                best = (fun, x, sign)
    _, x, sign = best
    p, vals = params_of(x, sign)
    rho_mod = correlation_closed_form(p)
    dep = dict(vals)
    if model == "BBSD":
        dep["sign"] = sign
    capped = abs(rho_mod - rho_mkt) > CAP_TOL
    diag = dict(runs=runs, free=free, fixed=fixed)
    if capped:
        diag["message"] = "correlation cap reached"
    return DependenceFit(p, dep, rho_mod, rho_mkt, capped, diag)


# ---------------------------------------------------------------- both steps

def model_quote_errors(p, quotes, forwards: dict, r: float, cfg=DEFAULT_FOURIER) -> dict:
    """eps_i recomputed from a full model parameter set, per underlying."""
    out = {}
    for j, (leg, qs) in enumerate(split_legs(quotes, forwards).items(), start=1):
        obs = np.array([q.price for q in qs])
        prices = np.empty(len(qs))
        for T, idx in _group_by_maturity(qs).items():
            chf = log_forward_chf(p, j, T, forwards[leg])
            vals, _ = vanilla_prices_fourier(chf, [qs[i].strike for i in idx], T, r, cfg)
            prices[idx] = vals
        out[leg] = (prices - obs) / obs
    return out


def calibrate(model: str, quotes, forwards: dict, r: float, rho_mkt: float, fixed: dict | None = None,
              workers: int = 1, cfg=DEFAULT_FOURIER, max_iter: int | None = None) -> CalibrationResult:
    """Marginals from quotes, then dependence from ``rho_mkt``."""
    fits = calibrate_marginals(quotes, forwards, r, workers=workers, cfg=cfg, max_iter=max_iter)
    marginals = tuple(f.marginal for f in fits.values())
    dep = calibrate_dependence(marginals, rho_mkt, model, fixed)
    errors = model_quote_errors(dep.params, quotes, forwards, r, cfg)
    diag = dict(
        marginal={leg: dict(objective=f.objective, converged=f.converged, starts=f.starts) for leg, f in fits.items()},
        dependence=dep.diagnostics,
    )
    return CalibrationResult(model, marginals, dep.dependence, dep.params, errors,
                             dep.rho_mod, rho_mkt, dep.capped, diag)


def synthetic_quotes(marginal: NigMarginal, underlying_id: str, f0: float, r: float, maturity: float, strikes):
    """Noise-free model quotes, used for round-trip checks."""
    chf = exp_levy_log_forward_chf(marginal.log_chf, maturity, f0)
    prices, _ = vanilla_prices_fourier(chf, strikes, maturity, r)
    return [VanillaQuote(underlying_id, maturity, float(k), float(c)) for k, c in zip(strikes, prices)]
