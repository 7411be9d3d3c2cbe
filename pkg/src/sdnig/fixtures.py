"""Parameter sets of the two market studies (German/French power, German power/NCG gas).

Printed values are kept verbatim in ``RAW``.  Three of the printed SSD/LSSD
sets violate ``A < B / alpha_j`` (the idiosyncratic IG scale ``A_j`` would be
negative), so the simulation fixtures cap ``A`` at ``0.99 / max(alpha_j)``.
The BBSD tables omit the loadings ``a_1, a_2``; the fixture uses equal
loadings solved so that the closed-form correlation equals the printed
``rho_mod``.
"""

from __future__ import annotations

import math

from scipy.optimize import brentq

from .models import BbsdParams, LssdParams, SsdParams, covariance
from .pricing import SpreadContract

MARGINALS = {
    "power": dict(mu1=0.64, mu2=0.40, sigma1=0.31, sigma2=0.32, alpha1=0.02, alpha2=0.03),
    "gas": dict(mu1=0.37, mu2=0.20, sigma1=0.44, sigma2=0.33, alpha1=0.09, alpha2=0.07),
}

RAW = {
    ("SSD", "power"): dict(A=40.15, B=1.0, a=0.99, rho_mod=0.05),
    ("LSSD", "power"): dict(A=40.15, B=1.0, rho=0.99, a=0.99, rho_mod=0.88),
    ("BBSD", "power"): dict(
        beta1=-0.001, beta2=0.013, gamma1=0.002, gamma2=0.103, nu1=1.007, nu2=0.091,
        betaR1=0.554, betaR2=0.800, gammaR1=0.448, gammaR2=0.50, nuR=0.025, a=0.99, rho_mod=0.94,
    ),
    ("SSD", "gas"): dict(A=11.27, B=1.0, a=0.99, rho_mod=0.03),
    ("LSSD", "gas"): dict(A=8.79, B=1.0, rho=0.87, a=0.90, rho_mod=0.54),
    ("BBSD", "gas"): dict(
        beta1=0.11, beta2=0.09, gamma1=0.24, gamma2=0.22, nu1=0.28, nu2=0.15,
        betaR1=0.38, betaR2=0.23, gammaR1=0.56, gammaR2=0.50, nuR=0.13, a=0.89, rho_mod=0.54,
    ),
}

RHO_MKT = {"power": 0.94, "gas": 0.54}
RATE = 0.015

# forward levels and maturity are not reported; these are documented choices
CONTRACT = SpreadContract(K=0.0, T=0.5, r=RATE, f1_0=50.0, f2_0=48.0)
K_GRID = [0.5 * i for i in range(25)]


def feasible_A(market: str, A: float) -> float:
    m = MARGINALS[market]
    cap = 0.99 / max(m["alpha1"], m["alpha2"])
    return min(A, cap)


def bbsd_loading(raw: dict, target: float) -> float:
    """Common loading s = a_1 = a_2 giving closed-form correlation ``target``."""
    base = {k: v for k, v in raw.items() if k != "rho_mod"}

    def corr(s):
        v1, v2, c = covariance(BbsdParams(a1=s, a2=s, **base), 1.0)
        return c / math.sqrt(v1 * v2)

    return brentq(lambda s: corr(s) - target, 1e-6, 1e3, xtol=1e-14)


def fixture(model: str, market: str = "power"):
    """Model parameters usable by the simulators and the chf code."""
    raw = RAW[(model, market)]
    if model == "BBSD":
        s = bbsd_loading(raw, raw["rho_mod"])
        base = {k: v for k, v in raw.items() if k != "rho_mod"}
        return BbsdParams(a1=s, a2=s, **base)
    m = MARGINALS[market]
    A = feasible_A(market, raw["A"])
    if model == "SSD":
        return SsdParams(A=A, a=raw["a"], B=raw["B"], **m)
    return LssdParams(A=A, a=raw["a"], B=raw["B"], rho=raw["rho"], **m)


def all_fixtures():
    return {(mdl, mkt): fixture(mdl, mkt) for (mdl, mkt) in RAW}
