"""Constructive no-arbitrage test.

The price vector is projected onto the cone generated by the payoff
columns (one generator per outcome). A residual within tolerance recovers
nonnegative state prices: a pricing measure whose normalization is the
risk-neutral measure and whose mass fixes the implied riskless return.
Otherwise the projection gap itself is an arbitrage portfolio: strictly
negative cost, nonnegative payoff in every outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProblemError
from .linalg import nnls
from .market import Market

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PricingMeasure:
    """Nonnegative state prices reproducing the market prices.

    ``strictly_positive`` is False when some outcome carries (numerically)
    zero weight; ``near_boundary`` flags residuals within a factor two of
    the acceptance threshold.
    """

    state_prices: np.ndarray
    mass: float
    risk_neutral: np.ndarray
    implied_return: float
    strictly_positive: bool
    near_boundary: bool
    residual_norm: float


@dataclass(frozen=True)
class ArbitrageCertificate:
    """Portfolio with negative cost and nonnegative payoff in every outcome."""

    portfolio: np.ndarray
    cost: float
    worst_payoff: float


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    slack: float


@dataclass(frozen=True)
class CheckReport:
    checks: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def check_arbitrage(market: Market, tol: float = DEFAULT_TOLERANCE):
    """Return a PricingMeasure or an ArbitrageCertificate for ``market``.

    Exactly one of the two outcomes is produced. Solver non-convergence
    propagates as ConvergenceError with diagnostics attached.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    projection = nnls(market.payoffs, market.prices)
    threshold = tol * max(1.0, float(np.linalg.norm(market.prices)))
    if projection.residual_norm <= threshold:
        weights = projection.coefficients
        mass = float(weights.sum())
        if mass <= tol:
            raise DegenerateProblemError(
                f"recovered state prices have near-zero total mass ({mass!r}); "
                "the implied return is undefined")
        return PricingMeasure(
            state_prices=weights,
            mass=mass,
            risk_neutral=weights / mass,
            implied_return=1.0 / mass,
            strictly_positive=bool((weights > tol).all()),
            near_boundary=bool(projection.residual_norm > 0.5 * threshold),
            residual_norm=projection.residual_norm,
        )
    xi = projection.point - market.prices
    return ArbitrageCertificate(
        portfolio=xi,
        cost=float(xi @ market.prices),
        worst_payoff=float((xi @ market.payoffs).min()),
    )


def verify_certificate(market: Market, result, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """Re-derive every defining condition of ``result`` with plain matrix arithmetic.

    Independent of the solver path: only prices, payoffs and the stored
    portfolio/weights enter. Each condition reports pass/fail and its slack
    (distance to violation; negative when violated).
    """
    if isinstance(result, PricingMeasure):
        return _verify_measure(market, result, tol)
    if isinstance(result, ArbitrageCertificate):
        return _verify_certificate(market, result, tol)
    raise TypeError(f"expected PricingMeasure or ArbitrageCertificate, got {type(result).__name__}")


def _verify_measure(market: Market, measure: PricingMeasure, tol: float) -> CheckReport:
    weights = np.asarray(measure.state_prices, dtype=float)
    checks = []
    low = float(weights.min())
    checks.append(ConditionCheck(
        name="state prices are nonnegative", passed=low >= 0.0, slack=low))
    residual = float(np.linalg.norm(market.payoffs @ weights - market.prices))
    bound = tol * max(1.0, float(np.linalg.norm(market.prices)))
    checks.append(ConditionCheck(
        name="state prices reproduce the instrument prices",
        passed=residual <= bound, slack=bound - residual))
    q_gap = float(abs(np.asarray(measure.risk_neutral, dtype=float).sum() - 1.0))
    checks.append(ConditionCheck(
        name="risk-neutral weights sum to one", passed=q_gap <= 1e-12, slack=1e-12 - q_gap))
    r_gap = float(abs(measure.implied_return * measure.mass - 1.0))
    checks.append(ConditionCheck(
        name="implied return is the reciprocal mass", passed=r_gap <= 1e-12,
        slack=1e-12 - r_gap))
    return CheckReport(checks=tuple(checks))


def _verify_certificate(market: Market, certificate: ArbitrageCertificate,
                        tol: float) -> CheckReport:
    xi = np.asarray(certificate.portfolio, dtype=float)
    cost = float(xi @ market.prices)
    worst = float((xi @ market.payoffs).min())
    payoff_floor = tol * max(1.0, float(np.abs(market.payoffs).max()))
    return CheckReport(checks=(
        ConditionCheck(name="portfolio cost is negative", passed=cost < 0.0, slack=-cost),
        ConditionCheck(name="payoff is nonnegative in every outcome",
                       passed=worst >= -payoff_floor, slack=worst + payoff_floor),
    ))


def risk_neutral_consistency(market: Market, measure: PricingMeasure,
                             tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """Check that every instrument's expected payoff under Q prices it at R * x_i.

    By linearity this extends to all portfolios: under the risk-neutral
    measure every unit-cost portfolio has expected realized return R.
    """
    q = np.asarray(measure.risk_neutral, dtype=float)
    r = measure.implied_return
    bound = tol * max(1.0, float(np.linalg.norm(market.prices))) * max(1.0, abs(r))
    checks = []
    for i, name in enumerate(market.instruments):
        gap = float(abs(market.payoffs[i] @ q - r * market.prices[i]))
        checks.append(ConditionCheck(
            name=f"E_Q[payoff of '{name}'] equals R * price",
            passed=gap <= bound, slack=bound - gap))
    return CheckReport(checks=tuple(checks))
