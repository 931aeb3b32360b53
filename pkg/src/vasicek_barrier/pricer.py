"""Option valuation: kernel times payoff, integrated, re-discounted.

The valuation recipe for a knock-out call struck at K:

1. map spot to the log forward x = ln(S / P(r, t; tau)),
2. accumulate the forward variance v = integrated_variance(t, tau),
3. integrate kernel(x, x', v) * (e^{x'} - K) over the payoff region inside
   the barriers,
4. multiply by the bond price P to return from forward to cash units.

Barriers are levels on the forward price, which is where the knock-out
condition of the underlying derivation lives; a spot is knocked out at
inception exactly when its log forward is outside the barrier set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .kernels import SeriesTruncation, barrier_kernel, double_barrier_kernel
from .model import VasicekParams, bond_price, integrated_variance
from .quadrature import QuadratureSpec, integrate

SINGLE_UP = "single_up"
DOUBLE = "double"

# The image/eigenmode kernels carry no mass beyond this many standard
# deviations; integration domains are clipped accordingly.
_TAIL_SDS = 12.0


@dataclass(frozen=True)
class OptionSpec:
    """Contract terms of a knock-out call.

    ``log_barriers`` holds one level for an up-and-out option or the
    (lower, upper) pair for a corridor option, in log forward-price units.
    """

    strike: float
    maturity: float
    barrier_kind: str
    log_barriers: tuple[float, ...]

    def __post_init__(self):
        if self.strike <= 0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if self.maturity <= 0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if self.barrier_kind == SINGLE_UP:
            if len(self.log_barriers) != 1:
                raise ValueError("single_up takes exactly one log-barrier level")
        elif self.barrier_kind == DOUBLE:
            if len(self.log_barriers) != 2 or not self.log_barriers[0] < self.log_barriers[1]:
                raise ValueError("double barrier needs levels (lower, upper) with lower < upper")
        else:
            raise ValueError(f"unknown barrier kind: {self.barrier_kind!r}")

    @classmethod
    def single_up(cls, strike: float, maturity: float, log_barrier: float) -> "OptionSpec":
        return cls(strike, maturity, SINGLE_UP, (log_barrier,))

    @classmethod
    def double(cls, strike: float, maturity: float, lower: float, upper: float) -> "OptionSpec":
        return cls(strike, maturity, DOUBLE, (lower, upper))


@dataclass(frozen=True)
class MarketState:
    """Spot, short rate and clock at valuation."""

    spot: float
    rate: float
    time: float = 0.0

    def __post_init__(self):
        if self.spot <= 0:
            raise ValueError(f"spot must be positive, got {self.spot}")


@dataclass(frozen=True)
class PriceResult:
    """Valuation output; ``knocked_out`` flags a spot outside the barriers."""

    price: float
    knocked_out: bool = False


@dataclass(frozen=True)
class PriceCurve:
    """Prices over a spot grid with the generating parameters attached."""

    spots: np.ndarray
    prices: np.ndarray
    errors: tuple
    params: VasicekParams
    option: OptionSpec


def log_forward(state: MarketState, spec: OptionSpec, p: VasicekParams) -> float:
    """Log forward price x = ln(S / P(r, t; tau))."""
    return math.log(state.spot / bond_price(state.rate, state.time, spec.maturity, p))


def vanilla_call_forward(x: float, strike: float, v: float) -> float:
    """Forward-units value of a plain call on a driftless lognormal forward.

    e^x * N(d1) - K * N(d2) with d1 = (x - ln K + v/2)/sqrt(v); multiplying
    by the bond price gives the cash value.  Used as the barrier-free
    reference that knock-out prices must stay below.
    """
    if strike <= 0:
        raise ValueError("strike must be positive")
    if v < 0:
        raise ValueError("variance must be non-negative")
    if v == 0:
        return max(math.exp(x) - strike, 0.0)
    rv = math.sqrt(v)
    d1 = (x - math.log(strike) + 0.5 * v) / rv
    return math.exp(x) * norm.cdf(d1) - strike * norm.cdf(d1 - rv)


def price_single_barrier(state: MarketState, spec: OptionSpec, p: VasicekParams,
                         quad: QuadratureSpec = QuadratureSpec()) -> PriceResult:
    """Value an up-and-out call under stochastic rates.

    Returns P(r, t; tau) * int_{ln K}^{B} barrier_kernel(x, x', v, B)
    * (e^{x'} - K) dx' with v the forward variance accumulated over
    [t, tau].  The lower integration limit is raised to the point below
    which the kernel carries no mass (x - v/2 - 12*sqrt(v)), which changes
    the value by less than exp(-72).

    A spot whose log forward is at or beyond the barrier prices to zero and
    is flagged as knocked out; a strike at or above the barrier leaves no
    payoff region and also prices to zero.
    """
    if spec.barrier_kind != SINGLE_UP:
        raise ValueError(f"expected a single_up option, got {spec.barrier_kind!r}")
    upper = spec.log_barriers[0]
    x = log_forward(state, spec, p)
    if x >= upper:
        return PriceResult(0.0, knocked_out=True)
    disc = bond_price(state.rate, state.time, spec.maturity, p)
    log_k = math.log(spec.strike)
    if log_k >= upper:
        return PriceResult(0.0)
    v = integrated_variance(state.time, spec.maturity, spec.maturity, p)
    if v == 0.0:
        return PriceResult(disc * max(math.exp(x) - spec.strike, 0.0))
    lo = max(log_k, x - 0.5 * v - _TAIL_SDS * math.sqrt(v))
    val, _ = integrate(
        lambda xp: barrier_kernel(x, xp, v, upper) * (np.exp(xp) - spec.strike),
        lo, upper, quad)
    return PriceResult(disc * val)


def price_double_barrier(state: MarketState, spec: OptionSpec, p: VasicekParams,
                         quad: QuadratureSpec = QuadratureSpec(),
                         trunc: SeriesTruncation = SeriesTruncation()) -> PriceResult:
    """Value a knock-out call inside an absorbing corridor.

    Returns P * int_{max(ln K, lower)}^{upper} double_barrier_kernel(x, x', v)
    * (e^{x'} - K) dx'; the kernel vanishes below the lower wall so clamping
    the lower limit there is exact.
    """
    if spec.barrier_kind != DOUBLE:
        raise ValueError(f"expected a double option, got {spec.barrier_kind!r}")
    lower, upper = spec.log_barriers
    x = log_forward(state, spec, p)
    if not lower < x < upper:
        return PriceResult(0.0, knocked_out=True)
    disc = bond_price(state.rate, state.time, spec.maturity, p)
    lo = max(math.log(spec.strike), lower)
    if lo >= upper:
        return PriceResult(0.0)
    v = integrated_variance(state.time, spec.maturity, spec.maturity, p)
    if v == 0.0:
        return PriceResult(disc * max(math.exp(x) - spec.strike, 0.0))
    val, _ = integrate(
        lambda xp: double_barrier_kernel(x, xp, v, lower, upper, trunc)
        * (np.exp(xp) - spec.strike),
        lo, upper, quad)
    return PriceResult(disc * val)


def price_curve(spots, spec: OptionSpec, p: VasicekParams,
                quad: QuadratureSpec = QuadratureSpec(),
                trunc: SeriesTruncation = SeriesTruncation()) -> PriceCurve:
    """Price the option over a strictly increasing spot grid at t=0, r=r0.

    Knocked-out spots price to zero.  A failure at one grid point (for
    example a quadrature budget overrun) is recorded in ``errors`` for that
    row, with the price set to NaN, and does not abort the rest of the curve.
    """
    spots = np.asarray(spots, dtype=float)
    if spots.size == 0:
        raise ValueError("spot grid must be non-empty")
    if np.any(np.diff(spots) <= 0):
        raise ValueError("spot grid must be strictly increasing")
    prices = np.empty_like(spots)
    errors: list = [None] * spots.size
    for i, s in enumerate(spots):
        state = MarketState(spot=float(s), rate=p.r0, time=0.0)
        try:
            if spec.barrier_kind == SINGLE_UP:
                prices[i] = price_single_barrier(state, spec, p, quad).price
            else:
                prices[i] = price_double_barrier(state, spec, p, quad, trunc).price
        except Exception as exc:  # per-row capture, curve continues
            prices[i] = np.nan
            errors[i] = f"{type(exc).__name__}: {exc}"
    return PriceCurve(spots=spots, prices=prices, errors=tuple(errors),
                      params=p, option=spec)


def up_and_out_call_constant_rate(spot: float, strike: float, barrier: float,
                                  rate: float, sigma: float, maturity: float,
                                  dividend_yield: float = 0.0) -> float:
    """Closed-form up-and-out call under a constant rate (spot-monitored).

    Standard reflection formula in terms of normal CDFs.  With
    ``dividend_yield == rate`` the carry is zero, which prices a barrier
    option on a driftless forward: that is the constant-rate limit of the
    stochastic-rate pricer when called with the forward as "spot".

    Parameters
    ----------
    spot, strike, barrier : float
        Price-units inputs; requires strike < barrier for a non-empty payoff
        region, else the value is 0.  A spot at or above the barrier is
        knocked out.
    rate : float
        Continuously compounded discount rate.
    sigma : float
        Lognormal volatility.
    maturity : float
        Years to expiry.
    dividend_yield : float
        Continuous yield; the risk-neutral drift is rate - dividend_yield.
    """
    if spot <= 0 or strike <= 0 or barrier <= 0:
        raise ValueError("spot, strike and barrier must be positive")
    if maturity <= 0 or sigma <= 0:
        raise ValueError("maturity and sigma must be positive")
    if spot >= barrier or strike >= barrier:
        return 0.0
    b = rate - dividend_yield
    srt = sigma * math.sqrt(maturity)
    mu = (b - 0.5 * sigma * sigma) / (sigma * sigma)
    x1 = math.log(spot / strike) / srt + (1.0 + mu) * srt
    x2 = math.log(spot / barrier) / srt + (1.0 + mu) * srt
    y1 = math.log(barrier * barrier / (spot * strike)) / srt + (1.0 + mu) * srt
    y2 = math.log(barrier / spot) / srt + (1.0 + mu) * srt
    df = math.exp(-rate * maturity)
    gf = math.exp((b - rate) * maturity)
    hs = barrier / spot
    term_a = spot * gf * norm.cdf(x1) - strike * df * norm.cdf(x1 - srt)
    term_b = spot * gf * norm.cdf(x2) - strike * df * norm.cdf(x2 - srt)
    term_c = spot * gf * hs ** (2.0 * (mu + 1.0)) * norm.cdf(-y1) \
        - strike * df * hs ** (2.0 * mu) * norm.cdf(-y1 + srt)
    term_d = spot * gf * hs ** (2.0 * (mu + 1.0)) * norm.cdf(-y2) \
        - strike * df * hs ** (2.0 * mu) * norm.cdf(-y2 + srt)
    return max(term_a - term_b + term_c - term_d, 0.0)
