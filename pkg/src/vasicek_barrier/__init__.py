"""Knock-out barrier option pricing under Vasicek stochastic interest rates.

The package prices up-and-out and corridor (double knock-out) calls by
integrating absorbing-boundary transition kernels of the log forward price
against the call payoff, and ships two independent Monte Carlo oracles plus a
constant-rate closed form to verify every number it produces.
"""

from .kernels import (SeriesTruncation, SeriesTruncationError, barrier_kernel,
                      double_barrier_kernel, eigenfunction, free_kernel,
                      series_terms)
from .mc_oracle import (MCConfig, MCEstimate, bond_mc, price_barrier_mc,
                        price_barrier_mc_two_factor)
from .model import (BondContext, VasicekParams, b_factor, bond_context,
                    bond_price, bond_price_from_ode, effective_vol_sq,
                    integrated_variance)
from .pricer import (MarketState, OptionSpec, PriceCurve, PriceResult,
                     log_forward, price_curve, price_double_barrier,
                     price_single_barrier, up_and_out_call_constant_rate,
                     vanilla_call_forward)
from .quadrature import QuadratureError, QuadratureSpec, integrate

__version__ = "0.1.0"

__all__ = [
    "BondContext",
    "MCConfig",
    "MCEstimate",
    "MarketState",
    "OptionSpec",
    "PriceCurve",
    "PriceResult",
    "QuadratureError",
    "QuadratureSpec",
    "SeriesTruncation",
    "SeriesTruncationError",
    "VasicekParams",
    "b_factor",
    "barrier_kernel",
    "bond_context",
    "bond_mc",
    "bond_price",
    "bond_price_from_ode",
    "double_barrier_kernel",
    "effective_vol_sq",
    "eigenfunction",
    "free_kernel",
    "integrate",
    "integrated_variance",
    "log_forward",
    "price_barrier_mc",
    "price_barrier_mc_two_factor",
    "price_curve",
    "price_double_barrier",
    "price_single_barrier",
    "series_terms",
    "up_and_out_call_constant_rate",
    "vanilla_call_forward",
]
