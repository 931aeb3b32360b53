"""Monte Carlo verification engines for bonds and knock-out options.

Two independent estimators exist for every option price:

* `price_barrier_mc` simulates the log forward alone.  Under the bond
  numeraire the forward is driftless with per-step variance given exactly by
  `integrated_variance`, so each step is an exact Gaussian draw with no
  discretization bias in the terminal law.
* `price_barrier_mc_two_factor` simulates (ln S, r) jointly under the cash
  measure: Euler for ln S, exact Ornstein-Uhlenbeck transitions for r,
  correlated increments, explicit path discounting.  It exists to check the
  numeraire-change reasoning behind the first estimator.

Barrier monitoring is either ``discrete`` (grid points only) or
``bridge_corrected`` (additionally knocking out between grid points with the
Brownian-bridge crossing probability; the two-sided corridor version uses the
reflection series truncated at images |k| <= 10).

Determinism contract: paths are generated in fixed blocks of 2**14 using the
counter-based Philox generator keyed by (seed, block index), and draws within
a block are laid out path-major with normals before uniforms, so the random
numbers consumed by (path i, step j) depend only on the seed.  Per-block
partial sums are combined with pairwise summation, making estimates
bit-identical across runs for identical (seed, n_paths, n_steps).

The inner loops write into preallocated buffers; a path block at the default
resolution occupies tens of megabytes, and avoiding temporaries roughly
triples throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import VasicekParams, b_factor, bond_price, _log_a_factor, \
    integrated_variance
from .pricer import DOUBLE, SINGLE_UP, MarketState, OptionSpec, log_forward

BRIDGE = "bridge_corrected"
DISCRETE = "discrete"

_BLOCK = 1 << 14
_BRIDGE_IMAGES = 10  # reflection images on each side in the corridor series
# exp() underflows to zero below roughly -745; provably smaller series terms
# are skipped without changing the float64 sum.
_EXP_UNDERFLOW = -750.0
# Exponents are floored here before exp(): the result (~1e-304) is
# indistinguishable from zero for knock decisions and sums, and flooring keeps
# exp() off its near-underflow slow path, which is two orders of magnitude
# slower on this libm.
_EXP_FLOOR = -700.0


@dataclass(frozen=True)
class MCConfig:
    """Simulation scale and monitoring mode.

    ``n_steps`` is a per-year resolution: a horizon of tau years uses
    ceil(tau * n_steps) uniform steps.
    """

    n_paths: int = 1_000_000
    n_steps: int = 512
    seed: int = 0
    monitoring: str = BRIDGE

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.monitoring not in (BRIDGE, DISCRETE):
            raise ValueError(f"unknown monitoring mode: {self.monitoring!r}")


@dataclass(frozen=True)
class MCEstimate:
    """Point estimate with its standard error and the scale that produced it."""

    mean: float
    std_error: float
    n_paths: int
    n_steps: int
    seed: int


def _block_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed % 2**64, index])))


def _blocks(n_paths: int):
    done = 0
    index = 0
    while done < n_paths:
        yield index, min(_BLOCK, n_paths - done)
        done += _BLOCK
        index += 1


def _reduce(sums: list, sqsums: list, n: int, n_steps: int, seed: int) -> MCEstimate:
    s1 = float(np.sum(np.asarray(sums)))
    s2 = float(np.sum(np.asarray(sqsums)))
    mean = s1 / n
    var = max(s2 - n * mean * mean, 0.0) / (n - 1) if n > 1 else 0.0
    return MCEstimate(mean=mean, std_error=math.sqrt(var / n), n_paths=n,
                      n_steps=n_steps, seed=seed)


def _ou_step_coeffs(dt: float, p: VasicekParams) -> tuple[float, float]:
    """(decay, shock sd) of the exact OU transition over one step."""
    z = 2.0 * p.a * dt
    var_scale = dt if z == 0.0 else dt * (-math.expm1(-z) / z)
    return math.exp(-p.a * dt), p.sigma2 * math.sqrt(var_scale)


def _ou_paths_into(r: np.ndarray, z: np.ndarray, work: np.ndarray, r0: float,
                   dt: float, p: VasicekParams) -> None:
    """Fill r (m, n+1) with exact OU paths driven by the normals z (m, n).

    Uses r_j = theta + decay^j * (r0 - theta + shock * sum_{k<j} decay^{-k-1} z_k),
    which turns the step recursion into one cumulative sum.  ``work`` is an
    (m, n) scratch buffer; z is left untouched.
    """
    n = z.shape[1]
    decay, shock = _ou_step_coeffs(dt, p)
    j = np.arange(1, n + 1)
    np.multiply(z, decay**(-j), out=work)
    np.cumsum(work, axis=1, out=work)
    np.multiply(work, shock * decay**j, out=work)
    r[:, 0] = r0
    np.add(work, p.theta + decay**j * (r0 - p.theta), out=r[:, 1:])


def _trapezoid_discount(r: np.ndarray, dt: float) -> np.ndarray:
    """exp(-integral of r dt) per path, trapezoidal rule over the grid."""
    integral = r[:, 1:-1].sum(axis=1)
    integral += 0.5 * (r[:, 0] + r[:, -1])
    integral *= -dt
    return np.exp(integral)


def bond_mc(r0: float, tau: float, p: VasicekParams, cfg: MCConfig) -> MCEstimate:
    """Estimate the bond price E[exp(-int_0^tau r dt)] by simulation.

    Uses the exact OU transition per step and trapezoidal accumulation of
    the rate integral.
    """
    n = math.ceil(tau * cfg.n_steps)
    dt = tau / n
    z = np.empty((_BLOCK, n))
    r = np.empty((_BLOCK, n + 1))
    work = np.empty((_BLOCK, n))
    sums, sqsums = [], []
    for index, m in _blocks(cfg.n_paths):
        rng = _block_rng(cfg.seed, index)
        rng.standard_normal(out=z[:m])
        _ou_paths_into(r[:m], z[:m], work[:m], r0, dt, p)
        disc = _trapezoid_discount(r[:m], dt)
        sums.append(disc.sum())
        sqsums.append((disc * disc).sum())
    return _reduce(sums, sqsums, cfg.n_paths, n, cfg.seed)


def _single_bridge_knockout(x, upper, neg2_inv_v, rng, t, u, kb):
    """Knock mask with bridge correction for an upper barrier.

    The crossing probability exp(-2*(B-x_l)*(B-x_r)/v) is clipped at one, so
    any step whose right endpoint breaches the barrier is knocked with
    certainty and no separate grid check is needed.  ``u`` doubles as scratch
    until the uniforms are drawn into it.
    """
    np.subtract(upper, x[:, :-1], out=u)
    np.subtract(upper, x[:, 1:], out=t)
    np.multiply(t, u, out=t)
    np.multiply(t, neg2_inv_v, out=t)
    np.clip(t, _EXP_FLOOR, 0.0, out=t)
    np.exp(t, out=t)
    rng.random(out=u)
    np.less(u, t, out=kb)
    return kb.any(axis=1)


def _corridor_stay_prob_into(acc, x, d, lower, upper, inv_v, t, t2):
    """Fill acc with per-step bridge stay probabilities inside a corridor.

    Reflection series over images |k| <= _BRIDGE_IMAGES:
    sum_k exp(-2 kL (kL + d)/v) - exp(-2 (kL + a)(kL + b)/v) with
    a, b the endpoint distances to the lower wall and d = b - a the step
    increment.  Exponents are clipped at zero; the result is meaningful only
    where both endpoints lie inside (outside steps are handled by the grid
    check).  Terms that provably underflow for in-corridor endpoints are
    skipped, which leaves the float64 sum unchanged.
    """
    width = upper - lower
    vmax = 1.0 / float(np.min(inv_v))
    acc.fill(0.0)
    for k in range(-_BRIDGE_IMAGES, _BRIDGE_IMAGES + 1):
        kl = k * width
        if k == 0:
            acc += 1.0
        elif -2.0 * (abs(k) - 1.0) ** 2 * width * width / vmax >= _EXP_UNDERFLOW:
            np.add(d, kl, out=t)
            np.multiply(t, inv_v, out=t)
            np.multiply(t, -2.0 * kl, out=t)
            np.clip(t, _EXP_FLOOR, 0.0, out=t)
            np.exp(t, out=t)
            np.add(acc, t, out=acc)
        if -2.0 * (abs(k) - 1.0) * max(abs(k) - 1.0, 1.0) * width * width / vmax \
                >= _EXP_UNDERFLOW or k == 0:
            np.add(x[:, :-1], kl - lower, out=t)
            np.add(x[:, 1:], kl - lower, out=t2)
            np.multiply(t, t2, out=t)
            np.multiply(t, inv_v, out=t)
            np.multiply(t, -2.0, out=t)
            np.clip(t, _EXP_FLOOR, 0.0, out=t)
            np.exp(t, out=t)
            np.subtract(acc, t, out=acc)
    np.clip(acc, 0.0, 1.0, out=acc)


def _double_bridge_knockout(x, d, lower, upper, inv_v, rng, acc, t, t2, u, kb):
    """Knock mask with two-sided bridge correction for a corridor."""
    outside = np.less_equal(x[:, 1:], lower, out=kb)
    knocked = outside.any(axis=1)
    np.greater_equal(x[:, 1:], upper, out=kb)
    knocked |= kb.any(axis=1)
    _corridor_stay_prob_into(acc, x, d, lower, upper, inv_v, t, t2)
    np.subtract(1.0, acc, out=acc)
    rng.random(out=u)
    np.less(u, acc, out=kb)
    return knocked | kb.any(axis=1)


def _payoff_stats(x_final, strike, knocked, scale):
    pay = np.exp(x_final)
    pay -= strike
    np.maximum(pay, 0.0, out=pay)
    pay[knocked] = 0.0
    pay *= scale
    return pay.sum(), (pay * pay).sum()


def price_barrier_mc(state: MarketState, spec: OptionSpec, p: VasicekParams,
                     cfg: MCConfig) -> MCEstimate:
    """Forward-measure Monte Carlo price of a knock-out call.

    Simulates the log forward x with exact per-step Gaussian increments of
    variance v_j = integrated_variance(t_j, t_{j+1}), applies the knockout
    monitor, pays (e^{x(tau)} - K)^+ on surviving paths and multiplies by
    the bond price.  A start outside the barrier region returns the
    knocked-out estimate (0, 0).
    """
    x0 = log_forward(state, spec, p)
    if spec.barrier_kind == SINGLE_UP:
        upper = spec.log_barriers[0]
        alive = x0 < upper
        lower = None
    else:
        lower, upper = spec.log_barriers
        alive = lower < x0 < upper
    n = math.ceil((spec.maturity - state.time) * cfg.n_steps)
    if not alive:
        return MCEstimate(0.0, 0.0, cfg.n_paths, n, cfg.seed)
    disc = bond_price(state.rate, state.time, spec.maturity, p)
    grid = np.linspace(state.time, spec.maturity, n + 1)
    v = integrated_variance(grid[:-1], grid[1:], spec.maturity, p)
    sd = np.sqrt(v)
    inv_v = 1.0 / v
    bridge = cfg.monitoring == BRIDGE

    double_bridge = spec.barrier_kind == DOUBLE and bridge
    z = np.empty((_BLOCK, n))
    x = np.empty((_BLOCK, n + 1))
    t = np.empty((_BLOCK, n))
    u = np.empty((_BLOCK, n))
    kb = np.empty((_BLOCK, n), dtype=bool)
    acc = np.empty((_BLOCK, n)) if double_bridge else None
    t2 = np.empty((_BLOCK, n)) if double_bridge else None

    sums, sqsums = [], []
    for index, m in _blocks(cfg.n_paths):
        rng = _block_rng(cfg.seed, index)
        zm, xm, tm, um, kbm = z[:m], x[:m], t[:m], u[:m], kb[:m]
        rng.standard_normal(out=zm)
        np.multiply(zm, sd, out=zm)
        np.subtract(zm, 0.5 * v, out=zm)  # zm now holds the x-increments
        np.cumsum(zm, axis=1, out=xm[:, 1:])
        xm[:, 1:] += x0
        xm[:, 0] = x0
        if spec.barrier_kind == SINGLE_UP:
            if bridge:
                knocked = _single_bridge_knockout(xm, upper, -2.0 * inv_v, rng,
                                                  tm, um, kbm)
            else:
                knocked = np.greater_equal(xm[:, 1:], upper, out=kbm).any(axis=1)
        else:
            if bridge:
                knocked = _double_bridge_knockout(xm, zm, lower, upper, inv_v,
                                                  rng, acc[:m], tm, t2[:m], um, kbm)
            else:
                knocked = np.less_equal(xm[:, 1:], lower, out=kbm).any(axis=1)
                knocked |= np.greater_equal(xm[:, 1:], upper, out=kbm).any(axis=1)
        s1, s2 = _payoff_stats(xm[:, -1], spec.strike, knocked, disc)
        sums.append(s1)
        sqsums.append(s2)
    return _reduce(sums, sqsums, cfg.n_paths, n, cfg.seed)


def price_barrier_mc_two_factor(state: MarketState, spec: OptionSpec,
                                p: VasicekParams, cfg: MCConfig) -> MCEstimate:
    """Joint (ln S, r) Monte Carlo price of a knock-out call.

    Euler steps for ln S with drift r - sigma1^2/2, exact OU transitions for
    r with per-step correlation rho, discounting by the trapezoidal rate
    integral.  The barrier is monitored on the log forward
    ln(S_t / P(r_t, t; tau)), with the same per-step bridge correction as
    the forward-measure estimator (the forward's instantaneous variance is
    the same under both measures).
    """
    x0 = log_forward(state, spec, p)
    if spec.barrier_kind == SINGLE_UP:
        upper = spec.log_barriers[0]
        alive = x0 < upper
        lower = None
    else:
        lower, upper = spec.log_barriers
        alive = lower < x0 < upper
    n = math.ceil((spec.maturity - state.time) * cfg.n_steps)
    if not alive:
        return MCEstimate(0.0, 0.0, cfg.n_paths, n, cfg.seed)
    tau = spec.maturity
    grid = np.linspace(state.time, tau, n + 1)
    dt = (tau - state.time) / n
    v = integrated_variance(grid[:-1], grid[1:], tau, p)
    inv_v = 1.0 / v
    log_a = _log_a_factor(grid, tau, p.a, p.theta, p.sigma2)
    b_fac = b_factor(grid, tau, p.a)
    rho_c = math.sqrt(1.0 - p.rho**2)
    bridge = cfg.monitoring == BRIDGE
    log_s0 = math.log(state.spot)

    double_bridge = spec.barrier_kind == DOUBLE and bridge
    z1 = np.empty((_BLOCK, n))
    z2 = np.empty((_BLOCK, n))
    work = np.empty((_BLOCK, n))
    r = np.empty((_BLOCK, n + 1))
    x = np.empty((_BLOCK, n + 1))
    t = np.empty((_BLOCK, n))
    u = np.empty((_BLOCK, n))
    kb = np.empty((_BLOCK, n), dtype=bool)
    acc = np.empty((_BLOCK, n)) if double_bridge else None
    t2 = np.empty((_BLOCK, n)) if double_bridge else None

    sums, sqsums = [], []
    for index, m in _blocks(cfg.n_paths):
        rng = _block_rng(cfg.seed, index)
        z1m, z2m, wm, rm, xm = z1[:m], z2[:m], work[:m], r[:m], x[:m]
        tm, um, kbm = t[:m], u[:m], kb[:m]
        rng.standard_normal(out=z1m)
        rng.standard_normal(out=z2m)
        np.multiply(z2m, rho_c, out=z2m)
        np.multiply(z1m, p.rho, out=wm)
        np.add(z2m, wm, out=z2m)
        _ou_paths_into(rm, z2m, wm, state.rate, dt, p)
        disc_path = _trapezoid_discount(rm, dt)
        # Euler log-stock increments: (r_j - s1^2/2) dt + s1 sqrt(dt) Z1
        np.multiply(z1m, p.sigma1 * math.sqrt(dt), out=z1m)
        np.multiply(rm[:, :-1], dt, out=wm)
        np.add(z1m, wm, out=z1m)
        z1m -= 0.5 * p.sigma1**2 * dt
        np.cumsum(z1m, axis=1, out=xm[:, 1:])
        xm[:, 1:] += log_s0
        xm[:, 0] = log_s0
        log_s_final = xm[:, -1].copy()
        # switch xm from log spot to log forward: x = ln S - ln A + r B
        np.multiply(rm, b_fac, out=rm)   # rm now holds r*B; r itself is done with
        xm += rm
        xm -= log_a
        if spec.barrier_kind == SINGLE_UP:
            if bridge:
                knocked = _single_bridge_knockout(xm, upper, -2.0 * inv_v, rng,
                                                  tm, um, kbm)
            else:
                knocked = np.greater_equal(xm[:, 1:], upper, out=kbm).any(axis=1)
        else:
            np.subtract(xm[:, 1:], xm[:, :-1], out=z2m)  # forward increments
            if bridge:
                knocked = _double_bridge_knockout(xm, z2m, lower, upper, inv_v,
                                                  rng, acc[:m], tm, t2[:m], um, kbm)
            else:
                knocked = np.less_equal(xm[:, 1:], lower, out=kbm).any(axis=1)
                knocked |= np.greater_equal(xm[:, 1:], upper, out=kbm).any(axis=1)
        pay = np.exp(log_s_final)
        pay -= spec.strike
        np.maximum(pay, 0.0, out=pay)
        pay[knocked] = 0.0
        pay *= disc_path
        sums.append(pay.sum())
        sqsums.append((pay * pay).sum())
    return _reduce(sums, sqsums, cfg.n_paths, n, cfg.seed)
