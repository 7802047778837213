"""Numerical verification of the lab's theoretical claims.

Every check emits ``BoundReport`` records rather than bare booleans, so the
CLI can serialize exactly what was compared.  All bound arithmetic on
quantities that collapse doubly exponentially is done in the log domain:
numbers like exp(2^K F(K)) underflow any fixed exponent budget conceptually,
so the comparisons run on logarithms and nothing ever exponentiates them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .ei import ei_integral_oracle, expected_improvement
from .errors import DimensionMismatch, DuplicatePoint, EILabError
from .kernels import (
    GaussianKernel,
    KernelSpec,
    SpectralPowerKernel,
    covariance,
    gaussian_as_spectral_power,
    rate_function,
)
from .linalg import gram_det
from .posterior import FittedPosterior, TrajectoryState, variance_spectral_oracle
from .precision import PrecisionContext, raw_context
from .quadrature import integrate


@dataclass(frozen=True)
class BoundReport:
    """One checked inequality lhs <= rhs.

    ``satisfied`` allows the inequality a relative slack of
    10**-(digits/4); ``ratio`` carries the log-domain quantity being
    sandwiched where that is the natural summary, and ``context`` is a
    free-form record of the parameters behind the check.
    """

    label: str
    k: int
    lhs: object
    rhs: object
    ratio: object
    satisfied: bool
    context: dict = field(default_factory=dict)


def _holds_leq(ctx: PrecisionContext, lhs, rhs) -> bool:
    mp = ctx.mp
    if lhs == mp.ninf or rhs == mp.inf:
        return True
    if lhs == mp.inf or rhs == mp.ninf:
        return False
    slack = ctx.tol(-(ctx.digits // 4)) * max(abs(lhs), abs(rhs), mp.mpf(1))
    return lhs <= rhs + slack


@dataclass(frozen=True)
class LagrangeWeights:
    """Interpolation weights lambda_k = prod_{l != k} (x - x_l)/(x_k - x_l).

    They reproduce every polynomial of degree < K at the target; the
    constructor verifies that on the monomial basis.
    """

    target: object
    nodes: tuple
    weights: tuple


def lagrange_weights(x, nodes, ctx: PrecisionContext) -> LagrangeWeights:
    """Product-formula interpolation weights for the target x."""
    mp = ctx.mp
    x = mp.mpf(x)
    ns = [mp.mpf(v) for v in nodes]
    k = len(ns)
    for i in range(k):
        for j in range(i + 1, k):
            if ns[i] == ns[j]:
                raise DuplicatePoint(f"nodes {i} and {j} coincide")
    weights = []
    for i in range(k):
        w = mp.mpf(1)
        for j in range(k):
            if j != i:
                w *= (x - ns[j]) / (ns[i] - ns[j])
        weights.append(w)
    # Polynomial reproduction is the defining property; check it before
    # handing the weights out.
    tol = ctx.tol(-(ctx.digits // 2))
    wscale = max(mp.mpf(1), sum(abs(w) for w in weights))
    for degree in range(k):
        acc = mp.mpf(0)
        for wi, ni in zip(weights, ns):
            acc += wi * ni**degree
        if abs(acc - x**degree) > tol * wscale:
            raise EILabError(
                f"weights fail to reproduce degree-{degree} monomial "
                f"(defect {mp.nstr(abs(acc - x**degree), 4)})"
            )
    return LagrangeWeights(target=x, nodes=tuple(ns), weights=tuple(weights))


def rkhs_approx_error(kernel: KernelSpec, x, nodes, weights, ctx: PrecisionContext):
    """Squared distance from the kernel feature of x to a weighted combination
    of node features:

        G(0) - 2 sum_k w_k G(x - x_k) + sum_{k,l} w_k w_l G(x_k - x_l).

    Nonnegative by construction; tiny negative cancellation noise is clamped
    to zero.
    """
    mp = ctx.mp
    x = mp.mpf(x)
    ns = [mp.mpf(v) for v in nodes]
    ws = [mp.mpf(w) for w in weights]
    if len(ns) != len(ws):
        raise DimensionMismatch("weights and nodes differ in length")
    total = covariance(kernel, 0, ctx)
    for wk, nk in zip(ws, ns):
        total -= 2 * wk * covariance(kernel, x - nk, ctx)
    for i, (wi, ni) in enumerate(zip(ws, ns)):
        total += wi * wi * covariance(kernel, 0, ctx)
        for j in range(i + 1, len(ns)):
            total += 2 * wi * ws[j] * covariance(kernel, ni - ns[j], ctx)
    if total < 0:
        total = mp.mpf(0)
    return total


def elementary_symmetric(values, mp):
    """Coefficients e_0..e_K of prod_k (1 + z_k y), by incremental products."""
    coeffs = [mp.mpc(1)]
    for z in values:
        coeffs.append(mp.mpc(0))
        for j in range(len(coeffs) - 1, 0, -1):
            coeffs[j] = coeffs[j] + z * coeffs[j - 1]
    return coeffs


def _as_mpc_list(mp, zs):
    return [mp.mpc(z) for z in zs]


def vandermonde_distance(z, zs, ctx: PrecisionContext):
    """Distance from the power vector of z to the span of those of z_1..z_K:

        rho = prod_k |z - z_k| / sqrt(1 + sum_q |e_q(z_1..z_K)|^2),

    with e_q the elementary symmetric polynomials of the z_k.
    """
    mp = ctx.mp
    z = mp.mpc(z)
    pts = _as_mpc_list(mp, zs)
    for i in range(len(pts)):
        if pts[i] == z:
            raise DuplicatePoint("z coincides with a z_k")
        for j in range(i + 1, len(pts)):
            if pts[i] == pts[j]:
                raise DuplicatePoint(f"z_{i} and z_{j} coincide")
    numerator = mp.mpf(1)
    for p in pts:
        numerator *= abs(z - p)
    es = elementary_symmetric(pts, mp)
    denom_sq = mp.mpf(1)
    for e in es[1:]:
        denom_sq += abs(e) ** 2
    return numerator / mp.sqrt(denom_sq)


_GRAM_ORACLE_MAX = 10


def gram_distance_oracle(z, zs, ctx: PrecisionContext):
    """The same distance through Gram determinants of the power vectors
    v = (1, z, ..., z^K): rho^2 = g(v, v_1..v_K) / g(v_1..v_K)."""
    mp = ctx.mp
    k = len(zs)
    if k > _GRAM_ORACLE_MAX:
        raise EILabError(f"Gram oracle supports at most {_GRAM_ORACLE_MAX} points")
    z = mp.mpc(z)
    pts = _as_mpc_list(mp, zs)
    for i in range(len(pts)):
        if pts[i] == z:
            raise DuplicatePoint("z coincides with a z_k")
        for j in range(i + 1, len(pts)):
            if pts[i] == pts[j]:
                raise DuplicatePoint(f"z_{i} and z_{j} coincide")
    def row(w):
        out, cur = [], mp.mpc(1)
        for _ in range(k + 1):
            out.append(cur)
            cur = cur * w
        return out

    base = [row(p) for p in pts]
    g_base = gram_det(base, ctx)
    g_full = gram_det([row(z)] + base, ctx)
    return ctx.mp.sqrt(g_full / g_base)


def _spectral_form(kernel: KernelSpec, ctx: PrecisionContext) -> SpectralPowerKernel:
    if isinstance(kernel, SpectralPowerKernel):
        return kernel
    if isinstance(kernel, GaussianKernel):
        return gaussian_as_spectral_power(kernel, ctx)
    raise EILabError(
        "rate-function checks need a kernel with super-exponential spectral decay"
    )


def variance_sandwich_check(kernel: KernelSpec, x, nodes, ctx: PrecisionContext):
    """Check e^-K <= sigma^2 / (e^F(K) prod_k |x - x_k|^2) <= e^2K in logs.

    Returns (lower, upper) reports whose ``ratio`` field is
    ln sigma^2 - F(K) - 2 sum ln |x - x_k|.
    """
    mp = ctx.mp
    k = len(nodes)
    if k < 2:
        raise EILabError("sandwich check needs at least 2 nodes")
    spectral = _spectral_form(kernel, ctx)
    state = TrajectoryState(
        kernel=kernel,
        ctx=ctx,
        points=tuple(mp.mpf(v) for v in nodes),
        values=tuple(mp.mpf(0) for _ in nodes),
        best=mp.mpf(0),
    )
    x = mp.mpf(x)
    moments = FittedPosterior(state).moments(x)
    log_sigma2 = mp.log(moments.variance) if moments.variance > 0 else mp.ninf
    log_prod = mp.mpf(0)
    for p in state.points:
        gap = abs(x - p)
        if gap == 0:
            raise DuplicatePoint("x coincides with a node")
        log_prod += 2 * mp.log(gap)
    rate = rate_function(spectral, k, ctx)
    log_ratio = log_sigma2 - rate - log_prod
    context = {
        "x": ctx.to_str(x, 30),
        "nodes": k,
        "rate": ctx.to_str(rate, 30),
        "log_sigma2": ctx.to_str(log_sigma2, 30),
    }
    lower = BoundReport(
        label="sandwich-lower",
        k=k,
        lhs=mp.mpf(-k),
        rhs=log_ratio,
        ratio=log_ratio,
        satisfied=_holds_leq(ctx, mp.mpf(-k), log_ratio),
        context=context,
    )
    upper = BoundReport(
        label="sandwich-upper",
        k=k,
        lhs=log_ratio,
        rhs=mp.mpf(2 * k),
        ratio=log_ratio,
        satisfied=_holds_leq(ctx, log_ratio, mp.mpf(2 * k)),
        context=context,
    )
    return lower, upper


def trajectory_envelope_check(points, kernel: KernelSpec, ctx: PrecisionContext):
    """Per-K reports that 2^K F(K) <= ln |x_{K+1}| <= F(K)/3.

    ``points`` is a collapse trajectory (seeded at x_1 = 0).  The lower
    bound 2^K F(K) is astronomically negative and is never exponentiated:
    every comparison happens on logarithms.
    """
    mp = ctx.mp
    spectral = _spectral_form(kernel, ctx)
    pts = [mp.mpf(p) for p in points]
    reports = []
    for k in range(2, len(pts)):
        x_next = pts[k]
        log_x = mp.log(abs(x_next)) if x_next != 0 else mp.ninf
        rate = rate_function(spectral, k, ctx)
        lower_bound = (2**k) * rate
        upper_bound = rate / 3
        context = {
            "x_next": ctx.to_str(x_next, 30),
            "rate": ctx.to_str(rate, 30),
        }
        reports.append(
            BoundReport(
                label="envelope-lower",
                k=k,
                lhs=lower_bound,
                rhs=log_x,
                ratio=log_x,
                satisfied=_holds_leq(ctx, lower_bound, log_x),
                context=context,
            )
        )
        reports.append(
            BoundReport(
                label="envelope-upper",
                k=k,
                lhs=log_x,
                rhs=upper_bound,
                ratio=log_x,
                satisfied=_holds_leq(ctx, log_x, upper_bound),
                context=context,
            )
        )
    return reports


def _tail_integral_closed(ctx: PrecisionContext, h):
    """integral_0^inf w exp(-(w+h)^2/2) dw = e^{-h^2/2} - h sqrt(pi/2) erfc(h/sqrt 2).

    The two terms cancel to relative size ~1/h^2 for large h, so the value
    is computed at a precision raised by 2 log10(h) digits.
    """
    mp = ctx.mp
    h = mp.mpf(h)
    if h > 16:
        extra = int(2 * mp.log10(h)) + 8
        hp = raw_context(ctx.working_dps + extra)
        hh = hp.mpf(h)
        value = hp.exp(-hh * hh / 2) - hh * hp.sqrt(hp.pi / 2) * hp.erfc(hh / hp.sqrt(2))
        return mp.mpf(value)
    return mp.exp(-h * h / 2) - h * mp.sqrt(mp.pi / 2) * mp.erfc(h / mp.sqrt(2))


def _tail_integral_quadrature(ctx: PrecisionContext, h):
    mp = ctx.mp
    h = mp.mpf(h)
    budget = mp.mpf(ctx.working_dps + 10) * mp.log(10)
    upper = max(mp.mpf(0), -h) + mp.sqrt(2 * budget) + 5
    peak = (-h + mp.sqrt(h * h + 4)) / 2
    points = [0, peak, upper] if peak < upper else [0, upper]
    # Factor out exp(-h^2/2) so the integrand stays O(1)-scaled.
    val = integrate(ctx, lambda w: mp.exp(-w * h - w * w / 2) * w, points)
    return mp.exp(-h * h / 2) * val


def tail_integral_check(h_values, ctx: PrecisionContext):
    """Bracket (1/2) e^{-h^2} <= I(h) <= e^{-h^2/2} for the improvement tail
    integral, plus closed-form vs quadrature agreement, per h >= 0."""
    mp = ctx.mp
    reports = []
    agree_tol = ctx.tol(-(ctx.digits // 4))
    for raw in h_values:
        h = mp.mpf(raw)
        if h < 0:
            raise EILabError("tail check requires h >= 0")
        closed = _tail_integral_closed(ctx, h)
        quad = _tail_integral_quadrature(ctx, h)
        low = mp.exp(-h * h) / 2
        high = mp.exp(-h * h / 2)
        context = {"h": ctx.to_str(h, 30)}
        reports.append(
            BoundReport(
                label="tail-lower",
                k=0,
                lhs=low,
                rhs=closed,
                ratio=closed,
                satisfied=_holds_leq(ctx, low, closed),
                context=context,
            )
        )
        reports.append(
            BoundReport(
                label="tail-upper",
                k=0,
                lhs=closed,
                rhs=high,
                ratio=closed,
                satisfied=_holds_leq(ctx, closed, high),
                context=context,
            )
        )
        rel = abs(closed - quad) / max(abs(closed), ctx.eps())
        reports.append(
            BoundReport(
                label="tail-quadrature",
                k=0,
                lhs=rel,
                rhs=agree_tol,
                ratio=rel,
                satisfied=rel <= agree_tol,
                context=context,
            )
        )
    return reports


@dataclass(frozen=True)
class DecayScan:
    """Approximation-error decay against node count.

    ``errors`` maps K to the squared approximation error of the target's
    kernel feature using Lagrange weights on K nodes; ``slope`` is the
    least-squares slope of ln(error) per added node.
    """

    target: object
    interval: tuple
    errors: tuple
    slope: object


def decay_scan(
    kernel: KernelSpec,
    ctx: PrecisionContext,
    k_min: int = 6,
    k_max: int = 14,
    interval=("0.1", "0.2"),
    target=0,
) -> DecayScan:
    """Scan the Lagrange-weight approximation error over node counts.

    Nodes are K equispaced points in ``interval``; the target sits outside,
    so a decaying error exhibits vanishing conditional variance at a point
    the nodes never approach.
    """
    mp = ctx.mp
    lo, hi = (mp.mpf(interval[0]), mp.mpf(interval[1]))
    x = mp.mpf(target)
    pairs = []
    for k in range(k_min, k_max + 1):
        nodes = [lo + (hi - lo) * i / (k - 1) for i in range(k)]
        weights = lagrange_weights(x, nodes, ctx)
        err = rkhs_approx_error(kernel, x, nodes, weights.weights, ctx)
        pairs.append((k, err))
    xs = [mp.mpf(k) for k, _ in pairs]
    ys = [mp.log(e) for _, e in pairs]
    n = len(xs)
    xbar = sum(xs) / n
    ybar = sum(ys) / n
    num = sum((xi - xbar) * (yi - ybar) for xi, yi in zip(xs, ys))
    den = sum((xi - xbar) ** 2 for xi in xs)
    slope = num / den
    return DecayScan(target=x, interval=(lo, hi), errors=tuple(pairs), slope=slope)


# ---------------------------------------------------------------------------
# Randomized oracle-equivalence trials and the sandwich sweep.  These drive
# both the CLI verification suites and the acceptance tests, with all
# randomness drawn from an explicit seed.
# ---------------------------------------------------------------------------


def _distinct_uniform(rng, count, lo=-1.0, hi=1.0, min_gap=1e-3):
    out = []
    while len(out) < count:
        c = rng.uniform(lo, hi)
        if all(abs(c - v) > min_gap for v in out):
            out.append(c)
    return out


def ei_oracle_trials(ctx: PrecisionContext, seed: int, trials: int = 20, max_k: int = 6):
    """Closed-form EI vs the quadrature oracle on randomized states.

    Returns a list of BoundReports, one per trial, whose ratio is the
    relative disagreement; the hard tolerance is 10**-(digits/4).
    """
    mp = ctx.mp
    rng = random.Random(seed)
    tol = ctx.tol(-(ctx.digits // 4))
    reports = []
    for trial in range(trials):
        kernel = GaussianKernel(a=rng.uniform(0.2, 0.5), gamma=rng.uniform(0.5, 2.0))
        k = rng.randint(1, max_k)
        raw = _distinct_uniform(rng, k + 1, min_gap=2e-2)
        pts, query = raw[:k], raw[k]
        values = [mp.mpf(rng.uniform(-1.2, 0.2)) for _ in range(k)]
        state = TrajectoryState(
            kernel=kernel,
            ctx=ctx,
            points=tuple(mp.mpf(p) for p in pts),
            values=tuple(values),
            best=min(values),
        )
        closed = expected_improvement(state, query).ei
        oracle = ei_integral_oracle(state, query, ctx)
        rel = abs(closed - oracle) / max(abs(oracle), ctx.eps())
        reports.append(
            BoundReport(
                label="ei-oracle",
                k=k,
                lhs=rel,
                rhs=tol,
                ratio=rel,
                satisfied=rel <= tol,
                context={"trial": trial, "query": ctx.to_str(mp.mpf(query), 20)},
            )
        )
    return reports


def posterior_oracle_trials(ctx: PrecisionContext, seed: int, trials: int = 10, max_k: int = 5):
    """Gram-formula variance vs the spectral quadrature oracle."""
    mp = ctx.mp
    rng = random.Random(seed)
    tol = ctx.tol(-(ctx.digits // 4))
    reports = []
    for trial in range(trials):
        kernel = GaussianKernel(a=rng.uniform(0.2, 0.5), gamma=rng.uniform(0.5, 2.0))
        k = rng.randint(1, max_k)
        raw = _distinct_uniform(rng, k + 1, min_gap=2e-2)
        pts, query = raw[:k], raw[k]
        state = TrajectoryState(
            kernel=kernel,
            ctx=ctx,
            points=tuple(mp.mpf(p) for p in pts),
            values=tuple(mp.mpf(0) for _ in range(k)),
            best=mp.mpf(0),
        )
        direct = FittedPosterior(state).moments(query).variance
        oracle = variance_spectral_oracle(state, query, ctx)
        rel = abs(direct - oracle) / max(abs(oracle), ctx.eps())
        reports.append(
            BoundReport(
                label="posterior-oracle",
                k=k,
                lhs=rel,
                rhs=tol,
                ratio=rel,
                satisfied=rel <= tol,
                context={"trial": trial, "query": ctx.to_str(mp.mpf(query), 20)},
            )
        )
    return reports


def vandermonde_trials(ctx: PrecisionContext, seed: int, trials: int = 50, max_k: int = 8):
    """Elementary-symmetric formula vs the Gram-determinant oracle on random
    unit-circle configurations."""
    mp = ctx.mp
    rng = random.Random(seed)
    tol = ctx.tol(-(ctx.digits // 2))
    reports = []
    for trial in range(trials):
        k = rng.randint(1, max_k)
        # Angle range stays clear of the 0/2pi wraparound so the min-gap
        # guarantee carries over to the circle.
        angles = _distinct_uniform(rng, k + 1, lo=0.05, hi=6.2, min_gap=1e-2)
        zs = [mp.expjpi(mp.mpf(a) / mp.pi) for a in angles[:k]]
        z = mp.expjpi(mp.mpf(angles[k]) / mp.pi)
        direct = vandermonde_distance(z, zs, ctx)
        oracle = gram_distance_oracle(z, zs, ctx)
        rel = abs(direct - oracle) / max(abs(oracle), ctx.eps())
        reports.append(
            BoundReport(
                label="vandermonde-oracle",
                k=k,
                lhs=rel,
                rhs=tol,
                ratio=rel,
                satisfied=rel <= tol,
                context={"trial": trial},
            )
        )
    return reports


@dataclass(frozen=True)
class SandwichSweep:
    """Result of sweeping the variance sandwich over K for random setups.

    ``first_k`` per trial is the smallest K from which both bounds hold for
    every tested K' >= K (k_max + 1 when the last K still fails);
    ``threshold`` is the maximum over trials.
    """

    trials: tuple
    threshold: int
    reports: tuple


def sandwich_sweep(
    ctx: PrecisionContext,
    seed: int,
    trials: int = 20,
    k_min: int = 2,
    k_max: int = 25,
) -> SandwichSweep:
    """Sweep the sandwich bounds over K = k_min..k_max on random spectral
    kernels and designs, recording the empirical threshold K0."""
    rng = random.Random(seed)
    mp = ctx.mp
    trial_rows = []
    all_reports = []
    for trial in range(trials):
        a = rng.uniform(0.15, 0.6)
        c0 = rng.uniform(0.3, 1.2)
        kernel = SpectralPowerKernel(a=a, b=2, c0=c0)
        raw = _distinct_uniform(rng, k_max + 1, min_gap=1e-3)
        x, nodes = raw[0], raw[1:]
        last_fail = k_min - 1
        for k in range(k_min, k_max + 1):
            lower, upper = variance_sandwich_check(kernel, x, nodes[:k], ctx)
            all_reports.extend((lower, upper))
            if not (lower.satisfied and upper.satisfied):
                last_fail = k
        trial_rows.append(
            {
                "trial": trial,
                "a": a,
                "c0": c0,
                "first_k": last_fail + 1,
            }
        )
    threshold = max(row["first_k"] for row in trial_rows)
    return SandwichSweep(
        trials=tuple(trial_rows), threshold=threshold, reports=tuple(all_reports)
    )
