"""Stationary covariance kernels and their spectral machinery.

Three variants are supported, all even, strictly positive definite, and
scaled by an overall covariance factor gamma > 0:

* ``GaussianKernel(a)``:  G(x) = gamma / (2 sqrt(pi a)) * exp(-x^2 / (4a)),
  with spectral density gamma * exp(-a t^2) / (2 pi).
* ``SpectralPowerKernel(a, b, c0)``: defined through its spectral density
  gamma * c0 * exp(-a |t|^b) with b > 1 strictly; the covariance is the
  Fourier integral of the density (closed form when b = 2, high-precision
  quadrature otherwise).
* ``OrnsteinUhlenbeckKernel(theta)``:  G(x) = gamma * exp(-theta |x|), the
  rough contrast case with polynomially decaying density
  gamma * theta / (pi (theta^2 + t^2)).

The Fourier convention throughout is G(x) = integral of Ghat(t) e^{itx} dt.

Kernel parameters are stored either as decimal strings (or the named
constant ``sqrt_pi``), which resolve at whatever working precision a context
asks for, or as exact mpf values produced internally.  Kernels are immutable
values and safe to share across threads.

The spectral-power family also carries the Legendre-transform machinery used
by the conditional-variance analysis: writing the full density as
``exp(-S(|t|))`` with S(t) = a t^b - ln(gamma c0), and T(s) = S(e^s), the
convex conjugate T*(q) = max_s (q s - T(s)) yields the collapse rate
function F(K) = T*(2K+1) - (2K+1) ln K.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import EILabError, MaximizationDiverged, VariantUnsupported
from .precision import PrecisionContext, raw_context
from .quadrature import integrate

_NAMED_CONSTANTS = {
    "sqrt_pi": lambda mp: mp.sqrt(mp.pi),
}


def resolve_param(value, mp):
    """Resolve a kernel parameter to a working-precision real.

    Accepts decimal strings, the named constant ``sqrt_pi``, python ints,
    and mpf values (which convert exactly at any precision).
    """
    if isinstance(value, str):
        fn = _NAMED_CONSTANTS.get(value)
        if fn is not None:
            return fn(mp)
        try:
            return mp.mpf(value)
        except ValueError:
            raise EILabError(f"cannot parse kernel parameter {value!r}")
    return mp.mpf(value)


def _positive(name, value):
    check = raw_context(30)
    v = resolve_param(value, check)
    if not v > 0:
        raise EILabError(f"kernel parameter {name} must be positive, got {value!r}")


@dataclass(frozen=True)
class GaussianKernel:
    a: Union[str, object] = "0.25"
    gamma: Union[str, object] = "1"

    def __post_init__(self):
        _positive("a", self.a)
        _positive("gamma", self.gamma)

    variant = "gaussian"


@dataclass(frozen=True)
class SpectralPowerKernel:
    a: Union[str, object]
    b: Union[str, object]
    c0: Union[str, object] = "1"
    gamma: Union[str, object] = "1"

    def __post_init__(self):
        _positive("a", self.a)
        _positive("c0", self.c0)
        _positive("gamma", self.gamma)
        check = raw_context(30)
        if not resolve_param(self.b, check) > 1:
            raise VariantUnsupported(
                f"spectral-power kernel requires b > 1 strictly, got {self.b!r}"
            )

    variant = "spectral"


@dataclass(frozen=True)
class OrnsteinUhlenbeckKernel:
    theta: Union[str, object] = "1"
    gamma: Union[str, object] = "1"

    def __post_init__(self):
        _positive("theta", self.theta)
        _positive("gamma", self.gamma)

    variant = "ou"


KernelSpec = Union[GaussianKernel, SpectralPowerKernel, OrnsteinUhlenbeckKernel]

# Resolved per-(kernel, dps) numeric parameters; kernels are immutable so the
# cache is write-once per key.
_PARAM_CACHE: dict = {}


def _params(kernel: KernelSpec, mp):
    key = (kernel, mp.dps)
    got = _PARAM_CACHE.get(key)
    if got is not None:
        return got
    if isinstance(kernel, GaussianKernel):
        a = resolve_param(kernel.a, mp)
        gamma = resolve_param(kernel.gamma, mp)
        pref = gamma / (2 * mp.sqrt(mp.pi * a))
        got = (a, gamma, pref, 4 * a)
    elif isinstance(kernel, SpectralPowerKernel):
        a = resolve_param(kernel.a, mp)
        b = resolve_param(kernel.b, mp)
        c0 = resolve_param(kernel.c0, mp)
        gamma = resolve_param(kernel.gamma, mp)
        got = (a, b, c0, gamma)
    else:
        theta = resolve_param(kernel.theta, mp)
        gamma = resolve_param(kernel.gamma, mp)
        got = (theta, gamma)
    _PARAM_CACHE[key] = got
    return got


def gaussian_as_spectral_power(kernel: GaussianKernel, ctx: PrecisionContext):
    """The spectral-power form of a Gaussian kernel: b = 2, c0 = gamma/(2 pi).

    The amplitude is resolved at the context's working precision and stored
    exactly, so the converted kernel feeds the Legendre machinery with the
    same normalization the closed-form covariance uses.
    """
    mp = ctx.mp
    a, gamma, _, _ = _params(kernel, mp)
    return SpectralPowerKernel(a=a, b=2, c0=gamma / (2 * mp.pi), gamma=1)


def _power_tail_cutoff(mp, a, b, log_amplitude, budget_dps):
    """Smallest T with amplitude * exp(-a T^b) below 10**-budget_dps."""
    target = budget_dps * mp.log(10) + log_amplitude
    if target <= 0:
        return mp.mpf(1)
    return (target / a) ** (1 / b)


def covariance(kernel: KernelSpec, x, ctx: PrecisionContext):
    """Covariance G(x) of the stationary kernel at lag x.

    Closed form for the Gaussian and Ornstein-Uhlenbeck variants and for the
    spectral-power family at b = 2; otherwise the Fourier integral of the
    density, truncated where the density falls below the working roundoff
    (the super-exponential tail makes the cutoff explicit).
    """
    mp = ctx.mp
    x = mp.mpf(x)
    if isinstance(kernel, GaussianKernel):
        _, _, pref, four_a = _params(kernel, mp)
        return pref * mp.exp(-x * x / four_a)
    if isinstance(kernel, OrnsteinUhlenbeckKernel):
        theta, gamma = _params(kernel, mp)
        return gamma * mp.exp(-theta * abs(x))
    a, b, c0, gamma = _params(kernel, mp)
    if b == 2:
        return gamma * c0 * mp.sqrt(mp.pi / a) * mp.exp(-x * x / (4 * a))
    amp = gamma * c0
    cutoff = _power_tail_cutoff(mp, a, b, mp.log(amp), ctx.working_dps + 10)
    integrand = lambda t: amp * mp.exp(-a * t**b) * mp.cos(t * x)
    return 2 * integrate(ctx, integrand, [0, cutoff], floor=amp)


def spectral_density(kernel: KernelSpec, t, ctx: PrecisionContext):
    """Spectral density Ghat(t); strictly positive for every variant."""
    mp = ctx.mp
    t = mp.mpf(t)
    if isinstance(kernel, GaussianKernel):
        a, gamma, _, _ = _params(kernel, mp)
        return gamma * mp.exp(-a * t * t) / (2 * mp.pi)
    if isinstance(kernel, OrnsteinUhlenbeckKernel):
        theta, gamma = _params(kernel, mp)
        return gamma * theta / (mp.pi * (theta * theta + t * t))
    a, b, c0, gamma = _params(kernel, mp)
    return gamma * c0 * mp.exp(-a * abs(t) ** b)


def covariance_by_quadrature(kernel: KernelSpec, x, ctx: PrecisionContext):
    """Fourier-pair cross-check: quadrature of the spectral density.

    Independent of ``covariance`` for the closed-form variants; used by the
    consistency tests.  The Ornstein-Uhlenbeck density decays only
    polynomially, so its integral runs over the full half line.
    """
    mp = ctx.mp
    x = mp.mpf(x)
    f = lambda t: spectral_density(kernel, t, ctx) * mp.cos(t * x)
    if isinstance(kernel, OrnsteinUhlenbeckKernel):
        theta, gamma = _params(kernel, mp)
        if x == 0:
            return 2 * integrate(ctx, f, [0, theta, mp.inf], floor=gamma)
        # The density decays only polynomially, so the oscillatory integral
        # needs series acceleration over half-periods instead of tanh-sinh.
        return 2 * mp.quadosc(f, [0, mp.inf], period=2 * mp.pi / abs(x))
    if isinstance(kernel, GaussianKernel):
        a, gamma, _, _ = _params(kernel, mp)
        amp = gamma / (2 * mp.pi)
        cutoff = _power_tail_cutoff(mp, a, 2, mp.log(amp), ctx.working_dps + 10)
    else:
        a, b, c0, gamma = _params(kernel, mp)
        amp = gamma * c0
        cutoff = _power_tail_cutoff(mp, a, b, mp.log(amp), ctx.working_dps + 10)
    return 2 * integrate(ctx, f, [0, cutoff], floor=amp)


def _require_spectral_power(kernel):
    if not isinstance(kernel, SpectralPowerKernel):
        raise VariantUnsupported(
            "this operation is defined for the spectral-power family only "
            f"(got {type(kernel).__name__})"
        )


def spectral_exponent(kernel: SpectralPowerKernel, t, ctx: PrecisionContext):
    """S(t) = a t^b - ln(gamma c0), i.e. Ghat(t) = exp(-S(|t|))."""
    _require_spectral_power(kernel)
    mp = ctx.mp
    t = mp.mpf(t)
    if t < 0:
        raise EILabError("spectral_exponent expects t >= 0")
    a, b, c0, gamma = _params(kernel, mp)
    return a * t**b - mp.log(gamma * c0)


def spectral_exponent_logscale(kernel: SpectralPowerKernel, s, ctx: PrecisionContext):
    """T(s) = S(e^s) = a e^{bs} - ln(gamma c0)."""
    _require_spectral_power(kernel)
    mp = ctx.mp
    s = mp.mpf(s)
    a, b, c0, gamma = _params(kernel, mp)
    return a * mp.exp(b * s) - mp.log(gamma * c0)


@dataclass(frozen=True)
class LegendreProfile:
    """One evaluation of the convex conjugate T*.

    ``s_star`` maximizes q s - T(s); ``value`` is T*(q) by the closed form
    and ``numeric_value`` the independent golden-section maximization both
    agree with to relative 10**-(digits/2).
    """

    q: object
    s_star: object
    value: object
    numeric_value: object


def _golden_max(mp, phi, lo, hi, iterations):
    inv = (mp.sqrt(5) - 1) / 2
    a, b = mp.mpf(lo), mp.mpf(hi)
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(iterations):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = phi(d)
        else:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = phi(c)
    s = (a + b) / 2
    return s, phi(s)


def legendre_conjugate(kernel: SpectralPowerKernel, q, ctx: PrecisionContext):
    """T*(q) = max_s (q s - T(s)) for the spectral-power family.

    Returns the closed form s* = ln(q/(ab))/b and
    T*(q) = q/b (ln(q/(ab)) - 1) + ln(gamma c0), after verifying the value
    against a derivative-free golden-section maximization of q s - T(s).
    """
    _require_spectral_power(kernel)
    mp = ctx.mp
    q = mp.mpf(q)
    if not q > 0:
        raise EILabError("legendre_conjugate requires q > 0")
    a, b, c0, gamma = _params(kernel, mp)
    log_amp = mp.log(gamma * c0)
    s_star = mp.log(q / (a * b)) / b
    value = q / b * (mp.log(q / (a * b)) - 1) + log_amp

    phi = lambda s: q * s - (a * mp.exp(b * s) - log_amp)
    # Bracket the concave maximum by expanding until phi turns down on both
    # sides, without consulting the closed form.
    hi = mp.mpf(1)
    while phi(hi) >= phi(hi - 1):
        hi = hi * 2
        if hi > 10**9:
            raise MaximizationDiverged("no right bracket for the conjugate")
    lo = mp.mpf(-1)
    while phi(lo) >= phi(lo + 1):
        lo = lo * 2
        if lo < -(10**9):
            raise MaximizationDiverged("no left bracket for the conjugate")
    # Shrink the bracket to ~10^-(0.55 digits); near the maximum the value
    # error is quadratic in the bracket width, which lands it well below the
    # 10^-(digits/2) agreement target.
    width_digits = int(ctx.digits * 0.55) + 10
    shrink_per_iter = mp.log(10) / mp.log(1 / ((mp.sqrt(5) - 1) / 2))
    iterations = int(mp.ceil(width_digits * shrink_per_iter)) + 4
    _, numeric = _golden_max(mp, phi, lo - 1, hi + 1, iterations)

    tol = ctx.tol(-(ctx.digits // 2)) * max(abs(value), mp.mpf(1))
    if abs(numeric - value) > tol:
        raise MaximizationDiverged(
            "closed-form conjugate disagrees with numeric maximization: "
            f"{mp.nstr(value, 20)} vs {mp.nstr(numeric, 20)}"
        )
    return LegendreProfile(q=q, s_star=s_star, value=value, numeric_value=numeric)


def rate_function(kernel: SpectralPowerKernel, K: int, ctx: PrecisionContext):
    """Collapse rate F(K) = T*(2K+1) - (2K+1) ln K, K >= 2."""
    if K < 2:
        raise EILabError(f"rate_function requires K >= 2, got {K}")
    mp = ctx.mp
    profile = legendre_conjugate(kernel, 2 * K + 1, ctx)
    return profile.value - (2 * K + 1) * mp.log(K)
