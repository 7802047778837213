"""Thin wrapper around mpmath quadrature with explicit convergence checks."""

from __future__ import annotations

from .errors import QuadratureNotConverged
from .precision import PrecisionContext


def integrate(ctx: PrecisionContext, f, points, floor=0):
    """Integrate ``f`` over the interval(s) given by ``points``.

    Uses tanh-sinh quadrature at the context's working precision.  The
    result must carry at least digits/2 correct digits: mpmath's error
    estimate is compared against max(|value|, floor) * 10**-(digits//2),
    and ``QuadratureNotConverged`` is raised past that.  Every tolerance
    advertised by the lab's oracles is digits/4 or looser, so a value that
    passes here is good for all of them; a genuinely stalling integral
    reports estimates orders of magnitude above this line.  ``floor`` lets
    callers name the absolute scale below which the value is as good as
    zero (for integrals whose true value may vanish).
    """
    mp = ctx.mp
    value, err = mp.quad(f, points, error=True, maxdegree=12)
    scale = max(abs(value), mp.mpf(floor))
    if scale == 0:
        scale = mp.mpf(1)
    if err > scale * ctx.tol(-(ctx.digits // 2)):
        raise QuadratureNotConverged(
            f"quadrature error estimate {mp.nstr(err, 4)} exceeds tolerance "
            f"for value {mp.nstr(value, 8)}"
        )
    return value
