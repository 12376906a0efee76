"""Small numerical helpers shared by the closed-form and generic paths."""

from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .errors import SingularityError

QUAD_TOL = 1e-12


@lru_cache(maxsize=None)
def central_weights(order, half_width):
    """Weights of the (2*half_width+1)-point central stencil for d^order/dt^order."""
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    n = offsets.size
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    weights = np.linalg.solve(vander, rhs)
    weights.setflags(write=False)
    return weights


def derivative(f, t, h, order=1, half_width=4):
    """Central finite-difference derivative of a vectorized callable.

    The default 9-point stencil is eighth-order accurate, so ``h`` can be a
    sizeable fraction of the shortest time scale of ``f``.
    """
    t = np.asarray(t, dtype=float)
    weights = central_weights(order, half_width)
    total = 0.0
    for k, w in zip(range(-half_width, half_width + 1), weights):
        if w != 0.0:
            total = total + w * f(t + k * h)
    return total / h**order


def quad_segment(f, a, b, epsabs=QUAD_TOL):
    """Adaptive quadrature of a real or complex integrand over [a, b]."""
    if a == b:
        return 0.0
    val, _ = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsabs, limit=500, complex_func=True)
    return val


def cumulative_quad(f, t, epsabs=QUAD_TOL, max_span=None):
    """Integral of ``f`` from 0 to every entry of ``t``.

    Consecutive sorted sample times are integrated piecewise and accumulated,
    which keeps each adaptive quadrature on a short interval. ``max_span``
    further splits long intervals (useful for sharply peaked integrands).
    """
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    nodes = np.unique(np.concatenate(([0.0], flat)))
    if max_span is not None and nodes.size:
        lo, hi = nodes[0], nodes[-1]
        extra = np.arange(0.0, hi, max_span)
        extra = np.concatenate((extra, -np.arange(max_span, -lo + max_span, max_span)))
        nodes = np.unique(np.concatenate((nodes, extra[(extra >= lo) & (extra <= hi)])))
    zero = np.searchsorted(nodes, 0.0)
    pieces = np.array(
        [quad_segment(f, a, b, epsabs) for a, b in zip(nodes[:-1], nodes[1:])], dtype=complex
    )
    cum = np.zeros(nodes.size, dtype=complex)
    cum[1:] = np.cumsum(pieces)
    cum -= cum[zero]
    out = cum[np.searchsorted(nodes, flat)]
    if np.all(out.imag == 0.0):
        out = out.real
    return out.reshape(t.shape) if t.ndim else out[0]


def check_nonvanishing(f, t_end, n=4001, floor=1e-12, what="function"):
    """Scan ``f`` on [0, t_end] and raise SingularityError at the first near-zero."""
    grid = np.linspace(0.0, float(t_end), n)
    mags = np.abs(f(grid))
    bad = np.flatnonzero(~(mags > floor))
    if bad.size:
        where = grid[bad[0]]
        raise SingularityError(f"{what} vanishes near t={where:.6g}", location=where)
    # a zero between samples shows up as a V-shaped dip whose bottom is no
    # deeper than the slope times the spacing; refine those
    mid, left, right = mags[1:-1], mags[:-2], mags[2:]
    slope = np.maximum(left - mid, right - mid)
    dips = np.flatnonzero((mid < left) & (mid < right) & (mid <= 2 * slope)) + 1
    # the minimizer only locates x to ~sqrt(eps), so compare the depth of the
    # dip with the local slope rather than with an absolute floor
    dt = grid[1] - grid[0] if n > 1 else 0.0
    for i in dips:
        res = optimize.minimize_scalar(
            lambda s: abs(complex(f(np.float64(s)))),
            bounds=(grid[i - 1], grid[i + 1]),
            method="bounded",
            options={"xatol": 1e-14 * max(1.0, abs(t_end))},
        )
        slope = abs(complex(f(np.float64(res.x + dt))) - complex(f(np.float64(res.x - dt)))) / 2
        if res.fun < max(floor, 1e-6 * slope):
            raise SingularityError(f"{what} vanishes near t={res.x:.6g}", location=float(res.x))


def continuous_log(f, t, dense=4001, anchor_log=None):
    """Branch-continuous log of a nonvanishing complex function along [0, t].

    The argument is accumulated on a dense grid from 0 to max(t); the returned
    value at each t is the principal log shifted by the integer number of turns
    found along that path. ``anchor_log`` fixes the branch at t=0 (defaults to
    the principal value there).
    """
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    lo = min(float(flat.min()), 0.0) if flat.size else 0.0
    hi = max(float(flat.max()), 0.0) if flat.size else 0.0
    grid = np.unique(np.concatenate((np.linspace(lo, hi, dense), flat, [0.0])))
    values = np.asarray(f(grid), dtype=complex)
    if np.any(values == 0) or not np.all(np.isfinite(values)):
        bad = grid[np.flatnonzero((values == 0) | ~np.isfinite(values))[0]]
        raise SingularityError("log argument vanishes or diverges", location=bad)
    phase = np.unwrap(np.angle(values))
    zero = np.searchsorted(grid, 0.0)
    base = np.angle(values[zero]) if anchor_log is None else np.imag(anchor_log)
    phase += base - phase[zero]
    idx = np.searchsorted(grid, flat)
    out = np.log(np.abs(values[idx])) + 1j * phase[idx]
    return out.reshape(t.shape) if t.ndim else out[0]


def unwrapped_atan(k, x):
    """Continuous branch of arg(cos x + i k sin x) for real k != 0.

    Equals arctan(k tan x) on (-π/2, π/2) and gains sign(k)·π per half turn of x,
    so it is smooth through the poles of tan. For k = 0 the value jumps by π
    at the zeros of cos x, which keeps exp(i·arg) equal to the sign of cos x.
    """
    x = np.asarray(x, dtype=float)
    n = np.round(x / np.pi)
    xr = x - n * np.pi
    turn = np.sign(k) if k != 0 else 1.0
    return np.arctan2(k * np.sin(xr), np.cos(xr)) + turn * n * np.pi
