"""The scalar equation ``-u'' = 2B (e^u - 1)`` and its period map.

With ``u(0) = 0, u'(0) = alpha`` the solution oscillates between the two
roots ``u_- < 0 < u_+`` of ``e^u - 1 - u = alpha^2 / (4B)``.  The period is
computed from

    T_alpha = (alpha / B) * int_{-1}^{1} xi / (e^{u_xi} - 1) dxi / sqrt(1 - xi^2)

where ``u_xi`` solves ``e^u - 1 - u = alpha^2 xi^2 / (4B)`` with the sign of
``xi``.  The substitution ``xi = sin(theta)`` removes the endpoint
singularity and leaves an analytic integrand.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AccuracyError

_SERIES_CUTOFF = 0.05


def _q(u):
    """``2 (e^u - 1 - u) / u^2``, evaluated without cancellation near 0."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < _SERIES_CUTOFF
    us = u[small]
    # 2 * sum_{k>=0} u^k / (k+2)!
    acc = np.zeros_like(us)
    term = np.full_like(us, 1.0)
    for k in range(12):
        acc += term
        term = term * us / (k + 3)
    out[small] = acc
    ub = u[~small]
    out[~small] = 2.0 * (np.expm1(ub) - ub) / ub**2
    return out


def _g(u):
    """``e^u - 1 - u``."""
    u = np.asarray(u, dtype=float)
    return 0.5 * u * u * _q(u)


def _h(u):
    """Signed square root ``sign(u) sqrt(2 g(u)) = u sqrt(q(u))``."""
    return u * np.sqrt(_q(u))


def _dh(u):
    # h^2 = 2g  =>  h h' = g' = e^u - 1
    u = np.asarray(u, dtype=float)
    hu = _h(u)
    out = np.ones_like(u)
    nz = np.abs(u) > 1e-300
    out[nz] = np.expm1(u[nz]) / hu[nz]
    return out


def _solve_h(s):
    """Solve ``h(u) = s`` elementwise (``h`` increasing, ``h(0) = 0``)."""
    s = np.asarray(s, dtype=float)
    c = 0.5 * s * s
    # brackets: for u>=0, u <= h(u); for u<=0, -1-c <= u <= h(u)
    lo = np.where(s >= 0, 0.0, -1.0 - c)
    hi = np.where(s >= 0, s, s)
    lo = np.minimum(lo, hi)
    pos = s > 0
    # tighter upper bound on the positive branch: u <= log(1 + c + sqrt(2c))
    hi = np.where(pos, np.minimum(hi, np.log1p(c + np.sqrt(2 * c))), hi)
    u = np.where(pos, hi, lo)
    u = np.where(s == 0, 0.0, u)
    for _ in range(100):
        f = _h(u) - s
        lo = np.where(f < 0, u, lo)
        hi = np.where(f > 0, u, hi)
        step = f / _dh(u)
        un = u - step
        bad = (un <= lo) | (un >= hi) | ~np.isfinite(un)
        un = np.where(bad, 0.5 * (lo + hi), un)
        done = np.abs(un - u) <= 4e-16 * np.maximum(np.abs(un), 1e-300)
        u = un
        if np.all(done | (s == 0)):
            break
    return np.where(s == 0, 0.0, u)


def amplitude_bounds(alpha: float, B: float) -> tuple[float, float]:
    """Turning points ``(u_-, u_+)`` of the orbit with initial slope ``alpha``."""
    if not (alpha > 0 and B > 0):
        raise ValueError("alpha and B must be positive")
    s = alpha / np.sqrt(2.0 * B)
    u = _solve_h(np.array([-s, s]))
    return float(u[0]), float(u[1])


def u_of_xi(xi, alpha: float, B: float):
    """Signed root of ``e^u - 1 - u = alpha^2 xi^2 / (4B)``; monotone in ``xi``."""
    xi = np.asarray(xi, dtype=float)
    if np.any(np.abs(xi) > 1):
        raise ValueError("|xi| must not exceed 1")
    u = _solve_h(xi * alpha / np.sqrt(2.0 * B))
    return u if u.ndim else float(u)


def _integrand(theta, alpha, B):
    xi = np.sin(theta)
    u = _solve_h(xi * alpha / np.sqrt(2.0 * B))
    out = np.empty_like(xi)
    nz = u != 0
    out[nz] = xi[nz] / np.expm1(u[nz])
    out[~nz] = np.sqrt(2.0 * B) / alpha
    return out


def period_integral(alpha: float, B: float, n_nodes: int = 200, rtol: float = 1e-12,
                    max_nodes: int = 12800, return_estimate: bool = False):
    """Minimal period ``T_alpha`` by Gauss-Legendre quadrature in ``theta``.

    Starts at ``n_nodes`` and doubles until two consecutive rules agree to
    ``rtol``; if ``max_nodes`` is reached first, :class:`AccuracyError` is
    raised with the best estimate in the message.
    """
    if not (alpha > 0 and B > 0):
        raise ValueError("alpha and B must be positive")

    def quad(n):
        x, w = np.polynomial.legendre.leggauss(n)
        theta = 0.5 * np.pi * x
        return (alpha / B) * 0.5 * np.pi * np.dot(w, _integrand(theta, alpha, B))

    n = n_nodes
    coarse = quad(n)
    while True:
        fine = quad(2 * n)
        err = abs(fine - coarse) / abs(fine)
        if err <= rtol:
            break
        n *= 2
        if 2 * n > max_nodes:
            raise AccuracyError(f"period quadrature unresolved: estimate {fine!r}, "
                                f"relative change {err:.3g}")
        coarse = fine
    if return_estimate:
        return fine, err
    return fine


def small_amplitude_period(alpha: float, B: float) -> float:
    """Two-term expansion ``2 pi (2B)^(-1/2) (1 + alpha^2 / (48 B))``."""
    return 2 * np.pi / np.sqrt(2 * B) * (1 + alpha**2 / (48 * B))


def period_curve(a_min: float, a_max: float, n: int, B: float):
    alphas = np.geomspace(a_min, a_max, n)
    return alphas, np.array([period_integral(a, B) for a in alphas])


@dataclass
class PendulumSolution:
    alpha: float
    B: float
    u_minus: float
    u_plus: float
    T_alpha: float
    samples: np.ndarray | None = field(default=None, repr=False)
    energy_drift: float = 0.0
    crossings: np.ndarray | None = field(default=None, repr=False)


def energy(u, du, B):
    return 0.5 * du**2 + 2.0 * B * _g(u)


def solve_ode(alpha: float, B: float, t_end: float | None = None, dt: float | None = None,
              rtol: float = 1e-13, energy_tol: float = 1e-10) -> PendulumSolution:
    """Integrate the equation with DOP853 and estimate the period.

    The period is the mean spacing of upward zero crossings.  ``t_end``
    defaults to ten small-amplitude periods stretched by the large-amplitude
    growth; ``dt`` sets the sampling interval of the returned table.
    """
    if not (alpha > 0 and B > 0):
        raise ValueError("alpha and B must be positive")
    if t_end is None:
        t_end = 10.5 * max(2 * np.pi / np.sqrt(2 * B), alpha / B) * 1.2
    if dt is None:
        dt = t_end / 2000

    def rhs(t, y):
        return [y[1], -2.0 * B * np.expm1(y[0])]

    def upward(t, y):
        return y[0]
    upward.direction = 1.0

    t_eval = np.arange(0.0, t_end, dt)
    sol = solve_ivp(rhs, (0.0, t_end), [0.0, alpha], method="DOP853", rtol=rtol,
                    atol=1e-14 * max(1.0, alpha), t_eval=t_eval, events=upward)
    if not sol.success:
        raise AccuracyError(sol.message)
    u, du = sol.y
    e0 = 0.5 * alpha**2
    drift = float(np.max(np.abs(energy(u, du, B) - e0)) / e0)
    if drift > energy_tol:
        raise AccuracyError(f"energy drift {drift:.3g} exceeds {energy_tol:.3g}")
    tc = sol.t_events[0]
    tc = tc[tc > 1e-9 * t_end]
    if tc.size < 1:
        raise AccuracyError("no complete period inside the integration window")
    # t=0 is itself an upward crossing
    crossings = np.concatenate([[0.0], tc])
    T = (crossings[-1] - crossings[0]) / (crossings.size - 1)
    um, up = amplitude_bounds(alpha, B)
    return PendulumSolution(alpha=alpha, B=B, u_minus=um, u_plus=up, T_alpha=float(T),
                            samples=np.column_stack([sol.t, u, du]), energy_drift=drift,
                            crossings=crossings)
