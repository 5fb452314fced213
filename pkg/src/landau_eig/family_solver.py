"""Periodic solution families of the coupled exponential system.

We look for even ``T``-periodic ``v_1..v_m`` and a field correction ``tau``
with

    -v_j'' = B0 (1 + eps^2 tau) sum_mu C_{j mu} (e^{v_mu} - 1),

written as ``v_j = eps a_j w* + eps^2 w_j + eps^3 b_j w*`` where
``w* = 2 cos(omega t)``, ``a`` is the chosen unit eigenvector of ``C``,
``(b, a) = 0`` and each ``w_j`` has no first harmonic.  Projecting onto the
first harmonic gives a bordered linear system for ``(tau, b)``; projecting
onto the rest gives an off-resonant linear ODE for ``w``.  Both are iterated
to a fixed point with the nonlinear remainders recomputed each sweep.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import periodic_fn as pf
from .cmatrix import CMatrixBundle
from .errors import NoContractionError, NonConvergenceError, ResonanceError
from .pendulum import _g
from .periodic_fn import PeriodicFn

logger = logging.getLogger(__name__)

RESONANCE_COND = 1e12


@dataclass
class LeadingTerms:
    W: list
    W_tilde: list
    tau0: float
    b0: np.ndarray
    f0: np.ndarray


@dataclass
class FamilySolution:
    epsilon: float
    tau: float
    b: np.ndarray
    w: list
    v: list
    B_eff: float
    iterations: int
    final_delta: float
    increments: list = field(default_factory=list)
    m: int = 1
    B0: float = 1.0
    eig_index: int = 0
    omega: float = 1.0

    @property
    def frak_w(self) -> list:
        """``w_j + eps b_j w*``, the correction to the leading harmonic."""
        ws = PeriodicFn.w_star(self.omega)
        return [wj + self.epsilon * bj * ws for wj, bj in zip(self.w, self.b)]

    def contraction_ratios(self) -> list:
        inc = self.increments
        return [inc[i + 1] / inc[i] for i in range(len(inc) - 1) if inc[i] > 0]

    def to_dict(self) -> dict:
        return {
            "schema": "1",
            "kind": "family",
            "m": self.m,
            "B0": self.B0,
            "eig_index": self.eig_index,
            "omega": self.omega,
            "epsilon": self.epsilon,
            "tau": self.tau,
            "b": list(map(float, self.b)),
            "B_eff": self.B_eff,
            "iterations": self.iterations,
            "final_delta": self.final_delta,
            "increments": list(map(float, self.increments)),
            "w": [f.coeffs.tolist() for f in self.w],
            "v": [f.coeffs.tolist() for f in self.v],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FamilySolution":
        om = d["omega"]
        return cls(epsilon=d["epsilon"], tau=d["tau"], b=np.array(d["b"]),
                   w=[PeriodicFn(om, c) for c in d["w"]],
                   v=[PeriodicFn(om, c) for c in d["v"]], B_eff=d["B_eff"],
                   iterations=d["iterations"], final_delta=d["final_delta"],
                   increments=d.get("increments", []), m=d["m"], B0=d["B0"],
                   eig_index=d["eig_index"], omega=om)


def _mode_matrices(n: np.ndarray, bundle: CMatrixBundle) -> np.ndarray:
    m = bundle.m
    C = bundle.C.astype(float)
    return (n[:, None, None] ** 2) * bundle.omega**2 * np.eye(m)[None] - bundle.B0 * C[None]


def linear_offresonant_solve(F: list, bundle: CMatrixBundle) -> list:
    """Solve ``-G_j'' - B0 sum C_{j mu} G_mu = B0 F_j`` with ``G`` free of the first harmonic.

    Mode by mode this is ``(n^2 omega^2 - B0 C) g_n = B0 f_n`` for ``n != 1``.
    """
    m = bundle.m
    if len(F) != m:
        raise ValueError(f"expected {m} functions, got {len(F)}")
    omega = bundle.omega
    for j, f in enumerate(F):
        if f.coef(1) != 0.0:
            raise ValueError(f"F[{j}] has a first-harmonic component {f.coef(1)!r}")
    size = max(f.coeffs.size for f in F)
    rhs = np.stack([f.padded(size) for f in F], axis=1) * bundle.B0
    n = np.arange(size)
    A = _mode_matrices(n, bundle)
    keep = n != 1
    cond = np.linalg.cond(A[keep])
    if np.any(cond > RESONANCE_COND):
        bad = int(n[keep][np.argmax(cond)])
        raise ResonanceError(bad, float(cond.max()))
    g = np.zeros_like(rhs)
    g[keep] = np.linalg.solve(A[keep], rhs[keep][..., None])[..., 0]
    return [PeriodicFn(omega, g[:, j]) for j in range(m)]


def bordered_solve(f, bundle: CMatrixBundle) -> tuple[float, np.ndarray]:
    """Unique ``(tau, b)`` with ``(b, a) = 0`` and ``(omega^2 - B0 C) b - tau omega^2 a = B0 f``."""
    m = bundle.m
    f = np.asarray(f, dtype=float).reshape(m)
    a = bundle.a
    w2 = bundle.omega**2
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = w2 * np.eye(m) - bundle.B0 * bundle.C
    K[:m, m] = -w2 * a
    K[m, :m] = a
    rhs = np.concatenate([bundle.B0 * f, [0.0]])
    sol = np.linalg.solve(K, rhs)
    return float(sol[m]), sol[:m]


def leading_terms(bundle: CMatrixBundle) -> LeadingTerms:
    C = bundle.C.astype(float)
    a = bundle.a
    om = bundle.omega
    ws = PeriodicFn.w_star(om)
    ws2 = ws * ws
    ws3 = ws2 * ws
    src = C @ (a**2) / 2.0
    W = linear_offresonant_solve([s * ws2 for s in src], bundle)
    cubic = C @ (a**3) / 6.0
    W_tilde = []
    for j in range(bundle.m):
        acc = cubic[j] * ws3
        for mu in range(bundle.m):
            if C[j, mu] != 0:
                acc = acc + (C[j, mu] * a[mu]) * (ws * W[mu])
        W_tilde.append(acc)
    f0 = np.array([0.5 * Wt.coef(1) for Wt in W_tilde])
    tau0, b0 = bordered_solve(f0, bundle)
    return LeadingTerms(W=W, W_tilde=W_tilde, tau0=tau0, b0=b0, f0=f0)


def _poly_mul(p: list, q: list) -> list:
    out = [None] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for k, qk in enumerate(q):
            term = pi * qk
            out[i + k] = term if out[i + k] is None else out[i + k] + term
    return out


def _exp_expansion(vt: list, eps: float):
    """Split ``e^{eps vt} - 1`` with ``vt = vt0 + eps vt1 + eps^2 vt2``.

    Returns ``(poly, tail)`` where ``poly[k]`` is the exact coefficient of
    ``eps^k`` in ``eps vt + (eps vt)^2/2 + (eps vt)^3/6`` and ``tail`` is
    ``vt^4 phi_4(eps vt)`` so that the remaining part equals ``eps^4 tail``.
    """
    om = vt[0].omega
    zero = PeriodicFn.zero(om)
    sq = _poly_mul(vt, vt)
    cu = _poly_mul(sq, vt)
    poly = [zero for _ in range(1 + len(cu) + 2)]
    for i, c in enumerate(vt):
        poly[i + 1] = poly[i + 1] + c
    for i, c in enumerate(sq):
        poly[i + 2] = poly[i + 2] + c / 2.0
    for i, c in enumerate(cu):
        poly[i + 3] = poly[i + 3] + c / 6.0
    vt_eps = vt[0] + eps * vt[1] + eps**2 * vt[2]
    v = eps * vt_eps
    tail = (vt_eps ** 4) * pf.phi(v, 4)
    return poly, tail


def remainders(epsilon: float, tau: float, b, w: list, bundle: CMatrixBundle):
    """Remainders ``F0`` (first-harmonic coefficients) and ``F1`` of the projected system.

    With ``G_j = (1 + eps^2 tau) sum_mu C_{j mu} (e^{v_mu} - 1)``::

        F1_j = eps^-3 [P' G_j - eps^2 sum C w - eps^2/2 sum C a^2 w*^2]
        F0_j = eps^-4 [P G_j - eps sum C a w* - eps^3 (sum C b + tau sum C a) w*
                       - eps^3 sum C a P(w* w) - eps^3/6 sum C a^3 P(w*^3)]

    The divisions are exact coefficient shifts of an ``eps`` polynomial, so
    ``eps = 0`` is allowed.
    """
    m = bundle.m
    C = bundle.C.astype(float)
    a = bundle.a
    b = np.asarray(b, dtype=float)
    om = bundle.omega
    eps = float(epsilon)
    ws = PeriodicFn.w_star(om)
    polys, tails = [], []
    for mu in range(m):
        poly, tail = _exp_expansion([a[mu] * ws, w[mu], b[mu] * ws], eps)
        polys.append(poly)
        tails.append(tail)
    deg = len(polys[0])
    F0 = np.zeros(m)
    F1 = []
    scale = 1.0 + eps**2 * tau
    for j in range(m):
        g = [PeriodicFn.zero(om) for _ in range(deg + 2)]
        t = PeriodicFn.zero(om)
        for mu in range(m):
            if C[j, mu] == 0:
                continue
            for k in range(deg):
                g[k] = g[k] + C[j, mu] * polys[mu][k]
                g[k + 2] = g[k + 2] + (C[j, mu] * tau) * polys[mu][k]
            t = t + C[j, mu] * tails[mu]
        high3 = pf.linear_combination([eps ** (k - 3) for k in range(3, deg + 2)], g[3:])
        F1.append(pf.project_Yprime(high3 + (eps * scale) * t))
        high4 = pf.linear_combination([eps ** (k - 4) for k in range(4, deg + 2)], g[4:])
        F0[j] = (high4 + scale * t).coef(1)
    return F0, F1


def _first_harmonic_pairing(bundle, F2, F0):
    """First-harmonic coefficients of ``F3_j = sum C_{j mu} a_mu w* F2_mu + F0_j``."""
    C = bundle.C.astype(float)
    a = bundle.a
    ws = PeriodicFn.w_star(bundle.omega)
    out = np.array(F0, dtype=float)
    for j in range(bundle.m):
        for mu in range(bundle.m):
            if C[j, mu] != 0:
                out[j] += C[j, mu] * a[mu] * (ws * F2[mu]).coef(1)
    return out


def _assemble_v(eps, bundle, b, w):
    ws = PeriodicFn.w_star(bundle.omega)
    return [(eps * bundle.a[j]) * ws + eps**2 * w[j] + (eps**3 * b[j]) * ws
            for j in range(bundle.m)]


def iterate_family(epsilon: float, bundle: CMatrixBundle, tol: float = 1e-13,
                   max_iter: int = 200, lead: LeadingTerms | None = None) -> FamilySolution:
    """Fixed-point iteration for ``(tau, b, w)`` at a given ``epsilon``.

    Stops once ``|d tau| + sum |d b| + sum ||d w||_C < tol``.  Raises
    :class:`NoContractionError` after three consecutive non-decreasing
    increments and :class:`NonConvergenceError` after ``max_iter`` sweeps.
    """
    eps = float(epsilon)
    if lead is None:
        lead = leading_terms(bundle)
    tau, b, w = lead.tau0, lead.b0.copy(), list(lead.W)
    increments = []
    bad = 0
    for it in range(1, max_iter + 1):
        F0, F1 = remainders(eps, tau, b, w, bundle)
        F2 = linear_offresonant_solve(F1, bundle)
        f3 = _first_harmonic_pairing(bundle, F2, F0)
        tau_n, b_n = bordered_solve(lead.f0 + 0.5 * eps * f3, bundle)
        w_n = [lead.W[j] + eps * F2[j] for j in range(bundle.m)]
        delta = abs(tau_n - tau) + float(np.abs(b_n - b).sum()) + \
            sum(pf.norm_C(w_n[j] - w[j]) for j in range(bundle.m))
        tau, b, w = tau_n, b_n, w_n
        increments.append(delta)
        logger.debug("eps=%g iter=%d delta=%.3e tau=%.16g", eps, it, delta, tau)
        if delta < tol:
            break
        if len(increments) > 1 and delta >= increments[-2]:
            bad += 1
            if bad >= 3:
                raise NoContractionError(f"no contraction at eps={eps}: {increments[-4:]}")
        else:
            bad = 0
    else:
        raise NonConvergenceError(f"eps={eps}: no convergence in {max_iter} iterations "
                                  f"(last increment {increments[-1]:.3g})")
    v = _assemble_v(eps, bundle, b, w)
    return FamilySolution(epsilon=eps, tau=float(tau), b=b, w=w, v=v,
                          B_eff=bundle.B0 * (1 + eps**2 * tau), iterations=len(increments),
                          final_delta=increments[-1], increments=increments, m=bundle.m,
                          B0=bundle.B0, eig_index=bundle.chosen_index, omega=bundle.omega)


def residual_check(solution: FamilySolution, bundle: CMatrixBundle) -> float:
    """``max_j || -v_j'' - B_eff sum C (e^{v_mu} - 1) ||_C``."""
    C = bundle.C.astype(float)
    ev = [pf.exp_remainder(vj, 0) for vj in solution.v]
    worst = 0.0
    for j in range(bundle.m):
        r = -pf.second_derivative(solution.v[j])
        for mu in range(bundle.m):
            if C[j, mu] != 0:
                r = r - (solution.B_eff * C[j, mu]) * ev[mu]
        worst = max(worst, pf.norm_C(r))
    return worst


def mean_exp_residual(solution: FamilySolution) -> float:
    """``max_mu |mean(e^{v_mu} - 1)|``; zero for an exact solution."""
    return max(abs(pf.mean(pf.exp_remainder(vj, 0))) for vj in solution.v)


def contracts(epsilon: float, bundle: CMatrixBundle, ratio: float = 0.5, start: int = 2,
              lead: LeadingTerms | None = None) -> bool:
    """Whether the iteration converges with increment ratios ``<= ratio`` after ``start``."""
    try:
        sol = iterate_family(epsilon, bundle, lead=lead, max_iter=200)
    except (NoContractionError, NonConvergenceError, ResonanceError, ArithmeticError):
        return False
    r = sol.contraction_ratios()[start:]
    return all(x <= ratio for x in r)


def estimate_radius(bundle: CMatrixBundle, guess: float = 0.2, rel_tol: float = 0.02,
                    max_radius: float = 5.0) -> float:
    """Empirical radius of contraction, by expansion then bisection on ``epsilon``."""
    lead = leading_terms(bundle)
    lo, hi = 0.0, guess
    while contracts(hi, bundle, lead=lead):
        lo, hi = hi, 2 * hi
        if hi > max_radius:
            return lo
    while hi - lo > rel_tol * max(hi, 1e-12):
        mid = 0.5 * (lo + hi)
        if contracts(mid, bundle, lead=lead):
            lo = mid
        else:
            hi = mid
    return lo


def family_sweep(eps_grid, bundle: CMatrixBundle, tol: float = 1e-13) -> list[dict]:
    lead = leading_terms(bundle)
    rows = []
    for eps in eps_grid:
        sol = iterate_family(eps, bundle, tol=tol, lead=lead)
        rows.append({"epsilon": float(eps), "tau": sol.tau, "B_eff": sol.B_eff,
                     "residual": residual_check(sol, bundle), "iterations": sol.iterations})
    return rows


def pendulum_slope(solution: FamilySolution) -> float:
    """Initial slope ``alpha`` of the ``m = 1`` orbit through its zero.

    Uses energy conservation at ``t = 0`` where ``v'(0) = 0``:
    ``alpha^2 = 4 B (e^{v(0)} - 1 - v(0))``.
    """
    v0 = float(pf.evaluate(solution.v[0], 0.0))
    return math.sqrt(4.0 * solution.B_eff * float(_g(v0)))
