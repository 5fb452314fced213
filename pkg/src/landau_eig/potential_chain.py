"""Negative potential chains built from the exponents ``u_j``.

For functions of ``x_2`` alone the chain is

    W^(j-1) = -2B (m - j + 1) e^{u_j},   j = 1..m,

and the candidate potential is ``V = W^(0) + 2Bm``.  Because every link is
a negative constant times an exponential, ``Delta ln|W^(s)| = u_{s+1}''`` and
the telescoping identities reduce to linear combinations of ``u''`` and
exponentials; no series logarithm is needed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import periodic_fn as pf
from .periodic_fn import PeriodicFn

N_SAMPLES = 1024


@dataclass
class PotentialChain:
    m: int
    B: float
    u: list
    W: list
    V: PeriodicFn
    report: dict = field(default_factory=dict)

    @property
    def omega(self) -> float:
        return self.V.omega

    def inverse_link(self, j: int) -> PeriodicFn:
        """``1 / W^(j)`` as a cosine series."""
        return pf.exp(-self.u[j]) * (-1.0 / (2 * self.B * (self.m - j)))

    def to_dict(self) -> dict:
        return {
            "schema": "1",
            "kind": "chain",
            "m": self.m,
            "B": self.B,
            "omega": self.omega,
            "u": [f.coeffs.tolist() for f in self.u],
            "W": [f.coeffs.tolist() for f in self.W],
            "V": self.V.coeffs.tolist(),
            "report": self.report,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialChain":
        om = d["omega"]
        return cls(m=d["m"], B=d["B"], u=[PeriodicFn(om, c) for c in d["u"]],
                   W=[PeriodicFn(om, c) for c in d["W"]], V=PeriodicFn(om, d["V"]),
                   report=d.get("report", {}))


def build_chain(u: list, B: float, m: int) -> PotentialChain:
    """Links ``W^(j-1) = -2B(m-j+1) e^{u_j}`` and ``V = W^(0) + 2Bm``."""
    if len(u) != m:
        raise ValueError(f"expected {m} exponents, got {len(u)}")
    W = [pf.exp(u[j - 1]) * (-2.0 * B * (m - j + 1)) for j in range(1, m + 1)]
    V = W[0] + 2.0 * B * m
    return PotentialChain(m=m, B=float(B), u=list(u), W=W, V=V)


def _laplacian_log_sum(u: list, j: int) -> PeriodicFn:
    """``Delta ln(|W^(0)|^j |W^(1)|^(j-1) ... |W^(j-1)|) = sum_{s<j} (j-s) u_{s+1}''``."""
    return pf.linear_combination([j - s for s in range(j)],
                                 [pf.second_derivative(u[s]) for s in range(j)])


def verify_conditions(chain: PotentialChain, tol: float = 1e-8,
                      n_samples: int = N_SAMPLES) -> dict:
    """Residuals of the telescoping identities, mean values and negativity margins."""
    m, B, u, W = chain.m, chain.B, chain.u, chain.W
    res_b = []
    for j in range(1, m):
        r = W[j] - W[0] - 2 * B * j + _laplacian_log_sum(u, j)
        res_b.append(pf.norm_C(r, n_samples))
    top = W[0] + 2 * B * m - _laplacian_log_sum(u, m)
    res_c = pf.norm_C(top, n_samples)

    t = np.linspace(0.0, chain.V.T, n_samples, endpoint=False)
    margins, positive = [], True
    for j in range(m):
        vals = pf.evaluate(W[j], t)
        positive &= bool(np.all(vals < 0))
        margins.append(float(-vals.max()))
    mean_err = [abs(pf.mean(W[j]) + 2 * B * (m - j)) for j in range(m)]
    report = {
        "res_b": res_b,
        "res_c": res_c,
        "link_means": [pf.mean(Wj) for Wj in W],
        "link_mean_errors": mean_err,
        "V_mean": pf.mean(chain.V),
        "negativity_margins": margins,
        "scaled_margins": [margins[j] / (B * (m - j)) for j in range(m)],
        "negative_everywhere": positive,
        "n_samples": n_samples,
        "tol": tol,
        "constant_potential": bool(chain.V.N == 0),
    }
    report["passed"] = bool(positive and res_c <= tol and all(r <= tol for r in res_b))
    chain.report = report
    return report


def _exps(u):
    return [pf.exp_remainder(uj, 0) for uj in u]


def system_residuals(u: list, B: float, m: int) -> dict:
    """Row residual functions of the three equivalent forms of the system.

    ``full`` is the cumulative form (rows sum ``(j-s+1) u_s''``), ``diff`` its
    first differences and ``coupled`` the tridiagonal form with ``C``.
    """
    from .cmatrix import build_c_matrix

    e = _exps(u)
    lap = [pf.second_derivative(uj) for uj in u]
    zero = PeriodicFn.zero(u[0].omega)

    def link(j):  # 2B(m-j+1)(e^{u_j} - 1), 1-based, zero past m
        return e[j - 1] * (2 * B * (m - j + 1)) if 1 <= j <= m else zero

    full, diff, coupled = [], [], []
    for j in range(1, m + 1):
        lhs = -pf.linear_combination([j - s + 1 for s in range(1, j + 1)], lap[:j])
        full.append(lhs - (link(1) - link(j + 1)))
        lhs6 = -pf.linear_combination([1.0] * j, lap[:j])
        diff.append(lhs6 - (link(j) - link(j + 1)))
    C = build_c_matrix(m).astype(float)
    for j in range(m):
        r = -lap[j]
        for mu in range(m):
            if C[j, mu] != 0:
                r = r - (B * C[j, mu]) * e[mu]
        coupled.append(r)
    return {"full": full, "diff": diff, "coupled": coupled}


def cross_check_systems(u: list, B: float, m: int, n_samples: int = N_SAMPLES) -> tuple:
    """Sup-norm residuals ``(full, diff, coupled)`` of the three systems."""
    rows = system_residuals(u, B, m)
    return tuple(max(pf.norm_C(r, n_samples) for r in rows[k])
                 for k in ("full", "diff", "coupled"))


def from_family(solution) -> PotentialChain:
    """Chain for a converged family: ``u_j = v_j`` and ``B = B0 (1 + eps^2 tau)``."""
    return build_chain(solution.v, solution.B_eff, solution.m)
