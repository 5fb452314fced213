"""Acceptance criteria.  Run with pytest or directly as a script; each
criterion prints one PASS/FAIL line with its key numbers."""
import math
import time
import warnings

import numpy as np
import pytest
from scipy.optimize import brentq

from landau_eig import family_solver as fs
from landau_eig import landau_rep as lr
from landau_eig import pendulum as pd
from landau_eig import potential_chain as pc
from landau_eig.cmatrix import build_c_matrix, build_e_d, eigen_decompose, int_det, make_bundle
from landau_eig.errors import TruncationWarning
from landau_eig.landau_rep import ChannelState
from landau_eig.periodic_fn import PeriodicFn


def _chain(m, eps):
    return pc.from_family(fs.iterate_family(eps, make_bundle(m)))


def criterion_1():
    t0 = time.perf_counter()
    ok = True
    for m in range(1, 13):
        C = build_c_matrix(m)
        E, D = build_e_d(m)
        ok &= np.array_equal(C, E @ D) and int_det(E) == 1
        lam, vecs = eigen_decompose(C)
        ok &= bool(np.all(lam > 0) and np.all(np.diff(lam) > 1e-9 * lam[-1]))
        ok &= bool(np.all(np.abs(vecs[0]) > 1e-9))
    lam2, _ = eigen_decompose(build_c_matrix(2))
    err2 = float(np.max(np.abs(lam2 - [4 - 2 * math.sqrt(2), 4 + 2 * math.sqrt(2)])))
    dt = time.perf_counter() - t0
    ok &= err2 <= 1e-12 and dt < 1.0
    return ok, f"m=1..12 structure ok; m=2 eigenvalue error {err2:.2e}; {dt:.2f}s"


def criterion_2():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for a in (1e-2, 1e-3):
        T = pd.period_integral(a, 1.0)
        e = abs(T * math.sqrt(2) / (2 * math.pi) - 1 - a * a / 48)
        ok &= e <= 10 * a**4
        worst = max(worst, e / (10 * a**4))
    big = pd.period_integral(50.0, 1.0) / 50.0
    ok &= 0.9 <= big <= 1.1
    agree = 0.0
    for a in (0.1, 1.0, 5.0):
        T = pd.period_integral(a, 1.0)
        agree = max(agree, abs(pd.solve_ode(a, 1.0).T_alpha - T) / T)
    dt = time.perf_counter() - t0
    ok &= agree <= 1e-8 and dt < 5.0
    return ok, (f"expansion error/bound {worst:.2e}; T(50)/50={big:.4f}; "
                f"ODE vs quadrature {agree:.2e}; {dt:.2f}s")


def _pendulum_tau(eps, B0=1.0):
    """Field correction forced by a period of ``2 pi / omega`` at slope ``2 eps omega``."""
    om = math.sqrt(2 * B0)
    alpha = 2 * eps * om
    target = 2 * math.pi / om
    B = brentq(lambda b: pd.period_integral(alpha, b) - target, B0 * 0.9, B0 * 1.1, xtol=1e-16,
               rtol=1e-15)
    return (B / B0 - 1) / eps**2


def criterion_3():
    t0 = time.perf_counter()
    ok = True
    worst_W = worst_tau = 0.0
    for B0 in (0.5, 1.0, 2.0):
        b = make_bundle(1, B0)
        lead = fs.leading_terms(b)
        worst_W = max(worst_W, float(np.max(np.abs(lead.W[0].padded(4) - [-1, 0, 1 / 3, 0]))))
        worst_tau = max(worst_tau, abs(lead.tau0 - 1 / 3))
    tau_est = _pendulum_tau(1e-3)
    b = make_bundle(1)
    factor = float(b.tau_weights()[0] / b.closed_form_tau_weights()[0])
    dt = time.perf_counter() - t0
    ok = worst_W <= 1e-12 and worst_tau <= 1e-12 and abs(tau_est - 1 / 3) <= 1e-5 and dt < 1.0
    return ok, (f"W error {worst_W:.1e}; tau0 error {worst_tau:.1e}; pendulum tau {tau_est:.8f}; "
                f"closed-form weight factor {factor:g} (reported only); {dt:.2f}s")


def criterion_4():
    t0 = time.perf_counter()
    ok = True
    parts = []
    for m, eps in ((1, 0.1), (2, 0.05), (3, 0.05)):
        b = make_bundle(m)
        sol = fs.iterate_family(eps, b)
        res = fs.residual_check(sol, b)
        ratios = sol.contraction_ratios()[2:]
        rmax = max(ratios) if ratios else 0.0
        orth = abs(float(np.dot(sol.b, b.a)))
        ok &= res <= 1e-9 and rmax <= 0.5 and orth <= 1e-12 and 1 + eps**2 * sol.tau > 0
        parts.append(f"m={m} res {res:.1e} ratio {rmax:.2f}")
    dt = time.perf_counter() - t0
    ok &= dt < 10.0
    return ok, "; ".join(parts) + f"; {dt:.2f}s"


def criterion_5():
    t0 = time.perf_counter()
    ok = True
    worst = 0.0
    for m, eps in ((1, 0.1), (2, 0.05), (3, 0.05)):
        rep = pc.verify_conditions(_chain(m, eps), n_samples=1024)
        worst = max([worst, rep["res_c"], *rep["res_b"]])
        ok &= rep["passed"] and max(rep["link_mean_errors"]) <= 1e-9
        ok &= abs(rep["V_mean"]) <= 1e-10 and rep["negative_everywhere"]
        ok &= min(rep["negativity_margins"]) > 0
    dt = time.perf_counter() - t0
    ok &= worst <= 1e-8 and dt < 2.0
    return ok, f"worst (b)/(c) residual {worst:.1e}; {dt:.2f}s"


def criterion_6():
    t0 = time.perf_counter()
    B = 1.0
    ladder = 0.0
    for n in range(10):
        s = ChannelState.basis(B, math.sqrt(2), 12, 2, n, 0)
        ladder = max(ladder, abs(lr.ladder_apply(s, "plus").norm() - math.sqrt(2 * B * (n + 1))),
                     abs(lr.ladder_apply(s, "minus").norm() - math.sqrt(2 * B * n)))
        back = lr.ladder_apply(lr.ladder_apply(s, "minus"), "minus_inverse")
        ladder = max(ladder, (back - (s - s.level(0))).norm())
    chain = _chain(1, 0.1)
    psi = ChannelState.basis(chain.B, chain.omega, 40, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        l4 = max(lr.chain_identity_defect(j, chain, psi) for j in range(chain.m + 1))
    dt = time.perf_counter() - t0
    ok = ladder <= 1e-12 and l4 <= 1e-6 and dt < 2.0
    return ok, f"ladder identities {ladder:.1e}; chain identity at N=40 {l4:.1e}; {dt:.2f}s"


def criterion_7():
    t0 = time.perf_counter()
    c1, c2 = _chain(1, 0.1), _chain(2, 0.05)
    s1 = lr.flat_band_scan(c1.V, c1.B, 1, 16, 40, 10)
    s2 = lr.flat_band_scan(c2.V, c2.B, 2, 16, 40, 10)
    Vc = c1.V + PeriodicFn.cos_mode(c1.omega, 1, 0.01)
    sc = lr.flat_band_scan(Vc, c1.B, 1, 16, 40, 10)
    dt = time.perf_counter() - t0
    ok = (s1.max_deviation <= 1e-6 * c1.B and s1.flatness <= 1e-6 * c1.B
          and s2.max_deviation <= 1e-5 * c2.B and sc.flatness > 1e-4 * c1.B and dt < 60)
    return ok, (f"m=1 deviation {s1.max_deviation / c1.B:.1e} flatness {s1.flatness / c1.B:.1e}; "
                f"m=2 deviation {s2.max_deviation / c2.B:.1e}; control flatness "
                f"{sc.flatness / c1.B:.1e}; {dt:.1f}s")


def criterion_8():
    t0 = time.perf_counter()
    chain = _chain(1, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = [lr.build_eigenfunction(chain, N=N, P=P).residual
               for N, P in ((40, 10), (50, 12), (60, 14))]
    dt = time.perf_counter() - t0
    ok = res[0] <= 1e-5 and res[0] > res[1] > res[2] and dt < 30
    return ok, "residuals " + ", ".join(f"{r:.1e}" for r in res) + f"; {dt:.2f}s"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8]


def _report(i, fn):
    ok, detail = fn()
    print(f"criterion {i}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


@pytest.mark.parametrize("i", range(1, 9))
def test_criterion(i):
    assert _report(i, CRITERIA[i - 1])


if __name__ == "__main__":
    import sys
    results = [_report(i, fn) for i, fn in enumerate(CRITERIA, 1)]
    sys.exit(0 if all(results) else 1)
