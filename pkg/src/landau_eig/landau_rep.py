"""Landau levels times momentum channels.

A state in the fiber with base quasimomentum ``k0`` is

    Phi(x) = sum_{n, p} A[n, p] e^{i (k0 + p omega) x_2} e_n(sqrt(B) (x_1 - (k0 + p omega) / B))

with ``e_n = i^n h_n`` and ``h_n`` the normalized Hermite functions.  In this
basis, with ``Z_-+ = Pi_1 +- i Pi_2``, the ladders act as

    Z_+ e_n = sqrt(2B(n+1)) e_{n+1},    Z_- e_n = sqrt(2Bn) e_{n-1},

and multiplication by ``e^{i theta x_2}`` moves channel ``p`` to ``p + q``
(``theta = q omega``) while mixing levels through the displaced-oscillator
overlaps ``M[n', n] = int h_{n'}(xi) h_n(xi + d) dxi``, ``d = theta / sqrt(B)``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import periodic_fn as pf
from .errors import TruncationError, TruncationWarning
from .periodic_fn import PeriodicFn

log = logging.getLogger(__name__)

DEFAULT_LEVELS = 40
DEFAULT_CHANNELS = 10
WARN_RTOL = 1e-8


@dataclass
class ChannelState:
    """Amplitudes ``A[n, p + P]`` for levels ``0..N`` and channels ``-P..P``."""

    B: float
    omega: float
    amplitudes: np.ndarray
    k0: float = 0.0

    @property
    def N(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def P(self) -> int:
        return (self.amplitudes.shape[1] - 1) // 2

    @classmethod
    def zeros(cls, B, omega, N, P, k0=0.0) -> "ChannelState":
        return cls(B, omega, np.zeros((N + 1, 2 * P + 1), dtype=complex), k0)

    @classmethod
    def basis(cls, B, omega, N, P, n=0, p=0, k0=0.0) -> "ChannelState":
        s = cls.zeros(B, omega, N, P, k0)
        s.amplitudes[n, p + P] = 1.0
        return s

    def like(self, amplitudes) -> "ChannelState":
        return ChannelState(self.B, self.omega, amplitudes, self.k0)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "ChannelState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def level(self, n: int) -> "ChannelState":
        """Projection onto level ``n``."""
        A = np.zeros_like(self.amplitudes)
        A[n] = self.amplitudes[n]
        return self.like(A)

    def resized(self, N: int, P: int) -> "ChannelState":
        """Embed in (or cut down to) a basis with ``N`` levels and ``P`` channels."""
        out = np.zeros((N + 1, 2 * P + 1), dtype=complex)
        n = min(N, self.N) + 1
        q = min(P, self.P)
        out[:n, P - q:P + q + 1] = self.amplitudes[:n, self.P - q:self.P + q + 1]
        return self.like(out)

    def __add__(self, other):
        return self.like(self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        return self.like(self.amplitudes - other.amplitudes)

    def __mul__(self, c):
        return self.like(self.amplitudes * c)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"B": self.B, "omega": self.omega, "k0": self.k0,
                "re": self.amplitudes.real.tolist(), "im": self.amplitudes.imag.tolist()}


def _warn_tail(kind: str, lost: float, total: float) -> None:
    if total > 0 and lost > WARN_RTOL * total:
        warnings.warn(f"{kind} overflow: tail mass {lost:.3g} of {total:.3g}",
                      TruncationWarning, stacklevel=3)


# ladders ------------------------------------------------------------------

def ladder_apply(state: ChannelState, direction: str, warn: bool = True) -> ChannelState:
    """Apply ``Z_+`` (``plus``), ``Z_-`` (``minus``) or ``Z_-^{-1}`` (``minus_inverse``)."""
    A = state.amplitudes
    B, N = state.B, state.N
    n = np.arange(N + 1)[:, None]
    out = np.zeros_like(A)
    if direction == "minus":
        out[:-1] = np.sqrt(2 * B * n[1:]) * A[1:]
        return state.like(out)
    if direction == "plus":
        fac = np.sqrt(2 * B * (n[:-1] + 1))
    elif direction == "minus_inverse":
        fac = 1.0 / np.sqrt(2 * B * (n[:-1] + 1))
    else:
        raise ValueError(f"unknown direction {direction!r}")
    out[1:] = fac * A[:-1]
    if warn:
        _warn_tail("level", float(np.linalg.norm(A[-1])), float(np.linalg.norm(A)))
    return state.like(out)


def level_number(state: ChannelState) -> ChannelState:
    """``Z_+ Z_-`` acting as ``2Bn`` on level ``n``."""
    n = np.arange(state.N + 1)[:, None]
    return state.like(2 * state.B * n * state.amplitudes)


def landau_hamiltonian(state: ChannelState) -> ChannelState:
    """Free Hamiltonian, ``B(2n+1)`` on level ``n``."""
    n = np.arange(state.N + 1)[:, None]
    return state.like(state.B * (2 * n + 1) * state.amplitudes)


# displaced-oscillator overlaps --------------------------------------------

def hermite_functions(n_max: int, x) -> np.ndarray:
    """Normalized Hermite functions ``h_0..h_{n_max}`` at ``x`` (rows), by the
    stable three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _overlap_columns(d: float, n_cols: int, n_rows: int) -> np.ndarray:
    """``M[n', n] = int h_{n'}(xi) h_n(xi + d) dxi`` for ``n' < n_rows``, ``n < n_cols``.

    Trapezoid rule on the overlap of the two supports; the integrand is entire
    and decays like a Gaussian, so the rule converges geometrically once the
    step resolves the highest oscillation.
    """
    K = max(n_rows, n_cols)
    R = math.sqrt(2 * K + 1) + 12.0
    lo, hi = max(-R, -d - R), min(R, -d + R)
    if lo >= hi:
        return np.zeros((n_rows, n_cols))
    step = math.pi / (2.0 * math.sqrt(4 * K + 10))
    npts = int(math.ceil((hi - lo) / step)) + 1
    xi = np.linspace(lo, hi, npts)
    dx = xi[1] - xi[0]
    left = hermite_functions(n_rows - 1, xi)
    right = hermite_functions(n_cols - 1, xi + d)
    return dx * (left @ right.T)


@lru_cache(maxsize=4096)
def _overlap_cached(d: float, n_cols: int, n_rows: int) -> np.ndarray:
    M = _overlap_columns(d, n_cols, n_rows)
    M.setflags(write=False)
    return M


@dataclass(frozen=True)
class MulOperator:
    """Level mixing of multiplication by ``e^{i theta x_2}``."""

    theta: float
    B: float
    N: int
    M: np.ndarray = field(repr=False)
    tail: np.ndarray = field(repr=False)

    @property
    def d(self) -> float:
        return self.theta / math.sqrt(self.B)

    def phased(self) -> np.ndarray:
        """Matrix in the ``e_n = i^n h_n`` basis, ``i^{n-n'} M[n', n]``."""
        n = np.arange(self.N + 1)
        return (1j ** ((n[None, :] - n[:, None]) % 4)) * self.M

    def column_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.M**2, axis=0))


def mul_matrix(theta: float, B: float, N: int) -> MulOperator:
    """Overlap block of size ``(N+1)^2`` plus the next ``N+1`` rows as ``tail``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    d = float(theta) / math.sqrt(B)
    full = _overlap_cached(d, N + 1, 2 * (N + 1))
    return MulOperator(theta=float(theta), B=float(B), N=N, M=full[: N + 1], tail=full[N + 1:])


@lru_cache(maxsize=4096)
def _phased_cached(theta: float, B: float, N: int) -> np.ndarray:
    P = mul_matrix(theta, B, N).phased()
    P.setflags(write=False)
    return P


def phased_matrix(theta: float, B: float, N: int) -> np.ndarray:
    return _phased_cached(float(theta), float(B), int(N))


# multiplication by functions of x_2 ---------------------------------------

def _two_sided(w, omega: float) -> np.ndarray:
    if isinstance(w, PeriodicFn):
        if not math.isclose(w.omega, omega, rel_tol=1e-12):
            raise ValueError(f"frequency mismatch: {w.omega} vs {omega}")
        return w.two_sided().astype(complex)
    return np.asarray(w, dtype=complex)


def multiply_state(state: ChannelState, w, warn: bool = True) -> ChannelState:
    """Multiply by ``w(x_2) = sum_q w_q e^{i q omega x_2}``.

    ``w`` is a :class:`PeriodicFn` or a two-sided coefficient array indexed
    ``-Q..Q`` (used for odd functions such as derivatives).
    """
    e = _two_sided(w, state.omega)
    Q = (e.size - 1) // 2
    A = state.amplitudes
    N, P = state.N, state.P
    out = np.zeros_like(A)
    lost = 0.0
    for i, wq in enumerate(e):
        if wq == 0:
            continue
        q = i - Q
        Mq = phased_matrix(q * state.omega, state.B, N)
        if q == 0:
            out += wq * (Mq @ A)
            continue
        # channel p -> p + q, kept when |p + q| <= P
        lo, hi = max(-P, -P - q), min(P, P - q)
        if warn:
            keep = np.zeros(2 * P + 1, dtype=bool)
            if lo <= hi:
                keep[lo + P:hi + P + 1] = True
            lost += abs(wq) ** 2 * float(np.sum(np.abs(A[:, ~keep]) ** 2))
        if lo > hi:
            continue
        out[:, lo + q + P:hi + q + P + 1] += wq * (Mq @ A[:, lo + P:hi + P + 1])
    if warn:
        _warn_tail("channel", math.sqrt(lost), state.norm() * float(np.abs(e).sum()))
    return state.like(out)


# the operator chain -------------------------------------------------------

def log_derivative(chain, j: int) -> np.ndarray:
    """Two-sided coefficients of ``d/dx_2 ln|W^(0) ... W^(j-1)| = sum_{s<j} u_{s+1}'``."""
    parts = [pf.derivative_two_sided(chain.u[s]) for s in range(j)]
    Q = max(p.size for p in parts)
    out = np.zeros(Q, dtype=complex)
    for p in parts:
        k = (Q - p.size) // 2
        out[k:k + p.size] += p
    return out


def b_chain_apply(j: int, chain, state: ChannelState, method: str = "closed") -> ChannelState:
    """Apply ``B^(j)``.

    ``closed`` uses ``Z_+ + Z_-^{-1} W^(j-1) - L_j'`` with
    ``L_j = ln|W^(0)...W^(j-1)|``; ``recursion`` uses
    ``(W^(j-1))^{-1} Z_- B^(j-1) Z_-^{-1} W^(j-1)``.  ``j = 0`` is
    ``Z_-^{-1}(Z_+ Z_- + W^(0))`` for both.
    """
    if not 0 <= j <= chain.m:
        raise ValueError(f"j must lie in 0..{chain.m}")
    if j == 0:
        return ladder_apply(level_number(state) + multiply_state(state, chain.W[0]), "minus_inverse")
    if method == "closed":
        out = ladder_apply(state, "plus")
        out = out + ladder_apply(multiply_state(state, chain.W[j - 1]), "minus_inverse")
        return out - multiply_state(state, log_derivative(chain, j))
    if method == "recursion":
        s = ladder_apply(multiply_state(state, chain.W[j - 1]), "minus_inverse")
        s = ladder_apply(b_chain_apply(j - 1, chain, s, "recursion"), "minus")
        return multiply_state(s, chain.inverse_link(j - 1))
    raise ValueError(f"unknown method {method!r}")


def chain_identity_defect(j: int, chain, state: ChannelState) -> float:
    """``||Z_- B^(j) Psi - W^(j) Psi|| / ||Psi||`` for a level-0 ``Psi`` (``W^(m) = 0``)."""
    lhs = ladder_apply(b_chain_apply(j, chain, state), "minus")
    if j < chain.m:
        lhs = lhs - multiply_state(state, chain.W[j])
    return lhs.norm() / state.norm()


# constructive eigenfunction -----------------------------------------------

def _x_chain(chain, j: int, state: ChannelState) -> ChannelState:
    """``Z_-^{-1} W^(0) ... Z_-^{-1} W^(j-1)`` applied to ``state``."""
    for s in range(j - 1, -1, -1):
        state = ladder_apply(multiply_state(state, chain.W[s], warn=False), "minus_inverse",
                             warn=False)
    return state


def shifted_operator(chain, state: ChannelState) -> ChannelState:
    """``Z_+ Z_- + W^(0) = H_B + V - (2m+1)B``."""
    return level_number(state) + multiply_state(state, chain.W[0], warn=False)


@dataclass
class Eigenfunction:
    phi: ChannelState
    psi: ChannelState
    corrections: list
    residual: float
    lstsq_residual: float
    inversion_error: float
    N_eval: int
    P_eval: int
    report: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": "1",
            "kind": "eigenfunction",
            "residual": self.residual,
            "lstsq_residual": self.lstsq_residual,
            "inversion_error": self.inversion_error,
            "norm": self.phi.norm(),
            "N_eval": self.N_eval,
            "P_eval": self.P_eval,
            "report": self.report,
            "phi": self.phi.to_dict(),
        }


def _inverse_chain(chain, phi: ChannelState) -> ChannelState:
    """``(W^(m-1))^{-1} Z_- ... (W^(0))^{-1} Z_- Phi``; recovers ``Psi``."""
    for s in range(chain.m):
        phi = multiply_state(ladder_apply(phi, "minus"), chain.inverse_link(s), warn=False)
    return phi


def build_eigenfunction(chain, k0: float = 0.0, N: int = DEFAULT_LEVELS,
                        P: int = DEFAULT_CHANNELS, pad: tuple[int, int] = (20, 6),
                        tol: float | None = None) -> Eigenfunction:
    """Eigenfunction ``Phi(Psi)`` for ``Psi = e_0`` in channel 0.

    The level-0 corrections ``Psi_0..Psi_{m-1}`` are found in one least-squares
    solve making ``(Z_+ Z_- + W^(0)) Phi`` vanish on the ``(N, P)`` basis.  The
    reported residual is evaluated on a basis padded by ``pad`` levels and
    channels, so leakage out of the truncated basis counts against it.
    """
    m, B, om = chain.m, chain.B, chain.omega
    psi = ChannelState.basis(B, om, N, P, k0=k0)
    lead = _x_chain(chain, m, psi)
    rhs = shifted_operator(chain, lead).amplitudes.ravel()
    cols = []
    for s in range(m):
        depth = m - 1 - s  # X_{m-1-s} Psi_s; Psi_{m-1} enters bare
        for p in range(-P, P + 1):
            e = ChannelState.basis(B, om, N, P, 0, p, k0)
            cols.append(shifted_operator(chain, _x_chain(chain, depth, e)).amplitudes.ravel())
    A = np.column_stack(cols)
    x, *_ = np.linalg.lstsq(A, -rhs, rcond=None)
    lsq = float(np.linalg.norm(A @ x + rhs))

    corrections = []
    phi = lead
    for s in range(m):
        c = ChannelState.zeros(B, om, N, P, k0)
        c.amplitudes[0] = x[s * (2 * P + 1):(s + 1) * (2 * P + 1)]
        corrections.append(c)
        phi = phi + _x_chain(chain, m - 1 - s, c)

    Ne, Pe = N + pad[0], P + pad[1]
    big = phi.resized(Ne, Pe)
    res = shifted_operator(chain, big).norm() / big.norm()
    back = _inverse_chain(chain, big).resized(N, P)
    inv_err = (back - psi).norm()
    report = {"m": m, "B": B, "k0": k0, "N": N, "P": P,
              "level_tail": float(np.linalg.norm(phi.amplitudes[-1])) / phi.norm(),
              "channel_tail": float(np.linalg.norm(phi.amplitudes[:, [0, -1]])) / phi.norm()}
    if m == 1:
        # closed form Psi_0 = P^(0)(u_1' Psi)
        ref = multiply_state(psi, pf.derivative_two_sided(chain.u[0]), warn=False).level(0)
        report["closed_form_error"] = (ref - corrections[0]).norm()
    if phi.norm() <= 1e-8:
        raise TruncationError("constructed eigenfunction vanished")
    if tol is not None and res > tol:
        raise TruncationError(f"residual {res:.3g} exceeds {tol:.3g}; increase N and P")
    return Eigenfunction(phi=phi, psi=psi, corrections=corrections, residual=float(res),
                         lstsq_residual=lsq, inversion_error=float(inv_err), N_eval=Ne,
                         P_eval=Pe, report=report)


# fiber spectra ------------------------------------------------------------

def bloch_matrix(kappa: float, V: PeriodicFn, B: float, N: int) -> np.ndarray:
    """``diag(B(2n+1)) + sum_q V_q e^{-i q kappa} M(q omega)`` on levels ``0..N``.

    The channel lattice is translation invariant, so its spectrum is the union
    of these matrices over ``kappa`` in ``[0, 2 pi)``.
    """
    e = V.two_sided()
    Q = (e.size - 1) // 2
    H = np.diag(B * (2 * np.arange(N + 1) + 1)).astype(complex)
    for i, vq in enumerate(e):
        if vq != 0:
            q = i - Q
            H += vq * np.exp(-1j * q * kappa) * phased_matrix(q * V.omega, B, N)
    return 0.5 * (H + H.conj().T)


def fiber_matrix(k: float, V: PeriodicFn, B: float, N: int = DEFAULT_LEVELS,
                 P: int = DEFAULT_CHANNELS) -> np.ndarray:
    """``H_B + V`` on ``L = 2P+1`` channels closed into a ring with Bloch twist.

    Channel ``p`` couples to ``p + q`` through ``V_q M(q omega)``; couplings
    that leave the window wrap around with phase ``e^{i j Theta}``,
    ``Theta = 2 pi k / omega``, where ``j`` counts the wraps.  The spectrum is
    that of :func:`bloch_matrix` at ``kappa_l = (Theta + 2 pi l) / L``.
    """
    om = V.omega
    L = 2 * P + 1
    n1 = N + 1
    Theta = 2 * np.pi * k / om
    e = V.two_sided()
    Q = (e.size - 1) // 2
    H = np.zeros((L * n1, L * n1), dtype=complex)
    diag = np.diag(B * (2 * np.arange(n1) + 1))
    for p in range(L):
        H[p * n1:(p + 1) * n1, p * n1:(p + 1) * n1] += diag
    for i, vq in enumerate(e):
        if vq == 0:
            continue
        q = i - Q
        Mq = vq * phased_matrix(q * om, B, N)
        for p in range(L):
            target = p + q
            wraps, pp = divmod(target, L)
            H[pp * n1:(pp + 1) * n1, p * n1:(p + 1) * n1] += np.exp(1j * wraps * Theta) * Mq
    return H


@dataclass
class BandScan:
    k: np.ndarray
    nearest: np.ndarray
    deviation: np.ndarray
    samples: np.ndarray
    target: float
    flatness: float
    max_deviation: float
    guard_ok: bool
    side_check: dict

    @property
    def passed_guard(self) -> bool:
        return self.guard_ok

    def to_dict(self) -> dict:
        return {"schema": "1", "kind": "band", "target": self.target,
                "k": self.k.tolist(), "nearest": self.nearest.tolist(),
                "deviation": self.deviation.tolist(), "flatness": self.flatness,
                "max_deviation": self.max_deviation, "guard_ok": self.guard_ok,
                "side_check": self.side_check}


def flat_band_scan(V: PeriodicFn, B: float, m: int, k_samples: int = 16,
                   N: int = DEFAULT_LEVELS, P: int = DEFAULT_CHANNELS,
                   guard: float = 0.1) -> BandScan:
    """Track the band through ``(2m+1)B`` over ``k_samples`` quasimomenta in ``[0, omega)``.

    For each ``k`` the ``2P+1`` eigenvalues of the ring matrix nearest the
    target are that band's samples.  The per-``k`` deviation is the largest
    distance to the target, ``flatness`` the spread of all samples.
    """
    om = V.omega
    target = (2 * m + 1) * B
    L = 2 * P + 1
    ks = om * np.arange(k_samples) / k_samples
    nearest = np.empty(k_samples)
    dev = np.empty(k_samples)
    allsamp = np.empty((k_samples, L))
    for i, k in enumerate(ks):
        ev = np.linalg.eigvalsh(fiber_matrix(k, V, B, N, P))
        idx = np.argsort(np.abs(ev - target))[:L]
        band = np.sort(ev[idx])
        allsamp[i] = band
        j = np.argmax(np.abs(band - target))
        dev[i] = abs(band[j] - target)
        nearest[i] = band[np.argmin(np.abs(band - target))]
    guard_ok = bool(np.all(dev <= guard * B))
    side = flat_band_side_check(V, B, N, target)
    return BandScan(k=ks, nearest=nearest, deviation=dev, samples=allsamp, target=target,
                    flatness=float(allsamp.max() - allsamp.min()),
                    max_deviation=float(dev.max()), guard_ok=guard_ok, side_check=side)


def flat_band_side_check(V: PeriodicFn, B: float, N: int, target: float,
                         n_kappa: int = 64, flat_tol: float = 1e-6) -> dict:
    """Locate every flat band of the Bloch family among the well-resolved levels.

    A band is flat when its spread over ``kappa`` stays below ``flat_tol * B``;
    flat bands away from the set ``{(2n+1)B + V_0}`` are flagged.
    """
    kap = 2 * np.pi * np.arange(n_kappa) / n_kappa
    bands = np.array([np.linalg.eigvalsh(bloch_matrix(x, V, B, N)) for x in kap])
    n_ok = N // 2  # upper half of the truncated levels is unreliable
    spread = bands.max(axis=0) - bands.min(axis=0)
    flat = [float(bands[:, i].mean()) for i in range(n_ok) if spread[i] <= flat_tol * B]
    allowed = B * (2 * np.arange(N + 2) + 1) + pf.mean(V)
    flagged = [e for e in flat if np.min(np.abs(allowed - e)) > flat_tol * B]
    return {"flat_bands": flat, "flagged": flagged, "target_found":
            any(abs(e - target) <= flat_tol * B for e in flat), "n_kappa": n_kappa,
            "levels_checked": n_ok}
