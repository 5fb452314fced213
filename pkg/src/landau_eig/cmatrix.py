"""Integer coupling matrices of the reduced periodic system and their spectra.

The system for the exponents ``u_1..u_m`` couples the modes through a
tridiagonal integer matrix ``C`` which factors as ``C = E @ D`` with ``E``
symmetric positive definite and ``D`` positive diagonal.  The spectrum is
therefore real, positive and simple; it is computed from the symmetric
matrix ``D^(1/2) E D^(1/2)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import LemmaViolationError

logger = logging.getLogger(__name__)

NEAR_RESONANCE_RTOL = 1e-6


def _check_m(m) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return int(m)


def build_c_matrix(m: int) -> np.ndarray:
    """Return the ``m x m`` integer coupling matrix.

    >>> build_c_matrix(2).tolist()
    [[4, -2], [-4, 4]]
    """
    m = _check_m(m)
    C = np.zeros((m, m), dtype=np.int64)
    if m == 1:
        C[0, 0] = 2
        return C
    C[0, 0] = 2 * m
    # rows use 1-based j as in the defining rules
    for j in range(2, m + 1):
        C[j - 1, j - 1] = 4 * (m - j + 1)
        C[j - 1, j - 2] = -2 * (m - j + 2)
    for j in range(1, m):
        C[j - 1, j] = -2 * (m - j)
    return C


def build_e_d(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Factors ``E`` (symmetric, tridiagonal) and ``D`` (diagonal) of ``C``."""
    m = _check_m(m)
    E = 2 * np.eye(m, dtype=np.int64)
    E[0, 0] = 1
    idx = np.arange(m - 1)
    E[idx, idx + 1] = -1
    E[idx + 1, idx] = -1
    D = np.diag(2 * (m - np.arange(m))).astype(np.int64)
    return E, D


def int_det(A: np.ndarray) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    M = [[int(x) for x in row] for row in np.asarray(A)]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def tridiag_two_det(N: int) -> int:
    """Determinant of the ``N x N`` matrix with 2 on the diagonal, -1 off it."""
    F = 2 * np.eye(N, dtype=np.int64)
    idx = np.arange(N - 1)
    F[idx, idx + 1] = -1
    F[idx + 1, idx] = -1
    return int_det(F)


def eigen_decompose(C: np.ndarray, rel_gap: float = 1e-9):
    """Sorted eigenpairs of ``C`` with unit eigenvectors, first entry positive.

    Returns ``(eigenvalues, eigenvectors)`` where column ``k`` of the second
    array pairs with ``eigenvalues[k]``.  Raises :class:`LemmaViolationError`
    when the spectrum is not real, positive and simple.
    """
    C = np.asarray(C)
    m = C.shape[0]
    _, D = build_e_d(m)
    E = C.astype(float) / np.diag(D).astype(float)[None, :]
    if not np.allclose(E, E.T, rtol=0, atol=1e-12 * max(1.0, np.abs(E).max())):
        raise LemmaViolationError("C is not of the form E @ D with symmetric E")
    d_half = np.sqrt(np.diag(D).astype(float))
    S = d_half[:, None] * E * d_half[None, :]
    lam, s = np.linalg.eigh(0.5 * (S + S.T))

    # the symmetric route cannot produce complex values; cross-check against
    # the general solver on C itself
    lam_general = np.linalg.eigvals(C.astype(float))
    scale = max(1.0, np.linalg.norm(C, 2))
    if np.abs(lam_general.imag).max() > 1e-10 * scale:
        raise LemmaViolationError("C has non-real eigenvalues")

    vecs = s / d_half[:, None]
    vecs /= np.linalg.norm(vecs, axis=0)[None, :]
    vecs *= np.where(vecs[0] < 0, -1.0, 1.0)[None, :]

    if lam[0] <= 0:
        raise LemmaViolationError(f"non-positive eigenvalue {lam[0]!r}")
    if m > 1 and np.min(np.diff(lam) / lam[1:]) <= rel_gap:
        raise LemmaViolationError("repeated eigenvalue within tolerance")
    if np.abs(vecs[0]).min() <= 1e-12:
        raise LemmaViolationError("eigenvector with vanishing first component")
    return lam, vecs


def check_nonresonance(eigenvalues, chosen_index: int, rtol: float = 1e-9):
    """Whether ``n^2 lam`` avoids every larger eigenvalue for all ``n >= 2``.

    Returns ``(ok, near)`` where ``near`` lists ``(n, j)`` pairs that come
    within ``1e-6`` relative distance (reported as a warning, not a failure).
    """
    lam = np.asarray(eigenvalues, dtype=float)
    lam0 = lam[chosen_index]
    ok = True
    near = []
    for j, lj in enumerate(lam):
        if lj <= lam0:
            continue
        n_max = int(np.floor(np.sqrt(lj / lam0))) + 1
        for n in range(2, n_max + 1):
            gap = abs(n * n * lam0 - lj)
            if gap <= rtol * lj:
                ok = False
            if gap < NEAR_RESONANCE_RTOL * lj:
                near.append((n, j))
    if near:
        logger.warning("near resonance for eigenvalue %d: %s", chosen_index, near)
    return ok, near


@dataclass(frozen=True)
class CMatrixBundle:
    """Coupling matrix with the eigenpair driving the periodic family.

    ``omega = sqrt(B0 * lam)`` is the fundamental frequency and ``T`` the
    period of the family.
    """

    m: int
    C: np.ndarray
    E: np.ndarray
    D: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    chosen_index: int
    B0: float = 1.0
    nonresonant: bool = field(default=True)
    near_resonances: tuple = field(default=())

    @property
    def lam(self) -> float:
        return float(self.eigenvalues[self.chosen_index])

    @property
    def a(self) -> np.ndarray:
        return self.eigenvectors[:, self.chosen_index]

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.B0 * self.lam))

    @property
    def T(self) -> float:
        return 2 * np.pi / self.omega

    def closed_form_tau_weights(self) -> np.ndarray:
        """Alternative closed-form ``tau_mu`` weights ``-a_mu / (2(m-mu+1) lam (Da, a))``.

        Kept for diagnostics only; they disagree with the bordered solve by
        the factor ``4 (m - mu + 1)^2``.
        """
        a = self.a
        mu = np.arange(1, self.m + 1)
        da = float(np.diag(self.D) @ (a * a))
        return -a / (2.0 * (self.m - mu + 1) * self.lam * da)

    def tau_weights(self) -> np.ndarray:
        """``tau_mu`` weights from the left eigenvector ``D a``."""
        a = self.a
        Dd = np.diag(self.D).astype(float)
        return -Dd * a / (self.lam * float(Dd @ (a * a)))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "B0": self.B0,
            "C": self.C.tolist(),
            "E": self.E.tolist(),
            "D": np.diag(self.D).tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.T.tolist(),
            "chosen_index": self.chosen_index,
            "lambda": self.lam,
            "a": self.a.tolist(),
            "omega": self.omega,
            "T": self.T,
            "nonresonant": self.nonresonant,
            "near_resonances": [list(p) for p in self.near_resonances],
        }


def make_bundle(m: int, B0: float = 1.0, eig_index: int | None = None,
                rtol: float = 1e-9) -> CMatrixBundle:
    """Build matrices, spectrum and chosen eigenpair.

    ``eig_index`` defaults to the largest eigenvalue, for which the
    nonresonance condition holds trivially.  Negative indices count from the
    top as usual.
    """
    m = _check_m(m)
    if not B0 > 0:
        raise ValueError(f"B0 must be positive, got {B0!r}")
    C = build_c_matrix(m)
    E, D = build_e_d(m)
    lam, vecs = eigen_decompose(C)
    if eig_index is None:
        eig_index = m - 1
    if not -m <= eig_index < m:
        raise ValueError(f"eig_index must lie in [-{m}, {m}), got {eig_index}")
    eig_index %= m
    ok, near = check_nonresonance(lam, eig_index, rtol)
    return CMatrixBundle(m=m, C=C, E=E, D=D, eigenvalues=lam, eigenvectors=vecs,
                         chosen_index=eig_index, B0=float(B0), nonresonant=ok,
                         near_resonances=tuple(near))
