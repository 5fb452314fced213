"""Even, real, ``T``-periodic functions as finite cosine series.

A :class:`PeriodicFn` stores ``c_0..c_N`` with

    f(t) = c_0 + sum_{n>=1} c_n cos(n * omega * t).

Products are exact (no aliasing) up to the global cap ``N_MAX``; trailing
coefficients below ``TRIM_RTOL * max|c|`` are dropped after every operation.
"""
from __future__ import annotations

import csv
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import SeriesDivergenceError

N_MAX = 256
TRIM_RTOL = 1e-15


class PeriodicFn:
    """Cosine series on the frequency grid ``omega * Z``."""

    __slots__ = ("omega", "coeffs")

    def __init__(self, omega: float, coeffs: Iterable[float] = (0.0,), n_max: int = N_MAX):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float)).copy()
        if c.size == 0:
            c = np.zeros(1)
        c = c[: n_max + 1]
        c = _trim(c)
        c.setflags(write=False)
        self.omega = float(omega)
        self.coeffs = c

    # construction helpers
    @classmethod
    def constant(cls, omega: float, value: float) -> "PeriodicFn":
        return cls(omega, [value])

    @classmethod
    def cos_mode(cls, omega: float, n: int, amplitude: float = 1.0) -> "PeriodicFn":
        c = np.zeros(n + 1)
        c[n] = amplitude
        return cls(omega, c)

    @classmethod
    def w_star(cls, omega: float) -> "PeriodicFn":
        """The first harmonic ``2 cos(omega t)``."""
        return cls(omega, [0.0, 2.0])

    @classmethod
    def zero(cls, omega: float) -> "PeriodicFn":
        return cls(omega, [0.0])

    @classmethod
    def from_samples(cls, omega: float, values: np.ndarray) -> "PeriodicFn":
        """Interpolate an even function from ``M`` equispaced samples on one period."""
        values = np.asarray(values, dtype=float)
        M = values.size
        F = np.fft.rfft(values) / M
        c = F.real.copy()
        c[1:] *= 2
        if M % 2 == 0:
            c[-1] /= 2
        return cls(omega, c)

    # basic data
    @property
    def N(self) -> int:
        return self.coeffs.size - 1

    @property
    def T(self) -> float:
        return 2 * np.pi / self.omega

    def coef(self, n: int) -> float:
        return float(self.coeffs[n]) if n < self.coeffs.size else 0.0

    def padded(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        k = min(size, self.coeffs.size)
        out[:k] = self.coeffs[:k]
        return out

    def two_sided(self) -> np.ndarray:
        """Exponential coefficients ``f_{-N}..f_N`` (symmetric, real)."""
        c = self.coeffs
        half = 0.5 * c[1:]
        return np.concatenate([half[::-1], c[:1], half])

    @classmethod
    def from_two_sided(cls, omega: float, e: np.ndarray, n_max: int = N_MAX) -> "PeriodicFn":
        e = np.asarray(e)
        N = (e.size - 1) // 2
        pos = e[N:]
        neg = e[N::-1]
        c = np.empty(N + 1)
        c[0] = pos[0].real
        c[1:] = (pos[1:] + neg[1:]).real
        return cls(omega, c, n_max=n_max)

    # algebra
    def _check(self, other: "PeriodicFn") -> None:
        if not math.isclose(self.omega, other.omega, rel_tol=1e-14, abs_tol=0.0):
            raise ValueError(f"frequency mismatch: {self.omega} vs {other.omega}")

    def __add__(self, other):
        if isinstance(other, PeriodicFn):
            self._check(other)
            size = max(self.coeffs.size, other.coeffs.size)
            return PeriodicFn(self.omega, self.padded(size) + other.padded(size))
        c = self.coeffs.copy()
        c[0] += float(other)
        return PeriodicFn(self.omega, c)

    __radd__ = __add__

    def __neg__(self):
        return PeriodicFn(self.omega, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PeriodicFn):
            return multiply(self, other)
        return PeriodicFn(self.omega, self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return PeriodicFn(self.omega, self.coeffs / float(scalar))

    def __pow__(self, k: int):
        out = PeriodicFn.constant(self.omega, 1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def __call__(self, t):
        return evaluate(self, t)

    def __repr__(self):
        return f"PeriodicFn(omega={self.omega!r}, N={self.N})"

    def allclose(self, other: "PeriodicFn", atol: float = 1e-12) -> bool:
        size = max(self.coeffs.size, other.coeffs.size)
        return bool(np.max(np.abs(self.padded(size) - other.padded(size))) <= atol)

    # serialization
    def to_dict(self) -> dict:
        return {"omega": self.omega, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PeriodicFn":
        return cls(d["omega"], d["coeffs"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def write_csv(self, path, n_samples: int = 256) -> None:
        t = np.linspace(0.0, self.T, n_samples, endpoint=False)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "f"])
            for ti, fi in zip(t, evaluate(self, t)):
                writer.writerow([repr(float(ti)), repr(float(fi))])


def _trim(c: np.ndarray) -> np.ndarray:
    if c.size <= 1:
        return c
    big = np.abs(c).max()
    if big == 0:
        return c[:1]
    keep = np.nonzero(np.abs(c) > TRIM_RTOL * big)[0]
    return c[: max(keep[-1] + 1, 1)]


def multiply(f: PeriodicFn, g: PeriodicFn, n_max: int = N_MAX) -> PeriodicFn:
    """Exact product via product-to-sum, truncated at ``n_max``."""
    f._check(g)
    e = np.convolve(f.two_sided(), g.two_sided())
    return PeriodicFn.from_two_sided(f.omega, e, n_max=n_max)


def project_Y(f: PeriodicFn) -> PeriodicFn:
    """Keep only the first-harmonic (``cos omega t``) term."""
    return PeriodicFn(f.omega, [0.0, f.coef(1)])


def project_Yprime(f: PeriodicFn) -> PeriodicFn:
    """Remove the first-harmonic term."""
    c = f.coeffs.copy()
    if c.size > 1:
        c[1] = 0.0
    return PeriodicFn(f.omega, c)


def phi(f: PeriodicFn, k: int, atol: float = 1e-17, max_terms: int = 400) -> PeriodicFn:
    """``sum_{i>=0} f^i / (i+k)!`` so that ``exp(f) = sum_{i<k} f^i/i! + f^k phi(f, k)``."""
    term = PeriodicFn.constant(f.omega, 1.0 / math.factorial(k))
    total = term
    for i in range(1, max_terms):
        term = term * f / (i + k)
        total = total + term
        if np.abs(term.coeffs).sum() < atol:
            return total
    raise SeriesDivergenceError(f"exponential series did not converge in {max_terms} terms")


def exp_remainder(f: PeriodicFn, order: int, atol: float = 1e-15) -> PeriodicFn:
    """Cosine series of ``exp(f) - sum_{i<=order} f^i/i!``.

    Summed as the tail series ``f^(order+1) phi(f, order+1)`` so small ``f``
    does not suffer cancellation.
    """
    if not 0 <= order <= 4:
        raise ValueError("order must lie in 0..4")
    k = order + 1
    return (f ** k) * phi(f, k, atol=min(atol, 1e-17))


def exp(f: PeriodicFn) -> PeriodicFn:
    return 1.0 + exp_remainder(f, 0)


def second_derivative(f: PeriodicFn) -> PeriodicFn:
    n = np.arange(f.coeffs.size)
    return PeriodicFn(f.omega, -(n * f.omega) ** 2 * f.coeffs)


def derivative_two_sided(f: PeriodicFn) -> np.ndarray:
    """Exponential coefficients of ``f'`` (odd, purely imaginary), index ``-N..N``."""
    e = f.two_sided().astype(complex)
    N = f.N
    n = np.arange(-N, N + 1)
    return 1j * n * f.omega * e


def mean(f: PeriodicFn) -> float:
    return float(f.coeffs[0])


def evaluate(f: PeriodicFn, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    n = np.arange(f.coeffs.size)
    return np.cos(np.multiply.outer(t, n) * f.omega) @ f.coeffs


def sample(f: PeriodicFn, n_samples: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.linspace(0.0, f.T, n_samples, endpoint=False)
    return t, evaluate(f, t)


def norm_L2(f: PeriodicFn) -> float:
    """``L^2`` norm over one period."""
    c = f.coeffs
    return float(np.sqrt(f.T * (c[0] ** 2 + 0.5 * np.sum(c[1:] ** 2))))


def norm_C(f: PeriodicFn, n_samples: int | None = None) -> float:
    """Sup norm estimated by dense sampling (a lower bound)."""
    n_samples = n_samples or max(64, 8 * f.coeffs.size)
    return float(np.max(np.abs(sample(f, n_samples)[1])))


def norm_l1(f: PeriodicFn) -> float:
    """Coefficient sum, an upper bound on the sup norm."""
    return float(np.abs(f.coeffs).sum())


def inner_L2(f: PeriodicFn, g: PeriodicFn) -> float:
    """``int_0^T f g dt``."""
    size = max(f.coeffs.size, g.coeffs.size)
    a, b = f.padded(size), g.padded(size)
    return float(f.T * (a[0] * b[0] + 0.5 * np.dot(a[1:], b[1:])))


def linear_combination(weights: Sequence[float], fns: Sequence[PeriodicFn]) -> PeriodicFn:
    size = max(fn.coeffs.size for fn in fns)
    c = np.zeros(size)
    for wgt, fn in zip(weights, fns):
        c += float(wgt) * fn.padded(size)
    return PeriodicFn(fns[0].omega, c)
