"""Polynomial, rational-function and exponential-sum calculus.

Everything here is a small value type (``Poly``, ``RootSet``,
``PartialFractions``, ``ExpSum``) plus pure functions acting on them.
Coefficients are stored in ascending order of degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Iterator, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from .errors import NoRoots, NotRealValued, PoleZeroOverlap

CLUSTER_TOL = 1e-7
RESONANCE_TOL = 1e-9

_MERGE_RTOL = 1e-12
_EPS = np.finfo(float).eps
_CANCEL_EPS = 16 * _EPS


def _as_coeff_array(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs))
    if c.dtype.kind not in "fc":
        c = c.astype(float)
    return c


class Poly:
    """Polynomial with ascending coefficients; exact trailing zeros are trimmed."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = _as_coeff_array(coeffs)
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:1] * 0
        if c.size == 0:
            c = np.zeros(1)
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_real(self) -> bool:
        return self.coeffs.dtype.kind == "f" or not np.any(self.coeffs.imag)

    def maxcoeff(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __call__(self, z):
        # Horner, works elementwise on arrays
        c = self.coeffs
        z = np.asarray(z)
        acc = np.full(z.shape, c[-1], dtype=np.result_type(c, z, float))
        for a in c[-2::-1]:
            acc = acc * z + a
        return acc if acc.ndim else acc[()]

    def deriv(self, k: int = 1) -> "Poly":
        if k == 0:
            return self
        if self.degree < k:
            return Poly([0.0])
        return Poly(npoly.polyder(self.coeffs, k))

    def shift(self, a) -> np.ndarray:
        """Taylor coefficients of ``p(a + w)`` in ``w`` (ascending)."""
        c = list(np.asarray(self.coeffs, dtype=np.result_type(self.coeffs, a, float))[::-1])
        n = len(c)
        # repeated synthetic division by (z - a)
        for i in range(n - 1):
            for j in range(1, n - i):
                c[j] = c[j] + a * c[j - 1]
        return np.array(c[::-1])

    def reflect(self) -> "Poly":
        """The polynomial ``z -> p(-z)``."""
        sign = (-1.0) ** np.arange(self.coeffs.size)
        return Poly(self.coeffs * sign)

    def divide_z(self) -> "Poly":
        """``p(z)/z`` for a polynomial with vanishing constant term."""
        if self.coeffs[0] != 0 and self.degree > 0:
            raise ValueError("constant term is nonzero; p(z)/z is not a polynomial")
        return Poly(self.coeffs[1:] if self.degree > 0 else [0.0])

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly([other])
        return Poly(npoly.polyadd(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coeffs)

    def __sub__(self, other):
        return self + (-(other if isinstance(other, Poly) else Poly([other])))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(npoly.polymul(self.coeffs, other.coeffs))
        return Poly(self.coeffs * other)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Poly({np.array2string(self.coeffs, precision=6)})"


@dataclass(frozen=True)
class RootSet:
    """Distinct roots with algebraic multiplicities."""

    values: np.ndarray
    multiplicities: np.ndarray

    def __iter__(self) -> Iterator[tuple[complex, int]]:
        for lam, d in zip(self.values, self.multiplicities):
            yield complex(lam), int(d)

    def __len__(self):
        return len(self.values)

    @property
    def total_multiplicity(self) -> int:
        return int(np.sum(self.multiplicities))

    def expanded(self) -> np.ndarray:
        """All roots, repeated according to multiplicity."""
        return np.repeat(self.values, self.multiplicities)

    def is_simple(self) -> bool:
        return bool(np.all(self.multiplicities == 1))

    def product_form(self, z):
        """Evaluate ``prod_j (1 - z/lam_j)**d_j``."""
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for lam, d in self:
            out = out * (1 - z / lam) ** d
        return out


def _newton(p: Poly, dp: Poly, z0: complex, maxiter: int = 30) -> complex:
    z = z0
    r = abs(p(z))
    for _ in range(maxiter):
        d = dp(z)
        if d == 0:
            break
        step = p(z) / d
        zn = z - step
        rn = abs(p(zn))
        if rn > r and abs(step) > 1e-8 * max(abs(z), 1.0):
            break
        z, r = zn, rn
        if abs(step) <= 4 * np.finfo(float).eps * max(abs(z), 1e-300):
            break
    return z


def roots(p: Poly, cluster_tol: float = CLUSTER_TOL) -> RootSet:
    """All complex roots of ``p``, near-coincident ones merged into multiple roots.

    Companion-matrix eigenvalues are clustered by single linkage: two
    roots are linked when their distance is below ``cluster_tol`` times
    the larger of their moduli. Each cluster is replaced by its centroid
    and polished by Newton's method on ``p^(d-1)``.
    """
    if p.degree < 1:
        raise NoRoots("polynomial of degree 0 has no roots")
    raw = npoly.polyroots(p.coeffs).astype(complex)

    # single-linkage clusters
    labels = list(range(raw.size))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(raw.size):
        for j in range(i + 1, raw.size):
            if abs(raw[i] - raw[j]) < cluster_tol * max(abs(raw[i]), abs(raw[j])):
                labels[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(raw.size):
        groups.setdefault(find(i), []).append(i)

    values, mults = [], []
    for members in groups.values():
        d = len(members)
        z0 = complex(np.mean(raw[members]))
        q = p.deriv(d - 1)
        z = _newton(q, q.deriv(), z0)
        # polishing that wanders off the cluster is rejected
        if abs(z - z0) > cluster_tol * abs(z0):
            z = z0
        values.append(z)
        mults.append(d)
    order = np.lexsort((np.imag(values), np.real(values)))
    return RootSet(np.asarray(values, dtype=complex)[order], np.asarray(mults, dtype=int)[order])


@dataclass(frozen=True)
class PartialFractions:
    """Sum over poles ``lam_j`` of ``coeffs[j][k-1] / (z - lam_j)**k``."""

    poles: np.ndarray
    coeffs: tuple

    @property
    def terms(self) -> list[tuple[complex, int, complex]]:
        return [
            (complex(lam), k + 1, complex(c))
            for lam, cs in zip(self.poles, self.coeffs)
            for k, c in enumerate(cs)
        ]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for lam, cs in zip(self.poles, self.coeffs):
            for k, c in enumerate(cs):
                out = out + c / (z - lam) ** (k + 1)
        return out


def _series_divide(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """First ``n`` Taylor coefficients of ``a/b`` given those of a and b."""
    a = np.concatenate([a, np.zeros(max(0, n - a.size))]).astype(complex)
    b = np.concatenate([b, np.zeros(max(0, n - b.size))]).astype(complex)
    q = np.zeros(n, dtype=complex)
    for i in range(n):
        q[i] = (a[i] - np.dot(q[:i], b[i:0:-1])) / b[0]
    return q


def partial_fractions(
    num: Poly,
    den_roots: RootSet,
    den_scale: complex = 1.0,
    cluster_tol: float = CLUSTER_TOL,
    check_overlap: bool = True,
) -> PartialFractions:
    """Decompose ``num(z) / (den_scale * prod (z - lam_j)**d_j)``.

    The order-k coefficient at a pole of multiplicity d is the
    ``(d-k)``-th Taylor coefficient of ``num * (z - lam)**d / den`` at lam,
    obtained by exact polynomial shifts and a truncated series division.
    """
    if num.degree >= den_roots.total_multiplicity and np.any(num.coeffs):
        raise ValueError("numerator degree must be below denominator degree")
    scale = float(np.max(np.abs(den_roots.values)))
    if check_overlap and num.degree >= 1:
        zr = npoly.polyroots(num.coeffs)
        for lam in den_roots.values:
            if np.any(np.abs(zr - lam) < cluster_tol * max(scale, abs(lam))):
                raise PoleZeroOverlap(f"numerator vanishes at pole {lam}")

    coeffs = []
    for j, (lam, d) in enumerate(den_roots):
        g = Poly([den_scale])
        for i, (mu, e) in enumerate(den_roots):
            if i != j:
                g = g * Poly(npoly.polypow([-mu, 1.0], e))
        taylor = _series_divide(num.shift(lam)[:d], g.shift(lam)[:d], d)
        # coefficient of (z-lam)^-k is taylor[d-k]
        coeffs.append(taylor[::-1].copy())
    return PartialFractions(den_roots.values.copy(), tuple(coeffs))


class ExpSum:
    """Finite sum ``sum_i c_i t**p_i exp(mu_i t)`` with complex c, mu.

    Terms with identical ``(p, mu)`` (exponents equal to ``1e-12``
    relative) are merged on construction. A merged coefficient that cancels
    to rounding level is set to zero, and coefficients below
    ``1e-15 * max|c|`` are dropped.
    """

    __slots__ = ("c", "p", "mu", "err")

    def __init__(self, terms: Sequence[tuple] = (), *, _arrays=None, _err=None):
        if _arrays is None:
            if len(terms):
                c, p, mu = zip(*terms)
            else:
                c, p, mu = (), (), ()
            _arrays = (c, p, mu)
        c = np.asarray(_arrays[0], dtype=complex).ravel()
        p = np.asarray(_arrays[1], dtype=int).ravel()
        mu = np.asarray(_arrays[2], dtype=complex).ravel()
        if np.any(p < 0):
            raise ValueError("powers of t must be nonnegative")
        e = _EPS * np.abs(c) if _err is None else np.asarray(_err, dtype=float).ravel()
        groups: dict[int, list] = {}  # p -> [[mu, sum, abs_sum, err], ...]
        for ci, pi, mi, ei in zip(c, p, mu, e):
            bucket = groups.setdefault(int(pi), [])
            tol = _MERGE_RTOL * max(1.0, abs(mi))
            for g in bucket:
                if abs(g[0] - mi) <= tol:
                    g[1] += ci
                    g[2] += abs(ci)
                    g[3] += ei
                    break
            else:
                bucket.append([complex(mi), complex(ci), abs(ci), float(ei)])
        kept = [
            (pi, g[0], g[1], g[3] + _EPS * g[2])
            for pi, bucket in groups.items()
            for g in bucket
            # a sum that cancels to rounding level is an exact zero
            if abs(g[1]) > _CANCEL_EPS * g[2]
        ]
        if kept:
            cmax = max(abs(k[2]) for k in kept)
            kept = [k for k in kept if abs(k[2]) >= 1e-15 * cmax]
        kept.sort(key=lambda k: (k[0], k[1].real, k[1].imag))
        self.c = np.array([k[2] for k in kept], dtype=complex)
        self.p = np.array([k[0] for k in kept], dtype=int)
        self.mu = np.array([k[1] for k in kept], dtype=complex)
        self.err = np.array([k[3] for k in kept], dtype=float)
        for a in (self.c, self.p, self.mu, self.err):
            a.setflags(write=False)

    @classmethod
    def constant(cls, value) -> "ExpSum":
        return cls([(value, 0, 0.0)])

    @classmethod
    def exponential(cls, coeff, rate) -> "ExpSum":
        return cls([(coeff, 0, rate)])

    @property
    def terms(self) -> list[tuple[complex, int, complex]]:
        return [(complex(c), int(p), complex(m)) for c, p, m in zip(self.c, self.p, self.mu)]

    def __len__(self):
        return self.c.size

    def __repr__(self):
        inner = ", ".join(f"({c:.6g}, {p}, {m:.6g})" for c, p, m in self.terms)
        return f"ExpSum([{inner}])"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tt = t[..., None]
        val = np.sum(self.c * tt ** self.p * np.exp(self.mu * tt), axis=-1)
        return val if val.ndim else complex(val)

    def scaled(self, t):
        """Return ``(value * exp(-kappa), kappa)`` with ``kappa = max Re(mu) t``.

        Keeps sign information for arguments where the plain value overflows.
        """
        t = np.asarray(t, dtype=float)
        tt = t[..., None]
        if self.c.size == 0:
            z = np.zeros(t.shape, dtype=complex)
            return (z if z.ndim else complex(z)), (np.zeros(t.shape) if t.ndim else 0.0)
        expo = self.mu.real * tt
        kappa = np.max(expo, axis=-1)
        val = np.sum(
            self.c * tt ** self.p * np.exp(expo - kappa[..., None] + 1j * self.mu.imag * tt), axis=-1
        )
        if val.ndim:
            return val, kappa
        return complex(val), float(kappa)

    def derivative(self) -> "ExpSum":
        c = np.concatenate([self.c * self.mu, self.c * self.p])
        p = np.concatenate([self.p, np.maximum(self.p - 1, 0)])
        mu = np.concatenate([self.mu, self.mu])
        keep = np.concatenate([np.ones(self.c.size, bool), self.p > 0])
        e = np.concatenate([self.err * np.abs(self.mu), self.err * self.p])
        return ExpSum(_arrays=(c[keep], p[keep], mu[keep]), _err=e[keep] + _EPS * np.abs(c[keep]))

    def antiderivative(self, resonance_tol: float = RESONANCE_TOL) -> "ExpSum":
        return expsum_antiderivative(self, resonance_tol)

    def reflect(self) -> "ExpSum":
        """The sum ``t -> s(-t)``."""
        return ExpSum(_arrays=(self.c * (-1.0) ** self.p, self.p, -self.mu), _err=self.err)

    def conj(self) -> "ExpSum":
        return ExpSum(_arrays=(self.c.conj(), self.p, self.mu.conj()), _err=self.err)

    def is_conjugate_closed(self, rtol: float = 1e-9) -> bool:
        if self.c.size == 0:
            return True
        cscale = float(np.max(np.abs(self.c)))
        for c, p, mu in self.terms:
            ok = (
                (self.p == p)
                & (np.abs(self.c - np.conj(c)) <= rtol * cscale)
                & (np.abs(self.mu - np.conj(mu)) <= rtol * max(1.0, abs(mu)))
            )
            if not np.any(ok):
                return False
        return True

    def __add__(self, other):
        other = other if isinstance(other, ExpSum) else ExpSum.constant(other)
        return ExpSum(
            _arrays=(
                np.concatenate([self.c, other.c]),
                np.concatenate([self.p, other.p]),
                np.concatenate([self.mu, other.mu]),
            ),
            _err=np.concatenate([self.err, other.err]),
        )

    __radd__ = __add__

    def __neg__(self):
        return ExpSum(_arrays=(-self.c, self.p, self.mu), _err=self.err)

    def __sub__(self, other):
        other = other if isinstance(other, ExpSum) else ExpSum.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, ExpSum):
            c = self.c * other
            return ExpSum(_arrays=(c, self.p, self.mu), _err=self.err * abs(other) + _EPS * np.abs(c))
        c = np.multiply.outer(self.c, other.c).ravel()
        p = np.add.outer(self.p, other.p).ravel()
        mu = np.add.outer(self.mu, other.mu).ravel()
        e = (
            np.multiply.outer(self.err, np.abs(other.c))
            + np.multiply.outer(np.abs(self.c), other.err)
            + np.multiply.outer(self.err, other.err)
        ).ravel()
        return ExpSum(_arrays=(c, p, mu), _err=e + _EPS * np.abs(c))

    def error_bound(self, t) -> float:
        """First-order bound on the rounding error of ``self(t)``, scaled like ``scaled``.

        Returns ``(bound * exp(-kappa), kappa)`` with the same ``kappa`` as
        ``scaled(t)``; every coefficient carries a running bound on the
        rounding error accumulated while it was formed.
        """
        tt = float(t)
        if self.c.size == 0:
            return 0.0, 0.0
        expo = self.mu.real * tt
        kappa = float(np.max(expo))
        return float(np.sum(self.err * abs(tt) ** self.p * np.exp(expo - kappa))), kappa

    __rmul__ = __mul__


def expsum_antiderivative(s: ExpSum, resonance_tol: float = RESONANCE_TOL) -> ExpSum:
    """Antiderivative ``F`` of ``s`` normalized by ``F(0) = 0``.

    Exponents with ``|mu| < resonance_tol`` count as zero, so the term
    integrates to a pure power of t.
    """
    out, errs = [], []
    for (c, p, mu), e in zip(s.terms, s.err):
        if abs(mu) < resonance_tol:
            out.append((c / (p + 1), p + 1, 0.0))
            errs.append(e / (p + 1))
            continue
        # int_0^t tau^p e^{mu tau} = e^{mu t} sum_k (-1)^k p!/(p-k)! t^{p-k}/mu^{k+1} - (-1)^p p!/mu^{p+1}
        for k in range(p + 1):
            coef = (-1) ** k * factorial(p) / factorial(p - k) / mu ** (k + 1)
            out.append((c * coef, p - k, mu))
            errs.append(e * abs(coef))
        coef = -((-1) ** p) * factorial(p) / mu ** (p + 1)
        out.append((c * coef, 0, 0.0))
        errs.append(e * abs(coef))
    if not out:
        return ExpSum()
    errs = np.asarray(errs) + _EPS * np.abs([o[0] for o in out])
    return ExpSum(_arrays=tuple(zip(*out)), _err=errs)


def expsum_smallest_positive_root(s: ExpSum, horizon: float, nscan: int = 4096) -> float | None:
    """Smallest zero of the real-valued sum ``s`` in ``(0, horizon]``.

    Detects the first sign change on a uniform grid of ``nscan`` steps, then
    refines it by bracketing to ``1e-12 * max(1, |t|)``. Evaluation uses
    ``ExpSum.scaled`` so large exponents do not overflow.
    """
    if not s.is_conjugate_closed():
        raise NotRealValued("exponential sum is not conjugate-symmetric")
    if len(s) == 0 or horizon <= 0:
        return None
    grid = np.linspace(0.0, horizon, nscan + 1)
    vals = s.scaled(grid)[0].real
    sgn = np.sign(vals)
    for i in range(1, grid.size):
        if sgn[i] == 0:
            return float(grid[i])
        if sgn[i - 1] != 0 and sgn[i] != sgn[i - 1]:
            a, b = grid[i - 1], grid[i]

            def f(t):
                return s.scaled(t)[0].real

            return float(brentq(f, a, b, xtol=1e-13 * max(1.0, abs(b)), rtol=4 * np.finfo(float).eps, maxiter=200))
    return None
