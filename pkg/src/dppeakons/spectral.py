"""Forward spectral map of the multipeakon boundary value problem.

A peakon state is swept site by site through rank-one transition
matrices; the first column of the product gives the polynomials
``A, B, C`` whose zeros (of A) are the eigenvalues. The adjoint problem is
the same computation on the reflected state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidSpectrum, InvalidState, PoleZeroOverlap
from .polycalc import CLUSTER_TOL, RESONANCE_TOL, Poly, RootSet, partial_fractions, roots


@dataclass(frozen=True, eq=False)
class PeakonState:
    """Positions ``x`` (strictly increasing) and nonzero masses ``m`` at time ``t``."""

    x: np.ndarray
    m: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        m = np.array(self.m, dtype=float).ravel()
        if x.size == 0:
            raise InvalidState("state has no peakons", field="x")
        if x.size != m.size:
            raise InvalidState(f"x has {x.size} entries but m has {m.size}", field="m")
        if not np.all(np.isfinite(x)):
            raise InvalidState("positions must be finite", field="x")
        if not np.all(np.isfinite(m)):
            raise InvalidState("masses must be finite", field="m")
        if np.any(np.diff(x) <= 0):
            raise InvalidState("positions must be strictly increasing", field="x")
        if np.any(m == 0):
            raise InvalidState("masses must be nonzero", field="m")
        x.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "t", float(self.t))

    def __eq__(self, other):
        if not isinstance(other, PeakonState):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.x, other.x) and np.array_equal(self.m, other.m)

    __hash__ = None

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def signature(self) -> tuple[int, ...]:
        return tuple(int(s) for s in np.sign(self.m))

    def reflected(self) -> "PeakonState":
        """Reversed masses at negated, reversed positions."""
        return PeakonState(-self.x[::-1], self.m[::-1], self.t)

    def u(self, xs):
        """Multipeakon profile ``sum_i m_i exp(-|x - x_i|)``."""
        xs = np.asarray(xs, dtype=float)
        return np.sum(self.m * np.exp(-np.abs(xs[..., None] - self.x)), axis=-1)


@dataclass(frozen=True)
class PolyTriple:
    A: Poly
    B: Poly
    C: Poly

    def __iter__(self):
        return iter((self.A, self.B, self.C))


@dataclass(frozen=True)
class SpectrumData:
    """Eigenvalues of A and the Weyl-function residues of both problems.

    ``b[j][k-1]`` is the coefficient of ``(z - lam_j)**-k`` in omega and
    ``b_adj`` the same for the adjoint Weyl function.
    """

    eigenvalues: RootSet
    b: tuple
    b_adj: tuple
    M_plus: float
    M_minus: float
    anti_resonant: bool = False
    flags: tuple = field(default=())

    def residue_sum(self) -> complex:
        return complex(sum(bj[0] for bj in self.b))

    def adjoint_residue_sum(self) -> complex:
        return complex(sum(bj[0] for bj in self.b_adj))


def transition_matrix(m_k: float, x_k: float, z: complex) -> np.ndarray:
    """``I - z m_k u v^T`` with ``u = (e^-x, -2, e^x)``, ``v = (e^x, 1, e^-x)``."""
    u = np.array([np.exp(-x_k), -2.0, np.exp(x_k)])
    v = np.array([np.exp(x_k), 1.0, np.exp(-x_k)])
    return np.eye(3, dtype=complex) - z * m_k * np.outer(u, v)


def transfer_product(s: PeakonState, z: complex) -> np.ndarray:
    """Numerical ``S(z) = S_n(z) ... S_1(z)``."""
    S = np.eye(3, dtype=complex)
    for mk, xk in zip(s.m, s.x):
        S = transition_matrix(mk, xk, z) @ S
    return S


def spectral_polynomials(s: PeakonState) -> PolyTriple:
    """``(A, B, C)`` from the site-by-site recursion applied to (1, 0, 0).

    Each step adds ``-z m_k u_k (e^{x_k} A + B + e^{-x_k} C)``; the A
    update is written with ratios ``e^{-x_k} B`` so that it involves only
    position differences.
    """
    A = np.array([1.0])
    B = np.array([0.0])
    C = np.array([0.0])
    for mk, xk in zip(s.m, s.x):
        ex, emx = np.exp(xk), np.exp(-xk)
        n = A.size + 1
        A_, B_, C_ = (np.pad(P, (0, n - P.size)) for P in (A, B, C))
        # w = e^{-x} (e^{x} A + B + e^{-x} C), as a polynomial in z
        w = A_ + emx * B_ + emx * emx * C_
        zw = np.concatenate([[0.0], w[:-1]])
        A = A_ - mk * zw
        B = B_ + 2.0 * mk * ex * zw
        C = C_ - mk * ex * ex * zw
    return PolyTriple(Poly(A), Poly(B), Poly(C))


def subset_polynomials(s: PeakonState) -> PolyTriple:
    """Explicit subset-sum formula for ``(A, B, C)``; exponential in n.

    Kept as an independent reference for the recursion.
    """
    n = s.n
    A = np.zeros(n + 1)
    B = np.zeros(n + 1)
    C = np.zeros(n + 1)
    A[0] = 1.0
    for p in range(1, n + 1):
        for I in combinations(range(n), p):
            w = float(np.prod(s.m[list(I)]))
            for a, b in zip(I[:-1], I[1:]):
                w *= (-np.expm1(s.x[a] - s.x[b])) ** 2
            last = s.x[I[-1]]
            sgn = (-1.0) ** p
            A[p] += sgn * w
            B[p] += sgn * w * (-2.0 * np.exp(last))
            C[p] += sgn * w * np.exp(2.0 * last)
    return PolyTriple(Poly(A), Poly(B), Poly(C))


def adjoint_polynomials(s: PeakonState) -> PolyTriple:
    """``(A~, B~, C~)``: the forward polynomials of the reflected state."""
    return spectral_polynomials(s.reflected())


def eigenvalues(s_or_A, cluster_tol: float = CLUSTER_TOL) -> RootSet:
    A = s_or_A if isinstance(s_or_A, Poly) else spectral_polynomials(s_or_A).A
    return roots(A, cluster_tol)


def has_anti_resonance(eig: RootSet, rtol: float = RESONANCE_TOL) -> bool:
    lam = eig.values
    scale = float(np.max(np.abs(lam)))
    return any(abs(a + b) < rtol * scale for a, b in combinations(lam, 2))


def weyl_residues(
    pt: PolyTriple,
    apt: PolyTriple,
    eig: RootSet,
    resonance_tol: float = RESONANCE_TOL,
) -> SpectrumData:
    """Partial fractions of ``omega = -B/(2zA)`` and its adjoint over the eigenvalues.

    ``z = 0`` is removable because ``B(0) = 0``; B/z is formed exactly.
    """
    if np.any(np.abs(eig.values) == 0) or abs(pt.A(0.0)) == 0:
        raise InvalidSpectrum("eigenvalue at zero; A(0) must equal 1")
    lead = pt.A.coeffs[-1]
    den_scale = 2.0 * lead
    flags = []
    out = []
    for P in (pt.B, apt.B):
        num = -P.divide_z()
        try:
            pf = partial_fractions(num, eig, den_scale)
        except PoleZeroOverlap:
            flags.append("pole-zero overlap")
            pf = partial_fractions(num, eig, den_scale, check_overlap=False)
        out.append(tuple(np.asarray(c) for c in pf.coeffs))
    anti = has_anti_resonance(eig, resonance_tol)
    if anti:
        flags.append("anti-resonance")
    return SpectrumData(
        eigenvalues=eig,
        b=out[0],
        b_adj=out[1],
        M_plus=float(np.real(pt.B.coeffs[1]) / 2.0) if pt.B.degree >= 1 else 0.0,
        M_minus=float(np.real(apt.B.coeffs[1]) / 2.0) if apt.B.degree >= 1 else 0.0,
        anti_resonant=anti,
        flags=tuple(flags),
    )


def spectrum(s: PeakonState, cluster_tol: float = CLUSTER_TOL) -> SpectrumData:
    """Convenience: eigenvalues and residues of a state in one call."""
    pt = spectral_polynomials(s)
    apt = adjoint_polynomials(s)
    return weyl_residues(pt, apt, roots(pt.A, cluster_tol))


def _random_disc(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, 2 * np.pi, n)
    return r * np.exp(1j * th)


def check_fundamental_identity(pt: PolyTriple, rng=None, npoints: int = 20) -> float:
    """Max of ``|2A(z)C(-z) + 2A(-z)C(z) - B(z)B(-z)|`` over random z,
    normalized by the largest of the three term magnitudes."""
    rng = np.random.default_rng(0) if rng is None else rng
    if pt.A.degree >= 1:
        lam_min = float(np.min(np.abs(roots(pt.A).values)))
        radius = 2.0 / lam_min
    else:
        radius = 1.0
    z = _random_disc(rng, npoints, radius)
    A, B, C = pt
    t1 = 2 * A(z) * C(-z)
    t2 = 2 * A(-z) * C(z)
    t3 = B(z) * B(-z)
    scale = np.maximum.reduce([np.abs(t1), np.abs(t2), np.abs(t3)])
    scale = np.where(scale == 0, 1.0, scale)
    return float(np.max(np.abs(t1 + t2 - t3) / scale))


J_MATRIX = np.array([[0.0, 0.0, 1.0], [0.0, -2.0, 0.0], [1.0, 0.0, 0.0]])


def check_involution(s: PeakonState, z: complex) -> float:
    """``max |J S(z)^T J^{-1} S(-z) - I|`` entrywise."""
    S = transfer_product(s, z)
    Sm = transfer_product(s, -z)
    lhs = J_MATRIX @ S.T @ np.linalg.inv(J_MATRIX) @ Sm
    return float(np.max(np.abs(lhs - np.eye(3))))


class SymmetryCheck(NamedTuple):
    cb_residual: float
    bb_residual: float
    bb_skipped: int


def term_scale(P: Poly, z: complex) -> float:
    """``sum_k |c_k| |z|^k``: the size of the terms summed when evaluating ``P(z)``."""
    return float(np.sum(np.abs(P.coeffs) * np.abs(z) ** np.arange(P.coeffs.size)))


def check_symmetry_relations(pt: PolyTriple, apt: PolyTriple, eig: RootSet) -> SymmetryCheck:
    """Residuals of ``B(-l) = C(l) B~(l)`` and ``2A(-l) = B(l) B~(l)`` at eigenvalues.

    Residuals are normalized by the magnitude of the terms involved, i.e.
    by ``term_scale`` of each side, as for the fundamental identity. A large
    eigenvalue makes the values themselves tiny next to their terms. The
    second relation is only tested where ``|B(-l)|`` exceeds ``1e-10`` of
    its term scale; skipped eigenvalues are counted.
    """
    cb, bb, skipped = 0.0, 0.0, 0
    for lam, d in eig:
        if d != 1:
            continue
        lhs, rhs = pt.B(-lam), pt.C(lam) * apt.B(lam)
        scale = max(term_scale(pt.B, -lam), term_scale(pt.C, lam) * term_scale(apt.B, lam), 1e-300)
        cb = max(cb, abs(lhs - rhs) / scale)
        if abs(lhs) <= 1e-10 * term_scale(pt.B, -lam):
            skipped += 1
            continue
        lhs, rhs = 2 * pt.A(-lam), pt.B(lam) * apt.B(lam)
        scale = max(2 * term_scale(pt.A, -lam), term_scale(pt.B, lam) * term_scale(apt.B, lam), 1e-300)
        bb = max(bb, abs(lhs - rhs) / scale)
    return SymmetryCheck(float(cb), float(bb), skipped)


def residue_product_formula(eig: RootSet) -> np.ndarray:
    """``prod_{j != i} (1 + l_i/l_j) / (1 - l_i/l_j)**2`` for each simple eigenvalue."""
    lam = eig.values
    out = np.empty(lam.size, dtype=complex)
    for i, li in enumerate(lam):
        r = li / np.delete(lam, i)
        out[i] = np.prod((1 + r) / (1 - r) ** 2)
    return out


def residue_condition(pt: PolyTriple, apt: PolyTriple, lam: complex) -> float:
    """Condition number of ``b b~ = B(l) B~(l) / (2 l A'(l))^2`` as evaluated.

    The product of ``term_scale(P, l) / |P(l)|`` over the factors ``B``,
    ``B~`` and twice ``A'``.
    """
    dA = pt.A.deriv()
    k = 1.0
    for P, power in ((pt.B, 1), (apt.B, 1), (dA, 2)):
        v = abs(P(lam))
        k *= (term_scale(P, lam) / v) ** power if v > 0 else np.inf
    return float(k)


def check_residue_products(sd: SpectrumData, pt: PolyTriple | None = None, apt: PolyTriple | None = None):
    """Relative error of ``b_i b~_i`` against the eigenvalue product formula.

    With the polynomials supplied, each error is divided by the condition
    number of evaluating ``b_i b~_i`` (``residue_condition``), giving a
    residual normalized like the polynomial identities. Returns None
    (skipped) for non-simple or anti-resonant spectra, where the formula is
    not asserted.
    """
    eig = sd.eigenvalues
    if not eig.is_simple() or sd.anti_resonant:
        return None
    lhs = np.array([b[0] * bt[0] for b, bt in zip(sd.b, sd.b_adj)])
    rhs = residue_product_formula(eig)
    err = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)
    if pt is not None and apt is not None:
        err = err / np.array([max(residue_condition(pt, apt, lam), 1.0) for lam in eig.values])
    return float(np.max(err))


def match_eigenvalues(ref: Sequence[complex], other: Sequence[complex]) -> np.ndarray:
    """Greedy nearest-neighbour reordering of ``other`` to line up with ``ref``."""
    ref = np.asarray(ref, dtype=complex)
    left = list(np.asarray(other, dtype=complex))
    out = np.empty(ref.size, dtype=complex)
    pairs = sorted(
        ((abs(a - b), i, j) for i, a in enumerate(ref) for j, b in enumerate(left)),
    )
    used_i, used_j = set(), set()
    for _, i, j in pairs:
        if i in used_i or j in used_j:
            continue
        out[i] = left[j]
        used_i.add(i)
        used_j.add(j)
    return out
