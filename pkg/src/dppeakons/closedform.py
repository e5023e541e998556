"""Semi-analytic solution of three DP peakons from residue evolution.

``e^{x3(t)}`` and ``e^{-x1(t)}`` are exponential sums built from the Weyl
residues at t = 0. The outer masses solve Bernoulli equations whose
quadratures are done exactly on exponential sums::

    1/m3 = e^{-2 x3} [ e^{2 x3(0)}/m3(0) + 2 int_0^t e^{2 x3} ]
    1/m1 = e^{2 x1}  [ e^{-2 x1(0)}/m1(0) - 2 int_0^t e^{-2 x1} ]

and the middle peakon follows algebraically from M1 together with
M_+ = d/dt e^{x3} (or its mirror M_- = -d/dt e^{-x1}).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import InternalError, MassTwoVanishes, OutsideWindow, Unsupported
from .polycalc import CLUSTER_TOL, RESONANCE_TOL, ExpSum, RootSet, expsum_smallest_positive_root
from .spectral import PeakonState, SpectrumData, spectrum

DEFAULT_HORIZON = 50.0


def _residue_polynomials(lam: complex, b0: np.ndarray, sign: float) -> list[np.ndarray]:
    """Polynomial parts ``p^(k)(t)`` (ascending in t) of evolving residues.

    With ``sign = +1`` the residues obey
    ``db^(k)/dt = sum_{s>=k} (-1)^{s-k} lam^{-(s-k+1)} b^(s)``; the adjoint
    residues (``sign = -1``) carry the opposite overall sign.
    """
    d = b0.size
    polys: list[np.ndarray] = [None] * d  # type: ignore[list-item]
    for k in range(d - 1, -1, -1):
        # b^(k) = e^{sign t/lam} p^(k);  dp^(k)/dt = sign * sum_{s>k} (-1)^{s-k} lam^{-(s-k+1)} p^(s)
        deriv = np.zeros(d, dtype=complex)
        for s in range(k + 1, d):
            ps = polys[s]
            deriv[: ps.size] += sign * (-1) ** (s - k) / lam ** (s - k + 1) * ps
        integ = np.concatenate([[b0[k]], deriv[: d - 1] / np.arange(1, d)])
        polys[k] = integ
    return polys


def residue_expsum(eig: RootSet, residues, sign: float) -> ExpSum:
    """``sum_j b_j^(1)(t)`` as an exponential sum with rates ``sign/lam_j``."""
    terms = []
    for (lam, d), b0 in zip(eig, residues):
        p1 = _residue_polynomials(lam, np.asarray(b0, dtype=complex), sign)[0]
        for power, c in enumerate(p1):
            if c != 0:
                terms.append((c, power, sign / lam))
    return ExpSum(terms)


@dataclass(frozen=True)
class ClosedFormSolution:
    """Exponential sums describing a three-peakon solution.

    Besides the primary sums, the products ``r_m2 = m2 q1 q3`` and
    ``r_px2 = m2 e^{x2} q1 q3``, ``r_mx2 = m2 e^{-x2} q1 q3`` are kept as
    exponential sums. Forming them term by term lets the exact
    cancellations between the outer-peakon contributions happen on the
    coefficients, which keeps the middle peakon accurate when its mass is
    small and the gaps are wide.
    """

    initial: PeakonState
    spectrum: SpectrumData
    e_x3: ExpSum
    e_mx1: ExpSum
    q3: ExpSum  # 1/m3 = q3 / e_x3**2
    q1: ExpSum  # 1/m1 = q1 / e_mx1**2
    M1: float
    horizon: float = DEFAULT_HORIZON
    d_x3: ExpSum = field(default=None, repr=False)  # M_+ = d/dt e^{x3}
    d_mx1: ExpSum = field(default=None, repr=False)  # M_- = -d/dt e^{-x1}
    r_m2: ExpSum = field(default=None, repr=False)
    r_px2: ExpSum = field(default=None, repr=False)
    r_mx2: ExpSum = field(default=None, repr=False)
    q13: ExpSum = field(default=None, repr=False)

    def __post_init__(self):
        if self.r_m2 is not None:
            return
        E3, E1, Q3, Q1 = self.e_x3, self.e_mx1, self.q3, self.q1
        d3, d1 = E3.derivative(), E1.derivative()
        Q13 = Q1 * Q3
        E3sq, E1sq = E3 * E3, E1 * E1
        put = object.__setattr__
        put(self, "d_x3", d3)
        put(self, "d_mx1", -d1)
        put(self, "q13", Q13)
        put(self, "r_m2", self.M1 * Q13 - E1sq * Q3 - E3sq * Q1)
        put(self, "r_px2", (d3 * Q3 - E3sq * E3) * Q1 - E1 * Q3)
        put(self, "r_mx2", (-d1 * Q1 - E1sq * E1) * Q3 - E3 * Q1)

    @property
    def eigenvalues(self) -> RootSet:
        return self.spectrum.eigenvalues

    def inv_m3(self, t):
        return np.real(self.q3(t) / self.e_x3(t) ** 2)

    def inv_m1(self, t):
        return np.real(self.q1(t) / self.e_mx1(t) ** 2)


def build(
    s0: PeakonState,
    horizon: float = DEFAULT_HORIZON,
    cluster_tol: float = CLUSTER_TOL,
    resonance_tol: float = RESONANCE_TOL,
) -> ClosedFormSolution:
    """Closed-form solution for a three-peakon state taken as the t = 0 data."""
    if s0.n != 3:
        raise Unsupported("closed-form reconstruction is implemented for n = 3 only")
    sd = spectrum(s0, cluster_tol)
    if np.any(sd.eigenvalues.multiplicities >= 3):
        raise InternalError("triple eigenvalue reported; check the clustering tolerance")
    e_x3 = residue_expsum(sd.eigenvalues, sd.b, +1.0)
    e_mx1 = residue_expsum(sd.eigenvalues, sd.b_adj, -1.0)
    x1, x3 = s0.x[0], s0.x[-1]
    m1, m3 = s0.m[0], s0.m[-1]
    # times are measured from s0.t; residues are taken at that instant
    q3 = _quadrature_numerator(np.exp(2 * x3) / m3, e_x3, 2.0, resonance_tol)
    q1 = _quadrature_numerator(np.exp(-2 * x1) / m1, e_mx1, -2.0, resonance_tol)
    return ClosedFormSolution(s0, sd, e_x3, e_mx1, q3, q1, float(np.sum(s0.m)), horizon)


def _quadrature_numerator(k0: float, e: ExpSum, factor: float, resonance_tol: float) -> ExpSum:
    """``k0 + factor * int_0^t e^2`` with its constant coefficient made exact.

    For a spectrum without anti-resonances the constant coefficient of
    this sum vanishes identically: ``k0`` equals the sum of the integration
    constants. In floating point it survives as rounding of size about
    ``1e-13`` relative, which would later grow into spurious zeros far out
    in time, so it is set to zero when it vanishes to within ``1e-9`` of
    its parts.
    """
    sq = e * e
    q = ExpSum.constant(k0) + factor * sq.antiderivative(resonance_tol)
    if np.any(np.abs(sq.mu) < resonance_tol):
        return q
    parts = abs(k0) + abs(factor) * sum(
        abs(c) * factorial(p) / abs(mu) ** (p + 1) for c, p, mu in sq.terms
    )
    const = (q.p == 0) & (q.mu == 0)
    if np.any(const) and np.all(np.abs(q.c[const]) <= 1e-9 * parts):
        keep = ~const
        return ExpSum(_arrays=(q.c[keep], q.p[keep], q.mu[keep]), _err=q.err[keep])
    return q


def _log_abs(s: ExpSum, t: float) -> tuple[float, float]:
    """``(sign, log|s(t)|)`` of a real-valued sum, safe against overflow."""
    v, kappa = s.scaled(t)
    r = float(np.real(v))
    if r == 0 or not np.isfinite(r):
        return 0.0, -np.inf
    return float(np.sign(r)), kappa + float(np.log(abs(r)))


def _ratio(num: ExpSum, den: ExpSum, t: float) -> float:
    sn, ln = _log_abs(num, t)
    sd, ld = _log_abs(den, t)
    if sd == 0:
        return np.inf
    return sn * sd * float(np.exp(ln - ld))


def _relative_error(s: ExpSum, t: float) -> float:
    """Rounding-error bound of ``s(t)`` relative to its value."""
    v, _ = s.scaled(t)
    e, _ = s.error_bound(t)
    r = abs(float(np.real(v)))
    return e / r if r > 0 else np.inf


def _log_ex2(cf: ClosedFormSolution, t: float) -> tuple[float, float]:
    """``(sign, x2)`` from whichever of ``r_px2``, ``r_mx2`` has the smaller error bound.

    Cancellations between the two terms are exact on the coefficients of
    one of the numerators and only approximate on the other; the tracked
    coefficient error bounds tell them apart.
    """
    sm, lm = _log_abs(cf.r_m2, t)
    if _relative_error(cf.r_px2, t) <= _relative_error(cf.r_mx2, t):
        sp, lp = _log_abs(cf.r_px2, t)
        return sp * sm, lp - lm
    sn, ln = _log_abs(cf.r_mx2, t)
    return sn * sm, lm - ln


def _signed_exp(sign: float, log: float) -> float:
    with np.errstate(over="ignore"):
        return float(sign * np.exp(log)) if sign != 0 else 0.0


def _mass(e: ExpSum, q: ExpSum, t: float) -> float:
    """``e(t)**2 / q(t)`` in log form; infinite where q vanishes (a collision)."""
    _, le = _log_abs(e, t)
    sq, lq = _log_abs(q, t)
    if sq == 0:
        return np.inf
    return _signed_exp(sq, 2 * le - lq)


def formal_values(cf: ClosedFormSolution, t: float) -> dict:
    """Positions, masses and outer velocities from the closed-form sums, unchecked.

    Beyond a collision these are a formal continuation, not a peakon state.
    Positions whose exponential is not positive are NaN; ``ex1..ex3`` hold
    the signed exponentials themselves. ``v1``, ``v3`` are the outer
    velocities and ``M_plus`` is ``d/dt e^{x3}``.
    """
    s3, lx3 = _log_abs(cf.e_x3, t)
    s1, lmx1 = _log_abs(cf.e_mx1, t)
    sg, lx2 = _log_ex2(cf, t)
    sp, lp = _log_abs(cf.d_x3, t)
    return dict(
        x1=-lmx1 if s1 > 0 else np.nan,
        x2=lx2 if sg > 0 else np.nan,
        x3=lx3 if s3 > 0 else np.nan,
        ex1=_signed_exp(s1, -lmx1),
        ex2=_signed_exp(sg, lx2),
        ex3=_signed_exp(s3, lx3),
        m1=_mass(cf.e_mx1, cf.q1, t),
        m2=_ratio(cf.r_m2, cf.q13, t),
        m3=_mass(cf.e_x3, cf.q3, t),
        v1=_ratio(cf.d_mx1, cf.e_mx1, t),
        v3=_ratio(cf.d_x3, cf.e_x3, t),
        M_plus=_signed_exp(sp, lp),
    )


def state_at(cf: ClosedFormSolution, t: float) -> PeakonState:
    """Reconstruct the peakon state at time ``t`` (relative to the data)."""
    if t == 0:
        return cf.initial
    s3, lx3 = _log_abs(cf.e_x3, t)
    s1, lmx1 = _log_abs(cf.e_mx1, t)
    if s3 <= 0:
        raise OutsideWindow(f"e^{{x3}} is not positive at t={t:.17g}; t lies outside the validity window")
    if s1 <= 0:
        raise OutsideWindow(f"e^{{-x1}} is not positive at t={t:.17g}; t lies outside the validity window")
    sq3, lq3 = _log_abs(cf.q3, t)
    sq1, lq1 = _log_abs(cf.q1, t)
    m3 = sq3 * float(np.exp(2 * lx3 - lq3))
    m1 = sq1 * float(np.exp(2 * lmx1 - lq1))
    m2 = _ratio(cf.r_m2, cf.q13, t)
    if not np.isfinite(m2) or abs(m2) < 1e-12:
        raise MassTwoVanishes(f"m2 vanishes at t={t:.17g}")
    sg, lx2 = _log_ex2(cf, t)
    if sg <= 0:
        raise OutsideWindow(f"e^{{x2}} is not positive at t={t:.17g}; t lies outside the validity window")
    x = np.array([-lmx1, lx2, lx3])
    return PeakonState(x, [m1, m2, m3], cf.initial.t + t)


def velocity_outer(cf: ClosedFormSolution, t: float) -> tuple[float, float]:
    """``(dx1/dt, dx3/dt)`` from logarithmic derivatives of the sums."""
    return _ratio(cf.d_mx1, cf.e_mx1, t), _ratio(cf.d_x3, cf.e_x3, t)


def window(cf: ClosedFormSolution, horizon: float | None = None) -> tuple[float, float]:
    """Interval around 0 on which both ``e^{x3}`` and ``e^{-x1}`` stay positive.

    An end with no zero up to the horizon is reported as ``+-horizon``.
    """
    H = cf.horizon if horizon is None else horizon
    hi, lo = H, -H
    for s in (cf.e_x3, cf.e_mx1):
        r = expsum_smallest_positive_root(s, H)
        if r is not None:
            hi = min(hi, r)
        r = expsum_smallest_positive_root(s.reflect(), H)
        if r is not None:
            lo = max(lo, -r)
    return lo, hi
