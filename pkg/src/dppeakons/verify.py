"""Cross-module identity checks for a single peakon state.

Each check returns a ``CheckResult`` with status PASS, FAIL or SKIPPED and
the residual that decided it. ``identity_suite`` runs the whole list; it
backs the ``verify`` command and the acceptance tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import Status, integrate, invariants
from .errors import PeakonError
from .spectral import (
    PeakonState,
    _random_disc,
    adjoint_polynomials,
    check_fundamental_identity,
    check_residue_products,
    check_symmetry_relations,
    eigenvalues,
    match_eigenvalues,
    spectral_polynomials,
    transfer_product,
    J_MATRIX,
    weyl_residues,
)

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"

IDENTITY_TOL = 1e-10
CONSERVATION_TOL = 1e-7
ISOSPECTRAL_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    residual: float | None
    tol: float
    note: str = ""

    def line(self) -> str:
        res = "n/a" if self.residual is None else f"{self.residual:.3e}"
        out = f"{self.status:<7} {self.name:<22} max_residual={res} tol={self.tol:.0e}"
        return out + (f"  ({self.note})" if self.note else "")

    def to_json(self) -> dict:
        return dict(name=self.name, status=self.status, residual=self.residual, tol=self.tol, note=self.note)


def _judge(name, residual, tol, note="") -> CheckResult:
    if residual is None:
        return CheckResult(name, SKIPPED, None, tol, note)
    ok = bool(np.isfinite(residual) and residual <= tol)
    return CheckResult(name, PASS if ok else FAIL, float(residual), tol, note)


def involution_residual(s: PeakonState, rng: np.random.Generator, npoints: int = 10) -> float:
    """``max |J S(z)^T J^-1 S(-z) - I|`` over random z, relative to ``|S(z)| |S(-z)|``."""
    lam_min = float(np.min(np.abs(eigenvalues(s).values)))
    worst = 0.0
    Jinv = np.linalg.inv(J_MATRIX)
    for z in _random_disc(rng, npoints, 2.0 / lam_min):
        S, Sm = transfer_product(s, z), transfer_product(s, -z)
        err = np.max(np.abs(J_MATRIX @ S.T @ Jinv @ Sm - np.eye(3)))
        scale = max(1.0, np.max(np.abs(S)) * np.max(np.abs(Sm)))
        worst = max(worst, float(err / scale))
    return worst


def default_window(s: PeakonState, horizon: float = 5.0) -> float:
    """Forward integration span: ``0.9 t_c`` before a forward collision, else ``horizon``.

    For three peakons ``t_c`` comes from the closed form; otherwise a probe
    integration supplies the time at which it stopped.
    """
    if s.n != 3:
        probe = integrate(s, s.t + horizon)
        if probe.status == Status.COMPLETED:
            return horizon
        return 0.9 * (probe.times[-1] - s.t)
    from .closedform import build
    from .events import FORWARD, collision_time

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            found = collision_time(build(s), FORWARD)
    except PeakonError:
        return horizon
    return 0.9 * found[0] if found and 0.9 * found[0] < horizon else horizon


def dynamics_checks(s: PeakonState, t_end: float | None = None, samples: int = 11) -> list[CheckResult]:
    """Conservation of M1..M3 and constancy of the spectrum along an integration."""
    T = default_window(s) if t_end is None else t_end
    tr = integrate(s, s.t + T, t_eval=np.linspace(s.t, s.t + T, samples))
    M0 = np.array(invariants(s))
    lam0 = eigenvalues(s).expanded()
    cons, iso = 0.0, 0.0
    for i in range(len(tr)):
        st = tr.state(i)
        M = np.array(invariants(st))
        cons = max(cons, float(np.max(np.abs(M - M0) / np.maximum(np.abs(M0), 1e-300))))
        lam = match_eigenvalues(lam0, eigenvalues(st).expanded())
        iso = max(iso, float(np.max(np.abs(lam - lam0) / np.abs(lam0))))
    note = f"t in [0, {T:.4g}], {tr.status.value}"
    if tr.status != Status.COMPLETED:
        note += "; stopped early"
    return [_judge("conservation", cons, CONSERVATION_TOL, note), _judge("isospectrality", iso, ISOSPECTRAL_TOL, note)]


def algebraic_checks(s: PeakonState, rng: np.random.Generator | None = None) -> list[CheckResult]:
    """Identities of the polynomials, the transfer matrix and the residues."""
    rng = np.random.default_rng(0) if rng is None else rng
    pt = spectral_polynomials(s)
    apt = adjoint_polynomials(s)
    eig = eigenvalues(pt.A)
    sd = weyl_residues(pt, apt, eig)
    out = [
        _judge("fundamental_identity", check_fundamental_identity(pt, rng), IDENTITY_TOL),
        _judge("involution", involution_residual(s, rng), IDENTITY_TOL),
    ]
    a, at = pt.A.coeffs, apt.A.coeffs
    k = max(a.size, at.size)
    a, at = np.pad(a, (0, k - a.size)), np.pad(at, (0, k - at.size))
    out.append(_judge("adjoint_A", float(np.max(np.abs(a - at)) / np.max(np.abs(a))), IDENTITY_TOL))
    sym = check_symmetry_relations(pt, apt, eig)
    simple = any(d == 1 for _, d in eig)
    out.append(_judge("B(-l)=C(l)B~(l)", sym.cb_residual if simple else None, IDENTITY_TOL))
    n_simple = sum(1 for _, d in eig if d == 1)
    skipped = f"{sym.bb_skipped} eigenvalue(s) with B(-l)~0 skipped" if sym.bb_skipped else ""
    bb = sym.bb_residual if n_simple > sym.bb_skipped else None
    out.append(_judge("2A(-l)=B(l)B~(l)", bb, IDENTITY_TOL, skipped))
    prod = check_residue_products(sd, pt, apt)
    note = "" if prod is not None else ("anti-resonant spectrum" if sd.anti_resonant else "multiple eigenvalue")
    out.append(_judge("residue_products", prod, IDENTITY_TOL, note))
    ex3, emx1 = np.exp(s.x[-1]), np.exp(-s.x[0])
    out.append(_judge("residue_sum_x_n", abs(sd.residue_sum() - ex3) / ex3, IDENTITY_TOL))
    out.append(_judge("residue_sum_x_1", abs(sd.adjoint_residue_sum() - emx1) / emx1, IDENTITY_TOL))
    if s.n == 3:
        from .classify import NumericallyImaginary, verify_sign_count

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NumericallyImaginary)
            Np, npos, Nm, nneg, ok = verify_sign_count(s)
        out.append(
            CheckResult("sign_count", PASS if ok else FAIL, None, 0.0, f"N+={Np} n+={npos} N-={Nm} n-={nneg}")
        )
    return out


def identity_suite(
    s: PeakonState, rng: np.random.Generator | None = None, *, dynamics: bool = True
) -> list[CheckResult]:
    """All algebraic checks, plus conservation and isospectrality if ``dynamics``."""
    out = algebraic_checks(s, rng)
    if dynamics:
        out += dynamics_checks(s)
    return out
