"""Direct integration of the b-family multipeakon ODEs.

The right-hand side is general in ``n`` and ``b`` (``b = 3`` is the
Degasperis-Procesi case). Integration uses an embedded Runge-Kutta 5(4)
pair driven step by step so that every accepted step can be checked for
an approaching collision.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import RK45

from .errors import IntegrationFailure, Unsupported
from .spectral import PeakonState, spectral_polynomials


class Status(str, enum.Enum):
    COMPLETED = "Completed"
    STOPPED_NEAR_COLLISION = "StoppedNearCollision"
    STOPPED_MASS_CAP = "StoppedMassCap"


class ConservedSet(NamedTuple):
    M1: float
    M2: float
    M3: float


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    x: np.ndarray  # shape (nsamples, n)
    m: np.ndarray
    status: Status
    b: float = 3.0

    def __len__(self):
        return self.times.size

    def state(self, i: int) -> PeakonState:
        return PeakonState(self.x[i], self.m[i], self.times[i])

    @property
    def samples(self) -> list[tuple[float, PeakonState]]:
        return [(float(t), self.state(i)) for i, t in enumerate(self.times)]

    @property
    def final(self) -> PeakonState:
        return self.state(-1)


def rhs(s: PeakonState, b: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
    """Velocities and mass rates of the b-family peakon ODEs."""
    return _rhs_arrays(s.x, s.m, b)


def _rhs_arrays(x, m, b):
    d = x[:, None] - x[None, :]
    kern = m[None, :] * np.exp(-np.abs(d))
    xdot = kern.sum(axis=1)
    mdot = (b - 1.0) * m * (np.sign(d) * kern).sum(axis=1)
    return xdot, mdot


def conserved(s: PeakonState) -> ConservedSet:
    """The three constants of motion of three DP peakons."""
    if s.n != 3:
        raise Unsupported("closed-form constants of motion are only available for n = 3")
    m1, m2, m3 = s.m
    x1, x2, x3 = s.x
    f12 = np.expm1(x1 - x2) ** 2
    f23 = np.expm1(x2 - x3) ** 2
    f13 = np.expm1(x1 - x3) ** 2
    return ConservedSet(
        float(m1 + m2 + m3),
        float(m1 * m2 * f12 + m2 * m3 * f23 + m1 * m3 * f13),
        float(m1 * m2 * m3 * f12 * f23),
    )


def invariants(s: PeakonState) -> ConservedSet:
    """``M1, M2, M3`` for any n: exact formulas for n=3, else read off A(z)."""
    if s.n == 3:
        return conserved(s)
    a = spectral_polynomials(s).A.coeffs
    vals = [(-1) ** k * float(a[k]) if k < a.size else 0.0 for k in (1, 2, 3)]
    return ConservedSet(*vals)


def integrate(
    s0: PeakonState,
    t_end: float,
    *,
    b: float = 3.0,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    gap_eps: float = 1e-8,
    mass_cap: float = 1e8,
    t_eval: Sequence[float] | None = None,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate from ``s0.t`` to ``t_end`` (either direction).

    Samples are every accepted step, or only the requested ``t_eval``
    times (interpolated with the stepper's dense output). Stops early with
    ``StoppedNearCollision`` when the smallest gap drops below ``gap_eps``
    or the step size collapses, and with ``StoppedMassCap`` when a mass
    exceeds ``mass_cap`` in magnitude.
    """
    n = s0.n
    t0 = s0.t
    y0 = np.concatenate([s0.x, s0.m])

    def f(t, y):
        xd, md = _rhs_arrays(y[:n], y[n:], b)
        return np.concatenate([xd, md])

    direction = 1.0 if t_end >= t0 else -1.0
    evals = None
    if t_eval is not None:
        evals = np.asarray(sorted(t_eval, key=lambda t: direction * t), dtype=float)
    times, ys = [t0], [y0.copy()]
    if evals is not None:
        times, ys = [], []
        while evals.size and evals[0] == t0:
            times.append(t0)
            ys.append(y0.copy())
            evals = evals[1:]
    if t_end == t0:
        return _pack(times or [t0], ys or [y0], n, Status.COMPLETED, b)

    h_floor = 1e-14 * max(abs(t_end), abs(t0), 1.0)
    solver = RK45(f, t0, y0, t_end, rtol=rtol, atol=atol, max_step=max_step)
    last_t, last_y = t0, y0.copy()
    sign0 = np.sign(s0.m)
    status = Status.COMPLETED
    while True:
        msg = solver.step()
        if solver.status == "failed":
            status = Status.STOPPED_NEAR_COLLISION
            break
        t, y = solver.t, solver.y
        x, m = y[:n], y[n:]
        gaps = np.diff(x)
        if np.any(gaps <= 0) or np.any(np.sign(m) != sign0) or not np.all(np.isfinite(y)):
            raise IntegrationFailure(
                f"state left the ordered sector at t={t:.17g} ({msg})",
                last_good=PeakonState(last_y[:n], last_y[n:], last_t),
            )
        if evals is not None:
            dense = solver.dense_output()
            while evals.size and direction * (evals[0] - t) <= 0:
                times.append(float(evals[0]))
                ys.append(dense(evals[0]))
                evals = evals[1:]
        else:
            times.append(t)
            ys.append(y.copy())
        last_t, last_y = t, y.copy()
        if n > 1 and np.min(gaps) < gap_eps:
            status = Status.STOPPED_NEAR_COLLISION
            break
        if np.max(np.abs(m)) > mass_cap:
            status = Status.STOPPED_MASS_CAP
            break
        if solver.status == "finished":
            break
        if solver.step_size is not None and solver.step_size < h_floor:
            status = Status.STOPPED_NEAR_COLLISION
            break
    if evals is not None and status != Status.COMPLETED and (not times or times[-1] != last_t):
        times.append(last_t)
        ys.append(last_y)
    return _pack(times, ys, n, status, b)


def _pack(times, ys, n, status, b):
    ys = np.asarray(ys, dtype=float).reshape(len(times), 2 * n)
    return Trajectory(np.asarray(times, dtype=float), ys[:, :n].copy(), ys[:, n:].copy(), status, b)


def mass_sign_persistence(traj: Trajectory) -> bool:
    """True iff no mass changes sign along the trajectory."""
    s = np.sign(traj.m)
    return bool(np.all(s == s[0]))


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text with header ``t,x1..xn,m1..mn,M1,M2,M3``; 17 significant digits."""
    n = traj.x.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + [f"m{i + 1}" for i in range(n)] + ["M1", "M2", "M3"])
    for i, t in enumerate(traj.times):
        inv = invariants(traj.state(i))
        row = [t, *traj.x[i], *traj.m[i], *inv]
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()
