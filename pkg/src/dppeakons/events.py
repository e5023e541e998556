"""Collision detection and shockpeakon data for three DP peakons.

A collision is a zero of ``1/m1`` (pair 1-2) or ``1/m3`` (pair 2-3)
inside the validity window. Both are analytic there, so zeros are located
on the numerators ``q1``, ``q3`` of the closed-form solution.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .closedform import ClosedFormSolution, formal_values, window
from .errors import ExtrapolationFailure
from .polycalc import ExpSum, expsum_smallest_positive_root

FORWARD = "forward"
BACKWARD = "backward"


class SimultaneousPairCollision(UserWarning):
    """Both adjacent pairs collide at (numerically) the same instant."""


@dataclass(frozen=True)
class CollisionEvent:
    t_c: float
    pair: tuple[int, int]
    x_c: float
    amplitude: float
    shock: float
    direction: str
    simultaneous: bool = False

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("simultaneous")
        d["pair"] = list(self.pair)
        return d


def _first_zero(s: ExpSum, limit: float) -> float | None:
    if limit <= 0:
        return None
    return expsum_smallest_positive_root(s, limit)


def collision_time(cf: ClosedFormSolution, direction: str = FORWARD, horizon: float | None = None):
    """``(t_c, pair, simultaneous)`` of the first collision, or None."""
    H = cf.horizon if horizon is None else horizon
    lo, hi = window(cf, H)
    if direction == FORWARD:
        limit, q1, q3, sgn = hi, cf.q1, cf.q3, 1.0
    elif direction == BACKWARD:
        limit, q1, q3, sgn = -lo, cf.q1.reflect(), cf.q3.reflect(), -1.0
    else:
        raise ValueError(f"direction must be {FORWARD!r} or {BACKWARD!r}")
    t1 = _first_zero(q1, limit)
    t3 = _first_zero(q3, limit)
    cands = [(t, pair) for t, pair in ((t1, (1, 2)), (t3, (2, 3))) if t is not None]
    if not cands:
        return None
    tc, pair = min(cands)
    simultaneous = t1 is not None and t3 is not None and abs(t1 - t3) <= 1e-10
    if simultaneous:
        warnings.warn(f"both pairs collide at t={sgn * tc:.12g}", SimultaneousPairCollision, stacklevel=2)
    return sgn * tc, pair, simultaneous


def first_collision(cf: ClosedFormSolution, direction: str = FORWARD, horizon: float | None = None):
    """First collision in the given time direction, or None within the horizon."""
    found = collision_time(cf, direction, horizon)
    if found is None:
        return None
    tc, pair, simultaneous = found
    amp, shock, xc = _shock_data(cf, tc, pair)
    return CollisionEvent(float(tc), pair, xc, amp, shock, direction, simultaneous)


def _pair_state(cf: ClosedFormSolution, t: float, pair):
    """Positions, masses and the pair indices ``(j, j+1, spectator)`` at ``t``."""
    v = formal_values(cf, t)
    x = np.array([v["x1"], v["x2"], v["x3"]])
    m = np.array([v["m1"], v["m2"], v["m3"]])
    j = pair[0] - 1
    return x, m, j, j + 1, (2 if j == 0 else 0)


def _pair_quantities(cf: ClosedFormSolution, t: float, pair):
    """``m_j + m_{j+1}``, ``(u(x_j) - u(x_{j+1}))/2`` and the pair midpoint.

    Near the collision both masses grow like ``1/(t_c - t)`` with opposite
    signs while the gap shrinks. Their sum is taken as ``M1 - m_spectator``
    (the closed form keeps the total mass exactly), and the u difference as
    ``(m_j - m_{j+1})(1 - e^{-gap})`` plus the spectator's share, so that
    neither is the difference of two large numbers.
    """
    x, m, a, b, o = _pair_state(cf, t, pair)
    gap = x[b] - x[a]
    du = (m[a] - m[b]) * -np.expm1(-gap) + m[o] * (np.exp(-abs(x[a] - x[o])) - np.exp(-abs(x[b] - x[o])))
    return cf.M1 - m[o], 0.5 * du, 0.5 * (x[a] + x[b])


def richardson_limit(f, t_c: float, h: float, levels: int = 8, side: float = -1.0):
    """Extrapolate ``f(t_c + side*h*2^-k)`` to ``h -> 0`` assuming a power series in h.

    Returns the estimate with the smallest difference to its predecessor in
    the Neville tableau, that difference, and the whole tableau.
    """
    hs = h * 0.5 ** np.arange(levels + 1)
    vals = np.array([f(t_c + side * hk) for hk in hs], dtype=float)
    T = np.full((levels + 1, levels + 1), np.nan)
    T[:, 0] = vals
    for k in range(1, levels + 1):
        fac = 2.0**k
        T[k:, k] = (fac * T[k:, k - 1] - T[k - 1 : -1, k - 1]) / (fac - 1)
    best, err = T[0, 0], np.inf
    for k in range(1, levels + 1):
        for i in range(k, levels + 1):
            e = abs(T[i, k] - T[i - 1, k - 1])
            if e < err:
                best, err = T[i, k], e
    return float(best), float(err), T


def _shock_data(cf: ClosedFormSolution, t_c: float, pair, levels: int = 8):
    side = -1.0 if t_c > 0 else 1.0
    h = 1e-3 * max(abs(t_c), 1e-3)
    out = []
    errs = {}
    for idx, name in enumerate(("amplitude", "shock", "x_c")):
        val, err, _ = richardson_limit(lambda t: _pair_quantities(cf, t, pair)[idx], t_c, h, levels, side)
        out.append(val)
        errs[name] = err
    if max(errs.values()) > 1e-5:
        raise ExtrapolationFailure("limit extrapolation did not converge", diagnostics=errs)
    return out[0], out[1], out[2]


def shock_data(cf: ClosedFormSolution, ev: CollisionEvent) -> tuple[float, float, float]:
    """``(amplitude, shock, x_c)`` at the collision ``ev``.

    Limits of ``m_j + m_{j+1}``, of ``(u(x_j) - u(x_{j+1}))/2`` and of the
    pair position are extrapolated from the side the collision is
    approached from.
    """
    return _shock_data(cf, ev.t_c, ev.pair)


def shock_limit_formula(cf: ClosedFormSolution, t_c: float, pair) -> tuple[float, float, float]:
    """The same limits from quantities analytic at ``t_c``.

    For the pair (2, 3): ``shock = (M1 - m1) - (v3 - m1 e^{x1 - x3})``, with
    ``v3 = M_+ e^{-x3}`` the velocity of the last peakon; for (1, 2) the
    mirror expression ``v1 - m3 e^{x1 - x3} - (M1 - m3)``.
    """
    v = formal_values(cf, t_c)
    coupling = float(np.exp(v["x1"] - v["x3"]))
    if tuple(pair) == (2, 3):
        amp = cf.M1 - v["m1"]
        return amp, amp - (v["v3"] - v["m1"] * coupling), v["x3"]
    amp = cf.M1 - v["m3"]
    return amp, v["v1"] - v["m3"] * coupling - amp, v["x1"]


def pair_functional(cf: ClosedFormSolution, t: float, pair, phi) -> float:
    """``m_j phi(x_j) + m_{j+1} phi(x_{j+1})`` at time t.

    Evaluated as ``(M1 - m_spectator) phi(x_{j+1}) + m_j (phi(x_j) - phi(x_{j+1}))``.
    The two masses are large and of opposite sign near a collision, and
    adding them directly would lose the O(1) result to rounding.
    """
    x, m, a, b, o = _pair_state(cf, t, pair)
    return float((cf.M1 - m[o]) * phi(x[b]) + m[a] * (phi(x[a]) - phi(x[b])))


def event_json(ev: CollisionEvent | None) -> str:
    from .io import dumps17

    return dumps17(None if ev is None else ev.to_json())
