"""Mass signatures, spectral sign counts and the (+-+) eigenvalue portrait.

The eight sign patterns of three masses fix the sign layout of the
spectrum, the asymptotic behaviour and which time directions see a
collision. ``TABLE`` records that correspondence; the remaining functions
check individual states against it.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .closedform import DEFAULT_HORIZON, ClosedFormSolution, build, state_at
from .dynamics import Trajectory, conserved, rhs
from .errors import InvalidGrid, InvalidSignature, WrongDirection
from .events import BACKWARD, FORWARD, collision_time
from .polycalc import Poly, RootSet, roots
from .spectral import PeakonState, eigenvalues, has_anti_resonance

AF, AF_PLUS, AF_MINUS, CONFINED = "AF", "AF+", "AF-", "confined"
NONE, POSITIVE, NEGATIVE, BOTH = "none", "t_c>0", "t_c<0", "both"


class NumericallyImaginary(UserWarning):
    """An eigenvalue sits within rounding of the imaginary axis."""


@dataclass(frozen=True)
class SignatureClass:
    signature: tuple[int, int, int]
    spectrum_pattern: str
    asymptotic: str
    collision_pattern: str

    @property
    def global_directions(self) -> tuple[str, ...]:
        """Time directions in which the solution exists for all time."""
        return {
            AF: (FORWARD, BACKWARD),
            AF_PLUS: (FORWARD,),
            AF_MINUS: (BACKWARD,),
            CONFINED: (),
        }[self.asymptotic]


def _row(sig: str, spec: str, asym: str, coll: str) -> SignatureClass:
    return SignatureClass(tuple(1 if c == "+" else -1 for c in sig), spec, asym, coll)


TABLE: tuple[SignatureClass, ...] = (
    _row("+++", "+++", AF, NONE),
    _row("++-", "++-", AF_MINUS, POSITIVE),
    _row("+-+", "l1<0<Re l2<=Re l3", CONFINED, BOTH),
    _row("+--", "--+", AF_MINUS, POSITIVE),
    _row("-++", "-++", AF_PLUS, NEGATIVE),
    _row("-+-", "Re l1<=Re l2<0<l3", CONFINED, BOTH),
    _row("--+", "--+", AF_PLUS, NEGATIVE),
    _row("---", "---", AF, NONE),
)

# the collision pair expected in each direction, where one is expected
COLLISION_PAIRS = {
    (1, 1, -1): {FORWARD: (2, 3)},
    (1, -1, -1): {FORWARD: (1, 2)},
    (-1, 1, 1): {BACKWARD: (1, 2)},
    (-1, -1, 1): {BACKWARD: (2, 3)},
    (-1, 1, -1): {FORWARD: (2, 3), BACKWARD: (1, 2)},
    (1, -1, 1): {FORWARD: (1, 2), BACKWARD: (2, 3)},
}


def parse_signature(signs) -> tuple[int, int, int]:
    """Accept ``"+-+"``, ``"pmp"``, ``"(+,-,+)"`` or a sequence of numbers; return +-1 signs."""
    if isinstance(signs, str):
        chars = [c for c in signs.replace("−", "-").replace("p", "+").replace("m", "-") if c in "+-0"]
        vals = [{"+": 1, "-": -1, "0": 0}[c] for c in chars]
    else:
        vals = [float(v) for v in signs]
    if len(vals) != 3:
        raise InvalidSignature(f"a signature has three signs, got {signs!r}")
    if any(v == 0 or not np.isfinite(v) for v in vals):
        raise InvalidSignature(f"signature {signs!r} contains a zero sign")
    return tuple(int(np.sign(v)) for v in vals)  # type: ignore[return-value]


def classify_signature(signs) -> SignatureClass:
    """The table row for a mass signature."""
    sig = parse_signature(signs)
    for row in TABLE:
        if row.signature == sig:
            return row
    raise InvalidSignature(f"unknown signature {sig}")  # unreachable for valid signs


def signature_string(sig: Sequence[int]) -> str:
    return "".join("+" if s > 0 else "-" for s in sig)


def spectrum_matches(row: SignatureClass, eig: RootSet, tol: float = 1e-9) -> bool:
    """Does the spectrum have the sign layout the table predicts?

    Real parts are compared with zero directly. Roots with imaginary part
    below ``tol * max|lambda|`` count as real.
    """
    lam = eig.expanded()
    lam = lam[np.lexsort((lam.imag, lam.real))]
    if lam.size != 3:
        return False
    scale = float(np.max(np.abs(lam)))
    re = lam.real
    real = np.abs(lam.imag) <= tol * scale
    pat = row.spectrum_pattern
    if pat in ("+++", "++-", "-++", "--+", "---"):
        want = sorted(1 if c == "+" else -1 for c in pat)
        return bool(np.all(real) and list(np.sign(re).astype(int)) == want)
    if pat.startswith("l1<0"):
        return bool(real[0] and re[0] < 0 < re[1] <= re[2])
    return bool(real[2] and re[0] <= re[1] < 0 < re[2])


def verify_sign_count(s: PeakonState) -> tuple[int, int, int, int, bool]:
    """``(N+, n+, N-, n-, ok)``: masses and eigenvalue real parts counted by sign.

    Emits ``NumericallyImaginary`` when some ``|Re lambda| < 1e-12 |lambda|``;
    such an eigenvalue is still counted by the sign of its real part.
    """
    if s.n != 3:
        raise ValueError("sign counts are checked for three peakons")
    lam = eigenvalues(s).expanded()
    if np.any(np.abs(lam.real) < 1e-12 * np.abs(lam)):
        warnings.warn("eigenvalue numerically on the imaginary axis", NumericallyImaginary, stacklevel=2)
    Np = int(np.sum(s.m > 0))
    Nm = int(np.sum(s.m < 0))
    npos = int(np.sum(lam.real > 0))
    nneg = int(np.sum(lam.real < 0))
    return Np, npos, Nm, nneg, (Np == npos and Nm == nneg)


def observed_collision_pattern(cf: ClosedFormSolution, horizon: float | None = None) -> str:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fwd = collision_time(cf, FORWARD, horizon)
        bwd = collision_time(cf, BACKWARD, horizon)
    return {
        (False, False): NONE,
        (True, False): POSITIVE,
        (False, True): NEGATIVE,
        (True, True): BOTH,
    }[(fwd is not None, bwd is not None)]


def table_horizon(eig: RootSet, floor: float = DEFAULT_HORIZON) -> float:
    """Search horizon for collisions: ``max(floor, 4 max|lambda|)``.

    Relative motion is governed by the rates ``1/lambda``, so a large
    eigenvalue stretches the time to the first collision proportionally.
    """
    return max(floor, 4.0 * float(np.max(np.abs(eig.values))))


@dataclass(frozen=True)
class TableCheck:
    """How one state compares with its table row."""

    row: SignatureClass
    spectrum_ok: bool
    collision_pattern: str
    sign_count_ok: bool
    simple_real: bool | None  # global cases only: real and spaced by more than 1e-8

    @property
    def ok(self) -> bool:
        return (
            self.spectrum_ok
            and self.sign_count_ok
            and self.collision_pattern == self.row.collision_pattern
            and self.simple_real is not False
        )


def check_against_table(s: PeakonState, cf: ClosedFormSolution | None = None) -> TableCheck:
    """Spectrum layout, sign counts and collision directions of one state."""
    row = classify_signature(s.signature)
    cf = build(s) if cf is None else cf
    eig = cf.eigenvalues
    simple_real = None
    if row.asymptotic != CONFINED:
        lam = np.sort(eig.expanded().real)
        simple_real = bool(
            np.all(np.abs(eig.expanded().imag) == 0) and np.min(np.diff(lam)) > 1e-8 and np.all(lam != 0)
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericallyImaginary)
        sc = verify_sign_count(s)
    return TableCheck(
        row,
        spectrum_matches(row, eig),
        observed_collision_pattern(cf, table_horizon(eig)),
        sc[-1],
        simple_real,
    )


# -- random states -------------------------------------------------------


def random_state(
    rng: np.random.Generator,
    signature,
    *,
    x_range: tuple[float, float] = (-1.0, 1.0),
    mass_range: tuple[float, float] = (0.5, 5.0),
    anti_resonance_rtol: float = 1e-4,
    max_tries: int = 1000,
) -> PeakonState:
    """A random three-peakon state with the given signature.

    Positions are uniform in ``x_range`` and ``|m|`` uniform in
    ``mass_range``. Samples whose spectrum has ``min|l_i + l_j|`` below
    ``anti_resonance_rtol * max|l|`` are rejected and redrawn.
    """
    sig = np.asarray(parse_signature(signature), dtype=float)
    for _ in range(max_tries):
        x = np.sort(rng.uniform(*x_range, 3))
        if np.any(np.diff(x) <= 0):
            continue
        m = sig * rng.uniform(*mass_range, 3)
        s = PeakonState(x, m)
        if not has_anti_resonance(eigenvalues(s), anti_resonance_rtol):
            return s
    raise RuntimeError("no admissible sample found; the anti-resonance filter rejected every draw")


# -- asymptotic velocities -----------------------------------------------


def _check_direction(sig, direction: str) -> SignatureClass:
    row = classify_signature(sig)
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"direction must be {FORWARD!r} or {BACKWARD!r}")
    if direction not in row.global_directions:
        raise WrongDirection(
            f"signature {signature_string(row.signature)} ({row.asymptotic}) has no global solution {direction}"
        )
    return row


def default_time_span(eig: RootSet, floor: float = 30.0) -> float:
    """``|t|`` at which velocities are read off: ``floor``, raised for close rates.

    Gaps grow like the differences of the limiting velocities ``1/lambda``,
    and the velocity error decays like ``exp(-gap)``; ``|t|`` is chosen so
    the narrowest gap reaches about 25.
    """
    v = np.sort(1.0 / eig.expanded().real)
    spacing = float(np.min(np.diff(v))) if v.size > 1 else np.inf
    return max(floor, 25.0 / spacing) if spacing > 0 else floor


def asymptotic_velocities(
    obj: Trajectory | ClosedFormSolution | PeakonState,
    direction: str,
    t_abs: float | None = None,
) -> np.ndarray:
    """Peakon velocities far out in a direction of global existence, ascending.

    For a trajectory the velocities are finite differences of its last two
    samples. For a closed-form solution (or a state, which is first turned
    into one) the state at ``t = +-t_abs`` is reconstructed and its exact
    velocities are taken from the equations of motion. ``t_abs = None``
    uses ``default_time_span``.
    """
    if isinstance(obj, Trajectory):
        traj_dir = FORWARD if obj.times[-1] > obj.times[0] else BACKWARD
        _check_direction(np.sign(obj.m[0]), direction)
        if traj_dir != direction:
            raise WrongDirection(f"trajectory runs {traj_dir}, velocities requested {direction}")
        dt = obj.times[-1] - obj.times[-2]
        return np.sort((obj.x[-1] - obj.x[-2]) / dt)
    cf = build(obj) if isinstance(obj, PeakonState) else obj
    _check_direction(cf.initial.signature, direction)
    T = default_time_span(cf.eigenvalues) if t_abs is None else float(t_abs)
    s = state_at(cf, T if direction == FORWARD else -T)
    return np.sort(rhs(s)[0])


def limiting_velocities(eig: RootSet) -> np.ndarray:
    """Sorted ``1/lambda_j``; the velocities in a global direction tend to these."""
    return np.sort(1.0 / eig.expanded().real)


# -- eigenvalue portrait -------------------------------------------------


@dataclass(frozen=True)
class PortraitSpec:
    """Grid ``m1 = m1_start + j m1_step``, ``m2 = m2_start + k m2_step``, fixed m3 and x."""

    m1_start: float = 1.2
    m1_step: float = 0.02
    m2_start: float = -5.0
    m2_step: float = -0.01
    m3: float = 4.0
    x: tuple[float, float, float] = (-0.2, 0.0, 0.1)
    nj: int = 75
    nk: int = 75

    @classmethod
    def from_dict(cls, d: dict) -> "PortraitSpec":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise InvalidGrid(f"unknown portrait spec keys: {sorted(extra)}")
        kw = dict(d)
        if "x" in kw:
            kw["x"] = tuple(float(v) for v in kw["x"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise InvalidGrid(str(exc)) from exc

    def validate(self) -> None:
        if int(self.nj) != self.nj or int(self.nk) != self.nk or self.nj < 1 or self.nk < 1:
            raise InvalidGrid("nj and nk must be positive integers")
        if len(self.x) != 3 or not np.all(np.diff(self.x) > 0):
            raise InvalidGrid("x must hold three strictly increasing positions")
        for name, a, s, n in (
            ("m1", self.m1_start, self.m1_step, self.nj),
            ("m2", self.m2_start, self.m2_step, self.nk),
            ("m3", self.m3, 0.0, 1),
        ):
            lo, hi = a + s, a + s * n
            if lo == 0 or hi == 0 or np.sign(lo) != np.sign(hi) or not np.isfinite(lo + hi):
                raise InvalidGrid(f"{name} changes sign or vanishes across the grid")


@dataclass(frozen=True)
class PortraitGrid:
    spec: PortraitSpec
    j: np.ndarray
    k: np.ndarray
    masses: np.ndarray  # (N, 3)
    eigenvalues: np.ndarray  # (N, 3) complex, each row sorted by (Re, Im)
    multiple_roots: int = 0
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return self.j.size

    def positive_counts(self) -> np.ndarray:
        return np.sum(self.eigenvalues.real > 0, axis=1)

    def min_abs_real(self) -> float:
        return float(np.min(np.abs(self.eigenvalues.real)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "k", "m1", "m2", "m3", "re1", "im1", "re2", "im2", "re3", "im3"])
        for j, k, m, lam in zip(self.j, self.k, self.masses, self.eigenvalues):
            row = [str(int(j)), str(int(k))] + [f"{v:.17g}" for v in m]
            for z in lam:
                row += [f"{z.real:.17g}", f"{z.imag:.17g}"]
            w.writerow(row)
        return buf.getvalue()


def _cubic_A(x, m) -> Poly:
    """``A(z) = 1 - M1 z + M2 z^2 - M3 z^3`` from the constants of motion."""
    M1, M2, M3 = conserved(PeakonState(x, m))
    return Poly([1.0, -M1, M2, -M3])


def portrait(spec: PortraitSpec | None = None) -> PortraitGrid:
    """Eigenvalues over the mass grid, ordered by ``(j, k)``.

    The default spec is the 75 x 75 sweep with ``m1 = 1.2 + 0.02 j``,
    ``m2 = -5 - 0.01 k``, ``m3 = 4`` and ``x = (-0.2, 0, 0.1)``.
    """
    spec = spec or PortraitSpec()
    spec.validate()
    J, K = np.meshgrid(np.arange(1, spec.nj + 1), np.arange(1, spec.nk + 1), indexing="ij")
    J, K = J.ravel(), K.ravel()
    masses = np.column_stack(
        [spec.m1_start + spec.m1_step * J, spec.m2_start + spec.m2_step * K, np.full(J.size, float(spec.m3))]
    )
    eig = np.empty((J.size, 3), dtype=complex)
    multiple = 0
    for i, m in enumerate(masses):
        rs = roots(_cubic_A(spec.x, m))
        if not rs.is_simple():
            multiple += 1
        lam = rs.expanded()
        eig[i] = lam[np.lexsort((lam.imag, lam.real))]
    diag = {"rows": int(J.size), "multiple_root_rows": multiple}
    return PortraitGrid(spec, J, K, masses, eig, multiple, diag)
