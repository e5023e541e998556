"""``dp-peakon``: command-line front end.

Exit codes: 0 success, 2 integration stopped near a collision, 3 stopped at
the mass cap, 64 invalid input or usage, 1 any other failure (including a
failed verification).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import classify as cl
from .closedform import build
from .dynamics import Status, integrate, invariants, trajectory_csv
from .errors import InvalidGrid, InvalidSignature, InvalidState, PeakonError
from .events import BACKWARD, FORWARD, SimultaneousPairCollision, first_collision
from .io import dumps17, load_state
from .spectral import spectrum
from .verify import FAIL, identity_suite

EXIT_OK, EXIT_FAIL, EXIT_COLLISION, EXIT_MASS_CAP, EXIT_USAGE = 0, 1, 2, 3, 64

_STATUS_EXIT = {
    Status.COMPLETED: EXIT_OK,
    Status.STOPPED_NEAR_COLLISION: EXIT_COLLISION,
    Status.STOPPED_MASS_CAP: EXIT_MASS_CAP,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with the
    # collision exit code
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed() -> int:
    raw = os.environ.get("DP_PEAKON_SEED", "42")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DP_PEAKON_SEED must be an integer, got {raw!r}") from None


def _write(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _complex_pair(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


# -- subcommands ---------------------------------------------------------


def cmd_simulate(args) -> int:
    s = load_state(args.state)
    t_eval = None
    if args.samples:
        t_eval = np.linspace(s.t, args.t_end, args.samples)
    traj = integrate(s, args.t_end, b=args.b, rtol=args.tol, atol=args.tol * 1e-2, t_eval=t_eval)
    _write(trajectory_csv(traj), args.out)
    if traj.status != Status.COMPLETED:
        print(f"integration stopped: {traj.status.value} at t={traj.times[-1]:.17g}", file=sys.stderr)
    return _STATUS_EXIT[traj.status]


def cmd_spectrum(args) -> int:
    s = load_state(args.state)
    sd = spectrum(s)
    M = invariants(s)
    if args.json:
        obj = {
            "eigenvalues": [_complex_pair(z) for z in sd.eigenvalues.values],
            "multiplicities": [int(d) for d in sd.eigenvalues.multiplicities],
            "b": [[_complex_pair(c) for c in cs] for cs in sd.b],
            "b_adj": [[_complex_pair(c) for c in cs] for cs in sd.b_adj],
            "M1": M.M1,
            "M2": M.M2,
            "M3": M.M3,
            "M_plus": sd.M_plus,
            "M_minus": sd.M_minus,
            "flags": list(sd.flags),
        }
        _write(dumps17(obj), None)
        return EXIT_OK
    lines = ["eigenvalues (ascending by real part):"]
    for (lam, d), b, bt in zip(sd.eigenvalues, sd.b, sd.b_adj):
        lines.append(f"  lambda = {_fmt_c(lam)}  multiplicity {d}")
        for k, (c, ct) in enumerate(zip(b, bt), start=1):
            lines.append(f"    b^({k}) = {_fmt_c(c)}   b~^({k}) = {_fmt_c(ct)}")
    lines.append(f"M1 = {M.M1:.17g}")
    lines.append(f"M2 = {M.M2:.17g}")
    lines.append(f"M3 = {M.M3:.17g}")
    if sd.flags:
        lines.append("flags: " + ", ".join(sd.flags))
    _write("\n".join(lines), None)
    return EXIT_OK


def _fmt_c(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.17g}"
    return f"{z.real:.17g}{z.imag:+.17g}j"


def cmd_collide(args) -> int:
    s = load_state(args.state)
    cf = build(s)
    dirs = [FORWARD, BACKWARD] if args.direction == "both" else [args.direction]
    events = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SimultaneousPairCollision)
        for d in dirs:
            events[d] = first_collision(cf, d)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.json:
        _write(dumps17({d: (None if ev is None else ev.to_json()) for d, ev in events.items()}), None)
        return EXIT_OK
    lines = []
    for d, ev in events.items():
        if ev is None:
            lines.append(f"{d}: null")
        else:
            lines.append(f"{d}: {dumps17(ev.to_json())}")
    _write("\n".join(lines), None)
    return EXIT_OK


def cmd_portrait(args) -> int:
    if args.spec:
        try:
            raw = json.loads(Path(args.spec).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidGrid(f"cannot read portrait spec: {exc}") from exc
        if not isinstance(raw, dict):
            raise InvalidGrid("portrait spec must be a JSON object")
        spec = cl.PortraitSpec.from_dict(raw)
    else:
        spec = cl.PortraitSpec()
    grid = cl.portrait(spec)
    _write(grid.to_csv(), args.out)
    print(
        f"{len(grid)} rows; positive real parts per row: {sorted(set(grid.positive_counts().tolist()))}; "
        f"min |Re lambda| = {grid.min_abs_real():.6g}; rows with a multiple root: {grid.multiple_roots}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    rng = np.random.default_rng(_seed())
    if args.state is not None:
        states = [load_state(args.state)]
    else:
        if args.random is None or args.signature is None:
            raise UsageError("verify needs a state file or both --random N and --signature S")
        if args.random < 1:
            raise UsageError("--random needs a positive count")
        states = [cl.random_state(rng, args.signature) for _ in range(args.random)]
    report = []
    failed = False
    for i, s in enumerate(states):
        if len(states) > 1:
            print(f"# state {i + 1}: x={s.x.tolist()} m={s.m.tolist()}")
        results = identity_suite(s, rng)
        for r in results:
            print(r.line())
            failed |= r.status == FAIL
        report.append({"x": s.x.tolist(), "m": s.m.tolist(), "checks": [r.to_json() for r in results]})
    if args.report:
        Path(args.report).write_text(dumps17(report) + "\n")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_classify(args) -> int:
    if args.state is not None:
        s = load_state(args.state)
        check = cl.check_against_table(s)
        row = check.row
    else:
        if args.signature is None:
            raise UsageError("classify needs a signature or --state FILE")
        row = cl.classify_signature(args.signature)
        check = None
    obj = {
        "signature": cl.signature_string(row.signature),
        "spectrum": row.spectrum_pattern,
        "asymptotics": row.asymptotic,
        "collisions": row.collision_pattern,
    }
    if check is not None:
        obj["observed"] = {
            "spectrum_matches": check.spectrum_ok,
            "collisions": check.collision_pattern,
            "sign_count_ok": check.sign_count_ok,
            "ok": check.ok,
        }
    if args.json:
        _write(dumps17(obj), None)
    else:
        lines = [f"{k}: {v}" for k, v in obj.items() if k != "observed"]
        if check is not None:
            lines += [f"observed {k}: {v}" for k, v in obj["observed"].items()]
        _write("\n".join(lines), None)
    return EXIT_OK if check is None or check.ok else EXIT_FAIL


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dp-peakon", description="Degasperis-Procesi peakon dynamics and spectra.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("simulate", help="integrate the peakon ODEs and write a trajectory CSV")
    q.add_argument("state")
    q.add_argument("--t-end", type=float, required=True)
    q.add_argument("--b", type=float, default=3.0, help="b-family parameter (3 is DP, 2 is CH)")
    q.add_argument("--out", help="CSV path (default stdout)")
    q.add_argument("--tol", type=float, default=1e-10, help="relative tolerance; absolute is tol/100")
    q.add_argument("--samples", type=int, help="write N evenly spaced samples instead of every step")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("spectrum", help="eigenvalues, residues and constants of motion")
    q.add_argument("state")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_spectrum)

    q = sub.add_parser("collide", help="first collision in each time direction (three peakons)")
    q.add_argument("state")
    q.add_argument("--direction", choices=["both", FORWARD, BACKWARD], default="both")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_collide)

    q = sub.add_parser("portrait", help="eigenvalues over a mass grid")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--default", action="store_true", help="the standard 75 x 75 (+-+) sweep")
    g.add_argument("--spec", help="JSON grid spec")
    q.add_argument("--out", help="CSV path (default stdout)")
    q.set_defaults(func=cmd_portrait)

    q = sub.add_parser("verify", help="run the identity suite")
    q.add_argument("state", nargs="?")
    q.add_argument("--random", type=int, metavar="N", help="check N random states")
    q.add_argument("--signature", help="mass signature for --random, e.g. +-+")
    q.add_argument("--report", metavar="PATH", help="also write a JSON report")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("classify", help="table row for a signature, or check a state against it")
    q.add_argument("signature", nargs="?")
    q.add_argument("--state", help="state file to check against its row")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_classify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InvalidState as exc:
        where = f" (field {exc.field})" if exc.field else ""
        print(f"invalid state{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidSignature, InvalidGrid) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PeakonError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
