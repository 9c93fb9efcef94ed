"""Command-line interface.

Machine-readable JSON goes to stdout, prose to stderr.  Exit codes: 0 success,
1 a check failed, 2 bad input (unreadable files, order violations), 3 solver
failure.  ``SMT_EPS`` in the environment sets the default tolerance.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import formats
from .coupling import (
    classify_martingale_points,
    decreasing_transport,
    increasing_transport,
    validate,
)
from .errors import (
    NotInConvexDecreasingOrder,
    ParseError,
    ShadowInfeasible,
    SmotError,
    SolverError,
)
from .figures import render_svg
from .geometry import (
    SupportGraph,
    check_first_order,
    check_nondegenerate,
    check_second_order,
    parse_reward,
    verify_canonical,
    verify_local_optimality,
)
from .lp import TransportLp, solve_transport, verify_certificate
from .measure import DiscreteMeasure
from .numeric import DEFAULT_EPS, fmt, set_tolerance, to_scalar
from .shadow import shadow, shadow_dirac
from .structure import IDENTITY, decompose, maximal_barrier

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

_CONSTRAINTS = {"sm": "drift_leq_zero", "mg": "drift_eq_zero", "none": "none"}


class InputError(Exception):
    pass


def _eps_default() -> float:
    raw = os.environ.get("SMT_EPS")
    if raw is None:
        return DEFAULT_EPS
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"SMT_EPS is not a number: {raw!r}") from None
    if not value > 0:
        raise InputError("SMT_EPS must be positive")
    return value


def _load_measure(path: str, mode: str) -> DiscreteMeasure:
    try:
        return formats.load_measure(path, mode)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_coupling(path: str, mode: str):
    try:
        return formats.load_coupling(path, mode)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _emit(obj, path: str | None = None) -> None:
    text = formats.dumps(obj)
    if path:
        Path(path).write_text(text)
    sys.stdout.write(text)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _table(p) -> str:
    mart = classify_martingale_points(p).martingale_points
    lines = [f"{'x':>12} {'y':>12} {'mass':>14}  row"]
    for x, y, w in p.entries():
        lines.append(f"{fmt(x):>12} {fmt(y):>12} {fmt(w):>14}  {'martingale' if x in mart else 'strict'}")
    return "\n".join(lines)


def _coupling_report(p) -> dict:
    cls = classify_martingale_points(p)
    out = formats.coupling_to_obj(p)
    out["martingale_points"] = sorted(cls.martingale_points)
    return out


def cmd_couple(args) -> int:
    mu, nu = _load_measure(args.mu, args.mode), _load_measure(args.nu, args.mode)
    build = decreasing_transport if args.decreasing else increasing_transport
    p = build(mu, nu)
    report = {"coupling": "decreasing" if args.decreasing else "increasing", **_coupling_report(p)}
    if args.csv:
        Path(args.csv).write_text(formats.coupling_to_csv(p))
    if args.svg:
        Path(args.svg).write_text(render_svg(p, title=f"{report['coupling']} supermartingale transport"))
    _say(_table(p))
    _emit(report, args.json)
    return EXIT_OK


def _decomposition_obj(dec) -> dict:
    return {
        "x_star": dec.x_star,
        "components": [
            {
                "k": c.index,
                "kind": c.kind,
                "I": str(c.I) if c.kind != IDENTITY else None,
                "J": str(c.J) if c.kind != IDENTITY else None,
                "mu": formats.measure_to_obj(c.mu),
                "nu": formats.measure_to_obj(c.nu),
            }
            for c in dec.components
        ],
    }


def cmd_decompose(args) -> int:
    mu, nu = _load_measure(args.mu, args.mode), _load_measure(args.nu, args.mode)
    dec = decompose(mu, nu)
    _say(f"x* = {fmt(dec.x_star)}")
    for c in dec.components:
        _say(f"  k={c.index:>2} {c.kind:<16} I={c.I} J={c.J}")
    _emit(_decomposition_obj(dec), args.json)
    return EXIT_OK


def cmd_shadow(args) -> int:
    nu = _load_measure(args.nu, args.mode)
    if args.mu:
        s = shadow(_load_measure(args.mu, args.mode), nu)
        out = {"shadow": formats.measure_to_obj(s)}
    else:
        if args.x is None or args.k is None:
            raise InputError("shadow needs either --mu or both --x and --k")
        try:
            x, k = to_scalar(args.x, args.mode), to_scalar(args.k, args.mode)
        except (ValueError, ZeroDivisionError):
            raise InputError("--x and --k must be numbers") from None
        res = shadow_dirac(x, k, nu)
        out = {"shadow": formats.measure_to_obj(res.shadow), "s_star": res.s_star, "window": str(res.window)}
    _say(" ".join(f"{fmt(y)}:{fmt(w)}" for y, w in formats.measure_from_obj(out["shadow"], args.mode)))
    _emit(out, args.json)
    return EXIT_OK


def cmd_solve(args) -> int:
    mu, nu = _load_measure(args.mu, args.mode), _load_measure(args.nu, args.mode)
    f = parse_reward(args.reward)
    lp = TransportLp.from_measures(mu, nu, f, _CONSTRAINTS[args.constraint], args.sense)
    sol = solve_transport(lp, args.eps)
    if sol.status != "optimal":
        _say(f"LP status: {sol.status}")
        _emit({"status": sol.status})
        return EXIT_SOLVER
    cert = verify_certificate(lp, sol.plan, sol.dual, args.eps)
    out = {
        "status": sol.status,
        "reward": f.describe(),
        "constraint": args.constraint,
        "sense": lp.sense,
        "value": sol.value,
        "uniqueness_hint": sol.uniqueness_hint,
        "dual": {
            "phi": [{"x": x, "v": v} for x, v in zip(lp.xs, sol.dual.phi)],
            "psi": [{"y": y, "v": v} for y, v in zip(lp.ys, sol.dual.psi)],
            "h": [{"x": x, "v": v} for x, v in zip(lp.xs, sol.dual.h)],
        },
        "certificate": cert.to_dict(),
        **_coupling_report(sol.plan),
    }
    _say(_table(sol.plan))
    _say(f"value = {sol.value!r}, certificate {'verified' if cert.ok else 'FAILED: ' + cert.detail}")
    _emit(out, args.json)
    return EXIT_OK if cert.ok else EXIT_SOLVER


def cmd_check(args) -> int:
    p = _load_coupling(args.coupling, args.mode)
    mu = _load_measure(args.mu, args.mode) if args.mu else p.first_marginal
    nu = _load_measure(args.nu, args.mode) if args.nu else p.second_marginal
    if args.what == "validity":
        rep = validate(p, mu, nu, args.eps)
        reports = [rep]
    elif args.what == "monotonicity":
        sg = SupportGraph.from_coupling(p, eps=args.eps)
        first, second = ("right", "left") if args.pattern == "increasing" else ("left", "right")
        reports = [check_nondegenerate(sg), check_first_order(sg, first), check_second_order(sg, second)]
    elif args.what == "canonical":
        reports = [verify_canonical(p, args.pattern, eps=args.eps)]
    else:
        if not args.reward:
            raise InputError("local-optimality needs --reward")
        f = parse_reward(args.reward)
        dec = decompose(mu, nu)
        mart = classify_martingale_points(p, args.eps).martingale_points
        i0 = dec.supermartingale.I if dec.supermartingale else None
        m0 = {x for x in mart if i0 is not None and i0.contains(x)}
        reports = [verify_local_optimality(p, f, m0, mart - m0, dec, args.eps)]
    ok = all(r.ok for r in reports)
    for r in reports:
        _say(f"{r.check}: {'pass' if r.ok else 'FAIL ' + r.detail}")
    _emit({"ok": ok, "checks": [r.to_dict() for r in reports]}, args.json)
    return EXIT_OK if ok else EXIT_CHECK


def _find(directory: Path, stem: str) -> Path | None:
    for ext in (".json", ".csv"):
        cand = directory / f"{stem}{ext}"
        if cand.exists():
            return cand
    return None


def _batch_one(directory: Path, mode: str) -> dict:
    mu_path, nu_path = _find(directory, "mu"), _find(directory, "nu")
    if mu_path is None or nu_path is None:
        return {"instance": directory.name, "ok": False, "error": "missing mu or nu file"}
    try:
        mu, nu = formats.load_measure(mu_path, mode), formats.load_measure(nu_path, mode)
        result = {
            "increasing": _coupling_report(increasing_transport(mu, nu)),
            "decreasing": _coupling_report(decreasing_transport(mu, nu)),
            "decomposition": _decomposition_obj(decompose(mu, nu)),
        }
    except (SmotError, OSError) as exc:
        return {"instance": directory.name, "ok": False, "error": str(exc)}
    (directory / "result.json").write_text(formats.dumps(result))
    return {"instance": directory.name, "ok": True, "x_star": maximal_barrier(mu, nu)}


def run_batch(root: str, mode: str, workers: int) -> int:
    base = Path(root)
    if not base.is_dir():
        raise InputError(f"{root} is not a directory")
    dirs = sorted(d for d in base.iterdir() if d.is_dir())
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda d: _batch_one(d, mode), dirs))
    for r in results:
        _say(f"{r['instance']}: {'ok' if r['ok'] else r['error']}")
    _emit({"instances": results})
    return EXIT_OK if all(r["ok"] for r in results) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("rational", "float"), default="rational")
    common.add_argument("--eps", type=float, default=None, help="tolerance (default: SMT_EPS or 1e-9)")
    common.add_argument("--json", metavar="PATH", help="also write the JSON result to PATH")

    parser = argparse.ArgumentParser(prog="smot", description="Supermartingale optimal transport on atomic marginals.")
    parser.add_argument("--batch", metavar="DIR", help="process every instance directory under DIR")
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--mode", choices=("rational", "float"), default="rational", dest="top_mode")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("couple", parents=[common], help="increasing or decreasing supermartingale transport")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--increasing", action="store_true")
    which.add_argument("--decreasing", action="store_true")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--svg", metavar="PATH")
    p.add_argument("--csv", metavar="PATH")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("decompose", parents=[common], help="maximal barrier and irreducible components")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("shadow", parents=[common], help="shadow of an atom or a measure")
    p.add_argument("--x")
    p.add_argument("--k")
    p.add_argument("--mu")
    p.add_argument("--nu", required=True)
    p.set_defaults(func=cmd_shadow)

    p = sub.add_parser("solve", parents=[common], help="transport LP with a dual certificate")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--reward", required=True, help="catalog name or expression in x and y")
    p.add_argument("--constraint", choices=tuple(_CONSTRAINTS), default="sm")
    p.add_argument("--sense", choices=("max", "min"), default="max")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", parents=[common], help="check a coupling file")
    p.add_argument("--coupling", required=True)
    p.add_argument("--what", choices=("validity", "monotonicity", "canonical", "local-optimality"), default="validity")
    p.add_argument("--pattern", choices=("increasing", "decreasing"), default="increasing")
    p.add_argument("--mu")
    p.add_argument("--nu")
    p.add_argument("--reward")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        eps = args.eps if getattr(args, "eps", None) is not None else _eps_default()
        if not eps > 0:
            raise InputError("--eps must be positive")
        set_tolerance(eps)
        if args.batch:
            return run_batch(args.batch, args.top_mode, args.workers)
        if not args.command:
            parser.print_usage(sys.stderr)
            return EXIT_INPUT
        args.eps = eps
        return args.func(args)
    except NotInConvexDecreasingOrder as exc:
        _say(f"order violation: {exc}")
        if exc.witness is not None:
            t, pm, pn = exc.witness
            _say(f"  put functions at t={fmt(t)}: p_mu={fmt(pm)}, p_nu={fmt(pn)}")
        return EXIT_INPUT
    except (InputError, ParseError, ShadowInfeasible, ValueError, ZeroDivisionError, OverflowError) as exc:
        _say(f"input error: {exc}")
        return EXIT_INPUT
    except SolverError as exc:
        _say(f"solver error: {exc}")
        return EXIT_SOLVER
    except SmotError as exc:
        _say(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
