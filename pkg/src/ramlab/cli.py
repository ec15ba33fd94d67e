"""Command-line front end: ``ramlab <group> <command> [flags]``.

Exit status is 0 on success, 1 when a check fails and 2 on usage errors.
JSON is the output contract (big integers as decimal strings); ``--format
table`` is for reading.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction

from . import breaks as B
from . import constructions as C
from . import heights as H
from . import nottingham as NT
from . import oracle as O
from .exactmath import RefinementCapError, parse_rational, rational_str

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- parsing helpers ---------------------------------------------------------


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from e


def _rationals(text: str) -> list[Fraction]:
    try:
        return [parse_rational(x) for x in text.replace(" ", "").split(",") if x]
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"expected comma-separated rationals, got {text!r}") from e


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"expected a rational, got {text!r}") from e


def _read_input(args):
    if getattr(args, "input", None) is None:
        return None
    raw = sys.stdin.read() if args.input == "-" else open(args.input).read()
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise UsageError(f"input is not valid JSON: {e}") from e


def _field(args) -> NT.FieldSpec:
    if args.modulus:
        return NT.FieldSpec(args.p, args.m, tuple(_ints(args.modulus)))
    return NT.FieldSpec.default(args.p, args.m)


def _series_arg(text: str, args) -> NT.Series:
    """A series given as JSON (inline, file path or '-') or as c_1,...,c_N for m = 1."""
    text = text.strip()
    if text == "-":
        return NT.Series.from_json(json.loads(sys.stdin.read()))
    if text.startswith("{"):
        return NT.Series.from_json(json.loads(text))
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return NT.Series.from_json(json.load(fh))
    if text.startswith("["):
        coeffs = json.loads(text)
    else:
        coeffs = _ints(text)
    N = args.trunc if args.trunc is not None else len(coeffs)
    return NT.Series.from_coeffs(_field(args), coeffs, N)


def _sequence(args, kinds=("upper", "lower", "nu")):
    """(kind, object) from --upper/--lower/--nu flags or JSON input."""
    data = _read_input(args)
    if data is not None:
        obj = B.breaks_from_json(data, strict=not getattr(args, "lenient", False))
        kind = data["kind"]
        if kind not in kinds:
            raise UsageError(f"expected one of {kinds}, got kind {kind!r}")
        return kind, obj
    if args.p is None:
        raise UsageError("--p is required")
    for kind in kinds:
        text = getattr(args, kind, None)
        if text:
            values = _ints(text)
            if kind == "upper":
                return kind, B.UpperBreaks(args.p, values)
            if kind == "lower":
                return kind, B.LowerBreaks(args.p, values, strict=not getattr(args, "lenient", False))
            return kind, B.NuSequence(args.p, values)
    raise UsageError(f"give one of {', '.join('--' + k for k in kinds)} or --input")


# --- output ------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v)
    return str(v)


def render_table(obj) -> str:
    if isinstance(obj, list) and obj and all(isinstance(r, dict) for r in obj):
        cols = []
        for r in obj:
            for k in r:
                if k not in cols:
                    cols.append(k)
        rows = [[_cell(r.get(c, "")) for c in cols] for r in obj]
        widths = [max(len(c), *(len(r[i]) for r in rows)) for i, c in enumerate(cols)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)),
                 "  ".join("-" * w for w in widths)]
        lines += ["  ".join(x.ljust(w) for x, w in zip(r, widths)) for r in rows]
        return "\n".join(lines)
    if isinstance(obj, dict):
        out = []
        width = max((len(k) for k in obj), default=0)
        for k, v in obj.items():
            if isinstance(v, list) and v and all(isinstance(r, dict) for r in v):
                out.append(f"{k}:")
                out.append("  " + render_table(v).replace("\n", "\n  "))
            elif isinstance(v, dict) and v and len(json.dumps(v)) > 60:
                out.append(f"{k}:")
                out.append("  " + render_table(v).replace("\n", "\n  "))
            else:
                out.append(f"{k.ljust(width)}  {_cell(v)}")
        return "\n".join(out)
    return _cell(obj)


def emit(obj, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "table":
        out.write(render_table(obj) + "\n")
    else:
        out.write(json.dumps(obj, indent=2) + "\n")


# --- commands ----------------------------------------------------------------


def cmd_series(args):
    if args.command == "compose":
        if not args.g:
            raise UsageError("series compose needs --f and --g")
        f, g = _series_arg(args.f, args), _series_arg(args.g, args)
        return NT.compose(f, g).to_json(), EXIT_OK
    f = _series_arg(args.f, args)
    if args.command == "inverse":
        return NT.comp_inverse(f).to_json(), EXIT_OK
    if args.command == "power":
        if args.k is None:
            raise UsageError("series power needs --k")
        return NT.comp_power(f, args.k).to_json(), EXIT_OK
    if args.command == "breaks":
        seq = NT.ram_sequence(f, args.nmax)
        return {"p": str(f.p), "N": f.N, "i": [r.to_json() for r in seq]}, EXIT_OK
    raise UsageError(f"unknown series command {args.command}")


def cmd_breaks(args):
    c = args.command
    if c == "validate":
        _, s = _sequence(args, ("upper",))
        v = B.validate_upper(s)
        return v.to_json(), EXIT_OK if v.valid else EXIT_CHECK
    if c == "convert":
        args.lenient = True  # lower_to_upper reports the congruence failure itself
        kind, s = _sequence(args, ("upper", "lower"))
        if kind == "upper":
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                out = B.upper_to_lower(s)
            res = B.breaks_to_json(out)
            if caught:
                res["warning"] = str(caught[0].message)
            return res, EXIT_OK
        try:
            return B.breaks_to_json(B.lower_to_upper(s)), EXIT_OK
        except B.DivisibilityError as e:
            return {"error": "DivisibilityError", "n": e.n, "message": str(e)}, EXIT_CHECK
    if c in ("phi", "psi"):
        if args.x is None:
            raise UsageError(f"breaks {c} needs --x")
        xs = _rationals(args.x)
        if c == "phi":
            _, s = _sequence(args, ("lower",))
            vals = [B.phi_eval(s, x, args.extrapolate) for x in xs]
        else:
            data = _read_input(args)
            if data is not None:
                s = B.breaks_from_json(data)
                if not isinstance(s, (B.UpperBreaks, B.IndexFunction)):
                    raise UsageError("psi needs upper breaks or an index function")
            else:
                _, s = _sequence(args, ("upper",))
            vals = [B.psi_eval(s, x, args.extrapolate) for x in xs]
        return {"x": [rational_str(x) for x in xs], c: [rational_str(v) for v in vals]}, EXIT_OK
    if c == "from-nu":
        _, s = _sequence(args, ("nu",))
        return {"upper": B.breaks_to_json(B.nu_to_upper(s)), "lower": B.breaks_to_json(B.nu_to_lower(s))}, EXIT_OK
    if c == "irat-check":
        _, s = _sequence(args, ("nu",))
        res = B.irat_check(s)
        ok = all(r == 0 for r in res)
        return {"residuals": [str(r) for r in res], "ok": ok}, EXIT_OK if ok else EXIT_CHECK
    if c == "ef-slope":
        data = _read_input(args)
        if data is not None:
            f = B.breaks_from_json(data)
            p = int(data["p"])
            if isinstance(f, B.UpperBreaks):
                f = f.index_function()
        elif args.synthetic:
            d, e_F = _ints(args.synthetic)
            f = B.synthetic_char0_index(args.p, d, e_F, args.xmax)
            p = args.p
        elif args.upper:
            f = B.UpperBreaks(args.p, _ints(args.upper)).index_function()
            p = args.p
        else:
            raise UsageError("ef-slope needs --input, --synthetic d,e_F or --upper")
        if args.samples:
            xs = _rationals(args.samples)
        else:
            xs = [Fraction(k) for k in range(args.step, args.xmax + 1, args.step)]
        rep = B.ef_slope(f, xs, p, extrapolate=args.extrapolate)
        return rep.to_json(), EXIT_OK
    raise UsageError(f"unknown breaks command {c}")


def cmd_construct(args):
    c = args.command
    try:
        if c == "h1":
            r = C.construct_h1_synthetic(args.p, args.e_f, args.c, args.n)
        elif c == "h2":
            r = C.construct_h2(args.p, args.n)
        elif c == "hgt2":
            if args.h is None:
                raise UsageError("construct hgt2 needs --h")
            r = C.construct_h_gt2(args.p, _rational(args.h), args.n)
        elif c == "ex1":
            r = C.construct_ex1(args.p, args.n)
        elif c == "ex-3not2":
            r = C.construct_ex_3not2(args.p, args.n)
        elif c == "ex-2not1":
            r = C.construct_ex_2not1(args.p, args.n)
        else:
            raise UsageError(f"unknown construction {c}")
    except C.ConstructionError as e:
        return e.report.to_json(), EXIT_CHECK
    if args.format == "table":
        rows = [ck.to_json() for ck in r.checks]
        out = {"name": r.name, "p": str(r.p)}
        if r.upper is not None:
            out["upper"] = ",".join(map(str, r.upper.a))
            out["lower"] = ",".join(map(str, r.lower.b))
        for label, s in r.generators.items():
            out[label] = ",".join(map(str, s.b))
        out["checks"] = rows
        return out, EXIT_OK
    return r.to_json(), EXIT_OK


def cmd_heights(args):
    c = args.command
    if c == "filtration":
        if not args.heights:
            raise UsageError("heights filtration needs --heights h1,h2,...")
        hs = _rationals(args.heights)
        grid = _rationals(args.grid) if args.grid else sorted(set(hs)) + [max(hs) + 1]
        gs = H.GeneratorSystem([(f"g{j + 1}", h) for j, h in enumerate(hs)])
        rows = H.filtration(gs, grid, heights=hs)
        mult = H.multiplicities(hs)
        return {"rows": [r.to_json() for r in rows],
                "multiplicities": {rational_str(k): v for k, v in mult.items()},
                "d": gs.d}, EXIT_OK
    _, s = _sequence(args, ("lower",))
    if c == "ht1":
        v = H.ht1_detect(s, args.window)
        out = v.to_json()
        if v.consistent and v.h is not None:
            try:
                out["extrapolation"] = H.ht1_extrapolate(s, v.details["M"], int(v.h)).to_json()
            except (H.MismatchError, ValueError) as e:
                out["extrapolation_error"] = str(e)
        return out, EXIT_OK
    if c == "ht2":
        if args.h is None:
            raise UsageError("heights ht2 needs --h")
        return H.ht2_estimate(s, _rational(args.h), args.window, args.tol).to_json(), EXIT_OK
    if c == "ht3":
        tol = H.CERTIFIED_TOL if args.tol is None else args.tol
        return H.ht3_estimate(s, args.window, tol).to_json(), EXIT_OK
    raise UsageError(f"unknown heights command {c}")


def cmd_oracle(args, out):
    if args.command == "run":
        cfg = O.TrialConfig(args.p, args.trunc, args.trials, args.seed, m=args.m, pin_i0=args.pin_i0)
        rep = O.run_suite(cfg, jobs=args.jobs)
        if args.format == "table":
            emit([{"invariant": k, **v} for k, v in rep.counts().items()], "table", out)
        else:
            out.write(rep.to_jsonl())
        return None, EXIT_OK if rep.ok else EXIT_CHECK
    if args.command == "height-check":
        names = list(O.EXPECTED) if args.name == "all" else [args.name]
        params = {}
        if args.p is not None:
            params["p"] = args.p
        if args.h is not None:
            params["h"] = _rational(args.h)
        results = [O.height_oracle(n, params, args.n) for n in names]
        ok = all(r["ok"] for r in results)
        if args.format == "table":
            rows = [dict(name=r["name"], **row) for r in results for row in r["rows"]]
            return rows, EXIT_OK if ok else EXIT_CHECK
        return results if len(results) > 1 else results[0], EXIT_OK if ok else EXIT_CHECK
    raise UsageError(f"unknown oracle command {args.command}")


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")

    seq = argparse.ArgumentParser(add_help=False)
    seq.add_argument("--p", type=int)
    seq.add_argument("--upper", help="comma-separated upper breaks")
    seq.add_argument("--lower", help="comma-separated lower breaks")
    seq.add_argument("--nu", help="comma-separated nu sequence")
    seq.add_argument("--input", help="JSON sequence file, or - for stdin")
    seq.add_argument("--lenient", action="store_true", help="skip the congruence check on lower breaks")

    parser = argparse.ArgumentParser(prog="ramlab", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    sp = groups.add_parser("series", help="power-series automorphisms")
    ss = sp.add_subparsers(dest="command", required=True)
    for name in ("compose", "inverse", "power", "breaks"):
        q = ss.add_parser(name, parents=[common])
        q.add_argument("--p", type=int, required=True)
        q.add_argument("--m", type=int, default=1)
        q.add_argument("--modulus", help="comma-separated monic modulus coefficients, low degree first")
        q.add_argument("--trunc", type=int, help="truncation N (series known mod t^(N+1))")
        q.add_argument("--f", required=True, help="c_1,...,c_N, JSON, @file or -")
        if name == "compose":
            q.add_argument("--g")
        if name == "power":
            q.add_argument("--k", type=int)
        if name == "breaks":
            q.add_argument("--nmax", type=int, default=6)

    bp = groups.add_parser("breaks", help="break sequences and Hasse-Herbrand functions")
    bs = bp.add_subparsers(dest="command", required=True)
    for name in ("validate", "convert", "phi", "psi", "from-nu", "irat-check", "ef-slope"):
        q = bs.add_parser(name, parents=[common, seq])
        if name in ("phi", "psi"):
            q.add_argument("--x", help="comma-separated rationals")
            q.add_argument("--extrapolate", action="store_true")
        if name == "ef-slope":
            q.add_argument("--synthetic", help="d,e_F for synthetic characteristic-0 data")
            q.add_argument("--samples", help="comma-separated sample points")
            q.add_argument("--xmax", type=int, default=1000)
            q.add_argument("--step", type=int, default=10)
            q.add_argument("--extrapolate", action="store_true")

    cp = groups.add_parser("construct", help="explicit break-sequence constructions")
    cs = cp.add_subparsers(dest="command", required=True)
    for name in ("h1", "h2", "hgt2", "ex1", "ex-3not2", "ex-2not1"):
        q = cs.add_parser(name, parents=[common])
        q.add_argument("--p", type=int, required=True)
        q.add_argument("--n", type=int, default=10, help="last index N")
        if name == "h1":
            q.add_argument("--e-f", dest="e_f", type=int, default=2)
            q.add_argument("--c", type=int, default=1)
        if name == "hgt2":
            q.add_argument("--h")

    hp = groups.add_parser("heights", help="height verdicts")
    hs = hp.add_subparsers(dest="command", required=True)
    for name in ("ht1", "ht2", "ht3", "filtration"):
        q = hs.add_parser(name, parents=[common] + ([seq] if name != "filtration" else []))
        if name != "filtration":
            q.add_argument("--window", type=int, default=H.DEFAULT_WINDOW)
            q.add_argument("--tol", type=float)
        if name == "ht2":
            q.add_argument("--h")
        if name == "filtration":
            q.add_argument("--heights")
            q.add_argument("--grid")

    op = groups.add_parser("oracle", help="randomized cross-validation")
    os_ = op.add_subparsers(dest="command", required=True)
    q = os_.add_parser("run", parents=[common])
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--m", type=int, default=1)
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--trunc", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--pin-i0", dest="pin_i0", type=int)
    q.add_argument("--jobs", type=int, default=1)
    q = os_.add_parser("height-check", parents=[common])
    q.add_argument("--name", default="all", choices=["all", *O.EXPECTED])
    q.add_argument("--p", type=int)
    q.add_argument("--h")
    q.add_argument("--n", type=int)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        if args.group == "series":
            result, code = cmd_series(args)
        elif args.group == "breaks":
            result, code = cmd_breaks(args)
        elif args.group == "construct":
            result, code = cmd_construct(args)
        elif args.group == "heights":
            result, code = cmd_heights(args)
        else:
            result, code = cmd_oracle(args, out)
    except UsageError as e:
        sys.stderr.write(f"ramlab: {e}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except B.DivisibilityError as e:
        sys.stderr.write(f"ramlab: {e}\n")
        return EXIT_CHECK
    except (ValueError, TypeError, KeyError) as e:
        sys.stderr.write(f"ramlab: error: {e}\n")
        return EXIT_USAGE
    except RefinementCapError as e:
        sys.stderr.write(f"ramlab: {e}\n")
        return EXIT_CHECK
    if result is not None:
        emit(result, args.format, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
