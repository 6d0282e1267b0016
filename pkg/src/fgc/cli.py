"""Command-line entry point: ``fgc <group> <command> [options]``.

Exit codes: 0 success, 1 a verification reported failure, 2 usage or
precondition error, 3 precision/window error.  Errors print a single
``fgc: error: <kind>: <reason>`` line on stderr.
"""
from __future__ import annotations

import argparse
import sys

from .algebra.jsonio import dumps, element_to_json, load_series, series_to_json
from .algebra.series import promote
from .charclass import (
    BundleData,
    ExpClass,
    genus_cpn,
    hirzebruch_series,
    l_series,
    one_series,
    orientation_quotient,
    product_over_roots,
    symmetric_expand,
    todd_series,
)
from .cnstruct import CnStructure, bar_differential, sharp, verify_cn
from .errors import FGCError
from .fgl import LAWS, fgl_standard, fgl_verify, parse_law, standard_ring
from .selftest import Config, run
from .tate import (
    beta_coefficient,
    minimal_window,
    tate_context,
    tate_invert_euler,
    tch_on_bundle,
    total_chern_check,
)


class UsageError(FGCError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _window(text):
    try:
        low, high = (int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be low:high, got {text!r}") from None
    if not low <= 0 <= high:
        raise argparse.ArgumentTypeError(f"window {text} must satisfy low <= 0 <= high")
    return low, high


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="emit canonical JSON")
    p.add_argument("--order", type=int, help="truncation order D")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--law", default="additive", help=f"one of {', '.join(LAWS)}; universal_rational(k) allowed")
    p.add_argument("--gens", type=int, help="k for universal_rational")
    return p


def build_parser():
    common = _common()
    top = _Parser(prog="fgc", description="Formal group laws, characteristic classes and Tate series.")
    groups = top.add_subparsers(dest="group", required=True, parser_class=_Parser)

    fgl = groups.add_parser("fgl").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    fgl.add_parser("show", parents=[common])
    fgl.add_parser("verify", parents=[common])

    cls = groups.add_parser("class").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    kinds = ("hirzebruch", "todd", "signature", "one")
    p = cls.add_parser("expand", parents=[common])
    p.add_argument("--series", choices=kinds, default="todd")
    p.add_argument("--series-json", help="one-variable series f with f(0) = 1, instead of --series")
    p.add_argument("--rank", type=int, default=2)
    p = cls.add_parser("genus", parents=[common])
    p.add_argument("--series", choices=kinds, default="todd")
    p.add_argument("--series-json", help="one-variable series f with f(0) = 1, instead of --series")
    p.add_argument("--cpn", type=int, required=True)
    p = cls.add_parser("quotient", parents=[common])
    p.add_argument("--series-json", required=True)

    tate = groups.add_parser("tate").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("tch", "chern-check", "invert-euler"):
        p = tate.add_parser(name, parents=[common])
        p.add_argument("--roots", type=int, default=2)
        p.add_argument("--window", type=_window)
    p = tate.add_parser("beta", parents=[common])
    p.add_argument("--window", type=_window)

    cn = groups.add_parser("cn").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = cn.add_parser("verify", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--series-json", required=True)
    p = cn.add_parser("sharp", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--series-json", required=True)
    p.add_argument("--window", type=_window, default=(-6, 6))
    p = cn.add_parser("delta", parents=[common])
    p.add_argument("--series-json", required=True)

    groups.add_parser("selftest", parents=[common])
    return top


# ---------------------------------------------------------------------------


def _law_name(args):
    name, k = parse_law(args.law)
    k = args.gens if args.gens is not None else k
    if name == "universal_rational" and k is None:
        k = 4
    return name, k


def _law_ring(args, extra=None):
    name, k = _law_name(args)
    ring = standard_ring(name, k, base="Q")
    return ring if extra is None else ring.union(extra)


def _law(args, order, extra_ring=None):
    name, k = _law_name(args)
    return fgl_standard(name, order, k=k, ring=_law_ring(args, extra_ring))


def _order(args, default):
    order = default if args.order is None else args.order
    if order < 1:
        raise UsageError("--order must be at least 1")
    return order


def _context(args, rank, invert=False, order_default=6, high=4):
    name, k = _law_name(args)
    order = _order(args, order_default)
    if args.window is None:
        low = min(-1, minimal_window(rank, order, invert))
        window = (low, high)
    else:
        window = args.window
    return tate_context(name, order, window, rank=rank, invert=invert, k=k, ring=_law_ring(args))


class Output:
    """Collects stdout text; written only when the command succeeds."""

    def __init__(self, json_mode):
        self.json = json_mode
        self.parts = []

    def append(self, text):
        self.parts.append(text)

    def series(self, f):
        self.append(dumps(series_to_json(f)) if self.json else f"{f}\n")

    def report(self, report):
        if self.json:
            self.append(dumps(report))
        else:
            for key in sorted(report):
                self.append(f"{key}: {report[key]}\n")

    def text(self):
        return "".join(self.parts)


def _characteristic(args, order):
    if args.series_json:
        f = load_series(args.series_json)
        return ExpClass(f.truncate(min(order, f.order)), "file")
    kind = args.series
    if kind == "todd":
        return todd_series(order)
    if kind == "signature":
        return l_series(order)
    if kind == "one":
        return one_series(order)
    return hirzebruch_series(_law(args, order + 1))


def cmd_fgl(args, out):
    order = _order(args, 6)
    law = _law(args, order)
    if args.cmd == "show":
        out.series(law.F)
        return 0
    report, _ = fgl_verify(law, order)
    out.report(report)
    return 0 if report["passed"] else 1


def cmd_class(args, out):
    if args.cmd == "quotient":
        g = load_series(args.series_json)
        out.series(orientation_quotient(g).f)
        return 0
    if args.cmd == "genus":
        if args.cpn < 0:
            raise UsageError("--cpn must be non-negative")
        c = _characteristic(args, max(_order(args, args.cpn), args.cpn))
        value = genus_cpn(c, args.cpn)
        if out.json:
            label = args.series_json or args.series
            out.append(dumps({"series": label, "cpn": args.cpn, "genus": element_to_json(value)}))
        else:
            out.append(f"{value}\n")
        return 0
    if args.rank < 0:
        raise UsageError("--rank must be non-negative")
    c = _characteristic(args, _order(args, 6))
    roots = BundleData.root_names(args.rank).roots
    out.series(symmetric_expand(product_over_roots(c, roots), args.rank))
    return 0


def cmd_tate(args, out):
    if args.cmd == "beta":
        ctx = _context(args, 1, order_default=2)
        beta, verdict = beta_coefficient(ctx)
        if out.json:
            out.append(dumps({"beta": series_to_json(beta), **verdict}))
        else:
            out.append(f"{beta}\nunit: {verdict['unit']}\n")
        return 0 if verdict["unit"] else 1
    if args.roots < 0:
        raise UsageError("--roots must be non-negative")
    V = BundleData.root_names(args.roots)
    if args.cmd == "chern-check":
        ctx = _context(args, args.roots, order_default=8, high=2)
        report = total_chern_check(ctx, V)
        out.report(report)
        return 0 if report["passed"] else 1
    if args.cmd == "tch":
        out.series(tch_on_bundle(_context(args, args.roots), V))
        return 0
    out.series(tate_invert_euler(_context(args, args.roots, invert=True), V))
    return 0


def _load_for_law(args, path):
    f = load_series(path)
    law = _law(args, max(f.order, 1) + 1, extra_ring=f.ring)
    return promote(f, law.ring), law


def cmd_cn(args, out):
    f, law = _load_for_law(args, args.series_json)
    if args.cmd == "delta":
        order = f.order if args.order is None else min(args.order, f.order)
        out.series(bar_differential(f, law, order))
        return 0
    s = CnStructure(args.n, law, f)
    if args.cmd == "verify":
        order = f.order if args.order is None else args.order
        report, _ = verify_cn(s, order)
        out.report(report)
        return 0 if report["passed"] else 1
    low, high = args.window
    order = _order(args, min(6, f.order))
    ctx = tate_context(law, order, (low, high))
    g, report = sharp(s, ctx)
    if out.json:
        out.append(dumps({"series": series_to_json(g.f), "report": report}))
    else:
        out.append(f"{g.f}\n")
        out.report(report)
    return 0 if report["passed"] else 1


def cmd_selftest(args, out):
    results = run(Config(order=args.order, seed=args.seed))
    ok = all(r.passed for r in results)
    if out.json:
        out.append(dumps({"passed": ok, "order": args.order, "criteria": [r.to_json() for r in results]}))
    else:
        for r in results:
            mark = "PASS" if r.passed else "FAIL"
            out.append(f"{r.number:>2}  {mark}  {r.name:<28} {r.seconds:7.2f} s\n")
            if not r.passed:
                for d in r.details:
                    out.append(f"      {d}\n")
        out.append(f"{'all passed' if ok else 'FAILED'}\n")
    return 0 if ok else 1


_COMMANDS = {"fgl": cmd_fgl, "class": cmd_class, "tate": cmd_tate, "cn": cmd_cn, "selftest": cmd_selftest}


def _reason(exc):
    return " ".join(str(exc).split()) or type(exc).__name__


def _glue_window(argv):
    """``--window -4:6`` would read as an option; rewrite it to ``--window=-4:6``."""
    out = []
    it = iter(argv)
    for a in it:
        if a == "--window":
            out.append("--window=" + next(it, ""))
        else:
            out.append(a)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_window(argv))
        out = Output(args.json)
        code = _COMMANDS[args.group](args, out)
    except UsageError as exc:
        print(f"fgc: error: usage: {_reason(exc)}", file=sys.stderr)
        return 2
    except FGCError as exc:
        print(f"fgc: error: {type(exc).__name__}: {_reason(exc)}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"fgc: error: io: {_reason(exc)}", file=sys.stderr)
        return 2
    sys.stdout.write(out.text())
    return code


if __name__ == "__main__":
    sys.exit(main())
