"""The ``dimpoly`` command.

Exit status: 0 success, 1 computation error (including a failed
--oracle-check), 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from fractions import Fraction
from typing import List, Sequence

from . import __version__
from .diffring import (DescentError, InstabilityError, MarginError, NoTermsError, OrderingError,
                       ParseError, e_reduce, format_poly, is_autoreduced, is_e_reduced, parse_poly)
from .extdim import (ExtensionSpec, IntegrityError, StabilizationError, ValidationError, WindowSpec,
                     compute_phi, equivalence_distinguish, invariants, spec_charset, trdeg_oracle,
                     univariate_phi, univariate_summary)
from .lattice import (INT, NAT, DomainError, LatticeSet, Partition, ResourceError, count_V, count_W,
                      omega, phi_set, shell_count, shell_count_enum)


class InputError(Exception):
    pass


class CheckFailed(Exception):
    pass


INPUT_ERRORS = (InputError, ParseError, DomainError, OrderingError, NoTermsError, OSError)
COMPUTE_ERRORS = (CheckFailed, ResourceError, MarginError, StabilizationError, IntegrityError,
                  ValidationError, DescentError, InstabilityError, ArithmeticError)


# ---------------------------------------------------------------------------
# formatting


def frac_text(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def monomial_text(e: Sequence[int]) -> str:
    out = []
    for i, k in enumerate(e):
        if k == 1:
            out.append(f"t{i + 1}")
        elif k > 1:
            out.append(f"t{i + 1}^{k}")
    return "*".join(out) or "1"


def power_text(pw) -> str:
    """Power-basis polynomial, by descending total degree then descending exponent."""
    items = sorted(pw.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)
    if not items:
        return "0"
    parts = []
    for i, (e, c) in enumerate(items):
        mono = monomial_text(e)
        mag = abs(c)
        body = frac_text(mag) if mono == "1" else (mono if mag == 1 else f"{frac_text(mag)}*{mono}")
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


def emit(args, obj, text: str):
    if args.json:
        print(json.dumps(obj, sort_keys=True, indent=2))
    else:
        print(text)


# ---------------------------------------------------------------------------
# input parsing


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def parse_kv(tokens: Sequence[str]) -> dict:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise InputError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def int_list(text: str, what: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"{what}: expected comma-separated integers, got {text!r}")


def parse_input(text: str, kind: str):
    """Parse text as 'partition', 'natset', 'intset', 'poly:m:n' or 'spec'."""
    if kind == "partition":
        return Partition.parse(text)
    if kind in ("natset", "intset"):
        part = None
        for line in text.splitlines():
            if line.strip().startswith("blocks="):
                part = Partition.parse(line)
        m = part.m if part else None
        s = LatticeSet.parse(text, NAT if kind == "natset" else INT, m)
        return part, s
    if kind.startswith("poly:"):
        _, m, n = kind.split(":")
        return parse_poly(text, int(m), int(n) if n else None)
    if kind == "spec":
        return ExtensionSpec.parse(text)
    raise ValueError(kind)


def load_set(args, ambient):
    part, s = parse_input(read_text(args.file), "natset" if ambient == NAT else "intset")
    if args.blocks:
        part = Partition.parse(args.blocks)
    if part is None:
        raise InputError("no partition: give --blocks or a blocks= line")
    if len(s) and s.m != part.m:
        raise InputError(f"set has dimension {s.m} but partition has m={part.m}")
    if not len(s):
        s = LatticeSet([], ambient, part.m)
    return part, s


def load_spec(path: str) -> ExtensionSpec:
    return parse_input(read_text(path), "spec")


def load_reduce(path: str):
    """blocks=, gens= then h on the first polynomial line and A on the rest."""
    text = read_text(path)
    part = n = None
    polys = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("blocks="):
            part = Partition.parse(line)
        elif line.startswith("gens="):
            n = int(line[5:])
        else:
            if part is None or n is None:
                raise ParseError("blocks= and gens= must precede the polynomials", ln, 1)
            polys.append(parse_poly(line, part.m, n, ln))
    if part is None or n is None or len(polys) < 2:
        raise InputError("reduce needs blocks=, gens=, h and at least one element of A")
    return part, polys[0], polys[1:]


def window_of(kv: dict, p: int) -> WindowSpec:
    if "r" not in kv:
        raise InputError("missing r=")
    r = int_list(kv["r"], "r")
    s = int_list(kv.get("s", ",".join(["0"] * len(r))), "s")
    if len(r) == 1 and p > 1:
        r = r * p
    if len(s) == 1 and p > 1:
        s = s * p
    if len(r) != p or len(s) != p:
        raise InputError(f"window needs {p} values for r and s")
    return WindowSpec.of(r, s)


# ---------------------------------------------------------------------------
# subcommands


def _check_radii(part: Partition, base: int, extra: int = 3):
    return [[base + k] * part.p for k in range(extra + 1)]


def cmd_set_omega(args):
    part, E = load_set(args, NAT)
    poly = omega(E, part)
    obj = {"partition": list(part.sizes), "omega": poly.to_json_obj()}
    text = f"omega = {poly.to_text()}\n      = {power_text(poly.to_power_basis())}"
    if args.oracle_check:
        base = max((sum(p) for p in E), default=0)
        for r in _check_radii(part, base):
            got = count_V(E, part, r)
            if poly.evaluate(r) != got:
                raise CheckFailed(f"omega{tuple(r)} = {poly.evaluate(r)} but enumeration gives {got}")
        text += "\noracle-check: ok"
        obj["oracle_check"] = "ok"
    emit(args, obj, text)


def cmd_set_phi(args):
    part, A = load_set(args, INT)
    poly = phi_set(A, part)
    obj = {"partition": list(part.sizes), "phi": poly.to_json_obj()}
    text = f"phi = {poly.to_text()}\n    = {power_text(poly.to_power_basis())}"
    if args.oracle_check:
        base = max((sum(abs(x) for x in p) for p in A), default=0)
        for r in _check_radii(part, base):
            got = count_W(A, part, r)
            if poly.evaluate(r) != got:
                raise CheckFailed(f"phi{tuple(r)} = {poly.evaluate(r)} but enumeration gives {got}")
        text += "\noracle-check: ok"
        obj["oracle_check"] = "ok"
    emit(args, obj, text)


def cmd_shell(args):
    kv = parse_kv(args.params)
    if "blocks" not in kv:
        raise InputError("missing blocks=")
    part = Partition.parse(kv["blocks"])
    w = window_of(kv, part.p)
    n = shell_count(part, w.r, w.s)
    obj = {"count": n}
    text = str(n)
    if args.oracle_check:
        got = shell_count_enum(part, w.r, w.s)
        if got != n:
            raise CheckFailed(f"closed form {n} but enumeration gives {got}")
        obj["oracle_check"] = "ok"
    emit(args, obj, text)


def cmd_reduce(args):
    part, h, A = load_reduce(args.file)
    red = e_reduce(h, A, part)
    obj = {
        "hbar": format_poly(red.hbar, part),
        "J": format_poly(red.J, part),
        "steps": len(red.steps),
        "witnesses": [[{"coeff": format_poly(c, part), "gamma": list(g)} for c, g in recs]
                      for recs in red.witnesses],
    }
    lines = [f"hbar = {obj['hbar'] or '0'}", f"J = {obj['J']}", f"steps = {obj['steps']}"]
    for i, recs in enumerate(obj["witnesses"], 1):
        for rec in recs:
            lines.append(f"C{i}: ({rec['coeff']}) * gamma{tuple(rec['gamma'])}")
    if args.oracle_check:
        if not red.verify(h, A):
            raise CheckFailed("J*h != sum C_i(g_i) + hbar")
        for g in A:
            if not is_e_reduced(red.hbar, g, part)[0]:
                raise CheckFailed(f"hbar is not reduced with respect to {format_poly(g, part)}")
        lines.append("oracle-check: ok")
        obj["oracle_check"] = "ok"
    emit(args, obj, "\n".join(lines))


def cmd_charset(args):
    spec = load_spec(args.file)
    if not spec.defining:
        raise InputError("no defining polynomials")
    with warnings.catch_warnings(record=True):
        cs = spec_charset(spec, args.search_margin)
    rows = [format_poly(f, spec.part) for f in cs]
    obj = {"charset": rows}
    text = "\n".join(rows)
    if args.oracle_check:
        again = spec_charset(spec, 2 * args.search_margin + 2)
        if again != cs:
            raise CheckFailed("characteristic set changes when the search margin grows")
        if not is_autoreduced(cs, spec.part):
            raise CheckFailed("characteristic set is not autoreduced")
        obj["oracle_check"] = "ok"
        text += "\noracle-check: ok"
    emit(args, obj, text)


def _heldout_windows(res, count=10):
    th = res.thresholds
    p = res.part.p
    out = []
    for k in range(count):
        r = [th["r0"][i] + 1 + (k + i) % 3 for i in range(p)]
        s = [th["s1"][i] + (k * (i + 2)) % 3 for i in range(p)]
        s = [min(si, ri - th["s0"][i]) for si, ri, i in zip(s, r, range(p))]
        w = WindowSpec.of(r, s)
        if w not in out:
            out.append(w)
    return out


def _phi_report(res) -> str:
    pw = res.phi.to_power_basis()
    lines = [f"Phi = {res.phi.to_text()}", f"    = {power_text(pw)}"]
    for deg in sorted({sum(e) for e in pw}, reverse=True):
        part = {e: c for e, c in pw.items() if sum(e) == deg}
        lines.append(f"degree {deg} part: {power_text(part)}")
    th = res.thresholds
    lines.append("thresholds: r0=%s s0=%s s1=%s" % (th["r0"], th["s0"], th["s1"]))
    for note in res.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines)


def _run_phi(spec, args):
    with warnings.catch_warnings(record=True):
        return compute_phi(spec, max_rounds=args.max_rounds, search_margin=args.search_margin,
                           check_lambda=not args.no_lambda_check)


def cmd_dimpoly(args):
    spec = load_spec(args.spec or args.file)
    res = _run_phi(spec, args)
    obj = res.to_json_obj()
    text = _phi_report(res)
    if args.oracle_check:
        checks = []
        bad = None
        for w in _heldout_windows(res):
            want = trdeg_oracle(spec, w, margin=args.margin)
            got = res.phi.evaluate(w.point())
            checks.append({"point": list(w.point()), "phi": frac_text(got), "oracle": want})
            if got != want and bad is None:
                bad = (w, got, want)
        obj["oracle_check"] = checks
        if bad is not None:
            emit(args, obj, text)
            raise CheckFailed(f"Phi{bad[0].point()} = {bad[1]} but the oracle gives {bad[2]}")
        text += f"\noracle-check: ok at {len(checks)} windows"
    emit(args, obj, text)


def cmd_univariate(args):
    spec = load_spec(args.spec or args.file)
    poly = univariate_phi(spec, args.search_margin, validate=True)
    d, lc = univariate_summary(poly)
    obj = {"phi": poly.to_json_obj(), "degree": d, "leading": frac_text(lc)}
    text = (f"phi = {poly.to_text()}\n    = {power_text(poly.to_power_basis())}\n"
            f"degree {d}, leading coefficient {frac_text(lc)}")
    if args.oracle_check:
        one = Partition.from_sizes([spec.part.m])
        uspec = ExtensionSpec(one, spec.n, spec.defining)
        for r in range(max(poly.total_degree(), 0) + 6, max(poly.total_degree(), 0) + 9):
            if spec.is_free:
                want = spec.n * shell_count(one, [r], [0])
            else:
                want = trdeg_oracle(uspec, WindowSpec.of([r], [0]), margin=args.margin)
            if poly.evaluate([r]) != want:
                raise CheckFailed(f"phi({r}) = {poly.evaluate([r])} but the oracle gives {want}")
        obj["oracle_check"] = "ok"
        text += "\noracle-check: ok"
    emit(args, obj, text)


def _summary_text(summ) -> str:
    top = {e: c for e, c in summ.top_coeffs}
    lines = [f"total degree d = {summ.total_degree_d}",
             f"degree-d part: {power_text(top)}",
             f"sigma-trdeg = {frac_text(summ.sigma_trdeg)}"]
    for mu, nu, idx, c in summ.lex_max:
        lines.append(f"lex-max mu={''.join(map(str, mu))} nu={','.join(map(str, nu))}: "
                     f"{list(idx)} coeff {frac_text(c)}")
    return "\n".join(lines)


def cmd_invariants(args):
    spec = load_spec(args.spec or args.file)
    res = _run_phi(spec, args)
    summ = invariants(res)
    emit(args, summ.to_json_obj(), _summary_text(summ))


def cmd_distinguish(args):
    a = load_spec(args.file_a)
    b = load_spec(args.file_b)
    if a.part != b.part:
        raise InputError("the two systems use different partitions")
    sa = invariants(_run_phi(a, args))
    sb = invariants(_run_phi(b, args))
    v = equivalence_distinguish(sa, sb)
    obj = {"verdict": "DISTINGUISHED" if v.distinguished else "INCONCLUSIVE",
           "field": v.field, "witness": v.detail}
    emit(args, obj, str(v))


def cmd_oracle(args):
    spec = load_spec(args.file)
    w = window_of(parse_kv(args.params), spec.part.p)
    val, info = trdeg_oracle(spec, w, margin=args.margin, return_info=True)
    obj = {"point": list(w.point()), "trdeg": val}
    obj.update({k: v for k, v in info.items() if k in ("window_size", "relation_dim")})
    text = str(val)
    if args.oracle_check:
        ex = trdeg_oracle(spec, w, margin=args.margin, exact=True)
        if ex != val:
            raise CheckFailed(f"modular rank gives {val} but exact rank gives {ex}")
        obj["oracle_check"] = "ok"
    emit(args, obj, text)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit canonical JSON")
    common.add_argument("--oracle-check", action="store_true",
                        help="compare against the brute-force oracle; exit 1 on mismatch")
    common.add_argument("--max-enum", type=int, default=None,
                        help="enumeration cap (default 10^7, or DIMPOLY_MAX_ENUM)")
    common.add_argument("--max-rounds", type=int, default=5, help="interpolation rounds (default 5)")
    common.add_argument("--search-margin", type=int, default=2,
                        help="characteristic set search margin (default 2)")
    common.add_argument("--margin", type=int, default=0, help="oracle box margin (default 0)")
    common.add_argument("--no-lambda-check", action="store_true",
                        help="do not fail when the residual has degree >= m")

    ap = argparse.ArgumentParser(prog="dimpoly", parents=[common],
                                 description="Dimension polynomials of inversive difference extensions.")
    ap.add_argument("--version", action="version", version=f"dimpoly {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("set-omega", parents=[common], help="omega_E for a finite E in N^m")
    s.add_argument("file")
    s.add_argument("--blocks")
    s.set_defaults(fn=cmd_set_omega)

    s = sub.add_parser("set-phi", parents=[common], help="phi_A for a finite A in Z^m")
    s.add_argument("file")
    s.add_argument("--blocks")
    s.set_defaults(fn=cmd_set_phi)

    s = sub.add_parser("shell", parents=[common], help="points with s_i <= ord_i <= r_i")
    s.add_argument("params", nargs="+", metavar="key=value")
    s.set_defaults(fn=cmd_shell)

    s = sub.add_parser("reduce", parents=[common], help="E-reduce h (first line) modulo the rest")
    s.add_argument("file")
    s.set_defaults(fn=cmd_reduce)

    s = sub.add_parser("charset", parents=[common], help="characteristic set of a linear ideal")
    s.add_argument("file")
    s.set_defaults(fn=cmd_charset)

    for name, fn, hlp in (("dimpoly", cmd_dimpoly, "the 2p-variate dimension polynomial"),
                          ("univariate", cmd_univariate, "the univariate dimension polynomial"),
                          ("invariants", cmd_invariants, "invariants of the 2p-variate polynomial")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("file", nargs="?")
        s.add_argument("--spec")
        s.set_defaults(fn=fn)

    s = sub.add_parser("distinguish", parents=[common], help="compare invariants of two systems")
    s.add_argument("file_a")
    s.add_argument("file_b")
    s.set_defaults(fn=cmd_distinguish)

    s = sub.add_parser("oracle", parents=[common], help="transcendence degree of one window")
    s.add_argument("file")
    s.add_argument("params", nargs="+", metavar="key=value")
    s.set_defaults(fn=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    if args.cmd in ("dimpoly", "univariate", "invariants") and not (args.file or args.spec):
        print("dimpoly: error: a spec file is required", file=sys.stderr)
        return 2
    saved = os.environ.get("DIMPOLY_MAX_ENUM")
    if args.max_enum is not None:
        os.environ["DIMPOLY_MAX_ENUM"] = str(args.max_enum)
    try:
        args.fn(args)
    except INPUT_ERRORS as e:
        print(f"dimpoly: input error: {e}", file=sys.stderr)
        return 2
    except COMPUTE_ERRORS as e:
        print(f"dimpoly: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    finally:
        # main() is also called in-process; leave the caller's environment alone
        if args.max_enum is not None:
            if saved is None:
                os.environ.pop("DIMPOLY_MAX_ENUM", None)
            else:
                os.environ["DIMPOLY_MAX_ENUM"] = saved
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
