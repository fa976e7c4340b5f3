"""Command line entry point ``acw``.

Exit status: 0 when every verification passed, 2 when a hypothesis or
verification failed (the certificate is still written), 1 on error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io as aio
from . import scenarios as sc
from .config import caps_override
from .dist import convolve, entropy, renyi
from .errors import ACWError, HypothesisFailed
from .groups import Group, format_element

SCHEMA = "acw-cert/1"
EXIT_OK, EXIT_ERROR, EXIT_HYPOTHESIS = 0, 1, 2


class Result:
    """Payload plus an optional table for TSV output."""

    def __init__(self, payload: dict, ok: bool = True, header=None, rows=None):
        self.payload = {"schema": SCHEMA, **payload}
        self.ok = ok
        self.header, self.rows = header, rows


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _flatten(d: dict, prefix: str = ""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, json.dumps(v) if isinstance(v, list) else v


def _render(res: Result, fmt: str) -> str:
    payload = _jsonable(res.payload)
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    if res.rows is not None:
        lines = ["\t".join(res.header)] + ["\t".join(str(c) for c in r) for r in res.rows]
    else:
        lines = ["key\tvalue"] + [f"{k}\t{v}" for k, v in _flatten(payload)]
    return "\n".join(lines) + "\n"


def _group(args, positional=None) -> Group:
    src = positional or args.group
    if src is None:
        raise ACWError("a group is required (positional argument or --group)")
    return aio.load_group_arg(src)


# -- subcommands ---------------------------------------------------------------------


def cmd_entropy(args) -> Result:
    g = _group(args)
    p = aio.read_dist(g, args.dist)
    out = {"H": entropy(p), "H2": renyi(p, 2), "H0": math.log(p.size), "support": p.size}
    return Result(out)


def cmd_dist(args) -> Result:
    from .ruzsa import ruzsa_dist

    g = _group(args)
    p, q = aio.read_dist(g, args.p), aio.read_dist(g, args.q)
    return Result({"d": ruzsa_dist(p, q), "H_X": entropy(p), "H_Y": entropy(q),
                   "H_X_minus_Y": entropy(convolve(p, q, -1))})


def cmd_tau(args) -> Result:
    from .tau import doubling_constant, growth_certificate, minimize_tau

    g = _group(args, args.group_file)
    A = aio.read_set(g, args.set)
    stats = doubling_constant(g, A)
    p, q, trace = minimize_tau(g, A, stats, n_hi=args.n_hi, max_steps=args.max_steps,
                               polish=args.polish)
    cert = growth_certificate(p, args.scale)
    ok = trace.check_invariants() and trace.terminated
    return Result({"doubling": stats.to_json(), "trace": trace.to_json(g),
                   "growth": cert.to_json(), "invariants_ok": trace.check_invariants()}, ok,
                  ["step", "n", "tau_before", "tau_after"],
                  [(i, s["n"], s["tau_before"], s["tau_after"]) for i, s in enumerate(trace.steps)])


def cmd_growth(args) -> Result:
    from .tau import growth_certificate, small_growth_check, small_growth_index

    g = _group(args)
    p = aio.read_dist(g, args.dist)
    cert = growth_certificate(p, args.scale)
    out = {"growth": cert.to_json()}
    ok = True
    if args.d is not None:
        out["holds_at_d"] = cert.holds_at(args.d)
        ok = out["holds_at_d"]
        if args.d > 1 and cert.scale > 32 * args.d * math.log(args.d):
            n, delta = small_growth_check(p, args.d)
            out["small_growth"] = {"n": n, "delta": delta, "ok": delta <= 1 / 16 + 1e-9}
            ok = ok and out["small_growth"]["ok"]
        elif args.d > 1:
            out["small_growth"] = {"n": small_growth_index(args.d), "skipped": "scale too small"}
    return Result(out, ok, ["n", "H_nX"], list(enumerate(cert.entropies, start=1)))


def cmd_dft(args) -> Result:
    from .fourier import dft, lspec, spec

    g = _group(args)
    p = aio.read_dist(g, args.dist)
    tab = dft(p)
    out = {"order": g.order}
    if args.lspec is not None:
        out["lspec"] = [list(g.element(c)) for c in lspec(p, args.lspec).tolist()]
    if args.spec is not None:
        out["spec"] = [list(g.element(c)) for c in spec(p, args.spec).tolist()]
    if args.full:
        out["table"] = [[list(g.element(c)), v.real, v.imag] for c, v in enumerate(tab.values)]
    rows = [(format_element(g, c), v.real, v.imag, abs(v)) for c, v in enumerate(tab.values)]
    return Result(out, True, ["char", "re", "im", "abs"], rows)


def cmd_bohr(args) -> Result:
    from .bohr import bohr_set, bohr_size_check, regular_radius

    g = _group(args, args.group_file)
    chars, radius = aio.read_bohr(g, args.bohr)
    info = None
    if args.regular:
        radius, info = regular_radius(g, chars, radius, report=True)
    B = bohr_set(g, chars, radius)
    chk = bohr_size_check(B)
    out = {"bohr": B.to_json(), "lower_ok": chk.lower_ok, "doubling_ok": chk.doubling_ok,
           "lower_bound": chk.lower_bound, "size_double": chk.size_double}
    if info is not None:
        out["regularity"] = info
    if args.members:
        out["members"] = [list(g.element(i)) for i in B.members.tolist()]
    return Result(out, chk.lower_ok and chk.doubling_ok)


def cmd_bogolyubov(args) -> Result:
    from .bohr import bohr_set, weak_bogolyubov_global, weak_bogolyubov_local

    g = _group(args, args.group_file)
    A = aio.read_set(g, args.set)
    if args.local:
        chars, radius = aio.read_bohr(g, args.local)
        res = weak_bogolyubov_local(bohr_set(g, chars, radius), A, nu=args.nu)
    else:
        res = weak_bogolyubov_global(g, A)
    ok = res.contained and res.margin >= res.margin_required
    return Result(res.to_json(), ok)


def cmd_cover(args) -> Result:
    from .pipeline import freiman_cover

    g = _group(args, args.group_file)
    A = aio.read_set(g, args.set)
    cert = freiman_cover(g, A, C=args.C, n_hi=args.n_hi, max_steps=args.max_steps,
                         x_source=args.x_source, eps=args.eps)
    ok = cert.cover_valid and cert.all_hypotheses_hold
    return Result(cert.to_json(), ok)


def cmd_verify(args) -> Result:
    from .ruzsa import verify_calculus

    rep = verify_calculus(args.cases, args.seed, args.group_max)
    rows = [(k, v) for k, v in rep["worst_slack"].items()]
    return Result(rep, rep["ok"], ["check", "worst_slack"], rows)


def _parse_params(items) -> dict:
    out = {}
    for it in items or []:
        k, _, v = it.partition("=")
        out[k.replace("-", "_")] = int(v) if v.lstrip("-").isdigit() else float(v)
    return out


def cmd_scenario(args) -> Result:
    kind = args.kind
    params = _parse_params(args.param)
    if kind == "binomial":
        p = sc.binomial_product(**params)
        out = {"kind": kind, "params": params, "dist": aio.dist_to_json(p)}
        if args.emit_set:
            Path(args.emit_set).write_text(aio.format_dist(p))
        return Result(out)
    if kind == "subgroup_noise":
        s = sc.subgroup_noise(rng=np.random.default_rng(args.seed), **params)
    else:
        s = sc.KINDS[kind](**params)
    from .tau import doubling_constant

    out = {"kind": kind, "params": params, "scenario": s.to_json(),
           "K": doubling_constant(s.group, s.A).K}
    if args.emit_set:
        aio.write_set(args.emit_set, s.group, s.A)
    if args.emit_group:
        aio.write_group(args.emit_group, s.group)
    return Result(out)


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommand copies must not clobber values given before the subcommand
        dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--group", default=dflt(None),
                       help="group JSON file or inline moduli such as 4,4")
        p.add_argument("--seed", type=int, default=dflt(0))
        p.add_argument("--cap-order", type=int, default=dflt(None),
                       help="raise the group-order caps to this value")
        p.add_argument("--out", default=dflt(None), help="write the result here instead of stdout")
        p.add_argument("--format", choices=("json", "tsv"), default=dflt("json"))
        return p

    common = global_flags(True)
    ap = argparse.ArgumentParser(prog="acw", parents=[global_flags(False)],
                                 description="Entropy, Bohr-set and covering computations "
                                             "on finite abelian groups.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("entropy", cmd_entropy, "Shannon, collision and Hartley entropy of a distribution")
    p.add_argument("dist")
    p = add("dist", cmd_dist, "entropic Ruzsa distance between two distributions")
    p.add_argument("p")
    p.add_argument("q")
    p = add("tau-minimize", cmd_tau, "run the tau decrement iteration from U_A")
    p.add_argument("group_file")
    p.add_argument("set")
    p.add_argument("--n-hi", type=int)
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--scale", type=int, default=16, help="growth certificate scale")
    p.add_argument("--polish", action="store_true")
    p = add("growth", cmd_growth, "polynomial growth certificate of a distribution")
    p.add_argument("dist")
    p.add_argument("--scale", type=int, default=16)
    p.add_argument("--d", type=float)
    p = add("dft", cmd_dft, "Fourier transform and spectra")
    p.add_argument("dist")
    p.add_argument("--lspec", type=float)
    p.add_argument("--spec", type=float)
    p.add_argument("--full", action="store_true", help="include the whole table in JSON")
    p = add("bohr", cmd_bohr, "Bohr set membership and size bounds")
    p.add_argument("group_file")
    p.add_argument("bohr")
    p.add_argument("--regular", action="store_true",
                   help="replace the radius by a regular one in [radius, 2 radius]")
    p.add_argument("--members", action="store_true")
    p = add("bogolyubov", cmd_bogolyubov, "weak Bogolyubov containment")
    p.add_argument("group_file")
    p.add_argument("set")
    p.add_argument("--local", help="Bohr descriptor JSON for the local version")
    p.add_argument("--nu", type=float, default=1.0)
    p = add("cover", cmd_cover, "end-to-end covering certificate")
    p.add_argument("group_file")
    p.add_argument("set")
    p.add_argument("--C", type=float, default=1e6)
    p.add_argument("--n-hi", type=int)
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--x-source", choices=("tau", "uniform"), default="tau")
    p.add_argument("--eps", type=float)
    p = add("verify-calculus", cmd_verify, "randomized entropy-inequality suite")
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--group-max", type=int, default=512)
    p = add("scenario", cmd_scenario, "generate a test set or distribution")
    p.add_argument("kind", choices=sorted(list(sc.KINDS) + ["subgroup_noise"]))
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--emit-set", help="also write the set (or distribution) file")
    p.add_argument("--emit-group", help="also write the group JSON file")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.cap_order:
            n = args.cap_order
            with caps_override(enum_order=n, dft_order=n):
                res = args.func(args)
        else:
            res = args.func(args)
    except HypothesisFailed as exc:
        res = Result({"error": str(exc), "hypothesis": exc.name,
                      "values": _jsonable(exc.values)}, ok=False)
    except (ACWError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"acw: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    text = _render(res, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if res.ok else EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
