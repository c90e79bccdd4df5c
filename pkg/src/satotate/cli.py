"""Command-line front end: every check as a subcommand with a structured report.

Exit status: 0 when every assertion of the invoked check passes, 1 when one
fails, 2 on configuration or budget errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .curvesum import weil_sweep
from .ffield import FieldError, field_make
from .haar import (OutOfRangeError, a4, a4_finite, clt_demo, group_spec, sample_traces,
                   stable_moment, trace_moment_mc, trace_moment_weyl, write_traces)
from .liealg import (a4_algebraic, build_root_system, kumar_containment, length_set,
                     multiplicity_table, tensor_square_decompose, weight, weyl_dimension,
                     write_table)
from .measures import (convergence_report, monodromy_match_report, sato_tate_pushforward,
                       traces_measure, write_histogram, write_values)
from .moments import (DEFAULT_BUDGET, BudgetError, chunk_record, fibre_power_moment,
                      merge_chunk_records, power_sum, power_sum_by_partitions, read_records,
                      rn_size, write_records)
from .vrd import bound_suite, gaussian_poly_approx, triangle_bump


class ConfigError(ValueError):
    pass


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=str) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        # big integers travel as decimal strings
        return x if abs(x) < 2 ** 53 else str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return str(x)


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.result: dict = {}
        self.assertions: list[dict] = []

    def check(self, name: str, passed: bool, margin=None, detail: str = "") -> bool:
        row = {"name": name, "passed": bool(passed)}
        if margin is not None:
            row["margin"] = margin
        if detail:
            row["detail"] = detail
        self.assertions.append(row)
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def as_dict(self) -> dict:
        return _jsonable({
            "tool": "satotate", "version": __version__, "command": self.command,
            "config": self.config, "result": self.result,
            "assertions": self.assertions, "passed": self.passed,
        })


def _flatten(prefix, x, out):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(x, list):
        for i, v in enumerate(x):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, x))


def render(report: Report, fmt: str) -> str:
    data = report.as_dict()
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    rows = []
    _flatten("", data, rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(rows)
        return buf.getvalue()
    lines = [f"{k}: {v}" for k, v in rows if not k.startswith("assertions")]
    for a in data["assertions"]:
        extra = f" (margin {a['margin']})" if "margin" in a else ""
        lines.append(f"{'PASS' if a['passed'] else 'FAIL'} {a['name']}{extra}")
    return "\n".join(lines) + "\n"


# -- subcommand handlers ------------------------------------------------------------

def _field(args):
    mod = tuple(_ints(args.modulus)) if args.modulus else None
    return field_make(args.p, args.k, mod)


def cmd_moments(args, rep: Report):
    s = _field(args)
    mr = power_sum(s, args.n, args.m, chunks=args.chunks, threads=args.threads, budget=args.budget)
    rep.result = mr.as_dict()
    env = mr.riemann_envelope()
    rep.check("riemann_envelope", abs(mr.sum) <= env, float(env - abs(mr.sum)))
    if args.n % 2 and args.m % 2:
        rep.check("odd_odd_vanishing", mr.sum == 0, detail=f"sum = {mr.sum}")


def cmd_partition_oracle(args, rep: Report):
    s = _field(args)
    direct = power_sum(s, args.n, args.m, budget=args.budget).sum
    oracle = power_sum_by_partitions(s, args.n, args.m)
    rep.result = {"q": s.q, "n": args.n, "m": args.m, "power_sum": direct,
                  "inclusion_exclusion": oracle}
    rep.check("inclusion_exclusion_equal", direct == oracle)


def cmd_weil_sweep(args, rep: Report):
    s = _field(args)
    rows = []
    for d in _ints(args.degrees):
        sw = weil_sweep(s, d)
        rows.append({"degree": d, "polynomials": sw.total, "skipped": sw.skipped,
                     "violations": len(sw.violations), "worst_margin": sw.worst_margin})
        rep.check(f"weil_bound_deg{d}", sw.passed, sw.worst_margin)
    rep.result = {"q": s.q, "sweeps": rows}


def cmd_traces(args, rep: Report):
    s = _field(args)
    mu = traces_measure(s, args.n, args.mode, args.N, args.seed, args.threads, args.budget)
    rep.result = {"q": s.q, "n": args.n, "mode": args.mode, "atoms": len(mu.values),
                  "samples": mu.samples, "moments": mu.moments(6)}
    if args.export:
        if args.export_format == "histogram":
            write_histogram(mu, args.export, bins=args.bins)
        else:
            write_values(mu, args.export)
        rep.result["export"] = args.export
    if args.mode == "exhaustive" and args.n % 2:
        # exact check on integers: sum of count * T must vanish
        T = np.rint(mu.values * math.sqrt(s.q)).astype(np.int64)
        counts = np.rint(mu.weights * rn_size(s.q, args.n)).astype(np.int64)
        rep.check("mean_zero", int(np.dot(T, counts)) == 0)


def cmd_haar(args, rep: Report):
    spec = group_spec(args.family, args.size)
    rows = []
    for m in _ints(args.m):
        row = {"m": m}
        if args.method in ("mc", "both"):
            est = trace_moment_mc(spec, m, args.N, args.seed, args.threads)
            row.update(mc=est.value, se=est.stderr)
        if args.method in ("weyl", "both"):
            row["weyl"] = trace_moment_weyl(spec, m).value
        if args.method == "both":
            dev = abs(row["mc"] - row["weyl"])
            rep.check(f"mc_vs_weyl_m{m}", dev <= 5 * row["se"] + 1e-12, 5 * row["se"] - dev)
        rows.append(row)
    rep.result = {"group": spec.name, "dim": spec.dim, "moments": rows}
    if args.export_traces:
        write_traces(args.export_traces, sample_traces(spec, args.N, args.seed, args.threads),
                     args.trace_format)
        rep.result["export"] = args.export_traces


def cmd_stable(args, rep: Report):
    spec = group_spec(args.family, args.size)
    rows = []
    for m in range(args.max_m + 1):
        row = {"m": m}
        try:
            row["stable"] = stable_moment(spec.family, spec.size, m, args.orthogonal_max)
        except OutOfRangeError:
            row["stable"] = "out_of_range"
        if spec.rank <= 3:
            row["weyl"] = trace_moment_weyl(spec, m).value
            if row["stable"] != "out_of_range":
                err = abs(row["weyl"] - row["stable"])
                rep.check(f"stable_vs_weyl_m{m}", err <= 1e-8, 1e-8 - err)
        rows.append(row)
    rep.result = {"group": spec.name, "table": rows}


def _read_class_table(path):
    table = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                size, trace = line.split(None, 1)
                table.append((int(size), trace.strip()))
    return table


def cmd_a4(args, rep: Report):
    if args.table:
        val = a4_finite(_read_class_table(args.table), args.order)
        rep.result = {"table": args.table, "a4": val}
        return
    if args.root_system:
        rs = build_root_system(args.root_system[0], int(args.root_system[1]))
        lam = weight(args.highest.split(",")) if args.highest else rs.omega(1)
        val = a4_algebraic(rs, lam)
        rep.result = {"root_system": rs.name, "highest": lam, "a4": val}
        return
    res = a4(group_spec(args.family, args.size))
    rep.result = {"group": res.spec.name, "a4": res.value, "method": res.method,
                  "on_list": res.on_list, "equals_three": res.equals_three}
    # a4 = 3 must land on the classification list
    rep.check("classification", res.on_list or not res.equals_three)


def cmd_freudenthal(args, rep: Report):
    rs = build_root_system(args.type, args.rank)
    hw = weight(args.highest.split(","))
    tab = multiplicity_table(rs, hw)
    dim = weyl_dimension(rs, hw)
    rep.result = {"root_system": rs.name, "highest": hw, "dimension": dim, "total": tab.total,
                  "multiplicities": [{"weight": w, "mult": m} for w, m in tab.records()]}
    if args.weight:
        rep.result["query"] = {"weight": args.weight, "mult": tab.get(args.weight.split(","))}
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            write_table(tab, fh)
    rep.check("weyl_dimension_total", tab.total == dim, dim - tab.total)


def cmd_tensor_square(args, rep: Report):
    rs = build_root_system(args.type, args.rank)
    hw = weight(args.highest.split(",")) if args.highest else rs.omega(1)
    parts = tensor_square_decompose(rs, hw)
    dim = weyl_dimension(rs, hw)
    kr = kumar_containment(rs, hw)
    rep.result = {
        "root_system": rs.name, "highest": hw, "dimension": dim,
        "constituents": [{"weight": w, "mult": m, "dim": weyl_dimension(rs, w)}
                         for w, m in sorted(parts.items(), key=lambda kv: -rs.height(kv[0]))],
        "a4": sum(m * m for m in parts.values()),
        "length_set": sorted(length_set(rs, parts)),
    }
    total = sum(m * weyl_dimension(rs, w) for w, m in parts.items())
    rep.check("dimension_identity", total == dim * dim, dim * dim - total)
    rep.check("kumar_containment", kr.holds, detail=f"{kr.checked} orbit representatives")


def cmd_vrd_bounds(args, rep: Report):
    ms = _ints(args.m)
    rows = []
    for m in ms:
        for b in bound_suite(m, args.points):
            rows.append({"m": m, **b.as_dict()})
            if "informational" not in b.note:
                rep.check(f"{b.bound}_m{m}", b.passed, b.margin, detail=b.region)
    rep.result = {"bounds": rows}
    if len(ms) > 1:
        h = args.h
        _, g = triangle_bump(h, args.bump_radius)
        conv = [gaussian_poly_approx(m, g, h) for m in ms]
        rep.result["approx_identity"] = [
            {"m": c.m, "sup_error": c.error, "weighted_error": c.weighted_error,
             "tail_log10": c.tail_log10} for c in conv]
        errs = [c.error for c in conv]
        rep.check("approx_identity_decreasing", all(b < a for a, b in zip(errs, errs[1:])))


def cmd_convergence(args, rep: Report):
    sizes = _ints(args.sizes)
    mus = [sato_tate_pushforward(group_spec(args.family, g), args.N, args.seed, args.threads)
           for g in sizes]
    cr = convergence_report(mus, keys=sizes, threshold=args.threshold)
    rep.result = cr.as_dict()
    rep.check("ks_non_increasing", cr.non_increasing)
    if args.threshold is not None:
        rep.check("final_ks_below_threshold", cr.below_threshold,
                  args.threshold - cr.distances[-1])


def cmd_monodromy_match(args, rep: Report):
    s = _field(args)
    mr = monodromy_match_report(s, args.n, args.N, args.seed, args.threads, args.factor,
                                args.min_q, args.budget)
    rep.result = mr.as_dict()
    if mr.asserted:
        rep.check("ks_within_baseline_factor", mr.ks_ok, mr.factor * mr.baseline - mr.ks)
        rep.check("stable_moments", mr.moments_ok)


def cmd_fibre_sandwich(args, rep: Report):
    s = _field(args)
    fs = fibre_power_moment(s, args.n_branch, args.n_pts, args.k_power, budget=args.budget)
    rep.result = {"q": s.q, "n_branch": args.n_branch, "n_pts": args.n_pts, "k": args.k_power,
                  "lower": str(fs.lower), "middle": fs.middle, "upper": str(fs.upper),
                  "base_sum": fs.base_sum}
    rep.check("sandwich", fs.holds)


def cmd_clt_demo(args, rep: Report):
    res = clt_demo(args.n, args.N, args.seed, args.threads)
    rep.result = res
    se = math.sqrt(res["rescaled_second_moment"] / args.N)
    rep.check("mean_zero", abs(res["rescaled_mean"]) <= 5 * se, 5 * se - abs(res["rescaled_mean"]))
    if args.ks_threshold is not None:
        rep.check("rescaled_ks", res["rescaled_ks_to_normal"] <= args.ks_threshold,
                  args.ks_threshold - res["rescaled_ks_to_normal"])


def cmd_chunk_run(args, rep: Report):
    s = _field(args)
    ids = [args.chunk_id] if args.chunk_id is not None else range(args.chunk_count)
    recs = [chunk_record(s, args.n, args.m, i, args.chunk_count, args.budget) for i in ids]
    if args.manifest:
        write_records(recs, args.manifest)
    rep.result = {"records": recs, "manifest": args.manifest}
    for r in recs:
        rep.check(f"chunk{r['chunk_id']}_riemann_envelope", r["within_riemann_envelope"])


def cmd_chunk_merge(args, rep: Report):
    recs = [r for path in args.manifests for r in read_records(path)]
    mr = merge_chunk_records(recs)
    rep.result = {**mr.as_dict(), "chunks": len(recs)}
    if args.verify:
        s = field_make(recs[0]["p"], recs[0]["k"],
                       tuple(recs[0]["modulus"]) if recs[0]["modulus"] else None)
        single = power_sum(s, mr.n, mr.m, budget=args.budget).sum
        rep.check("matches_single_process", single == mr.sum)


# -- parser -------------------------------------------------------------------------

def _add_field(p):
    p.add_argument("--p", type=int, required=True, help="field characteristic (odd prime)")
    p.add_argument("--k", type=int, default=1, help="extension degree")
    p.add_argument("--modulus", help="defining polynomial, coefficients low to high, comma separated")


def _add_exec(p, seed=False):
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="satotate", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"satotate {__version__}")
    ap.add_argument("--format", choices=("json", "csv", "text"), default="json")
    ap.add_argument("--out", help="write the report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("moments", cmd_moments, "exact power sum of traces over R_n(F_q)")
    _add_field(p); _add_exec(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--chunks", type=int, default=1)

    p = add("partition-oracle", cmd_partition_oracle, "compare with the inclusion-exclusion sum")
    _add_field(p); _add_exec(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    p = add("weil-sweep", cmd_weil_sweep, "Weil bound over all monic polynomials")
    _add_field(p)
    p.add_argument("--degrees", default="3,4")

    p = add("traces", cmd_traces, "distribution of T/sqrt(q)")
    _add_field(p); _add_exec(p, seed=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--N", type=int, default=10 ** 5)
    p.add_argument("--export")
    p.add_argument("--export-format", choices=("values", "histogram"), default="values")
    p.add_argument("--bins", type=int, default=50)

    p = add("haar", cmd_haar, "Haar trace moments")
    _add_exec(p, seed=True)
    p.add_argument("--family", required=True)
    p.add_argument("--size", "--g", "--n", dest="size", type=int)
    p.add_argument("--m", default="2,4")
    p.add_argument("--N", type=int, default=10 ** 5)
    p.add_argument("--method", choices=("mc", "weyl", "both"), default="both")
    p.add_argument("--export-traces")
    p.add_argument("--trace-format", choices=("text", "binary"), default="text")

    p = add("stable", cmd_stable, "stable-range moment table")
    p.add_argument("--family", required=True)
    p.add_argument("--size", "--g", "--n", dest="size", type=int, required=True)
    p.add_argument("--max-m", type=int, default=8)
    p.add_argument("--orthogonal-max", type=int)

    p = add("a4", cmd_a4, "fourth moment and classification verdict")
    p.add_argument("--family")
    p.add_argument("--size", "--g", "--n", dest="size", type=int)
    p.add_argument("--table", help="finite group class table: lines 'class_size trace'")
    p.add_argument("--order", type=int)
    p.add_argument("--root-system", nargs=2, metavar=("TYPE", "RANK"))
    p.add_argument("--highest")

    p = add("freudenthal", cmd_freudenthal, "weight multiplicities")
    p.add_argument("--type", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--highest", required=True, help="coordinates, comma separated")
    p.add_argument("--weight")
    p.add_argument("--export")

    p = add("tensor-square", cmd_tensor_square, "decompose V (x) V")
    p.add_argument("--type", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--highest")

    p = add("vrd-bounds", cmd_vrd_bounds, "Chebyshev bound suite and approximate identity")
    p.add_argument("--m", default="6,10,14")
    p.add_argument("--points", type=int, default=10 ** 4)
    p.add_argument("--h", type=float, default=2e-3)
    p.add_argument("--bump-radius", type=float, default=1.0)

    p = add("convergence", cmd_convergence, "KS distance of trace pushforwards to N(0,1)")
    _add_exec(p, seed=True)
    p.add_argument("--family", default="sp")
    p.add_argument("--sizes", default="1,2,5,10")
    p.add_argument("--N", type=int, default=10 ** 5)
    p.add_argument("--threshold", type=float)

    p = add("monodromy-match", cmd_monodromy_match, "curve traces vs Sp(2g) Haar traces")
    _add_field(p); _add_exec(p, seed=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, default=10 ** 5)
    p.add_argument("--factor", type=float, default=3.0)
    p.add_argument("--min-q", type=int, default=100)

    p = add("fibre-sandwich", cmd_fibre_sandwich, "fibre-power moment sandwich")
    _add_field(p); _add_exec(p)
    p.add_argument("--n-branch", type=int, required=True)
    p.add_argument("--n-pts", type=int, required=True)
    p.add_argument("--k-power", type=int, default=1)

    p = add("clt-demo", cmd_clt_demo, "U(1)^n traces, raw and rescaled")
    _add_exec(p, seed=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, default=10 ** 5)
    p.add_argument("--ks-threshold", type=float)

    p = add("chunk-run", cmd_chunk_run, "partial power sums for out-of-process chunks")
    _add_field(p); _add_exec(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--chunk-count", type=int, required=True)
    p.add_argument("--chunk-id", type=int)
    p.add_argument("--manifest", help="append line-delimited records to this file")

    p = add("chunk-merge", cmd_chunk_merge, "merge chunk manifests")
    _add_exec(p)
    p.add_argument("manifests", nargs="+")
    p.add_argument("--verify", action="store_true", help="recompute in one process and compare")
    return ap


_CONFIG_ERRORS = (ConfigError, FieldError, BudgetError, OutOfRangeError, ValueError,
                  OSError, KeyError)


def run(argv=None) -> tuple[int, Report | None]:
    ap = build_parser()
    args = ap.parse_args(argv)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format")}
    rep = Report(args.command, config)
    try:
        if args.command == "a4" and not (args.table or args.root_system or args.family):
            raise ConfigError("a4 needs --family, --table or --root-system")
        args.func(args, rep)
    except _CONFIG_ERRORS as exc:
        print(f"satotate {args.command}: {exc}", file=sys.stderr)
        return 2, None
    text = render(rep, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for a in rep.assertions:
        if not a["passed"]:
            print(f"satotate {args.command}: assertion failed: {a['name']}", file=sys.stderr)
    return (0 if rep.passed else 1), rep


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
