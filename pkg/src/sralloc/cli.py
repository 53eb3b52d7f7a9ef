"""Command-line front end.

Subcommands: analyze, allocate, simulate, compare, verify.  Kernels are
referenced either by bundled name (example, fir, dec-fir, mat, imi, pat,
bic) or by path to a ``.knl`` file.  Exit codes: 0 success, 1 analysis
infeasibility or verification failure, 2 input error, 3 resource cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .allocate import Allocation, InfeasibleBudgetError, run_allocator, unit_allocation
from .config import (
    ACCOUNTING_MODES,
    CapExceededError,
    OUTPUT_FORMATS,
    POLICIES,
    RunConfig,
)
from .corpus import KERNEL_NAMES, REFERENCE_DISTRIBUTIONS, bundled_kernels
from .dfg import build_dfg, critical_graph, to_dot
from .kernel import Kernel, KernelError, parse_kernel_file
from .oracle import oracle_analysis, oracle_replay
from .reuse import analyze_all
from .simulate import steady_state_cycles

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2
EXIT_CAP = 3

_ALG_ORDER = ("fr", "pr", "cpa")
_ALG_LABEL = {"fr": "fr-ra", "pr": "pr-ra", "cpa": "cpa-ra"}


def _load_kernel(name_or_path: str) -> Kernel:
    if name_or_path in KERNEL_NAMES:
        return bundled_kernels()[name_or_path]
    if not os.path.exists(name_or_path):
        raise FileNotFoundError(f"no bundled kernel or file named {name_or_path!r}")
    return parse_kernel_file(name_or_path)


def _bc_json(value: Fraction):
    return int(value) if value.denominator == 1 else float(value)


def _emit_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _print_table(rows: list[list[str]], header: list[str]):
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    def fmt(row):
        return "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    print(fmt(header))
    print(fmt(["-" * w for w in widths]))
    for row in rows:
        print(fmt(row))


def _beta_str(kernel: Kernel, alloc: Allocation) -> str:
    return ", ".join(str(alloc.beta[a]) for a in kernel.arrays)


def _maybe_dump_dot(args, kernel, reuse):
    if not getattr(args, "dump_dot", None):
        return
    g = build_dfg(kernel, reuse, unit_allocation(reuse), None)
    cg = critical_graph(g)
    base = args.dump_dot
    with open(base + ".dfg.dot", "w", encoding="utf-8") as fh:
        fh.write(to_dot(g, "dfg"))
    with open(base + ".cg.dot", "w", encoding="utf-8") as fh:
        fh.write(to_dot(cg, "cg"))


# ---------------------------------------------------------------------------
# subcommands

def cmd_analyze(args, cfg: RunConfig) -> int:
    kernel = _load_kernel(args.kernel)
    reuse = analyze_all(kernel)
    _maybe_dump_dot(args, kernel, reuse)
    if cfg.output_format == "json":
        payload = {
            "kernel": kernel.name,
            "arrays": {
                a: {
                    "carrier": i.carrier,
                    "required_regs": i.required_regs,
                    "total": i.total_accesses,
                    "after": i.after_accesses,
                    "save": i.save,
                    "bc": _bc_json(i.bc),
                }
                for a, i in reuse.items()
            },
        }
        print(_emit_json(payload))
    elif cfg.output_format == "csv":
        print("kernel,array,carrier,required_regs,total,after,save,bc")
        for a in sorted(reuse):
            i = reuse[a]
            carrier = "" if i.carrier is None else i.carrier
            print(f"{kernel.name},{a},{carrier},{i.required_regs},"
                  f"{i.total_accesses},{i.after_accesses},{i.save},{_bc_json(i.bc)}")
    else:
        rows = []
        for a in sorted(reuse):
            i = reuse[a]
            rows.append([a, "-" if i.carrier is None else kernel.loops[i.carrier].index,
                         i.required_regs, i.total_accesses, i.after_accesses, i.save,
                         _bc_json(i.bc)])
        print(f"kernel: {kernel.name}")
        _print_table(rows, ["array", "carrier", "regs", "total", "after", "save", "bc"])
    return EXIT_OK


def _algorithms(arg: str) -> list[str]:
    return list(_ALG_ORDER) if arg == "all" else [arg]


def cmd_allocate(args, cfg: RunConfig) -> int:
    kernel = _load_kernel(args.kernel)
    reuse = analyze_all(kernel)
    _maybe_dump_dot(args, kernel, reuse)
    allocs = [run_allocator(a, kernel, reuse, cfg.register_budget,
                            cfg.latencies, cfg.rr_accounting)
              for a in _algorithms(args.alg)]
    if cfg.output_format == "json":
        print(_emit_json({"kernel": kernel.name,
                          "allocations": [al.as_dict() for al in allocs]}))
    elif cfg.output_format == "csv":
        print("kernel,algorithm,budget,used,beta")
        for al in allocs:
            print(f"{kernel.name},{al.algorithm},{al.register_budget},"
                  f"{al.registers_used},{_beta_str(kernel, al).replace(', ', ';')}")
    else:
        print(f"kernel: {kernel.name}  budget: {cfg.register_budget}"
              f"  arrays: {', '.join(kernel.arrays)}")
        rows = [[al.algorithm, _beta_str(kernel, al), al.registers_used] for al in allocs]
        _print_table(rows, ["algorithm", "registers per array", "total"])
    return EXIT_OK


def _simulate_one(kernel, reuse, alg, cfg: RunConfig):
    alloc = run_allocator(alg, kernel, reuse, cfg.register_budget,
                          cfg.latencies, cfg.rr_accounting)
    return steady_state_cycles(kernel, reuse, alloc, cfg.policy, cfg.ports,
                               cfg.latencies, cfg.iteration_cap)


def cmd_simulate(args, cfg: RunConfig) -> int:
    kernel = _load_kernel(args.kernel)
    reuse = analyze_all(kernel)
    _maybe_dump_dot(args, kernel, reuse)
    reports = [_simulate_one(kernel, reuse, a, cfg) for a in _algorithms(args.alg)]
    if cfg.output_format == "json":
        print(_emit_json({"kernel": kernel.name,
                          "reports": [r.as_dict() for r in reports]}))
    elif cfg.output_format == "csv":
        print("kernel,algorithm,policy,used,memory_cycles,t_exec_per_iter")
        for r in reports:
            print(f"{r.kernel},{r.algorithm},{r.policy},{r.registers_used},"
                  f"{r.memory_cycles},{r.t_exec_per_iter}")
    else:
        for r in reports:
            print(f"kernel: {r.kernel}  algorithm: {r.algorithm}  policy: {r.policy}")
            print(f"  registers used: {r.registers_used} / {r.register_budget}")
            print(f"  memory cycles (one outer iteration): {r.memory_cycles}")
            print(f"  per level: {list(r.per_level)}")
            print(f"  per array: {dict(r.per_array)}")
            print(f"  critical-path latency per body iteration: {r.t_exec_per_iter}")
    return EXIT_OK


def _compare_kernel(kernel, cfg: RunConfig) -> dict:
    reuse = analyze_all(kernel)
    reports = {a: _simulate_one(kernel, reuse, a, cfg) for a in _ALG_ORDER}
    base = reports["fr"].memory_cycles
    out = {"kernel": kernel.name, "arrays": list(kernel.arrays), "versions": []}
    reference = REFERENCE_DISTRIBUTIONS.get(kernel.name, {})
    for version, alg in zip(("v1", "v2", "v3"), _ALG_ORDER):
        r = reports[alg]
        beta = [dict(r.beta)[a] for a in kernel.arrays]
        entry = {
            "version": version,
            "algorithm": r.algorithm,
            "beta": beta,
            "used": r.registers_used,
            "memory_cycles": r.memory_cycles,
            "reduction_vs_v1": round((base - r.memory_cycles) / base, 4) if base else 0.0,
        }
        ref = reference.get(version)
        if ref is not None:
            entry["reference_beta"] = list(ref[0])
            entry["matches_reference"] = (tuple(beta) == ref[0] and r.registers_used == ref[1])
        out["versions"].append(entry)
    return out


def cmd_compare(args, cfg: RunConfig) -> int:
    names = list(KERNEL_NAMES) if args.kernel == "all" else [args.kernel]
    results = []
    for name in sorted(names) if args.kernel == "all" else names:
        kernel = _load_kernel(name)
        if args.dump_dot:
            _maybe_dump_dot(args, kernel, analyze_all(kernel))
        results.append(_compare_kernel(kernel, cfg))
    if cfg.output_format == "json":
        print(_emit_json({"policy": cfg.policy, "budget": cfg.register_budget,
                          "kernels": results}))
        return EXIT_OK
    if cfg.output_format == "csv":
        print("kernel,version,algorithm,beta,used,memory_cycles,reduction_vs_v1")
        for res in results:
            for v in res["versions"]:
                beta = ";".join(str(b) for b in v["beta"])
                print(f"{res['kernel']},{v['version']},{v['algorithm']},{beta},"
                      f"{v['used']},{v['memory_cycles']},{v['reduction_vs_v1']}")
        return EXIT_OK
    for res in results:
        print(f"kernel: {res['kernel']}  (arrays: {', '.join(res['arrays'])};"
              f" policy: {cfg.policy}; budget: {cfg.register_budget})")
        rows = []
        for v in res["versions"]:
            mark = ""
            if "matches_reference" in v:
                mark = "yes" if v["matches_reference"] else ("no, ref " + ", ".join(
                    str(b) for b in v["reference_beta"]))
            rows.append([v["version"], v["algorithm"],
                         ", ".join(str(b) for b in v["beta"]), v["used"],
                         v["memory_cycles"], f"{100 * v['reduction_vs_v1']:.1f}%", mark])
        _print_table(rows, ["ver", "algorithm", "registers", "used",
                            "cycles", "vs v1", "matches classic"])
        print()
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    names = sorted(KERNEL_NAMES) if args.kernel == "all" else [args.kernel]
    failures = []
    checks = []
    for name in names:
        kernel = _load_kernel(name)
        reuse = analyze_all(kernel)
        expected = oracle_analysis(kernel, cfg.iteration_cap)
        for array, info in reuse.items():
            got = expected[array]
            for field, mine in (("carrier", info.carrier),
                                ("required_regs", info.required_regs),
                                ("total", info.total_accesses),
                                ("after", info.after_accesses),
                                ("save", info.save)):
                ok = got[field] == mine
                checks.append((name, array, field, ok))
                if not ok:
                    failures.append(f"{name}/{array}/{field}: analytic {mine} != oracle {got[field]}")
        for alg in _ALG_ORDER:
            alloc = run_allocator(alg, kernel, reuse, cfg.register_budget,
                                  cfg.latencies, cfg.rr_accounting)
            mine = steady_state_cycles(kernel, reuse, alloc, cfg.policy, cfg.ports,
                                       cfg.latencies, cfg.iteration_cap).memory_cycles
            oracle_cycles = oracle_replay(kernel, alloc, cfg.policy, cfg.ports,
                                          cfg.iteration_cap)[0]
            ok = mine == oracle_cycles
            checks.append((name, alloc.algorithm, "cycles", ok))
            if not ok:
                failures.append(f"{name}/{alloc.algorithm}/cycles: analytic {mine}"
                                f" != oracle {oracle_cycles}")
    agreed = len(checks) - len(failures)
    print(f"verify: {agreed}/{len(checks)} checks agree"
          f" ({len(names)} kernel{'s' if len(names) != 1 else ''}, policy {cfg.policy})")
    for f in failures:
        print(f"  DISAGREE {f}")
    return EXIT_OK if not failures else EXIT_INFEASIBLE


# ---------------------------------------------------------------------------
# argument plumbing

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--nr", type=int, help="register budget (default 64)")
    p.add_argument("--policy", choices=POLICIES, help="residency policy")
    p.add_argument("--rr-accounting", choices=ACCOUNTING_MODES, dest="rr_accounting",
                   help="cut cost accounting for the critical-path allocator")
    p.add_argument("--ports", type=int, help="RAM ports per array (default 1)")
    p.add_argument("--format", choices=OUTPUT_FORMATS, dest="fmt", help="output format")
    p.add_argument("--cap", type=int, help="iteration-space enumeration cap")
    p.add_argument("--dump-dot", metavar="PREFIX", dest="dump_dot",
                   help="write PREFIX.dfg.dot and PREFIX.cg.dot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sralloc",
        description="reuse analysis, register allocation, and memory-cycle "
                    "simulation for perfectly nested affine loop kernels")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="per-array reuse metrics")
    p.add_argument("kernel", help="bundled kernel name or .knl path")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("allocate", help="run register allocators")
    p.add_argument("kernel")
    p.add_argument("--alg", choices=["fr", "pr", "cpa", "all"], default="all")
    _add_common(p)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("simulate", help="steady-state memory cycles for one allocator")
    p.add_argument("kernel")
    p.add_argument("--alg", choices=["fr", "pr", "cpa", "all"], default="cpa")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="all three allocators side by side")
    p.add_argument("kernel", help="kernel name, .knl path, or 'all'")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="analytic results against the brute-force oracle")
    p.add_argument("kernel", help="kernel name, .knl path, or 'all'")
    _add_common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig.from_env()
    if args.nr is not None:
        cfg.register_budget = args.nr
    if args.policy is not None:
        cfg.policy = args.policy
    if getattr(args, "rr_accounting", None):
        cfg.rr_accounting = args.rr_accounting
    if args.ports is not None:
        cfg.ports = args.ports
    if args.fmt is not None:
        cfg.output_format = args.fmt
    if args.cap is not None:
        cfg.iteration_cap = args.cap
    return cfg.validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return args.func(args, cfg)
    except (FileNotFoundError, KernelError, ValueError) as exc:
        if isinstance(exc, InfeasibleBudgetError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
