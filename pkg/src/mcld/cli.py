"""Command-line surface: simulations, truncation reports, frozen
percolation scaling experiments, and the selftest suites.

Exit codes: 0 ok, 1 test failure, 2 invalid input, 3 internal invariant
violation.  Identical arguments and seeds produce byte-identical output
files; all numbers are serialized with 17 significant digits.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import acceptance, serialize
from .clock_field import ClockField
from .errors import InvalidInput, InvariantViolation
from .events import deleted_mass_up_to, run_clocked
from .feller import ks_two_sample
from .frozen_percolation import fp_replica_rows, reference_replica_rows
from .mass_state import OrderedMassVector
from .truncation import truncation_report

__all__ = ["main"]

EXIT_OK = 0
EXIT_TEST_FAILURE = 1
EXIT_INVALID_INPUT = 2
EXIT_INVARIANT = 3


def _parse_masses_text(text: str) -> OrderedMassVector:
    try:
        values = [float(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError as exc:
        raise InvalidInput(f"could not parse masses: {exc}") from None
    if any(m < 0 for m in values) or any(
        a < b for a, b in zip(values, values[1:])
    ):
        raise InvalidInput("masses must be nonnegative non-increasing")
    return OrderedMassVector(tuple(values))


def _parse_gen(rule: str, seed: int) -> OrderedMassVector:
    parts = rule.split(":")
    try:
        if parts[0] == "powerlaw" and len(parts) == 3:
            exponent, n = float(parts[1]), int(parts[2])
            return OrderedMassVector(
                tuple(float(i) ** (-exponent) for i in range(1, n + 1))
            )
        if parts[0] == "constant" and len(parts) == 3:
            value, n = float(parts[1]), int(parts[2])
            return OrderedMassVector((value,) * n)
        if parts[0] == "uniform" and len(parts) == 2:
            n = int(parts[1])
            rng = np.random.default_rng([seed, 0xEEC])
            draws = np.sort(rng.uniform(0.0, 1.0, n))[::-1]
            return OrderedMassVector(tuple(draws))
    except (ValueError, InvalidInput) as exc:
        raise InvalidInput(f"bad generator rule {rule!r}: {exc}") from None
    raise InvalidInput(
        f"unknown generator rule {rule!r}; expected powerlaw:EXP:N, "
        "constant:VALUE:N or uniform:N"
    )


def _initial_state(args, seed: int) -> OrderedMassVector:
    sources = [args.masses, args.masses_file, args.gen]
    if sum(s is not None for s in sources) != 1:
        raise InvalidInput(
            "exactly one of --masses, --masses-file, --gen must be given"
        )
    if args.masses is not None:
        return _parse_masses_text(args.masses)
    if args.masses_file is not None:
        import json

        try:
            data = json.loads(Path(args.masses_file).read_text())
        except (OSError, ValueError) as exc:
            raise InvalidInput(f"unreadable masses file: {exc}") from None
        if not isinstance(data, list):
            raise InvalidInput("masses file must hold a JSON array of numbers")
        return _parse_masses_text(",".join(repr(float(x)) for x in data))
    return _parse_gen(args.gen, seed)


def _seed_of(args) -> int:
    if args.seed is not None:
        return int(args.seed, 0)
    env = os.environ.get("MCLD_SEED")
    if env is not None:
        return int(env, 0)
    return 0


def _parse_grid(args) -> tuple[float, ...]:
    if args.grid is not None:
        grid = tuple(float(x) for x in args.grid.split(","))
    elif args.t is not None:
        grid = (float(args.t),)
    else:
        raise InvalidInput("one of --t or --grid is required")
    if any(b <= a for a, b in zip(grid, grid[1:])) or any(g < 0 for g in grid):
        raise InvalidInput("time grid must be nonnegative and strictly increasing")
    return grid


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError as exc:
        raise InvalidInput(f"bad integer list {text!r}: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    seed = _seed_of(args)
    initial = _initial_state(args, seed)
    grid = _parse_grid(args)
    lam = float(args.lam)
    if lam < 0:
        raise InvalidInput("--lambda must be nonnegative")
    traj = run_clocked(initial, ClockField(seed), lam, t_end=grid[-1], grid=grid)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    serialize.write_csv(
        outdir / "trajectory.csv", ("time", "rank", "mass"), traj.csv_rows()
    )
    serialize.write_json(outdir / "events.json", traj.events_json())
    phi = deleted_mass_up_to(traj, grid[-1])
    serialize.write_json(
        outdir / "summary.json",
        {
            "seed": seed,
            "lambda": lam,
            "t_end": grid[-1],
            "final_state": traj.states[-1].to_json_list(),
            "deleted_mass": phi,
            "events": len(traj.events),
        },
    )
    print(
        f"final state ranks={len(traj.states[-1])} "
        f"largest={traj.states[-1][0] if len(traj.states[-1]) else 0.0} "
        f"deleted_mass={phi}"
    )
    return EXIT_OK


def cmd_truncation(args) -> int:
    seed = _seed_of(args)
    initial = _initial_state(args, seed)
    grid = _parse_grid(args)
    if len(grid) != 1:
        raise InvalidInput("truncation reports use a single --t")
    lam = float(args.lam)
    levels = _int_list(args.truncate)
    if not levels:
        raise InvalidInput("--truncate requires at least one level")
    replicas = int(args.replicas)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    base = ClockField(seed)
    any_violation = False
    for level in levels:
        for r in range(replicas):
            try:
                rep = truncation_report(initial, base.child(r), lam, grid[0], level)
            except InvariantViolation as exc:
                print(f"invariant violation at m={level} replica={r}: {exc}",
                      file=sys.stderr)
                any_violation = True
                continue
            if not rep.holds:
                any_violation = True
            serialize.write_json(
                outdir / f"report_m{level}_r{r}.json", rep.to_json_dict()
            )
    if any_violation:
        print("sandwich violation detected", file=sys.stderr)
        return EXIT_INVARIANT
    print(f"wrote {len(levels) * replicas} reports to {outdir}")
    return EXIT_OK


def _fp_task(task) -> tuple:
    kind, payload = task
    if kind == "fp":
        n, lam, u, t_list, top_r, seed, r = payload
        return kind, n, r, fp_replica_rows(n, lam, u, t_list, top_r, seed, r), 0
    n_ref, lam, u, t_list, top_r, seed, r, eps, m_head = payload
    rows, level = reference_replica_rows(
        n_ref, lam, u, t_list, top_r, seed, r, eps, m_head
    )
    return kind, n_ref, r, rows, level


def cmd_fp(args) -> int:
    seed = _seed_of(args)
    n_list = _int_list(args.n_list)
    if not n_list:
        raise InvalidInput("--n-list requires at least one size")
    lam = float(args.lam)
    if args.t is None:
        raise InvalidInput("--t is required")
    t_list = tuple(float(x) for x in args.t.split(","))
    if any(b <= a for a, b in zip(t_list, t_list[1:])) or any(t < 0 for t in t_list):
        raise InvalidInput("--t times must be nonnegative and strictly increasing")
    u = float(args.u)
    replicas = int(args.replicas)
    top_r = int(args.top_r)
    n_ref = int(args.n_ref) if args.n_ref else 4 * max(n_list)
    workers = int(args.workers)

    tasks = [
        ("fp", (n, lam, u, t_list, top_r, seed, r))
        for n in n_list
        for r in range(replicas)
    ]
    tasks += [
        ("ref", (n_ref, lam, u, t_list, top_r, seed, r, args.budget_eps, args.budget_m))
        for r in range(replicas)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_fp_task, tasks, chunksize=8))
    else:
        outcomes = [_fp_task(task) for task in tasks]

    samples = {n: np.zeros((replicas, len(t_list), top_r)) for n in n_list}
    reference = np.zeros((replicas, len(t_list), top_r))
    ref_level = 0
    for kind, n, r, rows, level in outcomes:
        if kind == "fp":
            samples[n][r] = rows
        else:
            reference[r] = rows
            ref_level = max(ref_level, level)

    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    serialize.write_json(
        outdir / "config.json",
        [
            {
                "n": n,
                "lambda_rescaled": lam,
                "u": u,
                "t_list": list(t_list),
                "top_r": top_r,
                "replicas": replicas,
                "seed": seed,
            }
            for n in n_list
        ],
    )
    rows_out = []
    for n in n_list:
        for r in range(replicas):
            for k, t in enumerate(t_list):
                for rank in range(top_r):
                    rows_out.append((n, r, t, rank + 1, samples[n][r, k, rank]))
    serialize.write_csv(
        outdir / "samples.csv", ("n", "replica", "t", "rank", "scaled_mass"), rows_out
    )
    ks_vs_reference = {
        str(n): {
            serialize.format_number(t): [
                ks_two_sample(samples[n][:, k, rank], reference[:, k, rank])
                for rank in range(top_r)
            ]
            for k, t in enumerate(t_list)
        }
        for n in n_list
    }
    ks_between = {
        f"{a}:{b}": {
            serialize.format_number(t): [
                ks_two_sample(samples[a][:, k, rank], samples[b][:, k, rank])
                for rank in range(top_r)
            ]
            for k, t in enumerate(t_list)
        }
        for a, b in zip(n_list, n_list[1:])
    }
    serialize.write_json(
        outdir / "comparison.json",
        {
            "n_list": n_list,
            "t_list": list(t_list),
            "lambda_rescaled": lam,
            "u": u,
            "replicas": replicas,
            "top_r": top_r,
            "n_ref": n_ref,
            "ref_truncation_level": ref_level,
            "ks_vs_reference": ks_vs_reference,
            "ks_between": ks_between,
        },
    )
    print(f"wrote samples and comparison to {outdir}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    names = acceptance.QUICK if args.suite == "quick" else None
    results = acceptance.run_criteria(names, corrupt_clocks=args.corrupt_clock_prf)
    out_dir = args.out_dir
    if out_dir is None and args.suite == "full":
        out_dir = "selftest_out"  # the full suite always leaves a results file
    if out_dir:
        outdir = Path(out_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        serialize.write_json(
            outdir / "selftest.json",
            {
                "suite": args.suite,
                "all_passed": all(r.passed for r in results),
                "criteria": [
                    {
                        "name": r.name,
                        "passed": r.passed,
                        "runtime_s": r.runtime_s,
                        "details": r.details,
                    }
                    for r in results
                ],
            },
        )
    return EXIT_OK if all(r.passed for r in results) else EXIT_TEST_FAILURE


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcld",
        description="Multiplicative coalescent with linear deletion: "
        "simulators and verification harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_state_args(p):
        p.add_argument("--masses", help="comma-separated non-increasing masses")
        p.add_argument("--masses-file", help="JSON array file of masses")
        p.add_argument(
            "--gen", help="generator rule: powerlaw:EXP:N | constant:VALUE:N | uniform:N"
        )

    def add_common(p):
        p.add_argument("--seed", help="64-bit seed (decimal or 0x hex); "
                       "falls back to MCLD_SEED, then 0")
        p.add_argument("--out-dir", default="out", help="output directory")

    p_sim = sub.add_parser("simulate", help="run one trajectory")
    add_state_args(p_sim)
    p_sim.add_argument("--lambda", dest="lam", default="0", help="deletion rate")
    p_sim.add_argument("--t", help="time horizon")
    p_sim.add_argument("--grid", help="comma-separated recording times")
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_tr = sub.add_parser("truncation", help="sandwich reports per level and seed")
    add_state_args(p_tr)
    p_tr.add_argument("--lambda", dest="lam", default="1", help="deletion rate")
    p_tr.add_argument("--t", help="time horizon")
    p_tr.add_argument("--grid", help=argparse.SUPPRESS)
    p_tr.add_argument("--truncate", required=True, help="comma-separated levels")
    p_tr.add_argument("--replicas", default="1")
    add_common(p_tr)
    p_tr.set_defaults(func=cmd_truncation)

    p_fp = sub.add_parser("fp", help="frozen percolation scaling experiment")
    p_fp.add_argument("--n-list", required=True, help="comma-separated sizes")
    p_fp.add_argument("--lambda", dest="lam", default="1", help="rescaled rate")
    p_fp.add_argument("--u", default="0", help="critical window parameter")
    p_fp.add_argument("--t", help="rescaled time")
    p_fp.add_argument("--replicas", default="100")
    p_fp.add_argument("--top-r", default="3")
    p_fp.add_argument("--n-ref", help="reference graph size (default 4*max n)")
    p_fp.add_argument("--budget-eps", type=float, default=1.2,
                      help=argparse.SUPPRESS)
    p_fp.add_argument("--budget-m", type=float, default=2.0,
                      help=argparse.SUPPRESS)
    p_fp.add_argument("--workers", default=str(os.cpu_count() or 1),
                      help="parallel replica workers")
    add_common(p_fp)
    p_fp.set_defaults(func=cmd_fp)

    p_st = sub.add_parser("selftest", help="run the acceptance suites")
    p_st.add_argument("--suite", choices=("quick", "full"), default="quick")
    p_st.add_argument("--corrupt-clock-prf", action="store_true",
                      help=argparse.SUPPRESS)  # negative-control test hook
    p_st.add_argument("--seed", help=argparse.SUPPRESS)
    p_st.add_argument("--out-dir", default=None, help="where to write results JSON")
    p_st.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, matching the invalid-input contract
        return EXIT_INVALID_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except InvariantViolation as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
