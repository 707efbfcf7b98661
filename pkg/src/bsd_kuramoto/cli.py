"""Command line front end.

Subcommands::

    run <scenario.json> [--force] [--gnuplot-stub]
    check {lift,reduction,rank,tangency} <scenario.json>
    info <kind> <m> <n>
    sample <kind> <m> <n> --seed S (--boundary | --interior)

Exit codes: 0 success, 1 check tolerance violated, 2 invalid configuration,
3 divergence. ``BSD_KURAMOTO_THREADS`` caps the worker count (0 = auto).
"""
import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import domains, dynamics, flows, groups, observables
from .domains import DomainKind, DomainSpec
from .dynamics import IntegrationConfig, integrate_ensemble, integrate_lift
from .errors import BSDError, DivergenceDetected
from .scenario import Scenario, ScenarioError, encode_matrix, initial_ensemble, load_scenario

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

CSV_HEADER = "time,r,spread,mean_field_norm,max_tangency_drift"
THREADS_ENV = "BSD_KURAMOTO_THREADS"

DEFAULT_CHECK_TOL = {"lift": 1e-6, "reduction": 1e-8, "rank": 1e-8, "tangency": 1e-9}


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def worker_count(env=None) -> int:
    env = os.environ if env is None else env
    raw = env.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a non-negative integer, got {raw!r}") from None
    if value < 0:
        raise UsageError(f"{THREADS_ENV} must be a non-negative integer, got {raw!r}")
    return value or (os.cpu_count() or 1)


def write_csv(path: Path, traj: dynamics.Trajectory) -> None:
    lines = [CSV_HEADER]
    for rec in traj.monitors:
        lines.append(",".join(_fmt(v) for v in (rec.time, rec.r, rec.spread, rec.mean_field_norm,
                                                rec.max_tangency_drift)))
    path.write_text("\n".join(lines) + "\n")


def write_jsonl(path: Path, traj: dynamics.Trajectory) -> None:
    with path.open("w") as fh:
        for snap in traj.snapshots:
            row = {"time": snap.time, "oscillators": [encode_matrix(z) for z in snap.oscillators]}
            fh.write(json.dumps(row) + "\n")


def write_gnuplot_stub(path: Path, csv_name: str) -> None:
    path.write_text(
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 'time'\n"
        f"plot '{csv_name}' using 1:2 with lines, \\\n"
        "     '' using 1:3 with lines, \\\n"
        "     '' using 1:4 with lines\n"
    )


def _resolve(sc: Scenario, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else sc.base_dir / p


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario, worker_count())
    targets = [_resolve(sc, sc.outputs.csv)]
    if sc.outputs.jsonl:
        targets.append(_resolve(sc, sc.outputs.jsonl))
    if args.gnuplot_stub:
        targets.append(targets[0].with_suffix(".gp"))
    existing = [str(p) for p in targets if p.exists()]
    if existing and not args.force:
        raise UsageError(f"outputs exist (use --force to overwrite): {', '.join(existing)}")
    traj = integrate_ensemble(sc.model, initial_ensemble(sc), sc.integration)
    write_csv(targets[0], traj)
    if sc.outputs.jsonl:
        write_jsonl(targets[1], traj)
    if args.gnuplot_stub:
        write_gnuplot_stub(targets[-1], targets[0].name)
    print(f"wrote {len(traj.monitors)} rows to {targets[0]}")
    return EXIT_OK


def _report(kind: str, worst: float, tol: float, where: str) -> int:
    ok = worst <= tol
    print(f"check {kind}: max discrepancy {worst:.3e} (tolerance {tol:.1e}) {'PASS' if ok else 'FAIL'}")
    if not ok:
        print(f"  worst at {where}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def check_lift(sc: Scenario, tol: float) -> int:
    cfg = IntegrationConfig(sc.integration.dt, sc.integration.t_end, "rk4", 0,
                            sc.integration.monitor_every, sc.integration.tolerances)
    init = initial_ensemble(sc)
    direct = integrate_ensemble(sc.model, init, cfg)
    _, lifted = integrate_lift(sc.model, init, cfg)
    worst, where = 0.0, "-"
    for a, b in zip(direct.snapshots, lifted.snapshots):
        err = np.linalg.norm(a.oscillators - b.oscillators, axis=(-2, -1))
        k = int(np.argmax(err))
        if err[k] > worst:
            worst, where = float(err[k]), f"oscillator {k}, time {a.time:.6g}"
    return _report("lift", worst, tol, where)


def check_reduction(sc: Scenario, tol: float) -> int:
    spec = sc.model.working_domain
    if spec.shape != (1, 1) or spec.kind is not DomainKind.TYPE_I:
        raise UsageError("reduction check needs a type I (1,1) working domain")
    init = initial_ensemble(sc)
    z0 = init.oscillators[:, 0, 0]
    if np.max(np.abs(np.abs(z0) - 1.0)) > 1e-12:
        raise UsageError("reduction check needs oscillators on the unit circle")
    drift = sc.model.drift
    omega = float(np.imag(drift.a[0, 0] - drift.d_block()[0, 0]))
    cfg = IntegrationConfig(sc.integration.dt, sc.integration.t_end, "rk4", 0, 1, sc.integration.tolerances)
    traj = integrate_ensemble(sc.model, init, cfg)
    theta = np.angle(z0)
    kappa = sc.model.coupling
    worst, where = 0.0, "-"
    for k, snap in enumerate(traj.snapshots):
        if k:
            theta = dynamics.rk4_step(lambda p: flows.classic_kuramoto_rhs(p, omega, kappa), theta, cfg.step)
        diff = np.abs(np.angle(snap.oscillators[:, 0, 0] * np.exp(-1j * theta)))
        j = int(np.argmax(diff))
        if diff[j] > worst:
            worst, where = float(diff[j]), f"oscillator {j}, time {snap.time:.6g}"
    return _report("reduction", worst, tol, where)


def check_rank(sc: Scenario, tol: float) -> int:
    spec = sc.model.working_domain
    group = sc.model.group
    zs = initial_ensemble(sc).oscillators
    rng = np.random.default_rng(sc.check.seed)
    violations = []
    for trial in range(sc.check.transports):
        h = groups.random_group_element(group, rng)
        before = domains.boundary_ranks(spec, zs, tol)
        after = domains.boundary_ranks(spec, groups.mobius_batch(h.g, spec.m, zs), tol)
        for k in np.flatnonzero(before != after):
            violations.append((trial, int(k), int(before[k]), int(after[k])))
    print(f"check rank: {len(violations)} violations over {sc.check.transports} transports "
          f"of {len(zs)} oscillators (tol {tol:.1e}) {'PASS' if not violations else 'FAIL'}")
    if violations:
        trial, k, b, a = violations[0]
        print(f"  first: oscillator {k}, transport {trial}: rank {b} -> {a}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def check_tangency(sc: Scenario, tol: float) -> int:
    spec = sc.model.working_domain
    traj = integrate_ensemble(sc.model, initial_ensemble(sc), sc.integration)
    worst, where = 0.0, "-"
    for snap in traj.snapshots:
        defects = domains.bs_defect_batch(spec, snap.oscillators)
        k = int(np.argmax(defects))
        if defects[k] > worst:
            worst, where = float(defects[k]), f"oscillator {k}, time {snap.time:.6g}"
    return _report("tangency", worst, tol, where)


CHECKS = {"lift": check_lift, "reduction": check_reduction, "rank": check_rank, "tangency": check_tangency}


def cmd_check(args) -> int:
    sc = load_scenario(args.scenario, worker_count())
    tol = sc.check.tolerance if sc.check.tolerance is not None else DEFAULT_CHECK_TOL[args.kind]
    return CHECKS[args.kind](sc, tol)


def _domain_from_args(kind: str, m: int, n: int) -> DomainSpec:
    try:
        return DomainSpec(kind, m, n)
    except (ValueError, BSDError) as exc:
        raise UsageError(str(exc)) from None


_BS_NAMES = {
    DomainKind.TYPE_I: "complex Stiefel manifold St_{{{m},{n}}} = U({m})/U({k})",
    DomainKind.TYPE_II: "unitary antisymmetric matrices",
    DomainKind.TYPE_III: "unitary symmetric matrices U({n})/O({n})",
}
_COMPACT = {DomainKind.TYPE_I: "SU({mn})", DomainKind.TYPE_II: "SO({nn})", DomainKind.TYPE_III: "Sp({n})"}
_STABILIZER = {DomainKind.TYPE_I: "S(U({m}) x U({n}))", DomainKind.TYPE_II: "U({n})", DomainKind.TYPE_III: "U({n})"}


def bs_name(spec: DomainSpec) -> str:
    m, n = spec.m, spec.n
    if spec.kind is DomainKind.TYPE_I:
        if m == n:
            return f"unitary group U({n})"
        if n == 1:
            return f"sphere S^{2 * m - 1}"
        return _BS_NAMES[spec.kind].format(m=m, n=n, k=m - n)
    if spec.kind is DomainKind.TYPE_II and n % 2:
        return f"antisymmetric partial isometries with z^dagger z a rank {n - 1} projector"
    if spec.kind is DomainKind.TYPE_II and n == 2:
        return "unitary antisymmetric matrices U(2)/Sp(1) ~ S^1"
    return _BS_NAMES[spec.kind].format(n=n)


def info_lines(spec: DomainSpec) -> list:
    group = groups.GroupSpec.for_domain(spec)
    dim_d, dim_bs = domains.dims(spec)
    fmt = dict(m=spec.m, n=spec.n, mn=spec.m + spec.n, nn=2 * spec.n)
    lines = [
        f"domain            {spec.label()}",
        f"group G           {group.name()}",
        f"compact form U    {_COMPACT[spec.kind].format(**fmt)}",
        f"stabilizer K      {_STABILIZER[spec.kind].format(**fmt)}",
        f"dim D (real)      {dim_d}",
        f"BS boundary       {bs_name(spec)}",
        f"dim BS (real)     {dim_bs}",
        "family chain      " + ", ".join(observables.family_chain(spec)),
    ]
    chain = []
    for t in range(spec.max_rank + 1):
        sub = domains.component_subdomain(spec, t)
        if sub is not None:
            chain.append(f"t={t}: {observables.family_label(sub)} on {bs_name(sub)}, dim {domains.dims(sub)[1]}")
    if spec.kind is DomainKind.TYPE_II and spec.n % 2:
        chain.append(f"t={spec.max_rank}: KM_{{1}}(II) on a point, dim 0")
    lines.extend("  " + c for c in chain)
    return lines


def cmd_info(args) -> int:
    spec = _domain_from_args(args.kind, args.m, args.n)
    print("\n".join(info_lines(spec)))
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = _domain_from_args(args.kind, args.m, args.n)
    sampler = domains.sample_bs_boundary if args.boundary else domains.sample_interior
    print(json.dumps(encode_matrix(sampler(spec, args.seed))))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bsd-kuramoto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a scenario and write CSV/JSONL output")
    p.add_argument("scenario")
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")
    p.add_argument("--gnuplot-stub", action="store_true", help="also write a gnuplot script next to the CSV")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="run an oracle comparison on a scenario")
    p.add_argument("kind", choices=sorted(CHECKS))
    p.add_argument("scenario")
    p.set_defaults(func=cmd_check)

    for name, func, help_text in (("info", cmd_info, "print domain, group and family data"),
                                  ("sample", cmd_sample, "print a random point as JSON")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("kind", choices=["I", "II", "III"])
        p.add_argument("m", type=int)
        p.add_argument("n", type=int)
        if name == "sample":
            p.add_argument("--seed", type=int, required=True)
            where = p.add_mutually_exclusive_group(required=True)
            where.add_argument("--boundary", action="store_true")
            where.add_argument("--interior", action="store_true")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        worker_count()
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceDetected as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (BSDError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
