"""Command-line entry points: run experiments, summarize, self-check."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ExperimentConfig, load_config
from .experiments.compare import compare
from .experiments.runner import run

OUT_ENV_VAR = "SAGINRL_OUT_DIR"


def _resolve_out(args, cfg: ExperimentConfig) -> str:
    if args.out:
        return args.out
    return os.environ.get(OUT_ENV_VAR) or cfg.out_dir


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.scenario:
        cfg.scenario = args.scenario
    if args.algorithm:
        cfg.algorithm = args.algorithm
    if args.seed_override is not None:
        cfg.seeds = (args.seed_override,)
    cfg.validate()
    csv_path, sidecar = run(cfg, _resolve_out(args, cfg))
    print(csv_path)
    print(sidecar)
    return 0


def _cmd_compare(args) -> int:
    out = compare(args.files, args.out or "summary.csv")
    print(out)
    return 0


def _cmd_gradcheck(args) -> int:
    from .nn import NetSpec, backward, forward, forward_cached, init_params

    rng = np.random.default_rng(args.seed_override or 0)
    worst = 0.0
    for _ in range(args.count):
        n_hidden = int(rng.integers(0, 3))
        dims = [int(rng.integers(1, 17)) for _ in range(n_hidden + 2)]
        spec = NetSpec(dims[0], tuple(dims[1:-1]), dims[-1])
        p64 = [np.asarray(t, dtype=np.float64) for t in init_params(spec, rng)]
        x = rng.normal(size=spec.in_dim)
        up = rng.normal(size=spec.out_dim)
        _, acts = forward_cached(spec, p64, x)
        analytic, _ = backward(spec, p64, acts, up)
        h = 1e-3
        for ti, tensor in enumerate(p64):
            it = np.nditer(tensor, flags=["multi_index"])
            for _v in it:
                loc = it.multi_index
                orig = tensor[loc]
                tensor[loc] = orig + h
                f_plus = float(up @ forward(spec, p64, x))
                tensor[loc] = orig - h
                f_minus = float(up @ forward(spec, p64, x))
                tensor[loc] = orig
                fd = (f_plus - f_minus) / (2 * h)
                a = float(analytic[ti][loc])
                scale = max(abs(a), abs(fd), 1e-6)
                worst = max(worst, abs(a - fd) / scale)
    print(f"gradcheck: {args.count} specs, max relative error {worst:.3e}")
    return 0 if worst < 1e-4 else 1


def _cmd_selftest(args) -> int:
    from . import channels as ch
    from .config import ExperimentConfig
    from .federation import aggregate_soft
    from .nn import NetSpec, init_params
    from .params import deserialize, serialize
    from .sim import build_world, simulate_tick

    ok = True

    def check(name: str, passed: bool) -> None:
        nonlocal ok
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}")

    rng = np.random.default_rng(0)
    vals = rng.uniform(-120, 120, size=200)
    rt = max(abs(ch.linear_to_db(ch.db_to_linear(v)) - v) / max(abs(v), 1e-9)
             for v in vals)
    check("db/linear round trip", rt < 1e-12)

    spec = NetSpec(5, (8,), 3)
    ps = init_params(spec, rng)
    check("wire format round trip", deserialize(serialize(ps)).layout_id == ps.layout_id
          and all(np.array_equal(a, b) for a, b in zip(deserialize(serialize(ps)), ps)))

    g = init_params(spec, rng)
    check("aggregation endpoints",
          aggregate_soft(g, ps, 1.0) is ps and aggregate_soft(g, ps, 0.0) is g)

    cfg = ExperimentConfig()
    cfg.world.n_source = 5
    cfg.world.n_dest = 3
    world = build_world(cfg.world, cfg.channels, seed=1)
    conserved = True
    for _ in range(200):
        simulate_tick(world)
        conserved &= world.conservation_holds()
    check("packet conservation (200 ticks)", conserved)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="saginrl",
                                     description="network offloading experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured experiment")
    p_run.add_argument("--config", help="YAML/JSON config or a run sidecar")
    p_run.add_argument("--scenario", help="override the scenario")
    p_run.add_argument("--algorithm", help="override the algorithm")
    p_run.add_argument("--seed-override", type=int, help="run a single seed")
    p_run.add_argument("--out", help=f"output dir (also {OUT_ENV_VAR})")
    p_run.set_defaults(fn=_cmd_run)

    p_cmp = sub.add_parser("compare", help="summarize metrics CSVs across seeds")
    p_cmp.add_argument("files", nargs="+")
    p_cmp.add_argument("--out", help="summary CSV path")
    p_cmp.set_defaults(fn=_cmd_compare)

    p_gc = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p_gc.add_argument("--count", type=int, default=20)
    p_gc.add_argument("--seed-override", type=int, default=0)
    p_gc.set_defaults(fn=_cmd_gradcheck)

    p_st = sub.add_parser("selftest", help="quick invariant suite")
    p_st.set_defaults(fn=_cmd_selftest)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
