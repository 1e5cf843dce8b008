"""Config-driven command-line front end.

A run is described by a YAML mapping (or a previously written manifest.json,
which embeds the same mapping under "config"); command-line flags override
config keys. Every command writes its CSV artifacts plus a manifest.json
into the output directory, and nothing outside it.

Exit codes: 0 success, 2 configuration error, 3 numeric/convergence error,
4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import __version__
from .errors import (
    BoundaryError,
    CalibrationError,
    ConfigError,
    ConvergenceError,
    GraphFormatError,
    ParameterError,
    StepSizeError,
    SupercriticalLayerError,
)
from .gillespie import SeedStrategy, ensemble_summary_csv, realization_seeds, simulate
from .graphs import (
    Graph,
    LayeredNetwork,
    LinkSpec,
    couple_random,
    couple_to_hubs,
    gen_barabasi_albert,
    gen_barabasi_albert_edges,
    gen_erdos_renyi,
    gen_erdos_renyi_gnm,
    gen_watts_strogatz,
    load_graph,
)
from .meanfield import default_initial_state, integrate
from .params import EpidemicParams
from .spectral import threshold_curve
from .spillover import (
    calibrate_reservoir_rate,
    regime_boundary,
    sweep_beta12,
    sweep_links,
    topology_threshold_links,
)

COMMANDS = (
    "threshold-curve",
    "meanfield",
    "simulate",
    "sweep-links",
    "sweep-beta",
    "boundary",
    "calibrate",
    "topology-compare",
)

_COMMON_KEYS = {"command", "master_seed", "out", "threads", "realizations"}
_COMMAND_KEYS = {
    "threshold-curve": {"layer1", "layer2", "coupling", "alpha", "tau2_grid"},
    "meanfield": {"layer1", "layer2", "coupling", "params", "t_end", "dt",
                  "seed_fraction", "per_node"},
    "simulate": {"layer1", "layer2", "coupling", "params", "seeds", "t_max", "event_log"},
    "sweep-links": {"layer1", "layer2", "params", "seeds", "fraction_grid",
                    "coupling", "p_threshold", "size_threshold"},
    "sweep-beta": {"layer1", "layer2", "params", "seeds", "beta12_grid",
                   "link_count", "coupling", "p_threshold", "size_threshold"},
    "boundary": {"layer1", "layer2", "params", "seeds", "fraction_grid", "p_threshold"},
    "calibrate": {"layer2", "seeds", "mu", "target_mean"},
    "topology-compare": {"layer1", "topologies", "beta12", "mu", "seeds",
                         "target_mean", "calibration_R", "p_threshold"},
}

_GENERATOR_KEYS = {
    "erdos_renyi": {"n", "p", "seed"},
    "erdos_renyi_gnm": {"n", "m", "seed"},
    "watts_strogatz": {"n", "k", "p_rewire", "seed"},
    "barabasi_albert": {"n", "m_attach", "seed"},
    "barabasi_albert_edges": {"n", "edges", "seed", "m_attach"},
    "file": {"path"},
}


@dataclass
class RunConfig:
    command: str
    master_seed: int
    out_dir: Path
    threads: int
    realizations: Optional[int]
    raw: dict


def _fail(key: str, message: str) -> ConfigError:
    return ConfigError(f"config key '{key}': {message}")


def _require(cfg: dict, key: str, prefix: str = "") -> Any:
    if key not in cfg:
        raise _fail(prefix + key, "missing mandatory key")
    return cfg[key]


def _as_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(key, f"expected an integer, got {value!r}")
    return value


def _as_number(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(key, f"expected a number, got {value!r}")
    return float(value)


def _as_prob(value, key: str) -> float:
    x = _as_number(value, key)
    if not 0.0 <= x <= 1.0:
        raise _fail(key, f"value {x} outside [0, 1]")
    return x


def _as_grid(value, key: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise _fail(key, "expected a non-empty list of numbers")
    return [_as_number(v, f"{key}[{i}]") for i, v in enumerate(value)]


def _check_keys(cfg: dict, allowed: set[str], prefix: str = "") -> None:
    for key in cfg:
        if key not in allowed:
            raise _fail(prefix + str(key), "unknown key")


def _validate_layer(spec, key: str) -> None:
    if not isinstance(spec, dict):
        raise _fail(key, "expected a mapping describing the layer")
    gen = _require(spec, "generator", key + ".")
    if gen not in _GENERATOR_KEYS:
        raise _fail(f"{key}.generator", f"unknown generator {gen!r}")
    _check_keys(spec, _GENERATOR_KEYS[gen] | {"generator", "name"}, key + ".")
    if gen == "file":
        _require(spec, "path", key + ".")
        return
    n = _as_int(_require(spec, "n", key + "."), f"{key}.n")
    if n < 1:
        raise _fail(f"{key}.n", "node count must be at least 1")
    _as_int(_require(spec, "seed", key + "."), f"{key}.seed")
    if gen == "erdos_renyi":
        _as_prob(_require(spec, "p", key + "."), f"{key}.p")
    elif gen == "erdos_renyi_gnm":
        m = _as_int(_require(spec, "m", key + "."), f"{key}.m")
        if not 0 <= m <= n * (n - 1) // 2:
            raise _fail(f"{key}.m", f"edge count {m} out of range for n={n}")
    elif gen == "watts_strogatz":
        k = _as_int(_require(spec, "k", key + "."), f"{key}.k")
        if k % 2 != 0 or not 0 < k < n:
            raise _fail(f"{key}.k", f"mean degree {k} must be even and < n")
        _as_prob(_require(spec, "p_rewire", key + "."), f"{key}.p_rewire")
    elif gen == "barabasi_albert":
        m = _as_int(_require(spec, "m_attach", key + "."), f"{key}.m_attach")
        if not 1 <= m < n:
            raise _fail(f"{key}.m_attach", f"must satisfy 1 <= m_attach < n={n}")
    elif gen == "barabasi_albert_edges":
        _as_int(_require(spec, "edges", key + "."), f"{key}.edges")


def build_layer(spec: dict) -> Graph:
    gen = spec["generator"]
    if gen == "file":
        return load_graph(spec["path"])
    if gen == "erdos_renyi":
        return gen_erdos_renyi(spec["n"], spec["p"], spec["seed"])
    if gen == "erdos_renyi_gnm":
        return gen_erdos_renyi_gnm(spec["n"], spec["m"], spec["seed"])
    if gen == "watts_strogatz":
        return gen_watts_strogatz(spec["n"], spec["k"], spec["p_rewire"], spec["seed"])
    if gen == "barabasi_albert":
        return gen_barabasi_albert(spec["n"], spec["m_attach"], spec["seed"])
    if gen == "barabasi_albert_edges":
        return gen_barabasi_albert_edges(
            spec["n"], spec["edges"], spec["seed"], spec.get("m_attach", 3)
        )
    raise ConfigError(f"unknown generator {gen!r}")


def _validate_coupling(spec, key: str, need_level: bool) -> None:
    if not isinstance(spec, dict):
        raise _fail(key, "expected a mapping")
    _check_keys(
        spec, {"mode", "omega", "count", "fraction", "num_hubs", "seed", "redraw"}, key + "."
    )
    mode = spec.get("mode", "random")
    if mode not in ("random", "hubs"):
        raise _fail(f"{key}.mode", f"unknown coupling mode {mode!r}")
    levels = [k for k in ("omega", "count", "fraction") if k in spec]
    if need_level:
        if len(levels) != 1:
            raise _fail(key, "exactly one of omega, count, fraction is required")
        if "omega" in spec:
            values = spec["omega"] if isinstance(spec["omega"], list) else [spec["omega"]]
            for i, w in enumerate(values):
                _as_prob(w, f"{key}.omega[{i}]" if len(values) > 1 else f"{key}.omega")
        if "fraction" in spec:
            _as_prob(spec["fraction"], f"{key}.fraction")
        if "count" in spec:
            _as_int(spec["count"], f"{key}.count")
        _as_int(_require(spec, "seed", key + "."), f"{key}.seed")
    if mode == "hubs":
        _as_int(spec.get("num_hubs", 5), f"{key}.num_hubs")


def build_coupling(g1: Graph, g2: Graph, spec: dict, level=None) -> LayeredNetwork:
    mode = spec.get("mode", "random")
    seed = spec["seed"]
    if level is None:
        level = (
            LinkSpec(probability=spec["omega"]) if "omega" in spec
            else LinkSpec(count=spec["count"]) if "count" in spec
            else LinkSpec(fraction=spec["fraction"])
        )
    if mode == "hubs":
        count = level.resolve_count(g1.n, g2.n)
        if count is None:
            count = LinkSpec(fraction=level.probability).resolve_count(g1.n, g2.n)
        return couple_to_hubs(g1, g2, count, spec.get("num_hubs", 5), seed)
    return couple_random(g1, g2, level, seed)


def _validate_params(spec, key: str) -> EpidemicParams:
    if not isinstance(spec, dict):
        raise _fail(key, "expected a mapping of rates")
    _check_keys(spec, {"beta11", "beta12", "beta21", "beta22", "mu", "alpha"}, key + ".")
    kwargs = {}
    for name in ("beta11", "beta12", "beta21", "beta22"):
        kwargs[name] = _as_number(_require(spec, name, key + "."), f"{key}.{name}")
    kwargs["mu"] = _as_number(spec.get("mu", 1.0), f"{key}.mu")
    kwargs["alpha"] = _as_number(spec.get("alpha", 1.0), f"{key}.alpha")
    try:
        return EpidemicParams(**kwargs)
    except ParameterError as exc:
        raise _fail(key, str(exc)) from None


def _validate_seeds(spec, key: str) -> dict:
    if spec is None:
        return {"layer": 2, "count": 10}
    if not isinstance(spec, dict):
        raise _fail(key, "expected a mapping")
    _check_keys(spec, {"layer", "count", "nodes"}, key + ".")
    if "nodes" in spec:
        if not isinstance(spec["nodes"], list):
            raise _fail(f"{key}.nodes", "expected a list of node indices")
        return {"nodes": [_as_int(v, f"{key}.nodes") for v in spec["nodes"]]}
    layer = _as_int(spec.get("layer", 2), f"{key}.layer")
    if layer not in (1, 2):
        raise _fail(f"{key}.layer", "layer must be 1 or 2")
    count = _as_int(spec.get("count", 10), f"{key}.count")
    if count < 0:
        raise _fail(f"{key}.count", "seed count must be non-negative")
    return {"layer": layer, "count": count}


def parse_config(path=None, overrides: Optional[dict] = None) -> RunConfig:
    """Load, merge, and fully validate a run configuration.

    `path` may be a YAML config or a manifest.json written by a previous run
    (its embedded config is used, so runs round-trip). `overrides` are flag
    values that win over file keys.
    """
    cfg: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                loaded = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config file {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must contain a mapping")
        if "config" in loaded and "versions" in loaded:
            loaded = loaded["config"]  # manifest round-trip
            if not isinstance(loaded, dict):
                raise ConfigError("manifest 'config' entry must be a mapping")
        cfg.update(loaded)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value

    command = _require(cfg, "command")
    if command not in COMMANDS:
        raise _fail("command", f"unknown command {command!r}")
    _check_keys(cfg, _COMMON_KEYS | _COMMAND_KEYS[command])
    master_seed = _as_int(_require(cfg, "master_seed"), "master_seed")
    out_dir = Path(cfg.get("out", "."))
    threads = _as_int(cfg.get("threads", os.cpu_count() or 1), "threads")
    if threads < 1:
        raise _fail("threads", "worker count must be at least 1")
    realizations = cfg.get("realizations")
    if realizations is not None:
        realizations = _as_int(realizations, "realizations")
        if realizations < 1:
            raise _fail("realizations", "must be at least 1")

    for key in ("layer1", "layer2"):
        if key in _COMMAND_KEYS[command]:
            _validate_layer(_require(cfg, key), key)
    if "params" in _COMMAND_KEYS[command]:
        _validate_params(_require(cfg, "params"), "params")
    if "seeds" in _COMMAND_KEYS[command]:
        _validate_seeds(cfg.get("seeds"), "seeds")

    if command == "threshold-curve":
        _validate_coupling(_require(cfg, "coupling"), "coupling", need_level=True)
        _as_grid(_require(cfg, "tau2_grid"), "tau2_grid")
        _as_number(cfg.get("alpha", 1.0), "alpha")
    elif command == "meanfield":
        _validate_coupling(_require(cfg, "coupling"), "coupling", need_level=True)
        _as_number(cfg.get("t_end", 30.0), "t_end")
        _as_number(cfg.get("dt", 0.01), "dt")
        _as_prob(cfg.get("seed_fraction", 0.01), "seed_fraction")
    elif command == "simulate":
        _validate_coupling(_require(cfg, "coupling"), "coupling", need_level=True)
        if cfg.get("t_max") is not None:
            _as_number(cfg["t_max"], "t_max")
    elif command in ("sweep-links", "boundary"):
        _as_grid(_require(cfg, "fraction_grid"), "fraction_grid")
        if realizations is None:
            raise _fail("realizations", "missing mandatory key")
        if "coupling" in cfg:
            _validate_coupling(cfg["coupling"], "coupling", need_level=False)
    elif command == "sweep-beta":
        _as_grid(_require(cfg, "beta12_grid"), "beta12_grid")
        _as_int(cfg.get("link_count", 1000), "link_count")
        if realizations is None:
            raise _fail("realizations", "missing mandatory key")
        if "coupling" in cfg:
            _validate_coupling(cfg["coupling"], "coupling", need_level=False)
    elif command == "calibrate":
        target = cfg.get("target_mean", [51.0, 53.0])
        if not isinstance(target, list) or len(target) != 2:
            raise _fail("target_mean", "expected [lo, hi]")
        _as_number(cfg.get("mu", 1.0), "mu")
    elif command == "topology-compare":
        topologies = _require(cfg, "topologies")
        if not isinstance(topologies, list) or not topologies:
            raise _fail("topologies", "expected a non-empty list of layer specs")
        for i, spec in enumerate(topologies):
            _validate_layer(spec, f"topologies[{i}]")
            if not isinstance(spec.get("name", "x"), str):
                raise _fail(f"topologies[{i}].name", "expected a string")
        _as_number(_require(cfg, "beta12"), "beta12")
        if realizations is None:
            raise _fail("realizations", "missing mandatory key")

    return RunConfig(
        command=command,
        master_seed=master_seed,
        out_dir=out_dir,
        threads=threads,
        realizations=realizations,
        raw=cfg,
    )


def _write_manifest(run: RunConfig, results: Optional[dict] = None) -> None:
    import scipy

    manifest = {
        "command": run.command,
        "config": run.raw,
        "versions": {
            "coupledsir": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
    }
    if results is not None:
        manifest["results"] = results
    with (run.out_dir / "manifest.json").open("w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def dispatch(run: RunConfig) -> int:
    """Execute a validated run configuration; returns the process exit code."""
    cfg = run.raw
    run.out_dir.mkdir(parents=True, exist_ok=True)
    results: dict = {}

    if run.command == "threshold-curve":
        g1 = build_layer(cfg["layer1"])
        g2 = build_layer(cfg["layer2"])
        coupling = cfg["coupling"]
        omegas = coupling.get("omega")
        alpha = float(cfg.get("alpha", 1.0))
        grid = cfg["tau2_grid"]
        levels = omegas if isinstance(omegas, list) else [omegas] if omegas is not None else [None]
        for omega in levels:
            if omega is not None:
                net = build_coupling(g1, g2, coupling, LinkSpec(probability=omega))
                name = f"threshold_curve_omega_{omega:g}.csv"
            else:
                net = build_coupling(g1, g2, coupling)
                name = f"threshold_curve_links_{net.interlink_count}.csv"
            curve = threshold_curve(net, alpha, grid, omega=omega)
            curve.to_csv(run.out_dir / name)
            results[name] = {"lambda1": curve.lambda1, "lambda2": curve.lambda2}

    elif run.command == "meanfield":
        g1 = build_layer(cfg["layer1"])
        g2 = build_layer(cfg["layer2"])
        net = build_coupling(g1, g2, cfg["coupling"])
        params = _validate_params(cfg["params"], "params")
        init = default_initial_state(
            net, float(cfg.get("seed_fraction", 0.01)), seed=run.master_seed
        )
        per_node = bool(cfg.get("per_node", False))
        traj = integrate(
            net, params, init,
            t_end=float(cfg.get("t_end", 30.0)),
            dt=float(cfg.get("dt", 0.01)),
            record_states=per_node,
        )
        traj.to_csv(run.out_dir / "trajectory.csv")
        if per_node:
            traj.nodes_to_csv(run.out_dir / "nodes.csv")

    elif run.command == "simulate":
        g1 = build_layer(cfg["layer1"])
        g2 = build_layer(cfg["layer2"])
        net = build_coupling(g1, g2, cfg["coupling"])
        params = _validate_params(cfg["params"], "params")
        seeds_spec = _validate_seeds(cfg.get("seeds"), "seeds")
        if "nodes" in seeds_spec:
            seeds = seeds_spec["nodes"]
        else:
            node_seed, _, _ = realization_seeds(run.master_seed, 0)
            strategy = SeedStrategy(layer=seeds_spec["layer"], k=seeds_spec["count"])
            seeds = strategy.draw(net, np.random.default_rng(node_seed))
        _, sim_seed, _ = realization_seeds(run.master_seed, 0)
        record = bool(cfg.get("event_log", False))
        out = simulate(net, params, seeds, sim_seed, t_max=cfg.get("t_max"), record_log=record)
        ensemble_summary_csv([out], run.out_dir / "outcome.csv")
        if record:
            out.events.to_csv(run.out_dir / "events.csv")
        results["ever_infected"] = list(out.ever_infected)
        results["extinction_time"] = out.extinction_time

    elif run.command in ("sweep-links", "sweep-beta"):
        g1 = build_layer(cfg["layer1"])
        g2 = build_layer(cfg["layer2"])
        params = _validate_params(cfg["params"], "params")
        seeds_spec = _validate_seeds(cfg.get("seeds"), "seeds")
        coupling = cfg.get("coupling", {})
        common = dict(
            R=run.realizations,
            seeds_per_run=seeds_spec.get("count", 10),
            master_seed=run.master_seed,
            redraw=bool(coupling.get("redraw", True)),
            n_jobs=run.threads,
        )
        if run.command == "sweep-links":
            sweep = sweep_links(
                g1, g2, params, cfg["fraction_grid"],
                coupling_mode=coupling.get("mode", "random"),
                num_hubs=coupling.get("num_hubs", 5),
                **common,
            )
        else:
            sweep = sweep_beta12(
                g1, g2, params, cfg["beta12_grid"],
                link_count=int(cfg.get("link_count", 1000)),
                **common,
            )
        sweep.sizes_to_csv(run.out_dir / "sizes.csv")
        sweep.summary_to_csv(run.out_dir / "summary.csv")
        results["critical_value"] = sweep.critical

    elif run.command == "boundary":
        g1 = build_layer(cfg["layer1"])
        g2 = build_layer(cfg["layer2"])
        params = _validate_params(cfg["params"], "params")
        seeds_spec = _validate_seeds(cfg.get("seeds"), "seeds")
        boundary = regime_boundary(
            g1, g2, params, cfg["fraction_grid"],
            R=run.realizations,
            master_seed=run.master_seed,
            p_threshold=float(cfg.get("p_threshold", 0.1)),
            seeds_per_run=seeds_spec.get("count", 10),
            n_jobs=run.threads,
        )
        boundary.to_csv(run.out_dir / "boundary.csv")
        results["hyperbola_constant"] = boundary.constant
        results["max_relative_deviation"] = boundary.max_relative_deviation
        results["failures"] = [list(f) for f in boundary.failures]

    elif run.command == "calibrate":
        g2 = build_layer(cfg["layer2"])
        seeds_spec = _validate_seeds(cfg.get("seeds"), "seeds")
        target = tuple(float(x) for x in cfg.get("target_mean", [51.0, 53.0]))
        cal = calibrate_reservoir_rate(
            g2,
            target_mean_interval=target,
            seeds_per_run=seeds_spec.get("count", 10),
            mu=float(cfg.get("mu", 1.0)),
            R=run.realizations or 600,
            master_seed=run.master_seed,
            n_jobs=run.threads,
        )
        with (run.out_dir / "calibration.csv").open("w") as fh:
            fh.write("beta22,achieved_mean,R\n")
            fh.write(f"{cal.beta22:.12g},{cal.achieved_mean:.12g},{cal.R}\n")
        with (run.out_dir / "calibration_trace.csv").open("w") as fh:
            fh.write("step,beta22,mean\n")
            for i, (b, m) in enumerate(cal.trace):
                fh.write(f"{i},{b:.12g},{m:.12g}\n")
        results["beta22"] = cal.beta22
        results["achieved_mean"] = cal.achieved_mean

    elif run.command == "topology-compare":
        g1 = build_layer(cfg["layer1"])
        seeds_spec = _validate_seeds(cfg.get("seeds"), "seeds")
        target = tuple(float(x) for x in cfg.get("target_mean", [51.0, 53.0]))
        entries = []
        calibrations = {}
        for i, spec in enumerate(cfg["topologies"]):
            name = spec.get("name", f"topology_{i}")
            g2 = build_layer(spec)
            cal = calibrate_reservoir_rate(
                g2,
                target_mean_interval=target,
                seeds_per_run=seeds_spec.get("count", 10),
                mu=float(cfg.get("mu", 1.0)),
                R=int(cfg.get("calibration_R", 600)),
                master_seed=run.master_seed,
                n_jobs=run.threads,
            )
            calibrations[name] = cal
            entries.append((name, g2, cal.beta22))
        thresholds = topology_threshold_links(
            entries, g1, float(cfg["beta12"]),
            mu=float(cfg.get("mu", 1.0)),
            seeds_per_run=seeds_spec.get("count", 10),
            R=run.realizations,
            master_seed=run.master_seed,
            p_threshold=float(cfg.get("p_threshold", 0.1)),
            n_jobs=run.threads,
        )
        with (run.out_dir / "topology.csv").open("w") as fh:
            fh.write("topology,beta22,achieved_mean,min_links\n")
            for name, _, beta22 in entries:
                links = thresholds[name]
                fh.write(
                    f"{name},{beta22:.12g},{calibrations[name].achieved_mean:.12g},"
                    f"{'' if links is None else links}\n"
                )
        results["min_links"] = {k: v for k, v in thresholds.items()}

    _write_manifest(run, results or None)
    return 0


def _build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coupledsir",
        description="SIR epidemics on two interconnected networks",
    )
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML config or manifest.json of a previous run")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--threads", type=int, help="worker process cap")
        p.add_argument("--realizations", type=int, help="realizations per estimate")
        p.add_argument("--grid", help="comma-separated grid values (command-specific)")
        p.add_argument("--link-count", type=int, help="fixed inter-link count (sweep-beta)")
    return parser


_GRID_KEY = {
    "threshold-curve": "tau2_grid",
    "sweep-links": "fraction_grid",
    "boundary": "fraction_grid",
    "sweep-beta": "beta12_grid",
}


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_arg_parser().parse_args(argv)
    if args.command is None:
        print("error: no command given (see --help)", file=sys.stderr)
        return 2
    overrides: dict = {"command": args.command}
    if args.out is not None:
        overrides["out"] = args.out
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.realizations is not None:
        overrides["realizations"] = args.realizations
    if args.grid is not None:
        key = _GRID_KEY.get(args.command)
        if key is None:
            print(f"error: --grid is not accepted by {args.command}", file=sys.stderr)
            return 2
        try:
            overrides[key] = [float(x) for x in args.grid.split(",") if x.strip()]
        except ValueError:
            print(f"error: cannot parse --grid {args.grid!r}", file=sys.stderr)
            return 2
    if args.link_count is not None:
        overrides["link_count"] = args.link_count

    try:
        run = parse_config(args.config, overrides)
        return dispatch(run)
    except (ConfigError, ParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, SupercriticalLayerError, CalibrationError,
            BoundaryError, StepSizeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (GraphFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
