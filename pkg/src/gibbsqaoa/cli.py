"""Command-line orchestration of the two-stage classical-quantum pipeline.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
Every run writes its resolved configuration next to its outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import analytics, expressivity, gibbs_quality, mpo_evolution, problems, qaoa, synthesis
from .mps import MPS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    instance: str
    seed: int
    dtau: float = 0.01
    t_total: float = None
    temperature: float = None
    chi: int = 32
    order: str = "II"
    k_max: int = 4
    fidelity_target: float = 0.99
    p: int = 3
    optimizer: str = "cmaes"
    budget: int = 300
    grid: int = 64
    samples: int = 2000
    out: str = "run"

    def __post_init__(self):
        if self.seed is None:
            raise ConfigError("seed is mandatory for reproducibility")
        if self.t_total is None and self.temperature is None:
            raise ConfigError("one of t_total / temperature is required")
        if self.t_total is None:
            if self.temperature <= 0:
                raise ConfigError("temperature must be positive")
            self.t_total = 1.0 / self.temperature
        for name in ("dtau", "t_total", "chi", "k_max", "fidelity_target", "p", "budget", "grid", "samples"):
            if getattr(self, name) is not None and getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.order.upper() not in ("I", "II"):
            raise ConfigError("order must be I or II")
        if self.optimizer not in ("cobyla", "cmaes"):
            raise ConfigError("optimizer must be cobyla or cmaes")

    @classmethod
    def from_args(cls, args) -> "PipelineConfig":
        data = {}
        if getattr(args, "config", None):
            with open(args.config) as f:
                data.update(json.load(f))
        for key in cls.__dataclass_fields__:
            flag = getattr(args, key, None)
            if flag is not None:
                data[key] = flag
        if "instance" not in data:
            raise ConfigError("an instance file is required (--instance)")
        data.setdefault("seed", getattr(args, "seed", None))
        return cls(**data)


def _load_hamiltonian(path):
    if not os.path.exists(path):
        raise ConfigError(f"instance file not found: {path}")
    return problems.load_instance(path)


def _write_config(cfg: PipelineConfig, outdir):
    with open(os.path.join(outdir, "config.json"), "w") as f:
        json.dump(asdict(cfg), f, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args) -> int:
    if args.type == "maxcut":
        g = problems.random_maxcut(args.n, args.seed)
        problems.save_instance(args.out, g, seed=args.seed)
    elif args.type == "tsp":
        t = problems.random_tsp(args.cities, args.seed)
        problems.save_instance(args.out, t, seed=args.seed)
    else:
        raise ConfigError(f"unknown instance type {args.type!r}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_gibbs(args) -> int:
    cfg = PipelineConfig.from_args(args)
    _, h = _load_hamiltonian(cfg.instance)
    os.makedirs(cfg.out, exist_ok=True)
    _write_config(cfg, cfg.out)
    trace = mpo_evolution.imaginary_time_evolve(
        h, cfg.t_total, cfg.dtau, cfg.chi, order=cfg.order
    )
    trace.write_csv(os.path.join(cfg.out, "evolution.csv"))
    trace.final_mps.save(os.path.join(cfg.out, "mps.json"))
    report, points = gibbs_quality.quality_with_scatter(
        trace.final_mps, h, cfg.samples, cfg.seed
    )
    with open(os.path.join(cfg.out, "gibbs_report.json"), "w") as f:
        f.write(report.to_json())
    gibbs_quality.write_scatter_csv(os.path.join(cfg.out, "gibbs_scatter.csv"), points)
    print(f"evolved t={trace.t_total:g} ({trace.m} steps); "
          f"quality r={report.pearson_r:.6f}")
    return EXIT_OK


def _initial_state(descriptor: str, h, seed):
    """Initial-state descriptor: hadamard | gibbs:<T> | gauss:<E>:<sigma> |
    basis:<bits> | mps:<path> | circuit:<path>."""
    if descriptor == "hadamard":
        return analytics.DenseState.plus(h.n)
    if descriptor.startswith("gibbs:"):
        T = float(descriptor.split(":")[1])
        return analytics.exact_gibbs(h, 1.0 / T)
    if descriptor.startswith("gauss:"):
        _, e, sigma = descriptor.split(":")
        return analytics.gaussian_state(h, float(e), float(sigma))
    if descriptor.startswith("basis:"):
        bits = descriptor.split(":")[1]
        return analytics.DenseState.basis(h.n, problems.bits_to_index(
            problems._as_bits(bits, h.n)))
    if descriptor.startswith("mps:"):
        return MPS.load(descriptor.split(":", 1)[1]).to_dense()
    if descriptor.startswith("circuit:"):
        with open(descriptor.split(":", 1)[1]) as f:
            return synthesis.StaircaseCircuit.from_json(f.read()).state()
    raise ConfigError(f"unknown initial state {descriptor!r}")


def cmd_qaoa(args) -> int:
    cfg = PipelineConfig.from_args(args)
    _, h = _load_hamiltonian(cfg.instance)
    os.makedirs(cfg.out, exist_ok=True)
    _write_config(cfg, cfg.out)
    psi0 = _initial_state(args.init, h, cfg.seed)
    result = qaoa.optimize(
        psi0, h, cfg.p, optimizer=cfg.optimizer, seed=cfg.seed,
        budget=cfg.budget, initial_state_label=args.init,
    )
    with open(os.path.join(cfg.out, "qaoa_run.json"), "w") as f:
        f.write(result.to_json())
    print(f"best energy {result.best_energy:.6f} after {result.evaluations} evaluations")
    return EXIT_OK


def cmd_diagram(args) -> int:
    cfg = PipelineConfig.from_args(args)
    _, h = _load_hamiltonian(cfg.instance)
    os.makedirs(cfg.out, exist_ok=True)
    _write_config(cfg, cfg.out)
    tmax = max(cfg.t_total, 1.0)
    t_grid = np.concatenate([
        -np.geomspace(tmax, 1e-3, 40), [0.0], np.geomspace(1e-3, tmax, 40)
    ])
    curve = analytics.boltzmann_curve(h, t_grid)
    analytics.write_boltzmann_csv(os.path.join(cfg.out, "boltzmann.csv"), curve)
    points = [
        ("hadamard", analytics.energy_entropy_point(analytics.DenseState.plus(h.n), h)),
        ("gibbs", analytics.energy_entropy_point(
            analytics.exact_gibbs(h, cfg.t_total), h)),
    ]
    analytics.write_diagram_csv(os.path.join(cfg.out, "diagram.csv"), points)
    print(f"wrote {cfg.out}/boltzmann.csv and diagram.csv")
    return EXIT_OK


def cmd_pca(args) -> int:
    cfg = PipelineConfig.from_args(args)
    _, h = _load_hamiltonian(cfg.instance)
    os.makedirs(cfg.out, exist_ok=True)
    _write_config(cfg, cfg.out)
    psi0 = _initial_state(args.init, h, cfg.seed)
    m = expressivity.sweep_p1(psi0, h, resolution=cfg.grid)
    m.write_csv(os.path.join(cfg.out, "distribution_matrix.csv"))
    res = expressivity.pca(m)
    res.write_projection_csv(os.path.join(cfg.out, "projection.csv"))
    area = expressivity.envelope_area(res.projection)
    norm_area = expressivity.normalized_projection_area(res)
    rank = expressivity.significant_rank(res.variances)
    expressivity.write_summary_json(
        os.path.join(cfg.out, "expressivity.json"), area, norm_area, rank
    )
    print(f"envelope area {area:.6g} (normalized {norm_area:.6g}), significant rank {rank}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    mps = MPS.load(args.mps)
    circuit = synthesize_with_flags(mps, args)
    with open(args.out, "w") as f:
        f.write(circuit.to_json(include_kak=args.kak))
    print(f"k={circuit.k} layers, fidelity {circuit.achieved_fidelity:.8f}")
    return EXIT_OK


def synthesize_with_flags(mps, args):
    return synthesis.synthesize(
        mps, k_max=args.k_max, fidelity_target=args.fidelity_target
    )


def cmd_pipeline(args) -> int:
    cfg = PipelineConfig.from_args(args)
    obj, h = _load_hamiltonian(cfg.instance)
    os.makedirs(cfg.out, exist_ok=True)
    _write_config(cfg, cfg.out)
    problems.save_instance(os.path.join(cfg.out, "instance.json"), obj, seed=cfg.seed)

    # stage 1: imaginary-time evolution to the pure Gibbs state
    trace = mpo_evolution.imaginary_time_evolve(
        h, cfg.t_total, cfg.dtau, cfg.chi, order=cfg.order
    )
    trace.write_csv(os.path.join(cfg.out, "evolution.csv"))
    trace.final_mps.save(os.path.join(cfg.out, "mps.json"))
    report, _ = gibbs_quality.quality_with_scatter(
        trace.final_mps, h, cfg.samples, cfg.seed
    )
    with open(os.path.join(cfg.out, "gibbs_report.json"), "w") as f:
        f.write(report.to_json())

    # stage boundary: freeze the state-preparation circuit
    circuit = synthesis.synthesize(
        trace.final_mps, k_max=cfg.k_max, fidelity_target=cfg.fidelity_target
    )
    with open(os.path.join(cfg.out, "circuit.json"), "w") as f:
        f.write(circuit.to_json())

    # stage 2: QAOA from the synthesized state
    psi0 = circuit.state()
    result = qaoa.optimize(
        psi0, h, cfg.p, optimizer=cfg.optimizer, seed=cfg.seed,
        budget=cfg.budget, initial_state_label="synthesized-gibbs",
    )
    with open(os.path.join(cfg.out, "qaoa_run.json"), "w") as f:
        f.write(result.to_json())

    with open(os.path.join(cfg.out, "combined_trace.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["stage", "step", "energy"])
        for k, e in enumerate(trace.energies):
            w.writerow(["tn", k, repr(e)])
        for k, e in result.best_so_far:
            w.writerow(["qaoa", k, repr(float(e))])

    final = qaoa.run(psi0, h, result.best_params)
    probs = analytics.dephase(final)
    top = int(np.argmax(probs))
    print(
        f"tn final energy {trace.energies[-1]:.6f}; "
        f"qaoa best {result.best_energy:.6f}; "
        f"most probable outcome {problems.index_to_bitstring(top, h.n)}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_common(sp, include_init=False):
    sp.add_argument("--config", help="JSON config file; flags override")
    sp.add_argument("--instance", help="instance file (JSON or edge list)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--dtau", type=float)
    sp.add_argument("--t-total", dest="t_total", type=float)
    sp.add_argument("--temperature", type=float)
    sp.add_argument("--chi", type=int)
    sp.add_argument("--order", choices=["I", "II"])
    sp.add_argument("--k-max", dest="k_max", type=int)
    sp.add_argument("--fidelity-target", dest="fidelity_target", type=float)
    sp.add_argument("--p", type=int)
    sp.add_argument("--optimizer", choices=["cobyla", "cmaes"])
    sp.add_argument("--budget", type=int)
    sp.add_argument("--grid", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--out")
    if include_init:
        sp.add_argument("--init", default="hadamard",
                        help="hadamard | gibbs:<T> | gauss:<E>:<sigma> | "
                             "basis:<bits> | mps:<path> | circuit:<path>")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gibbsqaoa",
        description="Gibbs-state preparation, circuit synthesis, and QAOA pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance file")
    g.add_argument("--type", choices=["maxcut", "tsp"], required=True)
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--cities", type=int, default=3)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_gen)

    for name, fn, init in (
        ("gibbs", cmd_gibbs, False),
        ("qaoa", cmd_qaoa, True),
        ("diagram", cmd_diagram, False),
        ("pca", cmd_pca, True),
        ("pipeline", cmd_pipeline, False),
    ):
        sp = sub.add_parser(name)
        _add_common(sp, include_init=init)
        sp.set_defaults(fn=fn)

    d = sub.add_parser("decompose", help="MPS file to staircase circuit")
    d.add_argument("--mps", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--k-max", dest="k_max", type=int, default=4)
    d.add_argument("--fidelity-target", dest="fidelity_target", type=float, default=0.99)
    d.add_argument("--kak", action="store_true", help="include KAK expansions")
    d.set_defaults(fn=cmd_decompose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, problems.InstanceError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        analytics.StateError,
        mpo_evolution.EvolutionError,
        synthesis.SynthesisError,
        expressivity.ExpressivityError,
        qaoa.QaoaError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
