"""Command-line entry point: ``varsaw plan|run|sweep|compare``.

Configuration is a flat JSON object (``--config``); every key can be
overridden by the command-line flag of the same name (underscores become
dashes). Exit codes: 0 success, 2 usage/config, 3 input data, 4 resource
limits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from ._validation import check_hamiltonian
from .pauli import HamiltonianFormatError, random_hamiltonian, synthetic_term_count
from .planner import GENERATORS, cost_report, varsaw_plan
from .simulator import ENTANGLEMENTS, MAX_QUBITS, SIM_MODES, AnsatzSpec, NoiseModel, QubitLimitError
from .vqe import DEFAULT_INIT_SCALE, MODES, SPARSITY_POLICIES, Problem, SpsaConfig, run_vqa

logger = logging.getLogger("varsaw")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_RESOURCE = 0, 2, 3, 4

DEFAULTS = {
    "hamiltonian": "tfim:4:1.0:1.0",
    "mode": "varsaw",
    "seed": 0,
    "reps": 2,
    "entanglement": "full",
    "subset_size": 2,
    "generator": "sliding",
    "sparsity": "adaptive",
    "k_init": 2,
    "k_min": 1,
    "k_max": 128,
    "p01": 0.04,
    "p10": 0.04,
    "chi": 0.26,
    "scale": 1.0,
    "shots": 8192,
    "sim_mode": "analytic",
    "budget_circuits": None,
    "budget_iters": 100,
    "spsa_a": None,
    "spsa_c": 0.1,
    "spsa_alpha": 0.602,
    "spsa_gamma": 0.101,
    "spsa_target_step": SpsaConfig.target_step,
    "spsa_stability": SpsaConfig.stability,
    "init_scale": DEFAULT_INIT_SCALE,
    "passes": 1,
    "global_fraction": 0.01,
    "out": None,
    "axis": None,
    "values": None,
}

_TYPES = {
    "hamiltonian": str,
    "mode": str,
    "seed": int,
    "reps": int,
    "entanglement": str,
    "subset_size": int,
    "generator": str,
    "sparsity": str,
    "k_init": int,
    "k_min": int,
    "k_max": int,
    "p01": float,
    "p10": float,
    "chi": float,
    "scale": float,
    "shots": int,
    "sim_mode": str,
    "budget_circuits": int,
    "budget_iters": int,
    "spsa_a": float,
    "spsa_c": float,
    "spsa_alpha": float,
    "spsa_gamma": float,
    "spsa_target_step": float,
    "spsa_stability": float,
    "init_scale": float,
    "passes": int,
    "global_fraction": float,
    "out": str,
    "axis": str,
}

_CHOICES = {
    "mode": MODES,
    "entanglement": ENTANGLEMENTS,
    "generator": GENERATORS,
    "sparsity": SPARSITY_POLICIES,
    "sim_mode": SIM_MODES,
    "axis": ("noise_scale", "subset_size", "Q"),
}

COMPARE_MODES = ("ideal", "baseline", "jigsaw", "varsaw")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varsaw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("plan", "run", "sweep", "compare"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("-v", "--verbose", action="store_true")
        for key, typ in _TYPES.items():
            flag = "--" + key.replace("_", "-")
            kwargs = {"dest": key, "default": None, "type": typ}
            if key in _CHOICES:
                kwargs["choices"] = _CHOICES[key]
            p.add_argument(flag, **kwargs)
        p.add_argument("--values", dest="values", default=None, type=_float_list,
                       help="comma-separated sweep grid")
    return parser


def load_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc.strerror}", EXIT_USAGE) from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"config {args.config} is not valid JSON: {exc}", EXIT_USAGE) from exc
        if not isinstance(data, dict):
            raise CliError("config must be a JSON object", EXIT_USAGE)
        unknown = sorted(set(data) - set(DEFAULTS))
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(unknown)}", EXIT_USAGE)
        cfg.update(data)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    for key, typ in _TYPES.items():
        val = cfg[key]
        if val is None:
            continue
        if typ is float and isinstance(val, int) and not isinstance(val, bool):
            cfg[key] = val = float(val)
        if not isinstance(val, typ) or isinstance(val, bool):
            raise CliError(f"config key {key!r} must be {typ.__name__}, got {val!r}", EXIT_USAGE)
        if key in _CHOICES and val not in _CHOICES[key]:
            raise CliError(f"config key {key!r} must be one of {_CHOICES[key]}, got {val!r}", EXIT_USAGE)
    if cfg["budget_circuits"] is not None and cfg["budget_circuits"] < 0:
        raise CliError("budget_circuits must be >= 0", EXIT_USAGE)
    if cfg["budget_iters"] is not None and cfg["budget_iters"] < 0:
        raise CliError("budget_iters must be >= 0", EXIT_USAGE)
    if cfg["subset_size"] < 1:
        raise CliError("subset_size must be >= 1", EXIT_USAGE)
    try:
        NoiseModel(cfg["p01"], cfg["p10"], cfg["chi"], cfg["scale"])
        SpsaConfig(a=cfg["spsa_a"], c=cfg["spsa_c"], alpha=cfg["spsa_alpha"], gamma=cfg["spsa_gamma"])
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    if not 0 <= cfg["global_fraction"] <= 1:
        raise CliError("global_fraction must lie in [0, 1]", EXIT_USAGE)
    if not 1 <= cfg["k_min"] <= cfg["k_init"] <= cfg["k_max"]:
        raise CliError("need 1 <= k_min <= k_init <= k_max", EXIT_USAGE)


def load_hamiltonian(cfg: dict):
    try:
        return check_hamiltonian(cfg["hamiltonian"])
    except OSError as exc:
        raise CliError(f"cannot read Hamiltonian {cfg['hamiltonian']}: {exc.strerror}", EXIT_USAGE) from exc
    except (HamiltonianFormatError, ValueError, TypeError) as exc:
        raise CliError(f"malformed Hamiltonian: {exc}", EXIT_INPUT) from exc


def _budget(cfg: dict) -> dict:
    if cfg["budget_circuits"] is not None:
        return {"max_circuits": cfg["budget_circuits"]}
    return {"max_iterations": cfg["budget_iters"]}


def _problem(cfg: dict, hamiltonian, subset_size=None) -> Problem:
    if hamiltonian.num_qubits > MAX_QUBITS:
        raise CliError(f"{hamiltonian.num_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}", EXIT_RESOURCE)
    try:
        ansatz = AnsatzSpec(hamiltonian.num_qubits, cfg["reps"], cfg["entanglement"])
    except QubitLimitError as exc:
        raise CliError(str(exc), EXIT_RESOURCE) from exc
    return Problem.build(hamiltonian, ansatz, subset_size or cfg["subset_size"], cfg["generator"])


def _run(cfg: dict, problem: Problem, mode: str, scale: float | None = None):
    noise = NoiseModel(cfg["p01"], cfg["p10"], cfg["chi"], cfg["scale"] if scale is None else scale)
    spsa = SpsaConfig(
        a=cfg["spsa_a"],
        c=cfg["spsa_c"],
        alpha=cfg["spsa_alpha"],
        gamma=cfg["spsa_gamma"],
        seed=cfg["seed"],
        target_step=cfg["spsa_target_step"],
        stability=cfg["spsa_stability"],
    )
    return run_vqa(
        problem,
        mode,
        spsa=spsa,
        noise=noise,
        seed=cfg["seed"],
        sparsity=cfg["sparsity"],
        k_init=cfg["k_init"],
        k_min=cfg["k_min"],
        k_max=cfg["k_max"],
        sim_mode=cfg["sim_mode"],
        shots=cfg["shots"],
        passes=cfg["passes"],
        init_scale=cfg["init_scale"],
        **_budget(cfg),
    )


def _write(out: str | None, name: str, text: str) -> None:
    if out is None:
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_plan(cfg: dict) -> int:
    h = load_hamiltonian(cfg)
    plan = varsaw_plan(h, cfg["subset_size"], cfg["generator"])
    jig = plan.jigsaw_subsets()
    report = cost_report(plan, len(jig), cfg["global_fraction"])
    doc = plan.to_dict()
    doc["jigsaw_subset_count"] = len(jig)
    doc["cost"] = report.to_dict()
    text = json.dumps(doc, indent=2) + "\n"
    _write(cfg["out"], "plan.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_run(cfg: dict) -> int:
    h = load_hamiltonian(cfg)
    trace = _run(cfg, _problem(cfg, h), cfg["mode"])
    _write(cfg["out"], "trace.csv", trace.to_csv())
    _write(cfg["out"], "summary.json", json.dumps(trace.summary(), indent=2) + "\n")
    print(f"final energy {trace.final_energy!r}  total circuits {trace.total_circuits}")
    return EXIT_OK


def cmd_compare(cfg: dict) -> int:
    h = load_hamiltonian(cfg)
    problem = _problem(cfg, h)
    rows = []
    for mode in COMPARE_MODES:
        if mode == "ideal":
            trace = _run(cfg, problem, "baseline", scale=0.0)
        else:
            trace = _run(cfg, problem, mode)
        _write(cfg["out"], f"trace_{mode}.csv", trace.to_csv())
        s = trace.summary()
        rows.append([mode, s["final_energy"], s["best_energy"], s["final_exact_energy"],
                     s["total_circuits"], s["iterations_completed"]])
    text = _csv(
        ["mode", "final_energy", "best_energy", "final_exact_energy", "total_circuits", "iterations"], rows
    )
    _write(cfg["out"], "compare.csv", text)
    sys.stdout.write(text)
    return EXIT_OK


def sweep_cost(qs, subset_size=2, global_fraction=0.01, seed=0, generator="sliding"):
    """Rows ``(Q, P, baseline, jigsaw, varsaw_subsets, varsaw_amortized)`` on synthetic Hamiltonians."""
    rows = []
    for q in qs:
        h = random_hamiltonian(q, synthetic_term_count(q), seed)
        plan = varsaw_plan(h, subset_size, generator)
        r = cost_report(plan, None, global_fraction)
        rows.append([q, len(h), r.baseline_per_iter, r.jigsaw_per_iter, r.varsaw_subsets_per_iter, r.varsaw_amortized])
    return rows


def cmd_sweep(cfg: dict) -> int:
    axis, values = cfg["axis"], cfg["values"]
    if axis is None:
        raise CliError("sweep needs --axis", EXIT_USAGE)
    if not values:
        raise CliError("sweep grid is empty", EXIT_USAGE)
    if axis == "Q":
        qs = [int(v) for v in values]
        text = _csv(
            ["Q", "P", "baseline", "jigsaw", "varsaw_subsets", "varsaw_amortized"],
            sweep_cost(qs, cfg["subset_size"], cfg["global_fraction"], cfg["seed"], cfg["generator"]),
        )
    elif axis == "subset_size":
        h = load_hamiltonian(cfg)
        rows = []
        for m in (int(v) for v in values):
            if not 1 <= m <= h.num_qubits:
                raise CliError(f"subset size {m} outside 1..{h.num_qubits}", EXIT_USAGE)
            plan = varsaw_plan(h, m, cfg["generator"])
            r = cost_report(plan, None, cfg["global_fraction"])
            rows.append([m, r.baseline_per_iter, r.jigsaw_per_iter, r.varsaw_subsets_per_iter, r.varsaw_amortized])
        text = _csv(["subset_size", "baseline", "jigsaw", "varsaw_subsets", "varsaw_amortized"], rows)
    else:
        h = load_hamiltonian(cfg)
        problem = _problem(cfg, h)
        rows = []
        for scale in values:
            traces = {mode: _run(cfg, problem, mode, scale=scale) for mode in MODES}
            rows.append(
                [scale]
                + [traces[m].final_energy for m in MODES]
                + [traces[m].final_exact_energy for m in MODES]
                + [traces[m].total_circuits for m in MODES]
            )
        header = (
            ["noise_scale"]
            + list(MODES)
            + [f"{m}_exact" for m in MODES]
            + [f"{m}_circuits" for m in MODES]
        )
        text = _csv(header, rows)
    _write(cfg["out"], f"sweep_{axis}.csv", text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"plan": cmd_plan, "run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except CliError as exc:
        print(f"varsaw: error: {exc}", file=sys.stderr)
        return exc.code
    except QubitLimitError as exc:
        print(f"varsaw: error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
