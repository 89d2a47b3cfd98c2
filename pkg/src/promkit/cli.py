"""Command-line interface.

Subcommands:
  run        execute a configured experiment, write JSON record (+ CSV)
  oracle     exact ideal / per-mask / mitigated expectations for a config
  weights    solve mitigation weights for a noise spec
  calibrate  synthesize calibration shots and estimate the syndrome channel
  bench      sweep mitigation strategies on one experiment

Exit codes: 0 ok, 1 usage or schema error, 2 singular channel, 3 size cap.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import config as configmod
from . import experiments, oracle
from .bits import SizeCapError
from .mitigation import (GeneralWeights, SingularChannelError, shot_budget,
                         overhead_bound)
from .readout import GeneralModel, LayeredModel, TensoredModel, UniformModel


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="JSON config file")
    sub.add_argument("--seed", type=int, default=None, help="override config seed")
    sub.add_argument("--shots", type=int, default=None, help="override config shots")
    sub.add_argument("--trials", type=int, default=None, help="override config trials")
    sub.add_argument("--workers", type=int, default=1, help="shot-batch worker threads")
    sub.add_argument("--out", default=None, help="override config output path")


def _load(args: argparse.Namespace) -> dict:
    cfg = configmod.load_config(args.config)
    for key in ("seed", "shots", "trials", "out"):
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    return configmod.validate_config(cfg)


def _emit(payload: dict, out: str | None, rows: list[dict] | None = None) -> None:
    text = configmod.dump_json(payload, out)
    if out is None:
        print(text)
    else:
        print(f"wrote {out}")
        if rows is not None:
            csv_path = configmod.csv_path_for(out)
            configmod.write_csv(rows, csv_path)
            print(f"wrote {csv_path}")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    payload = configmod.run_config(cfg, workers=args.workers)
    _emit(payload, cfg["out"], configmod.record_rows(payload["record"]))
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = _load(args)
    circuit = configmod.build_circuit(cfg["experiment"], cfg["parameters"])
    if cfg["experiment"] == "ghz":
        circuit = replace(circuit, settings=tuple(
            experiments.ghz_stabilizer_settings(circuit.n)))
    noise = configmod.build_noise(cfg["noise"])
    if noise is not None and noise.model is None and noise.matrices is None:
        raise configmod.ConfigError("oracle needs model-style noise (or none)")
    if noise is None or noise.model is None:
        q = np.zeros(1 << circuit.m)
        q[0] = 1.0
    else:
        q = noise.model.expand()
    alpha = GeneralWeights(q).alpha()

    settings_out = []
    for setting in circuit.settings:
        obs = oracle.exact_setting_observables(setting)
        tensor = oracle.exact_trajectory_tensor(circuit, obs)
        entries = []
        for b, (name, _) in enumerate(obs):
            entries.append({
                "observable": name,
                "ideal": tensor.ideal(b),
                "per_mask": [tensor.masked(b, f, q) for f in range(1 << circuit.m)],
                "mitigated": tensor.mitigated(b, q, alpha),
            })
        settings_out.append({"setting": setting.name, "observables": entries})
    payload = {"experiment": cfg["experiment"], "parameters": cfg["parameters"],
               "mid_circuit_bits": circuit.m, "q": q.tolist(),
               "settings": settings_out}
    _emit(payload, cfg["out"])
    return 0


def _noise_spec_of(raw: dict) -> dict:
    return raw["noise"] if "noise" in raw and "kind" not in raw else raw


def _part_entries(model) -> list[dict]:
    if isinstance(model, LayeredModel):
        out = []
        for part in model.parts:
            out.extend(_part_entries(part))
        return out
    if isinstance(model, UniformModel):
        r = model.rate
        return [{"kind": "uniform", "m": model.m, "rate": r,
                 "alpha_bit": [(1 - r) / (1 - 2 * r), -r / (1 - 2 * r)],
                 "xi": abs(1 / (1 - 2 * r)) ** model.m}]
    if isinstance(model, TensoredModel):
        rates = [float(r) for r in model.rates]
        bits = [[(1 - r) / (1 - 2 * r), -r / (1 - 2 * r)] for r in rates]
        return [{"kind": "tensored", "rates": rates, "alpha_bits": bits,
                 "xi": float(np.prod([1 / abs(1 - 2 * r) for r in rates]))}]
    q = model.expand() if hasattr(model, "expand") else np.asarray(model)
    w = GeneralWeights(q)
    return [{"kind": "general", "q": np.asarray(q).tolist(),
             "alpha": w.alpha().tolist(), "xi": w.xi}]


def cmd_weights(args: argparse.Namespace) -> int:
    import json

    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise configmod.ConfigError(f"cannot read {args.config}: {exc}") from exc
    spec = _noise_spec_of(raw)
    noise = configmod.build_noise(spec)
    if noise is None or (noise.model is None and noise.matrices is None):
        raise configmod.ConfigError("weights needs a noise spec with a model")
    if noise.model is not None:
        parts = [noise.model]
    else:
        if not noise.bfa:
            raise configmod.ConfigError("asymmetric noise needs bfa: true")
        parts = [GeneralModel(mat.symmetrize()) for mat in noise.matrices]
    model = parts[0] if len(parts) == 1 else LayeredModel(parts)

    entries = _part_entries(model)
    xi = float(np.prod([e["xi"] for e in entries]))
    eta = model.total_error()
    payload = {"xi": xi, "eta": eta, "parts": entries,
               "overhead_bound": overhead_bound(eta) if eta < 0.5 else None,
               "shots_per_noiseless_shot": shot_budget(xi, 1)}
    _emit(payload, args.out)
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    noise = configmod.build_noise(cfg["noise"])
    if noise is None:
        raise configmod.ConfigError("calibrate needs a noise spec")
    if cfg["experiment"] == "calibration":
        m = int(cfg["parameters"]["m"])
    elif noise.model is not None:
        m = noise.model.m
    else:
        m = sum(mat.m_bits for mat in noise.matrices)
    q_hat = experiments.run_calibration(m, cfg["shots"], noise=noise,
                                        seed=cfg["seed"], workers=args.workers)
    payload = {"m": m, "shots": cfg["shots"], "q_hat": q_hat.tolist(),
               "eta_hat": float(1 - q_hat[0])}
    if noise.model is not None and m <= 16:
        from .readout import total_variation_distance
        q_true = noise.model.expand()
        payload["q_true"] = q_true.tolist()
        payload["tvd"] = total_variation_distance(q_hat, q_true)
    w = GeneralWeights(q_hat)
    payload["xi_hat"] = w.xi
    _emit(payload, cfg["out"])
    return 0


_BENCH_MODES = (
    ("none", "none"),
    ("prom", "prom-layered"),
    ("rep-majority-3", {"mode": "rep", "repeat": 3, "consensus": "majority"}),
    ("rep-unanimous-2", {"mode": "rep", "repeat": 2, "consensus": "unanimous"}),
)


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if cfg["noise"] is None:
        raise configmod.ConfigError("bench needs a noise spec to compare against")
    modes_out, rows = [], []
    for label, mitigation in _BENCH_MODES:
        sub = dict(cfg, mitigation=mitigation, out=None)
        payload = configmod.run_config(sub, workers=args.workers)
        record = payload["record"]
        for row in configmod.record_rows(record):
            rows.append(dict(row, observable=f"{label}:{row['observable']}"))
        modes_out.append({"mitigation": label, "xi": record["xi"],
                          "trials": record["trials"],
                          "wall_time_s": payload["wall_time_s"]})
    payload = {"experiment": cfg["experiment"], "parameters": cfg["parameters"],
               "noise": cfg["noise"], "shots": cfg["shots"], "seed": cfg["seed"],
               "modes": modes_out}
    _emit(payload, cfg["out"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promkit",
        description="Shot-based dynamic-circuit simulator with probabilistic "
                    "readout-error mitigation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, desc in (
            ("run", cmd_run, "execute an experiment config"),
            ("oracle", cmd_oracle, "exact expectations for a config"),
            ("weights", cmd_weights, "solve mitigation weights for a noise spec"),
            ("calibrate", cmd_calibrate, "estimate the syndrome channel from shots"),
            ("bench", cmd_bench, "compare mitigation strategies")):
        sp = sub.add_parser(name, help=desc)
        _common_flags(sp)
        sp.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; remap
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except configmod.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SingularChannelError as exc:
        print(f"error: singular channel: {exc}", file=sys.stderr)
        return 2
    except SizeCapError as exc:
        print(f"error: size cap: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
