"""JSON run configuration and result records.

A config names an experiment, its parameters, the injected readout noise,
the mitigation mode, and the shot plan.  Records echo the config and carry
per-observable estimates; re-running the same config + seed reproduces the
``record`` object byte for byte (wall time lives outside it).
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import replace

import numpy as np

from . import experiments
from .circuits import (DynamicCircuit, FeedforwardLayer, Gate, PauliString,
                       TerminalSetting, ZeroProjector, cx, h, rx, ry, rz, s,
                       sdg, x, y, z)
from .mitigation import (GeneralWeights, LayeredWeights, MitigationWeights,
                         TensoredWeights, UniformWeights, solve_weights)
from .readout import (ConfusionMatrix, GeneralModel, LayeredModel,
                      SyndromeModel, TensoredModel, UniformModel)
from .simulator import NoiseInjector, estimate_observables, run_shots


class ConfigError(ValueError):
    """The configuration violates the schema."""


_TOP_KEYS = {"experiment", "parameters", "noise", "mitigation", "terminal_rem",
             "shots", "trials", "seed", "out"}
_DEFAULTS = {"parameters": {}, "noise": None, "mitigation": "none",
             "terminal_rem": False, "shots": 10000, "trials": 1, "seed": 0,
             "out": None}


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return validate_config(raw)


def validate_config(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "experiment" not in raw:
        raise ConfigError("config needs an 'experiment'")
    cfg = dict(_DEFAULTS)
    cfg.update(raw)
    if not isinstance(cfg["experiment"], str):
        raise ConfigError("'experiment' must be a string")
    if not isinstance(cfg["parameters"], dict):
        raise ConfigError("'parameters' must be an object")
    for key in ("shots", "trials", "seed"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool) or cfg[key] < 0:
            raise ConfigError(f"'{key}' must be a non-negative integer")
    if cfg["shots"] < 1 or cfg["trials"] < 1:
        raise ConfigError("'shots' and 'trials' must be at least 1")
    if not isinstance(cfg["terminal_rem"], bool):
        raise ConfigError("'terminal_rem' must be true or false")
    if cfg["out"] is not None and not isinstance(cfg["out"], str):
        raise ConfigError("'out' must be a path string")
    # normalized below by build_* functions; validate eagerly so errors
    # surface before any shots run
    build_circuit(cfg["experiment"], cfg["parameters"])
    build_noise(cfg["noise"])
    _validate_mitigation(cfg["mitigation"])
    return cfg


# ---------------------------------------------------------------------------
# circuits

def _param(params: dict, key: str, default=None, required: bool = False):
    if required and key not in params:
        raise ConfigError(f"experiment parameter '{key}' is required")
    return params.get(key, default)


def build_circuit(experiment: str, parameters: dict) -> DynamicCircuit:
    """Instantiate the named experiment; 'custom' loads a circuit file."""
    try:
        if experiment == "reset":
            return experiments.build_reset_circuit(int(_param(parameters, "n", 1)))
        if experiment == "ghz":
            return experiments.build_ghz_circuit(int(_param(parameters, "b", required=True)),
                                                 int(_param(parameters, "p", required=True)))
        if experiment == "ghz-unitary":
            return experiments.build_unitary_ghz(int(_param(parameters, "n", required=True)))
        if experiment == "teleport":
            return experiments.build_teleport_circuit(
                int(_param(parameters, "k", required=True)),
                float(_param(parameters, "phi_x", np.pi / 8)),
                float(_param(parameters, "phi_z", 3 * np.pi / 8)))
        if experiment == "transport":
            return experiments.build_unitary_transport(
                int(_param(parameters, "k", required=True)),
                float(_param(parameters, "phi_x", np.pi / 8)),
                float(_param(parameters, "phi_z", 3 * np.pi / 8)))
        if experiment == "calibration":
            return experiments.build_calibration_circuit(int(_param(parameters, "m", required=True)))
        if experiment == "custom":
            return load_circuit_file(_param(parameters, "path", required=True))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for '{experiment}': {exc}") from exc
    raise ConfigError(f"unknown experiment '{experiment}'")


_FIXED_GATES = {"h": h, "x": x, "y": y, "z": z, "s": s, "sdg": sdg}
_ROTATIONS = {"rx": rx, "ry": ry, "rz": rz}


def _parse_gate(item) -> Gate:
    if not isinstance(item, list) or not item or not isinstance(item[0], str):
        raise ConfigError(f"bad gate entry {item!r}")
    name, *args = item
    try:
        if name in _FIXED_GATES and len(args) == 1:
            return _FIXED_GATES[name](int(args[0]))
        if name in _ROTATIONS and len(args) == 2:
            return _ROTATIONS[name](float(args[0]), int(args[1]))
        if name == "cx" and len(args) == 2:
            return cx(int(args[0]), int(args[1]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad gate entry {item!r}: {exc}") from exc
    raise ConfigError(f"bad gate entry {item!r}")


def _parse_gates(items) -> tuple[Gate, ...]:
    return tuple(_parse_gate(g) for g in (items or []))


def _parse_observable(spec: dict):
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError(f"bad observable {spec!r}")
    if "pauli" in spec:
        qubits = spec.get("qubits")
        ob = PauliString(spec["pauli"],
                         tuple(qubits) if qubits is not None else None,
                         int(spec.get("sign", 1)))
    elif "zeros" in spec:
        ob = ZeroProjector(tuple(spec["zeros"]))
    else:
        raise ConfigError(f"observable {spec!r} needs 'pauli' or 'zeros'")
    return str(spec["name"]), ob


def load_circuit_file(path: str) -> DynamicCircuit:
    """Custom circuit description: gates as [name, args...], feedforward
    tables as lists of gate lists, settings with Pauli/projector observables."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read circuit file {path}: {exc}") from exc
    if not isinstance(raw, dict) or "n" not in raw:
        raise ConfigError("circuit file needs a qubit count 'n'")
    try:
        layers = []
        for spec in raw.get("layers", []):
            layers.append(FeedforwardLayer(
                measured=tuple(spec["measured"]),
                table=tuple(_parse_gates(entry) for entry in spec["table"]),
                pre_gates=_parse_gates(spec.get("pre")),
                post_gates=_parse_gates(spec.get("post")),
                repeat=int(spec.get("repeat", 1)),
                consensus=spec.get("consensus", "none")))
        settings = []
        for spec in raw.get("settings", []):
            settings.append(TerminalSetting(
                name=str(spec["name"]),
                measured=tuple(spec["measured"]),
                observables=tuple(_parse_observable(ob) for ob in spec.get("observables", [])),
                basis_gates=_parse_gates(spec.get("basis"))))
        return DynamicCircuit(n=int(raw["n"]), prep=_parse_gates(raw.get("prep")),
                              layers=tuple(layers), settings=tuple(settings))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad circuit file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# noise

def _build_model(spec: dict) -> SyndromeModel:
    kind = spec.get("kind")
    if kind == "uniform":
        return UniformModel(int(spec["m"]), float(spec["rate"]))
    if kind == "tensored":
        return TensoredModel([float(r) for r in spec["rates"]])
    if kind == "layered":
        return LayeredModel([_build_model(p) for p in spec["parts"]])
    if kind == "general":
        return GeneralModel(np.asarray(spec["q"], dtype=np.float64))
    raise ConfigError(f"unknown noise model kind {kind!r}")


def build_noise(spec: dict | None) -> NoiseInjector | None:
    """Noise spec: a model kind, or 'asymmetric' with per-layer confusion
    matrices (optionally bit-flip averaged); 'terminal' adds a terminal
    readout channel."""
    if spec is None:
        return None
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("noise spec must be an object with a 'kind'")
    spec = dict(spec)
    terminal_spec = spec.pop("terminal", None)
    terminal = _build_model(terminal_spec) if terminal_spec is not None else None
    try:
        if spec["kind"] == "asymmetric":
            matrices = [ConfusionMatrix(np.asarray(mat, dtype=np.float64))
                        for mat in spec["matrices"]]
            return NoiseInjector(matrices=matrices, bfa=bool(spec.get("bfa", True)),
                                 terminal=terminal)
        return NoiseInjector(model=_build_model(spec), terminal=terminal)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad noise spec: {exc}") from exc


# ---------------------------------------------------------------------------
# mitigation

_PROM_MODES = ("prom-general", "prom-tensored", "prom-layered")


def _validate_mitigation(spec) -> dict:
    if isinstance(spec, str):
        spec = {"mode": spec}
    if not isinstance(spec, dict) or "mode" not in spec:
        raise ConfigError("mitigation must be a mode string or object with 'mode'")
    mode = spec["mode"]
    if mode in ("none",) + _PROM_MODES:
        return spec
    if mode == "rep":
        repeat = spec.get("repeat")
        consensus = spec.get("consensus")
        if not isinstance(repeat, int) or repeat < 2:
            raise ConfigError("rep mitigation needs an integer 'repeat' >= 2")
        if consensus not in ("majority", "unanimous"):
            raise ConfigError("rep 'consensus' must be majority or unanimous")
        if consensus == "majority" and repeat % 2 == 0:
            raise ConfigError("majority vote needs an odd 'repeat'")
        return spec
    raise ConfigError(f"unknown mitigation mode {mode!r}")


def _symmetrized_parts(noise: NoiseInjector) -> list[SyndromeModel]:
    if noise.model is not None:
        if isinstance(noise.model, LayeredModel):
            return list(noise.model.parts)
        return [noise.model]
    if noise.matrices is not None:
        if not noise.bfa:
            raise ConfigError("prom mitigation of asymmetric noise requires "
                              "bit-flip averaging (bfa: true)")
        return [GeneralModel(mat.symmetrize()) for mat in noise.matrices]
    raise ConfigError("prom mitigation needs a noise model to invert")


def build_mitigation(spec, circuit: DynamicCircuit,
                     noise: NoiseInjector | None
                     ) -> tuple[DynamicCircuit, MitigationWeights | None]:
    """Resolve the mitigation mode: weights for prom-*, modified circuit for rep."""
    spec = _validate_mitigation(spec)
    mode = spec["mode"]
    if mode == "none":
        return circuit, None
    if mode == "rep":
        return experiments.apply_rep_strategy(circuit, spec["repeat"], spec["consensus"]), None
    if noise is None:
        raise ConfigError("prom mitigation needs a noise spec")
    parts = _symmetrized_parts(noise)
    layered = LayeredWeights([solve_weights(p) for p in parts])
    if mode == "prom-layered":
        return circuit, layered
    if mode == "prom-general":
        joint = parts[0] if len(parts) == 1 else LayeredModel(parts)
        return circuit, GeneralWeights(joint.expand())
    # prom-tensored: every part must factor over bits
    factors: list[float] = []
    for part in parts:
        if isinstance(part, UniformModel):
            factors.extend([part.rate] * part.m)
        elif isinstance(part, TensoredModel):
            factors.extend(float(r) for r in part.rates)
        else:
            raise ConfigError("prom-tensored needs uniform or per-bit noise")
    return circuit, TensoredWeights(factors)


# ---------------------------------------------------------------------------
# running

def _setting_trial_stream(trial: int, index: int, n_settings: int) -> int:
    # distinct RNG stream per (trial, setting), stable under worker count
    return trial * n_settings + index


def run_config(cfg: dict, workers: int = 1) -> dict:
    """Execute trials x settings x shots and assemble the result record."""
    from . import __version__

    started = time.perf_counter()
    circuit = build_circuit(cfg["experiment"], cfg["parameters"])
    noise = build_noise(cfg["noise"])
    circuit, weights = build_mitigation(cfg["mitigation"], circuit, noise)
    if cfg["experiment"] == "ghz":
        circuit = replace(circuit, settings=tuple(
            experiments.ghz_stabilizer_settings(circuit.n)))
    if not circuit.settings:
        raise ConfigError(f"experiment '{cfg['experiment']}' defines no "
                          "terminal settings to estimate")
    terminal_q = None
    if cfg["terminal_rem"]:
        if noise is None or noise.terminal is None:
            raise ConfigError("terminal_rem needs noise with a 'terminal' channel")
        terminal_q = noise.terminal.expand()

    trials = []
    for trial in range(cfg["trials"]):
        per_setting = []
        ghz_results, ghz_values = [], []
        for index, setting in enumerate(circuit.settings):
            result = run_shots(circuit, setting, cfg["shots"], noise=noise,
                               weights=weights, seed=cfg["seed"],
                               trial=_setting_trial_stream(trial, index, len(circuit.settings)),
                               workers=workers)
            estimates = estimate_observables(result, terminal_q=terminal_q)
            per_setting.append({
                "setting": setting.name,
                "shots": result.shots,
                "accepted": result.accepted,
                "discarded": result.discarded,
                "estimates": [{"observable": e.name,
                               "estimate": e.estimate,
                               "stderr": e.stderr} for e in estimates],
            })
            if cfg["experiment"] == "ghz":
                ghz_results.append(result)
                ghz_values.append(np.sum([vals for _, vals in setting.value_table()],
                                         axis=0))
        entry = {"trial": trial, "settings": per_setting}
        if cfg["experiment"] == "ghz":
            from .simulator import aggregate_estimate
            f_est, f_err = aggregate_estimate(ghz_results, ghz_values,
                                              scale=2.0 ** -circuit.n)
            entry["derived"] = {"fidelity": f_est, "fidelity_stderr": f_err}
        trials.append(entry)

    record = {
        "version": __version__,
        "config": {k: cfg[k] for k in sorted(_TOP_KEYS)},
        "circuit": {"n": circuit.n,
                    "mid_circuit_bits": circuit.m,
                    "cx_count": circuit.cx_count(),
                    "measurement_count": circuit.measurement_count(),
                    "two_qubit_depth": circuit.two_qubit_depth()},
        "xi": weights.xi if weights is not None else 1.0,
        "trials": trials,
    }
    return {"record": record, "wall_time_s": time.perf_counter() - started}


# ---------------------------------------------------------------------------
# persistence

CSV_COLUMNS = ("trial", "observable", "estimate", "stderr", "xi",
               "shots_accepted", "shots_discarded")


def record_rows(record: dict) -> list[dict]:
    """Flatten a record into stable per-trial CSV rows."""
    rows = []
    for entry in record["trials"]:
        for per_setting in entry["settings"]:
            for est in per_setting["estimates"]:
                rows.append({"trial": entry["trial"],
                             "observable": est["observable"],
                             "estimate": est["estimate"],
                             "stderr": est["stderr"],
                             "xi": record["xi"],
                             "shots_accepted": per_setting["accepted"],
                             "shots_discarded": per_setting["discarded"]})
        if "derived" in entry:
            rows.append({"trial": entry["trial"],
                         "observable": "fidelity",
                         "estimate": entry["derived"]["fidelity"],
                         "stderr": entry["derived"]["fidelity_stderr"],
                         "xi": record["xi"],
                         "shots_accepted": sum(s["accepted"] for s in entry["settings"]),
                         "shots_discarded": sum(s["discarded"] for s in entry["settings"])})
    return rows


def dump_json(payload: dict, path: str | None) -> str:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def csv_path_for(out: str) -> str:
    return out[:-5] + ".csv" if out.endswith(".json") else out + ".csv"


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
