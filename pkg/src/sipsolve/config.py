"""Experiment configuration: JSON documents, defaults, dotted overrides.

A run is described by a single flat JSON document (see README for the
schema).  Defaults are filled per experiment; a config file overlays them and
``--set key.path=value`` flags overlay the file.  A run manifest embeds the
fully resolved document under ``"config"`` and is itself accepted wherever a
config file is, which makes reruns bit-reproducible.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .learners import LearnerSpec, parse_learner
from .solvers import FixedInvSqrtN, InverseSqrt, StepSchedule
from .synthgen import DeconvGenConfig, FlrGenConfig, TargetKind


class ConfigError(Exception):
    """Invalid configuration; maps to CLI exit code 2."""


EXPERIMENTS = ("flr", "flr-step", "flr-classify", "deconv", "check")

_FLR_GENERATOR = {
    "n_samples": 3000,
    "fine_n": 1000,
    "obs_n": 100,
    "nsr": 0.2,
    "target": "sine",
}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "flr": {
        "methods": ["sgd", "mlsgd", "landweber"],
        "n_replicates": 10,
        "eval_n": 20000,
        "master_seed": 20260810,
        "output_dir": "runs/flr",
        "jobs": 1,
        "d_diameter": 2.0,
        "generator": dict(_FLR_GENERATOR),
        "solver": {
            "sgd": {"schedule": "fixed", "eta": 40.0, "batch": False, "iterations": 200},
            "mlsgd": {"schedule": "fixed", "eta": 40.0, "batch": False,
                      "iterations": 200, "learner": "spline:df=10"},
            "landweber": {"eta": 50.0, "iterations": 200},
        },
    },
    "flr-classify": {
        "methods": ["sgd", "mlsgd"],
        "n_replicates": 1,
        "cv_folds": 3,
        "master_seed": 20260810,
        "output_dir": "runs/flr-classify",
        "jobs": 1,
        "generator": dict(_FLR_GENERATOR),
        "solver": {
            "sgd": {"schedule": "invsqrt", "eta": 5.0, "batch": False, "iterations": 200},
            "mlsgd": {"schedule": "invsqrt", "eta": 5.0, "batch": False,
                      "iterations": 200, "learner": "spline:df=10"},
        },
    },
    "deconv": {
        "methods": ["sgd", "mlsgd", "landweber"],
        "n_replicates": 10,
        "master_seed": 20260810,
        "output_dir": "runs/deconv",
        "jobs": 1,
        "d_diameter": 2.0,
        "generator": {
            "n_samples": None,
            "fine_spacing": 0.01,
            "obs_spacing": 0.1,
            "noise_sd": 1.4142135623730951,
        },
        "solver": {
            "sgd": {"schedule": "fixed", "eta": 0.5, "batch": False, "iterations": 200},
            "mlsgd": {"schedule": "fixed", "eta": 0.5, "batch": False,
                      "iterations": 200, "learner": "spline:df=5"},
            "landweber": {"eta": 0.5, "iterations": 200},
        },
    },
    "check": {
        "master_seed": 20260810,
        "output_dir": "runs/check",
        "jobs": 1,
        "check": {
            "adjoint_triples": 50,
            "unbias_m": 50000,
            "unbias_oracle_m": 500000,
            "dd_samples": 5000,
            "dd_directions": 10,
            "dd_delta": 1e-4,
            "bound_replicates": 20,
            "bound_n": 1000,
            "bound_eta": 20.0,
            "bound_eval_n": 20000,
            "bound_d": 2.0,
        },
    },
}
_DEFAULTS["flr-step"] = copy.deepcopy(_DEFAULTS["flr"])
_DEFAULTS["flr-step"]["generator"]["target"] = "step"
_DEFAULTS["flr-step"]["output_dir"] = "runs/flr-step"


@dataclass(frozen=True)
class SolverSettings:
    """One method's solver knobs, resolved into schedules at run time."""

    schedule_kind: str  # "fixed" | "invsqrt"
    eta: float
    batch: bool = False
    iterations: int | None = None
    learner: LearnerSpec | None = None

    def schedule(self, n_stream: int) -> StepSchedule:
        if self.schedule_kind == "invsqrt":
            return InverseSqrt(self.eta)
        n = self.iterations if self.batch else n_stream
        return FixedInvSqrtN(self.eta, n)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    raw: dict[str, Any] = field(repr=False)

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown experiment {self.experiment!r}")

    @property
    def methods(self) -> list[str]:
        return list(self.raw.get("methods", []))

    @property
    def n_replicates(self) -> int:
        return int(self.raw.get("n_replicates", 1))

    @property
    def eval_n(self) -> int:
        return int(self.raw.get("eval_n", 20000))

    @property
    def master_seed(self) -> int:
        return int(self.raw["master_seed"])

    @property
    def output_dir(self) -> Path:
        return Path(self.raw["output_dir"])

    @property
    def jobs(self) -> int:
        return int(self.raw.get("jobs", 1))

    @property
    def d_diameter(self) -> float:
        return float(self.raw.get("d_diameter", 2.0))

    @property
    def cv_folds(self) -> int:
        return int(self.raw.get("cv_folds", 3))

    @property
    def check_sizes(self) -> dict[str, Any]:
        return dict(self.raw.get("check", {}))

    def generator_config(self, seed: int):
        gen = self.raw["generator"]
        try:
            if self.experiment == "deconv":
                return DeconvGenConfig(
                    n_samples=gen.get("n_samples"),
                    fine_spacing=float(gen["fine_spacing"]),
                    obs_spacing=float(gen["obs_spacing"]),
                    noise_sd=float(gen["noise_sd"]),
                    seed=seed,
                )
            return FlrGenConfig(
                n_samples=int(gen["n_samples"]),
                fine_n=int(gen["fine_n"]),
                obs_n=int(gen["obs_n"]),
                nsr=float(gen["nsr"]),
                target=TargetKind.parse(gen["target"]),
                seed=seed,
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"generator: {exc}") from exc

    def solver_settings(self, method: str) -> SolverSettings:
        try:
            raw = self.raw["solver"][method]
        except KeyError:
            raise ConfigError(f"solver.{method}: missing settings") from None
        try:
            learner = parse_learner(str(raw.get("learner", "none")))
            return SolverSettings(
                schedule_kind=str(raw.get("schedule", "fixed")),
                eta=float(raw["eta"]),
                batch=bool(raw.get("batch", False)),
                iterations=(None if raw.get("iterations") is None
                            else int(raw["iterations"])),
                learner=learner,
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"solver.{method}: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        doc = copy.deepcopy(self.raw)
        doc["experiment"] = self.experiment
        return doc


def _merge(base: dict, overlay: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        here = f"{path}.{key}" if path else key
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value, here)
        else:
            out[key] = copy.deepcopy(value)
    return out


def apply_set_override(doc: dict, assignment: str) -> None:
    """Apply one ``key.path=value`` override; values parse as JSON, else string."""
    key, sep, value = assignment.partition("=")
    if not sep or not key:
        raise ConfigError(f"--set needs key=value, got {assignment!r}")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    node = doc
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[parts[-1]] = parsed


def _validate(experiment: str, doc: dict) -> None:
    if experiment != "check":
        methods = doc.get("methods")
        if not isinstance(methods, list) or not methods:
            raise ConfigError("methods: need a nonempty list")
        for m in methods:
            if m not in ("sgd", "mlsgd", "landweber"):
                raise ConfigError(f"methods: unknown method {m!r}")
        if experiment == "flr-classify" and "landweber" in methods:
            raise ConfigError(
                "methods: landweber needs squared loss and cannot run flr-classify"
            )
        if int(doc.get("n_replicates", 1)) < 1:
            raise ConfigError("n_replicates: must be >= 1")
        if "mlsgd" in methods:
            learner = doc["solver"].get("mlsgd", {}).get("learner", "none")
            if parse_learner(str(learner)) is None:
                raise ConfigError("solver.mlsgd.learner: mlsgd needs a learner")
    else:
        sizes = doc.get("check", {})
        for key, value in sizes.items():
            if isinstance(value, (int, float)) and value <= 0:
                raise ConfigError(f"check.{key}: must be positive, got {value}")
    if int(doc.get("jobs", 1)) < 1:
        raise ConfigError("jobs: must be >= 1")


def load_config(
    experiment: str,
    config_path: str | Path | None = None,
    set_overrides: list[str] | None = None,
    out_dir: str | None = None,
    seed: int | None = None,
    replicates: int | None = None,
    jobs: int | None = None,
) -> ExperimentConfig:
    """Resolve defaults, optional config/manifest file, and flag overrides."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {experiment!r}")
    doc = copy.deepcopy(_DEFAULTS[experiment])
    doc["experiment"] = experiment
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config {config_path} is not valid JSON (line {exc.lineno}, "
                f"column {exc.colno}): {exc.msg}"
            ) from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {config_path} must be a JSON object")
        if "config" in loaded and isinstance(loaded["config"], dict):
            loaded = loaded["config"]  # a manifest was passed
        file_exp = loaded.get("experiment")
        if file_exp is not None and file_exp != experiment:
            raise ConfigError(
                f"experiment: config file is for {file_exp!r}, not {experiment!r}"
            )
        doc = _merge(doc, loaded)
    for assignment in set_overrides or []:
        apply_set_override(doc, assignment)
    if out_dir is not None:
        doc["output_dir"] = out_dir
    if seed is not None:
        doc["master_seed"] = seed
    if replicates is not None:
        doc["n_replicates"] = replicates
    if jobs is not None:
        doc["jobs"] = jobs
    doc["experiment"] = experiment
    try:
        _validate(experiment, doc)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(experiment=experiment, raw=doc)
