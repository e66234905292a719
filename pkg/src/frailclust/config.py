"""Nested key-value configuration for the CLI.

Files are YAML mappings with the sections model, convergence, io, simulate,
benchmark, scan (all optional; see README for the full grammar).  Values are
validated and coerced here so every downstream consumer sees clean types;
scientific-notation scalars like 1e-6 are accepted whether YAML parsed them
as numbers or strings.
"""

import math

import yaml

from .errors import ConfigError
from .simulate import SimConfig, config_from_dict

BASELINES = ("weibull", "exponential")
FRAILTIES = ("gamma", "inverse_gaussian")
CENSORINGS = ("administrative", "normal")

MODEL_DEFAULTS = {"baseline": "weibull", "frailty": "gamma", "gamma": 1e-4,
                  "n_clusters": 3, "n_neighbors": 20, "lambda0": 1000.0}
CONVERGENCE_DEFAULTS = {"tol_similarity": 1e-4, "tol_loglik": 1e-3,
                        "max_iter": 500, "max_inner_iter": 500}

_SECTIONS = ("model", "convergence", "io", "simulate", "benchmark", "scan")


def load_config(path):
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping of sections")
    unknown = sorted(set(raw) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
    for name in _SECTIONS:
        section = raw.get(name)
        if section is not None and not isinstance(section, dict):
            raise ConfigError(f"section {name!r} must be a mapping")
    return raw


# ===== coercers =====


def _number(value, path, minimum=None, strict_min=None):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{path} must be finite")
    if minimum is not None and out < minimum:
        raise ConfigError(f"{path} must be >= {minimum}, got {out}")
    if strict_min is not None and out <= strict_min:
        raise ConfigError(f"{path} must be > {strict_min}, got {out}")
    return out


def _integer(value, path, minimum=1):
    out = _number(value, path)
    if out != int(out):
        raise ConfigError(f"{path} must be an integer, got {value!r}")
    out = int(out)
    if out < minimum:
        raise ConfigError(f"{path} must be >= {minimum}, got {out}")
    return out


def _choice(value, path, allowed):
    if value not in allowed:
        raise ConfigError(f"{path} must be one of {', '.join(allowed)}; got {value!r}")
    return value


def _listof(value, path, item):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{path} must be a nonempty list")
    return [item(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _reject_unknown(section, path, known):
    unknown = sorted(set(section) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in {path}: {', '.join(unknown)}")


# ===== section accessors =====


def model_settings(cfg):
    section = dict(cfg.get("model") or {})
    _reject_unknown(section, "model", list(MODEL_DEFAULTS) + ["init"])
    out = dict(MODEL_DEFAULTS)
    if "baseline" in section:
        out["baseline"] = _choice(section["baseline"], "model.baseline", BASELINES)
    if "frailty" in section:
        out["frailty"] = _choice(section["frailty"], "model.frailty", FRAILTIES)
    if "gamma" in section:
        out["gamma"] = _number(section["gamma"], "model.gamma", minimum=0.0)
    if "n_clusters" in section:
        out["n_clusters"] = _integer(section["n_clusters"], "model.n_clusters")
    if "n_neighbors" in section:
        out["n_neighbors"] = _integer(section["n_neighbors"], "model.n_neighbors")
    if "lambda0" in section:
        out["lambda0"] = _number(section["lambda0"], "model.lambda0", strict_min=0.0)
    out["init_params"] = _init_params(section.get("init"))
    return out


def _init_params(section):
    if section is None:
        return None
    if not isinstance(section, dict):
        raise ConfigError("model.init must be a mapping")
    _reject_unknown(section, "model.init", ("beta", "baseline", "theta"))
    if "beta" not in section or "baseline" not in section:
        raise ConfigError("model.init needs both beta and baseline")
    beta = section["beta"] if isinstance(section["beta"], (list, tuple)) else [section["beta"]]
    out = {"beta": [_number(b, f"model.init.beta[{i}]") for i, b in enumerate(beta)],
           "baseline": {k: _number(v, f"model.init.baseline.{k}")
                        for k, v in dict(section["baseline"]).items()}}
    if "theta" in section:
        out["theta"] = _number(section["theta"], "model.init.theta", strict_min=0.0)
    return out


def convergence_settings(cfg):
    section = dict(cfg.get("convergence") or {})
    _reject_unknown(section, "convergence", CONVERGENCE_DEFAULTS)
    out = dict(CONVERGENCE_DEFAULTS)
    for key in ("tol_similarity", "tol_loglik"):
        if key in section:
            out[key] = _number(section[key], f"convergence.{key}", strict_min=0.0)
    for key in ("max_iter", "max_inner_iter"):
        if key in section:
            out[key] = _integer(section[key], f"convergence.{key}")
    return out


def io_settings(cfg):
    section = dict(cfg.get("io") or {})
    _reject_unknown(section, "io", ("input", "output_dir", "emit_similarity"))
    out = {"input": section.get("input"), "output_dir": section.get("output_dir"),
           "emit_similarity": bool(section.get("emit_similarity", False))}
    for key in ("input", "output_dir"):
        if out[key] is not None and not isinstance(out[key], str):
            raise ConfigError(f"io.{key} must be a string path")
    return out


def sim_settings(cfg):
    """(SimConfig, seed) from the simulate section."""
    section = dict(cfg.get("simulate") or {})
    seed = _integer(section.pop("seed", 0), "simulate.seed", minimum=0)
    known = set(SimConfig.__dataclass_fields__)
    _reject_unknown(section, "simulate", known)
    numeric = {"theta": ("strict", 0.0), "cluster_sd": ("strict", 0.0), "beta": (None, None),
               "admin_horizon": ("strict", 0.0), "normal_mean": (None, None),
               "normal_sd": ("strict", 0.0)}
    for key, (kind, bound) in numeric.items():
        if key in section:
            section[key] = _number(section[key], f"simulate.{key}",
                                   strict_min=bound if kind == "strict" else None)
    for key in ("n_groups", "group_size"):
        if key in section:
            section[key] = _integer(section[key], f"simulate.{key}")
    if "censoring" in section:
        _choice(section["censoring"], "simulate.censoring", CENSORINGS)
    if "frailty" in section:
        _choice(section["frailty"], "simulate.frailty", FRAILTIES)
    if "baseline" in section:
        _choice(section["baseline"], "simulate.baseline", BASELINES)
    if "cluster_means" in section:
        section["cluster_means"] = _listof(section["cluster_means"], "simulate.cluster_means",
                                           _number)
    if "baseline_params" in section:
        if not isinstance(section["baseline_params"], dict):
            raise ConfigError("simulate.baseline_params must be a mapping")
        section["baseline_params"] = {
            k: _number(v, f"simulate.baseline_params.{k}")
            for k, v in section["baseline_params"].items()
        }
    try:
        return config_from_dict(section), seed
    except Exception as exc:
        raise ConfigError(f"simulate section invalid: {exc}") from exc


def benchmark_settings(cfg):
    section = dict(cfg.get("benchmark") or {})
    _reject_unknown(section, "benchmark",
                    ("replications", "seed", "censoring", "gamma", "n_neighbors", "n_clusters"))
    out = {
        "replications": _integer(section.get("replications", 20), "benchmark.replications"),
        "seed": _integer(section.get("seed", 0), "benchmark.seed", minimum=0),
        "censoring": _listof(section.get("censoring", ["administrative"]), "benchmark.censoring",
                             lambda v, p: _choice(v, p, CENSORINGS)),
        "gamma": _listof(section.get("gamma", [1e-4]), "benchmark.gamma",
                         lambda v, p: _number(v, p, minimum=0.0)),
        "n_neighbors": _listof(section.get("n_neighbors", [20]), "benchmark.n_neighbors",
                               _integer),
        "n_clusters": _listof(section.get("n_clusters", [3]), "benchmark.n_clusters", _integer),
    }
    return out


def scan_settings(cfg, model):
    section = dict(cfg.get("scan") or {})
    _reject_unknown(section, "scan", ("baseline", "frailty", "gamma", "n_neighbors", "n_clusters"))
    out = {
        "baseline": _listof(section.get("baseline", [model["baseline"]]), "scan.baseline",
                            lambda v, p: _choice(v, p, BASELINES)),
        "frailty": _listof(section.get("frailty", [model["frailty"]]), "scan.frailty",
                           lambda v, p: _choice(v, p, FRAILTIES)),
        "gamma": _listof(section.get("gamma", [model["gamma"]]), "scan.gamma",
                         lambda v, p: _number(v, p, minimum=0.0)),
        "n_neighbors": _listof(section.get("n_neighbors", [model["n_neighbors"]]),
                               "scan.n_neighbors", _integer),
        "n_clusters": _listof(section.get("n_clusters", [model["n_clusters"]]),
                              "scan.n_clusters", _integer),
    }
    return out
