"""
Configuration loading module for wikisustain.

This module loads the pipeline configuration (a JSON document; the YAML
loader reads it as well as YAML), merges it over the documented defaults,
applies command-line and environment overrides, and validates it.
Violations raise ConfigError naming the dotted field path.
"""
import copy
import logging
import os

import yaml

from src.errors import ConfigError
from src.gbt import DEFAULT_PARAMS
from src.labels import DEFAULT_CUTOFF_FA, DEFAULT_CUTOFF_GA, MERGE_WINDOW_DAYS
from src.records import USE_CASES
from src.status_lists import LIST_NAMES
from src.template_tracker import DEFAULT_FA_TEMPLATES, DEFAULT_GA_TEMPLATES, MIN_REVISIONS
from src.topic_features import DEFAULT_REMOVED, REGISTRY_SIZE
from src.utils import handle_error

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(__file__), "../config/pipeline.json")
DEFAULT_REGISTRY_PATH = os.path.join(os.path.dirname(__file__), "../config/wikiprojects.json")
WORKERS_ENV = "WIKISUSTAIN_WORKERS"
PATH_FIELDS = ("dump", "workdir", "registry", "scores_sidecar")

DEFAULT_CONFIG = {
    "paths": {
        "dump": None,
        "lists": dict.fromkeys(LIST_NAMES),
        "workdir": "work",
        "registry": None,
        "scores_sidecar": None,
    },
    "use_case": "FA",
    "snapshot_date": None,
    "censoring": {"cutoff_fa": DEFAULT_CUTOFF_FA, "cutoff_ga": DEFAULT_CUTOFF_GA},
    "labels": {
        "merge_window_days": MERGE_WINDOW_DAYS,
        "min_revisions": MIN_REVISIONS,
        "min_days": 30,
        "fa_templates": list(DEFAULT_FA_TEMPLATES),
        "ga_templates": list(DEFAULT_GA_TEMPLATES),
    },
    "registry": {"size": REGISTRY_SIZE, "removed": list(DEFAULT_REMOVED)},
    "scorer": {"scorer_id": "lexicon-v1", "thresholds": {}},
    "model": dict(DEFAULT_PARAMS),
    "evaluation": {
        "bootstrap_iterations": 100,
        "folds": 5,
        "threshold": 0.5,
        "k_list": [2, 5, 10],
        "heatmaps": [
            {"x": "Time-to-Promotion", "y": "Num-of-Editors", "bins": 5, "mode": "quantile"},
            {"x": "Num-of-Comments", "y": "Num-of-Discussers", "bins": 5, "mode": "quantile"},
        ],
        "min_count": 10,
        "corpus_growth_years": list(range(2005, 2019)),
        "min_positives": 20,
        "top_n": 100,
        "shap_top_k": 10,
        "include_flags": True,
    },
    "api": {"base_url": "https://en.wikipedia.org/w/api.php", "min_interval_seconds": 1.0, "user_agent": None},
    "experience": {"run_ceiling": 1_000_000},
    "settings": {
        "workers": 1,
        "log_dir": "logs",
        "log_level": "INFO",
        "log_retention_days": 30,
        "leakage_audit_sample": 5,
    },
    "seed": 0,
}


def deep_merge(base, override):
    """Recursively merge ``override`` into a copy of ``base``; lists and scalars replace."""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _resolve(path, base_dir):
    if path is None or os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


def resolve_paths(config, base_dir):
    """Make relative paths absolute against the config file's directory."""
    paths = config["paths"]
    for name in PATH_FIELDS:
        paths[name] = _resolve(paths.get(name), base_dir)
    lists = paths.get("lists") or {}
    for name, source in lists.items():
        if isinstance(source, str):
            lists[name] = _resolve(source, base_dir)
    if paths.get("registry") is None:
        paths["registry"] = os.path.normpath(DEFAULT_REGISTRY_PATH)
    return config


def load_config(file_path=None, overrides=None, environ=None):
    """
    Load, merge and validate the pipeline configuration.

    Args:
        file_path (str, optional): JSON (or YAML) config file; defaults only when omitted
        overrides (dict, optional): CLI overrides, e.g. ``{"use_case": "GA", "seed": 3}``
        environ (mapping, optional): Environment; ``WIKISUSTAIN_WORKERS`` overrides settings.workers

    Returns:
        dict: The complete configuration

    Raises:
        InputMissingError: The config file does not exist
        ConfigError: Parse failure or schema violation
    """
    environ = os.environ if environ is None else environ
    loaded = {}
    base_dir = os.getcwd()
    if file_path is not None:
        if not os.path.exists(file_path):
            logging.error(f"Config file not found: {file_path}")
            raise ConfigError("config", f"config file not found: {file_path}")
        try:
            with open(file_path, "r", encoding="utf-8") as file:
                loaded = yaml.safe_load(file) or {}
        except yaml.YAMLError as e:
            handle_error(e, "config_parsing", with_traceback=False)
            raise ConfigError("config", f"cannot parse {file_path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError("config", "top level must be an object")
        base_dir = os.path.dirname(os.path.abspath(file_path))

    unknown = sorted(set(loaded) - set(DEFAULT_CONFIG))
    if unknown:
        raise ConfigError(unknown[0], "unknown section")

    config = deep_merge(DEFAULT_CONFIG, loaded)
    for key, value in (overrides or {}).items():
        if value is not None:
            config[key] = value
    if environ.get(WORKERS_ENV):
        try:
            config["settings"]["workers"] = int(environ[WORKERS_ENV])
        except ValueError as e:
            raise ConfigError("settings.workers", f"{WORKERS_ENV} must be an integer") from e

    resolve_paths(config, base_dir)
    validate_config(config)
    return config


def _require(condition, field_path, message):
    if not condition:
        logging.error(f"Invalid config field {field_path}: {message}")
        raise ConfigError(field_path, message)


def _positive_int(config, section, key, minimum=1):
    value = config[section][key]
    _require(isinstance(value, int) and not isinstance(value, bool) and value >= minimum,
             f"{section}.{key}", f"must be an integer >= {minimum}")


def validate_config(config):
    """
    Check every documented field.

    Raises:
        ConfigError: First violation found, with its dotted field path
    """
    _require(config["use_case"] in USE_CASES, "use_case", f"must be one of {list(USE_CASES)}")
    _require(isinstance(config["seed"], int) and not isinstance(config["seed"], bool), "seed", "must be an integer")
    _require(isinstance(config["paths"].get("workdir"), str), "paths.workdir", "must be a path")

    lists = config["paths"].get("lists")
    _require(isinstance(lists, dict), "paths.lists", "must map list names to files or categories")
    for name, source in lists.items():
        _require(name in LIST_NAMES, f"paths.lists.{name}", "unknown status list")
        _require(source is None or isinstance(source, str) or (isinstance(source, dict) and "category" in source),
                 f"paths.lists.{name}", "must be a file path or {category, namespace}")

    for key in ("cutoff_fa", "cutoff_ga"):
        _positive_int(config, "censoring", key, minimum=2001)
    for key in ("merge_window_days", "min_revisions", "min_days"):
        _positive_int(config, "labels", key, minimum=0)
    for key in ("fa_templates", "ga_templates"):
        names = config["labels"][key]
        _require(isinstance(names, list) and names and all(isinstance(n, str) for n in names),
                 f"labels.{key}", "must be a non-empty list of template names")

    _positive_int(config, "registry", "size")
    _require(isinstance(config["registry"]["removed"], list), "registry.removed", "must be a list")
    _require(config["registry"]["size"] > len(config["registry"]["removed"]), "registry.size",
             "must exceed the number of removed projects")
    _require(isinstance(config["scorer"].get("thresholds"), dict), "scorer.thresholds", "must be an object")

    model = config["model"]
    unknown = sorted(set(model) - set(DEFAULT_PARAMS))
    _require(not unknown, f"model.{unknown[0]}" if unknown else "model", "unknown model parameter")
    for key in ("n_estimators", "max_depth", "min_samples_leaf"):
        _positive_int(config, "model", key)
    _require(0 < float(model["learning_rate"]) <= 1, "model.learning_rate", "must lie in (0, 1]")
    _require(0 < float(model["subsample"]) <= 1, "model.subsample", "must lie in (0, 1]")

    evaluation = config["evaluation"]
    _positive_int(config, "evaluation", "bootstrap_iterations", minimum=2)
    _positive_int(config, "evaluation", "folds", minimum=2)
    for key in ("min_count", "min_positives", "top_n", "shap_top_k"):
        _positive_int(config, "evaluation", key)
    _require(0 < float(evaluation["threshold"]) < 1, "evaluation.threshold", "must lie in (0, 1)")
    _require(all(isinstance(k, int) and 0 < k <= 100 for k in evaluation["k_list"]), "evaluation.k_list",
             "must hold percentages in (0, 100]")
    for i, spec in enumerate(evaluation["heatmaps"]):
        _require(isinstance(spec, dict) and "x" in spec and "y" in spec, f"evaluation.heatmaps.{i}",
                 "needs x and y feature names")
        _require(spec.get("mode", "quantile") in ("quantile", "fixed"), f"evaluation.heatmaps.{i}.mode",
                 "must be quantile or fixed")

    _require(float(config["api"]["min_interval_seconds"]) >= 0, "api.min_interval_seconds", "must be >= 0")
    _positive_int(config, "experience", "run_ceiling")
    _positive_int(config, "settings", "workers")
    _positive_int(config, "settings", "log_retention_days")
    _positive_int(config, "settings", "leakage_audit_sample", minimum=0)
    _require(str(config["settings"]["log_level"]).upper() in ("DEBUG", "INFO", "WARNING", "ERROR"),
             "settings.log_level", "must be DEBUG, INFO, WARNING or ERROR")

    logging.info(f"Config validated for use case {config['use_case']} with seed {config['seed']}")
