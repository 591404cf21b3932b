"""Experiment configuration files.

Grammar: INI-style sections of ``key = value`` lines (``#`` or ``;`` start a
comment line). Three sections are recognized::

    [experiment]
    n_grid = 1000, 10000, 100000   # strictly increasing integers, 1e5 allowed
    reps   = 100
    seed   = 2024                  # optional when --seed is given
    threads = 1                    # optional

    [model]
    family = homogeneous           # see rcgraph.experiments.FAMILIES
    lambda = 2.0                   # family parameters

    [params]                       # experiment-specific, optional
    nu = 0.75
    a  = 0.5, 0.2, 0.1             # comma lists become lists of floats

Every validation failure names the section, key and line.
"""

from __future__ import annotations

import configparser
import re
from pathlib import Path

from .errors import ConfigError
from .experiments import EXPERIMENTS, ExperimentSpec, make_family

SECTIONS = {"experiment", "model", "params"}
EXPERIMENT_KEYS = {"n_grid", "reps", "seed", "threads"}


class _Located:
    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, section: str, key: str) -> int | None:
        current = None
        for no, raw in enumerate(self.lines, 1):
            s = raw.strip()
            m = re.fullmatch(r"\[([^\]]+)\]", s)
            if m:
                current = m.group(1).strip()
            elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
                return no
        return None

    def error(self, section: str, key: str, msg: str) -> ConfigError:
        line = self.line_of(section, key)
        where = f"line {line}: " if line else ""
        return ConfigError(f"{where}[{section}] {key}: {msg}")


def _number(text: str) -> float:
    return float(text.strip())


def _integer(text: str) -> int:
    v = float(text.strip())
    if v != int(v):
        raise ValueError(f"not an integer: {text.strip()!r}")
    return int(v)


def _value(text: str):
    parts = [p.strip() for p in text.split(",")]
    vals = [_number(p) for p in parts]
    return vals if len(vals) > 1 else vals[0]


def parse_experiment_config(name: str, text: str, seed: int | None = None) -> tuple[ExperimentSpec, int]:
    """Build and validate an :class:`ExperimentSpec`; returns ``(spec, threads)``."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {list(EXPERIMENTS)}")
    loc = _Located(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    unknown = set(cp.sections()) - SECTIONS
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}; expected {sorted(SECTIONS)}")
    for required in ("experiment", "model"):
        if not cp.has_section(required):
            raise ConfigError(f"missing section [{required}]")

    ex = cp["experiment"]
    for key in ex:
        if key not in EXPERIMENT_KEYS:
            raise loc.error("experiment", key, f"unknown key; expected one of {sorted(EXPERIMENT_KEYS)}")
    if "n_grid" not in ex:
        raise ConfigError("[experiment] n_grid: missing")
    try:
        grid = tuple(_integer(t) for t in ex["n_grid"].split(","))
    except ValueError as exc:
        raise loc.error("experiment", "n_grid", str(exc)) from exc
    try:
        reps = _integer(ex.get("reps", ""))
    except ValueError as exc:
        raise loc.error("experiment", "reps", f"expected a positive integer ({exc})") from exc
    if seed is None:
        if "seed" not in ex:
            raise ConfigError("[experiment] seed: missing (and no --seed given)")
        try:
            seed = _integer(ex["seed"])
        except ValueError as exc:
            raise loc.error("experiment", "seed", str(exc)) from exc
    try:
        threads = _integer(ex.get("threads", "1"))
    except ValueError as exc:
        raise loc.error("experiment", "threads", str(exc)) from exc
    if threads < 1:
        raise loc.error("experiment", "threads", "must be >= 1")

    model = dict(cp["model"])
    family = model.pop("family", None)
    if family is None:
        raise ConfigError("[model] family: missing")
    values = {}
    for key, raw in model.items():
        try:
            values[key] = _number(raw)
        except ValueError as exc:
            raise loc.error("model", key, f"expected a number, got {raw!r}") from exc
    try:
        fam = make_family(family, **values)
    except ConfigError as exc:
        raise loc.error("model", "family", str(exc)) from exc

    params = {}
    if cp.has_section("params"):
        for key, raw in cp["params"].items():
            try:
                params[key] = _value(raw)
            except ValueError as exc:
                raise loc.error("params", key, f"expected a number or comma list, got {raw!r}") from exc

    spec = ExperimentSpec(name, fam, grid, reps, seed, params)
    try:
        spec.validate()
    except ConfigError as exc:
        key = "n_grid" if "n_grid" in str(exc) else "reps" if "reps" in str(exc) else "n_grid"
        raise loc.error("experiment", key, str(exc)) from exc
    return spec, threads


def load_experiment_config(name: str, path, seed: int | None = None) -> tuple[ExperimentSpec, int]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_experiment_config(name, text, seed)
