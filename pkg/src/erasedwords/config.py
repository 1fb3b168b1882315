"""Experiment configuration files: strict JSON schema, no silent typos.

Unknown keys anywhere in the file are errors. Numbers are parsed as exact
decimals so measure parameters survive the round trip into rational
arithmetic unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .measures import DirectingMeasure, FiniteMeasure2D
from .words import Alphabet

TOP_KEYS = {
    "alphabet",
    "measure",
    "horizon",
    "checkpoints",
    "seeds",
    "out_dir",
    "subsequence_length",
    "marked_anchors",
    "curve_grid",
    "sweep",
    "reconstruction_horizons",
    "tolerances",
}

MEASURE_KEYS = {
    "product": {"kind", "probs"},
    "threshold": {"kind", "cuts", "letters"},
    "triangular": {"kind"},
    "grid": {"kind", "atoms", "bins"},
}

DEFAULT_TOLERANCES = {
    "stage_law_tv": 0.05,
    "marginal_tv": 0.05,
    "hausdorff": 0.05,
    "match_rate": 0.95,
    "alpha": 0.01,
}


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    alphabet: Alphabet
    measure: DirectingMeasure
    horizon: int
    checkpoints: list[int]
    seeds: list[int]
    out_dir: str
    subsequence_length: int = 1
    marked_anchors: int = 5
    curve_grid: int = 512
    sweep_length: int = 8
    sweep_k: int = 4
    reconstruction_horizons: list[int] = field(
        default_factory=lambda: [1000, 10_000, 100_000]
    )
    tolerances: dict[str, float] = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def tolerance(self, name: str) -> float:
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {name!r}")
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return build_config(raw)


def build_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("alphabet", "measure"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    symbols = raw["alphabet"]
    if not isinstance(symbols, list) or not all(isinstance(s, str) for s in symbols):
        raise ConfigError("alphabet must be a list of letter name strings")
    try:
        alphabet = Alphabet(tuple(symbols))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    measure = _build_measure(raw["measure"], alphabet)

    horizon = raw.get("horizon", 1000)
    if not isinstance(horizon, int) or horizon < 1:
        raise ConfigError("horizon must be a positive integer")
    checkpoints = raw.get("checkpoints", [horizon])
    if (
        not isinstance(checkpoints, list)
        or not checkpoints
        or not all(isinstance(n, int) and 1 <= n <= horizon for n in checkpoints)
        or any(a >= b for a, b in zip(checkpoints, checkpoints[1:]))
    ):
        raise ConfigError("checkpoints must be ascending integers within the horizon")

    seeds = _build_seeds(raw.get("seeds", {"base": 0, "count": 20}))

    sub_len = raw.get("subsequence_length", 1)
    if not isinstance(sub_len, int) or not 1 <= sub_len <= checkpoints[0]:
        raise ConfigError("subsequence_length must fit in the smallest checkpoint")

    sweep = raw.get("sweep", {})
    if not isinstance(sweep, dict) or set(sweep) - {"max_length", "max_k"}:
        raise ConfigError("sweep accepts only max_length and max_k")

    horizons = raw.get("reconstruction_horizons", [1000, 10_000, 100_000])
    if not all(isinstance(n, int) and n > 0 for n in horizons) or any(
        a >= b for a, b in zip(horizons, horizons[1:])
    ):
        raise ConfigError("reconstruction_horizons must be ascending positive integers")

    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances must be an object")
    unknown_tol = set(tolerances) - set(DEFAULT_TOLERANCES)
    if unknown_tol:
        raise ConfigError(f"unknown tolerance keys: {sorted(unknown_tol)}")

    marked = raw.get("marked_anchors", 5)
    if not isinstance(marked, int) or not 1 <= marked <= checkpoints[0]:
        raise ConfigError("marked_anchors must fit in the smallest checkpoint")
    curve_grid = raw.get("curve_grid", 512)
    if not isinstance(curve_grid, int) or curve_grid < 2:
        raise ConfigError("curve_grid must be an integer >= 2")

    return ExperimentConfig(
        alphabet=alphabet,
        measure=measure,
        horizon=horizon,
        checkpoints=list(checkpoints),
        seeds=seeds,
        out_dir=str(raw.get("out_dir", "out")),
        subsequence_length=sub_len,
        marked_anchors=marked,
        curve_grid=curve_grid,
        sweep_length=int(sweep.get("max_length", 8)),
        sweep_k=int(sweep.get("max_k", 4)),
        reconstruction_horizons=list(horizons),
        tolerances={k: float(v) for k, v in tolerances.items()},
        raw=raw,
    )


def _build_seeds(entry) -> list[int]:
    if isinstance(entry, list):
        if not entry or not all(isinstance(s, int) for s in entry):
            raise ConfigError("seed list must hold integers")
        if len(set(entry)) != len(entry):
            raise ConfigError("seeds must be distinct")
        return list(entry)
    if isinstance(entry, dict):
        if set(entry) - {"base", "count"}:
            raise ConfigError("seeds object accepts only base and count")
        base = entry.get("base", 0)
        count = entry.get("count", 20)
        if not (isinstance(base, int) and isinstance(count, int) and count >= 1):
            raise ConfigError("seeds base/count must be integers, count >= 1")
        return list(range(base, base + count))
    raise ConfigError("seeds must be a list or a base/count object")


def _build_measure(entry, alphabet: Alphabet) -> DirectingMeasure:
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError("measure must be an object with a kind")
    kind = entry["kind"]
    if kind not in MEASURE_KEYS:
        raise ConfigError(f"unknown measure kind {kind!r}")
    unknown = set(entry) - MEASURE_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown measure keys for kind {kind}: {sorted(unknown)}")
    try:
        if kind == "product":
            probs = entry["probs"]
            if len(probs) != alphabet.size:
                raise ConfigError("probs length must match the alphabet size")
            return DirectingMeasure.product(probs)
        if kind == "threshold":
            letters = [alphabet.index(s) for s in entry["letters"]]
            return DirectingMeasure.threshold(
                entry["cuts"], letters, size=alphabet.size
            )
        if kind == "triangular":
            if alphabet.size != 2:
                raise ConfigError("triangular measure needs a binary alphabet")
            return DirectingMeasure.triangular()
        atoms = tuple(
            (alphabet.index(sym), float(pos), float(mass))
            for sym, pos, mass in entry["atoms"]
        )
        return DirectingMeasure.from_grid(
            FiniteMeasure2D(atoms), bins=int(entry["bins"]), size=alphabet.size
        )
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid measure parameters: {exc}") from exc
