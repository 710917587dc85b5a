"""Experiment files: TOML sections mapped onto :class:`VqeConfig`.

``ansatz.family`` and ``optimizer.name`` may be lists; the experiment is then
the Cartesian grid of both, run as a comparison.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, fields, replace
from itertools import product
from os import PathLike
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .driver import AnsatzConfig, ExecutionConfig, LatticeConfig, OptimizerConfig, OutputConfig, VqeConfig

__all__ = ["ConfigError", "Experiment", "parse_experiment", "load_experiment", "serialize_experiment", "apply_overrides"]


class ConfigError(ValueError):
    """Invalid experiment file; the message names the key and, when known, the line."""


# file key -> (dataclass attribute, accepted python types)
_NUM = (int, float)
_SCHEMA: dict[str, dict[str, tuple[str, tuple]]] = {
    "lattice": {
        "kind": ("kind", (str,)),
        "sites": ("sites", (int,)),
        "edges": ("edges", (list,)),
        "device": ("device", (str,)),
    },
    "hamiltonian": {"J": ("J", _NUM)},
    "ansatz": {
        "family": ("family", (str, list)),
        "layers": ("layers", (int,)),
        "rotations": ("rotations", (list,)),
        "entangler": ("entangler", (str,)),
        "entanglement": ("entanglement", (str,)),
        "no_entanglers": ("no_entanglers", (bool,)),
    },
    "optimizer": {"name": ("name", (str, list))},
    "optimizer.spsa": {
        "a": ("spsa_a", _NUM),
        "c": ("spsa_c", _NUM),
        "A": ("spsa_A", _NUM),
        "alpha": ("spsa_alpha", _NUM),
        "gamma": ("spsa_gamma", _NUM),
        "target_step": ("spsa_target_step", _NUM),
        "track_every": ("spsa_track_every", (int,)),
    },
    "optimizer.bfgs": {"grad_tol": ("grad_tol", _NUM)},
    "optimizer.cobyla": {"rho_beg": ("rho_beg", _NUM), "rho_end": ("rho_end", _NUM)},
    "execution": {
        "mode": ("mode", (str,)),
        "shots": ("shots", (int,)),
        "restarts": ("restarts", (int,)),
        "seed": ("seed", (int,)),
        "max_iter": ("max_iter", (int,)),
        "eval_budget": ("eval_budget", (int,)),
        "init": ("init", (str,)),
        "fd_gradient_on_shots": ("fd_gradient_on_shots", (bool,)),
        "fd_step": ("fd_step", _NUM),
    },
    "output": {"directory": ("directory", (str,)), "plot": ("plot", (bool,)), "units": ("units", (str,))},
}
_REQUIRED = {"lattice": ("kind",), "ansatz": ("family", "layers"), "optimizer": ("name",), "execution": ("restarts", "seed", "max_iter")}


@dataclass(frozen=True)
class Experiment:
    base: VqeConfig
    families: tuple[str, ...]
    optimizers: tuple[str, ...]

    @property
    def is_grid(self) -> bool:
        return len(self.families) * len(self.optimizers) > 1

    def configs(self) -> list[VqeConfig]:
        return [
            replace(self.base, ansatz=replace(self.base.ansatz, family=fam), optimizer=replace(self.base.optimizer, name=opt))
            for fam, opt in product(self.families, self.optimizers)
        ]


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = ""
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        header = re.match(r"\[\s*([^\]]+?)\s*\]", stripped)
        if header:
            current = header.group(1)
            if key is None and current == section:
                return lineno
            continue
        if key is not None and current == section and re.match(rf"{re.escape(key)}\s*=", stripped):
            return lineno
    return None


def _fail(text: str, section: str, key: str | None, msg: str) -> ConfigError:
    where = f"{section}.{key}" if key else section
    line = _line_of(text, section, key) if text else None
    suffix = f" (line {line})" if line else ""
    return ConfigError(f"{where}{suffix}: {msg}")


def _flatten(doc: dict, text: str) -> dict[str, dict[str, Any]]:
    sections: dict[str, dict[str, Any]] = {}
    for name, body in doc.items():
        if not isinstance(body, dict):
            raise _fail(text, name, None, "top-level keys must be sections")
        if name == "optimizer":
            plain = {}
            for k, v in body.items():
                if isinstance(v, dict):
                    sections[f"optimizer.{k}"] = v
                else:
                    plain[k] = v
            sections["optimizer"] = plain
        else:
            sections[name] = body
    return sections


def parse_experiment(text: str, overrides: list[str] | None = None) -> Experiment:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    sections = _flatten(doc, text)
    if overrides:
        apply_overrides(sections, overrides)
    values: dict[str, dict[str, Any]] = {}
    for name, body in sections.items():
        schema = _SCHEMA.get(name)
        if schema is None:
            raise _fail(text, name, None, "unknown section")
        for key, val in body.items():
            if key not in schema:
                raise _fail(text, name, key, "unknown key")
            attr, types = schema[key]
            if isinstance(val, bool) and bool not in types:
                raise _fail(text, name, key, f"expected {types[0].__name__}, got a boolean")
            if not isinstance(val, types):
                raise _fail(text, name, key, f"expected {' or '.join(t.__name__ for t in types)}, got {type(val).__name__}")
            values.setdefault(name, {})[attr] = val
    for name, keys in _REQUIRED.items():
        for key in keys:
            if key not in sections.get(name, {}):
                raise _fail(text, name, None, f"missing required key {key!r}")

    def as_names(val) -> tuple[str, ...]:
        items = val if isinstance(val, list) else [val]
        if not items or not all(isinstance(v, str) for v in items):
            raise ConfigError("ansatz.family / optimizer.name must be strings or non-empty lists of strings")
        return tuple(v.lower() for v in items)

    lat = dict(values.get("lattice", {}))
    if "edges" in lat:
        try:
            lat["edges"] = tuple((int(a), int(b)) for a, b in lat["edges"])
        except (TypeError, ValueError) as exc:
            raise _fail(text, "lattice", "edges", "edges must be a list of integer pairs") from exc
    ans = dict(values.get("ansatz", {}))
    families = as_names(ans.pop("family"))
    if "rotations" in ans:
        ans["rotations"] = tuple(str(r).upper() for r in ans["rotations"])
    opt = dict(values.get("optimizer", {}))
    for sub in ("optimizer.spsa", "optimizer.bfgs", "optimizer.cobyla"):
        opt.update(values.get(sub, {}))
    optimizers = as_names(opt.pop("name"))
    try:
        base = VqeConfig(
            lattice=LatticeConfig(**lat),
            J=float(values.get("hamiltonian", {}).get("J", 1.0)),
            ansatz=AnsatzConfig(family=families[0], **ans),
            optimizer=OptimizerConfig(name=optimizers[0], **opt),
            execution=ExecutionConfig(**values.get("execution", {})),
            output=OutputConfig(**values.get("output", {})),
        )
        exp = Experiment(base, families, optimizers)
        for cfg in exp.configs():
            cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return exp


def load_experiment(path: str | PathLike, overrides: list[str] | None = None) -> Experiment:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_experiment(text, overrides)


def _parse_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_overrides(sections: dict[str, dict[str, Any]], overrides: list[str]) -> None:
    """Apply ``section.key=value`` strings; ``value`` is read as a TOML value, else a bare string."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, raw = item.split("=", 1)
        section, _, key = path.strip().rpartition(".")
        if not section:
            raise ConfigError(f"override {item!r} needs a section, e.g. execution.seed=3")
        if section not in _SCHEMA:
            raise ConfigError(f"override {item!r}: unknown section {section!r}")
        sections.setdefault(section, {})[key] = _parse_value(raw.strip())


def _toml_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        text = repr(v)
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {v!r}")


def serialize_experiment(exp: Experiment) -> str:
    """TOML text that :func:`parse_experiment` maps back to ``exp``."""
    base = exp.base
    by_attr: dict[str, dict[str, str]] = {
        name: {attr: key for key, (attr, _) in schema.items()} for name, schema in _SCHEMA.items()
    }
    sources = {
        "lattice": base.lattice,
        "hamiltonian": base,
        "ansatz": base.ansatz,
        "optimizer": base.optimizer,
        "optimizer.spsa": base.optimizer,
        "optimizer.bfgs": base.optimizer,
        "optimizer.cobyla": base.optimizer,
        "execution": base.execution,
        "output": base.output,
    }
    lines: list[str] = []
    for name, obj in sources.items():
        lines.append(f"[{name}]")
        attrs = {f.name for f in fields(obj)}
        for attr, key in by_attr[name].items():
            if attr not in attrs:
                continue
            if name == "ansatz" and attr == "family":
                val: Any = list(exp.families) if len(exp.families) > 1 else exp.families[0]
            elif name == "optimizer" and attr == "name":
                val = list(exp.optimizers) if len(exp.optimizers) > 1 else exp.optimizers[0]
            else:
                val = getattr(obj, attr)
            if val is None:
                continue
            lines.append(f"{key} = {_toml_value(val)}")
        lines.append("")
    return "\n".join(lines)
