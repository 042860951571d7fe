"""Plain-text instance configuration.

Grammar (INI-style, parsed with :mod:`configparser`)::

    [alpha]                 # required, likewise [gamma]
    x0 = 54000              # initial dedicated workforce
    c1 = 2800               # first-stage training cost per unit
    c2 = 4000               # online training cost per unit
    h  = 3500               # cost per unit of lost demand

    [random]                # required
    d_alpha = uniform 55000 65000
    d_gamma = uniform 20000 60000
    delta1_alpha = 0.9      # a bare number means degenerate
    delta1_gamma = degenerate 0.9
    delta2_alpha = 0.9      # delta2_* default to the matching delta1_*
    delta2_gamma = 0.9
    consistent = false      # optional; true forces delta2 = delta1 samplewise

Comments start with ``#`` or ``;``. Unknown keys are rejected.
"""

from __future__ import annotations

import configparser
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .model import COMPONENTS, TASKS, Distribution, Instance, RandomSpec, TaskParams

BASECASE = "basecase"


def parse_distribution(text: str) -> Distribution:
    parts = text.split()
    try:
        if len(parts) == 1:
            return Distribution.degenerate(float(parts[0]))
        if parts[0] == "degenerate" and len(parts) == 2:
            return Distribution.degenerate(float(parts[1]))
        if parts[0] == "uniform" and len(parts) == 3:
            return Distribution.uniform(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"bad number in distribution {text!r}") from exc
    raise ConfigError(f"cannot parse distribution {text!r}")


def loads(text: str) -> Instance:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for section in (*TASKS, "random"):
        if not cp.has_section(section):
            raise ConfigError(f"missing section [{section}]")
    extra = set(cp.sections()) - {*TASKS, "random"}
    if extra:
        raise ConfigError(f"unknown sections: {sorted(extra)}")

    tasks = {}
    for t in TASKS:
        sec = cp[t]
        unknown = set(sec) - {"x0", "c1", "c2", "h"}
        if unknown:
            raise ConfigError(f"unknown keys in [{t}]: {sorted(unknown)}")
        try:
            tasks[t] = TaskParams(*(float(sec[k]) for k in ("x0", "c1", "c2", "h")))
        except KeyError as exc:
            raise ConfigError(f"[{t}] is missing {exc.args[0]}") from exc
        except ValueError as exc:
            raise ConfigError(f"[{t}]: {exc}") from exc

    sec = cp["random"]
    unknown = set(sec) - {*COMPONENTS, "consistent"}
    if unknown:
        raise ConfigError(f"unknown keys in [random]: {sorted(unknown)}")
    dists = {}
    for name in COMPONENTS:
        if name in sec:
            dists[name] = parse_distribution(sec[name])
        elif name.startswith("delta2_") and "delta1_" + name[7:] in dists:
            dists[name] = dists["delta1_" + name[7:]]
        else:
            raise ConfigError(f"[random] is missing {name}")
    try:
        consistent = sec.getboolean("consistent", fallback=False)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return Instance(tasks["alpha"], tasks["gamma"], RandomSpec(**dists, consistent=consistent))


def dumps(inst: Instance) -> str:
    lines = []
    for t in TASKS:
        p = inst.task(t)
        lines += [f"[{t}]", f"x0 = {p.x0!r}", f"c1 = {p.c1!r}", f"c2 = {p.c2!r}", f"h = {p.h!r}", ""]
    lines.append("[random]")
    for name in COMPONENTS:
        lines.append(f"{name} = {inst.random.component(name)}")
    lines.append(f"consistent = {str(inst.random.consistent).lower()}")
    return "\n".join(lines) + "\n"


def load(path: str | Path | None = None) -> Instance:
    """Read an instance from ``path``; ``None`` or ``"basecase"`` loads the shipped base case."""
    if path is None or str(path) == BASECASE:
        return loads(resources.files("crosstrain").joinpath("data/basecase.cfg").read_text())
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return loads(text)
