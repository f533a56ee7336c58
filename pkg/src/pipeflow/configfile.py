"""Line-oriented scenario/topology file format.

Records (one per line, '#' starts a comment, blank lines ignored):

    topology single_pipe | gaslib11
    param <key> <value>
    vertex <name>
    edge <name> <start> <end> length=<f> area=<f> gamma=<f> cells=<i>
    boundary <vertex> constant value=<f>
    boundary <vertex> sin3 amplitude=<f> [offset=<f>] [omega=<f>] [phase=<f>]

Either a `topology` record selects a built-in network (whose geometry can be
tuned through params) or explicit vertex/edge records describe a custom one.
Boundary records override or complete the boundary enthalpy signals.

Recognized params: eps, sound_speed, tau_max, dt, cells, length, area, gamma,
newton_tol, newton_maxit, max_bisections, label.
"""

import math

from .errors import ConfigurationError
from .experiments import ScenarioConfig, _experiment_bounds
from .network import (
    ConstantEnthalpy,
    NetworkTopology,
    PipeEdge,
    SinCubedEnthalpy,
    gaslib11,
    single_pipe,
)
from .physics import IsothermalLaw
from .solver import SolverParams

_FLOAT_PARAMS = {"eps", "sound_speed", "tau_max", "dt", "length", "area",
                 "gamma", "newton_tol"}
_INT_PARAMS = {"cells", "newton_maxit", "max_bisections"}
_STR_PARAMS = {"label"}

_DEFAULTS = {
    "eps": 0.0, "sound_speed": 1.0, "tau_max": 1.0, "dt": 1.0 / 32.0,
    "cells": 16, "length": 1.0, "area": 1.0, "gamma": 1.0,
    "newton_tol": 1e-11, "newton_maxit": 50, "max_bisections": 3,
    "label": "scenario",
}


def _kv(tokens, record):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ConfigurationError(f"expected key=value in {record!r}, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _boundary_fn(kind, kv, line):
    if kind == "constant":
        return ConstantEnthalpy(float(kv.pop("value")))
    if kind == "sin3":
        return SinCubedEnthalpy(
            amplitude=float(kv.pop("amplitude")),
            offset=float(kv.pop("offset", 1.0)),
            omega=float(kv.pop("omega", math.pi)),
            phase=float(kv.pop("phase", 0.0)),
        )
    raise ConfigurationError(f"unknown boundary kind {kind!r} in {line!r}")


def parse_scenario(text):
    """Parse the scenario text into a ScenarioConfig."""
    params = dict(_DEFAULTS)
    builtin = None
    vertices = []
    edges = []
    boundary_records = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        record, args = tokens[0], tokens[1:]
        if record == "topology":
            if len(args) != 1 or args[0] not in ("single_pipe", "gaslib11"):
                raise ConfigurationError(f"unknown built-in topology in {line!r}")
            builtin = args[0]
        elif record == "param":
            if len(args) != 2:
                raise ConfigurationError(f"param needs key and value: {line!r}")
            key, val = args
            if key in _FLOAT_PARAMS:
                params[key] = float(val)
            elif key in _INT_PARAMS:
                params[key] = int(val)
            elif key in _STR_PARAMS:
                params[key] = val
            else:
                raise ConfigurationError(f"unknown param {key!r}")
        elif record == "vertex":
            if len(args) != 1:
                raise ConfigurationError(f"vertex needs a name: {line!r}")
            vertices.append(args[0])
        elif record == "edge":
            if len(args) < 3:
                raise ConfigurationError(f"edge needs name, start, end: {line!r}")
            kv = _kv(args[3:], line)
            edges.append(PipeEdge(
                args[0], args[1], args[2],
                length=float(kv.pop("length", 1.0)),
                area=float(kv.pop("area", 1.0)),
                gamma=float(kv.pop("gamma", 1.0)),
                cells=int(kv.pop("cells", params["cells"])),
            ))
            if kv:
                raise ConfigurationError(f"unknown edge fields {sorted(kv)} in {line!r}")
        elif record == "boundary":
            if len(args) < 2:
                raise ConfigurationError(f"boundary needs vertex and kind: {line!r}")
            kv = _kv(args[2:], line)
            boundary_records[args[0]] = _boundary_fn(args[1], kv, line)
            if kv:
                raise ConfigurationError(f"unknown boundary fields {sorted(kv)} in {line!r}")
        else:
            raise ConfigurationError(f"unknown record type {record!r} in {line!r}")

    if builtin and (vertices or edges):
        raise ConfigurationError("give either a built-in topology or explicit records, not both")

    boundary = {}
    if builtin == "single_pipe":
        topo = single_pipe(length=params["length"], area=params["area"],
                           gamma=params["gamma"], cells=params["cells"])
    elif builtin == "gaslib11":
        topo, boundary = gaslib11(cells=params["cells"])
    elif vertices or edges:
        topo = NetworkTopology(tuple(vertices), tuple(edges))
    else:
        raise ConfigurationError("no topology given")
    boundary.update(boundary_records)

    missing = [v for v in topo.boundary_vertices if v not in boundary]
    if missing:
        raise ConfigurationError(f"boundary data missing for vertices {missing}")

    dt = params["dt"]
    n_steps = round(params["tau_max"] / dt)
    if n_steps < 1 or not math.isclose(n_steps * dt, params["tau_max"], rel_tol=1e-9):
        raise ConfigurationError("tau_max must be an integer multiple of dt")
    return ScenarioConfig(
        topo=topo,
        boundary=boundary,
        law=IsothermalLaw(params["sound_speed"]),
        eps=params["eps"],
        tau_max=params["tau_max"],
        solver=SolverParams(dt=dt, n_steps=n_steps,
                            newton_tol=params["newton_tol"],
                            newton_maxit=params["newton_maxit"],
                            max_bisections=params["max_bisections"]),
        bounds=_experiment_bounds(params["eps"]),
        label=params["label"],
    )


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _boundary_record(vertex, fn):
    if isinstance(fn, ConstantEnthalpy):
        return f"boundary {vertex} constant value={fn.value!r}"
    if isinstance(fn, SinCubedEnthalpy):
        return (f"boundary {vertex} sin3 amplitude={fn.amplitude!r} "
                f"offset={fn.offset!r} omega={fn.omega!r} phase={fn.phase!r}")
    raise ConfigurationError(f"boundary function {fn!r} has no file representation")


def scenario_text(topo, boundary, params=None):
    """Serialize a topology plus boundary data (and optional params) to the
    record format above."""
    lines = ["# pipeflow scenario"]
    for key, val in (params or {}).items():
        lines.append(f"param {key} {val!r}" if isinstance(val, float) else f"param {key} {val}")
    for v in topo.vertices:
        lines.append(f"vertex {v}")
    for e in topo.edges:
        lines.append(
            f"edge {e.name} {e.start} {e.end} length={e.length!r} "
            f"area={e.area!r} gamma={e.gamma!r} cells={e.cells}"
        )
    for v in topo.boundary_vertices:
        lines.append(_boundary_record(v, boundary[v]))
    return "\n".join(lines) + "\n"
