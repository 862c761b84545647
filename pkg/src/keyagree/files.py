"""Scenario files: a named catalog entry or an inline distribution / pure state, as JSON."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .catalog import CATALOG, Scenario, ScenarioError, build
from .dist import JointDistribution
from .qstate import EveMeasurementSet, LocalBasis, PureState, measure_state

INLINE_NORM_TOL = 1e-9


class ScenarioFileError(ScenarioError):
    pass


def _field(doc: dict, key: str, kind: type | tuple[type, ...]) -> Any:
    if key not in doc:
        raise ScenarioFileError(f"missing field {key!r}")
    val = doc[key]
    if not isinstance(val, kind):
        raise ScenarioFileError(f"field {key!r} has the wrong type ({type(val).__name__})")
    return val


def _dims(doc: dict, key: str) -> tuple[int, int, int]:
    dims = _field(doc, key, list)
    if len(dims) != 3 or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims):
        raise ScenarioFileError(f"field {key!r} must be three positive integers, got {dims}")
    return tuple(dims)


def _index(row: list, i: int, bound: int, what: str) -> int:
    v = row[i]
    if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < bound:
        raise ScenarioFileError(f"{what} index {v!r} outside 0..{bound - 1}")
    return v


def _cells(doc: dict, dims: tuple[int, int, int]) -> JointDistribution:
    nx, ny, nz = dims
    cells = _field(doc, "cells", list)
    arr = np.zeros((nx, ny, nz))
    for n, row in enumerate(cells):
        if not isinstance(row, list) or len(row) != 4:
            raise ScenarioFileError(f"cells[{n}] must be [x, y, z, p]")
        x = _index(row, 0, nx, f"cells[{n}] x")
        y = _index(row, 1, ny, f"cells[{n}] y")
        z = _index(row, 2, nz, f"cells[{n}] z")
        p = row[3]
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not np.isfinite(p) or p < 0:
            raise ScenarioFileError(f"cells[{n}] probability must be a finite number >= 0, got {p!r}")
        arr[x, y, z] += p
    total = arr.sum()
    if abs(total - 1.0) > INLINE_NORM_TOL:
        raise ScenarioFileError(f"cells sum to {total!r}; normalization error (must be 1 within {INLINE_NORM_TOL:g})")
    if abs(total - 1.0) <= 4e-16:
        # already normalized to rounding: keep the stored values bit for bit
        mass = {tuple(int(i) for i in k): float(arr[k]) for k in zip(*np.nonzero(arr))}
        return JointDistribution(nx, ny, nz, mass)
    return JointDistribution.from_array(arr, tol=INLINE_NORM_TOL)


def parse_scenario(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFileError("scenario document must be a JSON object")
    if "scenario" in doc:
        name = doc["scenario"]
        if name not in CATALOG:
            raise ScenarioFileError(f"unknown scenario name {name!r}; known: {', '.join(CATALOG)}")
        params = {k: v for k, v in doc.items() if k != "scenario"}
        for k, v in params.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ScenarioFileError(f"parameter {k!r} must be a number")
        return build(name, params)

    kind = doc.get("kind")
    if kind == "distribution":
        return Scenario(name="inline-distribution", params={}, distribution=_cells(doc, _dims(doc, "alphabets")))

    if kind == "pure_state":
        dims = _dims(doc, "dims")
        rows = _field(doc, "amplitudes", list)
        amp = np.zeros(dims, dtype=complex)
        for n, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != 5:
                raise ScenarioFileError(f"amplitudes[{n}] must be [a, b, e, re, im]")
            a = _index(row, 0, dims[0], f"amplitudes[{n}] a")
            b = _index(row, 1, dims[1], f"amplitudes[{n}] b")
            e = _index(row, 2, dims[2], f"amplitudes[{n}] e")
            re, im = row[3], row[4]
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v) for v in (re, im)):
                raise ScenarioFileError(f"amplitudes[{n}] needs finite real and imaginary parts")
            amp[a, b, e] += complex(re, im)
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > INLINE_NORM_TOL:
            raise ScenarioFileError(f"amplitudes have norm^2 {norm!r}; normalization error")
        if abs(norm - 1.0) > 1e-15:
            amp = amp / np.sqrt(norm)
        state = PureState(amp)
        bases = (LocalBasis.standard(dims[0]), LocalBasis.standard(dims[1]), EveMeasurementSet.standard(dims[2]))
        # optional exact table for the standard measurement; checked against the state
        dist = _cells(doc, dims) if "cells" in doc else None
        try:
            return Scenario(name="inline-pure-state", params={}, distribution=dist, state=state, bases=bases)
        except ScenarioError as exc:
            raise ScenarioFileError(f"cells do not match the amplitudes: {exc}") from None

    raise ScenarioFileError('document needs "scenario" or "kind": "distribution" | "pure_state"')


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"{path}:{exc.lineno}:{exc.colno}: JSON parse error: {exc.msg}") from None
    return parse_scenario(doc)


def export_scenario(scenario: Scenario) -> dict:
    """Inline document reproducing the scenario's standard-frame analysis.

    A state is exported in the coordinates of its declared bases, so measuring
    the reloaded state in standard bases gives the same distribution; the
    declared table rides along as ``cells`` so exact values survive.
    """
    if scenario.state is not None:
        bA, bB, eve = scenario.bases
        amp = np.einsum("xa,yb,ze,abe->xyz", bA.vectors.conj(), bB.vectors.conj(), eve.vectors.conj(), scenario.state.amp)
        rows = [
            [int(a), int(b), int(e), float(amp[a, b, e].real), float(amp[a, b, e].imag)]
            for a, b, e in zip(*np.nonzero(amp))
        ]
        doc = {"kind": "pure_state", "dims": list(amp.shape), "amplitudes": rows}
        if scenario.distribution is not None:
            doc["cells"] = _cell_rows(scenario.distribution)
        return doc
    dist = scenario.distribution
    return {"kind": "distribution", "alphabets": [dist.nx, dist.ny, dist.nz], "cells": _cell_rows(dist)}


def _cell_rows(dist: JointDistribution) -> list:
    return [[x, y, z, p] for (x, y, z), p in sorted(dist.mass.items())]
