"""File formats: states, grids, and run configurations.

Everything is plain text.  States and configurations are strict JSON
documents with a `format` tag; unknown fields are rejected so that typos
fail loudly.  Grids are tab-separated tables with a single JSON metadata
comment line on top.  Floats are written with 17 significant digits, which
makes outputs reproducible byte for byte for identical inputs.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .angles import AXES
from .basis import JKMBasisSpec, MBasisSpec, RotorState
from .errors import ParseError
from .grids import GridSpec, PhaseSpaceGrid

STATE_FORMAT = "rotorwigner-state-v1"
GRID_FORMAT = "rotorwigner-grid-v1"
ALIGN_FORMAT = "rotorwigner-align-v1"
CLASSICAL_FORMAT = "rotorwigner-classical-v1"
SUPERPOSE_FORMAT = "rotorwigner-superpose-v1"

GRID_COLUMNS = ("alpha", "beta", "gamma", "m_alpha", "m_beta", "m_gamma", "W")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _require_keys(obj: dict, required: tuple, optional: tuple = (),
                  where: str = "document") -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object, got {type(obj).__name__}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ParseError(f"{where}: missing fields {missing}")
    unknown = [k for k in obj if k not in required and k not in optional]
    if unknown:
        raise ParseError(f"{where}: unknown fields {unknown}")


def _load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def _basis_from_doc(doc: dict, where: str):
    kind = doc.get("basis")
    trunc = doc.get("truncation")
    if kind == "m":
        _require_keys(trunc, ("m_max_alpha", "m_max_beta", "m_max_gamma"),
                      where=f"{where}.truncation")
        return MBasisSpec(int(trunc["m_max_alpha"]), int(trunc["m_max_beta"]),
                          int(trunc["m_max_gamma"]))
    if kind == "jkm":
        _require_keys(trunc, ("j_max",), ("fixed_km",), where=f"{where}.truncation")
        fixed = trunc.get("fixed_km")
        return JKMBasisSpec(int(trunc["j_max"]),
                            None if fixed is None else (int(fixed[0]), int(fixed[1])))
    raise ParseError(f"{where}: basis must be 'm' or 'jkm', got {kind!r}")


def _index_of(basis, label, where: str) -> int:
    try:
        if isinstance(basis, MBasisSpec):
            from .angles import MomentumTriple
            return basis.index_of(MomentumTriple(int(label[0]), int(label[1]),
                                                 int(label[2])))
        return basis.index_of((int(label[0]), int(label[1]), int(label[2])))
    except Exception as exc:
        raise ParseError(f"{where}: bad index tuple {label}: {exc}") from None


def load_state(path) -> RotorState:
    doc = _load_json(path)
    _require_keys(doc, ("format", "basis", "truncation", "kind"),
                  ("coefficients", "density"), where=str(path))
    if doc["format"] != STATE_FORMAT:
        raise ParseError(f"{path}: unsupported format {doc['format']!r}")
    basis = _basis_from_doc(doc, str(path))
    if doc["kind"] == "pure":
        entries = doc.get("coefficients")
        if entries is None:
            raise ParseError(f"{path}: pure state needs 'coefficients'")
        vec = np.zeros(basis.dim, dtype=complex)
        for ent in entries:
            if len(ent) != 3:
                raise ParseError(f"{path}: coefficient entries are [index, re, im]")
            label, re, im = ent
            vec[_index_of(basis, label, str(path))] = float(re) + 1j * float(im)
        try:
            return RotorState.pure(basis, vec)
        except Exception as exc:
            raise ParseError(f"{path}: {exc}") from None
    if doc["kind"] == "mixed":
        entries = doc.get("density")
        if entries is None:
            raise ParseError(f"{path}: mixed state needs 'density'")
        rho = np.zeros((basis.dim, basis.dim), dtype=complex)
        for ent in entries:
            if len(ent) != 4:
                raise ParseError(f"{path}: density entries are [row, col, re, im]")
            row, col, re, im = ent
            rho[_index_of(basis, row, str(path)),
                _index_of(basis, col, str(path))] = float(re) + 1j * float(im)
        try:
            return RotorState.mixed(basis, rho)
        except Exception as exc:
            raise ParseError(f"{path}: {exc}") from None
    raise ParseError(f"{path}: kind must be 'pure' or 'mixed', got {doc['kind']!r}")


def save_state(path, state: RotorState) -> None:
    basis = state.basis
    if isinstance(basis, MBasisSpec):
        doc_basis = "m"
        trunc = {"m_max_alpha": basis.m_max_alpha, "m_max_beta": basis.m_max_beta,
                 "m_max_gamma": basis.m_max_gamma}
        labels = [list(basis.triple_of(i).as_tuple()) for i in range(basis.dim)]
    else:
        doc_basis = "jkm"
        trunc = {"j_max": basis.j_max,
                 "fixed_km": None if basis.fixed_km is None else list(basis.fixed_km)}
        labels = [list(lbl) for lbl in basis.labels()]
    doc = {"format": STATE_FORMAT, "basis": doc_basis, "truncation": trunc}
    if state.is_pure:
        vec = state.full_vector()
        doc["kind"] = "pure"
        doc["coefficients"] = [
            [labels[i], float(vec[i].real), float(vec[i].imag)]
            for i in range(len(vec)) if vec[i] != 0.0]
    else:
        rho = state.density
        doc["kind"] = "mixed"
        doc["density"] = [
            [labels[i], labels[j], float(rho[i, j].real), float(rho[i, j].imag)]
            for i in range(rho.shape[0]) for j in range(rho.shape[1])
            if rho[i, j] != 0.0]
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def save_grid(path, grid: PhaseSpaceGrid) -> None:
    spec = grid.spec
    meta = {
        "format": GRID_FORMAT,
        "n_angles": [spec.n_alpha, spec.n_beta, spec.n_gamma],
        "m_window": [list(wnd) for wnd in spec.m_window],
        "meta": {k: v for k, v in grid.meta.items()
                 if isinstance(v, (int, float, str, bool))},
    }
    lines = ["# " + json.dumps(meta, sort_keys=True)]
    lines.append("\t".join(GRID_COLUMNS))
    angles = [spec.angle_points(ax) for ax in AXES]
    ms = [spec.m_values(ax) for ax in AXES]
    v = grid.values
    for ia, a in enumerate(angles[0]):
        for ib, b in enumerate(angles[1]):
            for ig, g in enumerate(angles[2]):
                for ja, ma in enumerate(ms[0]):
                    for jb, mb in enumerate(ms[1]):
                        for jg, mg in enumerate(ms[2]):
                            lines.append("\t".join((
                                fmt(a), fmt(b), fmt(g),
                                str(int(ma)), str(int(mb)), str(int(mg)),
                                fmt(v[ia, ib, ig, ja, jb, jg]))))
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid(path) -> PhaseSpaceGrid:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# "):
        raise ParseError(f"{path}: missing metadata line")
    try:
        meta = json.loads(text[0][2:])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: bad metadata JSON: {exc.msg}") from None
    _require_keys(meta, ("format", "n_angles", "m_window"), ("meta",),
                  where=f"{path} metadata")
    if meta["format"] != GRID_FORMAT:
        raise ParseError(f"{path}: unsupported format {meta['format']!r}")
    if len(text) < 2 or text[1].split("\t") != list(GRID_COLUMNS):
        raise ParseError(f"{path}: bad or missing header row")
    na, nb, ng = (int(x) for x in meta["n_angles"])
    window = tuple((int(lo), int(hi)) for lo, hi in meta["m_window"])
    spec = GridSpec(na, nb, ng, window)
    values = np.zeros(spec.shape)
    expected = int(np.prod(spec.shape))
    rows = [ln for ln in text[2:] if ln.strip()]
    if len(rows) != expected:
        raise ParseError(f"{path}: expected {expected} rows, found {len(rows)}")
    flat = values.reshape(-1)
    for i, ln in enumerate(rows):
        parts = ln.split("\t")
        if len(parts) != 7:
            raise ParseError(f"{path}: row {i + 3}: expected 7 columns")
        try:
            flat[i] = float(parts[6])
        except ValueError:
            raise ParseError(f"{path}: row {i + 3}: bad value {parts[6]!r}") from None
    return PhaseSpaceGrid(spec, values, meta=dict(meta.get("meta", {})))


# ---------------------------------------------------------------------------
# run configurations
# ---------------------------------------------------------------------------

def load_align_config(path) -> dict:
    """Parse an alignment-run configuration into plain keyword arguments."""
    doc = _load_json(path)
    _require_keys(doc, ("format", "constants", "pulse", "initial", "times"),
                  ("j_max", "outputs", "tol"), where=str(path))
    if doc["format"] != ALIGN_FORMAT:
        raise ParseError(f"{path}: unsupported format {doc['format']!r}")
    _require_keys(doc["constants"], ("A", "C"), where=f"{path}.constants")
    _require_keys(doc["pulse"], ("strength", "duration"), ("center",),
                  where=f"{path}.pulse")
    _require_keys(doc["initial"], ("J", "K", "M"), where=f"{path}.initial")
    times = doc["times"]
    if isinstance(times, dict):
        _require_keys(times, ("linspace",), where=f"{path}.times")
        t0, t1, n = times["linspace"]
        times = np.linspace(float(t0), float(t1), int(n)).tolist()
    elif not isinstance(times, list):
        raise ParseError(f"{path}: times must be a list or a linspace spec")
    times = [float(t) for t in times]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ParseError(f"{path}: times must be sorted ascending")
    outputs = doc.get("outputs", {"signal": True})
    _require_keys(outputs, (), ("signal", "snapshots", "wigner_grids"),
                  where=f"{path}.outputs")
    grids_cfg = outputs.get("wigner_grids")
    if grids_cfg is not None:
        _require_keys(grids_cfg, (), ("n_beta", "m_beta_max"),
                      where=f"{path}.outputs.wigner_grids")
    return {
        "A": float(doc["constants"]["A"]),
        "C": float(doc["constants"]["C"]),
        "strength": float(doc["pulse"]["strength"]),
        "duration": float(doc["pulse"]["duration"]),
        "center": float(doc["pulse"].get("center", 0.0)),
        "initial": (int(doc["initial"]["J"]), int(doc["initial"]["K"]),
                    int(doc["initial"]["M"])),
        "j_max": int(doc.get("j_max", 40)),
        "tol": float(doc.get("tol", 1e-10)),
        "times": times,
        "outputs": {
            "signal": bool(outputs.get("signal", True)),
            "snapshots": bool(outputs.get("snapshots", False)),
            "wigner_grids": grids_cfg,
        },
    }


def load_classical_init(path) -> dict:
    doc = _load_json(path)
    _require_keys(doc, ("format", "omega", "momenta"), where=str(path))
    if doc["format"] != CLASSICAL_FORMAT:
        raise ParseError(f"{path}: unsupported format {doc['format']!r}")
    if len(doc["omega"]) != 3 or len(doc["momenta"]) != 3:
        raise ParseError(f"{path}: omega and momenta are triples")
    return {"omega": [float(x) for x in doc["omega"]],
            "momenta": [float(x) for x in doc["momenta"]]}


def load_superpose_spec(path) -> dict:
    doc = _load_json(path)
    _require_keys(doc, ("format", "window", "components"), where=str(path))
    if doc["format"] != SUPERPOSE_FORMAT:
        raise ParseError(f"{path}: unsupported format {doc['format']!r}")
    _require_keys(doc["window"], ("m_max_alpha", "m_max_beta", "m_max_gamma"),
                  where=f"{path}.window")
    comps = []
    for i, comp in enumerate(doc["components"]):
        _require_keys(comp, ("sigma", "center_alpha", "center_m", "weight"),
                      ("axis", "bystander"), where=f"{path}.components[{i}]")
        comps.append({
            "sigma": float(comp["sigma"]),
            "center_alpha": float(comp["center_alpha"]),
            "center_m": int(comp["center_m"]),
            "axis": comp.get("axis", "alpha"),
            "bystander": tuple(int(x) for x in comp.get("bystander", (0, 0))),
            "weight": complex(float(comp["weight"][0]), float(comp["weight"][1])),
        })
    return {"window": {k: int(v) for k, v in doc["window"].items()},
            "components": comps}


def save_signal(path, signal: list[tuple[float, float]]) -> None:
    lines = ["t_bar\tcos2beta"]
    for t, v in signal:
        lines.append(f"{fmt(t)}\t{fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")
