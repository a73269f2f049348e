"""JSON and CSV/SVG formats shared by the command line.

Numbers are written with 17 significant digits so a file read back gives
bit-identical floats.  Files are written once through a temporary file in
the target directory and renamed into place.
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
from typing import Dict, Iterable, List, Sequence

import numpy as np

from . import __version__
from .configurations import PTSolution

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^\s*(?:(?P<re>{_NUMBER})(?P<im>[+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij]"
                      rf"|(?P<only_im>[+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij]"
                      rf"|(?P<real>{_NUMBER}))\s*$")


def parse_complex(token: str) -> complex:
    """Parse ``"1"``, ``"-0.5i"``, ``"2-0.5i"`` or ``"1e-3+2j"``."""
    m = _COMPLEX.match(token)
    if not m:
        raise ValueError(f"not a complex number: {token!r}")
    if m.group("real") is not None:
        return complex(float(m.group("real")), 0.0)

    def coef(s):
        return float(s + "1") if s in ("", "+", "-") else float(s)

    if m.group("only_im") is not None:
        return complex(0.0, coef(m.group("only_im")))
    return complex(float(m.group("re")), coef(m.group("im")))


def parse_points(text: str) -> List[complex]:
    tokens = [t for t in text.split(",")]
    if not text.strip() or any(not t.strip() for t in tokens):
        raise ValueError(f"empty entry in point list {text!r}")
    return [parse_complex(t) for t in tokens]


# --------------------------------------------------------------------------
# number formatting


def format_number(x: float) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent, _level)
    return format_number(obj)


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def check_writable(path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
        raise OSError(f"cannot write to {directory}")


# --------------------------------------------------------------------------
# solutions


def _pair(z: complex) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def _unpair(v) -> complex:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ValueError(f"expected a [re, im] pair, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def solution_to_dict(sol: PTSolution) -> Dict:
    out = {
        "config": sol.config_id,
        "anchors": [_pair(a) for a in sol.anchors],
        "b_points": [_pair(b) for b in sol.b_points],
        "multiplicities": list(sol.multiplicities),
        "lead": _pair(sol.lead),
        "capacity": sol.capacity,
        "angles": dict(sol.angles),
        "residual_norm": sol.residual_norm,
        "tolerances": {"solve": sol.tolerance},
        "mode": sol.mode,
        "formulation": sol.formulation,
        "topology": sol.topology,
        "center": _pair(sol.center),
        "version": __version__,
    }
    if sol.companion is not None:
        out["companion"] = solution_to_dict(sol.companion)
    return out


def solution_from_dict(data: Dict) -> PTSolution:
    try:
        companion = data.get("companion")
        return PTSolution(
            config_id=str(data["config"]),
            anchors=tuple(_unpair(a) for a in data["anchors"]),
            b_points=[_unpair(b) for b in data["b_points"]],
            multiplicities=[int(m) for m in data.get("multiplicities", [1] * len(data["b_points"]))],
            lead=_unpair(data["lead"]),
            angles={str(k): float(v) for k, v in data["angles"].items()},
            residual_norm=float(data["residual_norm"]),
            mode=str(data.get("mode", "harmonic")),
            formulation=str(data.get("formulation", "inner")),
            tolerance=float(data.get("tolerances", {}).get("solve", 1e-12)),
            topology=data.get("topology"),
            companion=solution_from_dict(companion) if companion else None,
            center=_unpair(data.get("center", [0.0, 0.0])),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed solution file: {exc!r}") from exc


def read_json(path: str) -> Dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# --------------------------------------------------------------------------
# arcs


def arcs_to_csv(arcs: Sequence[np.ndarray]) -> str:
    """CSV with header ``arc_id,s,re,im``; ``s`` is the polyline arc length."""
    lines = ["arc_id,s,re,im"]
    for k, arc in enumerate(arcs):
        arc = np.asarray(arc, dtype=complex)
        s = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(arc)))))
        for sv, z in zip(s, arc):
            lines.append(f"{k},{format_number(sv)},{format_number(z.real)},{format_number(z.imag)}")
    return "\n".join(lines) + "\n"


def arcs_to_svg(arcs: Sequence[np.ndarray], size: int = 600, margin: float = 0.05) -> str:
    """One ``<path>`` per arc, y axis pointing up."""
    allpts = np.concatenate([np.asarray(a, dtype=complex) for a in arcs]) if arcs else np.zeros(1, complex)
    lo_x, hi_x = allpts.real.min(), allpts.real.max()
    lo_y, hi_y = allpts.imag.min(), allpts.imag.max()
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-12) * (1 + 2 * margin)
    cx, cy = 0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y)
    scale = size / span

    def xy(z):
        return (z.real - cx) * scale + size / 2, size / 2 - (z.imag - cy) * scale

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">']
    for k, arc in enumerate(arcs):
        pts = [xy(z) for z in np.asarray(arc, dtype=complex)]
        d = "M " + " L ".join(f"{x:.4f} {y:.4f}" for x, y in pts)
        parts.append(f'<path id="arc{k}" d="{d}" fill="none" stroke="black" stroke-width="1"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def report_to_dict(report) -> Dict:
    return {"kind": report.kind, "x": report.x, "R": report.R, "value": report.value,
            "valid": report.valid, "diagnostics": _plain(report.diagnostics), "version": __version__}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def iter_csv_counts(text: str) -> Iterable[int]:
    """Row counts per arc id of a CSV written by :func:`arcs_to_csv`."""
    counts: Dict[int, int] = {}
    for line in text.splitlines()[1:]:
        k = int(line.split(",", 1)[0])
        counts[k] = counts.get(k, 0) + 1
    return [counts[k] for k in sorted(counts)]
