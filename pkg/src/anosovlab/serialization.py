"""Reading and writing representations, tables and plots.

Floats in CSV use 17 significant digits so files round-trip exactly and
repeated runs are byte-identical. JSON uses the shortest round-trip repr;
non-finite floats become ``null``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .matgap import Representation
from .words import Presentation

FLOAT_FORMAT = "%.17g"
SURFACE_GENERATORS = ("a1", "b1", "a2", "b2")


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def json_text(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def table_json(header: Sequence[str], rows: Iterable[Sequence]) -> list[dict]:
    """The JSON mirror of a CSV table: one object per row."""
    return [dict(zip(header, row)) for row in rows]


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def save_svg(fig, path: str | Path) -> None:
    """Write a matplotlib figure as SVG without the creation-date stamp.

    A fixed hash salt keeps element ids, and so the whole file, reproducible.
    """
    import matplotlib

    with matplotlib.rc_context({"svg.hashsalt": "anosovlab"}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def presentation_for(names: Sequence[str]) -> Presentation:
    """Genus-2 surface presentation for the names ``a1 b1 a2 b2``, else free."""
    if sorted(names) == sorted(SURFACE_GENERATORS):
        return Presentation.surface_genus2()
    return Presentation.free(len(names), list(names))


def rep_to_json(rep: Representation) -> dict:
    gens = rep.presentation.alphabet.generators
    return {
        "degree": rep.degree,
        "generators": {g: rep.images[g].tolist() for g in gens},
    }


def rep_from_json(obj: dict) -> Representation:
    if not isinstance(obj, dict) or "generators" not in obj:
        raise ValueError("representation JSON needs a 'generators' object")
    gens = obj["generators"]
    if not isinstance(gens, dict) or not gens:
        raise ValueError("'generators' must map names to matrices")
    names = list(gens)
    p = presentation_for(names)
    rep = Representation.from_generators(p, gens)
    degree = obj.get("degree")
    if degree is not None and int(degree) != rep.degree:
        raise ValueError(f"declared degree {degree} but matrices have size {rep.degree}")
    return rep


def load_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
