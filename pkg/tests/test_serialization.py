import json
import math

import numpy as np
import pytest

from anosovlab.matgap import first_gaps
from anosovlab.serialization import (
    csv_text,
    json_text,
    presentation_for,
    rep_from_json,
    rep_to_json,
    table_json,
)
from anosovlab.words import PresentationKind, Word


def test_csv_round_trips_floats():
    x = 0.1 + 0.2
    text = csv_text(["a", "b", "c"], [("w", x, True), ("v", 3, np.float64(math.pi))])
    lines = text.splitlines()
    assert lines[0] == "a,b,c"
    assert float(lines[1].split(",")[1]) == x
    assert lines[1].endswith("true")
    assert float(lines[2].split(",")[2]) == math.pi


def test_json_handles_numpy_and_nan():
    obj = json.loads(json_text({"b": np.arange(3), "a": np.float32(1.5), "n": math.nan, "i": np.int64(4)}))
    assert obj == {"a": 1.5, "b": [0, 1, 2], "i": 4, "n": None}
    assert list(json.loads(json_text({"z": 1, "a": 2}))) == ["a", "z"]


def test_table_json():
    assert table_json(["x", "y"], [(1, 2), (3, 4)]) == [{"x": 1, "y": 2}, {"x": 3, "y": 4}]


def test_presentation_choice():
    assert presentation_for(["a1", "b1", "a2", "b2"]).kind is PresentationKind.SURFACE_GENUS2
    assert presentation_for(["x", "y", "z"]).kind is PresentationKind.FREE


def test_rep_round_trip(rho_st):
    back = rep_from_json(json.loads(json_text(rep_to_json(rho_st))))
    for s in rho_st.presentation.alphabet.symbols:
        assert np.allclose(back.images[s], rho_st.images[s], rtol=1e-15, atol=1e-15)
    w = Word.parse("a1 b1 a2^-1")
    assert first_gaps(back, w) == pytest.approx(first_gaps(rho_st, w), abs=1e-12)


def test_rep_from_json_errors():
    with pytest.raises(ValueError):
        rep_from_json({"degree": 2})
    with pytest.raises(ValueError):
        rep_from_json({"generators": {}})
    with pytest.raises(ValueError):
        rep_from_json({"degree": 3, "generators": {"a": [[2.0, 0.0], [0.0, 0.5]]}})
