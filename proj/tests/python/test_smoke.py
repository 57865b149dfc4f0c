"""Smoke tests for the cfx Python module."""
import json
import os
from pathlib import Path

import pytest

import cfx

FIX = Path(os.environ.get("CFX_FIXTURES", Path(__file__).resolve().parents[2] / "fixtures"))


def example1(i):
    d = FIX / "example1"
    rows = []
    for line in (d / "classifier.csv").read_text().splitlines()[1:]:
        t, a, c = line.split(",")
        rows.append({"instance": {"t": t, "a": a}, "class": c})
    return {"theory": json.loads((d / "theory.json").read_text()),
            "classifier": {"type": "table", "rows": rows},
            "instance": json.loads((d / f"x{i}.json").read_text())}


def iff_query():
    d = FIX / "iff"
    return {"theory": json.loads((d / "theory.json").read_text()),
            "classifier": {"type": "formula", "formula": "f1 <-> f2", "classes": ["1", "0"]},
            "instance": json.loads((d / "x.json").read_text())}


def test_explain_example1():
    assert cfx.explain("sNec", example1(2)) == [{"t": "mild"}, {"a": "climbing"}]
    assert cfx.explain("gNec", example1(3)) == []
    assert len(cfx.explain("gSuf", example1(1))) == 8
    assert len(cfx.explain("gSuf", example1(1), cap=3)) == 3
    assert cfx.explain("Ld", example1(1), weights={"t": 1, "a": 2.5}) == [{"t": "mild"}, {"t": "freezing"}]


def test_cores():
    assert cfx.cores(example1(1))["beach"] == {"t": "hot"}


def test_sat_procedures():
    q = iff_query()
    member, calls = cfx.decide("Lc", q, {"f1": "1"})
    assert member and calls <= 1
    member, calls = cfx.decide("cSuf", q, {"f1": "1", "f2": "1"})
    assert not member and calls == 0
    assert cfx.find("sSuf", q) == (None, 0)
    found, calls = cfx.find("cSuf", q, backend=f"exec:{os.environ['CFX_DPLL']}"
                            if "CFX_DPLL" in os.environ else "builtin")
    assert found is not None and calls == 1
    assert found in cfx.explain("cSuf", q)


def test_audit_and_witness():
    (profile,) = cfx.audit("cSuf", jobs=2, budget=100)
    assert profile["explainer"] == "cSuf"
    assert profile["verdicts"]["Success"]["status"] == "no-violation-found"
    assert profile["verdicts"]["StrongValidity"]["status"] == "violated"
    w = cfx.witness(3)
    assert w["id"] == "I3" and w["conflict_verified"]


def test_errors_carry_a_code():
    q = example1(1)
    q["instance"] = {"t": "warm", "a": "reading"}
    with pytest.raises(cfx.Error) as info:
        cfx.explain("gSuf", q)
    assert info.value.code == "UnknownIdentifier"
    with pytest.raises(ValueError):
        cfx.explain("nope", example1(1))
    with pytest.raises(cfx.Error):
        cfx.find("cSuf", example1(1))
