import numpy as np
import pytest

from stlrank import Trace, TraceError, TraceSet


def test_trace_basic_accessors():
    t = Trace("x", [0, 1, 2], [5.0, 4.0, 3.0])
    assert len(t) == 3
    assert t.channel == "x"
    assert t.has_time(1)
    assert not t.has_time(3)
    assert t.value_at(2) == 3.0


def test_trace_rejects_bad_shapes():
    with pytest.raises(TraceError):
        Trace("x", [], [])
    with pytest.raises(TraceError):
        Trace("x", [0, 1], [1.0])
    with pytest.raises(TraceError):
        Trace("", [0], [1.0])


def test_trace_rejects_bad_times():
    with pytest.raises(TraceError):
        Trace("x", [-1, 0], [1.0, 2.0])
    with pytest.raises(TraceError):
        Trace("x", [0, 0], [1.0, 2.0])
    with pytest.raises(TraceError):
        Trace("x", [2, 1], [1.0, 2.0])


def test_trace_rejects_nonfinite_values():
    with pytest.raises(TraceError):
        Trace("x", [0, 1], [1.0, float("nan")])
    with pytest.raises(TraceError):
        Trace("x", [0], [float("inf")])


def test_trace_arrays_are_readonly():
    t = Trace("x", [0, 1], [1.0, 2.0])
    with pytest.raises(ValueError):
        t.values[0] = 9.0


def test_traceset_lookup_and_membership():
    w = TraceSet([Trace("x", [0, 1], [1.0, 2.0]), Trace("y", [0], [0.0])])
    assert set(w.channels) == {"x", "y"}
    assert "x" in w and "z" not in w
    assert w["y"].value_at(0) == 0.0
    with pytest.raises(TraceError):
        w["z"]


def test_traceset_rejects_duplicate_channels():
    with pytest.raises(TraceError):
        TraceSet([Trace("x", [0], [1.0]), Trace("x", [0], [2.0])])


def test_common_times_intersection():
    w = TraceSet(
        [
            Trace("x", [0, 1, 2, 3, 4], np.zeros(5)),
            Trace("y", [0, 2, 4, 6], np.zeros(4)),
        ]
    )
    assert list(w.common_times()) == [0, 2, 4]
    assert list(w.common_times(["x"])) == [0, 1, 2, 3, 4]


def test_common_times_empty_intersection_raises():
    w = TraceSet(
        [Trace("x", [0, 2], np.zeros(2)), Trace("y", [1, 3], np.zeros(2))]
    )
    with pytest.raises(TraceError):
        w.common_times()
