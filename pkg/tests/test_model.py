import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nrm_lab import errors
from nrm_lab.lp import solve_dlp
from nrm_lab.model import Instance, capacity_rate, is_nondegenerate, load_instance, validate_instance

from conftest import multi_resource, two_class

RAW = {"horizon": 1000, "lambda": [1, 1], "revenue": [2, 1], "bom": [[1, 1]], "capacity": [1000]}


def test_degenerate_example_is_valid():
    inst = validate_instance(RAW)
    assert inst.n_classes == 2 and inst.n_resources == 1
    assert inst.horizon == 1000.0
    np.testing.assert_array_equal(inst.bom, [[1, 1]])


def test_instance_is_immutable():
    inst = validate_instance(RAW)
    with pytest.raises(ValueError):
        inst.rates[0] = 5.0
    with pytest.raises(AttributeError):
        inst.horizon = 3.0


@pytest.mark.parametrize("patch, exc", [
    ({"lambda": [0, 1]}, errors.NonpositiveRate),
    ({"lambda": [-1, 1]}, errors.NonpositiveRate),
    ({"revenue": [2, 0]}, errors.NonpositiveRevenue),
    ({"capacity": [-1]}, errors.NegativeCapacity),
    ({"bom": [[1, 0]]}, errors.ZeroColumn),
    ({"bom": [[1, -1]]}, errors.NegativeConsumption),
    ({"revenue": [2, 1, 3]}, errors.DimensionMismatch),
    ({"bom": [[1, 1, 1]]}, errors.DimensionMismatch),
    ({"capacity": [1, 1]}, errors.DimensionMismatch),
    ({"horizon": 0}, errors.ParameterOutOfRange),
    ({"horizon": -5}, errors.ParameterOutOfRange),
])
def test_rejections(patch, exc):
    with pytest.raises(exc):
        validate_instance({**RAW, **patch})


@pytest.mark.parametrize("patch, key", [
    ({"lambda": "fast"}, "lambda"),
    ({"revenue": [2, "x"]}, "revenue[1]"),
    ({"bom": 3}, "bom"),
    ({"horizon": "long"}, "horizon"),
    ({"extra": 1}, "extra"),
])
def test_format_errors_name_the_key(patch, key):
    with pytest.raises(errors.InstanceFormatError) as info:
        validate_instance({**RAW, **patch})
    assert info.value.key == key
    assert key in str(info.value)


def test_missing_key_named():
    raw = dict(RAW)
    del raw["capacity"]
    with pytest.raises(errors.InstanceFormatError, match="capacity"):
        validate_instance(raw)


def test_no_silent_clamping():
    inst = validate_instance({**RAW, "capacity": [0.0]})
    assert inst.capacity[0] == 0.0


def test_json_roundtrip(tmp_path):
    f = tmp_path / "inst.json"
    f.write_text(json.dumps(RAW))
    inst = load_instance(f)
    assert inst.to_dict() == {k: (float(v) if k == "horizon" else v) for k, v in RAW.items()}


def test_bad_json_file(tmp_path):
    f = tmp_path / "inst.json"
    f.write_text("{not json")
    with pytest.raises(errors.InstanceFormatError):
        load_instance(f)


@pytest.mark.parametrize("C, T, b", [(1000, 1000, 1.0), (5500, 5000, 1.1)])
def test_capacity_rate(C, T, b):
    inst = validate_instance({**RAW, "capacity": [C], "horizon": T})
    assert capacity_rate(inst)[0] == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("T", [1.0, 500.0, 1234.5])
def test_capacity_rate_multi(T):
    np.testing.assert_allclose(capacity_rate(multi_resource(T)), [1, 1, 1, 1], rtol=1e-12)


@given(T=st.floats(0.5, 1e6), C=st.floats(0, 1e7))
def test_capacity_rate_recovers_capacity(T, C):
    inst = validate_instance({**RAW, "capacity": [C], "horizon": T})
    assert capacity_rate(inst)[0] * T == pytest.approx(C, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("b, expected, counts", [
    (1.0, False, (2, 1)),
    (2.0, False, (2, 1)),
    (0.5, True, (1, 1)),
    (1.5, True, (1, 1)),
])
def test_degeneracy_two_class(b, expected, counts):
    inst = two_class(2, b)
    rep = is_nondegenerate(inst, solve_dlp(inst))
    assert rep.nondegenerate is expected
    assert (rep.bound_count, rep.binding_count) == counts


def test_degeneracy_multi_resource():
    inst = multi_resource()
    rep = is_nondegenerate(inst, solve_dlp(inst))
    assert not rep.nondegenerate
    assert (rep.bound_count, rep.binding_count) == (5, 4)


def test_degeneracy_describe():
    inst = two_class(2, 1.0)
    assert is_nondegenerate(inst, solve_dlp(inst)).describe() == "degenerate (counts 2+1=3 > n=2)"


def test_solution_mismatch():
    with pytest.raises(errors.SolutionInstanceMismatch):
        is_nondegenerate(two_class(), np.array([1.0, 0.0, 0.0]))


@given(c=st.sampled_from([0.25, 0.5, 2.0, 3.0, 10.0]), b=st.sampled_from([0.5, 0.8, 1.0, 1.5, 2.0, 2.5]))
def test_degeneracy_invariant_to_revenue_scaling(c, b):
    base = two_class(2, b)
    scaled = Instance(base.horizon, base.rates, base.revenues * c, base.bom, base.capacity)
    assert is_nondegenerate(base, solve_dlp(base)) == is_nondegenerate(scaled, solve_dlp(scaled))


@settings(max_examples=50)
@given(x1=st.floats(0, 1), x2=st.floats(0, 1), t1=st.floats(0, 0.2), t2=st.floats(0, 0.2))
def test_counts_monotone_in_tol(x1, x2, t1, t2):
    inst = two_class(2, 1.0)
    lo, hi = sorted((t1, t2))
    a = is_nondegenerate(inst, np.array([x1, x2]), lo)
    b = is_nondegenerate(inst, np.array([x1, x2]), hi)
    assert b.bound_count >= a.bound_count and b.binding_count >= a.binding_count
