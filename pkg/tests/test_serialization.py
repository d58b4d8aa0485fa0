import numpy as np
import pytest

from cdloc.kernels import CallableKernel, jet_at
from cdloc.serialization import (
    ConfigError,
    decode_complex,
    decode_matrix,
    decode_point,
    encode_matrix,
    load_document,
    model_from_config,
    model_to_config,
    tuple_from_config,
)


def test_complex_forms():
    assert decode_complex(2) == 2
    assert decode_complex([1.5, -2]) == 1.5 - 2j
    assert decode_complex("0.5+0.2j") == 0.5 + 0.2j
    with pytest.raises(ConfigError):
        decode_complex({"re": 1})
    M = np.array([[1, 2j], [3, 4]])
    assert np.array_equal(decode_matrix(encode_matrix(M)), M)
    assert decode_matrix(3).shape == (1, 1)
    with pytest.raises(ConfigError):
        decode_matrix([[1, 2], [3]])
    assert np.array_equal(decode_point(0.3), [0.3])


def test_catalog_roundtrip(models):
    for name, model in models.items():
        rebuilt = model_from_config(model_to_config(model))
        z = [0.1 - 0.05j] * model.m
        assert np.allclose(jet_at(rebuilt, z, 2).data, jet_at(model, z, 2).data), name
        assert model_from_config(name) is not None


def test_yaml_model_document():
    doc = load_document("""
model:
  type: conjugate
  inner: {type: direct_sum, parts: [szego, {type: ball, m: 1, weight: 2}]}
  jet:
    order: 1
    derivatives:
      - {index: [0], matrix: [[1, 0], [0, 1]]}
      - {index: [1], matrix: [[0, 1], [0, 0]]}
""")
    model = model_from_config(doc["model"])
    ref = model_from_config("sheared_sum")
    assert np.allclose(jet_at(model, [0.2], 2).data, jet_at(ref, [0.2], 2).data)


@pytest.mark.parametrize("cfg", [
    "nope",
    {"weights": [1]},
    {"type": "ball", "m": 2},
    {"type": "product_polydisc", "weights": [-1]},
    {"type": "direct_sum", "parts": ["szego"]},
    {"type": "mystery"},
])
def test_bad_models(cfg):
    with pytest.raises(ConfigError):
        model_from_config(cfg)


def test_bad_yaml():
    with pytest.raises(ConfigError):
        load_document("a: [1, 2")


def test_tuple_config():
    t = tuple_from_config({"labels": ["x"], "matrices": [[[0, 1], [0, 0]]]})
    assert t.labels == ("x",) and t.p == 2
    assert tuple_from_config([[[1]], [[2]]]).s == 2
    with pytest.raises(ConfigError):
        tuple_from_config([])


def test_callable_has_no_config():
    with pytest.raises(ConfigError):
        model_to_config(CallableKernel(lambda z, w: z))
