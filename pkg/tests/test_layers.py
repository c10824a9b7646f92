import json

import numpy as np
import pytest

from zkinfer.algebra.field import BN254_FR
from zkinfer.layers.compiler import compile_model
from zkinfer.layers.fixtures import (
    REDUCED_MODELS,
    ed_model,
    edconv_model,
    fc_model,
    linear_regression_classical,
    linear_regression_embedded,
    linear_regression_model,
    model1_shape_json,
    reduced_model,
    se_model,
    tiny_relu_model,
)
from zkinfer.layers.model import ModelError, infer_shapes, load_model


def _dense_json(n_in, units, act="relu"):
    return {"type": "dense", "weights": [[0.1] * n_in for _ in range(units)], "bias": [0.0] * units,
            "activation": act}


# -- loading and validation ----------------------------------------------------------------


def test_roundtrip_json():
    g = reduced_model(1)
    again = load_model(g.to_json())
    assert again.input_shape == g.input_shape
    assert again.shapes == g.shapes
    x = np.random.default_rng(0).uniform(-1, 1, size=(3, 8, 8))
    assert np.allclose(again.float_forward(x), g.float_forward(x))


def test_model1_original_shapes():
    g = load_model(model1_shape_json())
    assert g.shapes == [(28, 28), (784,), (100,), (10,)]


@pytest.mark.parametrize("doc, needle", [
    ("not json", "invalid JSON"),
    ({"layers": []}, "input_shape"),
    ({"input_shape": [4], "layers": []}, "layers"),
    ({"input_shape": [4], "rho": 0, "layers": [_dense_json(4, 2)]}, "rho"),
    ({"input_shape": [4], "layers": [{"type": "conv3d"}]}, "unknown layer"),
    ({"input_shape": [4], "layers": [_dense_json(4, 2, act="gelu")]}, "activation"),
    ({"input_shape": [4], "layers": [_dense_json(5, 2)]}, "input width"),
    ({"input_shape": [2, 2], "layers": [_dense_json(4, 2)]}, "flatten"),
])
def test_load_errors(doc, needle):
    with pytest.raises(ModelError) as info:
        load_model(doc if isinstance(doc, str) else json.dumps(doc))
    assert needle in str(info.value)


def test_error_names_layer():
    doc = {"input_shape": [4], "layers": [_dense_json(4, 3), _dense_json(2, 2)]}
    with pytest.raises(ModelError) as info:
        load_model(doc)
    assert info.value.layer == 1
    assert "layer 1" in str(info.value)


def test_se_and_edconv_shape_checks():
    ok = se_model()
    assert ok.shapes[-1] == (8, 8, 16)
    bad = ok.to_dict()
    bad["layers"][0]["r"] = 3
    with pytest.raises(ModelError, match="reduction"):
        load_model(bad)
    conv = edconv_model().to_dict()
    conv["layers"][0]["p"] = 3
    with pytest.raises(ModelError, match="patch"):
        load_model(conv)


def test_infer_shapes_empty():
    with pytest.raises(ModelError):
        infer_shapes((3,), [])


# -- constraint counts ------------------------------------------------------------------------


@pytest.mark.parametrize("n, k", [(20, 4), (32, 8)])
@pytest.mark.parametrize("bits", [None, 24])
def test_ed_vs_fc_ratio_is_exact(n, k, bits):
    ed = compile_model(ed_model(n, k, bits=bits)).report()
    fc = compile_model(fc_model(n, n, bits=bits)).report()
    ed_layer = ed["layers"][0]
    fc_layer = fc["layers"][0]
    assert ed_layer["bits"] == fc_layer["bits"]
    assert fc["activation_constraints"] * k == ed["activation_constraints"] * n


@pytest.mark.parametrize("model", [se_model, edconv_model], ids=["se", "edconv"])
def test_block_counts_near_formula(model):
    layer = compile_model(model()).report()["layers"][0]
    assert layer["predicted"]
    assert abs(layer["ratio"] - 1) <= 0.10


def test_relu_layer_count_matches_units_times_bits():
    r = compile_model(fc_model(6, 5)).report()["layers"][0]
    assert r["total"] == 5 * (r["bits"][0] + 1)


@pytest.mark.parametrize("n", [2, 8, 32])
def test_linear_regression_embedded(n):
    c = compile_model(linear_regression_model(n))
    assert c.cs.num_constraints == 1
    assert c.cs.layout.size == n + 2
    b = linear_regression_embedded(list(range(1, n + 2)))
    assert b.cs.num_constraints == 1
    assert b.cs.layout.size == n + 2
    (L, R, O) = b.cs.dense_matrices()
    assert L == [[1] + [0] * (n + 1)]
    assert R == [list(range(1, n + 2)) + [0]]
    assert O == [[0] * (n + 1) + [1]]
    xs = list(range(5, 5 + n))
    z = b.run_witness(xs)
    assert z[-1] == 1 + sum((i + 2) * x for i, x in enumerate(xs))
    assert b.cs.is_satisfied(z)[0]


@pytest.mark.parametrize("n", [1, 2, 5])
def test_linear_regression_classical_matrices(n):
    b = linear_regression_classical(n)
    cs = b.cs
    assert cs.num_constraints == n + 1
    assert cs.layout.size == 3 * n + 3
    L, R, O = cs.dense_matrices()
    width = 3 * n + 3
    theta0, theta = 1, 2          # theta_1 starts at column 2
    xcol, tcol, ycol = n + 2, 2 * n + 2, 3 * n + 2
    for i in range(n):
        want_l = [0] * width
        want_l[theta + i] = 1
        want_r = [0] * width
        want_r[xcol + i] = 1
        want_o = [0] * width
        want_o[tcol + i] = 1
        assert (L[i], R[i], O[i]) == (want_l, want_r, want_o)
    last_l = [1] + [0] * (width - 1)
    last_r = [0] * width
    last_r[theta0] = 1
    for i in range(n):
        last_r[tcol + i] = 1
    last_o = [0] * width
    last_o[ycol] = 1
    assert (L[n], R[n], O[n]) == (last_l, last_r, last_o)
    theta_v = list(range(3, 3 + n + 1))
    xs = list(range(7, 7 + n))
    z = b.run_witness(theta_v + xs)
    assert z[ycol] == theta_v[0] + sum(t * x for t, x in zip(theta_v[1:], xs))
    assert cs.is_satisfied(z)[0]


# -- compilation behaviour ----------------------------------------------------------------


def test_compile_is_deterministic():
    a = compile_model(reduced_model(1))
    b = compile_model(reduced_model(1))
    assert a.to_bytes() == b.to_bytes()
    assert a.digest() == b.digest()
    u = compile_model(reduced_model(1), "ultragroth", chunk_width=8)
    assert u.digest() != a.digest()


@pytest.mark.parametrize("mode, w", [("groth16", None), ("ultragroth", 4)])
def test_witness_outputs_equal_reference(mode, w):
    c = compile_model(tiny_relu_model(n=3, m=3, seed=2), mode, chunk_width=w)
    rng = np.random.default_rng(5)
    xs = rng.uniform(-2, 2, size=(6, 3))
    ref = c.forward_ints(np.array([c.quantize_input(x) for x in xs], dtype=object))
    for x, want in zip(xs, ref):
        z = c.generate_witness(x, (lambda rnd, partial: [12345]) if w else None)
        assert c.cs.is_satisfied(z)[0]
        outs = [c.field.signed_decode(v) for v in c.public_outputs(z)]
        assert outs == [int(v) for v in want]


def test_reduced_model_accuracy_small_batch():
    g = reduced_model(5, rho=16)
    c = compile_model(g)
    x = np.random.default_rng(1).uniform(-1, 1, size=(20, 8, 8))
    err = np.abs(c.forward(x) - g.float_forward(x)).max()
    assert err < 1e-2


def test_reduced_models_cover_six_architectures():
    assert sorted(REDUCED_MODELS) == [1, 2, 3, 4, 5, 6]
    for k in REDUCED_MODELS:
        assert reduced_model(k).output_shape == (10,)


def test_ultragroth_reports_lookup_block():
    r = compile_model(reduced_model(1), "ultragroth").report()
    assert r["chunk_width"] is not None
    lk = r["lookup"]
    assert lk["table_size"] == 1 << r["chunk_width"]
    assert lk["tags"] > 0
    assert all(l["predicted"] is None for l in r["layers"] if l["activation_units"])


def test_field_is_bn254_by_default():
    assert compile_model(tiny_relu_model()).field is BN254_FR
