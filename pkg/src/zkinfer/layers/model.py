"""Model description: a JSON document listing layers with their real-valued weights."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

ACTIVATIONS = ("none", "relu", "relu6", "hard_sigmoid", "hard_swish", "leaky_relu")
DEFAULT_INPUT_BOUND = 8.0
DEFAULT_LEAKY_SHIFT = 2


class ModelError(ValueError):
    """Schema or shape problem; ``layer`` is the offending layer index when known."""

    def __init__(self, message: str, layer: int | None = None):
        self.layer = layer
        prefix = f"layer {layer}: " if layer is not None else ""
        super().__init__(prefix + message)


@dataclass
class Flatten:
    type: str = "flatten"


@dataclass
class Dense:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray
    activation: str = "none"
    slope_shift: int = DEFAULT_LEAKY_SHIFT
    bits: int | None = None
    type: str = "dense"


@dataclass
class EDLayer:
    we: np.ndarray  # (k, n)
    wd: np.ndarray  # (m, k)
    activation: str = "relu"
    residual: bool = False
    slope_shift: int = DEFAULT_LEAKY_SHIFT
    bits: int | None = None
    type: str = "ed"

    @property
    def squeeze(self) -> float:
        return self.we.shape[0] / self.wd.shape[0]


@dataclass
class SEBlock:
    r: int
    grid: tuple[int, int]
    we: np.ndarray  # (C/r, C)
    wd: np.ndarray  # (C, C/r)
    sigma: str = "hard_sigmoid"
    phi: str = "relu"
    bits: int | None = None
    type: str = "se"


@dataclass
class EDConv:
    p: int
    k: int
    out: tuple[int, int, int]
    we: np.ndarray  # (K, WHC/P^2)
    wd: np.ndarray  # (W'H'C'/P^2, K)
    activation: str = "relu"
    bits: int | None = None
    type: str = "edconv"


Layer = Flatten | Dense | EDLayer | SEBlock | EDConv


@dataclass
class ModelGraph:
    input_shape: tuple[int, ...]
    layers: list
    rho: int = 16
    input_bound: float = DEFAULT_INPUT_BOUND
    shapes: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        self.shapes = infer_shapes(self.input_shape, self.layers)

    @property
    def output_shape(self) -> tuple[int, ...]:
        return self.shapes[-1]

    def to_dict(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "rho": self.rho,
            "input_bound": self.input_bound,
            "layers": [_layer_to_dict(l) for l in self.layers],
        }

    def to_json(self) -> str:
        """Canonical encoding: sorted keys, no whitespace, shortest float reprs."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def float_forward(self, x: np.ndarray) -> np.ndarray:
        """Real-valued reference inference on a batch shaped (N, *input_shape)."""
        x = np.asarray(x, dtype=float)
        out = x.reshape(x.shape[0], *self.input_shape)
        for layer, shape_in in zip(self.layers, self.shapes[:-1]):
            out = _float_layer(layer, out, shape_in)
        return out.reshape(x.shape[0], -1)


# -- parsing ---------------------------------------------------------------------------


def _matrix(obj: Any, name: str, idx: int) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise ModelError(f"{name} must be a numeric matrix", idx) from None
    if arr.ndim != 2 or 0 in arr.shape:
        raise ModelError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}", idx)
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} contains non-finite values", idx)
    return arr


def _vector(obj: Any, name: str, idx: int) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise ModelError(f"{name} must be a numeric vector", idx) from None
    if arr.ndim != 1:
        raise ModelError(f"{name} must be a vector", idx)
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} contains non-finite values", idx)
    return arr


def _activation(obj: Any, idx: int, key: str = "activation", default: str = "none") -> str:
    act = obj.get(key, default)
    if act is None:
        act = "none"
    if act not in ACTIVATIONS:
        raise ModelError(f"unknown activation {act!r} (expected one of {', '.join(ACTIVATIONS)})", idx)
    return act


def _int(obj: Any, key: str, idx: int, default=None, minimum: int = 1) -> int:
    v = obj.get(key, default)
    if v is None or isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ModelError(f"{key!r} must be an integer >= {minimum}", idx)
    return v


def _bits(obj: dict, idx: int) -> int | None:
    return _int(obj, "bits", idx, minimum=2) if "bits" in obj else None


def _parse_layer(obj: Any, idx: int):
    if not isinstance(obj, dict) or "type" not in obj:
        raise ModelError("each layer must be an object with a 'type'", idx)
    kind = obj["type"]
    if kind == "flatten":
        return Flatten()
    if kind == "dense":
        w = _matrix(obj.get("weights"), "weights", idx)
        bias = _vector(obj.get("bias", [0.0] * w.shape[0]), "bias", idx)
        if bias.shape[0] != w.shape[0]:
            raise ModelError(f"bias has {bias.shape[0]} entries for {w.shape[0]} units", idx)
        return Dense(w, bias, _activation(obj, idx), _int(obj, "slope_shift", idx, DEFAULT_LEAKY_SHIFT), _bits(obj, idx))
    if kind == "ed":
        we = _matrix(obj.get("we"), "we", idx)
        wd = _matrix(obj.get("wd"), "wd", idx)
        if wd.shape[1] != we.shape[0]:
            raise ModelError(f"wd expects {wd.shape[1]} latent units, we produces {we.shape[0]}", idx)
        residual = obj.get("residual", False)
        if not isinstance(residual, bool):
            raise ModelError("'residual' must be a boolean", idx)
        if residual and wd.shape[0] != we.shape[1]:
            raise ModelError("a residual connection needs equal input and output widths", idx)
        return EDLayer(we, wd, _activation(obj, idx, default="relu"), residual,
                       _int(obj, "slope_shift", idx, DEFAULT_LEAKY_SHIFT), _bits(obj, idx))
    if kind == "se":
        r = _int(obj, "r", idx)
        grid = obj.get("grid", [1, 1])
        if not (isinstance(grid, list) and len(grid) == 2 and all(isinstance(g, int) and g >= 1 for g in grid)):
            raise ModelError("'grid' must be [pw, ph] with positive integers", idx)
        we = _matrix(obj.get("we"), "we", idx)
        wd = _matrix(obj.get("wd"), "wd", idx)
        return SEBlock(r, (grid[0], grid[1]), we, wd, _activation(obj, idx, "sigma", "hard_sigmoid"),
                       _activation(obj, idx, "phi", "relu"), _bits(obj, idx))
    if kind == "edconv":
        p = _int(obj, "p", idx)
        k = _int(obj, "k", idx)
        out = obj.get("out")
        if not (isinstance(out, list) and len(out) == 3 and all(isinstance(o, int) and o >= 1 for o in out)):
            raise ModelError("'out' must be [w, h, c] with positive integers", idx)
        we = _matrix(obj.get("we"), "we", idx)
        wd = _matrix(obj.get("wd"), "wd", idx)
        return EDConv(p, k, (out[0], out[1], out[2]), we, wd, _activation(obj, idx, default="relu"), _bits(obj, idx))
    raise ModelError(f"unknown layer type {kind!r}", idx)


def infer_shapes(input_shape: Sequence[int], layers: Sequence) -> list[tuple[int, ...]]:
    shape = tuple(input_shape)
    shapes = [shape]
    if not layers:
        raise ModelError("the model has no layers")
    for idx, layer in enumerate(layers):
        if isinstance(layer, Flatten):
            shape = (math.prod(shape),)
        elif isinstance(layer, Dense):
            _need_vector(shape, idx)
            if layer.weights.shape[1] != shape[0]:
                raise ModelError(f"weights expect input width {layer.weights.shape[1]}, got {shape[0]}", idx)
            shape = (layer.weights.shape[0],)
        elif isinstance(layer, EDLayer):
            _need_vector(shape, idx)
            if layer.we.shape[1] != shape[0]:
                raise ModelError(f"we expects input width {layer.we.shape[1]}, got {shape[0]}", idx)
            shape = (layer.wd.shape[0],)
        elif isinstance(layer, SEBlock):
            if len(shape) != 3:
                raise ModelError(f"SE block needs a W x H x C input, got {shape}", idx)
            W, H, C = shape
            pw, ph = layer.grid
            if W % pw or H % ph:
                raise ModelError(f"grid {layer.grid} does not divide {W} x {H}", idx)
            if C % layer.r:
                raise ModelError(f"reduction {layer.r} does not divide {C} channels", idx)
            if layer.we.shape != (C // layer.r, C) or layer.wd.shape != (C, C // layer.r):
                raise ModelError(
                    f"SE weights must be {(C // layer.r, C)} and {(C, C // layer.r)}, got "
                    f"{layer.we.shape} and {layer.wd.shape}", idx)
        elif isinstance(layer, EDConv):
            if len(shape) != 3:
                raise ModelError(f"ED conv needs a W x H x C input, got {shape}", idx)
            W, H, C = shape
            Wo, Ho, Co = layer.out
            P = layer.p
            if W % P or H % P or Wo % P or Ho % P:
                raise ModelError(f"patch count {P} must divide input {W}x{H} and output {Wo}x{Ho}", idx)
            block_in = W * H * C // (P * P)
            block_out = Wo * Ho * Co // (P * P)
            if layer.we.shape != (layer.k, block_in) or layer.wd.shape != (block_out, layer.k):
                raise ModelError(
                    f"ED conv weights must be {(layer.k, block_in)} and {(block_out, layer.k)}, got "
                    f"{layer.we.shape} and {layer.wd.shape}", idx)
            shape = tuple(layer.out)
        else:
            raise ModelError(f"unsupported layer object {layer!r}", idx)
        shapes.append(shape)
    return shapes


def _need_vector(shape, idx):
    if len(shape) != 1:
        raise ModelError(f"expects a flat input, got shape {shape} (insert a flatten layer)", idx)


def load_model(data: bytes | str | dict) -> ModelGraph:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode()
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ModelError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ModelError("the model must be a JSON object")
    shape = data.get("input_shape")
    if not (isinstance(shape, list) and shape and all(isinstance(s, int) and s >= 1 for s in shape)):
        raise ModelError("'input_shape' must be a non-empty list of positive integers")
    rho = data.get("rho", 16)
    if not isinstance(rho, int) or isinstance(rho, bool) or rho < 1:
        raise ModelError("'rho' must be a positive integer")
    bound = data.get("input_bound", DEFAULT_INPUT_BOUND)
    if not isinstance(bound, (int, float)) or not math.isfinite(bound) or bound <= 0:
        raise ModelError("'input_bound' must be a positive number")
    layers = data.get("layers")
    if not isinstance(layers, list) or not layers:
        raise ModelError("'layers' must be a non-empty list")
    parsed = [_parse_layer(obj, i) for i, obj in enumerate(layers)]
    return ModelGraph(tuple(shape), parsed, rho, float(bound))


# -- serialization -----------------------------------------------------------------------


def _floats(arr: np.ndarray) -> list:
    return np.asarray(arr, dtype=float).tolist()


def _layer_to_dict(layer) -> dict:
    if isinstance(layer, Flatten):
        return {"type": "flatten"}
    if isinstance(layer, Dense):
        d = {"type": "dense", "weights": _floats(layer.weights), "bias": _floats(layer.bias),
             "activation": layer.activation}
        if layer.activation == "leaky_relu":
            d["slope_shift"] = layer.slope_shift
    elif isinstance(layer, EDLayer):
        d = {"type": "ed", "we": _floats(layer.we), "wd": _floats(layer.wd), "activation": layer.activation,
             "residual": layer.residual}
        if layer.activation == "leaky_relu":
            d["slope_shift"] = layer.slope_shift
    elif isinstance(layer, SEBlock):
        d = {"type": "se", "r": layer.r, "grid": list(layer.grid), "we": _floats(layer.we),
             "wd": _floats(layer.wd), "sigma": layer.sigma, "phi": layer.phi}
    elif isinstance(layer, EDConv):
        d = {"type": "edconv", "p": layer.p, "k": layer.k, "out": list(layer.out), "we": _floats(layer.we),
             "wd": _floats(layer.wd), "activation": layer.activation}
    else:
        raise ModelError(f"cannot serialize {layer!r}")
    if layer.bits is not None:
        d["bits"] = layer.bits
    return d


# -- float reference -----------------------------------------------------------------------


def float_activation(kind: str, x: np.ndarray, slope_shift: int = DEFAULT_LEAKY_SHIFT) -> np.ndarray:
    if kind == "none":
        return x
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "leaky_relu":
        return np.maximum(x, x / (1 << slope_shift))
    if kind == "relu6":
        return np.clip(x, 0.0, 6.0)
    if kind == "hard_sigmoid":
        return np.clip(x + 3.0, 0.0, 6.0) / 6.0
    if kind == "hard_swish":
        return x * np.clip(x + 3.0, 0.0, 6.0) / 6.0
    raise ModelError(f"unknown activation {kind!r}")


def _float_layer(layer, x: np.ndarray, shape_in: tuple[int, ...]) -> np.ndarray:
    n = x.shape[0]
    if isinstance(layer, Flatten):
        return x.reshape(n, -1)
    if isinstance(layer, Dense):
        return float_activation(layer.activation, x @ layer.weights.T + layer.bias, layer.slope_shift)
    if isinstance(layer, EDLayer):
        h = float_activation(layer.activation, x @ layer.we.T, layer.slope_shift)
        y = h @ layer.wd.T
        return y + x if layer.residual else y
    if isinstance(layer, SEBlock):
        W, H, C = shape_in
        pw, ph = layer.grid
        cw, chh = W // pw, H // ph
        cells = x.reshape(n, pw, cw, ph, chh, C)
        z = cells.mean(axis=(2, 4))  # (n, pw, ph, C)
        h = float_activation(layer.phi, z @ layer.we.T)
        s = float_activation(layer.sigma, h @ layer.wd.T)
        y = cells * s[:, :, None, :, None, :]
        return y.reshape(n, W, H, C)
    if isinstance(layer, EDConv):
        W, H, C = shape_in
        Wo, Ho, Co = layer.out
        P = layer.p
        blocks = x.reshape(n, P, W // P, P, H // P, C).transpose(0, 1, 3, 2, 4, 5).reshape(n, P, P, -1)
        h = float_activation(layer.activation, blocks @ layer.we.T)
        yb = (h @ layer.wd.T).reshape(n, P, P, Wo // P, Ho // P, Co)
        return yb.transpose(0, 1, 3, 2, 4, 5).reshape(n, Wo, Ho, Co)
    raise ModelError(f"unsupported layer {layer!r}")
