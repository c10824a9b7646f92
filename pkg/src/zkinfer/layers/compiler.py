"""Lowering a :class:`ModelGraph` to R1CS.

Weights are quantized at rho and live only as coefficients of linear combinations, so
matrix products and biases cost nothing. Each tensor carries one precision and per-entry
integer bounds; an activation cuts the precision back to rho (the cut is free inside the
gadget's decomposition), and its decomposition width B comes from the bounds.

Every lowering has two routes: the constraint-emitting one and a vectorized integer
reference used by :meth:`CompiledCircuit.forward`. The witness program never calls the
reference, so comparing the two is a real check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .. import gadgets as g
from ..algebra.field import BN254_FR, PrimeField
from ..circuit import CircuitBuilder, WitnessContext, WitnessError
from ..quantize import quantize_array, quantize_int
from ..r1cs import ConstraintSystem, LinearCombination
from .chunks import lookup_cost, optimal_chunk_width
from .model import DEFAULT_LEAKY_SHIFT, Dense, EDConv, EDLayer, Flatten, ModelGraph, SEBlock, load_model

MODES = ("groth16", "ultragroth")

# nominal cost of one activation, in multiples of the decomposition width
ACTIVATION_FACTOR = {"relu": 1, "leaky_relu": 1, "relu6": 2, "hard_sigmoid": 2, "hard_swish": 2}


class ScheduleError(ValueError):
    """The precision/bound schedule does not fit the field."""


Ref = Callable[[np.ndarray], np.ndarray]


@dataclass
class Tensor:
    lcs: list[LinearCombination]
    bounds: list[int]
    precision: int
    shape: tuple[int, ...]

    @property
    def max_bound(self) -> int:
        return max(self.bounds) if self.bounds else 0


@dataclass
class ActivationInfo:
    kind: str
    units: int
    bits: int
    cut: int
    precision_in: int
    precision_out: int


@dataclass
class CompileOptions:
    mode: str
    rho: int
    chunk_width: int | None
    field: PrimeField
    bits: int | None
    input_bound: float


def _obj(arr) -> np.ndarray:
    return np.asarray(arr, dtype=object)


def _abs_int(arr) -> np.ndarray:
    return _obj([abs(int(v)) for v in np.asarray(arr, dtype=object).ravel()]).reshape(np.shape(arr))


def _matvec(b: CircuitBuilder, wq: np.ndarray, x: Tensor, bias: np.ndarray | None = None) -> list[LinearCombination]:
    rows = []
    for i in range(wq.shape[0]):
        items = [(lc, int(c)) for lc, c in zip(x.lcs, wq[i]) if c]
        lc = LinearCombination.weighted_sum(items)
        if bias is not None and bias[i]:
            lc = lc + int(bias[i])
        rows.append(lc)
    return rows


def _matvec_bounds(wq: np.ndarray, bounds: Sequence[int], bias: np.ndarray | None = None) -> list[int]:
    aw = _abs_int(wq)
    out = list(aw.dot(_obj(list(bounds)))) if len(bounds) else [0] * wq.shape[0]
    if bias is not None:
        out = [o + abs(int(c)) for o, c in zip(out, bias)]
    return [int(o) for o in out]


class _Lowering:
    def __init__(self, builder: CircuitBuilder, opts: CompileOptions):
        self.b = builder
        self.opts = opts
        self.rho = opts.rho
        self.activations: list[ActivationInfo] = []
        self.schedule: list[dict] = []
        self.limit_bits = opts.field.bit_size - 2

    # -- checks -------------------------------------------------------------------------

    def check(self, t: Tensor, where: str) -> Tensor:
        if t.max_bound.bit_length() > self.limit_bits:
            raise ScheduleError(
                f"{where}: values need {t.max_bound.bit_length()} bits at precision {t.precision}, but the "
                f"field leaves {self.limit_bits}; use a smaller rho or add activations to cut precision"
            )
        return t

    def width(self, bound: int, minimum: int, override: int | None, where: str) -> int:
        need = max(g.bits_for_bound(bound), minimum)
        w = self.opts.chunk_width
        if w:
            need = g.round_up(need, w)
        if override is not None:
            if override < need:
                raise ScheduleError(f"{where}: bits override {override} below the required {need}")
            if w and override % w:
                raise ScheduleError(f"{where}: bits override {override} is not a multiple of the chunk width {w}")
            need = override
        if need > self.limit_bits:
            raise ScheduleError(
                f"{where}: decomposition width {need} exceeds the field budget of {self.limit_bits} bits; "
                f"use a smaller rho"
            )
        return need

    # -- activations --------------------------------------------------------------------

    def activate(self, kind: str, t: Tensor, override: int | None, where: str,
                 slope_shift: int = DEFAULT_LEAKY_SHIFT) -> tuple[Tensor, Ref]:
        if kind == "none":
            return t, lambda x: x
        b, rho, w = self.b, self.rho, self.opts.chunk_width
        P = t.precision
        bound = t.max_bound
        if kind == "hard_sigmoid" or kind == "hard_swish":
            bits = self.width(bound, 2, override, where)
            ubits = g.hard_sigmoid_bits(bits, P, rho, w)
            if ubits > self.limit_bits:
                raise ScheduleError(f"{where}: hard_sigmoid needs {ubits} bits; use a smaller rho")
            out_p = rho if kind == "hard_sigmoid" else P + rho
            if kind == "hard_sigmoid":
                lcs = [g.hard_sigmoid(b, x, bits, P, rho, rho, w) for x in t.lcs]
                bounds = [1 << rho] * len(lcs)

                def ref(x, P=P):
                    return g.hard_sigmoid_ref(x, P, rho, rho)
            else:
                lcs = [g.hard_swish(b, x, bits, P, rho, w) for x in t.lcs]
                bounds = [bd << rho for bd in t.bounds]

                def ref(x, P=P):
                    return g.hard_swish_ref(x, P, rho)
            info = ActivationInfo(kind, len(lcs), ubits, P + rho - rho, P, out_p)
        else:
            cut = max(P - rho, 0)
            out_p = P - cut
            if kind == "relu":
                bits = self.width(bound, cut + 2, override, where)
                lcs = [g.relu(b, x, bits, cut, w) for x in t.lcs]
                bounds = [bd >> cut for bd in t.bounds]

                def ref(x, cut=cut):
                    return g.relu_ref(x, cut)
            elif kind == "leaky_relu":
                bits = self.width(bound, cut + slope_shift + 2, override, where)
                lcs = [g.leaky_relu(b, x, bits, slope_shift, cut, w) for x in t.lcs]
                bounds = [(bd >> cut) + 1 for bd in t.bounds]

                def ref(x, cut=cut):
                    return g.leaky_relu_ref(x, slope_shift, cut)
            elif kind == "relu6":
                bits = self.width(bound, cut + 2, override, where)
                lcs = [g.relu6(b, x, bits, P, cut, w) for x in t.lcs]
                six = 6 << P
                bounds = [min(bd, six) >> cut for bd in t.bounds]

                def ref(x, cut=cut, P=P):
                    return g.relu6_ref(x, P, cut)
            else:
                raise ScheduleError(f"{where}: unknown activation {kind!r}")
            info = ActivationInfo(kind, len(lcs), bits, cut, P, out_p)
        self.activations.append(info)
        return self.check(Tensor(lcs, bounds, out_p, t.shape), where), ref

    # -- layers ----------------------------------------------------------------------------

    def dense(self, layer: Dense, t: Tensor, where: str) -> tuple[Tensor, Ref, list[ActivationInfo]]:
        rho = self.rho
        wq = quantize_array(layer.weights, rho)
        bq = quantize_array(layer.bias, t.precision + rho)
        pre = Tensor(_matvec(self.b, wq, t, bq), _matvec_bounds(wq, t.bounds, bq), t.precision + rho, (wq.shape[0],))
        self.check(pre, where)
        before = len(self.activations)
        out, act_ref = self.activate(layer.activation, pre, layer.bits, where, layer.slope_shift)
        wt = wq.T

        def ref(x):
            return act_ref(x.dot(wt) + bq)

        return out, ref, self.activations[before:]

    def ed(self, layer: EDLayer, t: Tensor, where: str):
        rho = self.rho
        we = quantize_array(layer.we, rho)
        wd = quantize_array(layer.wd, rho)
        pre = Tensor(_matvec(self.b, we, t), _matvec_bounds(we, t.bounds), t.precision + rho, (we.shape[0],))
        self.check(pre, where)
        before = len(self.activations)
        h, act_ref = self.activate(layer.activation, pre, layer.bits, where, layer.slope_shift)
        y = Tensor(_matvec(self.b, wd, h), _matvec_bounds(wd, h.bounds), h.precision + rho, (wd.shape[0],))
        x_scale = y_scale = 1
        if layer.residual:
            # bring both branches to the higher precision by a free power-of-two scaling
            target = max(y.precision, t.precision)
            x_scale = 1 << (target - t.precision)
            y_scale = 1 << (target - y.precision)
            lcs = [yl * y_scale + xl * x_scale for yl, xl in zip(y.lcs, t.lcs)]
            bounds = [yb * y_scale + xb * x_scale for yb, xb in zip(y.bounds, t.bounds)]
            y = Tensor(lcs, bounds, target, y.shape)
        self.check(y, where)
        wet, wdt = we.T, wd.T
        residual = layer.residual

        def ref(x):
            out = act_ref(x.dot(wet)).dot(wdt)
            if residual:
                out = out * y_scale + x * x_scale
            return out

        return y, ref, self.activations[before:]

    def se(self, layer: SEBlock, t: Tensor, where: str):
        rho, b = self.rho, self.b
        W, H, C = t.shape
        pw, ph = layer.grid
        cw, chh = W // pw, H // ph
        n = cw * chh
        idx = np.arange(W * H * C).reshape(pw, cw, ph, chh, C)
        # pooled sums per (cell, channel), then the 1/n scaling
        pooled_lcs, pooled_bounds = [], []
        for i in range(pw):
            for j in range(ph):
                for c in range(C):
                    members = idx[i, :, j, :, c].ravel()
                    pooled_lcs.append(LinearCombination.weighted_sum((t.lcs[m], 1) for m in members))
                    pooled_bounds.append(sum(t.bounds[m] for m in members))
        if n & (n - 1) == 0:
            k = n.bit_length() - 1
            z_prec, inv_n = t.precision + k, 1
        else:
            z_prec, inv_n = t.precision + rho, quantize_int(Fraction(1, n), rho)
            pooled_lcs = [lc * inv_n for lc in pooled_lcs]
            pooled_bounds = [bd * inv_n for bd in pooled_bounds]
        we = quantize_array(layer.we, rho)
        wd = quantize_array(layer.wd, rho)
        hidden_lcs, hidden_bounds, gate_lcs, gate_bounds = [], [], [], []
        cells = pw * ph
        zs = [Tensor(pooled_lcs[q * C:(q + 1) * C], pooled_bounds[q * C:(q + 1) * C], z_prec, (C,)) for q in range(cells)]
        pres = [Tensor(_matvec(b, we, z), _matvec_bounds(we, z.bounds), z_prec + rho, (we.shape[0],)) for z in zs]
        merged = Tensor([lc for p in pres for lc in p.lcs], [x for p in pres for x in p.bounds], z_prec + rho, (cells * we.shape[0],))
        self.check(merged, where)
        before = len(self.activations)
        h_all, phi_ref = self.activate(layer.phi, merged, layer.bits, where + " (squeeze)")
        kk = we.shape[0]
        hs = [Tensor(h_all.lcs[q * kk:(q + 1) * kk], h_all.bounds[q * kk:(q + 1) * kk], h_all.precision, (kk,)) for q in range(cells)]
        gates = [Tensor(_matvec(b, wd, h), _matvec_bounds(wd, h.bounds), h.precision + rho, (C,)) for h in hs]
        gmerged = Tensor([lc for q in gates for lc in q.lcs], [x for q in gates for x in q.bounds], h_all.precision + rho, (cells * C,))
        self.check(gmerged, where)
        s_all, sigma_ref = self.activate(layer.sigma, gmerged, layer.bits, where + " (excite)")
        # channel-wise rescaling: one product per input entry
        out_lcs = [None] * (W * H * C)
        out_bounds = [0] * (W * H * C)
        for i in range(pw):
            for j in range(ph):
                q = i * ph + j
                for c in range(C):
                    s_lc, s_bd = s_all.lcs[q * C + c], s_all.bounds[q * C + c]
                    for m in idx[i, :, j, :, c].ravel():
                        out_lcs[m] = self._mul(s_lc, t.lcs[m])
                        out_bounds[m] = s_bd * t.bounds[m]
        y = self.check(Tensor(out_lcs, out_bounds, s_all.precision + t.precision, t.shape), where)
        wet, wdt = we.T, wd.T
        pow2 = n & (n - 1) == 0

        def ref(x):
            N = x.shape[0]
            cells_x = x.reshape(N, pw, cw, ph, chh, C)
            z = cells_x.sum(axis=(2, 4))
            if not pow2:
                z = z * inv_n
            z = z.reshape(N, pw * ph, C)
            h = phi_ref(z.dot(wet).reshape(N, -1)).reshape(N, pw * ph, -1)
            s = sigma_ref(h.dot(wdt).reshape(N, -1)).reshape(N, pw, ph, C)
            return (cells_x * s[:, :, None, :, None, :]).reshape(N, -1)

        return y, ref, self.activations[before:]

    def _mul(self, a: LinearCombination, c: LinearCombination) -> LinearCombination:
        b = self.b
        y = b.private()
        out = LinearCombination.wire(y)
        b.enforce(a, c, out)

        def fill(ctx: WitnessContext) -> None:
            ctx[y] = ctx.eval(a) * ctx.eval(c)

        b.step(fill)
        return out

    def edconv(self, layer: EDConv, t: Tensor, where: str):
        rho, b = self.rho, self.b
        W, H, C = t.shape
        Wo, Ho, Co = layer.out
        P = layer.p
        in_idx = np.arange(W * H * C).reshape(P, W // P, P, H // P, C).transpose(0, 2, 1, 3, 4).reshape(P, P, -1)
        out_idx = np.arange(Wo * Ho * Co).reshape(P, Wo // P, P, Ho // P, Co).transpose(0, 2, 1, 3, 4).reshape(P, P, -1)
        we = quantize_array(layer.we, rho)
        wd = quantize_array(layer.wd, rho)
        blocks = []
        for i in range(P):
            for j in range(P):
                members = in_idx[i, j]
                blk = Tensor([t.lcs[m] for m in members], [t.bounds[m] for m in members], t.precision, (len(members),))
                blocks.append(Tensor(_matvec(b, we, blk), _matvec_bounds(we, blk.bounds), t.precision + rho, (layer.k,)))
        K = layer.k
        merged = Tensor([lc for x in blocks for lc in x.lcs], [v for x in blocks for v in x.bounds], t.precision + rho, (P * P * K,))
        self.check(merged, where)
        before = len(self.activations)
        h_all, act_ref = self.activate(layer.activation, merged, layer.bits, where)
        out_lcs = [None] * (Wo * Ho * Co)
        out_bounds = [0] * (Wo * Ho * Co)
        for q in range(P * P):
            h = Tensor(h_all.lcs[q * K:(q + 1) * K], h_all.bounds[q * K:(q + 1) * K], h_all.precision, (K,))
            ys = _matvec(b, wd, h)
            ybs = _matvec_bounds(wd, h.bounds)
            for m, lc, bd in zip(out_idx[q // P, q % P], ys, ybs):
                out_lcs[m] = lc
                out_bounds[m] = bd
        y = self.check(Tensor(out_lcs, out_bounds, h_all.precision + rho, (Wo, Ho, Co)), where)
        wet, wdt = we.T, wd.T
        in_flat = in_idx.reshape(P * P, -1)
        out_flat = out_idx.reshape(P * P, -1)

        def ref(x):
            N = x.shape[0]
            blk = x[:, in_flat]  # (N, P*P, block)
            h = act_ref(blk.dot(wet).reshape(N, -1)).reshape(N, P * P, K)
            yb = h.dot(wdt)
            out = np.empty((N, Wo * Ho * Co), dtype=object)
            out[:, out_flat] = yb
            return out

        return y, ref, self.activations[before:]


@dataclass
class LayerReport:
    index: int
    kind: str
    label: str
    constraints: int
    lookup_tags: int
    activation_units: int
    bits: list[int]
    predicted: float | None
    formula: str
    precision_in: int
    precision_out: int
    cuts: list[int]

    @property
    def total(self) -> int:
        return self.constraints + self.lookup_tags

    @property
    def ratio(self) -> float | None:
        return self.total / self.predicted if self.predicted else None

    def to_dict(self) -> dict:
        return {
            "index": self.index, "type": self.kind, "label": self.label, "constraints": self.constraints,
            "lookup_tags": self.lookup_tags, "total": self.total, "activation_units": self.activation_units,
            "bits": self.bits, "predicted": self.predicted, "formula": self.formula, "ratio": self.ratio,
            "precision_in": self.precision_in, "precision_out": self.precision_out, "cuts": self.cuts,
        }


@dataclass
class CompiledCircuit:
    graph: ModelGraph
    builder: CircuitBuilder
    options: CompileOptions
    input_precision: int
    output_precision: int
    input_bound: int
    layer_reports: list[LayerReport]
    refs: list[Ref]
    chunk_choice: dict | None = None
    lookup_report: dict | None = None
    schedule: list[dict] = dc_field(default_factory=list)

    @property
    def cs(self) -> ConstraintSystem:
        return self.builder.cs

    @property
    def field(self) -> PrimeField:
        return self.options.field

    @property
    def mode(self) -> str:
        return self.options.mode

    @property
    def rounds(self) -> int:
        return self.builder.rounds

    @property
    def chunk_width(self) -> int | None:
        return self.options.chunk_width

    @property
    def num_outputs(self) -> int:
        return len(self.builder.output_wires)

    # -- witness ---------------------------------------------------------------------------

    def quantize_input(self, x) -> list[int]:
        arr = np.asarray(x, dtype=float).reshape(-1)
        expected = math.prod(self.graph.input_shape)
        if arr.size != expected:
            raise WitnessError(f"input has {arr.size} values, the model expects {expected}")
        q = [quantize_int(v, self.input_precision) for v in arr]
        for i, v in enumerate(q):
            if abs(v) > self.input_bound:
                raise WitnessError(
                    f"input {i} = {arr[i]} exceeds the declared input bound {self.graph.input_bound}"
                )
        return q

    def generate_witness(self, x, challenge_fn=None) -> list[int]:
        """Canonical assignment for a real-valued input; ``challenge_fn`` fills each round's challenges."""
        return self.builder.run_witness(self.quantize_input(x), challenge_fn)

    def witness_from_ints(self, q: Sequence[int], challenge_fn=None) -> list[int]:
        return self.builder.run_witness([int(v) for v in q], challenge_fn)

    def public_outputs(self, assignment: Sequence[int]) -> list[int]:
        return list(assignment[1:1 + self.num_outputs])

    def decode_outputs(self, residues: Sequence[int]) -> np.ndarray:
        scale = float(1 << self.output_precision)
        return np.array([self.field.signed_decode(v) / scale for v in residues])

    def forward_ints(self, q: np.ndarray) -> np.ndarray:
        """Integer reference inference on a batch of quantized inputs, shape (N, inputs)."""
        x = _obj(q).reshape(len(q), -1)
        for ref in self.refs:
            x = ref(x)
        return x

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Dequantized outputs of the integer reference path for a real batch (N, *input_shape)."""
        x = np.asarray(x, dtype=float)
        q = quantize_array(x.reshape(x.shape[0], -1), self.input_precision)
        out = self.forward_ints(q)
        return np.array([[float(Fraction(int(v), 1 << self.output_precision)) for v in row] for row in out])

    # -- reporting / serialization -------------------------------------------------------------

    def report(self) -> dict:
        total_direct = self.cs.num_constraints
        return {
            "mode": self.mode,
            "rho": self.options.rho,
            "field_bits": self.field.bit_size,
            "chunk_width": self.chunk_width,
            "chunk_choice": self.chunk_choice,
            "constraints": total_direct,
            "witness_size": self.cs.layout.size,
            "public_outputs": self.num_outputs,
            "input_precision": self.input_precision,
            "output_precision": self.output_precision,
            "activation_constraints": sum(r.total for r in self.layer_reports if r.activation_units),
            "layers": [r.to_dict() for r in self.layer_reports],
            "lookup": self.lookup_report,
            "schedule": self.schedule,
        }

    def to_bytes(self) -> bytes:
        return self.cs.to_bytes()

    def digest(self) -> bytes:
        return self.cs.digest()


# -- driver ----------------------------------------------------------------------------------


def _predict(kind: str, layer, acts: list[ActivationInfo], shape_in) -> tuple[float | None, str]:
    if not acts:
        return None, ""
    if kind == "se":
        W, H, C = shape_in
        phi, sigma = acts
        cells = layer.grid[0] * layer.grid[1]
        pred = cells * (C // layer.r) * phi.bits + cells * C * sigma.bits + W * H * C
        return float(pred), "(1 + 1/r) C B + H W C"
    if kind == "edconv":
        a = acts[0]
        return float(layer.p ** 2 * layer.k * a.bits), "P^2 K B"
    pred = sum(ACTIVATION_FACTOR[a.kind] * a.units * a.bits for a in acts)
    return float(pred), "units x B x table factor"


def compile_model(
    graph: ModelGraph | bytes | str | dict,
    mode: str = "groth16",
    rho: int | None = None,
    chunk_width: int | str | None = None,
    field: PrimeField = BN254_FR,
    bits: int | None = None,
) -> CompiledCircuit:
    """Compile a model; ``chunk_width`` is an int, ``"auto"`` or None (auto in ultragroth mode)."""
    if not isinstance(graph, ModelGraph):
        graph = load_model(graph)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rho = graph.rho if rho is None else rho
    if rho < 1:
        raise ScheduleError("rho must be positive")
    chunk_choice = None
    w: int | None = None
    if mode == "ultragroth":
        if chunk_width is None or chunk_width == "auto":
            dry = compile_model(graph, "groth16", rho, None, field, bits)
            units = sum(r.activation_units for r in dry.layer_reports)
            width = max([b for r in dry.layer_reports for b in r.bits] or [field.bit_size])
            choice = optimal_chunk_width(max(units, 1), width)
            chunk_choice = choice.to_dict()
            w = choice.width
        else:
            w = int(chunk_width)
    elif chunk_width not in (None, "auto"):
        raise ValueError("chunk width only applies in ultragroth mode")
    opts = CompileOptions(mode, rho, w, field, bits, graph.input_bound)
    builder = CircuitBuilder(field, rounds=1 if mode == "ultragroth" else 0)
    if w:
        builder.lookup = g.LookupArgument(builder, w)
    low = _Lowering(builder, opts)

    # outputs are allocated first so they land right after the constant wire
    n_out = math.prod(graph.output_shape)
    builder.output_wires = [builder.public() for _ in range(n_out)]
    n_in = math.prod(graph.input_shape)
    builder.begin_layer("input", "input")
    builder.input_wires = [builder.private() for _ in range(n_in)]
    builder.end_layer()
    in_bound = quantize_int(graph.input_bound, rho)
    t = Tensor([LinearCombination.wire(wi) for wi in builder.input_wires], [in_bound] * n_in, rho, graph.input_shape)
    low.check(t, "input")

    reports: list[LayerReport] = []
    refs: list[Ref] = []
    schedule: list[dict] = []
    for idx, (layer, shape_in) in enumerate(zip(graph.layers, graph.shapes[:-1])):
        where = f"layer {idx} ({layer.type})"
        count = builder.begin_layer(f"{idx}:{layer.type}", layer.type)
        p_in = t.precision
        acts: list[ActivationInfo] = []
        if isinstance(layer, Flatten):
            t = Tensor(t.lcs, t.bounds, t.precision, (len(t.lcs),))
            ref = lambda x: x  # noqa: E731
        elif isinstance(layer, Dense):
            t, ref, acts = low.dense(layer, t, where)
        elif isinstance(layer, EDLayer):
            t, ref, acts = low.ed(layer, t, where)
        elif isinstance(layer, SEBlock):
            t, ref, acts = low.se(layer, t, where)
        elif isinstance(layer, EDConv):
            t, ref, acts = low.edconv(layer, t, where)
        else:
            raise ScheduleError(f"{where}: unsupported layer")
        builder.end_layer()
        refs.append(ref)
        pred, formula = _predict(layer.type, layer, acts, shape_in)
        if w and acts:
            # the formulas count bit decompositions; with lookups the cost moves to the lookup block
            pred, formula = None, "chunks tagged into the lookup; see the lookup report"
        reports.append(LayerReport(
            idx, layer.type, count.label, count.constraints, count.lookup_tags,
            sum(a.units for a in acts), [a.bits for a in acts], pred, formula, p_in, t.precision,
            [a.cut for a in acts],
        ))
        schedule.append({
            "layer": idx, "type": layer.type, "precision_in": p_in, "precision_out": t.precision,
            "bound_bits": t.max_bound.bit_length(),
            "activations": [a.__dict__ for a in acts],
        })

    count = builder.begin_layer("outputs", "output")
    for wire, lc in zip(builder.output_wires, t.lcs):
        builder.enforce(1, lc, LinearCombination.wire(wire))

        def bind(ctx: WitnessContext, wire=wire, lc=lc) -> None:
            ctx[wire] = ctx.eval(lc)

        builder.step(bind)
    builder.end_layer()
    reports.append(LayerReport(len(graph.layers), "output", count.label, count.constraints, 0, 0, [], float(n_out),
                               "one binding per output", t.precision, t.precision, []))
    lookup_report = None
    if builder.lookup is not None:
        lk = builder.lookup.finalize()
        tags = lk.extra["tags"]
        bmax = max([b for r in reports for b in r.bits] or [0])
        units = sum(r.activation_units for r in reports)
        lookup_report = {
            "chunk_width": w, "table_size": 1 << w, "tags": tags, "constraints": lk.constraints,
            "predicted_lookup_cost": lookup_cost(max(units, 1), bmax, w) if bmax else None,
            "activation_units": units, "max_bits": bmax,
        }
    builder.cs.meta = {
        "format": 1,
        "model": graph.to_dict(),
        "mode": mode,
        "rho": rho,
        "chunk_width": w,
        "bits": bits,
        "field": str(field.modulus),
        "output_precision": t.precision,
    }
    builder.cs.finalize()
    return CompiledCircuit(graph, builder, opts, rho, t.precision, in_bound, reports, refs, chunk_choice,
                           lookup_report, schedule)


def compile_from_meta(meta: dict) -> CompiledCircuit:
    """Rebuild a compiled circuit from the metadata section of a circuit file."""
    field_mod = int(meta["field"])
    field = BN254_FR if field_mod == BN254_FR.modulus else PrimeField(field_mod)
    return compile_model(load_model(meta["model"]), meta["mode"], meta["rho"], meta["chunk_width"], field, meta.get("bits"))
