"""Circuit construction state shared by gadgets and the layer compiler.

A :class:`CircuitBuilder` pairs a :class:`ConstraintSystem` with an ordered witness
program. Each step is tagged with the phase it runs in: phase ``k`` runs once the
challenges of round ``k - 1`` are known, so values committed before a challenge never
depend on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

from .algebra.field import PrimeField
from .r1cs import ONE, ConstraintSystem, LinearCombination, as_lc


class WitnessError(Exception):
    """An honest witness could not be produced (bound violation, bad input shape)."""


class ChallengeCollision(WitnessError):
    """A challenge hit a pole of the lookup identity; the prover must resample."""


Step = Callable[["WitnessContext"], None]


@dataclass
class StepRecord:
    phase: int
    label: str
    fn: Step


class WitnessContext:
    """Mutable wire values during witness generation, indexed by wire id."""

    def __init__(self, field: PrimeField, num_wires: int):
        self.field = field
        self.p = field.modulus
        self.values: list[int | None] = [None] * num_wires
        self.values[ONE] = 1

    def __getitem__(self, w: int) -> int:
        v = self.values[w]
        if v is None:
            raise WitnessError(f"wire {w} read before it was assigned")
        return v

    def __setitem__(self, w: int, v: int) -> None:
        self.values[w] = int(v)

    def eval(self, lc: LinearCombination) -> int:
        """Signed integer value of a linear combination."""
        vals = self.values
        acc = 0
        for w, c in lc.terms.items():
            v = vals[w]
            if v is None:
                raise WitnessError(f"wire {w} read before it was assigned")
            acc += c * v
        return self.field.signed_decode(acc % self.p)

    def eval_mod(self, lc: LinearCombination) -> int:
        acc = 0
        for w, c in lc.terms.items():
            acc += c * self[w]
        return acc % self.p


@dataclass
class LayerCount:
    label: str
    kind: str
    constraints: int = 0
    lookup_tags: int = 0
    extra: dict = dc_field(default_factory=dict)

    @property
    def total(self) -> int:
        # every tagged chunk costs one constraint when the lookup is finalized
        return self.constraints + self.lookup_tags


class CircuitBuilder:
    def __init__(self, field: PrimeField, rounds: int = 0):
        self.field = field
        self.cs = ConstraintSystem(field, rounds)
        self.rounds = rounds
        self.steps: list[StepRecord] = []
        self.label = "circuit"
        self.counts: list[LayerCount] = []
        self._current: LayerCount | None = None
        self.lookup = None
        self.input_wires: list[int] = []
        self.output_wires: list[int] = []
        self.challenge_wires: list[list[int]] = [[] for _ in range(rounds)]

    # -- wires & constraints ---------------------------------------------------------

    def public(self) -> int:
        return self.cs.alloc_public()

    def private(self, rnd: int | None = None) -> int:
        return self.cs.alloc_private(rnd)

    def challenge(self, rnd: int = 0) -> int:
        w = self.cs.alloc_challenge(rnd)
        self.challenge_wires[rnd].append(w)
        return w

    def enforce(self, left, right, output) -> None:
        self.cs.enforce(as_lc(left), as_lc(right), as_lc(output))
        if self._current is not None:
            self._current.constraints += 1

    def enforce_boolean(self, x) -> None:
        x = as_lc(x)
        self.enforce(x, x - 1, 0)

    def step(self, fn: Step, phase: int = 0, label: str | None = None) -> None:
        self.steps.append(StepRecord(phase, label or self.label, fn))

    # -- bookkeeping -------------------------------------------------------------------

    def begin_layer(self, label: str, kind: str) -> LayerCount:
        self.label = label
        self._current = LayerCount(label, kind)
        self.counts.append(self._current)
        return self._current

    def end_layer(self) -> None:
        self._current = None
        self.label = "circuit"

    def count_tag(self, k: int = 1) -> None:
        if self._current is not None:
            self._current.lookup_tags += k

    # -- witness -------------------------------------------------------------------------

    def run_witness(
        self,
        inputs: Sequence[int],
        challenge_fn: Callable[[int, list[int]], Sequence[int]] | None = None,
    ) -> list[int]:
        """Execute the program and return the canonical assignment.

        ``challenge_fn(round, partial)`` receives the canonical assignment known so far
        (unassigned wires read as 0) and returns the round's challenge values.
        """
        if len(inputs) != len(self.input_wires):
            raise WitnessError(f"expected {len(self.input_wires)} inputs, got {len(inputs)}")
        ctx = WitnessContext(self.field, self.cs.num_wires)
        for w, v in zip(self.input_wires, inputs):
            ctx[w] = v
        for phase in range(self.rounds + 1):
            if phase > 0:
                rnd = phase - 1
                partial = self.cs.to_canonical([v or 0 for v in ctx.values])
                if challenge_fn is None:
                    raise WitnessError("this circuit needs a challenge callback")
                vals = list(challenge_fn(rnd, partial))
                if len(vals) != len(self.challenge_wires[rnd]):
                    raise WitnessError(f"round {rnd} needs {len(self.challenge_wires[rnd])} challenges")
                for w, v in zip(self.challenge_wires[rnd], vals):
                    ctx[w] = v % self.field.modulus
            for rec in self.steps:
                if rec.phase == phase:
                    try:
                        rec.fn(ctx)
                    except WitnessError as exc:
                        if str(exc).startswith(f"[{rec.label}]"):
                            raise
                        raise type(exc)(f"[{rec.label}] {exc}") from None
        missing = [w for w, v in enumerate(ctx.values) if v is None]
        if missing:
            raise WitnessError(f"{len(missing)} wires left unassigned (first: {missing[0]})")
        return self.cs.to_canonical(ctx.values)
