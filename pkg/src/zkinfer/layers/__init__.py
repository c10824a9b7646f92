"""Model ingestion and the model-to-R1CS compiler."""
from .model import (
    ACTIVATIONS,
    Dense,
    EDConv,
    EDLayer,
    Flatten,
    ModelError,
    ModelGraph,
    SEBlock,
    load_model,
)
from .chunks import ChunkChoice, chunk_cost, lookup_cost, optimal_chunk_width, stationary_point
from .compiler import CompiledCircuit, ScheduleError, compile_from_meta, compile_model

__all__ = [
    "ACTIVATIONS", "Dense", "EDConv", "EDLayer", "Flatten", "ModelError", "ModelGraph", "SEBlock",
    "load_model", "ChunkChoice", "chunk_cost", "lookup_cost", "optimal_chunk_width", "stationary_point",
    "CompiledCircuit", "ScheduleError", "compile_from_meta", "compile_model",
]
