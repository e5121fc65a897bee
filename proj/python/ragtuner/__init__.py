"""Declarative RAG pipelines with Bayesian hyper-parameter tuning."""

from ._ragtuner import (
    DemStore,
    ElementId,
    GpSurrogate,
    PipelineSpec,
    RagtunerError,
    chunk_spans,
    embed_stub,
    expected_improvement,
    extract_triples,
    f1_answer,
    generate_stub,
    parse_spec,
    parse_spec_file,
    ppr,
    recall_at_k,
    run_pipeline,
    tune,
    validate_spec_file,
    __version__,
)

__all__ = [
    "DemStore",
    "ElementId",
    "GpSurrogate",
    "PipelineSpec",
    "RagtunerError",
    "chunk_spans",
    "embed_stub",
    "expected_improvement",
    "extract_triples",
    "f1_answer",
    "generate_stub",
    "parse_spec",
    "parse_spec_file",
    "ppr",
    "recall_at_k",
    "run_pipeline",
    "tune",
    "validate_spec_file",
    "__version__",
]
