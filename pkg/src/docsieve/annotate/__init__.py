from .extractors import (
    CompiledExtractor,
    ExtractorRegistry,
    canonical_number,
    consistency_ensemble,
    find_dates,
    find_numbers,
    keyed_pattern_for,
    parse_date_value,
)
from ..hints import ExtractorConfig, Normalization
from .protocol import (
    HttpAnnotatorClient,
    SubprocessAnnotatorClient,
    validate_transcript,
)
from .runner import (
    AnnotationBatch,
    AnnotationRecord,
    annotate_document,
    resolve_extractors,
    run_annotation,
)

__all__ = [
    "AnnotationBatch",
    "AnnotationRecord",
    "CompiledExtractor",
    "ExtractorConfig",
    "ExtractorRegistry",
    "HttpAnnotatorClient",
    "Normalization",
    "SubprocessAnnotatorClient",
    "annotate_document",
    "canonical_number",
    "consistency_ensemble",
    "find_dates",
    "find_numbers",
    "keyed_pattern_for",
    "parse_date_value",
    "resolve_extractors",
    "run_annotation",
    "validate_transcript",
]
