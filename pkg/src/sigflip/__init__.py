"""Construct, decompose and verify signature-type-changing metrics."""

from sigflip.expr import Expression, eval_dual, parse
from sigflip.geometry import (
    Chart,
    MetricField,
    SignatureReport,
    VectorField,
    evaluate_metric,
    flat,
    metric_determinant,
    orthonormal_frame,
    signature_at,
)
from sigflip.hypersurface import (
    HPoint,
    RadicalClass,
    classify_radical,
    induced_metric_on_H,
    locate_hypersurface,
    positivity_check,
    radical_at,
    verify_biconditional,
    verify_det_factorization,
)
from sigflip.transform import (
    Triple,
    decompose_field,
    decompose_point,
    normalize_against,
    rescaling_image,
    triples_equivalent,
)

__version__ = "0.1.0"
