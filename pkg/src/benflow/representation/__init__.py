"""Representative functions of monotone and semi-monotone operators."""

from benflow.representation.base import Representative, ShiftedRepresentative, shift_by_linear
from benflow.representation.certify import CertReport, certify_representative, dump_rows
from benflow.representation.grid import (
    ConductivityFamily,
    EllipticRepresentative,
    PivotRepresentative,
    elliptic_representative,
    pivot_representative,
)
from benflow.representation.scalar import (
    FbRepresentative,
    FenchelRepresentative,
    FitzpatrickRepresentative,
    InfConvolution,
    ParamMonotoneFamily,
    SemimonoRepresentative,
    fb_family,
    fenchel_representative,
    fitzpatrick_eval,
    fitzpatrick_representative,
    inf_convolution,
    multiplier_family,
    semimono_representative,
)

__all__ = [
    "CertReport",
    "ConductivityFamily",
    "EllipticRepresentative",
    "FbRepresentative",
    "FenchelRepresentative",
    "FitzpatrickRepresentative",
    "InfConvolution",
    "ParamMonotoneFamily",
    "PivotRepresentative",
    "Representative",
    "SemimonoRepresentative",
    "ShiftedRepresentative",
    "certify_representative",
    "dump_rows",
    "elliptic_representative",
    "fb_family",
    "fenchel_representative",
    "fitzpatrick_eval",
    "fitzpatrick_representative",
    "inf_convolution",
    "multiplier_family",
    "pivot_representative",
    "semimono_representative",
    "shift_by_linear",
]
