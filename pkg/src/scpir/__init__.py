"""Capacity-achieving storage-constrained private information retrieval.

Placement (filling problem, iterative fill, non-integer split), full-storage
PIR per segment, scheme composition and an in-process simulator with audits.
"""

from .fspir import DecodeError, QueryPlan, SymbolId, answer, canonical_form, decode, generate_queries
from .model import (
    MessageLibrary,
    PlacementPlan,
    Rational,
    Segment,
    SegmentPartition,
    StorageProfile,
    as_rational,
    capacity_fspir,
    capacity_scpir,
)
from .placement import (
    FillKind,
    IterationTrace,
    PlacementError,
    build_placement,
    fill_iterative,
    fp_feasible,
    fp_oracle_solve,
    partition_cyclic,
    partition_disjoint,
    place_iterative,
    split_storage,
    validate_plan,
)
from .scheme import SCPIRScheme, build_scheme, compose_rate, minimum_message_length
from .simnet import (
    AuditReport,
    DatabaseNode,
    Transcript,
    audit_decode,
    audit_privacy,
    audit_storage,
    provision,
    retrieve,
)

__version__ = "0.1.0"
