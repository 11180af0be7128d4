"""
Análisis de la propiedad de norma 1, continuidad y localización conjunta.
"""

from .continuity import (
    AbsoluteContinuityAudit,
    ContinuityReport,
    RefinementSequence,
    absolute_continuity_audit,
    default_refinement_sequences,
    point_shrinking_sequence,
    refinement_check,
)
from .events import TaggedEvent, enumerate_events, needs_random_events
from .joint import JointBound, axis_event, joint_localization_bound
from .norm1 import (
    NecessaryConditionTrend,
    NecessaryConditionVerdict,
    Norm1Report,
    necessary_condition_family,
    necessary_condition_verdict,
    norm1_report,
)
from .scaling import ScalingFit, cell_shrink_scaling

__all__ = [
    "AbsoluteContinuityAudit",
    "ContinuityReport",
    "JointBound",
    "NecessaryConditionTrend",
    "NecessaryConditionVerdict",
    "Norm1Report",
    "RefinementSequence",
    "ScalingFit",
    "TaggedEvent",
    "absolute_continuity_audit",
    "axis_event",
    "cell_shrink_scaling",
    "default_refinement_sequences",
    "enumerate_events",
    "joint_localization_bound",
    "necessary_condition_family",
    "necessary_condition_verdict",
    "needs_random_events",
    "norm1_report",
    "point_shrinking_sequence",
    "refinement_check",
]
