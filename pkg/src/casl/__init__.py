"""Exact causal abstraction over finite structural causal models.

Models, alignments, audit studies and norm comparisons, with a small
declaration language and a command-line front end.
"""

from __future__ import annotations

from .abstraction import (
    ALL_COMPLETE_CLUSTERS,
    ALL_JOINT_CLUSTERS,
    DEFAULT_AGGREGATOR,
    Aggregator,
    AggregatorKind,
    Alignment,
    AmbiguityReport,
    ClusterSpec,
    ConsistencyReport,
    InterventionFamily,
    QuotientResult,
    ambiguity_report,
    approx_consistency_average_effects,
    approx_consistency_tv,
    build_alignment,
    check_exact_consistency,
    compose_alignments,
    identity_alignment,
    induced_high_intervention,
    preimage_interventions,
    push_distribution,
    quotient_high_model,
    resolve_interventions,
)
from .audit import (
    AuditReport,
    PopulationModel,
    RaceRule,
    ResumeProjection,
    assign_race,
    atypicality_report,
    audit_effect,
    audit_validity_check,
    build_social_construction,
    population_for_resume,
    positivity_check,
    race_effect,
)
from .norms import AlignmentPair, HighContrast, NormReport, attribute_effect, norm_effect, reclassification_summary
from .scm import (
    EMPTY,
    SCM,
    Distribution,
    Intervention,
    build_scm,
    effect_contrast,
    enumeration_cap,
    evaluate_world,
    interventional_distribution,
    observational_distribution,
    sample_distribution,
    total_variation,
    unit_counterfactual,
)

__all__ = [
    "ALL_COMPLETE_CLUSTERS",
    "ALL_JOINT_CLUSTERS",
    "DEFAULT_AGGREGATOR",
    "EMPTY",
    "SCM",
    "Aggregator",
    "AggregatorKind",
    "Alignment",
    "AlignmentPair",
    "AmbiguityReport",
    "AuditReport",
    "ClusterSpec",
    "ConsistencyReport",
    "Distribution",
    "HighContrast",
    "Intervention",
    "InterventionFamily",
    "NormReport",
    "PopulationModel",
    "QuotientResult",
    "RaceRule",
    "ResumeProjection",
    "ambiguity_report",
    "approx_consistency_average_effects",
    "approx_consistency_tv",
    "assign_race",
    "atypicality_report",
    "attribute_effect",
    "audit_effect",
    "audit_validity_check",
    "build_alignment",
    "build_scm",
    "build_social_construction",
    "check_exact_consistency",
    "compose_alignments",
    "effect_contrast",
    "enumeration_cap",
    "evaluate_world",
    "identity_alignment",
    "induced_high_intervention",
    "interventional_distribution",
    "norm_effect",
    "observational_distribution",
    "population_for_resume",
    "positivity_check",
    "preimage_interventions",
    "push_distribution",
    "quotient_high_model",
    "race_effect",
    "reclassification_summary",
    "resolve_interventions",
    "sample_distribution",
    "total_variation",
    "unit_counterfactual",
]
