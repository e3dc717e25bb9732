"""Group classification machinery: casebook, classifying equations, engine."""
from .casebook import CaseInstance, CaseRecord, ConstraintError, casebook, record, table_ids
from .engine import (ClassificationResult, ClassifyConfig, NotInClass, UnverifiedMatch,
                     canonical_form, classify, subclass_classify)
from .quintuples import (ClassifyingEq, Lemma1Result, NotReducible, QuintupleBasis,
                         canonical_pair, commutator, lemma1_canonicalize, lemma2_check,
                         matrix_rank, minor_conditions, satisfied_classifying_eqs)

__all__ = [
    "CaseInstance", "CaseRecord", "ClassificationResult", "ClassifyConfig", "ClassifyingEq",
    "ConstraintError", "Lemma1Result", "NotInClass", "NotReducible", "QuintupleBasis",
    "UnverifiedMatch", "canonical_form", "canonical_pair", "casebook", "classify",
    "commutator", "lemma1_canonicalize", "lemma2_check", "matrix_rank", "minor_conditions",
    "record", "satisfied_classifying_eqs", "subclass_classify", "table_ids",
]
