"""Monadic second-order transduction pipelines and their normal form."""

from .formulas import (
    And,
    Const,
    Eq,
    Exists,
    FALSE,
    Forall,
    Formula,
    Implies,
    Mem,
    Not,
    Or,
    Rel,
    TRUE,
    formula_size,
    free_variables,
    is_set_var,
    parse_formula,
    relativize,
    satisfies,
    substitute_atoms,
    write_formula,
)
from .structures import (
    RelationalStructure,
    canonical_key,
    isomorphic,
    random_structure,
    structure_size,
)
from .pipeline import (
    ColorStep,
    CopyStep,
    FilterStep,
    InterpretStep,
    RenameStep,
    RestrictStep,
    TransductionPipeline,
    evaluate_pipeline,
    evaluate_step,
    parse_pipeline,
    pipeline_size,
    step_kind,
    write_pipeline,
)
from .rewrite import is_normal_shape, normalize
from .equivalence import EquivalenceReport, check_equivalence

__all__ = [name for name in dir() if not name.startswith("_")]
