"""twkit: desk-scale treewidth surgery and transduction pipeline tools."""

from .core import (
    Graph,
    RootedForest,
    TreeDecomposition,
    Violation,
    is_valid_decomposition,
    margin_map,
    validate_decomposition,
)
from .factorization import (
    Factor,
    Factorization,
    complement_bounds_check,
    is_factor,
    maximal_factorization,
    removal_bound_check,
    union_factors,
)
from .sepforest import (
    SeparationForest,
    check_connected_tree_factors,
    induced_decomposition,
    is_reduced,
    reduce_forest,
    sepforest_from_decomposition,
    sepforest_width,
)
from .words import (
    ColoredWord,
    dealternate_word,
    is_block_shuffle,
    swap_blocks,
    word_stats,
)
from .dealternation import (
    SpineAnalysis,
    Tripartition,
    analyze_context,
    f_bound,
    g_bound,
    global_dealternate,
    h_bound,
    local_dealternate,
    t_alternation,
)
from .conflict import (
    ConflictWitness,
    Stain,
    color_conflict_graph,
    conflict_graph,
    decode_witness,
    encode_witness,
    max_stain_load,
    stain,
)
from .oracle import (
    enumerate_factors,
    exact_treewidth,
    optimum_decomposition,
    optimum_reduced_sepforest,
)
from .errors import DecodeError, GuardError, ParseError

__version__ = "0.1.0"
__all__ = [name for name in dir() if not name.startswith("_")]
