"""
soficlab - finite permutation approximations (sofic quasi-actions) of graph products
"""

__version__ = "0.1.0"

from soficlab.ball_group import build_ball_group, check_relator_freeness, words_equal_bounded
from soficlab.bass_serre import (
    GraphOfGroups,
    fundamental_presentation,
    hnn_amalgam_decomposition,
    integer_line_chain,
    render_presentation,
    spanning_tree,
)
from soficlab.core_groups import (
    FiniteGroup,
    IntegerGroup,
    Partition,
    Permutation,
    cyclic_group,
    group_from_cayley_table,
    partition_join,
    regular_action,
    similarity_defect,
    symmetric_group,
)
from soficlab.graph_products import (
    GPContext,
    SimpleGraph,
    k_normal_form,
    multiply,
    normalize,
    rewrite_concat_counting,
)
from soficlab.quasi_actions import (
    QuasiActionTable,
    degrade,
    is_sofic_witness,
    product_quasi_action,
    verify_special,
)
from soficlab.sofic_builder import VertexAction, build_construction, measure_conditions

__all__ = [
    "FiniteGroup",
    "GPContext",
    "GraphOfGroups",
    "IntegerGroup",
    "Partition",
    "Permutation",
    "QuasiActionTable",
    "SimpleGraph",
    "VertexAction",
    "build_ball_group",
    "build_construction",
    "check_relator_freeness",
    "cyclic_group",
    "degrade",
    "fundamental_presentation",
    "group_from_cayley_table",
    "hnn_amalgam_decomposition",
    "integer_line_chain",
    "is_sofic_witness",
    "k_normal_form",
    "measure_conditions",
    "multiply",
    "normalize",
    "partition_join",
    "product_quasi_action",
    "regular_action",
    "rewrite_concat_counting",
    "render_presentation",
    "similarity_defect",
    "spanning_tree",
    "symmetric_group",
    "verify_special",
    "words_equal_bounded",
]
