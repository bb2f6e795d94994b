"""Bump-function glue maps, approach sequences and the assembled map G."""
from .approach import ApproachSequence, Inequality, build_approach, snap_target
from .bump import (
    K_MAX,
    bump_deriv,
    bump_eval,
    bump_integral,
    bump_values,
    normalization,
    sup_norm,
)
from .diffeo import (
    DiffeoAssembly,
    Piece,
    assemble_diffeo,
    certify_lipschitz,
    certify_smooth_at_target,
    default_scales,
)
from .family import (
    EquivExplorer,
    FamilyF,
    Witness,
    blocking_demo,
    explore_equivalence,
    family_witness,
)
from .maps import GlueSpec, LineSpec, glue_deriv, glue_derivs, glue_eval, glue_values, member_from_json

__all__ = [
    "ApproachSequence",
    "DiffeoAssembly",
    "EquivExplorer",
    "FamilyF",
    "GlueSpec",
    "Inequality",
    "K_MAX",
    "LineSpec",
    "Piece",
    "Witness",
    "assemble_diffeo",
    "blocking_demo",
    "build_approach",
    "bump_deriv",
    "bump_eval",
    "bump_integral",
    "bump_values",
    "certify_lipschitz",
    "certify_smooth_at_target",
    "default_scales",
    "explore_equivalence",
    "family_witness",
    "glue_deriv",
    "glue_derivs",
    "glue_eval",
    "glue_values",
    "member_from_json",
    "normalization",
    "snap_target",
    "sup_norm",
]
