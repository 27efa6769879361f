"""K-theory of monoid schemes: Grothendieck groups, Burnside rings, Q-construction."""

from .burnside import BurnsideReport, burnside, subgroups
from .g0 import g0_affine_truncated, g0_p1_truncated, k0_image_in_g0_pn
from .grothendieck import GroupRingReport, K0Report, RelationError, grothendieck_group, k0_affine, k0_integral_scheme
from .qconstruction import (
    QNerve,
    QuasiExactError,
    build_q_category,
    family_grothendieck,
    free_family,
    pi1_of_classifying_space,
    pointed_sets_family,
    stable_aut_abelianization,
)

__all__ = [
    "BurnsideReport",
    "GroupRingReport",
    "K0Report",
    "QNerve",
    "QuasiExactError",
    "RelationError",
    "build_q_category",
    "burnside",
    "family_grothendieck",
    "free_family",
    "g0_affine_truncated",
    "g0_p1_truncated",
    "grothendieck_group",
    "k0_affine",
    "k0_image_in_g0_pn",
    "k0_integral_scheme",
    "pi1_of_classifying_space",
    "pointed_sets_family",
    "stable_aut_abelianization",
    "subgroups",
]
