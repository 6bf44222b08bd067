"""Exact tools for the Skitovich-Darmois equation on a-adic solenoids and
finite abelian groups."""

from .box import TestBox
from .charfn import (
    FiniteSupport,
    Gaussian,
    Idempotent,
    PhaseChar,
    TwoLevelOnSubgroup,
    evaluate,
    modulus_square,
    pd_check_cyclic,
    product,
)
from .constructions import (
    ConstructionManifest,
    build_lemma37_case1,
    build_thm41_part2,
    check_manifest,
    lemma_compgr_conditions,
    obstruction_check,
)
from .errors import SDLabError
from .solenoid import INF, Subgroup, SupernaturalSpec, classify_solenoid, contains, halve, is_automorphism
from .values import Approx, Exact
from .verifier import FormsMatrix, halving_solve, verify_on_box

__version__ = "0.1.0"
