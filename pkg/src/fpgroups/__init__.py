"""Finitely presented group toolkit: presentation algebra, exact integer
homology, quotient-embedding and central-extension constructions, and
brute-force finite quotient search."""

from .presentations import (
    FinitePresentation,
    Generator,
    GeneratorMap,
    ParseError,
    PresentationError,
    Word,
    commutator,
    direct_product,
    euler_characteristic,
    exponent_matrix,
    free_reduce,
    parse_presentation,
    parse_word,
    tietze_simplify,
)
from .homology import (
    AbelianInvariants,
    IntMatrix,
    SmithDecomposition,
    abelianization_invariants,
    h2_rank_2complex,
    smith_normal_form,
    solve_integer_system,
)
from .constructions import (
    FibreProductGenerators,
    NotPerfectError,
    RipsOutput,
    SchemeExhausted,
    TubularBundleData,
    enumerate_tubular_bundles,
    fibre_product_generators,
    fibre_product_presentation_finite_quotient,
    higman_presentation,
    j_construction,
    rips_construction,
    small_cancellation_ratio,
    tubular_bundle_presentation,
    uce_defect_words,
    uce_presentation,
)
from .finite_quotients import (
    CatalogBoundError,
    CosetLimitExceeded,
    CosetTable,
    EpiCountReport,
    PermGroup,
    SimpleQuotientReport,
    alternating_group,
    catalog_group,
    catalog_up_to,
    count_homomorphisms,
    epi_count,
    epi_count_report,
    epi_exists,
    fibre_epi_count_formula,
    hom_count,
    psl2,
    reidemeister_schreier,
    simple_quotients_up_to,
    todd_coxeter,
    validate_witness,
)
from .pipeline import (
    Fingerprint,
    PairReport,
    TheoremBReport,
    fingerprint,
    pipeline_grothendieck,
    pipeline_theorem_b,
)

__version__ = "0.1.0"
