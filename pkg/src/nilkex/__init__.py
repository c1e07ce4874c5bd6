"""Multilinear maps from commutators in nilpotent groups, key exchange built on them, and attacks."""

from .attacks import (
    AttackReport,
    DlpInstance,
    DlpResult,
    break_protocol1_ut,
    break_protocol2_ut,
    dlp_bruteforce,
    dlp_bsgs,
    extract_exponent_ut,
)
from .commutators import (
    ClassCertificate,
    EngelCertificate,
    certify_class,
    certify_engel,
    commutator,
    engel_commutator,
    find_nondegenerate_witness,
    multilinear_e,
    multilinear_e_prime,
    simple_commutator,
    verify_lemma1,
    verify_product_form,
    verify_property_1,
    verify_proposition,
)
from .errors import (
    DecodeError,
    NilkexError,
    NotAPowerError,
    PlatformError,
    PlatformMismatchError,
    SetupError,
    UnsupportedPlatformError,
)
from .groups import (
    GroupElement,
    Platform,
    UnitriangularGroup,
    UTMatrix,
    WreathElement,
    WreathGroup,
    deserialize,
    group_identity,
    inverse,
    multiply,
    parse_platform,
    power,
    serialize,
)
from .modular import Modulus, Residue
from .protocols import (
    BroadcastMessage,
    SessionParams,
    SharedKey,
    Transcript,
    UserState,
    derive_key,
    random_session_params,
    round_broadcast,
    run_session,
    setup_session,
)

__version__ = "0.1.0"
