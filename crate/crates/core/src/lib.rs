//! Weakly secure MDS coding for simple multiple access networks.
//!
//! A simple multiple access network (SMAN) routes `k` unit-rate sources to
//! one sink through `n` relays. This crate decides whether such a topology
//! admits a relay coding scheme that is simultaneously MDS (the sink
//! tolerates `floor((n - k + 1) / 2)` corrupted relays) and weakly secure
//! (an eavesdropper reading fewer than `k` relay packets learns nothing
//! about any individual source packet), and then does everything around
//! that decision:
//!
//! - [`sman`]: the adjacency-matrix model and the subset-enumeration
//!   checkers (MDS Condition, Weak Security Condition in column and row
//!   form, block-security conditions and profile);
//! - [`flowverify`]: the polynomial-time max-flow verifier equivalent to
//!   the brute-force checkers;
//! - [`trim`]: sparsification to the extremal topology with exactly
//!   `n - k + 2` links per source, preserving the condition throughout;
//! - [`codegen`]: randomized construction of concrete encoding matrices
//!   over a prime field, with exact algebraic verifiers, Cauchy matrices
//!   for dense networks, and brute-force encode/decode;
//! - [`oracle`]: exhaustive conditional-entropy computations certifying
//!   weak and block security of a concrete matrix, in exact q-ary units;
//! - [`gf`]: the underlying prime-field scalar and matrix arithmetic.

pub mod codegen;
pub mod flowverify;
pub mod gf;
pub mod oracle;
pub mod sman;
pub mod trim;

pub use codegen::{
    cauchy_code, construct_code, decode_nearest, min_distance, verify_mds_code,
    verify_weak_security_code, CodegenError, Codeword, Construction, Decoded, EncodingMatrix,
    Message,
};
pub use flowverify::{check_min_cut_condition, min_cut_report, FlowNetwork, MinCutReport};
pub use gf::{FieldElement, FieldMatrix, FieldPrime, GfError};
pub use oracle::{
    block_security_level_by_rank, block_security_level_of_code, check_block_security_exact,
    check_weak_security_by_rank, check_weak_security_exact, conditional_entropy,
    independence_rank_criterion, EntropyValue, OracleError, DEFAULT_ENUMERATION_BUDGET,
};
pub use sman::{SecurityProfile, Sman, SmanError, SupportSets, Verdict, Witness};
pub use trim::{trim, trim_step, trim_with, TrimError, TrimOutcome, TrimVerifier};
