//! Jordan block sizes of nilpotent elements `e` (and unipotent elements
//! `u`) of `SL(V)`, `Sp(V)` and `SO(V)` acting on `V ⊗ V*`, `∧²V`, `S²V`,
//! `gl(V)`, `sl(V)`, `psl(V) = L(ϖ₁ + ϖ_{n-1})`, `L(ϖ₂)` and `L(2ϖ₁)` over
//! fields of prime characteristic.
//!
//! Two independent routes are provided:
//!
//! * [`theorem`]: closed partition rewriting rules on top of the
//!   decomposition of `V` into Jordan blocks;
//! * [`operator`]: explicit matrices over GF(p) for the whole module, with
//!   Jordan types read off from exact ranks ([`gfp`]).
//!
//! [`harness`] sweeps both routes over all partitions in a range.

pub mod arith;
pub mod error;
pub mod gfp;
pub mod harness;
pub mod jordan;
pub mod operator;
pub mod table;
pub mod theorem;

pub use arith::Prime;
pub use error::{Error, Result};
pub use gfp::{jordan_type_of_nilpotent, GFpMatrix};
pub use harness::{
    enumerate_partitions, run_sweep, verify_lemma_identities, DiscrepancyReport, SweepConfig,
};
pub use jordan::{validate_partition_for_group, Family, GroupContext, JordanType};
pub use operator::{oracle_type, oracle_type_for, Element, Isogeny, ModuleSpec, NilpotentOperator};
pub use theorem::{
    full_pipeline, rule_corollary, rule_psl, rule_sl, unipotent_nilpotent_agree_on_psl,
};
