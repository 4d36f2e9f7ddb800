//! Numerical tolerances shared across the crate.

/// Maximum asymmetry `|a_ij + a_ji|` accepted when constructing a [`LieElement`](crate::LieElement).
pub const SYM: f64 = 1e-12;

/// Maximum deviation of a basis Gram matrix from the identity.
pub const ORTH: f64 = 1e-12;

/// Rank cutoff: singular values below `RANK * max(σ_max, 1)` count as zero.
pub const RANK: f64 = 1e-9;

/// General absolute tolerance for identities between O(1) quantities.
pub const NUM: f64 = 1e-9;

/// Normalized residual below which a structure is a class member.
pub const MEMBER: f64 = 1e-9;

/// Normalized residual above which non-membership is asserted.
pub const NON_MEMBER: f64 = 1e-3;

/// Operator equality cutoff used when deduplicating generated structures.
pub const DEDUP: f64 = 10.0 * NUM;
