//! Canonical f-structures on the flag manifolds `SO(n)/SO(2)×SO(n−3)`.
//!
//! The flag manifold is realized as a homogeneous Φ-space of even order `k`
//! generated by conjugation with a block-diagonal orthogonal matrix. From the
//! canonical reductive complement `m` and the restricted automorphism `θ` the
//! crate generates every canonical f-structure and almost product structure
//! as a polynomial in `θ`, builds the two-parameter family of invariant
//! Riemannian metrics `g(s,t)`, and decides for each f-structure whether it is
//! Killing, nearly Kähler or `G1` as a function of `(s, t)`.
//!
//! All computation happens on the tangent space at the base point, with
//! `so(n)` represented by real skew-symmetric matrices.
//!
//! Module map:
//!
//! - [`liealg`]: brackets, the trace form and subspace machinery on `so(n)`.
//! - [`phispace`]: the generating automorphism and the decomposition `g = h ⊕ m`.
//! - [`canonical`]: polynomial generators for f-structures and product structures.
//! - [`metricgeom`]: the splitting `m = m1 ⊕ m2 ⊕ m3`, metrics and the Nomizu function.
//! - [`classify`]: class membership, parameter sweeps and characteristic sets.
//! - [`report`]: run configuration, the verification suite and report serialization.
//!
//! The `examples/` directory of this crate has a runnable program for each
//! of these capabilities.

pub mod canonical;
pub mod classify;
pub mod error;
pub mod liealg;
pub mod metricgeom;
pub mod phispace;
pub mod report;
pub mod tol;

pub use canonical::{CanonicalStructure, StructureKind};
pub use classify::{CharacteristicSet, ClassCondition, ClassReport, Membership};
pub use error::{FlagError, Result};
pub use liealg::{EndoOnM, LieElement, Subspace};
pub use metricgeom::{MetricParams, TripleSplit, UMethod};
pub use phispace::{AutomorphismSpec, PhiSpace};
