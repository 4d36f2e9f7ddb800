//! Homogeneous Φ-spaces generated by conjugation with a block-diagonal
//! orthogonal matrix, and their canonical reductive decomposition.
//!
//! For the flag manifold `SO(n)/SO(2)^m × SO(n−2m−1)` the generating matrix is
//! `B = diag{1, ε_1, …, ε_m, −1, …, −1}` with `ε_t` the rotation by `2πt/k`.
//! Conjugation `φ(X) = B X B⁻¹` is an automorphism of `so(n)` of order `k`;
//! `h = ker(φ − id)` and `m = im(φ − id)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FlagError, Result};
use crate::liealg::{self, bracket, so_dim, EndoOnM, LieElement, Subspace};
use crate::tol;

/// Parameters and matrix of the generating automorphism.
#[derive(Clone, Debug)]
pub struct AutomorphismSpec {
    n: usize,
    m_blocks: usize,
    k: usize,
    b: DMatrix<f64>,
}

impl AutomorphismSpec {
    /// An arbitrary orthogonal `b` with declared order `k`. Used for degenerate
    /// or hand-built test spaces; `m_blocks` is reported as 0.
    pub fn custom(b: DMatrix<f64>, k: usize) -> Result<Self> {
        let n = b.nrows();
        if b.ncols() != n {
            return Err(FlagError::DimensionMismatch {
                expected: n,
                got: b.ncols(),
            });
        }
        let defect = (&b * b.transpose() - DMatrix::identity(n, n)).amax();
        if defect > tol::NUM {
            return Err(FlagError::InvalidParams(format!(
                "B is not orthogonal (defect {defect:.3e})"
            )));
        }
        Ok(Self {
            n,
            m_blocks: 0,
            k,
            b,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_blocks(&self) -> usize {
        self.m_blocks
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `φ` as an operator on `so(n)` in the standard basis.
    pub fn conjugation_operator(&self) -> EndoOnM {
        EndoOnM::from_fn(Subspace::full(self.n), |x| Ok(x.conjugate_orthogonal(&self.b)))
            .expect("conjugation preserves so(n)")
    }

    /// True iff `φᵏ = id` and `φʲ ≠ id` for `0 < j < k`, within [`tol::NUM`].
    pub fn has_exact_order(&self) -> bool {
        let phi = self.conjugation_operator();
        let id = EndoOnM::identity(phi.domain().clone());
        let mut power = id.clone();
        for j in 1..=self.k {
            power = power.compose(&phi);
            let dev = power.sub(&id).max_norm();
            if j < self.k && dev <= tol::NUM {
                return false;
            }
            if j == self.k && dev > tol::NUM {
                return false;
            }
        }
        true
    }
}

/// The matrix `B` for the flag manifold with `m_blocks` rotation blocks,
/// after validating the parameter constraints.
pub fn build_automorphism(n: usize, m_blocks: usize, k: usize) -> Result<AutomorphismSpec> {
    if n < 4 {
        return Err(FlagError::InvalidParams(format!("n must be at least 4, got {n}")));
    }
    if m_blocks < 1 {
        return Err(FlagError::InvalidParams("m_blocks must be at least 1".into()));
    }
    if k <= 2 || !k.is_multiple_of(2) {
        return Err(FlagError::InvalidParams(format!(
            "k must be even and greater than 2, got {k}"
        )));
    }
    if k + 2 < 2 * m_blocks {
        return Err(FlagError::InvalidParams(format!(
            "k must be at least 2·m_blocks − 2 = {}, got {k}",
            2 * m_blocks - 2
        )));
    }
    if n < 2 * m_blocks + 1 {
        return Err(FlagError::InvalidParams(format!(
            "n − 2·m_blocks − 1 must be non-negative (n = {n}, m_blocks = {m_blocks})"
        )));
    }
    let mut b = DMatrix::zeros(n, n);
    b[(0, 0)] = 1.0;
    for t in 1..=m_blocks {
        let angle = 2.0 * std::f64::consts::PI * t as f64 / k as f64;
        let (s, c) = angle.sin_cos();
        let r = 2 * t - 1;
        b[(r, r)] = c;
        b[(r, r + 1)] = s;
        b[(r + 1, r)] = -s;
        b[(r + 1, r + 1)] = c;
    }
    for i in (2 * m_blocks + 1)..n {
        b[(i, i)] = -1.0;
    }
    let spec = AutomorphismSpec { n, m_blocks, k, b };
    if !spec.has_exact_order() {
        return Err(FlagError::Internal(format!(
            "conjugation does not have exact order {k}"
        )));
    }
    Ok(spec)
}

/// `dim so(2)^m ⊕ so(n−2m−1)`, the isotropy algebra of the flag manifold.
pub fn isotropy_dim(n: usize, m_blocks: usize) -> usize {
    let rest = n - 2 * m_blocks - 1;
    m_blocks + so_dim(rest)
}

/// A regular homogeneous Φ-space with its canonical reductive decomposition.
#[derive(Clone, Debug)]
pub struct PhiSpace {
    spec: AutomorphismSpec,
    phi: EndoOnM,
    h: Subspace,
    m: Subspace,
    theta: EndoOnM,
}

/// Builds `h = ker(φ − id)`, `m = im(φ − id)` and `θ = φ|m`.
pub fn build_phi_space(spec: AutomorphismSpec) -> Result<PhiSpace> {
    let phi = spec.conjugation_operator();
    let a = phi.sub(&EndoOnM::identity(phi.domain().clone()));
    let h = liealg::nullspace(&a);
    let m = liealg::image(&a);
    let theta = EndoOnM::from_fn(m.clone(), |x| phi.apply(x))?;
    Ok(PhiSpace {
        spec,
        phi,
        h,
        m,
        theta,
    })
}

/// Outcome of the equivalent regularity conditions.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RegularityReport {
    /// `g = h ⊕ A g`.
    pub direct_sum: bool,
    /// `A` restricted to `A g` is nonsingular.
    pub a_nonsingular_on_image: bool,
    /// `ker A² = ker A`.
    pub kernel_stable: bool,
    /// `θ` has no eigenvalue 1.
    pub theta_no_fixed_vector: bool,
    /// All four conditions agree.
    pub consistent: bool,
}

impl RegularityReport {
    pub fn all_pass(&self) -> bool {
        self.consistent && self.direct_sum
    }
}

impl PhiSpace {
    pub fn spec(&self) -> &AutomorphismSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn phi(&self) -> &EndoOnM {
        &self.phi
    }

    pub fn h(&self) -> &Subspace {
        &self.h
    }

    pub fn m(&self) -> &Subspace {
        &self.m
    }

    pub fn theta(&self) -> &EndoOnM {
        &self.theta
    }

    /// `max ‖φ[X,Y] − [φX,φY]‖` over basis pairs of `so(n)`.
    pub fn homomorphism_residual(&self) -> Result<f64> {
        let basis = self.phi.domain().basis();
        let mut worst: f64 = 0.0;
        for x in basis {
            for y in basis {
                let lhs = self.phi.apply(&bracket(x, y)?)?;
                let rhs = bracket(&self.phi.apply(x)?, &self.phi.apply(y)?)?;
                worst = worst.max((&lhs - &rhs).amax());
            }
        }
        Ok(worst)
    }

    /// `max |φᵀφ − I|`: deviation of `φ` from an isometry of the trace form.
    pub fn isometry_residual(&self) -> f64 {
        let p = self.phi.matrix();
        let d = p.nrows();
        (p.transpose() * p - DMatrix::identity(d, d)).amax()
    }

    /// `‖θᵏ − id‖`.
    pub fn theta_order_residual(&self) -> f64 {
        let id = EndoOnM::identity(self.m.clone());
        self.theta.pow(self.k()).sub(&id).max_norm()
    }

    /// Largest distance of `[h_i, m_j]` from `m`, over basis pairs.
    pub fn reductivity_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for h in self.h.basis() {
            for x in self.m.basis() {
                worst = worst.max(self.m.residual(&bracket(h, x)?)?);
            }
        }
        Ok(worst)
    }

    /// Matrix of `ad(h)|m`.
    pub fn ad_on_m(&self, h: &LieElement) -> Result<EndoOnM> {
        EndoOnM::from_fn(self.m.clone(), |x| bracket(h, x))
    }

    /// Evaluates the equivalent regularity conditions.
    pub fn check_regularity(&self) -> RegularityReport {
        let total = self.phi.dim();
        let a = self.phi.sub(&EndoOnM::identity(self.phi.domain().clone()));

        let mut stacked = DMatrix::zeros(total, self.h.dim() + self.m.dim());
        let full = self.phi.domain();
        for (c, v) in self.h.basis().iter().chain(self.m.basis()).enumerate() {
            stacked.set_column(c, &full.coords(v).expect("same ambient n"));
        }
        let direct_sum = self.h.dim() + self.m.dim() == total && liealg::rank(&stacked) == total;

        let d = self.m.dim();
        let a_on_m = self.theta.matrix() - DMatrix::identity(d, d);
        let a_nonsingular_on_image =
            d == 0 || liealg::rank(&a_on_m) == d;

        let ker_a = liealg::kernel_basis(a.matrix()).ncols();
        let ker_a2 = liealg::kernel_basis(&(a.matrix() * a.matrix())).ncols();
        let kernel_stable = ker_a == ker_a2;

        let theta_no_fixed_vector =
            d == 0 || liealg::min_singular_value(&a_on_m) > tol::NUM;

        let flags = [
            direct_sum,
            a_nonsingular_on_image,
            kernel_stable,
            theta_no_fixed_vector,
        ];
        let consistent = flags.iter().all(|&f| f == flags[0]);
        RegularityReport {
            direct_sum,
            a_nonsingular_on_image,
            kernel_stable,
            theta_no_fixed_vector,
            consistent,
        }
    }
}

/// Free-function form of [`PhiSpace::check_regularity`].
pub fn check_regularity(ps: &PhiSpace) -> RegularityReport {
    ps.check_regularity()
}
