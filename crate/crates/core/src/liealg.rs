//! Dense linear algebra over `so(n)`.
//!
//! Elements are real skew-symmetric `n×n` matrices. The inner product used
//! throughout is the trace form `⟨X, Y⟩ = Tr(XᵀY)`, and coordinates on `so(n)`
//! are taken with respect to the orthonormal basis `(E_ij − E_ji)/√2`, `i < j`,
//! in lexicographic order. Subspaces always carry orthonormal bases, so
//! coordinate vectors can be compared with the plain Euclidean inner product.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{FlagError, Result};
use crate::tol;

/// An element of `so(n)`.
#[derive(Clone, PartialEq)]
pub struct LieElement {
    mat: DMatrix<f64>,
}

impl LieElement {
    /// Wraps a square matrix, rejecting it if it is not skew-symmetric within
    /// [`tol::SYM`]. The stored matrix is symmetrized exactly.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(FlagError::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let asym = (&mat + mat.transpose()).amax();
        if asym > tol::SYM {
            return Err(FlagError::NotSkew(asym));
        }
        Ok(Self::skew_part(&mat))
    }

    /// `(M − Mᵀ)/2` for any square `M`.
    pub fn skew_part(mat: &DMatrix<f64>) -> Self {
        Self {
            mat: (mat - mat.transpose()) * 0.5,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            mat: DMatrix::zeros(n, n),
        }
    }

    /// `E_ij − E_ji` with zero-based indices.
    pub fn elementary(n: usize, i: usize, j: usize) -> Self {
        let mut mat = DMatrix::zeros(n, n);
        if i != j {
            mat[(i, j)] = 1.0;
            mat[(j, i)] = -1.0;
        }
        Self { mat }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    /// Trace-form norm `sqrt(Tr(XᵀX))`.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Largest absolute entry.
    pub fn amax(&self) -> f64 {
        self.mat.amax()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { mat: &self.mat * c }
    }

    /// Conjugation `B X B⁻¹` by an orthogonal matrix `B` (so `B⁻¹ = Bᵀ`).
    pub fn conjugate_orthogonal(&self, b: &DMatrix<f64>) -> Self {
        Self::skew_part(&(b * &self.mat * b.transpose()))
    }
}

impl fmt::Debug for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieElement{}", self.mat)
    }
}

impl Add for &LieElement {
    type Output = LieElement;
    fn add(self, rhs: &LieElement) -> LieElement {
        LieElement {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &LieElement {
    type Output = LieElement;
    fn sub(self, rhs: &LieElement) -> LieElement {
        LieElement {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Add for LieElement {
    type Output = LieElement;
    fn add(self, rhs: LieElement) -> LieElement {
        &self + &rhs
    }
}

impl Sub for LieElement {
    type Output = LieElement;
    fn sub(self, rhs: LieElement) -> LieElement {
        &self - &rhs
    }
}

impl Mul<f64> for &LieElement {
    type Output = LieElement;
    fn mul(self, c: f64) -> LieElement {
        self.scale(c)
    }
}

impl Mul<f64> for LieElement {
    type Output = LieElement;
    fn mul(self, c: f64) -> LieElement {
        self.scale(c)
    }
}

impl Neg for &LieElement {
    type Output = LieElement;
    fn neg(self) -> LieElement {
        self.scale(-1.0)
    }
}

fn check_dims(x: &LieElement, y: &LieElement) -> Result<()> {
    if x.n() != y.n() {
        return Err(FlagError::DimensionMismatch {
            expected: x.n(),
            got: y.n(),
        });
    }
    Ok(())
}

/// The commutator `XY − YX`.
pub fn bracket(x: &LieElement, y: &LieElement) -> Result<LieElement> {
    check_dims(x, y)?;
    let xy = &x.mat * &y.mat;
    // XY − YX = XY − (XY)ᵀ for skew X, Y
    Ok(LieElement {
        mat: &xy - xy.transpose(),
    })
}

/// `Tr(XᵀY)`.
pub fn trace_form(x: &LieElement, y: &LieElement) -> Result<f64> {
    check_dims(x, y)?;
    Ok(x.mat.dot(&y.mat))
}

/// `n(n−1)/2`.
pub fn so_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index pairs `(i, j)`, `i < j`, in the fixed lexicographic order.
pub fn so_index_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(so_dim(n));
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// The trace-orthonormal basis `(E_ij − E_ji)/√2` of `so(n)`.
pub fn so_basis(n: usize) -> Vec<LieElement> {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    so_index_pairs(n)
        .into_iter()
        .map(|(i, j)| LieElement::elementary(n, i, j).scale(c))
        .collect()
}

/// Singular value decomposition with singular values sorted descending.
/// Returns `(U, σ, V)` with `A = U diag(σ) Vᵀ`.
fn sorted_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&p, &q| {
        svd.singular_values[q]
            .partial_cmp(&svd.singular_values[p])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_sorted = DMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
    (u_sorted, sigma, v_sorted)
}

fn numerical_rank(sigma: &[f64]) -> usize {
    // cutoff τ_rank · max(σ_max, 1)
    let top = sigma.first().copied().unwrap_or(0.0);
    let cutoff = tol::RANK * top.max(1.0);
    sigma.iter().filter(|&&s| s > cutoff).count()
}

/// Numerical rank.
pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let (_, sigma, _) = sorted_svd(a);
    numerical_rank(&sigma)
}

/// Smallest singular value (0 for an empty matrix).
pub fn min_singular_value(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (_, sigma, _) = sorted_svd(a);
    sigma.last().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the kernel, one column per vector.
pub fn kernel_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.ncols();
    if d == 0 {
        return DMatrix::zeros(0, 0);
    }
    // thin SVD of a wide matrix omits part of V; zero rows complete it
    let (_, sigma, v) = if a.nrows() < d {
        sorted_svd(&a.clone().resize_vertically(d, 0.0))
    } else {
        sorted_svd(a)
    };
    let r = numerical_rank(&sigma);
    v.columns(r, d - r).into_owned()
}

/// Orthonormal basis of the column space, one column per vector.
pub fn image_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.is_empty() {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let (u, sigma, _) = sorted_svd(a);
    let r = numerical_rank(&sigma);
    u.columns(0, r).into_owned()
}

/// A linear subspace of `so(n)` with a trace-orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient_n: usize,
    basis: Vec<LieElement>,
}

impl Subspace {
    pub fn empty(ambient_n: usize) -> Self {
        Self {
            ambient_n,
            basis: Vec::new(),
        }
    }

    /// All of `so(n)` with the standard basis.
    pub fn full(n: usize) -> Self {
        Self {
            ambient_n: n,
            basis: so_basis(n),
        }
    }

    /// Accepts a basis that is already orthonormal within [`tol::ORTH`].
    pub fn from_orthonormal(ambient_n: usize, basis: Vec<LieElement>) -> Result<Self> {
        for b in &basis {
            if b.n() != ambient_n {
                return Err(FlagError::DimensionMismatch {
                    expected: ambient_n,
                    got: b.n(),
                });
            }
        }
        let s = Self { ambient_n, basis };
        let dev = s.orthonormality_defect();
        if dev > tol::ORTH {
            return Err(FlagError::Internal(format!(
                "basis is not orthonormal (Gram defect {dev:.3e})"
            )));
        }
        Ok(s)
    }

    /// Orthonormal basis of the span of arbitrary vectors.
    pub fn span(ambient_n: usize, vectors: &[LieElement]) -> Result<Self> {
        let full = Self::full(ambient_n);
        let mut cols = DMatrix::zeros(full.dim(), vectors.len());
        for (c, v) in vectors.iter().enumerate() {
            cols.set_column(c, &full.coords(v)?);
        }
        Ok(Self::from_coord_columns(&full, &image_basis(&cols)))
    }

    /// Builds the subspace whose basis vectors have the given coordinate
    /// columns with respect to `frame`. Columns must be orthonormal.
    pub fn from_coord_columns(frame: &Subspace, cols: &DMatrix<f64>) -> Self {
        let basis = cols
            .column_iter()
            .map(|c| frame.from_coords(&c.into_owned()))
            .collect();
        Self {
            ambient_n: frame.ambient_n,
            basis,
        }
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[LieElement] {
        &self.basis
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.basis[i].mat.dot(&self.basis[j].mat))
    }

    /// `max |Gram − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.dim();
        if d == 0 {
            return 0.0;
        }
        (self.gram() - DMatrix::identity(d, d)).amax()
    }

    fn check(&self, x: &LieElement) -> Result<()> {
        if x.n() != self.ambient_n {
            return Err(FlagError::DimensionMismatch {
                expected: self.ambient_n,
                got: x.n(),
            });
        }
        Ok(())
    }

    /// Coordinates of the orthogonal projection of `x`.
    pub fn coords(&self, x: &LieElement) -> Result<DVector<f64>> {
        self.check(x)?;
        Ok(DVector::from_iterator(
            self.dim(),
            self.basis.iter().map(|b| b.mat.dot(&x.mat)),
        ))
    }

    pub fn from_coords(&self, c: &DVector<f64>) -> LieElement {
        let mut mat = DMatrix::zeros(self.ambient_n, self.ambient_n);
        for (b, &ci) in self.basis.iter().zip(c.iter()) {
            if ci != 0.0 {
                mat += &b.mat * ci;
            }
        }
        LieElement { mat }
    }

    /// Trace-form orthogonal projection onto the subspace.
    pub fn project(&self, x: &LieElement) -> Result<LieElement> {
        Ok(self.from_coords(&self.coords(x)?))
    }

    /// `‖x − proj(x)‖`.
    pub fn residual(&self, x: &LieElement) -> Result<f64> {
        Ok((x - &self.project(x)?).norm())
    }

    /// Membership with relative threshold `τ_num · ‖x‖`.
    pub fn contains(&self, x: &LieElement) -> Result<bool> {
        Ok(self.residual(x)? <= tol::NUM * x.norm())
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        for b in other.basis() {
            if !self.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Re-runs orthonormalization on the current basis.
    pub fn reorthonormalize(&self) -> Result<Self> {
        Self::span(self.ambient_n, &self.basis)
    }
}

/// Projection of `x` onto `s`.
pub fn project(s: &Subspace, x: &LieElement) -> Result<LieElement> {
    s.project(x)
}

/// True iff the parts lie in `whole`, are pairwise trace-orthogonal, and
/// their dimensions add up to `dim whole`.
pub fn decompose_orthogonal(whole: &Subspace, parts: &[&Subspace]) -> Result<bool> {
    let total: usize = parts.iter().map(|p| p.dim()).sum();
    if total != whole.dim() {
        return Ok(false);
    }
    for p in parts {
        if p.ambient_n() != whole.ambient_n() {
            return Err(FlagError::DimensionMismatch {
                expected: whole.ambient_n(),
                got: p.ambient_n(),
            });
        }
        if !whole.contains_subspace(p)? {
            return Ok(false);
        }
    }
    for (a, pa) in parts.iter().enumerate() {
        for pb in &parts[a + 1..] {
            for x in pa.basis() {
                for y in pb.basis() {
                    if trace_form(x, y)?.abs() > tol::ORTH {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// A linear operator on a subspace, stored as a matrix over its basis:
/// basis vector `j` maps to `Σ_i matrix[i][j] · basis_i`.
#[derive(Clone, Debug)]
pub struct EndoOnM {
    domain: Subspace,
    matrix: DMatrix<f64>,
}

impl EndoOnM {
    pub fn new(domain: Subspace, matrix: DMatrix<f64>) -> Result<Self> {
        let d = domain.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(FlagError::DimensionMismatch {
                expected: d,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { domain, matrix })
    }

    pub fn identity(domain: Subspace) -> Self {
        let d = domain.dim();
        Self {
            domain,
            matrix: DMatrix::identity(d, d),
        }
    }

    /// Matrix of a map given on elements. Fails if some image leaves the
    /// domain by more than [`tol::NUM`] relative to its norm.
    pub fn from_fn<F>(domain: Subspace, mut map: F) -> Result<Self>
    where
        F: FnMut(&LieElement) -> Result<LieElement>,
    {
        let d = domain.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for j in 0..d {
            let img = map(&domain.basis()[j])?;
            let c = domain.coords(&img)?;
            let res = (&img - &domain.from_coords(&c)).norm();
            if res > tol::NUM * img.norm().max(1.0) {
                return Err(FlagError::NotInM(res));
            }
            matrix.set_column(j, &c);
        }
        Ok(Self { domain, matrix })
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn apply(&self, x: &LieElement) -> Result<LieElement> {
        let c = self.domain.coords(x)?;
        Ok(self.domain.from_coords(&(&self.matrix * c)))
    }

    pub fn apply_coords(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.matrix * c
    }

    fn with_matrix(&self, matrix: DMatrix<f64>) -> Self {
        Self {
            domain: self.domain.clone(),
            matrix,
        }
    }

    pub fn compose(&self, other: &EndoOnM) -> Self {
        self.with_matrix(&self.matrix * &other.matrix)
    }

    pub fn pow(&self, k: usize) -> Self {
        let d = self.dim();
        let mut acc = DMatrix::identity(d, d);
        for _ in 0..k {
            acc = &acc * &self.matrix;
        }
        self.with_matrix(acc)
    }

    /// `Σ_m coeffs[m] · selfᵐ`.
    pub fn polynomial(&self, coeffs: &[f64]) -> Self {
        let d = self.dim();
        let mut acc = DMatrix::zeros(d, d);
        let mut power = DMatrix::identity(d, d);
        for &a in coeffs {
            if a != 0.0 {
                acc += &power * a;
            }
            power = &power * &self.matrix;
        }
        self.with_matrix(acc)
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &EndoOnM) -> Self {
        self.with_matrix(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.with_matrix(&self.matrix * c)
    }

    pub fn add(&self, other: &EndoOnM) -> Self {
        self.with_matrix(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &EndoOnM) -> Self {
        self.with_matrix(&self.matrix - &other.matrix)
    }

    /// Largest absolute matrix entry.
    pub fn max_norm(&self) -> f64 {
        if self.matrix.is_empty() {
            0.0
        } else {
            self.matrix.amax()
        }
    }

    /// Expresses the same operator over another orthonormal basis of the same
    /// subspace.
    pub fn rebase(&self, new_domain: &Subspace) -> Result<Self> {
        if new_domain.dim() != self.dim()
            || !self.domain.contains_subspace(new_domain)?
        {
            return Err(FlagError::Internal(
                "rebase target does not span the operator's domain".into(),
            ));
        }
        let d = self.dim();
        // change of basis Q[i][j] = ⟨old_i, new_j⟩, orthogonal
        let q = DMatrix::from_fn(d, d, |i, j| {
            self.domain.basis()[i].mat.dot(&new_domain.basis()[j].mat)
        });
        Ok(Self {
            domain: new_domain.clone(),
            matrix: q.transpose() * &self.matrix * q,
        })
    }
}

/// Kernel of an operator, as a subspace of `so(n)`.
pub fn nullspace(op: &EndoOnM) -> Subspace {
    Subspace::from_coord_columns(op.domain(), &kernel_basis(op.matrix()))
}

/// Image of an operator, as a subspace of `so(n)`.
pub fn image(op: &EndoOnM) -> Subspace {
    Subspace::from_coord_columns(op.domain(), &image_basis(op.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize, j: usize) -> LieElement {
        LieElement::elementary(n, i - 1, j - 1)
    }

    #[test]
    fn bracket_of_elementary_matrices() {
        // [E12−E21, E24−E42] = E14−E41, expanded by hand
        let z = bracket(&e(4, 1, 2), &e(4, 2, 4)).unwrap();
        assert_eq!(z.matrix(), e(4, 1, 4).matrix());
        assert_eq!(bracket(&e(4, 1, 2), &e(4, 1, 2)).unwrap().amax(), 0.0);
    }

    #[test]
    fn bracket_rejects_mismatched_dims() {
        assert!(matches!(
            bracket(&e(4, 1, 2), &e(5, 1, 2)),
            Err(FlagError::DimensionMismatch { .. })
        ));
        assert!(trace_form(&e(4, 1, 2), &e(5, 1, 2)).is_err());
    }

    #[test]
    fn trace_form_values() {
        let x = e(4, 1, 2);
        assert_eq!(trace_form(&x, &x).unwrap(), 2.0);
        assert_eq!(trace_form(&x, &e(4, 1, 3)).unwrap(), 0.0);
        assert_eq!(trace_form(&x, &x.scale(3.0)).unwrap(), 6.0);
    }

    #[test]
    fn construction_enforces_skew_symmetry() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -1.0 + 1e-14;
        let x = LieElement::new(m.clone()).unwrap();
        assert_eq!(x.get(0, 1), -x.get(1, 0));
        m[(1, 0)] = -0.5;
        assert!(matches!(LieElement::new(m), Err(FlagError::NotSkew(_))));
    }

    #[test]
    fn kernel_and_image_of_trivial_matrices() {
        let d = 5;
        assert_eq!(kernel_basis(&DMatrix::identity(d, d)).ncols(), 0);
        assert_eq!(kernel_basis(&DMatrix::zeros(d, d)).ncols(), d);
        assert_eq!(image_basis(&DMatrix::zeros(d, d)).ncols(), 0);
        assert_eq!(image_basis(&DMatrix::identity(d, d)).ncols(), d);
    }

    #[test]
    fn image_of_zero_operator_is_empty() {
        let op = EndoOnM::new(Subspace::full(4), DMatrix::zeros(6, 6)).unwrap();
        assert!(image(&op).is_empty());
        assert_eq!(nullspace(&op).dim(), 6);
    }

    #[test]
    fn span_orthonormalizes_and_drops_dependent_vectors() {
        let a = e(4, 1, 2);
        let b = &e(4, 1, 2) + &e(4, 1, 3);
        let c = &a * 2.0;
        let s = Subspace::span(4, &[a, b, c]).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.orthonormality_defect() < tol::ORTH);
        assert!(s.contains(&e(4, 1, 3)).unwrap());
        assert!(!s.contains(&e(4, 2, 3)).unwrap());
    }

    #[test]
    fn projection_onto_orthogonal_subspace_vanishes() {
        let s = Subspace::span(5, &[e(5, 1, 2), e(5, 1, 3)]).unwrap();
        let p = s.project(&e(5, 1, 4)).unwrap();
        assert_eq!(p.amax(), 0.0);
    }

    #[test]
    fn decompose_orthogonal_detects_overlap_and_gaps() {
        let whole = Subspace::span(4, &[e(4, 1, 2), e(4, 1, 3), e(4, 2, 3)]).unwrap();
        let a = Subspace::span(4, &[e(4, 1, 2)]).unwrap();
        let b = Subspace::span(4, &[e(4, 1, 3), e(4, 2, 3)]).unwrap();
        let skew = Subspace::span(4, &[&e(4, 1, 2) + &e(4, 1, 3)]).unwrap();
        assert!(decompose_orthogonal(&whole, &[&a, &b]).unwrap());
        assert!(!decompose_orthogonal(&whole, &[&a]).unwrap());
        assert!(!decompose_orthogonal(&whole, &[&skew, &b]).unwrap());
    }

    #[test]
    fn rebase_preserves_action() {
        let full = Subspace::full(3);
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.5, 0.0, 3.0, 0.0, 1.0]);
        let op = EndoOnM::new(full, m).unwrap();
        let other = Subspace::span(3, &[&e(3, 1, 2) + &e(3, 2, 3), e(3, 1, 3), e(3, 2, 3)]).unwrap();
        let rebased = op.rebase(&other).unwrap();
        let x = &e(3, 1, 2) * 0.3 + &e(3, 2, 3) * -1.7;
        let diff = &op.apply(&x).unwrap() - &rebased.apply(&x).unwrap();
        assert!(diff.amax() < 1e-12);
    }

    #[test]
    fn polynomial_evaluation_matches_powers() {
        let full = Subspace::full(3);
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        let op = EndoOnM::new(full, m).unwrap();
        let p = op.polynomial(&[1.0, 0.0, -2.0, 0.5]);
        let direct = EndoOnM::identity(op.domain().clone())
            .sub(&op.pow(2).scale(2.0))
            .add(&op.pow(3).scale(0.5));
        assert!((p.matrix() - direct.matrix()).amax() < 1e-14);
    }
}
