//! Invariant metrics on `SO(n)/SO(2)×SO(n−3)` and their Levi-Civita data.
//!
//! The canonical complement splits into three `Ad(H)`-invariant pieces:
//!
//! - `m1`: entries `(1,2)`, `(1,3)`;
//! - `m2`: entries `(2,j)`, `(3,j)` for `j ≥ 4`;
//! - `m3`: entries `(1,j)` for `j ≥ 4`.
//!
//! Every invariant metric is, up to scale, `g = g0|m1 + s·g0|m2 + t·g0|m3`
//! with `g0 = κ·Tr(XᵀY)`. The Nomizu function of its Levi-Civita connection
//! is `α(X,Y) = ½[X,Y]_m + U(X,Y)`, where `U` is the symmetric bilinear map
//! defined by `2g(U(X,Y),Z) = g(X,[Z,Y]_m) + g([Z,X]_m,Y)`.
//!
//! All coordinates are taken over the block-adapted basis of `m`: first the
//! `m1` basis, then `m2`, then `m3`, each trace-orthonormal.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{FlagError, Result};
use crate::liealg::{bracket, trace_form, LieElement, Subspace};
use crate::phispace::PhiSpace;
use crate::tol;

/// Which summand a basis vector belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Block {
    M1,
    M2,
    M3,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::M1, Block::M2, Block::M3];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The block `i + 2 (mod 3)` that receives `[m_i, m_{i+1}]`.
    pub fn third(a: Block, b: Block) -> Option<Block> {
        if a == b {
            return None;
        }
        Block::ALL.into_iter().find(|&c| c != a && c != b)
    }
}

/// The decomposition `m = m1 ⊕ m2 ⊕ m3`.
#[derive(Clone, Debug)]
pub struct TripleSplit {
    n: usize,
    m: Subspace,
    parts: [Subspace; 3],
    blocks: Vec<Block>,
    h: Subspace,
}

fn unit(n: usize, i: usize, j: usize) -> LieElement {
    LieElement::elementary(n, i, j).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Reads the three summands off their coordinate patterns and checks that
/// they exhaust the canonical complement of `ps`.
pub fn build_split(ps: &PhiSpace) -> Result<TripleSplit> {
    let n = ps.n();
    if ps.spec().m_blocks() != 1 {
        return Err(FlagError::WrongBlockPattern(format!(
            "expected one SO(2) block, got {}",
            ps.spec().m_blocks()
        )));
    }
    let m1 = vec![unit(n, 0, 1), unit(n, 0, 2)];
    let mut m2: Vec<LieElement> = (3..n).map(|j| unit(n, 1, j)).collect();
    m2.extend((3..n).map(|j| unit(n, 2, j)));
    let m3: Vec<LieElement> = (3..n).map(|j| unit(n, 0, j)).collect();

    let mut blocks = vec![Block::M1; m1.len()];
    blocks.extend(std::iter::repeat_n(Block::M2, m2.len()));
    blocks.extend(std::iter::repeat_n(Block::M3, m3.len()));
    let all: Vec<LieElement> = m1.iter().chain(&m2).chain(&m3).cloned().collect();

    let m = Subspace::from_orthonormal(n, all)?;
    if m.dim() != ps.m().dim() || !ps.m().contains_subspace(&m)? {
        return Err(FlagError::WrongBlockPattern(
            "coordinate blocks do not span the canonical complement".into(),
        ));
    }
    Ok(TripleSplit {
        n,
        m,
        parts: [
            Subspace::from_orthonormal(n, m1)?,
            Subspace::from_orthonormal(n, m2)?,
            Subspace::from_orthonormal(n, m3)?,
        ],
        blocks,
        h: ps.h().clone(),
    })
}

impl TripleSplit {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The block-adapted basis of `m`.
    pub fn m(&self) -> &Subspace {
        &self.m
    }

    pub fn part(&self, b: Block) -> &Subspace {
        &self.parts[b.index()]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.parts[0].dim(), self.parts[1].dim(), self.parts[2].dim())
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// Block of each basis vector of [`TripleSplit::m`].
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn h(&self) -> &Subspace {
        &self.h
    }

    /// Coordinates of `x ∈ m`; errors if `x` leaves `m`.
    pub fn coords(&self, x: &LieElement) -> Result<DVector<f64>> {
        let c = self.m.coords(x)?;
        let res = (x - &self.m.from_coords(&c)).norm();
        if res > tol::NUM * x.norm() {
            return Err(FlagError::NotInM(res));
        }
        Ok(c)
    }

    pub fn from_coords(&self, c: &DVector<f64>) -> LieElement {
        self.m.from_coords(c)
    }

    /// Component of `x ∈ m` in block `b`.
    pub fn component(&self, x: &LieElement, b: Block) -> Result<LieElement> {
        self.part(b).project(x)
    }

    /// `[x, y]_m`.
    pub fn bracket_m(&self, x: &LieElement, y: &LieElement) -> Result<LieElement> {
        self.m.project(&bracket(x, y)?)
    }

    /// Largest distance of `[m_a, m_b]` from its expected block, over all
    /// ordered pairs of distinct blocks and all basis pairs.
    pub fn bracket_relation_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for a in Block::ALL {
            for b in Block::ALL {
                let Some(c) = Block::third(a, b) else { continue };
                for x in self.part(a).basis() {
                    for y in self.part(b).basis() {
                        worst = worst.max(self.part(c).residual(&bracket(x, y)?)?);
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Largest distance of `[h, m_i]` from `m_i`.
    pub fn invariance_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for part in &self.parts {
            for h in self.h.basis() {
                for x in part.basis() {
                    worst = worst.max(part.residual(&bracket(h, x)?)?);
                }
            }
        }
        Ok(worst)
    }

    /// Largest `|Tr(XᵀY)|` between basis vectors of different summands,
    /// including `h`.
    pub fn orthogonality_residual(&self) -> Result<f64> {
        let groups: [&Subspace; 4] = [&self.h, &self.parts[0], &self.parts[1], &self.parts[2]];
        let mut worst: f64 = 0.0;
        for (a, ga) in groups.iter().enumerate() {
            for gb in &groups[a + 1..] {
                for x in ga.basis() {
                    for y in gb.basis() {
                        worst = worst.max(trace_form(x, y)?.abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// Characteristic numbers `(s, t)` and the overall scale `κ` of `g0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricParams {
    s: f64,
    t: f64,
    kappa: f64,
}

impl MetricParams {
    pub fn new(s: f64, t: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [("s", s), ("t", t), ("kappa", kappa)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(FlagError::InvalidParams(format!(
                    "{name} must be a positive real, got {v}"
                )));
            }
        }
        Ok(Self { s, t, kappa })
    }

    /// `κ = n − 1`, matching `g0 = (n−1)·Tr(XᵀY)`.
    pub fn with_default_kappa(n: usize, s: f64, t: f64) -> Result<Self> {
        Self::new(s, t, (n - 1) as f64)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.s, self.t, kappa)
    }

    /// Weight of block `b` relative to `g0`.
    pub fn weight(&self, b: Block) -> f64 {
        match b {
            Block::M1 => 1.0,
            Block::M2 => self.s,
            Block::M3 => self.t,
        }
    }

    /// `1 + s + t + 1/s + 1/t`, the scale used to normalize class residuals.
    pub fn residual_scale(&self) -> f64 {
        1.0 + self.s + self.t + 1.0 / self.s + 1.0 / self.t
    }
}

/// Gram matrix of `g(s,t)` over the block-adapted basis.
pub fn gram(split: &TripleSplit, params: &MetricParams) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        split.dim(),
        split.blocks().iter().map(|&b| params.kappa * params.weight(b)),
    ))
}

/// `g(x, y)` for `x, y ∈ m`.
pub fn metric_eval(
    split: &TripleSplit,
    params: &MetricParams,
    x: &LieElement,
    y: &LieElement,
) -> Result<f64> {
    split.coords(x)?;
    split.coords(y)?;
    let mut acc = 0.0;
    for b in Block::ALL {
        let xb = split.component(x, b)?;
        let yb = split.component(y, b)?;
        acc += params.weight(b) * trace_form(&xb, &yb)?;
    }
    Ok(params.kappa * acc)
}

/// Coordinate form of `g`.
pub fn metric_coords(
    split: &TripleSplit,
    params: &MetricParams,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> f64 {
    split
        .blocks()
        .iter()
        .zip(x.iter().zip(y.iter()))
        .map(|(&b, (a, c))| params.weight(b) * a * c)
        .sum::<f64>()
        * params.kappa
}

/// Block pairs of the closed form of `U`, in the order used by
/// [`closed_coefficients`] and [`BilinearMap::u_closed_parts`].
pub const CLOSED_PAIRS: [(Block, Block); 3] = [
    (Block::M2, Block::M3),
    (Block::M1, Block::M3),
    (Block::M1, Block::M2),
];

/// `[(t−s)/2, (t−1)/(2s), (s−1)/(2t)]`.
pub fn closed_coefficients(params: &MetricParams) -> [f64; 3] {
    CLOSED_PAIRS.map(|(a, b)| closed_coefficient(params, a, b))
}

/// Coefficient of `[X_a, Y_b] + [Y_a, X_b]` in the closed form of `U`, for
/// `a < b`.
fn closed_coefficient(params: &MetricParams, a: Block, b: Block) -> f64 {
    let (s, t) = (params.s, params.t);
    match (a, b) {
        (Block::M2, Block::M3) => (t - s) / 2.0,
        (Block::M1, Block::M3) => (t - 1.0) / (2.0 * s),
        (Block::M1, Block::M2) => (s - 1.0) / (2.0 * t),
        _ => 0.0,
    }
}

/// `U(x, y)` from the closed form
/// `(t−s)/2 ([X2,Y3]+[Y2,X3]) + (t−1)/(2s) ([X1,Y3]+[Y1,X3]) + (s−1)/(2t) ([X1,Y2]+[Y1,X2])`.
pub fn u_tensor_closed(
    split: &TripleSplit,
    params: &MetricParams,
    x: &LieElement,
    y: &LieElement,
) -> Result<LieElement> {
    split.coords(x)?;
    split.coords(y)?;
    let xs: Vec<LieElement> = Block::ALL
        .iter()
        .map(|&b| split.component(x, b))
        .collect::<Result<_>>()?;
    let ys: Vec<LieElement> = Block::ALL
        .iter()
        .map(|&b| split.component(y, b))
        .collect::<Result<_>>()?;
    let mut acc = LieElement::zero(split.n());
    for (a, b) in CLOSED_PAIRS {
        let c = closed_coefficient(params, a, b);
        let term = &bracket(&xs[a.index()], &ys[b.index()])?
            + &bracket(&ys[a.index()], &xs[b.index()])?;
        acc = &acc + &term.scale(c);
    }
    Ok(acc)
}

/// Right-hand side `g(x,[e_k,y]_m) + g([e_k,x]_m,y)` for every basis `e_k`.
fn u_rhs(
    split: &TripleSplit,
    params: &MetricParams,
    x: &LieElement,
    y: &LieElement,
) -> Result<DVector<f64>> {
    let xc = split.coords(x)?;
    let yc = split.coords(y)?;
    let mut rhs = DVector::zeros(split.dim());
    for (k, e) in split.m().basis().iter().enumerate() {
        let zy = split.m().coords(&bracket(e, y)?)?;
        let zx = split.m().coords(&bracket(e, x)?)?;
        rhs[k] = metric_coords(split, params, &xc, &zy) + metric_coords(split, params, &zx, &yc);
    }
    Ok(rhs)
}

/// `U(x, y)` obtained by solving `2 G u = rhs` for its coordinates, where `G`
/// is the Gram matrix of `g(s,t)`.
pub fn u_tensor_solved(
    split: &TripleSplit,
    params: &MetricParams,
    x: &LieElement,
    y: &LieElement,
) -> Result<LieElement> {
    let rhs = u_rhs(split, params, x, y)?;
    let chol = (gram(split, params) * 2.0)
        .cholesky()
        .ok_or_else(|| FlagError::Internal("Gram matrix of g(s,t) is singular".into()))?;
    Ok(split.from_coords(&chol.solve(&rhs)))
}

/// Which route to `U` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UMethod {
    Closed,
    Solved,
}

pub fn u_tensor(
    split: &TripleSplit,
    params: &MetricParams,
    x: &LieElement,
    y: &LieElement,
    method: UMethod,
) -> Result<LieElement> {
    match method {
        UMethod::Closed => u_tensor_closed(split, params, x, y),
        UMethod::Solved => u_tensor_solved(split, params, x, y),
    }
}

/// `α(x, y) = ½[x, y]_m + U(x, y)`.
pub fn nomizu(
    split: &TripleSplit,
    params: &MetricParams,
    x: &LieElement,
    y: &LieElement,
    method: UMethod,
) -> Result<LieElement> {
    let half = split.bracket_m(x, y)?.scale(0.5);
    Ok(&half + &u_tensor(split, params, x, y, method)?)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NaturalReductivity {
    /// `max |g([X,Y]_m,Z) − g(X,[Y,Z]_m)| / κ` over basis triples.
    pub residual: f64,
    pub holds: bool,
}

/// Checks `g([X,Y]_m, Z) = g(X, [Y,Z]_m)` on all basis triples.
pub fn check_naturally_reductive(
    split: &TripleSplit,
    params: &MetricParams,
) -> Result<NaturalReductivity> {
    let br = BilinearMap::bracket_m(split)?;
    Ok(natural_reductivity_on(split, params, &br, 0..split.dim()))
}

/// Same check restricted to triples drawn from a single block.
pub fn check_naturally_reductive_within(
    split: &TripleSplit,
    params: &MetricParams,
    block: Block,
) -> Result<NaturalReductivity> {
    let br = BilinearMap::bracket_m(split)?;
    let idx: Vec<usize> = (0..split.dim())
        .filter(|&i| split.blocks()[i] == block)
        .collect();
    Ok(natural_reductivity_on(split, params, &br, idx))
}

fn natural_reductivity_on(
    split: &TripleSplit,
    params: &MetricParams,
    br: &BilinearMap,
    indices: impl IntoIterator<Item = usize> + Clone,
) -> NaturalReductivity {
    let d = split.dim();
    let unit = |i: usize| {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v
    };
    let mut worst: f64 = 0.0;
    for i in indices.clone() {
        for j in indices.clone() {
            let xy = br.eval_basis(i, j);
            for k in indices.clone() {
                let lhs = metric_coords(split, params, &xy, &unit(k));
                let rhs = metric_coords(split, params, &unit(i), &br.eval_basis(j, k));
                worst = worst.max((lhs - rhs).abs() / params.kappa);
            }
        }
    }
    NaturalReductivity {
        residual: worst,
        holds: worst <= tol::NUM,
    }
}

/// A bilinear map `m × m → m` in coordinates: column `j` of `slices[i]` is
/// the image of the basis pair `(e_i, e_j)`.
#[derive(Clone, Debug)]
pub struct BilinearMap {
    slices: Vec<DMatrix<f64>>,
}

impl BilinearMap {
    pub fn zeros(d: usize) -> Self {
        Self {
            slices: vec![DMatrix::zeros(d, d); d],
        }
    }

    pub fn from_basis_fn<F>(d: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<DVector<f64>>,
    {
        let mut slices = Vec::with_capacity(d);
        for i in 0..d {
            let mut s = DMatrix::zeros(d, d);
            for j in 0..d {
                s.set_column(j, &f(i, j)?);
            }
            slices.push(s);
        }
        Ok(Self { slices })
    }

    /// `(x, y) ↦ [x, y]_m`.
    pub fn bracket_m(split: &TripleSplit) -> Result<Self> {
        let basis = split.m().basis();
        Self::from_basis_fn(split.dim(), |i, j| {
            split.m().coords(&bracket(&basis[i], &basis[j])?)
        })
    }

    /// The parameter-free pieces of the closed form: for each block pair
    /// `(a, b)` in [`CLOSED_PAIRS`], the map `(x, y) ↦ [x_a, y_b] + [y_a, x_b]`.
    pub fn u_closed_parts(split: &TripleSplit) -> Result<[Self; 3]> {
        let basis = split.m().basis();
        let blocks = split.blocks();
        let part = |pair: (Block, Block)| {
            Self::from_basis_fn(split.dim(), |i, j| {
                let (a, b) = (blocks[i], blocks[j]);
                // the closed form pairs the lower block on the left
                let (lo, hi) = if a < b { (i, j) } else { (j, i) };
                if (a.min(b), a.max(b)) != pair {
                    return Ok(DVector::zeros(split.dim()));
                }
                split.m().coords(&bracket(&basis[lo], &basis[hi])?)
            })
        };
        Ok([part(CLOSED_PAIRS[0])?, part(CLOSED_PAIRS[1])?, part(CLOSED_PAIRS[2])?])
    }

    /// `U` from the closed form, assembled block by block.
    pub fn u_closed(split: &TripleSplit, params: &MetricParams) -> Result<Self> {
        let parts = Self::u_closed_parts(split)?;
        let c = closed_coefficients(params);
        Ok(Self::combine(None, &[(c[0], &parts[0]), (c[1], &parts[1]), (c[2], &parts[2])]))
    }

    /// `U` from the defining linear system
    /// `2 g(U(e_i,e_j), e_k) = g(e_i, [e_k,e_j]_m) + g([e_k,e_i]_m, e_j)`.
    pub fn u_solved(split: &TripleSplit, params: &MetricParams) -> Result<Self> {
        let d = split.dim();
        let gram = gram(split, params);
        let chol = (&gram * 2.0)
            .cholesky()
            .ok_or_else(|| FlagError::Internal("Gram matrix of g(s,t) is singular".into()))?;
        let br = Self::bracket_m(split)?;
        Self::from_basis_fn(d, |i, j| {
            let rhs = DVector::from_fn(d, |k, _| {
                gram[(i, i)] * br.slices[k][(i, j)] + gram[(j, j)] * br.slices[k][(j, i)]
            });
            Ok(chol.solve(&rhs))
        })
    }

    /// `base + Σ cᵢ Tᵢ`.
    pub fn combine(base: Option<&Self>, terms: &[(f64, &Self)]) -> Self {
        let mut out = match (base, terms.first()) {
            (Some(b), _) => b.clone(),
            (None, Some((_, t))) => Self::zeros(t.dim()),
            (None, None) => Self::zeros(0),
        };
        for (c, t) in terms {
            if *c == 0.0 {
                continue;
            }
            for (o, s) in out.slices.iter_mut().zip(&t.slices) {
                *o += s * *c;
            }
        }
        out
    }

    pub fn u(split: &TripleSplit, params: &MetricParams, method: UMethod) -> Result<Self> {
        match method {
            UMethod::Closed => Self::u_closed(split, params),
            UMethod::Solved => Self::u_solved(split, params),
        }
    }

    pub fn dim(&self) -> usize {
        self.slices.len()
    }

    pub fn eval_basis(&self, i: usize, j: usize) -> DVector<f64> {
        self.slices[i].column(j).into_owned()
    }

    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut acc = DVector::zeros(self.dim());
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                acc += (&self.slices[i] * y) * xi;
            }
        }
        acc
    }

    /// `(x, y) ↦ T(A x, B y)`.
    pub fn precompose(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Self {
        let d = self.dim();
        let tb: Vec<DMatrix<f64>> = self.slices.iter().map(|s| s * b).collect();
        let slices = (0..d)
            .map(|i| {
                let mut acc = DMatrix::zeros(d, d);
                for (k, s) in tb.iter().enumerate() {
                    let c = a[(k, i)];
                    if c != 0.0 {
                        acc += s * c;
                    }
                }
                acc
            })
            .collect();
        Self { slices }
    }

    /// `(x, y) ↦ F T(x, y)`.
    pub fn postcompose(&self, f: &DMatrix<f64>) -> Self {
        Self {
            slices: self.slices.iter().map(|s| f * s).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            slices: self.slices.iter().map(|s| s * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            slices: self
                .slices
                .iter()
                .zip(&other.slices)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `max ‖T(e_i,e_j) + T(e_j,e_i)‖` over basis pairs with the maximizing pair.
    pub fn max_symmetrized(&self) -> (f64, (usize, usize)) {
        let d = self.dim();
        let mut worst = (0.0, (0, 0));
        for i in 0..d {
            for j in i..d {
                let v = self.slices[i].column(j) + self.slices[j].column(i);
                let norm = v.norm();
                if norm > worst.0 {
                    worst = (norm, (i, j));
                }
            }
        }
        worst
    }

    /// Largest entrywise difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max)
    }

    pub fn amax(&self) -> f64 {
        self.slices.iter().map(|s| s.amax()).fold(0.0, f64::max)
    }
}
