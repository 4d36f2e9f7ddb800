//! Membership of canonical f-structures in the classes Kill f, NKf and G1f.
//!
//! With the Nomizu function `α = ½[·,·]_m + U`, the three classes reduce to
//! quadratic identities on `m`:
//!
//! - Kill f: `½[X,fX]_m + U(X,fX) − f U(X,X) = 0`;
//! - NKf:    `½[fX,f²X]_m + U(fX,f²X) − f U(fX,fX) = 0`;
//! - G1f:    `f(2U(fX,f²X) − f U(fX,fX) + f U(f²X,f²X)) = 0`.
//!
//! A quadratic map vanishes iff its polarization does, so each condition is
//! written as a bilinear form `C(X,Y)` and tested on every basis pair via
//! `C(e_i,e_j) + C(e_j,e_i)`.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::CanonicalStructure;
use crate::error::{FlagError, Result};
use crate::metricgeom::{closed_coefficients, metric_coords, BilinearMap, MetricParams, TripleSplit};
use crate::tol;

pub use crate::metricgeom::UMethod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClassCondition {
    #[serde(rename = "KILL")]
    Kill = 0,
    #[serde(rename = "NK")]
    Nk,
    #[serde(rename = "G1")]
    G1,
}

impl ClassCondition {
    pub const ALL: [ClassCondition; 3] = [ClassCondition::Kill, ClassCondition::Nk, ClassCondition::G1];

    pub fn name(self) -> &'static str {
        match self {
            ClassCondition::Kill => "KILL",
            ClassCondition::Nk => "NK",
            ClassCondition::G1 => "G1",
        }
    }
}

impl fmt::Display for ClassCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An f-structure expressed over the block-adapted basis of a split, with
/// the parameter-independent pieces of the class conditions precomputed.
#[derive(Clone, Debug)]
pub struct ClassContext {
    split: TripleSplit,
    id: String,
    f: DMatrix<f64>,
    f2: DMatrix<f64>,
    bracket: BilinearMap,
    bracket_kill: BilinearMap,
    bracket_nk: BilinearMap,
    /// `U ↦ C` applied to each closed-form piece of `U`, per condition.
    closed_parts: [[BilinearMap; 3]; 3],
}

impl ClassContext {
    pub fn new(split: &TripleSplit, structure: &CanonicalStructure) -> Result<Self> {
        let op = structure.op().rebase(split.m())?;
        let f = op.matrix().clone();
        let f2 = &f * &f;
        let d = split.dim();
        let id = DMatrix::identity(d, d);
        let bracket = BilinearMap::bracket_m(split)?;
        let pieces = BilinearMap::u_closed_parts(split)?;
        let closed_parts = ClassCondition::ALL
            .map(|cond| pieces.clone().map(|u| u_linear_part(&f, &f2, &u, cond)));
        Ok(Self {
            bracket_kill: bracket.precompose(&id, &f).scale(0.5),
            bracket_nk: bracket.precompose(&f, &f2).scale(0.5),
            split: split.clone(),
            id: structure.id().to_string(),
            f,
            f2,
            bracket,
            closed_parts,
        })
    }

    pub fn split(&self) -> &TripleSplit {
        &self.split
    }

    pub fn structure_id(&self) -> &str {
        &self.id
    }

    /// Matrix of `f` over the block-adapted basis.
    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn bracket(&self) -> &BilinearMap {
        &self.bracket
    }

    /// Largest entry of `f`, used to normalize residuals.
    pub fn f_norm(&self) -> f64 {
        self.f.amax()
    }

    fn bracket_part(&self, cond: ClassCondition) -> Option<&BilinearMap> {
        match cond {
            ClassCondition::Kill => Some(&self.bracket_kill),
            ClassCondition::Nk => Some(&self.bracket_nk),
            ClassCondition::G1 => None,
        }
    }

    /// The polarized bilinear form `C` of a condition for a given `U`.
    pub fn condition_form(&self, u: &BilinearMap, cond: ClassCondition) -> BilinearMap {
        let lin = u_linear_part(&self.f, &self.f2, u, cond);
        BilinearMap::combine(self.bracket_part(cond), &[(1.0, &lin)])
    }

    /// [`Self::condition_form`] for the closed-form `U` at `params`, assembled
    /// from precomputed pieces.
    pub fn closed_condition_form(&self, params: &MetricParams, cond: ClassCondition) -> BilinearMap {
        let c = closed_coefficients(params);
        let parts = &self.closed_parts[cond as usize];
        BilinearMap::combine(
            self.bracket_part(cond),
            &[(c[0], &parts[0]), (c[1], &parts[1]), (c[2], &parts[2])],
        )
    }

    fn form(&self, params: &MetricParams, cond: ClassCondition, method: UMethod) -> Result<BilinearMap> {
        Ok(match method {
            UMethod::Closed => self.closed_condition_form(params, cond),
            UMethod::Solved => {
                self.condition_form(&BilinearMap::u_solved(&self.split, params)?, cond)
            }
        })
    }
}

/// The part of a condition that depends on `U`; it is linear in `U`.
fn u_linear_part(
    f: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    u: &BilinearMap,
    cond: ClassCondition,
) -> BilinearMap {
    let d = f.nrows();
    let id = DMatrix::identity(d, d);
    match cond {
        ClassCondition::Kill => u.precompose(&id, f).sub(&u.postcompose(f)),
        ClassCondition::Nk => u.precompose(f, f2).sub(&u.precompose(f, f).postcompose(f)),
        ClassCondition::G1 => {
            let inner = u
                .precompose(f, f2)
                .scale(2.0)
                .sub(&u.precompose(f, f).postcompose(f))
                .add(&u.precompose(f2, f2).postcompose(f));
            inner.postcompose(f)
        }
    }
}

/// A basis pair where a condition fails most.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub x: String,
    pub y: String,
}

/// Outcome of one condition at one `(s, t)`.
#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub condition: ClassCondition,
    /// `max ‖C(e_i,e_j)+C(e_j,e_i)‖ / (‖f‖ · (1 + s + t + 1/s + 1/t))`.
    pub residual: f64,
    pub member: bool,
    /// Residual strictly between the membership and non-membership thresholds.
    pub indeterminate: bool,
    pub witness: Option<Witness>,
}

/// Labels basis vectors of `m` by their upper-triangular entry, e.g. `e12`.
pub fn basis_labels(split: &TripleSplit) -> Vec<String> {
    let n = split.n();
    split
        .m()
        .basis()
        .iter()
        .map(|b| {
            for i in 0..n {
                for j in (i + 1)..n {
                    if b.get(i, j).abs() > 0.5 {
                        return format!("e{}{}", i + 1, j + 1);
                    }
                }
            }
            "e?".to_string()
        })
        .collect()
}

fn normalization(ctx: &ClassContext, params: &MetricParams) -> f64 {
    ctx.f_norm().max(f64::MIN_POSITIVE) * params.residual_scale()
}

fn judge(
    ctx: &ClassContext,
    params: &MetricParams,
    form: &BilinearMap,
    cond: ClassCondition,
) -> Membership {
    let (max, (i, j)) = form.max_symmetrized();
    let residual = max / normalization(ctx, params);
    let member = residual < tol::MEMBER;
    let witness = (!member).then(|| {
        let labels = basis_labels(&ctx.split);
        Witness {
            i,
            j,
            x: labels[i].clone(),
            y: labels[j].clone(),
        }
    });
    Membership {
        condition: cond,
        residual,
        member,
        indeterminate: !member && residual <= tol::NON_MEMBER,
        witness,
    }
}

/// Evaluates one condition at `params`.
pub fn membership(
    ctx: &ClassContext,
    params: &MetricParams,
    cond: ClassCondition,
    method: UMethod,
) -> Result<Membership> {
    Ok(judge(ctx, params, &ctx.form(params, cond, method)?, cond))
}

/// The stacked symmetrized residual vector of a condition, normalized like
/// [`Membership::residual`].
pub fn residual_vector(
    ctx: &ClassContext,
    params: &MetricParams,
    cond: ClassCondition,
    method: UMethod,
) -> Result<Vec<f64>> {
    let form = ctx.form(params, cond, method)?;
    let norm = normalization(ctx, params);
    let d = ctx.split.dim();
    let mut out = Vec::with_capacity(d * (d + 1) / 2 * d);
    for i in 0..d {
        for j in i..d {
            let v = form.eval_basis(i, j) + form.eval_basis(j, i);
            out.extend(v.iter().map(|x| x / norm));
        }
    }
    Ok(out)
}

/// All three class verdicts for one structure at one `(s, t)`.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub structure_id: String,
    pub s: f64,
    pub t: f64,
    pub kill: Membership,
    pub nk: Membership,
    pub g1: Membership,
}

impl ClassReport {
    pub fn get(&self, cond: ClassCondition) -> &Membership {
        match cond {
            ClassCondition::Kill => &self.kill,
            ClassCondition::Nk => &self.nk,
            ClassCondition::G1 => &self.g1,
        }
    }

    /// `KILL ⇒ NK ⇒ G1`.
    pub fn chain_holds(&self) -> bool {
        (!self.kill.member || self.nk.member) && (!self.nk.member || self.g1.member)
    }

    pub fn any_indeterminate(&self) -> bool {
        self.kill.indeterminate || self.nk.indeterminate || self.g1.indeterminate
    }
}

/// Evaluates all three conditions at `params`.
pub fn evaluate(ctx: &ClassContext, params: &MetricParams, method: UMethod) -> Result<ClassReport> {
    let solved = match method {
        UMethod::Solved => Some(BilinearMap::u_solved(&ctx.split, params)?),
        UMethod::Closed => None,
    };
    let m = |cond| {
        let form = match &solved {
            Some(u) => ctx.condition_form(u, cond),
            None => ctx.closed_condition_form(params, cond),
        };
        judge(ctx, params, &form, cond)
    };
    Ok(ClassReport {
        structure_id: ctx.id.clone(),
        s: params.s(),
        t: params.t(),
        kill: m(ClassCondition::Kill),
        nk: m(ClassCondition::Nk),
        g1: m(ClassCondition::G1),
    })
}

/// Metric compatibility `g(fX,Y) + g(X,fY) = 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Compatibility {
    /// Largest violation over basis pairs, divided by `κ`.
    pub residual: f64,
    pub holds: bool,
}

fn compat_residual(
    split: &TripleSplit,
    params: &MetricParams,
    structure: &CanonicalStructure,
    product: bool,
) -> Result<Compatibility> {
    let op = structure.op().rebase(split.m())?;
    let f = op.matrix();
    let d = split.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let ei = nalgebra::DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 });
            let ej = nalgebra::DVector::from_fn(d, |r, _| if r == j { 1.0 } else { 0.0 });
            let fi = f * &ei;
            let fj = f * &ej;
            let v = if product {
                metric_coords(split, params, &fi, &fj) - metric_coords(split, params, &ei, &ej)
            } else {
                metric_coords(split, params, &fi, &ej) + metric_coords(split, params, &ei, &fj)
            };
            worst = worst.max(v.abs() / params.kappa());
        }
    }
    Ok(Compatibility {
        residual: worst,
        holds: worst <= tol::NUM,
    })
}

/// Skew-adjointness of `f` with respect to `g(s,t)`.
pub fn check_metric_compat(
    structure: &CanonicalStructure,
    split: &TripleSplit,
    params: &MetricParams,
) -> Result<Compatibility> {
    compat_residual(split, params, structure, false)
}

/// `g(PX,PY) = g(X,Y)` for an almost product structure.
pub fn check_product_compat(
    structure: &CanonicalStructure,
    split: &TripleSplit,
    params: &MetricParams,
) -> Result<Compatibility> {
    compat_residual(split, params, structure, true)
}

/// A rectangular `(s, t)` lattice plus extra points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub s_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub extras: Vec<(f64, f64)>,
}

/// `min, min + step, …` up to `max` (inclusive within rounding).
pub fn lattice_values(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && step > 0.0 && min.is_finite() && max.is_finite()) {
        return Err(FlagError::InvalidParams(format!(
            "grid needs 0 < min ≤ max and step > 0 (min={min}, max={max}, step={step})"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min + i as f64 * step).collect())
}

impl Grid {
    pub fn new(min: f64, max: f64, step: f64, extras: Vec<(f64, f64)>) -> Result<Self> {
        let values = lattice_values(min, max, step)?;
        for &(s, t) in &extras {
            if !(s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite()) {
                return Err(FlagError::InvalidParams(format!(
                    "grid point ({s}, {t}) is not positive"
                )));
            }
        }
        Ok(Self {
            s_values: values.clone(),
            t_values: values,
            extras,
        })
    }

    /// `s, t ∈ {0.25, 0.5, …, 3.0}` plus `(1, 1)` and `(1, 4/3)`.
    pub fn default_grid() -> Self {
        Self::new(0.25, 3.0, 0.25, vec![(1.0, 1.0), (1.0, 4.0 / 3.0)]).expect("valid default grid")
    }

    fn on_lattice(&self, s: f64, t: f64) -> bool {
        self.s_values.iter().any(|&v| (v - s).abs() < 1e-12)
            && self.t_values.iter().any(|&v| (v - t).abs() < 1e-12)
    }

    /// Lattice points (row-major in `s`) followed by extras not already on
    /// the lattice.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self
            .s_values
            .iter()
            .flat_map(|&s| self.t_values.iter().map(move |&t| (s, t)))
            .collect();
        for &(s, t) in &self.extras {
            if !self.on_lattice(s, t) && !pts.iter().any(|&(a, b)| a == s && b == t) {
                pts.push((s, t));
            }
        }
        pts
    }
}

/// Number of worker threads: `FLAGF_THREADS` if set, else rayon's default.
pub fn thread_cap() -> Option<usize> {
    std::env::var("FLAGF_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn run_parallel<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let work = || (0..count).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| FlagError::Internal(e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// One report per point, in the order of `points`.
pub fn sweep(
    ctx: &ClassContext,
    points: &[(f64, f64)],
    kappa: f64,
    method: UMethod,
) -> Result<Vec<ClassReport>> {
    let params: Vec<MetricParams> = points
        .iter()
        .map(|&(s, t)| MetricParams::new(s, t, kappa))
        .collect::<Result<_>>()?;
    run_parallel(params.len(), |i| evaluate(ctx, &params[i], method))
}

/// Zero set of a class condition over the `(s, t)` quadrant.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CharacteristicSet {
    Empty,
    Points { points: Vec<(f64, f64)> },
    LineS { s: f64 },
    LineT { t: f64 },
    All,
    /// Sub-threshold points that fit none of the shapes above.
    Unresolved { points: Vec<(f64, f64)> },
}

fn fmt_coord(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format!("{r}")
}

impl fmt::Display for CharacteristicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |pts: &[(f64, f64)]| {
            pts.iter()
                .map(|(s, t)| format!("({s:.3}, {t:.3})"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            CharacteristicSet::Empty => f.write_str("empty"),
            CharacteristicSet::All => f.write_str("all"),
            CharacteristicSet::LineS { s } => write!(f, "line s={}", fmt_coord(*s)),
            CharacteristicSet::LineT { t } => write!(f, "line t={}", fmt_coord(*t)),
            CharacteristicSet::Points { points } => write!(f, "{{{}}}", list(points)),
            CharacteristicSet::Unresolved { points } => write!(f, "unresolved {{{}}}", list(points)),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Bisection on `h(x) = ⟨V(x), V(lo)⟩`. If `V` vanishes at `x*` and is
/// (close to) a scalar multiple of `x − x*` near it, `h` changes sign there.
fn bisect_zero<F>(mut lo: f64, mut hi: f64, eval: F, tol: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let reference = eval(lo)?;
    let h = |x: f64| -> Result<f64> { Ok(dot(&eval(x)?, &reference)) };
    if h(hi)? > 0.0 {
        return Ok(None);
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Locates the zero set of a condition's residual by scanning `grid` and
/// refining sign changes along lattice lines by bisection to within `tol`.
pub fn characteristic_set(
    ctx: &ClassContext,
    cond: ClassCondition,
    grid: &Grid,
    kappa: f64,
    tol: f64,
    method: UMethod,
) -> Result<CharacteristicSet> {
    let points = grid.points();
    let params: Vec<MetricParams> = points
        .iter()
        .map(|&(s, t)| MetricParams::new(s, t, kappa))
        .collect::<Result<_>>()?;
    let scanned: Vec<Membership> = run_parallel(params.len(), |i| {
        membership(ctx, &params[i], cond, method)
    })?;
    let verdicts: Vec<bool> = scanned.iter().map(|m| m.member).collect();
    let member_at = |s: f64, t: f64| -> bool {
        points
            .iter()
            .zip(&verdicts)
            .any(|(&(a, b), &m)| m && a == s && b == t)
    };

    if verdicts.iter().all(|&m| m) {
        return Ok(CharacteristicSet::All);
    }
    let members: Vec<(f64, f64)> = points
        .iter()
        .zip(&verdicts)
        .filter(|(_, &m)| m)
        .map(|(&p, _)| p)
        .collect();

    let full_columns: Vec<f64> = grid
        .s_values
        .iter()
        .copied()
        .filter(|&s| grid.t_values.iter().all(|&t| member_at(s, t)))
        .collect();
    let full_rows: Vec<f64> = grid
        .t_values
        .iter()
        .copied()
        .filter(|&t| grid.s_values.iter().all(|&s| member_at(s, t)))
        .collect();
    match (full_columns.as_slice(), full_rows.as_slice()) {
        ([c], []) if members.iter().all(|&(s, _)| s == *c) => {
            return Ok(CharacteristicSet::LineS { s: *c })
        }
        ([], [r]) if members.iter().all(|&(_, t)| t == *r) => {
            return Ok(CharacteristicSet::LineT { t: *r })
        }
        ([], []) => {}
        _ => return Ok(CharacteristicSet::Unresolved { points: members }),
    }

    let residual_at = |s: f64, t: f64| -> Result<Vec<f64>> {
        residual_vector(ctx, &MetricParams::new(s, t, kappa)?, cond, method)
    };
    let accept = |s: f64, t: f64| -> Result<bool> {
        Ok(membership(ctx, &MetricParams::new(s, t, kappa)?, cond, method)?.member)
    };

    let mut candidates = members.clone();
    let push = |p: (f64, f64), out: &mut Vec<(f64, f64)>| {
        if !out
            .iter()
            .any(|q| (q.0 - p.0).abs() <= 10.0 * tol && (q.1 - p.1).abs() <= 10.0 * tol)
        {
            out.push(p);
        }
    };
    // crossings found along rows suggest further columns, and vice versa
    let mut s_crossings = Vec::new();
    let mut t_crossings = Vec::new();
    let scan_column = |s: f64,
                       skip_members: bool,
                       candidates: &mut Vec<(f64, f64)>,
                       crossings: &mut Vec<f64>|
     -> Result<()> {
        for w in grid.t_values.windows(2) {
            if skip_members && (member_at(s, w[0]) || member_at(s, w[1])) {
                continue;
            }
            if let Some(t) = bisect_zero(w[0], w[1], |t| residual_at(s, t), tol)? {
                crossings.push(t);
                if accept(s, t)? {
                    push((s, t), candidates);
                }
            }
        }
        Ok(())
    };
    let scan_row = |t: f64,
                    skip_members: bool,
                    candidates: &mut Vec<(f64, f64)>,
                    crossings: &mut Vec<f64>|
     -> Result<()> {
        for w in grid.s_values.windows(2) {
            if skip_members && (member_at(w[0], t) || member_at(w[1], t)) {
                continue;
            }
            if let Some(s) = bisect_zero(w[0], w[1], |s| residual_at(s, t), tol)? {
                crossings.push(s);
                if accept(s, t)? {
                    push((s, t), candidates);
                }
            }
        }
        Ok(())
    };
    for &s in &grid.s_values {
        scan_column(s, true, &mut candidates, &mut t_crossings)?;
    }
    for &t in &grid.t_values {
        scan_row(t, true, &mut candidates, &mut s_crossings)?;
    }
    // isolated zeros off the lattice lines: Gauss–Newton from the lowest
    // non-member residuals
    let mut order: Vec<usize> = (0..points.len()).filter(|&i| !verdicts[i]).collect();
    order.sort_by(|&a, &b| scanned[a].residual.total_cmp(&scanned[b].residual));
    for &i in order.iter().take(NEWTON_SEEDS) {
        if let Some((s, t)) = gauss_newton(points[i], residual_at, tol)? {
            if accept(s, t)? {
                push((s, t), &mut candidates);
            }
        }
    }
    let mut scratch = Vec::new();
    for s in aligned(&s_crossings, &grid.s_values, tol) {
        scan_column(s, false, &mut candidates, &mut scratch)?;
    }
    for t in aligned(&t_crossings, &grid.t_values, tol) {
        scan_row(t, false, &mut candidates, &mut scratch)?;
    }

    if candidates.is_empty() {
        return Ok(CharacteristicSet::Empty);
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if let Some(shape) = refined_line(&candidates, grid, tol) {
        return Ok(shape);
    }
    // a partially filled lattice line means the zero set is not a finite set
    let partial_line = grid.s_values.iter().any(|&s| {
        grid.t_values.iter().filter(|&&t| member_at(s, t)).count() >= 3
    }) || grid.t_values.iter().any(|&t| {
        grid.s_values.iter().filter(|&&s| member_at(s, t)).count() >= 3
    });
    if partial_line {
        Ok(CharacteristicSet::Unresolved { points: candidates })
    } else {
        Ok(CharacteristicSet::Points { points: candidates })
    }
}

const NEWTON_SEEDS: usize = 3;

/// Least-squares zero of `V(s, t)` by Gauss–Newton with central-difference
/// Jacobian. `None` if the iteration leaves the positive quadrant, stalls on a
/// singular Jacobian or does not settle to within `tol`.
fn gauss_newton<F>(start: (f64, f64), eval: F, tol: f64) -> Result<Option<(f64, f64)>>
where
    F: Fn(f64, f64) -> Result<Vec<f64>>,
{
    let (mut s, mut t) = start;
    for _ in 0..60 {
        let v = eval(s, t)?;
        let hs = 1e-6 * s.max(1.0);
        let ht = 1e-6 * t.max(1.0);
        if s <= 2.0 * hs || t <= 2.0 * ht {
            return Ok(None);
        }
        let js: Vec<f64> = eval(s + hs, t)?
            .iter()
            .zip(eval(s - hs, t)?)
            .map(|(a, b)| (a - b) / (2.0 * hs))
            .collect();
        let jt: Vec<f64> = eval(s, t + ht)?
            .iter()
            .zip(eval(s, t - ht)?)
            .map(|(a, b)| (a - b) / (2.0 * ht))
            .collect();
        let (a, b, c) = (dot(&js, &js), dot(&js, &jt), dot(&jt, &jt));
        let det = a * c - b * b;
        if det.abs() <= 1e-14 * (a * c).max(f64::MIN_POSITIVE) {
            return Ok(None);
        }
        let (gs, gt) = (dot(&js, &v), dot(&jt, &v));
        let ds = -(c * gs - b * gt) / det;
        let dt = -(a * gt - b * gs) / det;
        s += ds;
        t += dt;
        if !(s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite()) {
            return Ok(None);
        }
        if ds.abs().max(dt.abs()) <= tol {
            return Ok(Some((s, t)));
        }
    }
    Ok(None)
}

/// Crossing coordinates seen on at least two lattice lines, off the lattice.
fn aligned(crossings: &[f64], lattice: &[f64], tol: f64) -> Vec<f64> {
    let width = 1e4 * tol;
    let mut sorted = crossings.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] - sorted[i] <= width {
            j += 1;
        }
        let c = sorted[i..j].iter().sum::<f64>() / (j - i) as f64;
        if j - i >= 2 && !lattice.iter().any(|&v| (v - c).abs() <= width) {
            out.push(c);
        }
        i = j;
    }
    out
}

/// A line `s = c` (or `t = c`) met by refined members on every lattice row
/// (column), with no member elsewhere.
fn refined_line(candidates: &[(f64, f64)], grid: &Grid, tol: f64) -> Option<CharacteristicSet> {
    let width = 1e4 * tol;
    let near = |a: f64, b: f64| (a - b).abs() <= width;
    let s0 = candidates[0].0;
    if candidates.iter().all(|p| near(p.0, s0))
        && grid.t_values.iter().all(|&t| candidates.iter().any(|p| p.1 == t))
    {
        let s = candidates.iter().map(|p| p.0).sum::<f64>() / candidates.len() as f64;
        return Some(CharacteristicSet::LineS { s });
    }
    let t0 = candidates[0].1;
    if candidates.iter().all(|p| near(p.1, t0))
        && grid.s_values.iter().all(|&s| candidates.iter().any(|p| p.0 == s))
    {
        let t = candidates.iter().map(|p| p.1).sum::<f64>() / candidates.len() as f64;
        return Some(CharacteristicSet::LineT { t });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_pieces_match_direct_form() {
        use crate::canonical::generate_f_structures;
        use crate::metricgeom::build_split;
        use crate::phispace::{build_automorphism, build_phi_space};
        let ps = build_phi_space(build_automorphism(6, 1, 6).unwrap()).unwrap();
        let split = build_split(&ps).unwrap();
        for f in generate_f_structures(&ps).unwrap() {
            let ctx = ClassContext::new(&split, &f).unwrap();
            for (s, t) in [(0.4, 2.2), (1.0, 4.0 / 3.0), (2.5, 0.75)] {
                let p = MetricParams::new(s, t, 5.0).unwrap();
                let u = BilinearMap::u_closed(&split, &p).unwrap();
                for cond in ClassCondition::ALL {
                    let direct = ctx.condition_form(&u, cond);
                    assert!(ctx.closed_condition_form(&p, cond).max_diff(&direct) < 1e-13);
                }
            }
        }
    }

    #[test]
    fn default_grid_has_lattice_and_extra_point() {
        let g = Grid::default_grid();
        assert_eq!(g.s_values.len(), 12);
        assert_eq!(g.points().len(), 145);
        assert!(g.points().contains(&(1.0, 4.0 / 3.0)));
        assert!(g.points().contains(&(1.0, 1.0)));
    }

    #[test]
    fn grid_rejects_non_positive_entries() {
        assert!(Grid::new(0.0, 1.0, 0.25, vec![]).is_err());
        assert!(Grid::new(0.5, 1.0, 0.0, vec![]).is_err());
        assert!(Grid::new(0.5, 1.0, 0.25, vec![(1.0, -1.0)]).is_err());
    }

    #[test]
    fn bisection_finds_linear_zero() {
        let root = bisect_zero(1.25, 1.5, |t| Ok(vec![t - 4.0 / 3.0, 2.0 * (t - 4.0 / 3.0)]), 1e-13)
            .unwrap()
            .unwrap();
        assert!((root - 4.0 / 3.0).abs() < 1e-12);
        assert!(bisect_zero(0.0, 1.0, |t| Ok(vec![t + 1.0]), 1e-12).unwrap().is_none());
    }

    #[test]
    fn characteristic_set_display() {
        assert_eq!(
            CharacteristicSet::Points { points: vec![(1.0, 4.0 / 3.0)] }.to_string(),
            "{(1.000, 1.333)}"
        );
        assert_eq!(CharacteristicSet::LineS { s: 1.0 }.to_string(), "line s=1");
        assert_eq!(CharacteristicSet::All.to_string(), "all");
        assert_eq!(CharacteristicSet::Empty.to_string(), "empty");
    }
}
