//! Canonical structures: operators on `m` that are polynomials in `θ`.
//!
//! For a Φ-space of order `k` every nontrivial canonical f-structure is
//!
//! ```text
//! f(θ) = (2/k) Σ_{m=1..u} (Σ_{j=1..u} ζ_j sin(2πmj/k)) (θᵐ − θ^{k−m}),   ζ ∈ {−1,0,1}ᵘ \ {0}
//! ```
//!
//! and every canonical almost product structure is `P(θ) = Σ a_m θᵐ` with
//! `a_m = (2/k) Σ_j ξ_j cos(2πmj/k)` for odd `k`, and
//! `a_m = (1/k)(2 Σ_j ξ_j cos(2πmj/k) + (−1)ᵐ ξ_{k/2})` for even `k`,
//! `ξ_j ∈ {−1, 1}`. Here `u = (k−1)/2` for odd `k` and `k/2 − 1` for even `k`.
//!
//! Polynomials are only determined modulo `1 + θ + … + θ^{k−1}`, which
//! vanishes on `m` because `θ` has no eigenvalue 1.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FlagError, Result};
use crate::liealg::{EndoOnM, LieElement};
use crate::phispace::PhiSpace;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    FStructure,
    AlmostProduct,
    AlmostComplex,
}

/// A canonical structure together with the data that produced it.
#[derive(Clone, Debug)]
pub struct CanonicalStructure {
    id: String,
    kind: StructureKind,
    signature: Vec<i8>,
    op: EndoOnM,
    theta_polynomial: Vec<f64>,
}

impl CanonicalStructure {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    /// The `ζ` or `ξ` tuple.
    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn op(&self) -> &EndoOnM {
        &self.op
    }

    /// Coefficients `a_0 … a_{k−1}` with `op = Σ a_m θᵐ`.
    pub fn theta_polynomial(&self) -> &[f64] {
        &self.theta_polynomial
    }

    pub fn is_f_structure(&self) -> bool {
        matches!(self.kind, StructureKind::FStructure | StructureKind::AlmostComplex)
    }

    /// Same structure over another basis of `m`.
    pub fn rebase(&self, domain: &crate::Subspace) -> Result<Self> {
        Ok(Self {
            op: self.op.rebase(domain)?,
            ..self.clone()
        })
    }

    /// Residual of the defining identity: `‖f³ + f‖` or `‖P² − id‖`.
    pub fn identity_residual(&self) -> f64 {
        match self.kind {
            StructureKind::AlmostProduct => self
                .op
                .pow(2)
                .sub(&EndoOnM::identity(self.op.domain().clone()))
                .max_norm(),
            _ => self.op.pow(3).add(&self.op).max_norm(),
        }
    }
}

/// `u = ⌊(k−1)/2⌋`.
pub fn u_of_k(k: usize) -> Result<usize> {
    if k < 3 {
        return Err(FlagError::InvalidParams(format!("order k must be at least 3, got {k}")));
    }
    Ok((k - 1) / 2)
}

/// Polynomial coefficients (length `k`) of the f-structure with signature `ζ`.
pub fn f_coefficients(k: usize, zeta: &[i8]) -> Vec<f64> {
    let mut a = vec![0.0; k];
    for m in 1..=zeta.len() {
        let c: f64 = zeta
            .iter()
            .enumerate()
            .map(|(j, &z)| z as f64 * (2.0 * PI * (m * (j + 1)) as f64 / k as f64).sin())
            .sum();
        let c = 2.0 * c / k as f64;
        a[m] += c;
        a[k - m] -= c;
    }
    a
}

/// Polynomial coefficients (length `k`) of the almost product structure with
/// signature `ξ`. For even `k` the last entry of `ξ` is the sign on the
/// `θ = −1` eigenspace.
pub fn product_coefficients(k: usize, xi: &[i8]) -> Vec<f64> {
    let even = k.is_multiple_of(2);
    let u = if even { xi.len() - 1 } else { xi.len() };
    (0..k)
        .map(|m| {
            let cos_sum: f64 = xi[..u]
                .iter()
                .enumerate()
                .map(|(j, &x)| x as f64 * (2.0 * PI * (m * (j + 1)) as f64 / k as f64).cos())
                .sum();
            if even {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                (2.0 * cos_sum + sign * xi[u] as f64) / k as f64
            } else {
                2.0 * cos_sum / k as f64
            }
        })
        .collect()
}

/// True iff `p − q` is a constant multiple of `1 + θ + … + θ^{k−1}`, i.e.
/// the two polynomials agree on `m`.
pub fn polynomials_equivalent(p: &[f64], q: &[f64], tol: f64) -> bool {
    if p.len() != q.len() || p.is_empty() {
        return false;
    }
    let shift = p[0] - q[0];
    p.iter().zip(q).all(|(a, b)| (a - b - shift).abs() <= tol)
}

/// Named f-structures for orders 4 and 6 as `(id, coefficients)`.
pub fn named_f_polynomials(k: usize) -> Vec<(&'static str, Vec<f64>)> {
    let r3 = 3f64.sqrt();
    match k {
        4 => vec![("f0", vec![0.0, 0.5, 0.0, -0.5])],
        6 => {
            let a = 1.0 / r3;
            let b = 1.0 / (2.0 * r3);
            vec![
                ("f1", vec![0.0, a, 0.0, 0.0, 0.0, -a]),
                ("f2", vec![0.0, b, -b, 0.0, b, -b]),
                ("f3", vec![0.0, b, b, 0.0, -b, -b]),
                ("f4", vec![0.0, 0.0, a, 0.0, -a, 0.0]),
            ]
        }
        _ => Vec::new(),
    }
}

/// Named almost product structures for orders 4 and 6.
pub fn named_product_polynomials(k: usize) -> Vec<(&'static str, Vec<f64>)> {
    let third = 1.0 / 3.0;
    match k {
        4 => vec![("P0", vec![0.0, 0.0, 1.0, 0.0])],
        6 => vec![
            ("P1", vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ("P2", vec![0.0, third, 1.0, third, 1.0, third]),
            ("P3", vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            ("P4", vec![0.0, -2.0 * third, 0.0, third, 0.0, -2.0 * third]),
        ],
        _ => Vec::new(),
    }
}

fn sign_tuples(len: usize, values: &[i8]) -> Vec<Vec<i8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut t = prefix.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

fn signature_label(prefix: &str, sig: &[i8]) -> String {
    let parts: Vec<String> = sig.iter().map(|s| s.to_string()).collect();
    format!("{prefix}[{}]", parts.join(","))
}

/// Deduplicates by operator equality and attaches names from `named`.
/// Named structures come first in table order, each `+` before `−`.
fn assemble(
    theta: &EndoOnM,
    raw: Vec<(Vec<i8>, Vec<f64>)>,
    named: &[(&'static str, Vec<f64>)],
    kind_of: impl Fn(&EndoOnM) -> StructureKind,
    unnamed_prefix: &str,
) -> Vec<CanonicalStructure> {
    let mut distinct: Vec<(Vec<i8>, Vec<f64>, EndoOnM)> = Vec::new();
    for (sig, coeffs) in raw {
        let op = theta.polynomial(&coeffs);
        if distinct
            .iter()
            .any(|(_, _, other)| other.sub(&op).max_norm() <= tol::DEDUP)
        {
            continue;
        }
        distinct.push((sig, coeffs, op));
    }

    let named_ops: Vec<(&str, EndoOnM)> = named
        .iter()
        .map(|(name, c)| (*name, theta.polynomial(c)))
        .collect();
    let mut keyed: Vec<(usize, CanonicalStructure)> = distinct
        .into_iter()
        .enumerate()
        .map(|(pos, (sig, coeffs, op))| {
            let mut id = None;
            let mut key = named_ops.len() * 2 + pos;
            for (idx, (name, nop)) in named_ops.iter().enumerate() {
                if nop.sub(&op).max_norm() <= tol::DEDUP {
                    id = Some(name.to_string());
                    key = 2 * idx;
                } else if nop.add(&op).max_norm() <= tol::DEDUP {
                    id = Some(format!("-{name}"));
                    key = 2 * idx + 1;
                }
            }
            let kind = kind_of(&op);
            let id = id.unwrap_or_else(|| signature_label(unnamed_prefix, &sig));
            (
                key,
                CanonicalStructure {
                    id,
                    kind,
                    signature: sig,
                    op,
                    theta_polynomial: coeffs,
                },
            )
        })
        .collect();
    keyed.sort_by_key(|(key, _)| *key);
    keyed.into_iter().map(|(_, s)| s).collect()
}

/// All distinct nontrivial canonical f-structures on `ps`.
pub fn generate_f_structures(ps: &PhiSpace) -> Result<Vec<CanonicalStructure>> {
    let k = ps.k();
    let u = u_of_k(k)?;
    let raw = sign_tuples(u, &[1, 0, -1])
        .into_iter()
        .filter(|z| z.iter().any(|&v| v != 0))
        .map(|z| {
            let c = f_coefficients(k, &z);
            (z, c)
        })
        .collect();
    let id = EndoOnM::identity(ps.m().clone());
    let structures = assemble(
        ps.theta(),
        raw,
        &named_f_polynomials(k),
        |op| {
            if op.compose(op).add(&id).max_norm() <= tol::NUM {
                StructureKind::AlmostComplex
            } else {
                StructureKind::FStructure
            }
        },
        "f",
    );
    // a signature can act as zero when θ lacks the matching eigenvalues
    Ok(structures
        .into_iter()
        .filter(|s| s.op.max_norm() > tol::DEDUP)
        .collect())
}

/// All distinct canonical almost product structures on `ps`.
pub fn generate_product_structures(ps: &PhiSpace) -> Result<Vec<CanonicalStructure>> {
    let k = ps.k();
    let u = u_of_k(k)?;
    let len = if k.is_multiple_of(2) { u + 1 } else { u };
    let raw = sign_tuples(len, &[1, -1])
        .into_iter()
        .map(|xi| {
            let c = product_coefficients(k, &xi);
            (xi, c)
        })
        .collect();
    Ok(assemble(
        ps.theta(),
        raw,
        &named_product_polynomials(k),
        |_| StructureKind::AlmostProduct,
        "P",
    ))
}

/// Finds a structure by id.
pub fn find<'a>(structures: &'a [CanonicalStructure], id: &str) -> Result<&'a CanonicalStructure> {
    structures
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| FlagError::UnknownStructure(id.to_string()))
}

/// Count of structures modulo sign.
pub fn count_up_to_sign(structures: &[CanonicalStructure]) -> usize {
    let mut reps: Vec<&EndoOnM> = Vec::new();
    for s in structures {
        let dup = reps.iter().any(|r| {
            r.sub(&s.op).max_norm() <= tol::DEDUP || r.add(&s.op).max_norm() <= tol::DEDUP
        });
        if !dup {
            reps.push(&s.op);
        }
    }
    reps.len()
}

/// Residuals of the algebraic checks on one structure.
#[derive(Clone, Debug, Serialize)]
pub struct StructureCheck {
    pub id: String,
    /// `‖f³ + f‖` or `‖P² − id‖`.
    pub identity_residual: f64,
    /// `max_h ‖[ad(h)|m, op]‖`.
    pub equivariance_residual: f64,
    /// `max ‖[op, op′]‖` over the other structures passed in.
    pub commutator_residual: f64,
    /// `‖[op, θ]‖`.
    pub theta_commutator_residual: f64,
    /// `‖op − Σ a_m θᵐ‖` from the stored coefficients.
    pub polynomial_residual: f64,
}

impl StructureCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.identity_residual < tol
            && self.equivariance_residual < tol
            && self.commutator_residual < tol
            && self.theta_commutator_residual < tol
            && self.polynomial_residual < tol
    }
}

/// Checks the defining identity, `Ad(H)`-invariance and commutativity with
/// `θ` and with every structure in `others`.
pub fn verify_structure(
    cs: &CanonicalStructure,
    ps: &PhiSpace,
    others: &[CanonicalStructure],
) -> Result<StructureCheck> {
    let mut equivariance: f64 = 0.0;
    for h in ps.h().basis() {
        let ad = ps.ad_on_m(h)?.rebase(cs.op.domain())?;
        equivariance = equivariance.max(ad.commutator(&cs.op).max_norm());
    }
    let mut commutator: f64 = 0.0;
    for o in others {
        commutator = commutator.max(cs.op.commutator(&o.op).max_norm());
    }
    let theta = ps.theta().rebase(cs.op.domain())?;
    let poly = theta.polynomial(&cs.theta_polynomial);
    Ok(StructureCheck {
        id: cs.id.clone(),
        identity_residual: cs.identity_residual(),
        equivariance_residual: equivariance,
        commutator_residual: commutator,
        theta_commutator_residual: cs.op.commutator(&theta).max_norm(),
        polynomial_residual: poly.sub(&cs.op).max_norm(),
    })
}

/// Expected image of `S ∈ m` under the named f-structure, read off the
/// explicit matrix form of the action on the `SO(2)×SO(n−3)` flag manifold.
pub fn golden_action(id: &str, s: &LieElement) -> Option<LieElement> {
    let n = s.n();
    let mut out = DMatrix::zeros(n, n);
    // (m1 rotation, sign on m2, keeps m1)
    let (m1, m2_sign): (bool, f64) = match id {
        "f0" | "f1" => (true, 1.0),
        "f2" => (false, 1.0),
        "f3" => (true, 0.0),
        "f4" => (true, -1.0),
        _ => return None,
    };
    if m1 {
        out[(0, 1)] = s.get(0, 2);
        out[(0, 2)] = -s.get(0, 1);
    }
    for j in 3..n {
        out[(1, j)] = -m2_sign * s.get(2, j);
        out[(2, j)] = m2_sign * s.get(1, j);
    }
    Some(LieElement::skew_part(&(&out - out.transpose())))
}

/// One entry of the golden comparison.
#[derive(Clone, Debug, Serialize)]
pub struct GoldenMismatch {
    pub id: String,
    pub input: String,
    pub row: usize,
    pub col: usize,
    pub expected: f64,
    pub actual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldenReport {
    /// `(id, max entrywise deviation)` per checked structure.
    pub deviations: Vec<(String, f64)>,
    pub mismatches: Vec<GoldenMismatch>,
}

impl GoldenReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|(_, d)| *d).fold(0.0, f64::max)
    }
}

/// The coordinate elements `s_12, s_13, s_1j, s_2j, s_3j` of `m` (unit entries)
/// plus one generic element with all of them set to distinct values.
pub fn golden_inputs(n: usize) -> Vec<(String, LieElement)> {
    let mut entries = vec![(0, 1), (0, 2)];
    for j in 3..n {
        entries.push((0, j));
        entries.push((1, j));
        entries.push((2, j));
    }
    let mut inputs: Vec<(String, LieElement)> = entries
        .iter()
        .map(|&(i, j)| {
            (
                format!("s{}{}=1", i + 1, j + 1),
                LieElement::elementary(n, i, j),
            )
        })
        .collect();
    let mut generic = LieElement::zero(n);
    for (idx, &(i, j)) in entries.iter().enumerate() {
        generic = &generic + &LieElement::elementary(n, i, j).scale(0.5 + 0.25 * idx as f64);
    }
    inputs.push(("generic".into(), generic));
    inputs
}

/// Compares each named f-structure with its explicit action, entrywise,
/// on every coordinate element of `m` and on a generic element.
pub fn golden_action_check(ps: &PhiSpace, structures: &[CanonicalStructure]) -> Result<GoldenReport> {
    if ps.spec().m_blocks() != 1 || !(ps.k() == 4 || ps.k() == 6) {
        return Err(FlagError::WrongBlockPattern(
            "explicit actions are tabulated for m_blocks = 1 and k ∈ {4, 6}".into(),
        ));
    }
    let n = ps.n();
    let inputs = golden_inputs(n);
    let mut deviations = Vec::new();
    let mut mismatches = Vec::new();
    for (name, _) in named_f_polynomials(ps.k()) {
        let cs = find(structures, name)?;
        let mut worst: f64 = 0.0;
        for (label, s) in &inputs {
            if !ps.m().contains(s)? {
                return Err(FlagError::NotInM(ps.m().residual(s)?));
            }
            let actual = cs.op.apply(s)?;
            let expected = golden_action(name, s).expect("named structure");
            for r in 0..n {
                for c in 0..n {
                    let dev = (actual.get(r, c) - expected.get(r, c)).abs();
                    worst = worst.max(dev);
                    if dev > 1e-12 {
                        mismatches.push(GoldenMismatch {
                            id: name.to_string(),
                            input: label.clone(),
                            row: r + 1,
                            col: c + 1,
                            expected: expected.get(r, c),
                            actual: actual.get(r, c),
                        });
                    }
                }
            }
        }
        deviations.push((name.to_string(), worst));
    }
    Ok(GoldenReport {
        deviations,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phispace::{build_automorphism, build_phi_space};

    fn space(n: usize, k: usize) -> PhiSpace {
        build_phi_space(build_automorphism(n, 1, k).unwrap()).unwrap()
    }

    #[test]
    fn u_values() {
        assert_eq!(u_of_k(4).unwrap(), 1);
        assert_eq!(u_of_k(6).unwrap(), 2);
        assert_eq!(u_of_k(7).unwrap(), 3);
        assert_eq!(u_of_k(3).unwrap(), 1);
        assert!(u_of_k(2).is_err());
    }

    #[test]
    fn k6_signatures_map_to_named_structures() {
        // sin(π/3) = sin(2π/3) = √3/2, sin(4π/3) = −√3/2
        let named = named_f_polynomials(6);
        let lookup = |id: &str| named.iter().find(|(n, _)| *n == id).unwrap().1.clone();
        for (zeta, id) in [([1, 1], "f1"), ([1, -1], "f4"), ([1, 0], "f3"), ([0, 1], "f2")] {
            let c = f_coefficients(6, &zeta);
            let expected = lookup(id);
            for (a, b) in c.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-15, "{zeta:?} → {id}: {c:?}");
            }
        }
    }

    #[test]
    fn k4_generates_plus_minus_f0() {
        let ps = space(5, 4);
        let fs = generate_f_structures(&ps).unwrap();
        let ids: Vec<&str> = fs.iter().map(|s| s.id()).collect();
        assert_eq!(ids, ["f0", "-f0"]);
        assert_eq!(fs[0].theta_polynomial(), &[0.0, 0.5, 0.0, -0.5]);
    }

    #[test]
    fn theta_is_not_an_f_structure_for_k6() {
        let ps = space(5, 6);
        let fake = CanonicalStructure {
            id: "theta".into(),
            kind: StructureKind::FStructure,
            signature: vec![],
            op: ps.theta().clone(),
            theta_polynomial: vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        };
        let check = verify_structure(&fake, &ps, &[]).unwrap();
        assert!(check.identity_residual > 0.1);
    }

    #[test]
    fn golden_action_of_f0_on_single_entries() {
        let ps = space(4, 4);
        let fs = generate_f_structures(&ps).unwrap();
        let f0 = find(&fs, "f0").unwrap();
        let out = f0.op().apply(&LieElement::elementary(4, 1, 3)).unwrap();
        let expected = LieElement::elementary(4, 2, 3);
        assert!((&out - &expected).amax() < 1e-12);
    }

    #[test]
    fn golden_action_of_f2_and_f3_on_m1() {
        let ps = space(4, 6);
        let fs = generate_f_structures(&ps).unwrap();
        let f2 = find(&fs, "f2").unwrap();
        assert!(f2.op().apply(&LieElement::elementary(4, 0, 1)).unwrap().amax() < 1e-12);
        let f3 = find(&fs, "f3").unwrap();
        let out = f3.op().apply(&LieElement::elementary(4, 0, 2)).unwrap();
        assert!((&out - &LieElement::elementary(4, 0, 1)).amax() < 1e-12);
    }

    #[test]
    fn unknown_structure_is_an_error() {
        let ps = space(5, 6);
        let fs = generate_f_structures(&ps).unwrap();
        assert!(matches!(find(&fs, "f9"), Err(FlagError::UnknownStructure(_))));
    }

    #[test]
    fn equivalent_polynomials_differ_by_constant() {
        let p = vec![-5.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        assert!(polynomials_equivalent(&p, &[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12));
        assert!(!polynomials_equivalent(&p, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0], 1e-12));
    }
}
