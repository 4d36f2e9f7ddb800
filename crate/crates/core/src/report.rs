//! Run configuration, the verification suite, and deterministic report
//! serialization for the `verify`, `classify` and `sweep` commands.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::canonical::{
    count_up_to_sign, find, generate_f_structures, generate_product_structures,
    golden_action_check, named_f_polynomials, named_product_polynomials, verify_structure,
    CanonicalStructure, StructureCheck,
};
use crate::classify::{
    characteristic_set, check_metric_compat, check_product_compat, evaluate, sweep,
    CharacteristicSet, ClassCondition, ClassContext, ClassReport, Grid,
};
use crate::error::{FlagError, Result};
use crate::liealg::so_dim;
use crate::metricgeom::{
    build_split, u_tensor_closed, u_tensor_solved, BilinearMap, MetricParams, TripleSplit,
    UMethod,
};
use crate::phispace::{build_automorphism, build_phi_space, isotropy_dim, PhiSpace};

/// Residual bound for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Residual bound for orthogonality and the golden matrices.
pub const EXACT_TOL: f64 = 1e-12;
/// Bound on closed-form vs solved `U`.
pub const U_ORACLE_TOL: f64 = 1e-9;
/// Bisection tolerance for characteristic sets.
pub const REFINE_TOL: f64 = 1e-12;
/// Random `(s, t)` draws used by `verify`.
pub const RANDOM_DRAWS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "txt",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = FlagError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" | "txt" => Ok(OutputFormat::Text),
            other => Err(FlagError::InvalidParams(format!("unknown format '{other}'"))),
        }
    }
}

/// Parses a number, allowing a fraction such as `4/3`.
pub fn parse_number(s: &str) -> Result<f64> {
    let bad = || FlagError::InvalidParams(format!("not a number: '{s}'"));
    match s.trim().split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

/// Parses `s1,t1;s2,t2;…`.
pub fn parse_points(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (a, b) = p
                .split_once(',')
                .ok_or_else(|| FlagError::InvalidParams(format!("point '{p}' is not 's,t'")))?;
            Ok((parse_number(a)?, parse_number(b)?))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub m_blocks: usize,
    pub k: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub extra_points: Vec<(f64, f64)>,
    pub format: OutputFormat,
    /// Output file (`verify`, `classify`) or directory (`sweep`).
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub kappa: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 5,
            m_blocks: 1,
            k: 4,
            grid_min: 0.25,
            grid_max: 3.0,
            grid_step: 0.25,
            extra_points: vec![(1.0, 1.0), (1.0, 4.0 / 3.0)],
            format: OutputFormat::Text,
            out: None,
            seed: 0,
            kappa: None,
        }
    }
}

impl RunConfig {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            ..Self::default()
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(
            self.grid_min,
            self.grid_max,
            self.grid_step,
            self.extra_points.clone(),
        )
    }

    /// `κ` override, or `n − 1`.
    pub fn kappa(&self) -> Result<f64> {
        let kappa = self.kappa.unwrap_or((self.n - 1) as f64);
        if kappa > 0.0 && kappa.is_finite() {
            Ok(kappa)
        } else {
            Err(FlagError::InvalidParams(format!("kappa must be positive, got {kappa}")))
        }
    }

    /// Builds the space and checks every field.
    pub fn build(&self) -> Result<PhiSpace> {
        self.grid()?;
        self.kappa()?;
        build_phi_space(build_automorphism(self.n, self.m_blocks, self.k)?)
    }
}

/// Exit status for a command result: 0 success, 1 failed check or runtime
/// error, 2 invalid configuration.
pub fn exit_code<T>(result: &Result<T>, passed: impl Fn(&T) -> bool) -> i32 {
    match result {
        Ok(v) if passed(v) => 0,
        Ok(_) => 1,
        Err(FlagError::InvalidParams(_))
        | Err(FlagError::WrongBlockPattern(_))
        | Err(FlagError::UnknownStructure(_)) => 2,
        Err(_) => 1,
    }
}

// ---------------------------------------------------------------------------
// verify

#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub config: RunConfig,
    pub dims: SpaceDims,
    pub f_structures_up_to_sign: usize,
    pub product_structures_up_to_sign: usize,
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceDims {
    pub g: usize,
    pub h: usize,
    pub m: usize,
    pub blocks: Option<(usize, usize, usize)>,
}

fn space_dims(ps: &PhiSpace, split: Option<&TripleSplit>) -> SpaceDims {
    SpaceDims {
        g: so_dim(ps.n()),
        h: ps.h().dim(),
        m: ps.m().dim(),
        blocks: split.map(TripleSplit::dims),
    }
}

struct Checks(Vec<CheckLine>);

impl Checks {
    fn bound(&mut self, name: impl Into<String>, residual: f64, tol: f64) {
        self.0.push(CheckLine {
            name: name.into(),
            passed: residual < tol,
            residual: Some(residual),
            detail: format!("< {tol:.0e}"),
        });
    }

    fn flag(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(CheckLine {
            name: name.into(),
            passed,
            residual: None,
            detail: detail.into(),
        });
    }
}

fn named_present(structures: &[CanonicalStructure], names: &[(&str, Vec<f64>)]) -> (bool, String) {
    let missing: Vec<&str> = names
        .iter()
        .map(|(id, _)| *id)
        .filter(|id| find(structures, id).is_err() || find(structures, &format!("-{id}")).is_err())
        .collect();
    if missing.is_empty() {
        (true, "all named structures found with both signs".into())
    } else {
        (false, format!("missing: {}", missing.join(", ")))
    }
}

fn random_params(rng: &mut ChaCha8Rng, kappa: f64) -> Result<MetricParams> {
    let s = rng.random_range(0.25..3.0);
    let t = rng.random_range(0.25..3.0);
    MetricParams::new(s, t, kappa)
}

/// Runs the full verification suite.
pub fn cmd_verify(config: &RunConfig) -> Result<VerifyReport> {
    let ps = config.build()?;
    let kappa = config.kappa()?;
    let n = config.n;
    let mut checks = Checks(Vec::new());

    let reg = ps.check_regularity();
    checks.flag(
        "regularity",
        reg.all_pass(),
        format!(
            "direct sum {}, nonsingular on image {}, kernel stable {}, no fixed vector {}",
            reg.direct_sum, reg.a_nonsingular_on_image, reg.kernel_stable, reg.theta_no_fixed_vector
        ),
    );
    checks.bound("automorphism homomorphism", ps.homomorphism_residual()?, IDENTITY_TOL);
    checks.bound("automorphism isometry", ps.isometry_residual(), IDENTITY_TOL);
    checks.bound("theta order", ps.theta_order_residual(), IDENTITY_TOL);
    checks.bound("reductivity [h,m] ⊂ m", ps.reductivity_residual()?, IDENTITY_TOL);
    let expected_h = isotropy_dim(n, config.m_blocks);
    checks.flag(
        "isotropy dimension",
        ps.h().dim() == expected_h,
        format!("dim h = {}, expected {expected_h}", ps.h().dim()),
    );
    if config.m_blocks == 1 {
        checks.flag(
            "dim m = 3n - 7",
            ps.m().dim() == 3 * n - 7,
            format!("dim m = {}", ps.m().dim()),
        );
    }

    let fs = generate_f_structures(&ps)?;
    let prods = generate_product_structures(&ps)?;
    let f_count = count_up_to_sign(&fs);
    let p_count = count_up_to_sign(&prods);
    checks.flag(
        "f-structures",
        !fs.is_empty() && fs.len() == 2 * f_count,
        format!("{f_count} up to sign ({} total)", fs.len()),
    );
    checks.flag(
        "product structures",
        !prods.is_empty(),
        format!("{p_count} up to sign ({} total)", prods.len()),
    );
    if config.k == 4 || config.k == 6 {
        let (ok, detail) = named_present(&fs, &named_f_polynomials(config.k));
        checks.flag("named f-structures", ok, detail);
        let (ok, detail) = named_present(&prods, &named_product_polynomials(config.k));
        checks.flag("named product structures", ok, detail);
    }
    let all: Vec<CanonicalStructure> = fs.iter().chain(&prods).cloned().collect();
    for cs in &all {
        let c: StructureCheck = verify_structure(cs, &ps, &all)?;
        let worst = [
            c.identity_residual,
            c.equivariance_residual,
            c.commutator_residual,
            c.theta_commutator_residual,
            c.polynomial_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        checks.bound(format!("structure {}", cs.id()), worst, IDENTITY_TOL);
    }

    let split = if config.m_blocks == 1 {
        Some(build_split(&ps)?)
    } else {
        checks.flag("splitting", true, "skipped: needs m_blocks = 1");
        None
    };

    if let Some(split) = &split {
        if config.k == 4 || config.k == 6 {
            let golden = golden_action_check(&ps, &fs)?;
            checks.bound("golden actions", golden.max_deviation(), EXACT_TOL);
        }
        let (d1, d2, d3) = split.dims();
        checks.flag(
            "block dimensions",
            (d1, d2, d3) == (2, 2 * (n - 3), n - 3),
            format!("({d1}, {d2}, {d3})"),
        );
        checks.bound("block bracket relations", split.bracket_relation_residual()?, IDENTITY_TOL);
        checks.bound("block orthogonality", split.orthogonality_residual()?, EXACT_TOL);
        checks.bound("block Ad(h)-invariance", split.invariance_residual()?, IDENTITY_TOL);

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut u_dev: f64 = 0.0;
        let mut u_pairs: f64 = 0.0;
        let mut f_compat: f64 = 0.0;
        let mut p_compat: f64 = 0.0;
        let d = split.dim();
        for _ in 0..RANDOM_DRAWS {
            let params = random_params(&mut rng, kappa)?;
            let closed = BilinearMap::u_closed(split, &params)?;
            let solved = BilinearMap::u_solved(split, &params)?;
            u_dev = u_dev.max(closed.max_diff(&solved) / (1.0 + closed.amax()));
            let x = split.from_coords(&DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)));
            let y = split.from_coords(&DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)));
            let uc = u_tensor_closed(split, &params, &x, &y)?;
            let us = u_tensor_solved(split, &params, &x, &y)?;
            u_pairs = u_pairs.max((&uc - &us).amax() / (1.0 + uc.amax()));
            for f in &fs {
                f_compat = f_compat.max(check_metric_compat(f, split, &params)?.residual);
            }
            for p in &prods {
                p_compat = p_compat.max(check_product_compat(p, split, &params)?.residual);
            }
        }
        checks.bound("U closed vs solved on basis pairs", u_dev, U_ORACLE_TOL);
        checks.bound("U closed vs solved on random pairs", u_pairs, U_ORACLE_TOL);
        checks.bound("metric compatibility of f-structures", f_compat, IDENTITY_TOL);
        checks.bound("metric compatibility of product structures", p_compat, IDENTITY_TOL);
    }

    Ok(VerifyReport {
        config: config.clone(),
        dims: space_dims(&ps, split.as_ref()),
        f_structures_up_to_sign: f_count,
        product_structures_up_to_sign: p_count,
        checks: checks.0,
    })
}

// ---------------------------------------------------------------------------
// classify

fn class_setup(config: &RunConfig, structure_id: &str) -> Result<(TripleSplit, ClassContext)> {
    let ps = config.build()?;
    let split = build_split(&ps)?;
    let fs = generate_f_structures(&ps)?;
    let f = find(&fs, structure_id)?;
    let ctx = ClassContext::new(&split, f)?;
    Ok((split, ctx))
}

/// Class memberships of one f-structure at one `(s, t)`.
pub fn cmd_classify(config: &RunConfig, structure_id: &str, s: f64, t: f64) -> Result<ClassReport> {
    let (_, ctx) = class_setup(config, structure_id)?;
    let params = MetricParams::new(s, t, config.kappa()?)?;
    evaluate(&ctx, &params, UMethod::Closed)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Clone, Debug, Serialize)]
pub struct ClassTriple<T> {
    #[serde(rename = "KILL")]
    pub kill: T,
    #[serde(rename = "NK")]
    pub nk: T,
    #[serde(rename = "G1")]
    pub g1: T,
}

impl<T> ClassTriple<T> {
    fn from_fn(mut f: impl FnMut(ClassCondition) -> T) -> Self {
        Self {
            kill: f(ClassCondition::Kill),
            nk: f(ClassCondition::Nk),
            g1: f(ClassCondition::G1),
        }
    }

    pub fn get(&self, cond: ClassCondition) -> &T {
        match cond {
            ClassCondition::Kill => &self.kill,
            ClassCondition::Nk => &self.nk,
            ClassCondition::G1 => &self.g1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub s: f64,
    pub t: f64,
    pub residuals: ClassTriple<f64>,
    pub memberships: ClassTriple<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureEntry {
    pub id: String,
    pub polynomial: Vec<f64>,
    pub checks: StructureCheck,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub sets: ClassTriple<CharacteristicSet>,
    pub text: String,
    pub chain_violations: usize,
    pub indeterminate: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceInfo {
    pub n: usize,
    pub k: usize,
    pub dims: SpaceDims,
}

/// Sweep results for one f-structure.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub config: RunConfig,
    pub space: SpaceInfo,
    pub structures: Vec<StructureEntry>,
    pub sweep: Vec<SweepPoint>,
    pub summary: SweepSummary,
}

impl SweepReport {
    pub fn structure_id(&self) -> &str {
        &self.structures[0].id
    }
}

/// Sweeps one f-structure over the configured grid.
pub fn sweep_structure(config: &RunConfig, structure_id: &str) -> Result<SweepReport> {
    let ps = config.build()?;
    let split = build_split(&ps)?;
    let fs = generate_f_structures(&ps)?;
    let f = find(&fs, structure_id)?;
    sweep_one(config, &ps, &split, &fs, f)
}

fn sweep_one(
    config: &RunConfig,
    ps: &PhiSpace,
    split: &TripleSplit,
    fs: &[CanonicalStructure],
    f: &CanonicalStructure,
) -> Result<SweepReport> {
    let kappa = config.kappa()?;
    let grid = config.grid()?;
    let ctx = ClassContext::new(split, f)?;
    let reports = sweep(&ctx, &grid.points(), kappa, UMethod::Closed)?;
    let points: Vec<SweepPoint> = reports
        .iter()
        .map(|r| SweepPoint {
            s: r.s,
            t: r.t,
            residuals: ClassTriple::from_fn(|c| r.get(c).residual),
            memberships: ClassTriple::from_fn(|c| r.get(c).member),
        })
        .collect();
    let mut sets = Vec::with_capacity(3);
    for cond in ClassCondition::ALL {
        sets.push(characteristic_set(&ctx, cond, &grid, kappa, REFINE_TOL, UMethod::Closed)?);
    }
    let mut sets = sets.into_iter();
    let sets = ClassTriple::from_fn(|_| sets.next().expect("three sets"));
    let text = ClassCondition::ALL
        .iter()
        .map(|&c| format!("{c}: {}", sets.get(c)))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(SweepReport {
        config: config.clone(),
        space: SpaceInfo {
            n: ps.n(),
            k: ps.k(),
            dims: space_dims(ps, Some(split)),
        },
        structures: vec![StructureEntry {
            id: f.id().to_string(),
            polynomial: f.theta_polynomial().to_vec(),
            checks: verify_structure(f, ps, fs)?,
        }],
        sweep: points,
        summary: SweepSummary {
            text,
            chain_violations: reports.iter().filter(|r| !r.chain_holds()).count(),
            indeterminate: reports.iter().filter(|r| r.any_indeterminate()).count(),
            sets,
        },
    })
}

/// Sweeps every f-structure up to sign (the positively signed
/// representative of each pair).
pub fn sweep_all(config: &RunConfig) -> Result<Vec<SweepReport>> {
    let ps = config.build()?;
    let split = build_split(&ps)?;
    let fs = generate_f_structures(&ps)?;
    fs.iter()
        .filter(|f| !f.id().starts_with('-'))
        .map(|f| sweep_one(config, &ps, &split, &fs, f))
        .collect()
}

/// Runs [`sweep_all`] and writes one report per structure into
/// `config.out` (default: the working directory). Returns the written paths.
pub fn cmd_sweep(config: &RunConfig) -> Result<(Vec<SweepReport>, Vec<PathBuf>)> {
    let reports = sweep_all(config)?;
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let mut paths = Vec::with_capacity(reports.len());
    for r in &reports {
        let path = dir.join(sweep_file_name(config, r.structure_id()));
        write_atomic(&path, render_sweep(r, config.format)?.as_bytes())?;
        paths.push(path);
    }
    Ok((reports, paths))
}

pub fn sweep_file_name(config: &RunConfig, structure_id: &str) -> String {
    format!(
        "sweep_n{}_k{}_{}.{}",
        config.n,
        config.k,
        structure_id,
        config.format.extension()
    )
}

// ---------------------------------------------------------------------------
// serialization

/// Pretty JSON with every float written as `{:.16e}` (17 significant digits).
struct SciFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| FlagError::Internal(e.to_string()))
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn verdict(m: &crate::classify::Membership) -> &'static str {
    if m.member {
        "member"
    } else if m.indeterminate {
        "indeterminate"
    } else {
        "non-member"
    }
}

pub fn render_verify(report: &VerifyReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => {
            let mut out = String::from("check,passed,residual,detail\n");
            for c in &report.checks {
                let _ = writeln!(
                    out,
                    "{},{},{},\"{}\"",
                    c.name,
                    c.passed,
                    c.residual.map(sci).unwrap_or_default(),
                    c.detail.replace('"', "'")
                );
            }
            Ok(out)
        }
        OutputFormat::Text => {
            let c = &report.config;
            let d = &report.dims;
            let mut out = format!(
                "space n={} m_blocks={} k={}: dim g={} h={} m={}\n",
                c.n, c.m_blocks, c.k, d.g, d.h, d.m
            );
            for line in &report.checks {
                let residual = line
                    .residual
                    .map(|r| format!(" residual {r:.3e}"))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{} {}{} ({})",
                    if line.passed { "PASS" } else { "FAIL" },
                    line.name,
                    residual,
                    line.detail
                );
            }
            let _ = writeln!(
                out,
                "{} f-structures up to sign, {} product structures up to sign",
                report.f_structures_up_to_sign, report.product_structures_up_to_sign
            );
            let _ = writeln!(out, "{}", if report.passed() { "verify: pass" } else { "verify: FAIL" });
            Ok(out)
        }
    }
}

pub fn render_classify(report: &ClassReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                sci(report.s),
                sci(report.t),
                sci(report.kill.residual),
                sci(report.nk.residual),
                sci(report.g1.residual),
                report.kill.member,
                report.nk.member,
                report.g1.member
            );
            Ok(out)
        }
        OutputFormat::Text => {
            let mut out = format!(
                "structure {} at (s, t) = ({}, {})\n",
                report.structure_id, report.s, report.t
            );
            for c in ClassCondition::ALL {
                let m = report.get(c);
                let _ = write!(out, "{c}: {} (residual {:.3e})", verdict(m), m.residual);
                if let (false, Some(w)) = (m.member, &m.witness) {
                    let _ = write!(out, " worst pair ({}, {})", w.x, w.y);
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

pub const CSV_HEADER: &str = "s,t,kill_residual,nk_residual,g1_residual,kill,nk,g1";

pub fn render_sweep(report: &SweepReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# n={} k={} structure={}",
                report.space.n,
                report.space.k,
                report.structure_id()
            );
            let _ = writeln!(out, "# summary: {}", report.summary.text);
            let _ = writeln!(
                out,
                "# chain_violations={} indeterminate={}",
                report.summary.chain_violations, report.summary.indeterminate
            );
            out.push_str(CSV_HEADER);
            out.push('\n');
            for p in &report.sweep {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    sci(p.s),
                    sci(p.t),
                    sci(p.residuals.kill),
                    sci(p.residuals.nk),
                    sci(p.residuals.g1),
                    p.memberships.kill,
                    p.memberships.nk,
                    p.memberships.g1
                );
            }
            Ok(out)
        }
        OutputFormat::Text => {
            let mut out = format!(
                "structure {} on n={} k={}: {} grid points\n",
                report.structure_id(),
                report.space.n,
                report.space.k,
                report.sweep.len()
            );
            let _ = writeln!(out, "{}", report.summary.text);
            let _ = writeln!(
                out,
                "chain violations: {}, indeterminate points: {}",
                report.summary.chain_violations, report.summary.indeterminate
            );
            Ok(out)
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| FlagError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_points() {
        assert_eq!(parse_number("4/3").unwrap(), 4.0 / 3.0);
        assert_eq!(
            parse_points("1,1; 1,4/3").unwrap(),
            vec![(1.0, 1.0), (1.0, 4.0 / 3.0)]
        );
        assert!(parse_points("1;2").is_err());
        assert!("yaml".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json(&vec![1.0 / 3.0]).unwrap();
        assert!(s.contains("3.3333333333333331e-1"), "{s}");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], 1.0 / 3.0);
    }

    #[test]
    fn invalid_config_maps_to_two() {
        let r = cmd_verify(&RunConfig::new(4, 3));
        assert_eq!(exit_code(&r, VerifyReport::passed), 2);
        let mut c = RunConfig::new(5, 4);
        c.grid_step = 0.0;
        assert_eq!(exit_code(&cmd_verify(&c), VerifyReport::passed), 2);
    }

    #[test]
    fn unknown_structure_is_reported() {
        let err = cmd_classify(&RunConfig::new(5, 6), "f9", 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("unknown structure"));
    }
}
