//! Run configurations, verification campaigns, JSON reports and CSV plot data.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::clifford::{build_clifford_rep, CliffordRep, Signature, Spinor};
use crate::error::{Error, Result};
use crate::jet::C64;
use crate::metric::{rescale, FamilyDescriptor, MetricPatch, RescaleFunction};
use crate::par;
use crate::sampling::{random_point, rng};
use crate::spinor::{
    covariance_check, dphi_schouten_check, null_kernel_spinor, twistor_residual, ConstantSpinor, PositionClifford,
    SpinorField, Weighted,
};
use crate::tractor::{
    assemble_two_form, classify_orbit, cross_check_two_form, lift_to_twistor, parallel_twistor_residual, wedge_defect,
};
use crate::zero_set::{classify_zero_set, SearchConfig, ZeroSetReport};

pub const SCHEMA: &str = "spintractor/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    Constant,
    PositionClifford,
    /// Constant spinor projected onto the kernel of a null vector.
    NullKernel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinorSeed {
    pub kind: SeedKind,
    /// `[re, im]` pairs, one per spinor component.
    pub components: Vec<[f64; 2]>,
    /// Frame components of a null vector `l`; the seed is replaced by `l·S`.
    /// Defaults to `e_0 + e_1` for `null_kernel`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_direction: Option<Vec<f64>>,
    /// Base point of `position_clifford`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignFlags {
    pub verify_twistor: bool,
    pub covariance: bool,
    pub two_form: bool,
    pub orbit: bool,
    pub zero_set: bool,
}

impl CampaignFlags {
    pub fn all() -> Self {
        CampaignFlags { verify_twistor: true, covariance: true, two_form: true, orbit: true, zero_set: true }
    }

    pub fn any(&self) -> bool {
        self.verify_twistor || self.covariance || self.two_form || self.orbit || self.zero_set
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub twistor: f64,
    pub covariance: f64,
    pub split: f64,
    pub integrability: f64,
    pub two_form: f64,
    pub simplicity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { twistor: 1e-10, covariance: 1e-8, split: 1e-9, integrability: 1e-8, two_form: 1e-8, simplicity: 1e-9 }
    }
}

impl Tolerances {
    fn scaled(&self, s: f64) -> Self {
        Tolerances {
            twistor: self.twistor * s,
            covariance: self.covariance * s,
            split: self.split * s,
            integrability: self.integrability * s,
            two_form: self.two_form * s,
            simplicity: self.simplicity * s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub points: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { points: 50, seed: 0, tolerances: Tolerances::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyDescriptor,
    pub spinor_seed: SpinorSeed,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescale: Option<RescaleFunction>,
    #[serde(default)]
    pub campaign: CampaignFlags,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_search: Option<SearchConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Which campaigns a run executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyTwistor,
    CovarianceScan,
    TwoForm,
    ClassifyOrbit,
    ZeroSet,
    All,
}

impl Command {
    fn flags(self, config: &CampaignFlags) -> CampaignFlags {
        let one = CampaignFlags::default();
        match self {
            Command::VerifyTwistor => CampaignFlags { verify_twistor: true, ..one },
            Command::CovarianceScan => CampaignFlags { covariance: true, ..one },
            Command::TwoForm => CampaignFlags { two_form: true, ..one },
            Command::ClassifyOrbit => CampaignFlags { orbit: true, ..one },
            Command::ZeroSet => CampaignFlags { zero_set: true, ..one },
            Command::All if config.any() => config.clone(),
            Command::All => CampaignFlags::all(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tol_scale: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A plot-ready table.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignReport {
    pub schema: &'static str,
    pub toolkit_version: &'static str,
    pub command: Command,
    pub config: RunConfig,
    pub seed: u64,
    pub tol_scale: f64,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_types: Option<BTreeMap<String, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_set: Option<ZeroSetReport>,
    pub passed: bool,
    pub wall_time_seconds: f64,
    #[serde(skip)]
    pub series: Vec<Series>,
}

impl CampaignReport {
    /// Pretty JSON followed by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Validated inputs shared by all campaigns.
struct Setup {
    base_patch: MetricPatch,
    patch: MetricPatch,
    rep: CliffordRep,
    base_field: Box<dyn SpinorField>,
    points: Vec<Vec<f64>>,
    tol: Tolerances,
}

fn seed_spinor(rep: &CliffordRep, seed: &SpinorSeed) -> Result<Spinor> {
    let m = rep.spinor_dim();
    if seed.components.len() != m {
        return Err(Error::Config(format!(
            "spinor_seed has {} components, expected {m}",
            seed.components.len()
        )));
    }
    let mut s = Spinor::from_iterator(m, seed.components.iter().map(|[re, im]| C64::new(*re, *im)));
    let l = match (&seed.null_direction, seed.kind) {
        (Some(l), _) => Some(l.clone()),
        (None, SeedKind::NullKernel) => {
            let mut l = vec![0.0; rep.n()];
            l[0] = 1.0;
            l[1] = 1.0;
            Some(l)
        }
        (None, _) => None,
    };
    if let Some(l) = l {
        s = null_kernel_spinor(rep, &l, &s).map_err(|e| Error::Config(format!("null_direction: {e}")))?;
    }
    if s.norm() == 0.0 {
        return Err(Error::Config("spinor seed is zero".into()));
    }
    Ok(s)
}

fn setup(config: &RunConfig, seed: u64, tol_scale: f64) -> Result<Setup> {
    let base_patch = MetricPatch::from_descriptor(&config.family)?;
    let n = base_patch.dim();
    let rep = build_clifford_rep(Signature::lorentzian(n)?)?;
    let s = seed_spinor(&rep, &config.spinor_seed)?;
    let base_field: Box<dyn SpinorField> = match config.spinor_seed.kind {
        SeedKind::Constant | SeedKind::NullKernel => Box::new(ConstantSpinor { n, value: s }),
        SeedKind::PositionClifford => match &config.spinor_seed.origin {
            Some(o) => Box::new(PositionClifford::with_origin(&rep, s, o.clone())?),
            None => Box::new(PositionClifford::new(&rep, s)?),
        },
    };
    let patch = match &config.rescale {
        Some(f) => rescale(&base_patch, f.clone())?,
        None => base_patch.clone(),
    };
    if config.sampling.points == 0 {
        return Err(Error::Config("sampling.points must be positive".into()));
    }
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(Error::Config(format!("tol-scale must be positive, got {tol_scale}")));
    }
    let mut r = rng(seed);
    let points = (0..config.sampling.points).map(|_| random_point(&mut r, &patch.domain().bounds)).collect();
    Ok(Setup { base_patch, patch, rep, base_field, points, tol: config.sampling.tolerances.scaled(tol_scale) })
}

fn point_series(name: &str, points: &[Vec<f64>], values: &[f64]) -> Series {
    let n = points.first().map_or(0, |p| p.len());
    let mut header = vec!["index".to_string()];
    header.extend((0..n).map(|k| format!("x{k}")));
    header.push("residual".into());
    let rows = points
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (p, v))| {
            let mut row = vec![i as f64];
            row.extend(p);
            row.push(*v);
            row
        })
        .collect();
    Series { name: name.into(), header, rows }
}

/// Collects per-point residuals into a check and its series.
fn pointwise(
    name: &str,
    points: &[Vec<f64>],
    tol: f64,
    f: impl Fn(&[f64]) -> Result<f64> + Sync + Send,
) -> (CheckResult, Option<Series>) {
    let results = par::map(points, |x| f(x));
    let mut values = Vec::with_capacity(points.len());
    let mut error = None;
    for r in results {
        match r {
            Ok(v) => values.push(v),
            Err(e) => {
                error.get_or_insert(e.to_string());
                values.push(f64::NAN);
            }
        }
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let passed = error.is_none() && values.iter().all(|v| *v <= tol);
    let check = CheckResult { name: name.into(), passed, max_residual: max, tolerance: tol, points: points.len(), error };
    (check, Some(point_series(name, points, &values)))
}

fn failed(name: &str, tol: f64, points: usize, e: Error) -> CheckResult {
    CheckResult { name: name.into(), passed: false, max_residual: f64::NAN, tolerance: tol, points, error: Some(e.to_string()) }
}

fn default_rescalings(patch: &MetricPatch) -> Vec<(String, RescaleFunction)> {
    let n = patch.dim();
    let c = patch.domain().center();
    let coeffs: Vec<f64> = (0..n).map(|k| 0.1 * (k as f64 + 1.0) * if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
    vec![
        ("zero".into(), RescaleFunction::Zero),
        ("linear".into(), RescaleFunction::Linear { constant: 0.2, coeffs }),
        ("quadratic_bump".into(), RescaleFunction::GaussianBump { amplitude: 0.3, center: c, width: 0.8 }),
    ]
}

/// Executes the campaigns selected by `command` deterministically under the
/// sampling seed.  Configuration problems are errors; numerical failures
/// are reported as failed checks.
pub fn run(config: &RunConfig, command: Command, opts: &RunOptions) -> Result<CampaignReport> {
    let start = Instant::now();
    let seed = opts.seed.unwrap_or(config.sampling.seed);
    let tol_scale = opts.tol_scale.unwrap_or(1.0);
    let s = setup(config, seed, tol_scale)?;
    let flags = command.flags(&config.campaign);
    let weighted;
    let field: &dyn SpinorField = match &config.rescale {
        Some(f) => {
            weighted = Weighted { inner: s.base_field.as_ref(), f: f.clone(), weight: 0.5 };
            &weighted
        }
        None => s.base_field.as_ref(),
    };
    let (patch, rep, pts, tol) = (&s.patch, &s.rep, &s.points, &s.tol);
    let mut checks = Vec::new();
    let mut series = Vec::new();
    let mut push = |(c, ser): (CheckResult, Option<Series>)| {
        checks.push(c);
        series.extend(ser);
    };

    if flags.verify_twistor {
        push(pointwise("verify_twistor", pts, tol.twistor, |x| {
            Ok(twistor_residual(patch, rep, field, x)?.residual_norm)
        }));
    }
    if flags.covariance {
        let fs = match &config.rescale {
            Some(f) => vec![("configured".to_string(), f.clone())],
            None => default_rescalings(&s.base_patch),
        };
        for (label, f) in fs {
            let name = format!("covariance/{label}");
            let c = match covariance_check(&s.base_patch, rep, s.base_field.as_ref(), &f, pts, tol.twistor) {
                Ok(r) => CheckResult {
                    name,
                    passed: r.rescaled_residual <= tol.covariance,
                    max_residual: r.rescaled_residual,
                    tolerance: tol.covariance,
                    points: r.points,
                    error: None,
                },
                Err(e) => failed(&name, tol.covariance, pts.len(), e),
            };
            push((c, None));
        }
    }
    if flags.two_form {
        match lift_to_twistor(patch, rep, field, pts, tol.twistor.max(tol.split)) {
            Ok(tw) => {
                push(pointwise("parallel_twistor", pts, tol.split, |x| {
                    Ok(parallel_twistor_residual(patch, rep, &tw, x)?.max())
                }));
            }
            Err(e) => push((failed("parallel_twistor", tol.split, pts.len(), e), None)),
        }
        push(pointwise("integrability", pts, tol.integrability, |x| dphi_schouten_check(patch, rep, field, x)));
        push(pointwise("two_form_consistency", pts, tol.two_form, |x| {
            Ok(cross_check_two_form(patch, rep, field, x)?.max())
        }));
        push(pointwise("simplicity", pts, tol.simplicity, |x| {
            wedge_defect(&assemble_two_form(patch, rep, field, x)?.to_fiber())
        }));
    }
    let mut orbit_types = None;
    if flags.orbit {
        let types = par::map(pts, |x| -> Result<String> {
            let o = classify_orbit(&assemble_two_form(patch, rep, field, x)?.to_fiber())?;
            Ok(serde_json::to_value(o.factor_type)?.as_str().unwrap_or("other").to_string())
        });
        let mut hist = BTreeMap::new();
        let mut error = None;
        for t in types {
            match t {
                Ok(t) => *hist.entry(t).or_insert(0) += 1,
                Err(e) => {
                    error.get_or_insert(e.to_string());
                    *hist.entry("not_classified".to_string()).or_insert(0) += 1;
                }
            }
        }
        let passed = error.is_none() && hist.len() == 1;
        checks.push(CheckResult {
            name: "orbit_uniform".into(),
            passed,
            max_residual: (hist.len().saturating_sub(1)) as f64,
            tolerance: 0.0,
            points: pts.len(),
            error,
        });
        orbit_types = Some(hist);
    }
    let mut zero_set = None;
    if flags.zero_set {
        let mut cfg = config.zero_search.clone().unwrap_or_default();
        cfg.seed = seed;
        match classify_zero_set(patch, rep, field, &cfg) {
            Ok(r) => {
                checks.push(CheckResult {
                    name: "zero_set".into(),
                    passed: r.passed,
                    max_residual: r.checks.max_nabla_v,
                    tolerance: crate::zero_set::NABLA_V_TOL,
                    points: r.checks.zeros_found,
                    error: None,
                });
                series.push(cone_series(&r));
                zero_set = Some(r);
            }
            Err(e) => checks.push(failed("zero_set", crate::zero_set::NABLA_V_TOL, 0, e)),
        }
    }

    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    Ok(CampaignReport {
        schema: SCHEMA,
        toolkit_version: env!("CARGO_PKG_VERSION"),
        command,
        config: config.clone(),
        seed,
        tol_scale,
        checks,
        orbit_types,
        zero_set,
        passed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        series,
    })
}

fn cone_series(r: &ZeroSetReport) -> Series {
    let n = r.singular_samples.first().map_or(0, |s| s.x.len());
    let mut header = vec!["direction".to_string(), "t".to_string()];
    header.extend((0..n).map(|k| format!("x{k}")));
    header.extend(["v_norm2".to_string(), "phi_norm2".to_string()]);
    let rows = r
        .singular_samples
        .iter()
        .map(|s| {
            let mut row = vec![s.direction as f64, s.t];
            row.extend(&s.x);
            row.extend([s.v_norm2, s.phi_norm2]);
            row
        })
        .collect();
    Series { name: "zero_set_samples".into(), header, rows }
}

/// Writes one CSV per non-empty series into `dir`.  Returns the written
/// paths; an empty list means there was nothing to plot.
pub fn emit_plot_data(report: &CampaignReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for s in report.series.iter().filter(|s| !s.rows.is_empty()) {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", s.name.replace('/', "_")));
        let mut text = s.header.join(",");
        text.push('\n');
        for row in &s.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
