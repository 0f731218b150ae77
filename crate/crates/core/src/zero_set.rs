//! Zero sets and singular sets of twistor spinors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordRep, Spinor};
use crate::error::Result;
use crate::geodesic::{detect_zeros, integrate_geodesic, propagate_spinor, Geodesic, DEFAULT_STEP};
use crate::metric::{make_frame, MetricPatch};
use crate::par;
use crate::sampling::{rng, random_unit};
use crate::spinor::{analyze, SpinorField};
use crate::squares::{dirac_current, CausalType};
use crate::tractor::differential_components;

/// Relative bound on `|g(V,V)| / |V|²` for cone samples.
pub const CONE_NULL_TOL: f64 = 1e-8;
/// Angle between `V_φ` and the null tangent on the cone, radians.
pub const CONE_ANGLE_TOL: f64 = 1e-6;
/// `|∇V_φ|` at a zero, relative to `|Dφ|²`.
pub const NABLA_V_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub grid_per_axis: usize,
    pub max_candidates: usize,
    /// Zero threshold relative to the median of `|φ|` over the grid.
    pub zero_tol: f64,
    pub step: f64,
    pub isolation_step: f64,
    pub isolation_shells: usize,
    pub isolation_directions: usize,
    pub cone_directions: usize,
    pub cone_samples: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_per_axis: 9,
            max_candidates: 16,
            zero_tol: 1e-10,
            step: DEFAULT_STEP,
            isolation_step: 1e-2,
            isolation_shells: 10,
            isolation_directions: 64,
            cone_directions: 64,
            cone_samples: 16,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSetKind {
    IsolatedPoints,
    NullGeodesicImages,
    Empty,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { x: Vec<f64> },
    /// Null geodesic `t ↦ x(t)` with `x(0) = point`, `ẋ(0) = direction`.
    Line { point: Vec<f64>, direction: Vec<f64>, t_range: (f64, f64) },
}

/// A point on a sampled null geodesic from a zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeSample {
    pub direction: usize,
    pub t: f64,
    pub x: Vec<f64>,
    /// `g(V_φ, V_φ)`.
    pub v_norm2: f64,
    /// `|φ|²` of the frame components.
    pub phi_norm2: f64,
    /// `|g(V,V)| / |V|²` with the Euclidean frame norm.
    pub null_ratio: f64,
    pub angle: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ZeroSetChecks {
    pub zeros_found: usize,
    pub max_nabla_v: f64,
    pub isolation_min_norm: Option<f64>,
    pub max_cone_null: Option<f64>,
    pub max_cone_angle: Option<f64>,
    pub max_line_residual: Option<f64>,
    pub transverse_min_norm: Option<f64>,
    pub propagated_identically_zero: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSetReport {
    pub kind: ZeroSetKind,
    pub witnesses: Vec<Witness>,
    pub singular_samples: Vec<ConeSample>,
    pub checks: ZeroSetChecks,
    pub zero_threshold: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn grid_points(patch: &MetricPatch, k: usize) -> Vec<Vec<f64>> {
    let b = &patch.domain().bounds;
    let n = b.len();
    let k = k.max(2);
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|a| {
                    let i = idx % k;
                    idx /= k;
                    b[a].0 + (b[a].1 - b[a].0) * i as f64 / (k - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// Levenberg–Marquardt on `φ(x) = 0` with analytic first partials.
fn newton_zero(patch: &MetricPatch, field: &dyn SpinorField, x0: &[f64], thresh: f64) -> Option<Vec<f64>> {
    let n = x0.len();
    let residual = |x: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let jet = field.jet(x);
        let m = jet.v.len();
        let r = DVector::from_fn(2 * m, |i, _| if i < m { jet.v[i].re } else { jet.v[i - m].im });
        let j = DMatrix::from_fn(2 * m, n, |i, k| if i < m { jet.d[k][i].re } else { jet.d[k][i - m].im });
        (r, j)
    };
    let mut x = x0.to_vec();
    let (mut r, mut j) = residual(&x);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if r.norm() <= 1e-3 * thresh {
            break;
        }
        let jt = j.transpose();
        let a = &jt * &j + DMatrix::identity(n, n) * lambda;
        let Some(delta) = a.lu().solve(&(-(&jt * &r))) else {
            break;
        };
        let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        let (rt, jt2) = residual(&trial);
        if rt.norm() < r.norm() {
            x = trial;
            r = rt;
            j = jt2;
            lambda = (lambda * 0.3).max(1e-15);
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if delta.norm() < 1e-16 * (1.0 + euclid(&x)) {
            break;
        }
    }
    (r.norm() <= thresh && patch.domain().contains(&x)).then_some(x)
}

/// Frame components of a coordinate vector.
fn frame_components(patch: &MetricPatch, rep: &CliffordRep, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let e = make_frame(patch)?.at(x)?.values();
    let g = patch.g(x);
    let n = v.len();
    Ok((0..n)
        .map(|a| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += g[(i, j)] * v[i] * e[a][j];
                }
            }
            rep.signature().eps(a) * s
        })
        .collect())
}

fn to_coords(e: &[Vec<f64>], comps: &[f64]) -> Vec<f64> {
    let n = comps.len();
    (0..n).map(|mu| (0..n).map(|a| comps[a] * e[a][mu]).sum()).collect()
}

/// Angle between the lines spanned by `v` and `w`.
fn line_angle(v: &[f64], w: &[f64]) -> f64 {
    let (nv, nw) = (euclid(v), euclid(w));
    let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    let s = if dot < 0.0 { -1.0 } else { 1.0 };
    let chord = v.iter().zip(w).map(|(a, b)| (a / nv - s * b / nw).powi(2)).sum::<f64>().sqrt();
    2.0 * (0.5 * chord).asin()
}

struct ZeroData {
    x: Vec<f64>,
    dphi: Spinor,
    causal: CausalType,
    /// `V_{Dφ}` in coordinates.
    v_coords: Vec<f64>,
    nabla_v: f64,
}

fn zero_data(patch: &MetricPatch, rep: &CliffordRep, field: &dyn SpinorField, x: &[f64]) -> Result<ZeroData> {
    let (conn, at) = analyze(patch, rep, field, x)?;
    let dphi = at.dirac.v.clone();
    let cur = dirac_current(rep, &dphi)?;
    let e = conn.frame_values();
    let dc = differential_components(patch, rep, &conn, &at)?;
    let scale = dphi.norm_squared().max(1e-300);
    Ok(ZeroData {
        x: x.to_vec(),
        causal: cur.causal_type,
        v_coords: to_coords(&e, &cur.v),
        dphi,
        nabla_v: dc.nabla_alpha.amax() / scale,
    })
}

/// Euclidean distance from `q` to the sampled polyline of a curve.
fn distance_to_curve(q: &[f64], geo: &Geodesic) -> f64 {
    geo.states
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0].x, &w[1].x);
            let ab: Vec<f64> = b.iter().zip(a).map(|(b, a)| b - a).collect();
            let aq: Vec<f64> = q.iter().zip(a).map(|(q, a)| q - a).collect();
            let l2: f64 = ab.iter().map(|v| v * v).sum();
            let s = if l2 > 0.0 { (aq.iter().zip(&ab).map(|(u, v)| u * v).sum::<f64>() / l2).clamp(0.0, 1.0) } else { 0.0 };
            euclid(&aq.iter().zip(&ab).map(|(u, v)| u - s * v).collect::<Vec<_>>())
        })
        .fold(f64::INFINITY, f64::min)
}

struct LineResult {
    witness: Witness,
    geodesic: Geodesic,
    residual: f64,
    transverse_min: f64,
    identically_zero: bool,
    samples: Vec<ConeSample>,
}

fn follow_line(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    z: &ZeroData,
    cfg: &SearchConfig,
    scale: f64,
) -> Result<LineResult> {
    let dir: Vec<f64> = z.v_coords.iter().map(|a| a / euclid(&z.v_coords)).collect();
    let reach = patch.domain().diameter();
    let geo = integrate_geodesic(patch, &z.x, &dir, (-reach, reach), cfg.step)?;
    let prop = propagate_spinor(patch, rep, &geo, &field.value(&z.x), &z.dphi)?;
    let scan = detect_zeros(&prop, Some(cfg.zero_tol * scale));
    let range = geo.t_range();
    let identically_zero = scan.identically_zero == vec![range];
    let residual = geo.states.iter().map(|s| field.value(&s.x).norm()).fold(0.0, f64::max) / scale;
    // Off-line probes: points displaced transversally from sampled line points.
    let mut r = rng(cfg.seed ^ 0x5eed);
    let mut transverse_min = f64::INFINITY;
    let stride = (geo.states.len() / cfg.cone_samples.max(1)).max(1);
    for s in geo.states.iter().step_by(stride) {
        for _ in 0..4 {
            let mut w = random_unit(&mut r, dir.len());
            let d: f64 = w.iter().zip(&dir).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(&dir).for_each(|(a, b)| *a -= d * b);
            let nw = euclid(&w);
            for k in 1..=cfg.isolation_shells {
                let q: Vec<f64> = s.x.iter().zip(&w).map(|(a, b)| a + cfg.isolation_step * k as f64 * b / nw).collect();
                if patch.domain().contains(&q) {
                    transverse_min = transverse_min.min(field.value(&q).norm() / scale);
                }
            }
        }
    }
    let samples = geo
        .states
        .iter()
        .step_by(stride)
        .map(|s| {
            let phi = field.value(&s.x);
            ConeSample { direction: 0, t: s.t, x: s.x.clone(), v_norm2: 0.0, phi_norm2: phi.norm_squared(), null_ratio: 0.0, angle: 0.0 }
        })
        .collect();
    Ok(LineResult {
        witness: Witness::Line { point: z.x.clone(), direction: dir, t_range: range },
        geodesic: geo,
        residual,
        transverse_min,
        identically_zero,
        samples,
    })
}

fn isolation_min(patch: &MetricPatch, field: &dyn SpinorField, p: &[f64], cfg: &SearchConfig, scale: f64) -> f64 {
    let mut r = rng(cfg.seed ^ 0x1501);
    let dirs: Vec<Vec<f64>> = (0..cfg.isolation_directions).map(|_| random_unit(&mut r, p.len())).collect();
    let mut worst = f64::INFINITY;
    for k in 1..=cfg.isolation_shells {
        for d in &dirs {
            let q: Vec<f64> = p.iter().zip(d).map(|(a, b)| a + cfg.isolation_step * k as f64 * b).collect();
            if patch.domain().contains(&q) {
                worst = worst.min(field.value(&q).norm() / scale);
            }
        }
    }
    worst
}

fn sample_cone(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    p: &[f64],
    cfg: &SearchConfig,
) -> Result<Vec<ConeSample>> {
    let n = p.len();
    let e = make_frame(patch)?.at(p)?.values();
    let mut r = rng(cfg.seed ^ 0xc0e);
    let dirs: Vec<Vec<f64>> = (0..cfg.cone_directions)
        .map(|k| {
            let omega = random_unit(&mut r, n - 1);
            let mut comps = vec![if k % 2 == 0 { 1.0 } else { -1.0 }];
            comps.extend(omega);
            to_coords(&e, &comps)
        })
        .collect();
    let reach = patch.domain().diameter();
    let per_dir = par::map(&dirs, |d| -> Result<Vec<ConeSample>> {
        let geo = integrate_geodesic(patch, p, d, (0.0, reach), cfg.step)?;
        let len = geo.states.len();
        let count = cfg.cone_samples.min(len - 1);
        let mut out = Vec::with_capacity(count);
        for j in 1..=count {
            let s = &geo.states[j * (len - 1) / count];
            let phi = field.value(&s.x);
            let cur = dirac_current(rep, &phi)?;
            let tangent = frame_components(patch, rep, &s.x, &s.xdot)?;
            let e2: f64 = cur.v.iter().map(|a| a * a).sum();
            out.push(ConeSample {
                direction: 0,
                t: s.t,
                x: s.x.clone(),
                v_norm2: cur.norm2(),
                phi_norm2: phi.norm_squared(),
                null_ratio: cur.norm2().abs() / e2.max(1e-300),
                angle: line_angle(&cur.v, &tangent),
            });
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for (k, res) in per_dir.into_iter().enumerate() {
        for mut s in res? {
            s.direction = k;
            all.push(s);
        }
    }
    Ok(all)
}

/// Locates zeros of a twistor spinor on the chart by a coarse grid and
/// Levenberg–Marquardt refinement, then classifies them by the causal type of
/// `V_{Dφ}`: null zeros are followed along the null geodesic with that
/// tangent, timelike zeros are checked for isolation and their light cones
/// sampled for the singular set.
pub fn classify_zero_set(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    cfg: &SearchConfig,
) -> Result<ZeroSetReport> {
    let grid = grid_points(patch, cfg.grid_per_axis);
    let norms = par::map(&grid, |x| field.value(x).norm());
    let mut sorted = norms.clone();
    sorted.sort_by(f64::total_cmp);
    let scale = sorted[sorted.len() / 2].max(1e-300);
    let thresh = cfg.zero_tol * scale;

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]));
    let seeds: Vec<Vec<f64>> = order.iter().take(cfg.max_candidates).map(|&i| grid[i].clone()).collect();
    let found = par::map(&seeds, |s| newton_zero(patch, field, s, thresh));
    let mut zeros: Vec<Vec<f64>> = Vec::new();
    for z in found.into_iter().flatten() {
        let dup = zeros.iter().any(|q| euclid(&q.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-6);
        if !dup {
            zeros.push(z);
        }
    }

    let mut report = ZeroSetReport {
        kind: ZeroSetKind::Empty,
        witnesses: Vec::new(),
        singular_samples: Vec::new(),
        checks: ZeroSetChecks { zeros_found: zeros.len(), ..ZeroSetChecks::default() },
        zero_threshold: thresh,
        passed: true,
        notes: Vec::new(),
    };
    let c = patch.domain().center();
    let from_center = |z: &Vec<f64>| euclid(&z.iter().zip(&c).map(|(a, b)| a - b).collect::<Vec<_>>());
    zeros.sort_by(|a, b| from_center(a).total_cmp(&from_center(b)));
    if zeros.is_empty() {
        report.notes.push("no zeros found on the chart".into());
        return Ok(report);
    }

    let mut lines: Vec<Geodesic> = Vec::new();
    let mut kinds: Vec<ZeroSetKind> = Vec::new();
    let mut ok = true;
    for z in &zeros {
        if lines.iter().any(|g| distance_to_curve(z, g) < 1e-6) {
            continue;
        }
        let data = zero_data(patch, rep, field, z)?;
        report.checks.max_nabla_v = report.checks.max_nabla_v.max(data.nabla_v);
        ok &= data.nabla_v <= NABLA_V_TOL;
        match data.causal {
            CausalType::Null => {
                let line = follow_line(patch, rep, field, &data, cfg, scale)?;
                let c = &mut report.checks;
                c.max_line_residual = Some(c.max_line_residual.unwrap_or(0.0).max(line.residual));
                c.transverse_min_norm = Some(c.transverse_min_norm.unwrap_or(f64::INFINITY).min(line.transverse_min));
                c.propagated_identically_zero = Some(c.propagated_identically_zero.unwrap_or(true) && line.identically_zero);
                ok &= line.residual <= cfg.zero_tol && line.transverse_min > cfg.zero_tol && line.identically_zero;
                report.witnesses.push(line.witness);
                report.singular_samples.extend(line.samples);
                lines.push(line.geodesic);
                kinds.push(ZeroSetKind::NullGeodesicImages);
            }
            CausalType::Timelike => {
                let iso = isolation_min(patch, field, z, cfg, scale);
                let cone = sample_cone(patch, rep, field, z, cfg)?;
                let worst_null = cone.iter().map(|s| s.null_ratio).fold(0.0, f64::max);
                let worst_angle = cone.iter().map(|s| s.angle).fold(0.0, f64::max);
                let c = &mut report.checks;
                c.isolation_min_norm = Some(c.isolation_min_norm.unwrap_or(f64::INFINITY).min(iso));
                c.max_cone_null = Some(c.max_cone_null.unwrap_or(0.0).max(worst_null));
                c.max_cone_angle = Some(c.max_cone_angle.unwrap_or(0.0).max(worst_angle));
                ok &= iso > cfg.zero_tol && worst_null <= CONE_NULL_TOL && worst_angle <= CONE_ANGLE_TOL;
                report.witnesses.push(Witness::Point { x: z.clone() });
                report.singular_samples.extend(cone);
                kinds.push(ZeroSetKind::IsolatedPoints);
            }
            other => {
                report.notes.push(format!("V_Dφ at zero {z:?} is {other:?}"));
                kinds.push(ZeroSetKind::Undetermined);
            }
        }
    }
    let first = kinds[0];
    report.kind = if kinds.iter().all(|k| *k == first) { first } else { ZeroSetKind::Undetermined };
    if report.kind == ZeroSetKind::Undetermined && kinds.iter().any(|k| *k != ZeroSetKind::Undetermined) {
        report.notes.push("zeros of different causal type in one report".into());
    }
    report.passed = ok && report.kind != ZeroSetKind::Undetermined;
    Ok(report)
}
