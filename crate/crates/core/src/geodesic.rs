//! Geodesics with parallel-transported frames, and spinor propagation along them.

use nalgebra::DVector;
use serde::Serialize;

use crate::clifford::{CliffordRep, Spinor};
use crate::curvature::point_geometry;
use crate::error::{Error, Result};
use crate::jet::C64;
use crate::metric::{make_frame, MetricPatch};

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicState {
    pub t: f64,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    /// `frame[a][μ]`: coordinate components of the transported `b_a`.
    pub frame: Vec<Vec<f64>>,
}

/// States ordered by increasing `t`; `t = 0` is the initial point.
#[derive(Clone, Debug, Serialize)]
pub struct Geodesic {
    pub states: Vec<GeodesicState>,
    pub step: f64,
    /// The curve was cut short on at least one side by the chart boundary.
    pub hit_boundary: bool,
}

impl Geodesic {
    pub fn origin_index(&self) -> usize {
        self.states
            .iter()
            .position(|s| s.t == 0.0)
            .expect("geodesic always contains its initial state")
    }

    pub fn origin(&self) -> &GeodesicState {
        &self.states[self.origin_index()]
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.states[0].t, self.states[self.states.len() - 1].t)
    }

    /// `max_t |g(ẋ,ẋ)(t) − g(ẋ,ẋ)(0)|`.
    pub fn norm_drift(&self, patch: &MetricPatch) -> f64 {
        let q = |s: &GeodesicState| quad(&patch.g(&s.x), &s.xdot, &s.xdot);
        let q0 = q(self.origin());
        self.states.iter().map(|s| (q(s) - q0).abs()).fold(0.0, f64::max)
    }

    /// `max_t max_ab |g(b_a,b_b)(t) − g(b_a,b_b)(0)|`.
    pub fn frame_drift(&self, patch: &MetricPatch) -> f64 {
        let gram = |s: &GeodesicState| {
            let g = patch.g(&s.x);
            let n = s.frame.len();
            let mut out = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..n {
                    out[a * n + b] = quad(&g, &s.frame[a], &s.frame[b]);
                }
            }
            out
        };
        let g0 = gram(self.origin());
        self.states
            .iter()
            .map(|s| gram(s).iter().zip(&g0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

fn quad(g: &nalgebra::DMatrix<f64>, v: &[f64], w: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * v[i] * w[j];
        }
    }
    s
}

/// Spinor components along a geodesic in the transported spin frame.
#[derive(Clone, Debug)]
pub struct PropagatedSpinor {
    pub t: Vec<f64>,
    pub u: Vec<Spinor>,
    pub udot: Vec<Spinor>,
    pub geodesic: Geodesic,
}

impl PropagatedSpinor {
    pub fn step(&self) -> f64 {
        self.geodesic.step
    }
}

/// Integration state: `x`, `ẋ`, frame (flattened), optionally `(U, U′)`.
#[derive(Clone)]
struct State {
    r: Vec<f64>,
    c: Vec<C64>,
}

impl State {
    fn axpy(&self, h: f64, k: &State) -> State {
        State {
            r: self.r.iter().zip(&k.r).map(|(a, b)| a + h * b).collect(),
            c: self.c.iter().zip(&k.c).map(|(a, b)| a + b * h).collect(),
        }
    }
}

struct System<'a> {
    patch: &'a MetricPatch,
    rep: Option<&'a CliffordRep>,
    n: usize,
}

impl System<'_> {
    fn rhs(&self, y: &State) -> Result<State> {
        let n = self.n;
        let x = &y.r[..n];
        let xd = &y.r[n..2 * n];
        let geom = point_geometry(self.patch, x, self.rep.is_some())?;
        let gam = &geom.christoffel;
        let mut out = State { r: vec![0.0; y.r.len()], c: vec![C64::new(0.0, 0.0); y.c.len()] };
        out.r[..n].copy_from_slice(xd);
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += gam[k][i][j] * xd[i] * xd[j];
                }
            }
            out.r[n + k] = -s;
        }
        for a in 0..n {
            let b = &y.r[2 * n + a * n..2 * n + (a + 1) * n];
            for k in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += gam[k][i][j] * xd[i] * b[j];
                    }
                }
                out.r[2 * n + a * n + k] = -s;
            }
        }
        if let Some(rep) = self.rep {
            let m = y.c.len() / 2;
            let p = geom.schouten_coord.as_ref().expect("requested above");
            let pxd: Vec<f64> = (0..n).map(|mu| (0..n).map(|nu| p[(mu, nu)] * xd[nu]).sum()).collect();
            let g = &geom.g;
            let comps = |v: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|a| {
                        let b = &y.r[2 * n + a * n..2 * n + (a + 1) * n];
                        let mut s = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                s += g[i][j] * v[i] * b[j];
                            }
                        }
                        rep.signature().eps(a) * s
                    })
                    .collect()
            };
            let c = rep.vector_matrix(&comps(xd));
            let w = rep.vector_matrix(&comps(&pxd));
            let u = DVector::from_column_slice(&y.c[..m]);
            let rhs = (c * (w * u)) * C64::new(-0.5, 0.0);
            out.c[..m].copy_from_slice(&y.c[m..]);
            out.c[m..].copy_from_slice(rhs.as_slice());
        }
        Ok(out)
    }

    fn rk4(&self, y: &State, h: f64) -> Result<State> {
        let k1 = self.rhs(y)?;
        let k2 = self.rhs(&y.axpy(0.5 * h, &k1))?;
        let k3 = self.rhs(&y.axpy(0.5 * h, &k2))?;
        let k4 = self.rhs(&y.axpy(h, &k3))?;
        let mut out = y.clone();
        for i in 0..out.r.len() {
            out.r[i] += h / 6.0 * (k1.r[i] + 2.0 * k2.r[i] + 2.0 * k3.r[i] + k4.r[i]);
        }
        for i in 0..out.c.len() {
            out.c[i] += (k1.c[i] + k2.c[i] * 2.0 + k3.c[i] * 2.0 + k4.c[i]) * (h / 6.0);
        }
        Ok(out)
    }

    /// Integrates from `t = 0` to `t_end`; returns samples excluding `t = 0`
    /// and whether the boundary stopped the run.  A step that would leave
    /// the chart is shortened by bisection so the last sample sits on the
    /// boundary.
    fn run(&self, y0: &State, t_end: f64, step: f64) -> Result<(Vec<(f64, State)>, bool)> {
        let mut out = Vec::new();
        if t_end == 0.0 {
            return Ok((out, false));
        }
        let steps = (t_end.abs() / step).ceil().max(1.0) as usize;
        let h = t_end / steps as f64;
        let dom = self.patch.domain();
        let n = self.n;
        let mut y = y0.clone();
        for k in 1..=steps {
            let mut next = self.rk4(&y, h)?;
            dom.wrap(&mut next.r[..n]);
            if !dom.contains(&next.r[..n]) {
                let (mut lo, mut hi) = (0.0, 1.0);
                let mut best = None;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let mut trial = self.rk4(&y, mid * h)?;
                    dom.wrap(&mut trial.r[..n]);
                    if dom.contains(&trial.r[..n]) {
                        lo = mid;
                        best = Some(trial);
                    } else {
                        hi = mid;
                    }
                }
                if let Some(b) = best {
                    out.push(((k - 1) as f64 * h + lo * h, b));
                }
                return Ok((out, true));
            }
            out.push((k as f64 * h, next.clone()));
            y = next;
        }
        Ok((out, false))
    }

    /// Integrates through the given parameter values, which move away from 0.
    fn run_along(&self, y0: &State, ts: &[f64]) -> Result<Vec<(f64, State)>> {
        let mut out = Vec::with_capacity(ts.len());
        let (mut t, mut y) = (0.0, y0.clone());
        for &next_t in ts {
            let mut next = self.rk4(&y, next_t - t)?;
            self.patch.domain().wrap(&mut next.r[..self.n]);
            out.push((next_t, next.clone()));
            (t, y) = (next_t, next);
        }
        Ok(out)
    }
}

fn check_inputs(patch: &MetricPatch, x0: &[f64], v0: &[f64], t_span: (f64, f64), step: f64) -> Result<()> {
    let n = patch.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    if v0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v0.len() });
    }
    if !patch.domain().contains(x0) {
        return Err(Error::OutsideDomain { point: x0.to_vec() });
    }
    if !(step > 0.0 && step.is_finite()) || !(t_span.0 <= 0.0 && t_span.1 >= 0.0) {
        return Err(Error::Config(format!(
            "geodesic needs step > 0 and t_span containing 0, got step {step}, span {t_span:?}"
        )));
    }
    Ok(())
}

fn initial_state(x0: &[f64], v0: &[f64], frame: &[Vec<f64>], spinor: Option<(&Spinor, &Spinor)>) -> State {
    let mut r = Vec::with_capacity(2 * x0.len() + x0.len() * x0.len());
    r.extend_from_slice(x0);
    r.extend_from_slice(v0);
    for b in frame {
        r.extend_from_slice(b);
    }
    let c = match spinor {
        Some((u, ud)) => u.iter().chain(ud.iter()).copied().collect(),
        None => Vec::new(),
    };
    State { r, c }
}

fn to_geodesic_state(n: usize, t: f64, y: &State) -> GeodesicState {
    GeodesicState {
        t,
        x: y.r[..n].to_vec(),
        xdot: y.r[n..2 * n].to_vec(),
        frame: (0..n).map(|a| y.r[2 * n + a * n..2 * n + (a + 1) * n].to_vec()).collect(),
    }
}

fn two_sided(sys: &System, y0: &State, t_span: (f64, f64), step: f64) -> Result<(Vec<(f64, State)>, bool)> {
    let (back, hit_back) = sys.run(y0, t_span.0, step)?;
    let (fwd, hit_fwd) = sys.run(y0, t_span.1, step)?;
    let mut all: Vec<(f64, State)> = back.into_iter().rev().collect();
    all.push((0.0, y0.clone()));
    all.extend(fwd);
    Ok((all, hit_back || hit_fwd))
}

/// Geodesic through `x0` with `ẋ(0) = v0`, integrated with fixed-step RK4 over
/// `t_span` (which must contain 0) and transporting the pseudo-orthonormal
/// frame of `x0`.  Stops early at the chart boundary and sets `hit_boundary`.
pub fn integrate_geodesic(patch: &MetricPatch, x0: &[f64], v0: &[f64], t_span: (f64, f64), step: f64) -> Result<Geodesic> {
    check_inputs(patch, x0, v0, t_span, step)?;
    let n = patch.dim();
    let frame = make_frame(patch)?.at(x0)?.values();
    let sys = System { patch, rep: None, n };
    let y0 = initial_state(x0, v0, &frame, None);
    let (all, hit_boundary) = two_sided(&sys, &y0, t_span, step)?;
    Ok(Geodesic {
        states: all.iter().map(|(t, y)| to_geodesic_state(n, *t, y)).collect(),
        step,
        hit_boundary,
    })
}

/// Solves `U″ = −½ γ(ẋ)γ(P(ẋ)) U` along `geodesic` with `U(0) = phi0` and
/// `U′(0) = −(1/n) ẋ(0)·dphi0`, where `dphi0` is `Dφ` at the initial point.
/// Components refer to the transported frame starting at the frame of the
/// initial point.  The geodesic is re-integrated jointly with the spinor on the same
/// parameter grid.
pub fn propagate_spinor(
    patch: &MetricPatch,
    rep: &CliffordRep,
    geodesic: &Geodesic,
    phi0: &Spinor,
    dphi0: &Spinor,
) -> Result<PropagatedSpinor> {
    let n = patch.dim();
    if rep.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rep.n() });
    }
    let m = rep.spinor_dim();
    for s in [phi0, dphi0] {
        if s.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: s.len() });
        }
    }
    let o = geodesic.origin();
    let g = patch.g(&o.x);
    let c: Vec<f64> = (0..n).map(|a| rep.signature().eps(a) * quad(&g, &o.xdot, &o.frame[a])).collect();
    let udot0 = rep.mul_vector(&c, dphi0)? * C64::new(-1.0 / n as f64, 0.0);
    let sys = System { patch, rep: Some(rep), n };
    let y0 = initial_state(&o.x, &o.xdot, &o.frame, Some((phi0, &udot0)));
    let ts: Vec<f64> = geodesic.states.iter().map(|s| s.t).collect();
    let back: Vec<f64> = ts.iter().rev().copied().filter(|t| *t < 0.0).collect();
    let fwd: Vec<f64> = ts.iter().copied().filter(|t| *t > 0.0).collect();
    let mut all: Vec<(f64, State)> = sys.run_along(&y0, &back)?.into_iter().rev().collect();
    all.push((0.0, y0.clone()));
    all.extend(sys.run_along(&y0, &fwd)?);
    let geo = Geodesic {
        states: all.iter().map(|(t, y)| to_geodesic_state(n, *t, y)).collect(),
        step: geodesic.step,
        hit_boundary: geodesic.hit_boundary,
    };
    Ok(PropagatedSpinor {
        t: all.iter().map(|(t, _)| *t).collect(),
        u: all.iter().map(|(_, y)| DVector::from_column_slice(&y.c[..m])).collect(),
        udot: all.iter().map(|(_, y)| DVector::from_column_slice(&y.c[m..])).collect(),
        geodesic: geo,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ZeroScan {
    /// Isolated zeros.
    pub zeros: Vec<f64>,
    /// Parameter intervals on which `U` vanishes identically.
    pub identically_zero: Vec<(f64, f64)>,
    pub tol: f64,
}

/// `tol = 1e-8 · median ‖U‖`, floored at `1e-12`.
pub fn default_zero_tol(prop: &PropagatedSpinor) -> f64 {
    let mut norms: Vec<f64> = prop.u.iter().map(|u| u.norm()).collect();
    norms.sort_by(f64::total_cmp);
    let median = if norms.is_empty() { 0.0 } else { norms[norms.len() / 2] };
    (1e-8 * median).max(1e-12)
}

fn hermite(prop: &PropagatedSpinor, k: usize, t: f64) -> (Spinor, Spinor) {
    let (t0, t1) = (prop.t[k], prop.t[k + 1]);
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let d00 = (6.0 * s2 - 6.0 * s) / h;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = (-6.0 * s2 + 6.0 * s) / h;
    let d11 = 3.0 * s2 - 2.0 * s;
    let c = |v: f64| C64::new(v, 0.0);
    let u = &prop.u[k] * c(h00) + &prop.udot[k] * c(h10 * h) + &prop.u[k + 1] * c(h01) + &prop.udot[k + 1] * c(h11 * h);
    let du = &prop.u[k] * c(d00) + &prop.udot[k] * c(d10) + &prop.u[k + 1] * c(d01) + &prop.udot[k + 1] * c(d11);
    (u, du)
}

/// Interpolated `U(t)` at any `t` in the sampled range.
fn interval_of(prop: &PropagatedSpinor, t: f64) -> usize {
    let last = prop.t.len() - 2;
    prop.t.partition_point(|&s| s <= t).saturating_sub(1).min(last)
}

/// Refines a zero near sample `k`: parabola vertex of `‖U‖²` through three
/// samples as the seed, then Gauss–Newton on the cubic Hermite interpolant.
fn refine(prop: &PropagatedSpinor, k: usize) -> (f64, f64) {
    let len = prop.t.len();
    let (lo, hi) = (prop.t[0], prop.t[len - 1]);
    let mut t = prop.t[k];
    if k > 0 && k + 1 < len {
        let f = |i: usize| prop.u[i].norm_squared();
        let (fm, f0, fp) = (f(k - 1), f(k), f(k + 1));
        let h0 = prop.t[k] - prop.t[k - 1];
        let h1 = prop.t[k + 1] - prop.t[k];
        let den = h1 * (fm - f0) + h0 * (fp - f0);
        if den > 0.0 {
            let shift = 0.5 * (h0 * h0 * (fp - f0) - h1 * h1 * (fm - f0)) / den;
            t = (t - shift).clamp(prop.t[k - 1], prop.t[k + 1]);
        }
    }
    for _ in 0..20 {
        let (u, du) = hermite(prop, interval_of(prop, t), t);
        let d2 = du.norm_squared();
        if d2 == 0.0 {
            break;
        }
        let dt = u.dotc(&du).re / d2;
        t = (t - dt).clamp(lo, hi);
        if dt.abs() < 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    let (u, _) = hermite(prop, interval_of(prop, t), t);
    (t, u.norm())
}

/// Zeros of `‖U‖` along a propagated spinor.  Runs of three or more samples
/// below `tol` are reported as identically-zero intervals; other candidates
/// (local minima of `‖U‖`) are refined and kept if the refined value is
/// below `tol`.  Zeros closer than one step are merged.
pub fn detect_zeros(prop: &PropagatedSpinor, tol: Option<f64>) -> ZeroScan {
    let tol = tol.unwrap_or_else(|| default_zero_tol(prop));
    let mut scan = ZeroScan { tol, ..ZeroScan::default() };
    let len = prop.t.len();
    if len == 0 {
        return scan;
    }
    let norms: Vec<f64> = prop.u.iter().map(|u| u.norm()).collect();
    if len == 1 {
        if norms[0] <= tol {
            scan.zeros.push(prop.t[0]);
        }
        return scan;
    }
    let mut in_run = vec![false; len];
    let mut k = 0;
    while k < len {
        if norms[k] <= tol {
            let start = k;
            while k < len && norms[k] <= tol {
                k += 1;
            }
            if k - start >= 3 {
                scan.identically_zero.push((prop.t[start], prop.t[k - 1]));
                in_run[start..k].iter_mut().for_each(|f| *f = true);
            }
        } else {
            k += 1;
        }
    }
    let mut found: Vec<f64> = Vec::new();
    for k in 0..len {
        if in_run[k] {
            continue;
        }
        let left = k == 0 || norms[k - 1] >= norms[k];
        let right = k + 1 == len || norms[k + 1] >= norms[k];
        if !(left && right) {
            continue;
        }
        let (t, v) = refine(prop, k);
        if v <= tol || norms[k] <= tol {
            let t = if v <= tol { t } else { prop.t[k] };
            found.push(t);
        }
    }
    found.sort_by(f64::total_cmp);
    let h = prop.step();
    for t in found {
        if scan.zeros.last().is_some_and(|&p| t - p <= h) {
            continue;
        }
        scan.zeros.push(t);
    }
    scan
}
