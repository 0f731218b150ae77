//! Explicit Lorentzian metric families on coordinate boxes.
//!
//! Every family evaluates its coefficients as second-order jets, so `dg` and
//! `d2g` are analytic. Frames come from a pseudo-Gram–Schmidt pass over a
//! per-family seed basis, carried out in jet arithmetic.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet2, MAX_DIM};

pub type Mat = [[f64; MAX_DIM]; MAX_DIM];
pub type Arr3 = [Mat; MAX_DIM];
pub type Arr4 = [Arr3; MAX_DIM];

pub const ZERO_MAT: Mat = [[0.0; MAX_DIM]; MAX_DIM];
pub const ZERO_ARR3: Arr3 = [ZERO_MAT; MAX_DIM];

/// Axis-aligned coordinate box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
    /// Spatial coordinates (all but the first) wrap around the box.
    #[serde(default)]
    pub periodic_spatial: bool,
}

impl Domain {
    pub fn cube(n: usize, half_width: f64) -> Self {
        Domain { bounds: vec![(-half_width, half_width); n], periodic_spatial: false }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bounds).enumerate().all(|(k, (v, &(lo, hi)))| {
            (self.periodic_spatial && k > 0) || (*v >= lo && *v <= hi)
        })
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| (hi - lo).powi(2)).sum::<f64>().sqrt()
    }

    /// Maps periodic coordinates back into the box.
    pub fn wrap(&self, x: &mut [f64]) {
        if !self.periodic_spatial {
            return;
        }
        for (k, v) in x.iter_mut().enumerate().skip(1) {
            let (lo, hi) = self.bounds[k];
            let w = hi - lo;
            *v = lo + (*v - lo).rem_euclid(w);
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DomainMismatch(format!(
                "domain has {} axes, metric dimension is {n}",
                self.dim()
            )));
        }
        if self.bounds.iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo >= hi) {
            return Err(Error::DomainMismatch("empty or unbounded interval".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Minkowski,
    PpWave,
    StaticProduct,
    Rescaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialFactor {
    Flat,
    TorusBox,
}

/// One monomial of a wave profile: `(Σ_k u_poly[k] u^k) · Π_a x_a^{powers[a]}`
/// over the transverse coordinates `x_2, …, x_{n−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTerm {
    pub u_poly: Vec<f64>,
    pub powers: Vec<u32>,
}

/// Wave profile `H(u, x_⊥)`, polynomial of degree ≤ 4 in the transverse coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub terms: Vec<ProfileTerm>,
}

pub const MAX_PROFILE_DEGREE: u32 = 4;

impl Profile {
    pub fn zero() -> Self {
        Profile { terms: Vec::new() }
    }

    /// `Σ_a c_a x_a²` over the transverse coordinates.
    pub fn quadratic(coeffs: &[f64]) -> Self {
        let m = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(a, c)| {
                let mut powers = vec![0; m];
                powers[a] = 2;
                ProfileTerm { u_poly: vec![*c], powers }
            })
            .collect();
        Profile { terms }
    }

    pub fn polynomial(terms: Vec<ProfileTerm>) -> Result<Self> {
        let p = Profile { terms };
        for t in &p.terms {
            if t.powers.iter().sum::<u32>() > MAX_PROFILE_DEGREE {
                return Err(Error::InvalidFamily(format!(
                    "profile term of degree {} exceeds {MAX_PROFILE_DEGREE}",
                    t.powers.iter().sum::<u32>()
                )));
            }
        }
        Ok(p)
    }

    fn transverse_dim(&self) -> Option<usize> {
        self.terms.first().map(|t| t.powers.len())
    }

    pub fn jet(&self, x: &[f64]) -> Jet2 {
        let u = Jet2::var(x[0], 0);
        let mut total = Jet2::ZERO;
        for t in &self.terms {
            let mut coeff = Jet2::ZERO;
            for (k, c) in t.u_poly.iter().enumerate() {
                coeff += u.powi(k as i32) * *c;
            }
            let mut mono = coeff;
            for (a, p) in t.powers.iter().enumerate() {
                if *p > 0 {
                    mono = mono * Jet2::var(x[a + 2], a + 2).powi(*p as i32);
                }
            }
            total += mono;
        }
        total
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.jet(x).v
    }
}

/// Conformal factor exponent `f` in `g̃ = e^{2f} g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RescaleFunction {
    Zero,
    /// `c + b·x`.
    Linear { constant: f64, coeffs: Vec<f64> },
    /// `a |x − c|²` (Euclidean coordinate norm).
    Quadratic { amplitude: f64, center: Vec<f64> },
    /// `a exp(−|x − c|² / w²)`.
    GaussianBump { amplitude: f64, center: Vec<f64>, width: f64 },
}

impl RescaleFunction {
    pub fn dim(&self) -> Option<usize> {
        match self {
            RescaleFunction::Zero => None,
            RescaleFunction::Linear { coeffs, .. } => Some(coeffs.len()),
            RescaleFunction::Quadratic { center, .. } => Some(center.len()),
            RescaleFunction::GaussianBump { center, .. } => Some(center.len()),
        }
    }

    pub fn negated(&self) -> Self {
        match self.clone() {
            RescaleFunction::Zero => RescaleFunction::Zero,
            RescaleFunction::Linear { constant, coeffs } => RescaleFunction::Linear {
                constant: -constant,
                coeffs: coeffs.into_iter().map(|c| -c).collect(),
            },
            RescaleFunction::Quadratic { amplitude, center } => {
                RescaleFunction::Quadratic { amplitude: -amplitude, center }
            }
            RescaleFunction::GaussianBump { amplitude, center, width } => {
                RescaleFunction::GaussianBump { amplitude: -amplitude, center, width }
            }
        }
    }

    fn radius2(center: &[f64], x: &[f64]) -> Jet2 {
        center.iter().enumerate().fold(Jet2::ZERO, |acc, (k, c)| {
            let d = Jet2::var(x[k], k) + (-c);
            acc + d * d
        })
    }

    /// `f`, `df`, `d²f` at `x`.
    pub fn jet(&self, x: &[f64]) -> Jet2 {
        match self {
            RescaleFunction::Zero => Jet2::ZERO,
            RescaleFunction::Linear { constant, coeffs } => coeffs
                .iter()
                .enumerate()
                .fold(Jet2::constant(*constant), |acc, (k, b)| acc + Jet2::var(x[k], k) * *b),
            RescaleFunction::Quadratic { amplitude, center } => {
                Self::radius2(center, x) * *amplitude
            }
            RescaleFunction::GaussianBump { amplitude, center, width } => {
                (Self::radius2(center, x) * (-1.0 / (width * width))).exp() * *amplitude
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Minkowski,
    PpWave(Profile),
    StaticProduct(SpatialFactor),
    Rescaled { base: Box<MetricPatch>, f: RescaleFunction },
}

/// Metric coefficients with analytic first and second partials.
#[derive(Clone, Debug)]
pub struct MetricData {
    pub n: usize,
    pub g: Mat,
    /// `dg[k][i][j] = ∂_k g_ij`.
    pub dg: Arr3,
    /// `d2g[k][l][i][j] = ∂_k ∂_l g_ij`.
    pub d2g: Box<Arr4>,
}

/// A coordinate chart with a closed-form Lorentzian metric.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricPatch {
    dim: usize,
    domain: Domain,
    kind: Kind,
}

fn check_dim(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_DIM {
        return Err(Error::InvalidFamily(format!("dimension {n} outside {min}..={MAX_DIM}")));
    }
    Ok(())
}

/// Minkowski space `diag(−1, 1, …, 1)` on `[−1, 1]^n`.
pub fn make_minkowski(n: usize) -> Result<MetricPatch> {
    check_dim(n, 3)?;
    Ok(MetricPatch { dim: n, domain: Domain::cube(n, 1.0), kind: Kind::Minkowski })
}

/// `2 du dv + H du² + Σ dx_a²` in coordinates `(u, v, x_2, …, x_{n−1})`.
pub fn make_pp_wave(n: usize, profile: Profile) -> Result<MetricPatch> {
    check_dim(n, 3)?;
    if let Some(m) = profile.transverse_dim() {
        if m != n - 2 || profile.terms.iter().any(|t| t.powers.len() != m) {
            return Err(Error::InvalidFamily(format!(
                "profile has {m} transverse exponents, expected {}",
                n - 2
            )));
        }
    }
    let profile = Profile::polynomial(profile.terms)?;
    let patch = MetricPatch { dim: n, domain: Domain::cube(n, 1.0), kind: Kind::PpWave(profile) };
    let defect = patch.finite_difference_defect(&fd_probe_points(&patch.domain), 1e-4);
    if defect > 1e-6 {
        return Err(Error::ProfileDerivative { defect });
    }
    Ok(patch)
}

/// `−dt² + h` with `h` flat.
pub fn make_static_product(n: usize, factor: SpatialFactor) -> Result<MetricPatch> {
    check_dim(n, 3)?;
    let mut domain = Domain::cube(n, 1.0);
    domain.periodic_spatial = factor == SpatialFactor::TorusBox;
    Ok(MetricPatch { dim: n, domain, kind: Kind::StaticProduct(factor) })
}

/// `e^{2f} g`.
pub fn rescale(patch: &MetricPatch, f: RescaleFunction) -> Result<MetricPatch> {
    if let Some(d) = f.dim() {
        if d != patch.dim {
            return Err(Error::DomainMismatch(format!(
                "rescale function has dimension {d}, patch has {}",
                patch.dim
            )));
        }
    }
    Ok(MetricPatch {
        dim: patch.dim,
        domain: patch.domain.clone(),
        kind: Kind::Rescaled { base: Box::new(patch.clone()), f },
    })
}

fn fd_probe_points(domain: &Domain) -> Vec<Vec<f64>> {
    let c = domain.center();
    let mut pts = vec![c.clone()];
    for s in [0.37, -0.61] {
        pts.push(
            domain
                .bounds
                .iter()
                .enumerate()
                .map(|(k, (lo, hi))| c[k] + s * 0.5 * (hi - lo) * (1.0 + 0.1 * k as f64))
                .collect(),
        );
    }
    pts
}

impl MetricPatch {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        domain.validate(self.dim)?;
        if let Kind::Rescaled { base, .. } = &mut self.kind {
            let inner = std::mem::replace(base.as_mut(), make_minkowski(3)?);
            **base = inner.with_domain(domain.clone())?;
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn family_tag(&self) -> FamilyTag {
        match self.kind {
            Kind::Minkowski => FamilyTag::Minkowski,
            Kind::PpWave(_) => FamilyTag::PpWave,
            Kind::StaticProduct(_) => FamilyTag::StaticProduct,
            Kind::Rescaled { .. } => FamilyTag::Rescaled,
        }
    }

    /// The un-rescaled family underneath any number of rescalings.
    pub fn root(&self) -> &MetricPatch {
        match &self.kind {
            Kind::Rescaled { base, .. } => base.root(),
            _ => self,
        }
    }

    pub fn profile(&self) -> Option<&Profile> {
        match &self.root().kind {
            Kind::PpWave(p) => Some(p),
            _ => None,
        }
    }

    /// Total conformal exponent relative to [`Self::root`].
    pub fn conformal_exponent(&self, x: &[f64]) -> Jet2 {
        match &self.kind {
            Kind::Rescaled { base, f } => base.conformal_exponent(x) + f.jet(x),
            _ => Jet2::ZERO,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Metric coefficients `g_ij` as jets.
    pub fn metric_jet(&self, x: &[f64]) -> Vec<Vec<Jet2>> {
        let n = self.dim;
        let mut g = vec![vec![Jet2::ZERO; n]; n];
        match &self.kind {
            Kind::Minkowski | Kind::StaticProduct(_) => {
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = Jet2::constant(if i == 0 { -1.0 } else { 1.0 });
                }
            }
            Kind::PpWave(profile) => {
                g[0][0] = profile.jet(x);
                g[0][1] = Jet2::constant(1.0);
                g[1][0] = Jet2::constant(1.0);
                for (a, row) in g.iter_mut().enumerate().skip(2) {
                    row[a] = Jet2::constant(1.0);
                }
            }
            Kind::Rescaled { base, f } => {
                let factor = (f.jet(x) * 2.0).exp();
                g = base.metric_jet(x);
                for row in g.iter_mut() {
                    for e in row.iter_mut() {
                        *e = *e * factor;
                    }
                }
            }
        }
        g
    }

    pub fn g(&self, x: &[f64]) -> DMatrix<f64> {
        let jet = self.metric_jet(x);
        DMatrix::from_fn(self.dim, self.dim, |i, j| jet[i][j].v)
    }

    pub fn eval(&self, x: &[f64]) -> Result<MetricData> {
        self.check_point(x)?;
        let jet = self.metric_jet(x);
        let n = self.dim;
        let mut data = MetricData {
            n,
            g: ZERO_MAT,
            dg: ZERO_ARR3,
            d2g: Box::new([ZERO_ARR3; MAX_DIM]),
        };
        for i in 0..n {
            for j in 0..n {
                let e = &jet[i][j];
                data.g[i][j] = e.v;
                for k in 0..n {
                    data.dg[k][i][j] = e.d[k];
                    for l in 0..n {
                        data.d2g[k][l][i][j] = e.h[k][l];
                    }
                }
            }
        }
        Ok(data)
    }

    /// `(negative, positive)` eigenvalue counts of `g(x)`.
    pub fn signature_counts(&self, x: &[f64]) -> (usize, usize) {
        let eig = SymmetricEigen::new(self.g(x));
        let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        let neg = eig.eigenvalues.iter().filter(|v| **v < -1e-12 * scale).count();
        let pos = eig.eigenvalues.iter().filter(|v| **v > 1e-12 * scale).count();
        (neg, pos)
    }

    pub fn is_lorentzian_at(&self, x: &[f64]) -> bool {
        self.signature_counts(x) == (1, self.dim - 1)
    }

    /// Coordinate components of the seed basis fed to Gram–Schmidt. The first
    /// seed is timelike and future-directed.
    fn seed_basis(&self, x: &[f64]) -> Vec<Vec<Jet2>> {
        let n = self.dim;
        let unit = |k: usize| {
            let mut v = vec![Jet2::ZERO; n];
            v[k] = Jet2::constant(1.0);
            v
        };
        match &self.kind {
            Kind::Minkowski | Kind::StaticProduct(_) => (0..n).map(unit).collect(),
            Kind::PpWave(profile) => {
                // e_0 = −∂_u + ((1+H)/2) ∂_v has norm −1; ∂_v is future-directed.
                let h = profile.jet(x);
                let mut t = vec![Jet2::ZERO; n];
                t[0] = Jet2::constant(-1.0);
                t[1] = (h + 1.0) * 0.5;
                let mut seeds = vec![t, unit(1)];
                seeds.extend((2..n).map(unit));
                seeds
            }
            Kind::Rescaled { base, .. } => base.seed_basis(x),
        }
    }

    /// Whether a timelike vector (coordinate components) is future-directed.
    pub fn is_future_directed(&self, v: &[f64]) -> bool {
        match &self.root().kind {
            // g(v, ∂_v) = v^u < 0
            Kind::PpWave(_) => v[0] < 0.0,
            _ => v[0] > 0.0,
        }
    }

    /// Parallel null vector field of the Brinkmann families (`∂_v`).
    pub fn parallel_null_field(&self) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::PpWave(_) => {
                let mut v = vec![0.0; self.dim];
                v[1] = 1.0;
                Some(v)
            }
            _ => None,
        }
    }

    /// Largest relative disagreement between the analytic `dg`, `d2g` and
    /// central differences of `g` with step `h`.
    pub fn finite_difference_defect(&self, points: &[Vec<f64>], h: f64) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for x in points {
            let Ok(data) = self.eval(x) else { continue };
            let shifted = |k: usize, s: f64| {
                let mut y = x.clone();
                y[k] += s;
                self.g(&y)
            };
            for k in 0..n {
                let (gp, gm) = (shifted(k, h), shifted(k, -h));
                let dp: Vec<_> = (0..n).map(|l| self.eval(&{
                    let mut y = x.clone();
                    y[k] += h;
                    y
                }).map(|d| d.dg[l]).ok()).collect();
                let dm: Vec<_> = (0..n).map(|l| self.eval(&{
                    let mut y = x.clone();
                    y[k] -= h;
                    y
                }).map(|d| d.dg[l]).ok()).collect();
                for i in 0..n {
                    for j in 0..n {
                        let fd = (gp[(i, j)] - gm[(i, j)]) / (2.0 * h);
                        let an = data.dg[k][i][j];
                        worst = worst.max((fd - an).abs() / an.abs().max(1.0));
                        for l in 0..n {
                            if let (Some(p), Some(m)) = (&dp[l], &dm[l]) {
                                let fd2 = (p[i][j] - m[i][j]) / (2.0 * h);
                                let an2 = data.d2g[k][l][i][j];
                                worst = worst.max((fd2 - an2).abs() / an2.abs().max(1.0));
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Pseudo-orthonormal frame `e_0, …, e_{n−1}` with `e_0` timelike and
/// future-directed.
#[derive(Clone, Copy, Debug)]
pub struct FrameField<'a> {
    patch: &'a MetricPatch,
}

/// Frame vectors at a point: `e[i][μ]` is the `μ`-th coordinate component of `e_i`.
#[derive(Clone, Debug)]
pub struct FrameJet {
    pub e: Vec<Vec<Jet2>>,
}

impl FrameJet {
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.e.iter().map(|v| v.iter().map(|c| c.v).collect()).collect()
    }
}

pub fn make_frame(patch: &MetricPatch) -> Result<FrameField<'_>> {
    let c = patch.domain.center();
    if !patch.is_lorentzian_at(&c) {
        return Err(Error::SingularMetric { point: c });
    }
    Ok(FrameField { patch })
}

impl<'a> FrameField<'a> {
    pub fn patch(&self) -> &'a MetricPatch {
        self.patch
    }

    pub fn at(&self, x: &[f64]) -> Result<FrameJet> {
        frame_jet(self.patch, x)
    }

    /// `max |g(e_i, e_j) − diag(−1, 1, …, 1)_ij|`.
    pub fn gram_defect(&self, x: &[f64]) -> Result<f64> {
        let e = self.at(x)?.values();
        let g = self.patch.g(x);
        let n = self.patch.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for mu in 0..n {
                    for nu in 0..n {
                        s += g[(mu, nu)] * e[i][mu] * e[j][nu];
                    }
                }
                let target = if i != j { 0.0 } else if i == 0 { -1.0 } else { 1.0 };
                worst = worst.max((s - target).abs());
            }
        }
        Ok(worst)
    }
}

pub(crate) fn frame_jet(patch: &MetricPatch, x: &[f64]) -> Result<FrameJet> {
    patch.check_point(x)?;
    let n = patch.dim;
    let g = patch.metric_jet(x);
    let ip = |a: &[Jet2], b: &[Jet2]| {
        let mut s = Jet2::ZERO;
        for mu in 0..n {
            for nu in 0..n {
                if g[mu][nu].v != 0.0 || g[mu][nu].d.iter().any(|d| *d != 0.0) {
                    s += g[mu][nu] * a[mu] * b[nu];
                }
            }
        }
        s
    };
    let mut frame: Vec<Vec<Jet2>> = Vec::with_capacity(n);
    for (i, w) in patch.seed_basis(x).into_iter().enumerate() {
        let mut u = w.clone();
        for (j, ej) in frame.iter().enumerate() {
            let eps_j = if j == 0 { -1.0 } else { 1.0 };
            let c = ip(&w, ej) * eps_j;
            for mu in 0..n {
                u[mu] = u[mu] - c * ej[mu];
            }
        }
        let eps_i = if i == 0 { -1.0 } else { 1.0 };
        let norm = ip(&u, &u) * eps_i;
        if norm.v <= 1e-12 {
            return Err(Error::SingularMetric { point: x.to_vec() });
        }
        let s = norm.sqrt().recip();
        frame.push(u.into_iter().map(|c| c * s).collect());
    }
    let e0: Vec<f64> = frame[0].iter().map(|c| c.v).collect();
    if !patch.is_future_directed(&e0) {
        for c in frame[0].iter_mut() {
            *c = -*c;
        }
    }
    Ok(FrameJet { e: frame })
}

/// JSON family descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDescriptor {
    pub family: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<ProfileTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<SpatialFactor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
}

impl MetricPatch {
    pub fn from_descriptor(desc: &FamilyDescriptor) -> Result<Self> {
        let n = desc.dim;
        let patch = match desc.family.as_str() {
            "minkowski" => make_minkowski(n)?,
            "static_product" => make_static_product(n, desc.h.unwrap_or(SpatialFactor::Flat))?,
            "pp_wave" => {
                let profile = match desc.profile.as_deref() {
                    None | Some("zero") => Profile::zero(),
                    Some("quadratic") => {
                        let c = desc.coeffs.clone().ok_or_else(|| {
                            Error::InvalidFamily("quadratic profile needs coeffs".into())
                        })?;
                        Profile::quadratic(&c)
                    }
                    Some("polynomial") => {
                        let t = desc.terms.clone().ok_or_else(|| {
                            Error::InvalidFamily("polynomial profile needs terms".into())
                        })?;
                        Profile::polynomial(t)?
                    }
                    Some(other) => {
                        return Err(Error::InvalidFamily(format!("unknown profile {other:?}")))
                    }
                };
                make_pp_wave(n, profile)?
            }
            other => return Err(Error::InvalidFamily(format!("unknown family {other:?}"))),
        };
        match &desc.domain {
            Some(b) => {
                let periodic = patch.domain.periodic_spatial;
                patch.with_domain(Domain {
                    bounds: b.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
                    periodic_spatial: periodic,
                })
            }
            None => Ok(patch),
        }
    }
}
