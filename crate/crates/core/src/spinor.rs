//! Spinor fields in the frame gauge, spinor derivative, Dirac operator and the
//! Penrose (twistor) residual.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::clifford::{CliffordRep, Spinor};
use crate::curvature::{christoffels, ConnectionAt, SchoutenAt};
use crate::error::{Error, Result};
use crate::jet::{Jet2, MatrixJet1, SpinorJet1, SpinorJet2, C64};
use crate::metric::{rescale, MetricPatch, RescaleFunction};

/// Spinor components in the frame gauge of a metric patch, with analytic
/// coordinate partials up to second order.
pub trait SpinorField: Send + Sync {
    fn base_dim(&self) -> usize;
    fn spinor_dim(&self) -> usize;
    fn jet(&self, x: &[f64]) -> SpinorJet2;

    fn value(&self, x: &[f64]) -> Spinor {
        self.jet(x).v
    }
}

#[derive(Clone, Debug)]
pub struct ConstantSpinor {
    pub n: usize,
    pub value: Spinor,
}

impl SpinorField for ConstantSpinor {
    fn base_dim(&self) -> usize {
        self.n
    }
    fn spinor_dim(&self) -> usize {
        self.value.len()
    }
    fn jet(&self, _x: &[f64]) -> SpinorJet2 {
        SpinorJet2::constant(self.n, self.value.clone())
    }
}

/// `φ(p) = (p − o)·S` with coordinates read as flat frame components.
#[derive(Clone, Debug)]
pub struct PositionClifford {
    pub s: Spinor,
    pub origin: Vec<f64>,
    images: Vec<Spinor>,
}

impl PositionClifford {
    pub fn new(rep: &CliffordRep, s: Spinor) -> Result<Self> {
        Self::with_origin(rep, s, vec![0.0; rep.n()])
    }

    pub fn with_origin(rep: &CliffordRep, s: Spinor, origin: Vec<f64>) -> Result<Self> {
        if s.len() != rep.spinor_dim() {
            return Err(Error::DimensionMismatch { expected: rep.spinor_dim(), got: s.len() });
        }
        if origin.len() != rep.n() {
            return Err(Error::DimensionMismatch { expected: rep.n(), got: origin.len() });
        }
        let images = rep.gammas().iter().map(|g| g * &s).collect();
        Ok(PositionClifford { s, origin, images })
    }
}

impl SpinorField for PositionClifford {
    fn base_dim(&self) -> usize {
        self.images.len()
    }
    fn spinor_dim(&self) -> usize {
        self.s.len()
    }
    fn jet(&self, x: &[f64]) -> SpinorJet2 {
        let n = self.base_dim();
        let mut out = SpinorJet2::zeros(n, self.s.len());
        for (i, img) in self.images.iter().enumerate() {
            out.v += img * C64::from(x[i] - self.origin[i]);
            out.d[i] = img.clone();
        }
        out
    }
}

/// `e^{w f} · inner`.
pub struct Weighted<'a> {
    pub inner: &'a dyn SpinorField,
    pub f: RescaleFunction,
    pub weight: f64,
}

impl SpinorField for Weighted<'_> {
    fn base_dim(&self) -> usize {
        self.inner.base_dim()
    }
    fn spinor_dim(&self) -> usize {
        self.inner.spinor_dim()
    }
    fn jet(&self, x: &[f64]) -> SpinorJet2 {
        let s = (self.f.jet(x) * self.weight).exp();
        self.inner.jet(x).mul_scalar(&s)
    }
}

/// Quadratic polynomial spinor field `c + Σ c_k x_k + Σ_{k≤l} c_kl x_k x_l`.
#[derive(Clone, Debug)]
pub struct PolynomialSpinor {
    pub c0: Spinor,
    pub c1: Vec<Spinor>,
    pub c2: Vec<Vec<Spinor>>,
}

impl PolynomialSpinor {
    pub fn random(rng: &mut impl rand::Rng, n: usize, dim: usize) -> Self {
        use crate::sampling::random_spinor;
        PolynomialSpinor {
            c0: random_spinor(rng, dim),
            c1: (0..n).map(|_| random_spinor(rng, dim)).collect(),
            c2: (0..n).map(|k| (0..=k).map(|_| random_spinor(rng, dim)).collect()).collect(),
        }
    }
}

impl SpinorField for PolynomialSpinor {
    fn base_dim(&self) -> usize {
        self.c1.len()
    }
    fn spinor_dim(&self) -> usize {
        self.c0.len()
    }
    fn jet(&self, x: &[f64]) -> SpinorJet2 {
        let n = self.base_dim();
        let mut out = SpinorJet2::constant(n, self.c0.clone());
        for k in 0..n {
            out.v += &self.c1[k] * C64::from(x[k]);
            out.d[k] += &self.c1[k];
            for l in 0..=k {
                let c = &self.c2[k][l];
                out.v += c * C64::from(x[k] * x[l]);
                out.d[k] += c * C64::from(x[l]);
                out.d[l] += c * C64::from(x[k]);
                out.h[k][l] += c;
                out.h[l][k] += c;
            }
        }
        out
    }
}

/// `l·S` for a nonzero null frame vector `l`: a spinor in the kernel of `l·`.
pub fn null_kernel_spinor(rep: &CliffordRep, l: &[f64], s: &Spinor) -> Result<Spinor> {
    let norm = rep.signature().inner(l, l);
    let scale: f64 = l.iter().map(|v| v * v).sum();
    if norm.abs() > 1e-12 * scale || scale == 0.0 {
        return Err(Error::InvalidFamily("kernel direction is not a nonzero null vector".into()));
    }
    let phi = rep.mul_vector(l, s)?;
    if phi.norm() <= 1e-12 * s.norm() {
        return Err(Error::InvalidFamily("seed spinor lies in the kernel already".into()));
    }
    Ok(phi)
}

fn check_gauge(patch: &MetricPatch, rep: &CliffordRep, field: &dyn SpinorField) -> Result<()> {
    if field.base_dim() != patch.dim() || rep.n() != patch.dim() {
        return Err(Error::GaugeMismatch(format!(
            "field on {}-dimensional chart, patch dimension {}, representation dimension {}",
            field.base_dim(),
            patch.dim(),
            rep.n()
        )));
    }
    if field.spinor_dim() != rep.spinor_dim() {
        return Err(Error::GaugeMismatch(format!(
            "spinor has {} components, representation acts on {}",
            field.spinor_dim(),
            rep.spinor_dim()
        )));
    }
    Ok(())
}

/// Spin-connection matrices `Ω_i = ½ Σ_{j<k} ε_j ε_k ω_jk(e_i) γ_j γ_k`, so that
/// `∇_{e_i}φ = e_i(φ) + Ω_i φ`.
pub fn spin_connection(conn: &ConnectionAt, rep: &CliffordRep) -> Vec<MatrixJet1> {
    let n = conn.n;
    let sig = rep.signature();
    (0..n)
        .map(|i| {
            let mut m = MatrixJet1::zeros(n, rep.spinor_dim());
            for j in 0..n {
                for k in j + 1..n {
                    let w = conn.omega[i][j][k].scale(0.5 * sig.eps(j) * sig.eps(k));
                    m.add_scaled(&w, rep.pair(j, k));
                }
            }
            m
        })
        .collect()
}

/// Covariant data of a spinor field at one point.
#[derive(Clone, Debug)]
pub struct SpinorAt {
    pub phi: SpinorJet2,
    /// `∇_{e_i}φ` with first coordinate partials.
    pub nabla: Vec<SpinorJet1>,
    pub dirac: SpinorJet1,
    pub omega: Vec<MatrixJet1>,
}

impl SpinorAt {
    pub fn new(conn: &ConnectionAt, rep: &CliffordRep, phi: SpinorJet2) -> Self {
        let n = conn.n;
        let omega = spin_connection(conn, rep);
        let flat = phi.truncate();
        let nabla: Vec<SpinorJet1> = (0..n)
            .map(|i| {
                let mut out = flat.apply_jet(&omega[i]);
                for mu in 0..n {
                    let c = conn.frame.e[i][mu].truncate();
                    if c.v != 0.0 || c.d.iter().any(|d| *d != 0.0) {
                        out.add_assign(&phi.partial(mu).mul_scalar(&c));
                    }
                }
                out
            })
            .collect();
        let mut dirac = SpinorJet1::zeros(n, rep.spinor_dim());
        for (i, nab) in nabla.iter().enumerate() {
            dirac.add_assign(&nab.apply(rep.gamma(i)).scale_c(C64::from(rep.signature().eps(i))));
        }
        SpinorAt { phi, nabla, dirac, omega }
    }

    /// `∇_{e_i}` of a first-order spinor jet, value only.
    pub fn nabla_of(&self, conn: &ConnectionAt, jet: &SpinorJet1, i: usize) -> Spinor {
        let mut out = &self.omega[i].v * &jet.v;
        for mu in 0..conn.n {
            out += &jet.d[mu] * C64::from(conn.frame.e[i][mu].v);
        }
        out
    }
}

pub fn analyze(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    x: &[f64],
) -> Result<(ConnectionAt, SpinorAt)> {
    check_gauge(patch, rep, field)?;
    let conn = christoffels(patch, x)?;
    let at = SpinorAt::new(&conn, rep, field.jet(x));
    Ok((conn, at))
}

pub fn spinor_derivative(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    x: &[f64],
    direction: usize,
) -> Result<Spinor> {
    if direction >= patch.dim() {
        return Err(Error::DimensionMismatch { expected: patch.dim(), got: direction });
    }
    let (_, at) = analyze(patch, rep, field, x)?;
    Ok(at.nabla[direction].v.clone())
}

pub fn dirac(patch: &MetricPatch, rep: &CliffordRep, field: &dyn SpinorField, x: &[f64]) -> Result<Spinor> {
    Ok(analyze(patch, rep, field, x)?.1.dirac.v)
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistorResidualReport {
    pub point: Vec<f64>,
    pub residual_norm: f64,
    #[serde(skip)]
    pub dirac_value: Spinor,
}

/// `max_i ‖∇_{e_i}φ + (1/n) e_i·Dφ‖`.
pub fn penrose_residual(rep: &CliffordRep, at: &SpinorAt) -> f64 {
    let n = rep.n() as f64;
    at.nabla
        .iter()
        .enumerate()
        .map(|(i, nab)| (&nab.v + rep.gamma(i) * &at.dirac.v * C64::from(1.0 / n)).norm())
        .fold(0.0, f64::max)
}

pub fn twistor_residual(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    x: &[f64],
) -> Result<TwistorResidualReport> {
    let (_, at) = analyze(patch, rep, field, x)?;
    Ok(TwistorResidualReport {
        point: x.to_vec(),
        residual_norm: penrose_residual(rep, &at),
        dirac_value: at.dirac.v,
    })
}

/// Clifford action of the Schouten image `P(e_i)`.
pub fn schouten_action(rep: &CliffordRep, sch: &SchoutenAt, i: usize) -> DMatrix<C64> {
    let w: Vec<f64> = (0..rep.n()).map(|j| sch.schouten[(j, i)]).collect();
    rep.vector_matrix(&w)
}

/// `max_i ‖∇_{e_i}(Dφ) − (n/2) P(e_i)·φ‖`.
pub fn dphi_schouten_residual(conn: &ConnectionAt, sch: &SchoutenAt, rep: &CliffordRep, at: &SpinorAt) -> f64 {
    let n = rep.n();
    (0..n)
        .map(|i| {
            let lhs = at.nabla_of(conn, &at.dirac, i);
            let rhs = schouten_action(rep, sch, i) * &at.phi.v * C64::from(n as f64 / 2.0);
            (lhs - rhs).norm()
        })
        .fold(0.0, f64::max)
}

pub fn dphi_schouten_check(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    x: &[f64],
) -> Result<f64> {
    let (conn, at) = analyze(patch, rep, field, x)?;
    let sch = conn.schouten();
    Ok(dphi_schouten_residual(&conn, &sch, rep, &at))
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub points: usize,
    pub base_residual: f64,
    pub rescaled_residual: f64,
}

/// Checks that `e^{f/2}φ` solves the twistor equation of `e^{2f}g` at the
/// sample points, given that `φ` solves it for `g`.
pub fn covariance_check(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    f: &RescaleFunction,
    points: &[Vec<f64>],
    solution_tol: f64,
) -> Result<CovarianceReport> {
    let base = crate::par::map(points, |x| twistor_residual(patch, rep, field, x).map(|r| r.residual_norm))
        .into_iter()
        .try_fold(0.0f64, |m, r| r.map(|v| m.max(v)))?;
    if base > solution_tol {
        return Err(Error::NotASolution { residual: base });
    }
    let tilde = rescale(patch, f.clone())?;
    let weighted = Weighted { inner: field, f: f.clone(), weight: 0.5 };
    let rescaled = crate::par::map(points, |x| {
        twistor_residual(&tilde, rep, &weighted, x).map(|r| r.residual_norm)
    })
    .into_iter()
    .try_fold(0.0f64, |m, r| r.map(|v| m.max(v)))?;
    Ok(CovarianceReport { points: points.len(), base_residual: base, rescaled_residual: rescaled })
}

/// Second-order jet of `Re φ^H A φ`.
pub fn quadratic_jet(a: &DMatrix<C64>, phi: &SpinorJet2) -> Jet2 {
    let n = phi.base_dim();
    let q = |u: &DVector<C64>, w: &DVector<C64>| u.dotc(&(a * w)).re;
    let mut out = Jet2::constant(q(&phi.v, &phi.v));
    for k in 0..n {
        out.d[k] = q(&phi.d[k], &phi.v) + q(&phi.v, &phi.d[k]);
        for l in 0..n {
            out.h[k][l] = q(&phi.h[k][l], &phi.v)
                + q(&phi.d[k], &phi.d[l])
                + q(&phi.d[l], &phi.d[k])
                + q(&phi.v, &phi.h[k][l]);
        }
    }
    out
}

/// Coordinate components `α_μ` of the Dirac-current one-form
/// `α_φ(X) = −⟨X·φ, φ⟩` with partials up to second order.
pub fn current_one_form(patch: &MetricPatch, conn: &ConnectionAt, rep: &CliffordRep, phi: &SpinorJet2) -> Vec<Jet2> {
    let n = conn.n;
    let beta = rep.hermitian_form();
    // ⟨γ_i φ, φ⟩ = φ^H β γ_i φ
    let frame_comps: Vec<Jet2> = (0..n).map(|i| -quadratic_jet(&(beta * rep.gamma(i)), phi)).collect();
    let g = patch.metric_jet(&conn.point);
    let sig = rep.signature();
    (0..n)
        .map(|mu| {
            let mut s = Jet2::ZERO;
            for (i, a) in frame_comps.iter().enumerate() {
                // θ^i(∂_μ) = ε_i g(e_i, ∂_μ)
                let mut theta = Jet2::ZERO;
                for nu in 0..n {
                    if g[mu][nu].v != 0.0 || g[mu][nu].d.iter().any(|d| *d != 0.0) {
                        theta += g[mu][nu] * conn.frame.e[i][nu];
                    }
                }
                s += theta * *a * sig.eps(i);
            }
            s
        })
        .collect()
}
