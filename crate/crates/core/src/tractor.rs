//! Tractor and twistor calculus in a metric gauge.
//!
//! Standard tractors split as `a·s_- + V + b·s_+` with
//! `⟨s_-, s_+⟩ = 1`, `s_± ⊥ TM`, `s_±` null. Fiber arrays use the split basis
//! `(s_-, e_0, …, e_{n−1}, s_+)`. Twistors split as `(φ, ψ) ∈ S ⊕ S` with
//! `X·(φ,ψ) = (−X·φ, X·ψ)`, `s_+·(φ,ψ) = (0, −√2 φ)`, `s_-·(φ,ψ) = (√2 ψ, 0)`.
//!
//! Wedges are normalized as `(ξ∧η)(A,B) = ½(ξ(A)η(B) − ξ(B)η(A))`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::clifford::{CliffordRep, Signature, Spinor};
use crate::curvature::ConnectionAt;
use crate::error::{Error, Result};
use crate::jet::C64;
use crate::metric::MetricPatch;
use crate::spinor::{analyze, current_one_form, penrose_residual, schouten_action, SpinorAt, SpinorField};

/// `a·s_- + V + b·s_+` with `V` in frame components.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tractor {
    pub a: f64,
    pub v: Vec<f64>,
    pub b: f64,
}

impl Tractor {
    pub fn s_minus(n: usize) -> Self {
        Tractor { a: 1.0, v: vec![0.0; n], b: 0.0 }
    }

    pub fn s_plus(n: usize) -> Self {
        Tractor { a: 0.0, v: vec![0.0; n], b: 1.0 }
    }

    /// Split-basis coordinates `(a, V, b)`.
    pub fn coords(&self) -> DVector<f64> {
        let n = self.v.len();
        DVector::from_fn(n + 2, |k, _| match k {
            0 => self.a,
            k if k == n + 1 => self.b,
            k => self.v[k - 1],
        })
    }
}

/// `⟨(a,V,b), (ã,Ṽ,b̃)⟩ = a b̃ + b ã + g(V, Ṽ)`.
pub fn tractor_metric(t: &Tractor, u: &Tractor) -> f64 {
    let sig = Signature::lorentzian(t.v.len()).expect("frame dimension");
    t.a * u.b + t.b * u.a + sig.inner(&t.v, &u.v)
}

/// Gram matrix of the tractor metric in the split basis.
pub fn tractor_gram(n: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n + 2, n + 2);
    g[(0, n + 1)] = 1.0;
    g[(n + 1, 0)] = 1.0;
    g[(1, 1)] = -1.0;
    for i in 2..=n {
        g[(i, i)] = 1.0;
    }
    g
}

/// Columns are the orthonormal tractor basis `T_a` in split coordinates:
/// `T_0 = (s_- − s_+)/√2`, `T_{1+i} = e_i`, `T_{n+1} = (s_- + s_+)/√2`.
/// Signature `(2, n)`, timelike directions first.
pub fn orthonormal_tractor_basis(n: usize) -> DMatrix<f64> {
    let r = 1.0 / SQRT_2;
    let mut b = DMatrix::zeros(n + 2, n + 2);
    b[(0, 0)] = r;
    b[(n + 1, 0)] = -r;
    for i in 1..=n {
        b[(i, i)] = 1.0;
    }
    b[(0, n + 1)] = r;
    b[(n + 1, n + 1)] = r;
    b
}

/// The twistor module of signature `(2, n)` realized on `S ⊕ S`, gammas in the
/// orthonormal tractor basis, form `(i/√2)(⟨φ,ψ̃⟩ − ⟨ψ,φ̃⟩)`.
pub fn twistor_rep(base: &CliffordRep) -> Result<CliffordRep> {
    let n = base.n();
    let sig = Signature::tractor(n)?;
    let m = base.spinor_dim();
    let z = DMatrix::<C64>::zeros(m, m);
    let id = DMatrix::<C64>::identity(m, m);
    let block = |a: &DMatrix<C64>, b: &DMatrix<C64>, c: &DMatrix<C64>, d: &DMatrix<C64>| {
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        out.view_mut((0, 0), (m, m)).copy_from(a);
        out.view_mut((0, m), (m, m)).copy_from(b);
        out.view_mut((m, 0), (m, m)).copy_from(c);
        out.view_mut((m, m), (m, m)).copy_from(d);
        out
    };
    let mut gammas = Vec::with_capacity(n + 2);
    gammas.push(block(&z, &id, &id, &z));
    for g in base.gammas() {
        gammas.push(block(&(-g), &z, &z, g));
    }
    gammas.push(block(&z, &id, &(-&id), &z));
    let beta = base.hermitian_form();
    let form = block(&z, &(-beta), beta, &z) * C64::new(0.0, 1.0 / SQRT_2);
    let rep = CliffordRep::from_parts(sig, gammas, form, C64::from(1.0));
    let defect = rep.relation_defect();
    if defect > 1e-12 {
        return Err(Error::ConventionViolation(format!("twistor Clifford relations off by {defect:e}")));
    }
    Ok(rep)
}

/// Clifford action of a split-basis tractor on a twistor.
pub fn tractor_action(trep: &CliffordRep, t: &Tractor) -> DMatrix<C64> {
    let n = t.v.len();
    // coordinates of t in the orthonormal basis: c = B⁻¹ (a, V, b)
    let b = orthonormal_tractor_basis(n);
    let c = b.try_inverse().expect("orthonormal basis") * t.coords();
    trep.vector_matrix(c.as_slice())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Twistor {
    pub phi: Spinor,
    pub psi: Spinor,
}

impl Twistor {
    pub fn stacked(&self) -> Spinor {
        let m = self.phi.len();
        DVector::from_fn(2 * m, |k, _| if k < m { self.phi[k] } else { self.psi[k - m] })
    }
}

/// Components of `s_-♭∧α_- + α_0 + s_-♭∧s_+♭∧α_∓ + s_+♭∧α_+` in frame gauge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TractorTwoForm {
    pub alpha_minus: Vec<f64>,
    /// `alpha_0[i][j] = α_0(e_i, e_j)`.
    pub alpha_0: Vec<Vec<f64>>,
    pub alpha_mp: f64,
    pub alpha_plus: Vec<f64>,
}

impl TractorTwoForm {
    pub fn n(&self) -> usize {
        self.alpha_minus.len()
    }

    /// Antisymmetric `(n+2)×(n+2)` array `F(E_a, E_b)` in the split basis.
    pub fn to_fiber(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut f = DMatrix::zeros(n + 2, n + 2);
        let mut set = |a: usize, b: usize, v: f64| {
            f[(a, b)] = v;
            f[(b, a)] = -v;
        };
        for i in 0..n {
            set(n + 1, 1 + i, 0.5 * self.alpha_minus[i]);
            set(0, 1 + i, 0.5 * self.alpha_plus[i]);
            for j in i + 1..n {
                set(1 + i, 1 + j, self.alpha_0[i][j]);
            }
        }
        set(n + 1, 0, 0.5 * self.alpha_mp);
        f
    }

    /// Components `F(T_a, T_b)` in the orthonormal tractor basis.
    pub fn to_orthonormal(&self) -> DMatrix<f64> {
        let b = orthonormal_tractor_basis(self.n());
        b.transpose() * self.to_fiber() * b
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha_minus
            .iter()
            .chain(self.alpha_plus.iter())
            .chain(self.alpha_0.iter().flatten())
            .chain(std::iter::once(&self.alpha_mp))
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `ξ∧η` of two split-basis covectors.
pub fn fiber_wedge(xi: &[f64], eta: &[f64]) -> DMatrix<f64> {
    let k = xi.len();
    DMatrix::from_fn(k, k, |a, b| 0.5 * (xi[a] * eta[b] - xi[b] * eta[a]))
}

/// Lowers a split-basis tractor to a covector with the tractor metric.
pub fn flat(t: &Tractor) -> Vec<f64> {
    let n = t.v.len();
    (tractor_gram(n) * t.coords()).iter().copied().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorType {
    NullWedgeNull,
    NullWedgeTimelike,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitType {
    pub simple: bool,
    pub factor_type: FactorType,
    /// `‖F∧F‖_max / ‖F‖²_max`.
    pub wedge_defect: f64,
}

pub const SIMPLICITY_TOL: f64 = 1e-9;
pub const GRAM_TOL: f64 = 1e-9;

/// `max |F_ab F_cd − F_ac F_bd + F_ad F_bc|` over `a<b<c<d`, relative to `‖F‖²`.
pub fn wedge_defect(f: &DMatrix<f64>) -> Result<f64> {
    let scale = f.amax();
    if scale == 0.0 {
        return Err(Error::ZeroTwoForm);
    }
    let k = f.nrows();
    let mut worst: f64 = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    let w = f[(a, b)] * f[(c, d)] - f[(a, c)] * f[(b, d)] + f[(a, d)] * f[(b, c)];
                    worst = worst.max(w.abs());
                }
            }
        }
    }
    Ok(worst / (scale * scale))
}

/// Simplicity test on a split-basis fiber array; `factor_type` is `Other`
/// until [`classify_orbit`] runs.
pub fn wedge_and_simplicity(f: &DMatrix<f64>) -> Result<OrbitType> {
    let defect = wedge_defect(f)?;
    Ok(OrbitType { simple: defect <= SIMPLICITY_TOL, factor_type: FactorType::Other, wedge_defect: defect })
}

/// Classifies a simple fiber 2-form `ξ∧η` by the tractor-metric Gram matrix
/// of the plane spanned by the raised factors.
pub fn classify_orbit(f: &DMatrix<f64>) -> Result<OrbitType> {
    let mut out = wedge_and_simplicity(f)?;
    if !out.simple {
        return Err(Error::NotSimple { defect: out.wedge_defect });
    }
    let k = f.nrows();
    let n = k - 2;
    let svd = f.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    // singular values come unordered; pick the two largest
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let ginv = tractor_gram(n).try_inverse().expect("tractor metric");
    let cols: Vec<DVector<f64>> = idx[..2].iter().map(|&c| u.column(c).into_owned()).collect();
    let gram = DMatrix::from_fn(2, 2, |i, j| (cols[i].transpose() * &ginv * &cols[j])[(0, 0)]);
    let eig = SymmetricEigen::new(gram.clone());
    let neg = eig.eigenvalues.iter().filter(|v| **v < -GRAM_TOL).count();
    let pos = eig.eigenvalues.iter().filter(|v| **v > GRAM_TOL).count();
    out.factor_type = if gram.amax() <= GRAM_TOL {
        FactorType::NullWedgeNull
    } else if neg == 1 && pos == 0 {
        FactorType::NullWedgeTimelike
    } else {
        FactorType::Other
    };
    Ok(out)
}

/// Orthonormal components `α(T_a, T_b) = Re(−i⟨T_a T_b·Φ, Φ⟩_W)` of the 2-form
/// defined by `⟨α, A⟩_T = −i⟨A·Φ, Φ⟩_W` for every 2-form `A`.
pub fn relation_two_form(trep: &CliffordRep, tw: &Twistor) -> DMatrix<f64> {
    let k = trep.n();
    let x = tw.stacked();
    DMatrix::from_fn(k, k, |a, b| {
        if a == b {
            return 0.0;
        }
        (trep.hermitian(&(trep.pair(a, b) * &x), &x) * C64::new(0.0, -1.0)).re
    })
}

/// Raises both indices of orthonormal 2-form components.
pub fn raise_two_form(sig: Signature, a: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| sig.eps(i) * sig.eps(j) * a[(i, j)])
}

/// `⟨α, A⟩_T = Σ_{a<b} ε_a ε_b α_ab A_ab` on orthonormal components.
pub fn two_form_pairing(sig: Signature, alpha: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    let k = sig.n();
    let mut s = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            s += sig.eps(i) * sig.eps(j) * alpha[(i, j)] * a[(i, j)];
        }
    }
    s
}

/// Global constant relating the defining relation to the component formulas.
pub const RELATION_CONSTANT: f64 = 2.0;

/// Twistor field `(φ, (√2/n) Dφ + offset)`.
pub struct LiftedTwistor<'a> {
    pub field: &'a dyn SpinorField,
    pub psi_offset: Option<Spinor>,
}

impl LiftedTwistor<'_> {
    pub fn at(&self, rep: &CliffordRep, at: &SpinorAt) -> Twistor {
        let n = rep.n() as f64;
        let mut psi = &at.dirac.v * C64::from(SQRT_2 / n);
        if let Some(o) = &self.psi_offset {
            psi += o;
        }
        Twistor { phi: at.phi.v.clone(), psi }
    }
}

/// Lifts a twistor spinor, after checking the Penrose residual at `check_points`.
pub fn lift_to_twistor<'a>(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &'a dyn SpinorField,
    check_points: &[Vec<f64>],
    tol: f64,
) -> Result<LiftedTwistor<'a>> {
    for x in check_points {
        let (_, at) = analyze(patch, rep, field, x)?;
        let r = penrose_residual(rep, &at);
        if r > tol {
            return Err(Error::NotASolution { residual: r });
        }
    }
    Ok(LiftedTwistor { field, psi_offset: None })
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitResiduals {
    /// Penrose residual of `φ`.
    pub phi: f64,
    /// `max_i ‖∇_{e_i}ψ − (1/√2) P(e_i)·φ‖`.
    pub psi: f64,
}

impl SplitResiduals {
    pub fn max(&self) -> f64 {
        self.phi.max(self.psi)
    }
}

pub fn parallel_twistor_residual(
    patch: &MetricPatch,
    rep: &CliffordRep,
    tw: &LiftedTwistor,
    x: &[f64],
) -> Result<SplitResiduals> {
    let (conn, at) = analyze(patch, rep, tw.field, x)?;
    let sch = conn.schouten();
    let n = rep.n();
    let mut psi = at.dirac.scale_c(C64::from(SQRT_2 / n as f64));
    if let Some(o) = &tw.psi_offset {
        psi.v += o;
    }
    let psi_res = (0..n)
        .map(|i| {
            let lhs = at.nabla_of(&conn, &psi, i);
            let rhs = schouten_action(rep, &sch, i) * &at.phi.v * C64::from(1.0 / SQRT_2);
            (lhs - rhs).norm()
        })
        .fold(0.0, f64::max);
    Ok(SplitResiduals { phi: penrose_residual(rep, &at), psi: psi_res })
}

/// `α_Φ` from the spinor formulas:
/// `α_- = α_φ`, `α_∓ = (2/n) Re⟨φ, Dφ⟩`, `α_+ = −(2/n²) α_{Dφ}`,
/// `α_0(e_i, e_j) = (1/n) Re⟨e_i∧e_j·φ, Dφ⟩`.
pub fn two_form_from_spinors(rep: &CliffordRep, phi: &Spinor, dphi: &Spinor) -> TractorTwoForm {
    let n = rep.n();
    let nf = n as f64;
    let current = |s: &Spinor| -> Vec<f64> { (0..n).map(|i| -rep.hermitian(&(rep.gamma(i) * s), s).re).collect() };
    let alpha_minus = current(phi);
    let alpha_plus = current(dphi).into_iter().map(|v| -2.0 / (nf * nf) * v).collect();
    let alpha_mp = 2.0 / nf * rep.hermitian(phi, dphi).re;
    let alpha_0 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { rep.hermitian(&(rep.pair(i, j) * phi), dphi).re / nf })
                .collect()
        })
        .collect();
    TractorTwoForm { alpha_minus, alpha_0, alpha_mp, alpha_plus }
}

pub fn assemble_two_form(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    x: &[f64],
) -> Result<TractorTwoForm> {
    let (_, at) = analyze(patch, rep, field, x)?;
    Ok(two_form_from_spinors(rep, &at.phi.v, &at.dirac.v))
}

/// Differential-side components: `½ dα_φ`, `(1/n) d*α_φ`, `□α_φ`, in frame gauge.
#[derive(Clone, Debug)]
pub struct DifferentialComponents {
    pub half_d_alpha: DMatrix<f64>,
    pub codiff_over_n: f64,
    pub box_alpha: Vec<f64>,
    pub nabla_alpha: DMatrix<f64>,
    pub alpha: Vec<f64>,
}

pub fn differential_components(
    patch: &MetricPatch,
    rep: &CliffordRep,
    conn: &ConnectionAt,
    at: &SpinorAt,
) -> Result<DifferentialComponents> {
    let n = conn.n;
    let alpha = current_one_form(patch, conn, rep, &at.phi);
    let d = crate::curvature::exterior_derivative(&alpha);
    let half: Vec<Vec<f64>> = d.iter().map(|r| r.iter().map(|v| 0.5 * v).collect()).collect();
    let sch = conn.schouten();
    let boxed = crate::curvature::box_with(conn, &sch, &alpha)?;
    let nab = conn.nabla_one_form(&alpha)?;
    let nab_vals: Vec<Vec<f64>> = nab.iter().map(|r| r.iter().map(|j| j.v).collect()).collect();
    Ok(DifferentialComponents {
        half_d_alpha: conn.two_tensor_to_frame(&half),
        codiff_over_n: conn.codifferential(&alpha)? / n as f64,
        box_alpha: conn.covector_to_frame(&boxed),
        nabla_alpha: conn.two_tensor_to_frame(&nab_vals),
        alpha: conn.covector_to_frame(&alpha.iter().map(|a| a.v).collect::<Vec<_>>()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoFormCrossCheck {
    pub alpha_0: f64,
    pub alpha_mp: f64,
    pub alpha_plus: f64,
}

impl TwoFormCrossCheck {
    pub fn max(&self) -> f64 {
        self.alpha_0.max(self.alpha_mp).max(self.alpha_plus)
    }
}

/// Agreement of the spinor formulas with `½dα_φ`, `(1/n)d*α_φ` and `□α_φ`.
pub fn cross_check_two_form(
    patch: &MetricPatch,
    rep: &CliffordRep,
    field: &dyn SpinorField,
    x: &[f64],
) -> Result<TwoFormCrossCheck> {
    let (conn, at) = analyze(patch, rep, field, x)?;
    let tf = two_form_from_spinors(rep, &at.phi.v, &at.dirac.v);
    let dc = differential_components(patch, rep, &conn, &at)?;
    let n = conn.n;
    let mut a0: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            a0 = a0.max((tf.alpha_0[i][j] - dc.half_d_alpha[(i, j)]).abs());
        }
    }
    let ap = tf
        .alpha_plus
        .iter()
        .zip(&dc.box_alpha)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(TwoFormCrossCheck { alpha_0: a0, alpha_mp: (tf.alpha_mp - dc.codiff_over_n).abs(), alpha_plus: ap })
}

/// `max |(α∧dα)(e_i, e_j, e_k)|` for the Dirac-current form.
pub fn hypersurface_defect(dc: &DifferentialComponents) -> f64 {
    let n = dc.alpha.len();
    let (a, d) = (&dc.alpha, &dc.half_d_alpha);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let w = a[i] * d[(j, k)] + a[j] * d[(k, i)] + a[k] * d[(i, j)];
                worst = worst.max(w.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford_rep;
    use crate::metric::{make_minkowski, make_pp_wave, rescale, Profile, ProfileTerm, RescaleFunction};
    use crate::sampling::{random_point, random_spinor, random_vec, rng};
    use rand::Rng;
    use crate::spinor::{null_kernel_spinor, ConstantSpinor, PositionClifford, Weighted};

    fn rep(n: usize) -> CliffordRep {
        build_clifford_rep(Signature::lorentzian(n).unwrap()).unwrap()
    }

    /// Seeds with null and timelike Dirac current.
    fn null_seed(rp: &CliffordRep, r: &mut impl rand::Rng) -> Spinor {
        let mut l = vec![0.0; rp.n()];
        l[0] = 1.0;
        l[1] = 1.0;
        null_kernel_spinor(rp, &l, &random_spinor(r, rp.spinor_dim())).unwrap()
    }

    fn curved_wave() -> MetricPatch {
        make_pp_wave(
            4,
            Profile::polynomial(vec![
                ProfileTerm { u_poly: vec![1.0, 0.5], powers: vec![2, 0] },
                ProfileTerm { u_poly: vec![0.3], powers: vec![1, 1] },
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn tractor_metric_signature() {
        for n in 3..=6 {
            let g = tractor_gram(n);
            let eig = SymmetricEigen::new(g.clone());
            assert_eq!(eig.eigenvalues.iter().filter(|v| **v < 0.0).count(), 2);
            let b = orthonormal_tractor_basis(n);
            let gram = b.transpose() * &g * &b;
            let sig = Signature::tractor(n).unwrap();
            for a in 0..n + 2 {
                for c in 0..n + 2 {
                    let t = if a == c { sig.eps(a) } else { 0.0 };
                    assert!((gram[(a, c)] - t).abs() < 1e-15);
                }
            }
            let t = Tractor { a: 0.3, v: (0..n).map(|i| i as f64 * 0.1).collect(), b: -0.7 };
            let u = Tractor { a: 1.1, v: vec![0.5; n], b: 0.2 };
            assert!((tractor_metric(&t, &u) - (t.coords().transpose() * &g * u.coords())[(0, 0)]).abs() < 1e-15);
        }
    }

    #[test]
    fn twistor_split_realization() {
        let mut r = rng(41);
        for n in 3..=6 {
            let rp = rep(n);
            let tr = twistor_rep(&rp).unwrap();
            assert!(tr.relation_defect() <= 1e-12);
            // form matches the split formula
            let (phi, psi, pt, st) = (
                random_spinor(&mut r, rp.spinor_dim()),
                random_spinor(&mut r, rp.spinor_dim()),
                random_spinor(&mut r, rp.spinor_dim()),
                random_spinor(&mut r, rp.spinor_dim()),
            );
            let x = Twistor { phi: phi.clone(), psi: psi.clone() }.stacked();
            let y = Twistor { phi: pt.clone(), psi: st.clone() }.stacked();
            let expected = (rp.hermitian(&phi, &st) - rp.hermitian(&psi, &pt)) * C64::new(0.0, 1.0 / SQRT_2);
            assert!((tr.hermitian(&x, &y) - expected).norm() < 1e-12);
            // self-adjoint form
            assert!((tr.hermitian(&x, &y) - tr.hermitian(&y, &x).conj()).norm() < 1e-12);
            // split actions of s_± and X
            let sp = tractor_action(&tr, &Tractor::s_plus(n)) * &x;
            let sm = tractor_action(&tr, &Tractor::s_minus(n)) * &x;
            let m = rp.spinor_dim();
            assert!(sp.rows(0, m).norm() < 1e-12);
            assert!((sp.rows(m, m) + &phi * C64::from(SQRT_2)).norm() < 1e-12);
            assert!((sm.rows(0, m) - &psi * C64::from(SQRT_2)).norm() < 1e-12);
            assert!(sm.rows(m, m).norm() < 1e-12);
            let v = random_vec(&mut r, n);
            let xv = tractor_action(&tr, &Tractor { a: 0.0, v: v.clone(), b: 0.0 }) * &x;
            assert!((xv.rows(0, m) + rp.mul_vector(&v, &phi).unwrap()).norm() < 1e-12);
            assert!((xv.rows(m, m) - rp.mul_vector(&v, &psi).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn lift_of_minkowski_family() {
        let mut r = rng(42);
        for n in 3..=5 {
            let rp = rep(n);
            let m = make_minkowski(n).unwrap();
            let s = random_spinor(&mut r, rp.spinor_dim());
            let field = PositionClifford::new(&rp, s.clone()).unwrap();
            let pts: Vec<_> = (0..10).map(|_| random_point(&mut r, &m.domain().bounds)).collect();
            let lifted = lift_to_twistor(&m, &rp, &field, &pts, 1e-10).unwrap();
            for x in &pts {
                let (_, at) = analyze(&m, &rp, &field, x).unwrap();
                let tw = lifted.at(&rp, &at);
                assert!((&tw.psi + &s * C64::from(SQRT_2)).norm() < 1e-12);
                assert!(parallel_twistor_residual(&m, &rp, &lifted, x).unwrap().max() <= 1e-10);
            }
        }
    }

    #[test]
    fn lift_of_pp_wave_parallel_spinor() {
        let mut r = rng(43);
        let rp = rep(4);
        let patch = curved_wave();
        let field = ConstantSpinor { n: 4, value: null_seed(&rp, &mut r) };
        let lifted = lift_to_twistor(&patch, &rp, &field, &[patch.domain().center()], 1e-9).unwrap();
        for _ in 0..20 {
            let x = random_point(&mut r, &patch.domain().bounds);
            let (_, at) = analyze(&patch, &rp, &field, &x).unwrap();
            assert!(lifted.at(&rp, &at).psi.norm() < 1e-12);
            assert!(parallel_twistor_residual(&patch, &rp, &lifted, &x).unwrap().max() <= 1e-9);
            let tf = assemble_two_form(&patch, &rp, &field, &x).unwrap();
            assert!(tf.alpha_plus.iter().all(|v| v.abs() < 1e-12));
            assert!(tf.alpha_mp.abs() < 1e-12);
            assert!(tf.alpha_0.iter().flatten().all(|v| v.abs() < 1e-12));
            assert!(tf.alpha_minus.iter().any(|v| v.abs() > 1e-6));
        }
        // perturbed pair fails on the curved family
        let perturbed = LiftedTwistor { field: &field, psi_offset: Some(random_spinor(&mut r, 4)) };
        let worst = (0..10)
            .map(|_| {
                let x = random_point(&mut r, &patch.domain().bounds);
                parallel_twistor_residual(&patch, &rp, &perturbed, &x).unwrap().psi
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
        let poly = crate::spinor::PolynomialSpinor::random(&mut r, 4, 4);
        assert!(lift_to_twistor(&patch, &rp, &poly, &[patch.domain().center()], 1e-9).is_err());
    }

    #[test]
    fn two_form_at_zero_of_minkowski_family() {
        let mut r = rng(44);
        let rp = rep(4);
        let m = make_minkowski(4).unwrap();
        let s = random_spinor(&mut r, 4);
        let field = PositionClifford::new(&rp, s.clone()).unwrap();
        let tf = assemble_two_form(&m, &rp, &field, &[0.0; 4]).unwrap();
        assert!(tf.alpha_minus.iter().all(|v| *v == 0.0));
        assert_eq!(tf.alpha_mp, 0.0);
        let ds = &s * C64::from(-4.0);
        for i in 0..4 {
            let a = -rp.hermitian(&(rp.gamma(i) * &ds), &ds).re;
            assert!((tf.alpha_plus[i] + 2.0 / 16.0 * a).abs() < 1e-12);
        }
        assert!(tf.alpha_plus.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn differential_cross_check_on_minkowski() {
        let mut r = rng(45);
        for n in 3..=5 {
            let rp = rep(n);
            let m = make_minkowski(n).unwrap();
            let field = PositionClifford::new(&rp, random_spinor(&mut r, rp.spinor_dim())).unwrap();
            for _ in 0..30 {
                let x = random_point(&mut r, &m.domain().bounds);
                assert!(cross_check_two_form(&m, &rp, &field, &x).unwrap().max() <= 1e-8);
            }
        }
    }

    #[test]
    fn differential_cross_check_on_rescaled_minkowski() {
        let mut r = rng(46);
        let rp = rep(4);
        let m = make_minkowski(4).unwrap();
        let base = PositionClifford::new(&rp, random_spinor(&mut r, 4)).unwrap();
        for f in [
            RescaleFunction::Linear { constant: 0.1, coeffs: vec![0.3, -0.2, 0.1, 0.4] },
            RescaleFunction::GaussianBump { amplitude: 0.4, center: vec![0.1; 4], width: 0.8 },
        ] {
            let tilde = rescale(&m, f.clone()).unwrap();
            let field = Weighted { inner: &base, f, weight: 0.5 };
            for _ in 0..10 {
                let x = random_point(&mut r, &m.domain().bounds);
                let c = cross_check_two_form(&tilde, &rp, &field, &x).unwrap();
                assert!(c.max() <= 1e-8, "{c:?}");
            }
        }
    }

    #[test]
    fn parallel_spinor_forms_are_closed() {
        let mut r = rng(47);
        let rp = rep(4);
        let patch = curved_wave();
        let field = ConstantSpinor { n: 4, value: null_seed(&rp, &mut r) };
        for _ in 0..10 {
            let x = random_point(&mut r, &patch.domain().bounds);
            let (conn, at) = analyze(&patch, &rp, &field, &x).unwrap();
            let dc = differential_components(&patch, &rp, &conn, &at).unwrap();
            assert!(dc.half_d_alpha.amax() < 1e-12);
            assert!(dc.nabla_alpha.amax() < 1e-12);
            assert!(cross_check_two_form(&patch, &rp, &field, &x).unwrap().max() < 1e-12);
        }
    }

    #[test]
    fn synthetic_wedges() {
        let n = 4;
        let e = |k: usize| {
            let mut v = vec![0.0; n + 2];
            v[k] = 1.0;
            v
        };
        // s_-♭ ∧ c
        let l = flat(&Tractor::s_minus(n));
        let c = flat(&Tractor { a: 0.0, v: vec![0.0, 0.0, 1.0, 0.0], b: 0.0 });
        assert!(wedge_and_simplicity(&fiber_wedge(&l, &c)).unwrap().simple);
        // e_1∧e_2 + e_3∧e_4 in a six-dimensional frame
        let six = 6;
        let e6 = |k: usize| {
            let mut v = vec![0.0; six + 2];
            v[k] = 1.0;
            v
        };
        let ns = fiber_wedge(&e6(2), &e6(3)) + fiber_wedge(&e6(4), &e6(5));
        let o = wedge_and_simplicity(&ns).unwrap();
        assert!(!o.simple);
        assert!(matches!(classify_orbit(&ns), Err(Error::NotSimple { .. })));
        // spacelike ∧ spacelike
        let sp = fiber_wedge(&e(2), &e(3));
        assert_eq!(classify_orbit(&sp).unwrap().factor_type, FactorType::Other);
        // null ∧ null, null ∧ timelike
        let null_c = flat(&Tractor { a: 0.0, v: vec![1.0, 1.0, 0.0, 0.0], b: 0.0 });
        let time_c = flat(&Tractor { a: 0.0, v: vec![1.0, 0.0, 0.0, 0.0], b: 0.0 });
        let sp_l = flat(&Tractor::s_plus(n));
        assert_eq!(classify_orbit(&fiber_wedge(&sp_l, &null_c)).unwrap().factor_type, FactorType::NullWedgeNull);
        assert_eq!(classify_orbit(&fiber_wedge(&sp_l, &time_c)).unwrap().factor_type, FactorType::NullWedgeTimelike);
        assert!(matches!(wedge_and_simplicity(&DMatrix::zeros(6, 6)), Err(Error::ZeroTwoForm)));
    }

    #[test]
    fn minkowski_family_orbit_types() {
        let mut r = rng(48);
        for n in 3..=5 {
            let rp = rep(n);
            let m = make_minkowski(n).unwrap();
            let null_s = null_seed(&rp, &mut r);
            let time_s = {
                let mut s;
                loop {
                    s = random_spinor(&mut r, rp.spinor_dim());
                    let c = crate::squares::dirac_current(&rp, &s).unwrap();
                    if c.norm2() < -1e-3 * c.v.iter().map(|v| v * v).sum::<f64>() {
                        break;
                    }
                }
                s
            };
            for (s, expected) in [(null_s, FactorType::NullWedgeNull), (time_s, FactorType::NullWedgeTimelike)] {
                let field = PositionClifford::new(&rp, s).unwrap();
                for _ in 0..30 {
                    let x = random_point(&mut r, &m.domain().bounds);
                    let tf = assemble_two_form(&m, &rp, &field, &x).unwrap();
                    let o = classify_orbit(&tf.to_fiber()).unwrap();
                    assert!(o.wedge_defect <= 1e-9);
                    assert_eq!(o.factor_type, expected, "n={n}");
                }
            }
        }
    }

    #[test]
    fn defining_relation_fixes_a_global_constant() {
        let mut r = rng(49);
        for n in 3..=5 {
            let rp = rep(n);
            let tr = twistor_rep(&rp).unwrap();
            let sig = tr.signature();
            for _ in 0..5 {
                let phi = random_spinor(&mut r, rp.spinor_dim());
                let dphi = random_spinor(&mut r, rp.spinor_dim());
                let tw = Twistor { phi: phi.clone(), psi: &dphi * C64::from(SQRT_2 / n as f64) };
                let rel = relation_two_form(&tr, &tw);
                let tf = two_form_from_spinors(&rp, &phi, &dphi).to_orthonormal() * RELATION_CONSTANT;
                assert!((&rel - &tf).amax() <= 1e-10 * rel.amax().max(1.0), "n={n}");
                // spot check against Clifford multiplication by random 2-forms
                let x = tw.stacked();
                for _ in 0..10 {
                    let a = DMatrix::from_fn(n + 2, n + 2, |_, _| r.random_range(-1.0..1.0));
                    let a = &a - a.transpose();
                    let lhs = two_form_pairing(sig, &tf, &a);
                    let ax = tr.mul_twoform(&raise_two_form(sig, &a), &x).unwrap();
                    let rhs = tr.hermitian(&ax, &x) * C64::new(0.0, -1.0);
                    assert!((lhs - rhs.re).abs() <= 1e-8 && rhs.im.abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn hypersurface_orthogonality_of_minkowski_family() {
        let mut r = rng(50);
        let rp = rep(4);
        let m = make_minkowski(4).unwrap();
        let field = PositionClifford::new(&rp, random_spinor(&mut r, 4)).unwrap();
        for _ in 0..20 {
            let x = random_point(&mut r, &m.domain().bounds);
            let (conn, at) = analyze(&m, &rp, &field, &x).unwrap();
            let dc = differential_components(&m, &rp, &conn, &at).unwrap();
            assert!(hypersurface_defect(&dc) < 1e-10);
        }
    }
}
