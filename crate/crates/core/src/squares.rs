//! Spinor squares and Dirac currents.

use nalgebra::DVector;
use serde::Serialize;

use crate::clifford::{CliffordRep, Spinor};
use crate::error::{Error, Result};
use crate::jet::C64;
use crate::sampling;

/// `|(v,v)| ≤ NULL_BAND · ‖v‖²` counts as null.
pub const NULL_BAND: f64 = 1e-9;

/// Currents with Euclidean frame norm at or below this are zero.
pub const ZERO_CURRENT: f64 = 1e-30;

const CALIBRATION_SAMPLES: usize = 200;
const CALIBRATION_SEED: u64 = 0x5eed_ca1b;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalType {
    Zero,
    Null,
    Timelike,
    Spacelike,
}

/// Dirac current of a spinor in the frame gauge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracCurrentAt {
    /// Contravariant frame components `V^i`.
    pub v: Vec<f64>,
    /// Covariant components `α(e_i) = −⟨e_i·φ, φ⟩`.
    pub alpha: Vec<f64>,
    pub causal_type: CausalType,
    pub future_directed: bool,
}

impl DiracCurrentAt {
    /// `g(V, V)` in the flat frame metric.
    pub fn norm2(&self) -> f64 {
        self.v.iter().zip(&self.alpha).map(|(a, b)| a * b).sum()
    }
}

/// `(α_i, worst imaginary part)` with `α_i = −⟨e_i·φ, φ⟩`.
fn raw_current(rep: &CliffordRep, phi: &Spinor) -> (Vec<f64>, f64) {
    let mut alpha = Vec::with_capacity(rep.n());
    let mut imag: f64 = 0.0;
    for i in 0..rep.n() {
        let z = -rep.hermitian(&(rep.gamma(i) * phi), phi);
        imag = imag.max(z.im.abs());
        alpha.push(z.re);
    }
    (alpha, imag)
}

pub fn classify_causal(v: &[f64], eps: impl Fn(usize) -> f64) -> CausalType {
    let e2: f64 = v.iter().map(|x| x * x).sum();
    if e2.sqrt() <= ZERO_CURRENT {
        return CausalType::Zero;
    }
    let g: f64 = v.iter().enumerate().map(|(i, x)| eps(i) * x * x).sum();
    if g.abs() <= NULL_BAND * e2 {
        CausalType::Null
    } else if g < 0.0 {
        CausalType::Timelike
    } else {
        CausalType::Spacelike
    }
}

fn current_unchecked(rep: &CliffordRep, phi: &Spinor) -> (DiracCurrentAt, f64) {
    let sig = rep.signature();
    let (alpha, imag) = raw_current(rep, phi);
    let v: Vec<f64> = alpha.iter().enumerate().map(|(i, a)| sig.eps(i) * a).collect();
    let causal_type = classify_causal(&v, |i| sig.eps(i));
    let future_directed = v[0] > 0.0;
    (DiracCurrentAt { v, alpha, causal_type, future_directed }, imag)
}

/// Dirac current `V` with `g(V, e_i) = −⟨e_i·φ, φ⟩`.
///
/// A spacelike, past-directed or complex result means the representation is
/// not calibrated and is reported as a convention violation.
pub fn dirac_current(rep: &CliffordRep, phi: &Spinor) -> Result<DiracCurrentAt> {
    if phi.len() != rep.spinor_dim() {
        return Err(Error::DimensionMismatch { expected: rep.spinor_dim(), got: phi.len() });
    }
    let (cur, imag) = current_unchecked(rep, phi);
    let scale = phi.norm_squared();
    if imag > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ConventionViolation(format!("complex Dirac current (imag {imag:e})")));
    }
    match cur.causal_type {
        CausalType::Zero => {}
        CausalType::Spacelike => {
            return Err(Error::ConventionViolation("spacelike Dirac current".into()))
        }
        _ if !cur.future_directed => {
            return Err(Error::ConventionViolation("past-directed Dirac current".into()))
        }
        _ => {}
    }
    Ok(cur)
}

/// Homogeneous component of the spinor square, as covariant frame components.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinorSquare {
    pub degree: usize,
    pub dim: usize,
    /// Row-major array of shape `dim^degree`.
    pub coefficients: Vec<C64>,
}

impl SpinorSquare {
    pub fn get(&self, idx: &[usize]) -> C64 {
        let flat = idx.iter().fold(0, |acc, i| acc * self.dim + i);
        self.coefficients[flat]
    }
}

/// `c_{j1…ji} = −⟨γ_{j1}⋯γ_{ji} φ, φ⟩` for distinct indices, zero otherwise.
/// The uniform factor −1 makes degree 1 the Dirac current. Degrees above 2
/// are not provided.
pub fn spinor_square(rep: &CliffordRep, phi: &Spinor, degree: usize) -> Result<SpinorSquare> {
    let n = rep.n();
    if degree > n || degree > 2 {
        return Err(Error::DegreeOutOfRange { degree, max: n.min(2) });
    }
    let coefficients = match degree {
        0 => vec![-rep.hermitian(phi, phi)],
        1 => (0..n).map(|j| -rep.hermitian(&(rep.gamma(j) * phi), phi)).collect(),
        _ => {
            let mut c = vec![C64::from(0.0); n * n];
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        c[j * n + k] = -rep.hermitian(&(rep.pair(j, k) * phi), phi);
                    }
                }
            }
            c
        }
    };
    Ok(SpinorSquare { degree, dim: n, coefficients })
}

fn phase_passes(rep: &CliffordRep, samples: &[DVector<C64>]) -> bool {
    samples.iter().all(|phi| {
        let (cur, imag) = current_unchecked(rep, phi);
        imag <= 1e-10 * phi.norm_squared()
            && matches!(cur.causal_type, CausalType::Null | CausalType::Timelike)
            && cur.future_directed
    })
}

/// Chooses the phase in `{±1, ±i}` for which random spinors all have causal,
/// future-directed currents. Exactly one candidate must pass.
pub fn calibrate_hermitian_phase(rep: &CliffordRep) -> Result<CliffordRep> {
    let mut rng = sampling::rng(CALIBRATION_SEED);
    let samples: Vec<_> = (0..CALIBRATION_SAMPLES)
        .map(|_| sampling::random_spinor(&mut rng, rep.spinor_dim()))
        .collect();
    let candidates = [C64::from(1.0), C64::from(-1.0), C64::i(), -C64::i()];
    let passing: Vec<C64> = candidates
        .into_iter()
        .filter(|&c| phase_passes(&rep.with_phase(c), &samples))
        .collect();
    match passing.as_slice() {
        [c] => Ok(rep.with_phase(*c)),
        [] => Err(Error::Calibration("no phase yields causal future-directed currents".into())),
        many => Err(Error::Calibration(format!("{} phases pass; ambiguous", many.len()))),
    }
}

/// Number of candidate phases passing calibration (diagnostics and tests).
pub fn passing_phases(rep: &CliffordRep) -> Vec<C64> {
    let mut rng = sampling::rng(CALIBRATION_SEED);
    let samples: Vec<_> = (0..CALIBRATION_SAMPLES)
        .map(|_| sampling::random_spinor(&mut rng, rep.spinor_dim()))
        .collect();
    [C64::from(1.0), C64::from(-1.0), C64::i(), -C64::i()]
        .into_iter()
        .filter(|&c| phase_passes(&rep.with_phase(c), &samples))
        .collect()
}
