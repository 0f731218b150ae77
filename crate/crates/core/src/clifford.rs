//! Complex spinor modules with explicit gamma matrices.
//!
//! Sign convention: `γ_i γ_j + γ_j γ_i = −2 g_ij · Id` for the diagonal metric
//! `g = diag(−1,…,−1,+1,…,+1)` (timelike directions first). Under this
//! convention a timelike generator squares to `+Id` and a spacelike one to `−Id`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::C64;
use crate::squares;

/// Largest total dimension for which a representation is built (64×64 matrices).
pub const MAX_CLIFFORD_DIM: usize = 12;

pub type Spinor = DVector<C64>;

/// Signature `(r, s)`: `r` timelike and `s` spacelike directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub r: usize,
    pub s: usize,
}

impl Signature {
    pub fn new(r: usize, s: usize) -> Result<Self> {
        if r + s == 0 {
            return Err(Error::InvalidSignature { r, s });
        }
        Ok(Signature { r, s })
    }

    /// Lorentzian signature `(1, n−1)`.
    pub fn lorentzian(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSignature { r: 1, s: n.saturating_sub(1) });
        }
        Self::new(1, n - 1)
    }

    /// Tractor signature `(2, n)` over a Lorentzian base of dimension `n`.
    pub fn tractor(n: usize) -> Result<Self> {
        Self::new(2, n)
    }

    pub fn n(&self) -> usize {
        self.r + self.s
    }

    /// `ε_i = g_ii`, i.e. −1 for timelike and +1 for spacelike directions.
    pub fn eps(&self, i: usize) -> f64 {
        if i < self.r {
            -1.0
        } else {
            1.0
        }
    }

    pub fn spinor_dim(&self) -> usize {
        1 << (self.n() / 2)
    }

    /// `(v, w)_{r,s}`.
    pub fn inner(&self, v: &[f64], w: &[f64]) -> f64 {
        v.iter()
            .zip(w)
            .enumerate()
            .map(|(i, (a, b))| self.eps(i) * a * b)
            .sum()
    }
}

/// Gamma matrices together with an invariant indefinite Hermitian form.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    signature: Signature,
    gammas: Vec<DMatrix<C64>>,
    /// `γ_i γ_j`, row-major in `(i, j)`.
    pairs: Vec<DMatrix<C64>>,
    /// Product of the timelike generators; the form is `phase · base_form`.
    base_form: DMatrix<C64>,
    phase: C64,
    hermitian_form: DMatrix<C64>,
    invariance_sign: f64,
}

fn kron_all(factors: &[&DMatrix<C64>]) -> DMatrix<C64> {
    factors
        .iter()
        .fold(DMatrix::from_element(1, 1, C64::from(1.0)), |acc, m| acc.kronecker(m))
}

/// Hermitian, mutually anticommuting generators squaring to `+Id`, built by
/// iterated tensor products of Pauli matrices.
fn euclidean_generators(n: usize) -> Vec<DMatrix<C64>> {
    let one = C64::from(1.0);
    let i = C64::i();
    let z = C64::from(0.0);
    let s1 = DMatrix::from_row_slice(2, 2, &[z, one, one, z]);
    let s2 = DMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
    let s3 = DMatrix::from_row_slice(2, 2, &[one, z, z, -one]);
    let id2 = DMatrix::<C64>::identity(2, 2);
    let m = n / 2;
    let mut out = Vec::with_capacity(n);
    for j in 0..m {
        for pauli in [&s1, &s2] {
            let mut factors: Vec<&DMatrix<C64>> = vec![&s3; j];
            factors.push(pauli);
            factors.extend(std::iter::repeat_n(&id2, m - j - 1));
            out.push(kron_all(&factors));
        }
    }
    if n % 2 == 1 {
        let factors: Vec<&DMatrix<C64>> = vec![&s3; m];
        out.push(kron_all(&factors));
    }
    out
}

impl CliffordRep {
    /// Gamma matrices with the Hermitian-form phase left at `1`.
    pub fn uncalibrated(sig: Signature) -> Result<Self> {
        let n = sig.n();
        if n > MAX_CLIFFORD_DIM {
            return Err(Error::Capacity { n, max: MAX_CLIFFORD_DIM });
        }
        let gammas: Vec<DMatrix<C64>> = euclidean_generators(n)
            .into_iter()
            .enumerate()
            .map(|(k, e)| if k < sig.r { e } else { e * C64::i() })
            .collect();
        let dim = sig.spinor_dim();
        let base_form = gammas[..sig.r]
            .iter()
            .fold(DMatrix::identity(dim, dim), |acc, g| acc * g);
        Ok(Self::from_parts(sig, gammas, base_form, C64::from(1.0)))
    }

    /// Assembles a representation from explicit generators and a form.
    /// Used for the split realisation of the twistor module.
    pub(crate) fn from_parts(
        signature: Signature,
        gammas: Vec<DMatrix<C64>>,
        base_form: DMatrix<C64>,
        phase: C64,
    ) -> Self {
        let n = gammas.len();
        let pairs = (0..n * n)
            .map(|ij| &gammas[ij / n] * &gammas[ij % n])
            .collect();
        let hermitian_form = &base_form * phase;
        let mut rep = CliffordRep {
            signature,
            gammas,
            pairs,
            base_form,
            phase,
            hermitian_form,
            invariance_sign: 1.0,
        };
        rep.invariance_sign = rep.measure_invariance_sign();
        rep
    }

    /// Returns a copy whose Hermitian form is `phase · (product of timelike gammas)`.
    pub fn with_phase(&self, phase: C64) -> Self {
        let mut out = self.clone();
        out.phase = phase;
        out.hermitian_form = &out.base_form * phase;
        out.invariance_sign = out.measure_invariance_sign();
        out
    }

    /// Sign `ε` with `⟨γ_0 φ, ψ⟩ = ε ⟨φ, γ_0 ψ⟩`, read off from the matrices.
    /// Equals `(−1)^{r+1}` for the product-of-timelike-gammas form.
    fn measure_invariance_sign(&self) -> f64 {
        let g = &self.gammas[0];
        let lhs = &self.hermitian_form * g;
        let rhs = g.adjoint() * &self.hermitian_form;
        if (&lhs - &rhs).camax() <= (&lhs + &rhs).camax() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn n(&self) -> usize {
        self.signature.n()
    }

    pub fn spinor_dim(&self) -> usize {
        self.gammas[0].nrows()
    }

    pub fn gamma(&self, i: usize) -> &DMatrix<C64> {
        &self.gammas[i]
    }

    pub fn gammas(&self) -> &[DMatrix<C64>] {
        &self.gammas
    }

    /// `γ_i γ_j`.
    pub fn pair(&self, i: usize, j: usize) -> &DMatrix<C64> {
        &self.pairs[i * self.n() + j]
    }

    pub fn hermitian_form(&self) -> &DMatrix<C64> {
        &self.hermitian_form
    }

    pub fn phase(&self) -> C64 {
        self.phase
    }

    pub fn invariance_sign(&self) -> f64 {
        self.invariance_sign
    }

    /// `⟨φ, ψ⟩ = ψ^H β φ`: linear in `φ`, antilinear in `ψ`.
    pub fn hermitian(&self, phi: &Spinor, psi: &Spinor) -> C64 {
        psi.dotc(&(&self.hermitian_form * phi))
    }

    /// Matrix of Clifford multiplication by `v = Σ v^i e_i`.
    pub fn vector_matrix(&self, v: &[f64]) -> DMatrix<C64> {
        let d = self.spinor_dim();
        v.iter()
            .zip(&self.gammas)
            .fold(DMatrix::zeros(d, d), |acc, (c, g)| acc + g * C64::from(*c))
    }

    fn check_spinor(&self, phi: &Spinor) -> Result<()> {
        if phi.len() != self.spinor_dim() {
            return Err(Error::DimensionMismatch { expected: self.spinor_dim(), got: phi.len() });
        }
        Ok(())
    }

    pub fn mul_vector(&self, v: &[f64], phi: &Spinor) -> Result<Spinor> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: v.len() });
        }
        self.check_spinor(phi)?;
        let mut out = Spinor::zeros(phi.len());
        for (c, g) in v.iter().zip(&self.gammas) {
            if *c != 0.0 {
                out += (g * phi) * C64::from(*c);
            }
        }
        Ok(out)
    }

    /// `Σ_{i<j} A_ij γ_i γ_j φ` for an antisymmetric coefficient array `A`.
    pub fn mul_twoform(&self, a: &DMatrix<f64>, phi: &Spinor) -> Result<Spinor> {
        let n = self.n();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
        }
        let defect = (a + a.transpose()).amax();
        if defect > 1e-12 * a.amax().max(1.0) {
            return Err(Error::NotAntisymmetric { defect });
        }
        self.check_spinor(phi)?;
        let mut out = Spinor::zeros(phi.len());
        for i in 0..n {
            for j in i + 1..n {
                if a[(i, j)] != 0.0 {
                    out += (self.pair(i, j) * phi) * C64::from(a[(i, j)]);
                }
            }
        }
        Ok(out)
    }

    /// `max_{i,j} ‖γ_iγ_j + γ_jγ_i + 2 g_ij Id‖_max`.
    pub fn relation_defect(&self) -> f64 {
        let n = self.n();
        let d = self.spinor_dim();
        let id = DMatrix::<C64>::identity(d, d);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let mut m = self.pair(i, j) + self.pair(j, i);
                if i == j {
                    m += &id * C64::from(2.0 * self.signature.eps(i));
                }
                worst = worst.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Gamma matrices and form as JSON (row-major `[re, im]` pairs).
    pub fn to_json(&self) -> serde_json::Value {
        let mat = |m: &DMatrix<C64>| -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect()
        };
        serde_json::json!({
            "signature": [self.signature.r, self.signature.s],
            "spinor_dim": self.spinor_dim(),
            "gammas": self.gammas.iter().map(mat).collect::<Vec<_>>(),
            "hermitian_form": mat(&self.hermitian_form),
            "invariance_sign": self.invariance_sign,
        })
    }
}

/// Builds the spinor module for `sig`. In Lorentzian signature the form's
/// phase is calibrated so that Dirac currents are causal and future-directed;
/// otherwise the phase is the one making the form Hermitian.
pub fn build_clifford_rep(sig: Signature) -> Result<CliffordRep> {
    let rep = CliffordRep::uncalibrated(sig)?;
    if sig.r == 1 && sig.s >= 1 {
        return squares::calibrate_hermitian_phase(&rep);
    }
    // (γ_0⋯γ_{r−1})^H = (−1)^{r(r−1)/2} γ_0⋯γ_{r−1}
    let phase = if (sig.r * sig.r.saturating_sub(1) / 2).is_multiple_of(2) {
        C64::from(1.0)
    } else {
        C64::i()
    };
    Ok(rep.with_phase(phase))
}

pub fn clifford_mul_vector(rep: &CliffordRep, v: &[f64], phi: &Spinor) -> Result<Spinor> {
    rep.mul_vector(v, phi)
}

pub fn clifford_mul_twoform(rep: &CliffordRep, a: &DMatrix<f64>, phi: &Spinor) -> Result<Spinor> {
    rep.mul_twoform(a, phi)
}
