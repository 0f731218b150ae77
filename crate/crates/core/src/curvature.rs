//! Levi-Civita connection, curvature and the Schouten operator of a metric patch.
//!
//! Conventions: `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`,
//! `R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} − Γ^ρ_{νλ}Γ^λ_{μσ}`,
//! `Ric_{σν} = R^ρ_{σρν}`. The Schouten operator is
//! `P = (1/(n−2))(scal/(2(n−1))·Id − Ric)` as an endomorphism.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::{Jet1, Jet2, MAX_DIM};
use crate::metric::{frame_jet, Arr3, Arr4, FrameJet, Mat, MetricData, MetricPatch, ZERO_ARR3, ZERO_MAT};

/// Connection data at a point.
#[derive(Clone, Debug)]
pub struct ConnectionAt {
    pub point: Vec<f64>,
    pub n: usize,
    pub g: Mat,
    pub ginv: Mat,
    /// `christoffel[k][i][j] = Γ^k_ij`.
    pub christoffel: Arr3,
    /// `dchristoffel[l][k][i][j] = ∂_l Γ^k_ij`.
    pub dchristoffel: Box<Arr4>,
    pub frame: FrameJet,
    /// `omega[i][j][k] = ω_jk(e_i) = g(∇_{e_i} e_j, e_k)` with first partials.
    pub omega: Vec<Vec<Vec<Jet1>>>,
}

/// Curvature operators at a point. Frame matrices act on frame components,
/// `m[(i, j)]` being the `e_i` component of the image of `e_j`.
#[derive(Clone, Debug)]
pub struct SchoutenAt {
    pub point: Vec<f64>,
    pub ric: DMatrix<f64>,
    pub scal: f64,
    pub schouten: DMatrix<f64>,
    /// Schouten operator on coordinate components.
    pub schouten_coord: DMatrix<f64>,
}

fn inverse(data: &MetricData, x: &[f64]) -> Result<Mat> {
    let n = data.n;
    let m = DMatrix::from_fn(n, n, |i, j| data.g[i][j]);
    let scale = m.amax().max(1.0);
    let inv = m
        .clone()
        .try_inverse()
        .filter(|_| m.determinant().abs() > 1e-12 * scale.powi(n as i32))
        .ok_or_else(|| Error::SingularMetric { point: x.to_vec() })?;
    let mut out = ZERO_MAT;
    for i in 0..n {
        for j in 0..n {
            out[i][j] = inv[(i, j)];
        }
    }
    Ok(out)
}

/// Christoffel symbols and their first partials from analytic metric data.
pub(crate) fn christoffel_arrays(data: &MetricData, ginv: &Mat) -> (Arr3, Box<Arr4>) {
    let n = data.n;
    let (dg, d2g) = (&data.dg, &data.d2g);
    let mut lower = ZERO_ARR3;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                lower[l][i][j] = 0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
            }
        }
    }
    let mut gamma = ZERO_ARR3;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                gamma[k][i][j] = (0..n).map(|l| ginv[k][l] * lower[l][i][j]).sum();
            }
        }
    }
    let mut dgamma = Box::new([ZERO_ARR3; MAX_DIM]);
    for m in 0..n {
        // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
        let mut dginv = ZERO_MAT;
        for k in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += ginv[k][a] * dg[m][a][b] * ginv[b][l];
                    }
                }
                dginv[k][l] = -s;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        let dlow = 0.5 * (d2g[m][i][j][l] + d2g[m][j][i][l] - d2g[m][l][i][j]);
                        s += dginv[k][l] * lower[l][i][j] + ginv[k][l] * dlow;
                    }
                    dgamma[m][k][i][j] = s;
                }
            }
        }
    }
    (gamma, dgamma)
}

pub fn christoffels(patch: &MetricPatch, x: &[f64]) -> Result<ConnectionAt> {
    let data = patch.eval(x)?;
    let n = data.n;
    let ginv = inverse(&data, x)?;
    let (gamma, dgamma) = christoffel_arrays(&data, &ginv);
    let frame = frame_jet(patch, x)?;

    let e1: Vec<Vec<Jet1>> = frame.e.iter().map(|v| v.iter().map(Jet2::truncate).collect()).collect();
    let g1: Vec<Vec<Jet1>> = patch
        .metric_jet(x)
        .iter()
        .map(|row| row.iter().map(Jet2::truncate).collect())
        .collect();
    let gam1 = |k: usize, i: usize, j: usize| {
        let mut d = [0.0; MAX_DIM];
        for (l, dl) in d.iter_mut().enumerate().take(n) {
            *dl = dgamma[l][k][i][j];
        }
        Jet1 { v: gamma[k][i][j], d }
    };
    // lowered frame vectors g(e_k, ·)
    let el: Vec<Vec<Jet1>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|nu| (0..n).fold(Jet1::ZERO, |acc, rho| acc + g1[nu][rho] * e1[k][rho]))
                .collect()
        })
        .collect();
    // (∇_μ e_j)^ν
    let mut cov = vec![vec![vec![Jet1::ZERO; n]; n]; n];
    for (j, cj) in cov.iter_mut().enumerate() {
        for (mu, cjm) in cj.iter_mut().enumerate() {
            for (nu, c) in cjm.iter_mut().enumerate() {
                let mut s = frame.e[j][nu].partial(mu);
                for lam in 0..n {
                    if gamma[nu][mu][lam] != 0.0 || dgamma.iter().any(|d| d[nu][mu][lam] != 0.0) {
                        s += gam1(nu, mu, lam) * e1[j][lam];
                    }
                }
                *c = s;
            }
        }
    }
    let mut omega = vec![vec![vec![Jet1::ZERO; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let nabla: Vec<Jet1> = (0..n)
                .map(|nu| (0..n).fold(Jet1::ZERO, |acc, mu| acc + e1[i][mu] * cov[j][mu][nu]))
                .collect();
            for k in 0..n {
                omega[i][j][k] = (0..n).fold(Jet1::ZERO, |acc, nu| acc + nabla[nu] * el[k][nu]);
            }
        }
    }
    Ok(ConnectionAt {
        point: x.to_vec(),
        n,
        g: data.g,
        ginv,
        christoffel: gamma,
        dchristoffel: dgamma,
        frame,
        omega,
    })
}

pub(crate) fn riemann_from(n: usize, g: &Arr3, dg: &Arr4) -> Box<Arr4> {
    let mut r = Box::new([ZERO_ARR3; MAX_DIM]);
    for rho in 0..n {
        for sig in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let mut s = dg[mu][rho][nu][sig] - dg[nu][rho][mu][sig];
                    for lam in 0..n {
                        s += g[rho][mu][lam] * g[lam][nu][sig] - g[rho][nu][lam] * g[lam][mu][sig];
                    }
                    r[rho][sig][mu][nu] = s;
                }
            }
        }
    }
    r
}

fn ricci_scal(n: usize, r: &Arr4, ginv: &Mat) -> (Mat, f64) {
    let mut ric = ZERO_MAT;
    for s in 0..n {
        for v in 0..n {
            ric[s][v] = (0..n).map(|rho| r[rho][s][rho][v]).sum();
        }
    }
    let mut scal = 0.0;
    for s in 0..n {
        for v in 0..n {
            scal += ginv[s][v] * ric[s][v];
        }
    }
    (ric, scal)
}

fn schouten_coord(n: usize, ric: &Mat, scal: f64, ginv: &Mat) -> DMatrix<f64> {
    let j = scal / (2.0 * (n as f64 - 1.0));
    let ric_up = DMatrix::from_fn(n, n, |mu, nu| (0..n).map(|s| ginv[mu][s] * ric[s][nu]).sum());
    (DMatrix::identity(n, n) * j - ric_up) / (n as f64 - 2.0)
}

/// Frame-free data for geodesic integration.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub g: Mat,
    pub christoffel: Arr3,
    /// Schouten operator on coordinate components, when requested.
    pub schouten_coord: Option<DMatrix<f64>>,
}

pub fn point_geometry(patch: &MetricPatch, x: &[f64], with_schouten: bool) -> Result<PointGeometry> {
    let data = patch.eval(x)?;
    let n = data.n;
    let ginv = inverse(&data, x)?;
    let (gamma, dgamma) = christoffel_arrays(&data, &ginv);
    let schouten_coord = with_schouten.then(|| {
        let (ric, scal) = ricci_scal(n, &riemann_from(n, &gamma, &dgamma), &ginv);
        schouten_coord(n, &ric, scal, &ginv)
    });
    Ok(PointGeometry { g: data.g, christoffel: gamma, schouten_coord })
}

fn eps(i: usize) -> f64 {
    if i == 0 {
        -1.0
    } else {
        1.0
    }
}

impl ConnectionAt {
    pub fn frame_values(&self) -> Vec<Vec<f64>> {
        self.frame.values()
    }

    /// Full Riemann tensor `r[ρ][σ][μ][ν] = R^ρ_{σμν}` in coordinates.
    pub fn riemann(&self) -> Box<Arr4> {
        riemann_from(self.n, &self.christoffel, &self.dchristoffel)
    }

    pub fn schouten(&self) -> SchoutenAt {
        let n = self.n;
        let (ric, scal) = ricci_scal(n, &self.riemann(), &self.ginv);
        let j = scal / (2.0 * (n as f64 - 1.0));
        let c = 1.0 / (n as f64 - 2.0);
        let e = self.frame_values();
        let ric_frame = DMatrix::from_fn(n, n, |a, b| {
            let mut s = 0.0;
            for mu in 0..n {
                for nu in 0..n {
                    s += e[a][mu] * e[b][nu] * ric[mu][nu];
                }
            }
            eps(a) * s
        });
        let schouten = (DMatrix::identity(n, n) * j - &ric_frame) * c;
        SchoutenAt {
            point: self.point.clone(),
            ric: ric_frame,
            scal,
            schouten,
            schouten_coord: schouten_coord(n, &ric, scal, &self.ginv),
        }
    }

    /// `∇_μ α_ν` of a one-form given by coordinate-component jets, with first partials.
    pub fn nabla_one_form(&self, alpha: &[Jet2]) -> Result<Vec<Vec<Jet1>>> {
        let n = self.n;
        if alpha.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: alpha.len() });
        }
        let a1: Vec<Jet1> = alpha.iter().map(Jet2::truncate).collect();
        let mut out = vec![vec![Jet1::ZERO; n]; n];
        for mu in 0..n {
            for nu in 0..n {
                let mut s = alpha[nu].partial(mu);
                for lam in 0..n {
                    let mut d = [0.0; MAX_DIM];
                    for (l, dl) in d.iter_mut().enumerate().take(n) {
                        *dl = self.dchristoffel[l][lam][mu][nu];
                    }
                    s = s - Jet1 { v: self.christoffel[lam][mu][nu], d } * a1[lam];
                }
                out[mu][nu] = s;
            }
        }
        Ok(out)
    }

    /// Bochner Laplacian `g^{ρμ} ∇_ρ ∇_μ α_ν`.
    pub fn bochner_laplacian(&self, alpha: &[Jet2]) -> Result<Vec<f64>> {
        let n = self.n;
        let nab = self.nabla_one_form(alpha)?;
        let gam = &self.christoffel;
        let mut out = vec![0.0; n];
        for (nu, o) in out.iter_mut().enumerate() {
            for rho in 0..n {
                for mu in 0..n {
                    if self.ginv[rho][mu] == 0.0 {
                        continue;
                    }
                    let mut second = nab[mu][nu].d[rho];
                    for lam in 0..n {
                        second -= gam[lam][rho][mu] * nab[lam][nu].v + gam[lam][rho][nu] * nab[mu][lam].v;
                    }
                    *o += self.ginv[rho][mu] * second;
                }
            }
        }
        Ok(out)
    }

    /// `d*α = −g^{μν} ∇_μ α_ν`.
    pub fn codifferential(&self, alpha: &[Jet2]) -> Result<f64> {
        let nab = self.nabla_one_form(alpha)?;
        let n = self.n;
        let mut s = 0.0;
        for mu in 0..n {
            for nu in 0..n {
                s -= self.ginv[mu][nu] * nab[mu][nu].v;
            }
        }
        Ok(s)
    }

    /// Coordinate components to frame components of a covector: `β(e_i)`.
    pub fn covector_to_frame(&self, beta: &[f64]) -> Vec<f64> {
        self.frame_values().iter().map(|e| e.iter().zip(beta).map(|(a, b)| a * b).sum()).collect()
    }

    /// `β(e_i, e_j)` for a coordinate 2-tensor.
    pub fn two_tensor_to_frame(&self, b: &[Vec<f64>]) -> DMatrix<f64> {
        let e = self.frame_values();
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for mu in 0..n {
                for nu in 0..n {
                    s += e[i][mu] * e[j][nu] * b[mu][nu];
                }
            }
            s
        })
    }
}

/// `dα_μν = ½(∂_μ α_ν − ∂_ν α_μ)`, normalized like `ξ∧η = ½(ξ⊗η − η⊗ξ)`.
pub fn exterior_derivative(alpha: &[Jet2]) -> Vec<Vec<f64>> {
    let n = alpha.len();
    (0..n)
        .map(|mu| (0..n).map(|nu| 0.5 * (alpha[nu].d[mu] - alpha[mu].d[nu])).collect())
        .collect()
}

pub fn riemann_ricci_scal(patch: &MetricPatch, x: &[f64]) -> Result<SchoutenAt> {
    Ok(christoffels(patch, x)?.schouten())
}

/// `□α = (−1/(n−2))(Δα − tr_g P · α)` in coordinate components.
pub fn box_operator(patch: &MetricPatch, alpha: &[Jet2], x: &[f64]) -> Result<Vec<f64>> {
    let conn = christoffels(patch, x)?;
    let sch = conn.schouten();
    box_with(&conn, &sch, alpha)
}

pub fn box_with(conn: &ConnectionAt, sch: &SchoutenAt, alpha: &[Jet2]) -> Result<Vec<f64>> {
    let n = conn.n as f64;
    let lap = conn.bochner_laplacian(alpha)?;
    let tr = sch.schouten.trace();
    Ok(lap
        .iter()
        .zip(alpha)
        .map(|(l, a)| -(l - tr * a.v) / (n - 2.0))
        .collect())
}

pub fn codifferential(patch: &MetricPatch, alpha: &[Jet2], x: &[f64]) -> Result<f64> {
    christoffels(patch, x)?.codifferential(alpha)
}
