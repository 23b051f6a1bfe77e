//! Modal surface calculus on the surface of revolution.
//!
//! Scalars and tangential 1-forms are expanded in azimuthal modes
//! `e^{i n theta}`; per mode they reduce to coefficient functions of `t` on
//! the generating curve. Differentiation along `t` is pseudospectral
//! (periodic differentiation matrix); multiplication by metric factors is
//! pointwise.
//!
//! Conventions (pinned here, used everywhere else):
//! - `d_gamma f = (f' / |gamma'|) tau + (i n f / rho) theta`
//! - `star2`: rotation by +90 degrees about the outward normal,
//!   `tau -> theta`, `theta -> -tau`
//! - `dstar_gamma v = (1/(|gamma'| rho)) d_t(rho v_tau) + (i n / rho) v_theta`
//!   (the surface divergence), so `dstar_gamma . d_gamma = laplace_beltrami`
//! - `curl_gamma v = (1/(|gamma'| rho)) d_t(rho v_theta) - (i n / rho) v_tau`
//!   (the scalar coefficient of `d_Gamma(v)` against the area form)

use crate::error::Error;
use crate::geometry::SurfaceGrid;
use crate::Result;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::TAU;

type CVec = DVector<Complex64>;
type CMat = DMatrix<Complex64>;

/// Azimuthal-mode coefficient function of a scalar surface density.
#[derive(Debug, Clone)]
pub struct ModalScalar {
    pub mode: i32,
    pub values: CVec,
}

impl ModalScalar {
    pub fn zeros(mode: i32, n: usize) -> Self {
        ModalScalar {
            mode,
            values: CVec::zeros(n),
        }
    }
}

/// Azimuthal-mode coefficient functions of a tangential field, in the
/// orthonormal frame `(tau, theta)`. The normal component is identically
/// zero by construction.
#[derive(Debug, Clone)]
pub struct ModalTangentField {
    pub mode: i32,
    pub tau: CVec,
    pub theta: CVec,
}

impl ModalTangentField {
    pub fn zeros(mode: i32, n: usize) -> Self {
        ModalTangentField {
            mode,
            tau: CVec::zeros(n),
            theta: CVec::zeros(n),
        }
    }

    /// Pack as a stacked coefficient vector `[tau; theta]`.
    pub fn stacked(&self) -> CVec {
        let n = self.tau.len();
        let mut out = CVec::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&self.tau);
        out.rows_mut(n, n).copy_from(&self.theta);
        out
    }

    pub fn from_stacked(mode: i32, v: &CVec) -> Self {
        let n = v.len() / 2;
        ModalTangentField {
            mode,
            tau: v.rows(0, n).into_owned(),
            theta: v.rows(n, n).into_owned(),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.tau
            .iter()
            .chain(self.theta.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Harmonic 1-form basis on the genus-1 surface: `psi_theta = theta / rho`
/// and `psi_tau = tau / rho`, both axisymmetric.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub psi_tau: ModalTangentField,
    pub psi_theta: ModalTangentField,
}

/// Pseudospectral surface-calculus operators bound to one grid.
#[derive(Debug, Clone)]
pub struct SurfaceCalc {
    pub n: usize,
    diff: DMatrix<f64>,
    pub(crate) speed: DVector<f64>,
    pub(crate) rho: DVector<f64>,
    /// J-weighted mean functional weights (sum to 1).
    mean_w: DVector<f64>,
    spacing: f64,
}

impl SurfaceCalc {
    pub fn new(grid: &SurfaceGrid) -> Self {
        let n = grid.n_nodes;
        let h = grid.spacing();
        // Periodic spectral differentiation matrix for even n:
        // D_jk = (1/2) (-1)^(j-k) cot((j-k) h / 2), zero diagonal.
        let mut diff = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    let d = j as isize - k as isize;
                    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                    diff[(j, k)] = 0.5 * sign / ((d as f64) * h / 2.0).tan();
                }
            }
        }
        let speed = DVector::from_iterator(n, grid.nodes.iter().map(|nd| nd.speed));
        let rho = DVector::from_iterator(n, grid.nodes.iter().map(|nd| nd.rho));
        let jtot: f64 = grid.nodes.iter().map(|nd| nd.jacobian).sum();
        let mean_w = DVector::from_iterator(n, grid.nodes.iter().map(|nd| nd.jacobian / jtot));
        SurfaceCalc {
            n,
            diff,
            speed,
            rho,
            mean_w,
            spacing: h,
        }
    }

    fn apply_diff(&self, f: &CVec) -> CVec {
        let mut out = CVec::zeros(self.n);
        for j in 0..self.n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..self.n {
                let d = self.diff[(j, k)];
                if d != 0.0 {
                    acc += d * f[k];
                }
            }
            out[j] = acc;
        }
        out
    }

    /// Surface-weighted mean of a mode-0 scalar.
    pub fn mean(&self, f: &CVec) -> Complex64 {
        f.iter().zip(self.mean_w.iter()).map(|(z, w)| z * *w).sum()
    }

    /// Surface gradient.
    pub fn d_gamma(&self, f: &ModalScalar) -> ModalTangentField {
        let df = self.apply_diff(&f.values);
        let n = self.n;
        let mut tau = CVec::zeros(n);
        let mut theta = CVec::zeros(n);
        let infac = Complex64::new(0.0, f.mode as f64);
        for i in 0..n {
            tau[i] = df[i] / self.speed[i];
            theta[i] = infac * f.values[i] / self.rho[i];
        }
        ModalTangentField {
            mode: f.mode,
            tau,
            theta,
        }
    }

    /// Hodge rotation: `tau -> theta`, `theta -> -tau`.
    pub fn star2(&self, v: &ModalTangentField) -> ModalTangentField {
        ModalTangentField {
            mode: v.mode,
            tau: -v.theta.clone(),
            theta: v.tau.clone(),
        }
    }

    /// Surface divergence (`-star2 d_gamma star2` on 1-forms).
    pub fn dstar_gamma(&self, v: &ModalTangentField) -> ModalScalar {
        let n = self.n;
        let mut rr = CVec::zeros(n);
        for i in 0..n {
            rr[i] = v.tau[i] * self.rho[i];
        }
        let drr = self.apply_diff(&rr);
        let infac = Complex64::new(0.0, v.mode as f64);
        let mut out = CVec::zeros(n);
        for i in 0..n {
            out[i] = drr[i] / (self.speed[i] * self.rho[i]) + infac * v.theta[i] / self.rho[i];
        }
        ModalScalar {
            mode: v.mode,
            values: out,
        }
    }

    /// Surface curl: coefficient of `d_Gamma v` against the area form.
    pub fn curl_gamma(&self, v: &ModalTangentField) -> ModalScalar {
        let rotated = self.star2(v);
        let mut s = self.dstar_gamma(&rotated);
        // div(star2 v) = -curl v
        s.values.iter_mut().for_each(|z| *z = -*z);
        s
    }

    /// Scalar Laplace-Beltrami operator.
    pub fn laplace_beltrami(&self, f: &ModalScalar) -> ModalScalar {
        let df = self.apply_diff(&f.values);
        let n = self.n;
        let mut mid = CVec::zeros(n);
        for i in 0..n {
            mid[i] = df[i] * (self.rho[i] / self.speed[i]);
        }
        let dmid = self.apply_diff(&mid);
        let n2 = (f.mode as f64) * (f.mode as f64);
        let mut out = CVec::zeros(n);
        for i in 0..n {
            out[i] = dmid[i] / (self.speed[i] * self.rho[i])
                - n2 * f.values[i] / (self.rho[i] * self.rho[i]);
        }
        ModalScalar {
            mode: f.mode,
            values: out,
        }
    }

    /// Dense matrix of `laplace_beltrami` at a given mode.
    fn laplace_matrix(&self, mode: i32) -> CMat {
        let n = self.n;
        let mut a = CMat::zeros(n, n);
        for k in 0..n {
            let mut e = ModalScalar::zeros(mode, n);
            e.values[k] = Complex64::new(1.0, 0.0);
            let col = self.laplace_beltrami(&e);
            a.column_mut(k).copy_from(&col.values);
        }
        a
    }

    /// Mean-zero partial inverse of the Laplace-Beltrami operator.
    ///
    /// For mode 0 the input must have (numerically) vanishing surface mean;
    /// the output is the mean-zero solution of `laplace u = f`. Nonzero
    /// modes are invertible outright.
    pub fn r0_apply(&self, f: &ModalScalar) -> Result<ModalScalar> {
        if f.mode == 0 {
            let m = self.mean(&f.values).norm();
            let scale = f.values.norm().max(1e-300);
            if m > 1e-10 * scale {
                return Err(Error::Precondition(format!(
                    "r0 input at mode 0 has nonzero surface mean ({m:e} vs scale {scale:e})"
                )));
            }
        }
        let inv = self.r0_matrix(f.mode);
        Ok(ModalScalar {
            mode: f.mode,
            values: &inv * &f.values,
        })
    }

    /// Dense matrix of the mean-zero partial inverse at a given mode.
    ///
    /// At mode 0 the discrete operator has a two-dimensional nullspace: the
    /// constant and the Nyquist sawtooth `(-1)^i` (the even-grid spectral
    /// differentiation matrix kills both). The inverse is built from a doubly
    /// bordered system whose extra rows are the two exact discrete left-null
    /// functionals (J-weighted mean and J-weighted alternating sum), so
    /// `laplace . r0 = Id` holds to roundoff on mean-zero, Nyquist-free data.
    pub fn r0_matrix(&self, mode: i32) -> CMat {
        let n = self.n;
        let lap = self.laplace_matrix(mode);
        if mode != 0 {
            return lap.lu().try_inverse().expect("modal Laplacian invertible");
        }
        // scale the borders to the Laplacian's row magnitude so the LU does
        // not lose digits to imbalance
        let lscale = lap.norm() / (n as f64).sqrt();
        let mut bordered = CMat::zeros(n + 2, n + 2);
        bordered.view_mut((0, 0), (n, n)).copy_from(&lap);
        for i in 0..n {
            let alt = if i % 2 == 0 { 1.0 } else { -1.0 };
            bordered[(i, n)] = Complex64::new(lscale, 0.0);
            bordered[(i, n + 1)] = Complex64::new(alt * lscale, 0.0);
            bordered[(n, i)] = Complex64::new(self.mean_w[i] * lscale * n as f64, 0.0);
            bordered[(n + 1, i)] = Complex64::new(self.mean_w[i] * alt * lscale * n as f64, 0.0);
        }
        let lu = bordered.clone().lu();
        let mut out = CMat::zeros(n, n);
        for k in 0..n {
            let mut rhs = CVec::zeros(n + 2);
            rhs[k] = Complex64::new(1.0, 0.0);
            let mut sol = lu.solve(&rhs).expect("bordered Laplacian solvable");
            // one step of iterative refinement
            let resid = &rhs - &bordered * &sol;
            if let Some(corr) = lu.solve(&resid) {
                sol += corr;
            }
            for i in 0..n {
                out[(i, k)] = sol[i];
            }
        }
        out
    }

    /// Size-2N stacked matrix of `star2`.
    pub fn star2_matrix(&self) -> CMat {
        let n = self.n;
        let mut m = CMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            m[(i, n + i)] = Complex64::new(-1.0, 0.0);
            m[(n + i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Stacked (2N x N) matrix of `d_gamma` at a mode.
    pub fn d_gamma_matrix(&self, mode: i32) -> CMat {
        let n = self.n;
        let mut m = CMat::zeros(2 * n, n);
        for j in 0..n {
            for k in 0..n {
                m[(j, k)] = Complex64::new(self.diff[(j, k)] / self.speed[j], 0.0);
            }
            m[(n + j, j)] = Complex64::new(0.0, mode as f64 / self.rho[j]);
        }
        m
    }

    /// (N x 2N) matrix of the surface divergence at a mode.
    pub fn dstar_matrix(&self, mode: i32) -> CMat {
        let n = self.n;
        let mut m = CMat::zeros(n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                m[(j, k)] = Complex64::new(
                    self.diff[(j, k)] * self.rho[k] / (self.speed[j] * self.rho[j]),
                    0.0,
                );
            }
            m[(j, n + j)] = Complex64::new(0.0, mode as f64 / self.rho[j]);
        }
        m
    }

    /// (N x 2N) matrix of the surface curl at a mode.
    pub fn curl_matrix(&self, mode: i32) -> CMat {
        let n = self.n;
        let mut m = CMat::zeros(n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                m[(j, n + k)] = Complex64::new(
                    self.diff[(j, k)] * self.rho[k] / (self.speed[j] * self.rho[j]),
                    0.0,
                );
            }
            m[(j, j)] = Complex64::new(0.0, -(mode as f64) / self.rho[j]);
        }
        m
    }

    /// A-cycle circulation of a mode-0 tangential field (poloidal loop).
    pub fn circulation_a(&self, v: &ModalTangentField) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.n {
            acc += v.tau[i] * self.speed[i];
        }
        acc * self.spacing
    }

    /// B-cycle circulation of a mode-0 tangential field (toroidal circle at
    /// the given node).
    pub fn circulation_b(&self, v: &ModalTangentField, b_node: usize) -> Complex64 {
        TAU * self.rho[b_node] * v.theta[b_node]
    }

    /// Row functional of `circulation_a` on stacked tangent vectors.
    pub fn circulation_a_row(&self) -> CVec {
        let n = self.n;
        let mut row = CVec::zeros(2 * n);
        for i in 0..n {
            row[i] = Complex64::new(self.speed[i] * self.spacing, 0.0);
        }
        row
    }

    /// Row functional of `circulation_b` on stacked tangent vectors.
    pub fn circulation_b_row(&self, b_node: usize) -> CVec {
        let n = self.n;
        let mut row = CVec::zeros(2 * n);
        row[n + b_node] = Complex64::new(TAU * self.rho[b_node], 0.0);
        row
    }

    /// Surface-mean functional weights (sum to one).
    pub fn mean_weights(&self) -> &DVector<f64> {
        &self.mean_w
    }
}

/// The harmonic 1-form basis `{psi_tau, psi_theta} = {tau/rho, theta/rho}`.
pub fn harmonic_basis(grid: &SurfaceGrid) -> HarmonicBasis {
    let n = grid.n_nodes;
    let mut psi_tau = ModalTangentField::zeros(0, n);
    let mut psi_theta = ModalTangentField::zeros(0, n);
    for (i, nd) in grid.nodes.iter().enumerate() {
        psi_tau.tau[i] = Complex64::new(1.0 / nd.rho, 0.0);
        psi_theta.theta[i] = Complex64::new(1.0 / nd.rho, 0.0);
    }
    HarmonicBasis { psi_tau, psi_theta }
}
