//! Helmholtz kernel family and azimuthal modal reduction.
//!
//! All boundary operators reduce, per azimuthal mode, to 1-D integral
//! operators on the generating curve with kernels
//!
//! `entry(i, j) = int_0^{2pi} coeff(dtheta) radial(R) e^{-i n dtheta} rho_j d(dtheta)`
//!
//! where `R = |x(t_i, 0) - y(t_j, dtheta)|`, `radial` is one of the Green
//! function factors below, and `coeff` collects the frame dot products of the
//! particular operator. Each entry is integrated as a whole kernel: the frame
//! products vanish at coincidence pointwise, which keeps near-diagonal
//! entries free of catastrophic cancellation.

use crate::error::Error;
use crate::geometry::{node_at, GridNode, SurfaceGrid};
use crate::quadrature::{AlpertRule, AzimuthalIntegrator};
use crate::Result;
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Complex wavenumber with the branch convention `0 <= arg k < pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber {
    k: Complex64,
}

impl Wavenumber {
    pub fn new(k: Complex64) -> Self {
        let k = if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
            -k
        } else {
            k
        };
        Wavenumber { k }
    }

    pub fn zero() -> Self {
        Wavenumber {
            k: Complex64::new(0.0, 0.0),
        }
    }

    pub fn value(&self) -> Complex64 {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.k.norm() == 0.0
    }
}

/// `g_k(x, y) = e^{ik|x-y|} / (4 pi |x-y|)`.
pub fn green(x: &Vector3<f64>, y: &Vector3<f64>, k: Wavenumber) -> Result<Complex64> {
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(Error::Geometry("green kernel at coincident points".into()));
    }
    Ok(green_radial(r, k.value()))
}

#[inline]
pub fn green_radial(r: f64, k: Complex64) -> Complex64 {
    (Complex64::new(0.0, 1.0) * k * r).exp() / (4.0 * PI * r)
}

/// Radial factor of the gradient: `grad_x g = gp(R) (x - y)`.
#[inline]
pub fn green_gp_radial(r: f64, k: Complex64) -> Complex64 {
    (Complex64::new(0.0, 1.0) * k - Complex64::new(1.0 / r, 0.0)) * green_radial(r, k) / r
}

/// Analytic gradient `grad_x g_k(x, y)`.
pub fn green_grad(x: &Vector3<f64>, y: &Vector3<f64>, k: Wavenumber) -> Result<Vector3<Complex64>> {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::Geometry("green gradient at coincident points".into()));
    }
    let gp = green_gp_radial(r, k.value());
    Ok(Vector3::new(gp * d.x, gp * d.y, gp * d.z))
}

/// `d g_k / d n_x`.
pub fn green_normal_deriv(
    x: &Vector3<f64>,
    y: &Vector3<f64>,
    k: Wavenumber,
    normal_at_x: &Vector3<f64>,
) -> Result<Complex64> {
    let g = green_grad(x, y, k)?;
    Ok(g.x * normal_at_x.x + g.y * normal_at_x.y + g.z * normal_at_x.z)
}

const DIFF_SERIES_TERMS: usize = 30;

/// `(g_k - g_0) / k`, summed as a series for `|k| R < 1` so the limit
/// `k -> 0` is reached without cancellation: `i/(4pi) sum_j (ikR)^j / (j+1)!`.
#[inline]
pub fn green_diff_radial(r: f64, k: Complex64) -> Complex64 {
    if (k * r).norm() < 1.0 {
        let ikr = Complex64::new(0.0, 1.0) * k * r;
        let mut term = Complex64::new(1.0, 0.0); // (ikR)^j / j!
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..DIFF_SERIES_TERMS {
            acc += term / (j as f64 + 1.0);
            term *= ikr / (j as f64 + 1.0);
        }
        Complex64::new(0.0, 1.0 / (4.0 * PI)) * acc
    } else {
        (green_radial(r, k) - green_radial(r, Complex64::new(0.0, 0.0))) / k
    }
}

/// `(g_k(x,y) - g_0(x,y)) / k`.
pub fn green_diff_over_k(x: &Vector3<f64>, y: &Vector3<f64>, k: Wavenumber) -> Result<Complex64> {
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(Error::Geometry(
            "difference kernel at coincident points".into(),
        ));
    }
    Ok(green_diff_radial(r, k.value()))
}

/// Radial factor of `grad_x [(g_k - g_0)/k] = gpd(R) (x - y)`:
/// `i/(4pi) sum_{j>=1} j (ik)^j R^{j-2} / (j+1)!` for small `|k| R`.
#[inline]
pub fn green_gp_diff_radial(r: f64, k: Complex64) -> Complex64 {
    if (k * r).norm() < 1.0 {
        let ik = Complex64::new(0.0, 1.0) * k;
        let ikr = ik * r;
        let mut term = Complex64::new(1.0, 0.0); // (ikR)^{j-1}
        let mut fact = 2.0; // (j+1)! at j = 1
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..DIFF_SERIES_TERMS {
            acc += term * (j as f64 / fact);
            term *= ikr;
            fact *= (j + 2) as f64;
        }
        Complex64::new(0.0, 1.0 / (4.0 * PI)) * ik * acc / r
    } else {
        (green_gp_radial(r, k) - green_gp_radial(r, Complex64::new(0.0, 0.0))) / k
    }
}

/// The reduced-kernel families used by the boundary operators.
///
/// Naming: `Vsl*` is the vector single layer projected on frames
/// (target x source), `K4*` the tangential-trace kernel of `n x curl G`,
/// `Curl*` the raw frame components of `curl G` (low-frequency auxiliary rows
/// and cross-checks), `*Diff` the `(g_k - g_0)/k` variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    SingleLayer,
    SingleLayerDiff,
    NormalDerivK0,
    VslTT,
    VslTTh,
    VslThT,
    VslThTh,
    VslNT,
    VslNTh,
    K4TT,
    K4TTh,
    K4ThT,
    K4ThTh,
    CurlTT,
    CurlTTh,
    CurlThT,
    CurlThTh,
    CurlNT,
    CurlNTh,
    CurlDiffTT,
    CurlDiffTTh,
    CurlDiffThT,
    CurlDiffThTh,
}

impl TableKind {
    /// The set one wavenumber needs for trace assembly.
    pub fn trace_set() -> Vec<TableKind> {
        use TableKind::*;
        vec![
            SingleLayer,
            NormalDerivK0,
            VslTT,
            VslTTh,
            VslThT,
            VslThTh,
            VslNT,
            VslNTh,
            K4TT,
            K4TTh,
            K4ThT,
            K4ThTh,
        ]
    }

    /// Additional kinds for the low-frequency perfect-conductor row.
    pub fn pec_aux_set() -> Vec<TableKind> {
        use TableKind::*;
        vec![
            SingleLayerDiff,
            CurlTT,
            CurlTTh,
            CurlThT,
            CurlThTh,
            CurlDiffTT,
            CurlDiffTTh,
            CurlDiffThT,
            CurlDiffThTh,
        ]
    }

    fn radial(&self) -> Radial {
        use TableKind::*;
        match self {
            SingleLayer | VslTT | VslTTh | VslThT | VslThTh | VslNT | VslNTh => Radial::G,
            NormalDerivK0 | K4TT | K4TTh | K4ThT | K4ThTh | CurlTT | CurlTTh | CurlThT
            | CurlThTh | CurlNT | CurlNTh => Radial::Gp,
            SingleLayerDiff => Radial::Gd,
            CurlDiffTT | CurlDiffTTh | CurlDiffThT | CurlDiffThTh => Radial::Gpd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Radial {
    G,
    Gp,
    Gd,
    Gpd,
}

/// Scalar geometry of one quadrature point on the generating curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub rho: f64,
    pub zed: f64,
    pub drho: f64,
    pub dzed: f64,
    pub speed: f64,
}

impl From<&GridNode> for CurvePoint {
    fn from(n: &GridNode) -> Self {
        CurvePoint {
            rho: n.rho,
            zed: n.zed,
            drho: n.drho,
            dzed: n.dzed,
            speed: n.speed,
        }
    }
}

/// Real trig coefficient of one kind at azimuthal offset with `c = cos`,
/// `s = sin`.
#[inline]
fn kind_coeff(kind: TableKind, ti: &CurvePoint, tj: &CurvePoint, c: f64, s: f64) -> f64 {
    let tau_i = Vector3::new(ti.drho / ti.speed, 0.0, ti.dzed / ti.speed);
    let the_i = Vector3::new(0.0, 1.0, 0.0);
    let nor_i = Vector3::new(-ti.dzed / ti.speed, 0.0, ti.drho / ti.speed);
    let tau_j = Vector3::new(
        tj.drho * c / tj.speed,
        tj.drho * s / tj.speed,
        tj.dzed / tj.speed,
    );
    let the_j = Vector3::new(-s, c, 0.0);
    let x = Vector3::new(ti.rho - tj.rho * c, -tj.rho * s, ti.zed - tj.zed);
    use TableKind::*;
    match kind {
        SingleLayer | SingleLayerDiff => 1.0,
        NormalDerivK0 => nor_i.dot(&x),
        VslTT => tau_i.dot(&tau_j),
        VslTTh => tau_i.dot(&the_j),
        VslThT => the_i.dot(&tau_j),
        VslThTh => the_i.dot(&the_j),
        VslNT => nor_i.dot(&tau_j),
        VslNTh => nor_i.dot(&the_j),
        // (a.X)(n.b') - (a.b')(n.X)  =  a . [n x (X x b')]
        K4TT => tau_i.dot(&x) * nor_i.dot(&tau_j) - tau_i.dot(&tau_j) * nor_i.dot(&x),
        K4TTh => tau_i.dot(&x) * nor_i.dot(&the_j) - tau_i.dot(&the_j) * nor_i.dot(&x),
        K4ThT => the_i.dot(&x) * nor_i.dot(&tau_j) - the_i.dot(&tau_j) * nor_i.dot(&x),
        K4ThTh => the_i.dot(&x) * nor_i.dot(&the_j) - the_i.dot(&the_j) * nor_i.dot(&x),
        CurlTT | CurlDiffTT => tau_i.dot(&x.cross(&tau_j)),
        CurlTTh | CurlDiffTTh => tau_i.dot(&x.cross(&the_j)),
        CurlThT | CurlDiffThT => the_i.dot(&x.cross(&tau_j)),
        CurlThTh | CurlDiffThTh => the_i.dot(&x.cross(&the_j)),
        CurlNT => nor_i.dot(&x.cross(&tau_j)),
        CurlNTh => nor_i.dot(&x.cross(&the_j)),
    }
}

/// Azimuthally reduced kernel entries between one target and one source
/// point, for every requested kind at once (shared radial evaluations).
/// Includes the source Jacobian factor `rho_j`.
pub fn modal_entries(
    target: &CurvePoint,
    source: &CurvePoint,
    mode: i32,
    k: Wavenumber,
    kinds: &[TableKind],
    integ: &AzimuthalIntegrator,
) -> (Vec<Complex64>, bool) {
    let d0sq = (target.rho - source.rho).powi(2) + (target.zed - source.zed).powi(2);
    let rr4 = 4.0 * target.rho * source.rho;
    let kv = k.value();
    let need = |r: Radial| kinds.iter().any(|kk| kk.radial() == r);
    let (need_g, need_gp, need_gd, need_gpd) = (
        need(Radial::G),
        need(Radial::Gp),
        need(Radial::Gd),
        need(Radial::Gpd),
    );
    let nf = mode as f64;
    let zero = Complex64::new(0.0, 0.0);

    let mut integrand = |u: f64, out: &mut [Complex64]| {
        let sh = (0.5 * u).sin();
        let r = (d0sq + rr4 * sh * sh).sqrt();
        let g = if need_g { green_radial(r, kv) } else { zero };
        let gp = if need_gp { green_gp_radial(r, kv) } else { zero };
        let gd = if need_gd { green_diff_radial(r, kv) } else { zero };
        let gpd = if need_gpd {
            green_gp_diff_radial(r, kv)
        } else {
            zero
        };
        let (su, cu) = u.sin_cos();
        // fold the two half-circles: F(u) e^{-inu} + F(-u) e^{+inu}
        let ep = Complex64::from_polar(1.0, -nf * u);
        let em = ep.conj();
        for (slot, kind) in out.iter_mut().zip(kinds) {
            let radial = match kind.radial() {
                Radial::G => g,
                Radial::Gp => gp,
                Radial::Gd => gd,
                Radial::Gpd => gpd,
            };
            let cp = kind_coeff(*kind, target, source, cu, su);
            let cm = kind_coeff(*kind, target, source, cu, -su);
            *slot = radial * (cp * ep + cm * em);
        }
    };
    let est = integ.integrate_batch(0.0, PI, kinds.len(), &mut integrand);
    let rho_j = Complex64::new(source.rho, 0.0);
    (
        est.values.iter().map(|v| v * rho_j).collect(),
        est.converged,
    )
}

/// Azimuthally reduced kernel tables for one `(mode, wavenumber)` pair:
/// an `N x N` grid matrix per kind plus the off-grid auxiliary columns used
/// by the hybrid quadrature corrections.
#[derive(Debug, Clone)]
pub struct ModalTables {
    pub mode: i32,
    pub k: Wavenumber,
    pub n: usize,
    pub kinds: Vec<TableKind>,
    grids: Vec<DMatrix<Complex64>>,
    /// `auxs[kidx][(i, m)]`: column m < M is `t_i + chi_m h`, m >= M is
    /// `t_i - chi_m h`.
    auxs: Vec<DMatrix<Complex64>>,
    /// Geometry at the auxiliary points, same column layout.
    pub aux_points: Vec<Vec<CurvePoint>>,
    pub flagged: bool,
}

impl ModalTables {
    fn kind_index(&self, kind: TableKind) -> usize {
        self.kinds
            .iter()
            .position(|k| *k == kind)
            .unwrap_or_else(|| panic!("kind {kind:?} not built in this table set"))
    }

    pub fn grid_matrix(&self, kind: TableKind) -> &DMatrix<Complex64> {
        &self.grids[self.kind_index(kind)]
    }

    pub fn aux_matrix(&self, kind: TableKind) -> &DMatrix<Complex64> {
        &self.auxs[self.kind_index(kind)]
    }
}

/// Build the modal tables for all requested kinds.
///
/// Parallel over target rows; each row integrates its grid and auxiliary
/// sources sequentially, so results do not depend on scheduling.
pub fn build_modal_tables(
    grid: &SurfaceGrid,
    mode: i32,
    k: Wavenumber,
    rule: &AlpertRule,
    integ: &AzimuthalIntegrator,
    kinds: &[TableKind],
) -> Result<ModalTables> {
    rule.check_grid(grid.n_nodes)?;
    let n = grid.n_nodes;
    let h = grid.spacing();
    let aux_offsets = rule.aux_nodes();
    let m = aux_offsets.len();
    let skip = rule.skip();

    struct Row {
        grid_vals: Vec<Vec<Complex64>>,
        aux_vals: Vec<Vec<Complex64>>,
        aux_pts: Vec<CurvePoint>,
        ok: bool,
    }

    let rows: Vec<Row> = (0..n)
        .into_par_iter()
        .map(|i| {
            let target = CurvePoint::from(&grid.nodes[i]);
            let ti = grid.nodes[i].t;
            let mut grid_vals = vec![vec![Complex64::new(0.0, 0.0); n]; kinds.len()];
            let mut aux_vals = vec![vec![Complex64::new(0.0, 0.0); 2 * m]; kinds.len()];
            let mut aux_pts = vec![target; 2 * m];
            let mut ok = true;
            for j in 0..n {
                let d = (j + n - i) % n;
                if d.min(n - d) < skip {
                    // the hybrid rule never touches these entries
                    continue;
                }
                let source = CurvePoint::from(&grid.nodes[j]);
                let (vals, conv) = modal_entries(&target, &source, mode, k, kinds, integ);
                ok &= conv;
                for (kidx, v) in vals.into_iter().enumerate() {
                    grid_vals[kidx][j] = v;
                }
            }
            for (midx, &chi) in aux_offsets.iter().enumerate() {
                for (base, sign) in [(0usize, 1.0f64), (m, -1.0)] {
                    let t_aux = ti + sign * chi * h;
                    let nd = node_at(&grid.curve, t_aux).expect("aux node on valid curve");
                    let source = CurvePoint::from(&nd);
                    let (vals, conv) = modal_entries(&target, &source, mode, k, kinds, integ);
                    ok &= conv;
                    for (kidx, v) in vals.into_iter().enumerate() {
                        aux_vals[kidx][base + midx] = v;
                    }
                    aux_pts[base + midx] = source;
                }
            }
            Row {
                grid_vals,
                aux_vals,
                aux_pts,
                ok,
            }
        })
        .collect();

    let mut grids = vec![DMatrix::zeros(n, n); kinds.len()];
    let mut auxs = vec![DMatrix::zeros(n, 2 * m); kinds.len()];
    let mut aux_points = Vec::with_capacity(n);
    let mut all_ok = true;
    for (i, row) in rows.into_iter().enumerate() {
        all_ok &= row.ok;
        for kidx in 0..kinds.len() {
            for j in 0..n {
                grids[kidx][(i, j)] = row.grid_vals[kidx][j];
            }
            for p in 0..2 * m {
                auxs[kidx][(i, p)] = row.aux_vals[kidx][p];
            }
        }
        aux_points.push(row.aux_pts);
    }

    Ok(ModalTables {
        mode,
        k,
        n,
        kinds: kinds.to_vec(),
        grids,
        auxs,
        aux_points,
        flagged: !all_ok,
    })
}

/// Single-kind convenience builder.
pub fn build_modal_table(
    grid: &SurfaceGrid,
    kind: TableKind,
    mode: i32,
    k: Wavenumber,
    rule: &AlpertRule,
    integ: &AzimuthalIntegrator,
) -> Result<ModalTables> {
    build_modal_tables(grid, mode, k, rule, integ, &[kind])
}
