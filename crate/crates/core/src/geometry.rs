//! Axisymmetric geometry: generating curve, discretized surface of
//! revolution, and homology cycles with spanning-disk quadrature.
//!
//! The surface is `x(t, theta) = (rho(t) cos theta, rho(t) sin theta, z(t))`
//! for a smooth closed generating curve `gamma(t) = (rho(t), z(t))`,
//! `t in [0, 2pi)`, with `rho > 0` everywhere so the surface has genus 1.

use crate::error::Error;
use crate::Result;
use nalgebra::Vector3;
use std::f64::consts::{PI, TAU};

/// Closed generating curve given by truncated Fourier series in `t`.
///
/// `rho(t) = sum_m rc[m] cos(mt) + rs[m] sin(mt)` and likewise for `z`.
/// Coefficient form keeps derivatives exact and the geometry bit-reproducible.
///
/// On construction the traversal direction is normalized (clockwise in the
/// `(rho, z)` half-plane) so that the frame `n = tau x theta` points out of
/// the enclosed solid torus.
#[derive(Debug, Clone)]
pub struct GeneratingCurve {
    rho_cos: Vec<f64>,
    rho_sin: Vec<f64>,
    zed_cos: Vec<f64>,
    zed_sin: Vec<f64>,
}

/// Value and first two derivatives of one coordinate at a parameter value.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub val: f64,
    pub d1: f64,
    pub d2: f64,
}

fn eval_series(cos_c: &[f64], sin_c: &[f64], t: f64) -> Jet {
    let mut val = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (m, &a) in cos_c.iter().enumerate() {
        let mf = m as f64;
        let (s, c) = (mf * t).sin_cos();
        val += a * c;
        d1 -= a * mf * s;
        d2 -= a * mf * mf * c;
    }
    for (m, &b) in sin_c.iter().enumerate() {
        let mf = m as f64;
        let (s, c) = (mf * t).sin_cos();
        val += b * s;
        d1 += b * mf * c;
        d2 -= b * mf * mf * s;
    }
    Jet { val, d1, d2 }
}

impl GeneratingCurve {
    /// Build a curve from Fourier coefficients of `rho` and `z`.
    ///
    /// Index `m` of each array multiplies `cos(mt)` / `sin(mt)`. The curve is
    /// re-oriented if needed so that the outward-frame convention holds.
    pub fn new(
        rho_cos: Vec<f64>,
        rho_sin: Vec<f64>,
        zed_cos: Vec<f64>,
        zed_sin: Vec<f64>,
    ) -> Result<Self> {
        let mut curve = GeneratingCurve {
            rho_cos,
            rho_sin,
            zed_cos,
            zed_sin,
        };
        if curve.rho_cos.is_empty() && curve.rho_sin.is_empty() {
            return Err(Error::Geometry("empty rho coefficient set".into()));
        }
        // Signed area of the (rho, z) loop; positive means counterclockwise,
        // which makes tau x theta point into the tube. Flip t -> -t in that
        // case by negating the sine coefficients.
        if curve.signed_area() > 0.0 {
            for b in curve.rho_sin.iter_mut() {
                *b = -*b;
            }
            for b in curve.zed_sin.iter_mut() {
                *b = -*b;
            }
        }
        // Reject curves touching the axis early; the grid builder re-checks
        // at its own nodes.
        let probe = 4096;
        for i in 0..probe {
            let t = TAU * i as f64 / probe as f64;
            if curve.rho(t).val <= 0.0 {
                return Err(Error::Geometry(format!(
                    "rho(t) <= 0 at t = {t}: generating curve touches the rotation axis"
                )));
            }
        }
        Ok(curve)
    }

    /// The modulated torus used as the standard validation geometry:
    /// `rho = 2 + (1 + 0.2 cos 4t) cos t`, `z = 2 + (1 + 0.3 sin 4t) sin t`.
    pub fn reference_torus() -> Self {
        // cos-series of rho: 2 + cos t + 0.1 cos 3t + 0.1 cos 5t
        // z: 2 + sin t + 0.15 cos 3t - 0.15 cos 5t
        GeneratingCurve::new(
            vec![2.0, 1.0, 0.0, 0.1, 0.0, 0.1],
            vec![],
            vec![2.0, 0.0, 0.0, 0.15, 0.0, -0.15],
            vec![0.0, 1.0],
        )
        .expect("reference torus is valid")
    }

    /// Circular torus `rho = r0 + a cos t`, `z = z0 + a sin t`.
    pub fn circular_torus(r0: f64, a: f64, z0: f64) -> Result<Self> {
        GeneratingCurve::new(vec![r0, a], vec![], vec![z0], vec![0.0, a])
    }

    pub fn rho(&self, t: f64) -> Jet {
        eval_series(&self.rho_cos, &self.rho_sin, t)
    }

    pub fn zed(&self, t: f64) -> Jet {
        eval_series(&self.zed_cos, &self.zed_sin, t)
    }

    /// |gamma'(t)|.
    pub fn speed(&self, t: f64) -> f64 {
        let r = self.rho(t);
        let z = self.zed(t);
        (r.d1 * r.d1 + z.d1 * z.d1).sqrt()
    }

    /// Signed area of the (rho, z) loop, `oint rho z' dt`.
    fn signed_area(&self) -> f64 {
        let n = 8 * (self.max_degree() + 1).max(32);
        let h = TAU / n as f64;
        (0..n)
            .map(|i| {
                let t = h * i as f64;
                self.rho(t).val * self.zed(t).d1
            })
            .sum::<f64>()
            * h
    }

    fn max_degree(&self) -> usize {
        [
            self.rho_cos.len(),
            self.rho_sin.len(),
            self.zed_cos.len(),
            self.zed_sin.len(),
        ]
        .into_iter()
        .max()
        .unwrap()
        .saturating_sub(1)
    }

    /// Centroid of the generating curve (plain parameter average).
    pub fn tube_center(&self) -> (f64, f64) {
        let n = 4096;
        let h = TAU / n as f64;
        let mut cr = 0.0;
        let mut cz = 0.0;
        for i in 0..n {
            let t = h * i as f64;
            cr += self.rho(t).val;
            cz += self.zed(t).val;
        }
        (cr / n as f64, cz / n as f64)
    }

    /// Curve scaled about the tube center by `factor`, staying a Fourier curve.
    pub fn scaled_about_center(&self, factor: f64) -> Result<Self> {
        let (cr, cz) = self.tube_center();
        let mut rc = self.rho_cos.clone();
        let mut zc = self.zed_cos.clone();
        for a in rc.iter_mut() {
            *a *= factor;
        }
        for a in zc.iter_mut() {
            *a *= factor;
        }
        if rc.is_empty() {
            rc.push(0.0);
        }
        if zc.is_empty() {
            zc.push(0.0);
        }
        rc[0] += (1.0 - factor) * cr;
        zc[0] += (1.0 - factor) * cz;
        let rs = self.rho_sin.iter().map(|b| b * factor).collect();
        let zs = self.zed_sin.iter().map(|b| b * factor).collect();
        GeneratingCurve::new(rc, rs, zc, zs)
    }

    /// Cross-sectional tube diameter: twice the mean distance from the tube
    /// center to the generating curve.
    pub fn tube_diameter(&self) -> f64 {
        let (cr, cz) = self.tube_center();
        let n = 1024;
        let mut acc = 0.0;
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            let dr = self.rho(t).val - cr;
            let dz = self.zed(t).val - cz;
            acc += (dr * dr + dz * dz).sqrt();
        }
        2.0 * acc / n as f64
    }

    /// Winding-number test: is the point `(r, z)` inside the generating curve?
    pub fn encloses(&self, r: f64, z: f64) -> bool {
        let n = 4096;
        let mut winding = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        let mut first = (0.0, 0.0);
        for i in 0..=n {
            let t = TAU * (i % n) as f64 / n as f64;
            let p = (self.rho(t).val - r, self.zed(t).val - z);
            if let Some(q) = prev {
                winding += (q.0 * p.1 - q.1 * p.0).atan2(q.0 * p.0 + q.1 * p.1);
            } else {
                first = p;
                let _ = first;
            }
            prev = Some(p);
        }
        winding.abs() > PI
    }

    /// Minimum distance between this curve and another, sampled densely.
    pub fn min_distance_to(&self, other: &GeneratingCurve) -> f64 {
        let n = 1024;
        let a: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                (self.rho(t).val, self.zed(t).val)
            })
            .collect();
        let b: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                (other.rho(t).val, other.zed(t).val)
            })
            .collect();
        let mut d2min = f64::INFINITY;
        for p in &a {
            for q in &b {
                let dr = p.0 - q.0;
                let dz = p.1 - q.1;
                d2min = d2min.min(dr * dr + dz * dz);
            }
        }
        d2min.sqrt()
    }
}

/// One grid node: position (at theta = 0), orthonormal frame, metric factors.
#[derive(Debug, Clone)]
pub struct GridNode {
    pub t: f64,
    pub position: Vector3<f64>,
    /// Unit tangent along the generating curve.
    pub tau: Vector3<f64>,
    /// Unit azimuthal direction.
    pub theta: Vector3<f64>,
    /// Outward unit normal, `n = tau x theta`.
    pub normal: Vector3<f64>,
    /// |gamma'(t)|.
    pub speed: f64,
    pub rho: f64,
    pub zed: f64,
    pub drho: f64,
    pub dzed: f64,
    /// Area Jacobian `|gamma'| rho`.
    pub jacobian: f64,
}

/// Equispaced discretization of the surface of revolution along `t`.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub curve: GeneratingCurve,
    pub n_nodes: usize,
    pub nodes: Vec<GridNode>,
}

/// Frame and metric data at an arbitrary parameter value (used by the
/// off-grid auxiliary quadrature nodes).
pub fn node_at(curve: &GeneratingCurve, t: f64) -> Result<GridNode> {
    let r = curve.rho(t);
    let z = curve.zed(t);
    let speed = (r.d1 * r.d1 + z.d1 * z.d1).sqrt();
    if r.val <= 0.0 {
        return Err(Error::Geometry(format!("rho({t}) = {} <= 0", r.val)));
    }
    if speed == 0.0 {
        return Err(Error::Geometry(format!("zero speed at t = {t}")));
    }
    let tau = Vector3::new(r.d1 / speed, 0.0, z.d1 / speed);
    let theta = Vector3::new(0.0, 1.0, 0.0);
    let normal = Vector3::new(-z.d1 / speed, 0.0, r.d1 / speed);
    Ok(GridNode {
        t,
        position: Vector3::new(r.val, 0.0, z.val),
        tau,
        theta,
        normal,
        speed,
        rho: r.val,
        zed: z.val,
        drho: r.d1,
        dzed: z.d1,
        jacobian: speed * r.val,
    })
}

/// Discretize the curve at `n` equispaced nodes `t_i = 2 pi i / n`.
pub fn build_surface_grid(curve: &GeneratingCurve, n: usize) -> Result<SurfaceGrid> {
    if n < 16 || n % 2 != 0 {
        return Err(Error::Geometry(format!(
            "node count must be even and >= 16, got {n}"
        )));
    }
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let t = TAU * i as f64 / n as f64;
        nodes.push(node_at(curve, t)?);
    }
    Ok(SurfaceGrid {
        curve: curve.clone(),
        n_nodes: n,
        nodes,
    })
}

impl SurfaceGrid {
    /// Grid spacing `2 pi / N`.
    pub fn spacing(&self) -> f64 {
        TAU / self.n_nodes as f64
    }

    /// Total surface area, `2 pi sum J_i h`.
    pub fn area(&self) -> f64 {
        let h = self.spacing();
        TAU * h * self.nodes.iter().map(|nd| nd.jacobian).sum::<f64>()
    }

    /// 3-space position of `(t_i, theta)`.
    pub fn position(&self, i: usize, theta: f64) -> Vector3<f64> {
        let nd = &self.nodes[i];
        let (s, c) = theta.sin_cos();
        Vector3::new(nd.rho * c, nd.rho * s, nd.zed)
    }

    /// Surface-integral weights `J_i h 2 pi` (trapezoid in t times full
    /// azimuthal factor); used for surface means of axisymmetric scalars.
    pub fn mean_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        self.nodes.iter().map(|nd| nd.jacobian * h * TAU).collect()
    }
}

/// Nodes and weights for the planar spanning disk `{radius <= rho(t*), z = z(t*)}`.
#[derive(Debug, Clone)]
pub struct DiskQuadrature {
    pub points: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
    /// Disk normal (Stokes-oriented against the +theta B-cycle traversal).
    pub normal: Vector3<f64>,
    pub radius: f64,
    pub center_z: f64,
}

impl DiskQuadrature {
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Flux of a vector field through the disk.
    pub fn flux<F>(&self, mut field: F) -> num_complex::Complex64
    where
        F: FnMut(&Vector3<f64>) -> Vector3<num_complex::Complex64>,
    {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (p, w) in self.points.iter().zip(&self.weights) {
            let v = field(p);
            acc += (v.x * self.normal.x + v.y * self.normal.y + v.z * self.normal.z) * *w;
        }
        acc
    }
}

/// Homology data: the poloidal A-cycle (the node loop itself), the toroidal
/// B-cycle at the innermost node, and the spanning-disk quadrature.
#[derive(Debug, Clone)]
pub struct HomologyCycles {
    /// Node index of the B-cycle circle (innermost node).
    pub b_node: usize,
    pub disk: DiskQuadrature,
}

/// Locate the B-cycle and build the spanning-disk quadrature.
///
/// The disk integrates radial polynomials of degree `<= disk_radial` exactly.
pub fn build_cycles(
    grid: &SurfaceGrid,
    disk_radial: usize,
    disk_azimuthal: usize,
) -> Result<HomologyCycles> {
    // Continuous minimizer of rho by dense scan + golden refinement, then
    // snap to the nearest node.
    let scan = 200_000;
    let mut best_t = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..scan {
        let t = TAU * i as f64 / scan as f64;
        let r = grid.curve.rho(t).val;
        if r < best {
            best = r;
            best_t = t;
        }
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_t - TAU / scan as f64, best_t + TAU / scan as f64);
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if grid.curve.rho(m1).val < grid.curve.rho(m2).val {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let tstar = 0.5 * (lo + hi);
    let h = grid.spacing();
    let b_node = ((tstar / h).round() as usize) % grid.n_nodes;

    let node = &grid.nodes[b_node];
    let radius = node.rho;
    let center_z = node.zed;

    let nr = disk_radial.max(2);
    let (gl_nodes, gl_weights) = crate::quadrature::gauss_legendre(nr);
    let na = disk_azimuthal.max(4);
    let dphi = TAU / na as f64;
    let mut points = Vec::with_capacity(nr * na);
    let mut weights = Vec::with_capacity(nr * na);
    for (u, wu) in gl_nodes.iter().zip(&gl_weights) {
        let r = radius * u;
        // Verify the disk interior stays in the exterior region.
        if grid.curve.encloses(r, center_z) {
            return Err(Error::Geometry(format!(
                "spanning disk point (r={r}, z={center_z}) lies inside the solid torus"
            )));
        }
        for ia in 0..na {
            let phi_a = dphi * ia as f64;
            let (s, c) = phi_a.sin_cos();
            points.push(Vector3::new(r * c, r * s, center_z));
            weights.push(radius * wu * r * dphi);
        }
    }
    Ok(HomologyCycles {
        b_node,
        disk: DiskQuadrature {
            points,
            weights,
            normal: Vector3::new(0.0, 0.0, 1.0),
            radius,
            center_z,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    #[test]
    fn reference_torus_matches_closed_form() {
        let c = GeneratingCurve::reference_torus();
        // rho(0) = 2 + 1.2, z(0) = 2
        let r0 = c.rho(0.0);
        let z0 = c.zed(0.0);
        assert!((r0.val - 3.2).abs() < 1e-14);
        assert!((z0.val - 2.0).abs() < 1e-14);
        // t = pi: rho = 0.8, z = 2 (cos series is even, unaffected by
        // orientation normalization; z has sin pi = 0)
        let rp = c.rho(PI);
        let zp = c.zed(PI);
        assert!((rp.val - 0.8).abs() < 1e-14);
        assert!((zp.val - 2.0).abs() < 1e-14);
        // closed-form check at a generic parameter against the product form,
        // accounting for the orientation flip t -> -t
        let t = 0.73;
        let direct = |t: f64| 2.0 + (1.0 + 0.2 * (4.0 * t).cos()) * t.cos();
        let dz = |t: f64| 2.0 + (1.0 + 0.3 * (4.0 * t).sin()) * t.sin();
        let fwd = (c.rho(t).val - direct(t)).abs() + (c.zed(t).val - dz(t)).abs();
        let rev = (c.rho(t).val - direct(-t)).abs() + (c.zed(t).val - dz(-t)).abs();
        assert!(fwd.min(rev) < 1e-13);
    }

    #[test]
    fn equispaced_nodes() {
        let c = GeneratingCurve::circular_torus(2.0, 0.5, 0.0).unwrap();
        let g = build_surface_grid(&c, 16).unwrap();
        for (i, nd) in g.nodes.iter().enumerate() {
            assert!((nd.t - TAU * i as f64 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn frames_orthonormal_and_outward() {
        let c = GeneratingCurve::reference_torus();
        let g = build_surface_grid(&c, 64).unwrap();
        for nd in &g.nodes {
            assert!((nd.tau.norm() - 1.0).abs() < 1e-14);
            assert!((nd.theta.norm() - 1.0).abs() < 1e-14);
            assert!((nd.normal.norm() - 1.0).abs() < 1e-14);
            assert!(nd.tau.dot(&nd.theta).abs() < 1e-14);
            assert!(nd.tau.dot(&nd.normal).abs() < 1e-14);
            assert!(nd.theta.dot(&nd.normal).abs() < 1e-14);
            let cross = nd.tau.cross(&nd.theta);
            assert!((cross - nd.normal).norm() < 1e-14);
        }
        // Outwardness on a convex-tube case: n . (x - c) > 0 with c the tube
        // center at the same node.
        let ct = GeneratingCurve::circular_torus(2.0, 0.5, 0.0).unwrap();
        let gt = build_surface_grid(&ct, 64).unwrap();
        for nd in &gt.nodes {
            let center = Vector3::new(2.0, 0.0, 0.0);
            assert!(nd.normal.dot(&(nd.position - center)) > 0.0);
        }
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        let c = GeneratingCurve::reference_torus();
        assert!(build_surface_grid(&c, 15).is_err());
        assert!(build_surface_grid(&c, 8).is_err());
        // curve touching the axis
        assert!(GeneratingCurve::circular_torus(1.0, 1.0, 0.0).is_err());
        // degenerate (zero-speed) parameterization
        let degenerate = GeneratingCurve::new(vec![2.0], vec![], vec![0.0], vec![]);
        let g = degenerate.and_then(|c| build_surface_grid(&c, 16));
        assert!(g.is_err());
    }

    #[test]
    fn area_converges_spectrally() {
        let c = GeneratingCurve::reference_torus();
        // dense reference
        let nref = 1_000_000;
        let h = TAU / nref as f64;
        let mut aref = 0.0;
        for i in 0..nref {
            let t = h * i as f64;
            let r = c.rho(t);
            let z = c.zed(t);
            aref += (r.d1 * r.d1 + z.d1 * z.d1).sqrt() * r.val;
        }
        aref *= h * TAU;
        let a64 = build_surface_grid(&c, 64).unwrap().area();
        let a128 = build_surface_grid(&c, 128).unwrap().area();
        let a256 = build_surface_grid(&c, 256).unwrap().area();
        let e64 = (a64 - aref).abs();
        let e128 = (a128 - aref).abs();
        let e256 = (a256 - aref).abs();
        // Exponential (spectral) convergence. The measured per-doubling gain
        // for this curve is ~3e3 (the metric factor sqrt(rho'^2+z'^2) rho has
        // a finite analyticity strip), far beyond any algebraic order.
        assert!(e128 <= e64 / 1e3, "e64={e64:e} e128={e128:e}");
        assert!(e256 < 1e-11 * aref.abs(), "e256={e256:e}");
    }

    #[test]
    fn cycles_and_disk() {
        let c = GeneratingCurve::reference_torus();
        let g = build_surface_grid(&c, 128).unwrap();
        let cyc = build_cycles(&g, 24, 48).unwrap();
        // innermost node is near rho = 0.8 (minimizer scan oracle)
        let rb = g.nodes[cyc.b_node].rho;
        assert!(
            (rb - 0.8).abs() < 1e-6,
            "innermost rho {rb} should be the global minimum 0.8"
        );
        // disk area = pi rho^2
        let area = cyc.disk.area();
        assert!((area - PI * rb * rb).abs() < 1e-12 * area.abs());
        // flux of a constant vertical field
        let f = cyc
            .disk
            .flux(|_| Vector3::new(0.0.into(), 0.0.into(), num_complex::Complex64::new(2.5, 0.0)));
        assert!((f.re - 2.5 * area).abs() < 1e-12 * area);
        assert!(f.im.abs() < 1e-14);
        // disk boundary coincides with the B-cycle circle
        let bc = &g.nodes[cyc.b_node];
        assert!((cyc.disk.radius - bc.rho).abs() < 1e-12);
        assert!((cyc.disk.center_z - bc.zed).abs() < 1e-12);
    }

    #[test]
    fn disk_radial_exactness() {
        // radial polynomial of degree disk_radial integrated exactly
        let c = GeneratingCurve::reference_torus();
        let g = build_surface_grid(&c, 64).unwrap();
        let nr = 12;
        let cyc = build_cycles(&g, nr, 32).unwrap();
        let rmax = cyc.disk.radius;
        // integrand r^10 over the disk: int r^10 r dr dphi = 2 pi rmax^12/12
        let mut acc = 0.0;
        for (p, w) in cyc.disk.points.iter().zip(&cyc.disk.weights) {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            acc += r.powi(10) * w;
        }
        let exact = TAU * rmax.powi(12) / 12.0;
        assert!((acc - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn scaled_copies_nest() {
        let c = GeneratingCurve::reference_torus();
        let inner = c.scaled_about_center(0.5).unwrap();
        let outer = c.scaled_about_center(1.5).unwrap();
        let diam = c.tube_diameter();
        assert!(c.min_distance_to(&inner) >= 0.1 * diam);
        assert!(c.min_distance_to(&outer) >= 0.1 * diam);
        // inner curve points lie inside the original, outer outside
        for k in 0..32 {
            let t = TAU * k as f64 / 32.0;
            assert!(c.encloses(inner.rho(t).val, inner.zed(t).val));
            assert!(!c.encloses(outer.rho(t).val, outer.zed(t).val));
        }
    }

    #[test]
    fn quadrature_nodes_present() {
        let (n, w) = quadrature::gauss_legendre(8);
        assert_eq!(n.len(), 8);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
