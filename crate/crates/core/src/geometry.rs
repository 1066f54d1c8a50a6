//! Generatrix geometry in the angle parametrization.
//!
//! The profile stores `dphi = d(phi)/dx` as a piecewise constant function on the
//! cells of a [`Grid`]; `phi` itself is the piecewise linear function obtained by
//! cumulative integration from `phi(0) = 0`. Every integral of `cos(phi)` or
//! `sin(phi)` over a cell is evaluated with the exact antiderivative of a
//! trigonometric function of a linear argument, so the pole behaviour of
//! `Icos`/`Icosin` is inherited from the data rather than from a quadrature rule.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math::{self, PI};

/// Default tolerance on the closure defect `|Icos(1)|`.
pub const CLOSURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct WallProfile {
    grid: Grid,
    dphi: Vec<f64>,
    length: f64,
    time: f64,
}

impl WallProfile {
    pub fn new(grid: Grid, dphi: Vec<f64>, length: f64, time: f64) -> Result<Self> {
        if dphi.len() != grid.cells() {
            return Err(Error::LengthMismatch {
                expected: grid.cells(),
                actual: dphi.len(),
            });
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: "must be positive and finite",
            });
        }
        if let Some(index) = dphi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "dphi",
                index,
            });
        }
        Ok(Self {
            grid,
            dphi,
            length,
            time,
        })
    }

    /// The radially symmetric profile `phi = pi x`.
    pub fn sphere(grid: Grid, length: f64) -> Result<Self> {
        Self::new(grid, alloc::vec![PI; grid.cells()], length, 0.0)
    }

    /// Samples `dphi` at the cell centres.
    pub fn from_fn(grid: Grid, length: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.center_iter().map(f).collect(), length, 0.0)
    }

    /// `dphi = pi + sum_k a_k cos(k pi x)`, sampled at the cell centres.
    ///
    /// The midpoint sums of `cos(k pi y_j)` vanish for `1 <= k <= 2m+1`, so the
    /// sampled profile keeps `phi(1) = pi` up to rounding.
    pub fn with_cosine_modes(grid: Grid, length: f64, modes: &[(usize, f64)]) -> Result<Self> {
        Self::from_fn(grid, length, |y| {
            PI + modes
                .iter()
                .map(|&(k, a)| a * math::cos(k as f64 * PI * y))
                .sum::<f64>()
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dphi(&self) -> &[f64] {
        &self.dphi
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn set_length(&mut self, length: f64) {
        self.length = length;
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// `phi` at the nodes, `phi_0 = 0`.
    pub fn phi_nodes(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        let mut phi = Vec::with_capacity(self.grid.nodes());
        let mut acc = 0.0;
        phi.push(0.0);
        for &u in &self.dphi {
            acc += u * dx;
            phi.push(acc);
        }
        phi
    }

    /// `dphi` interpolated to the nodes; the poles take the adjacent cell value.
    pub fn dphi_nodes(&self) -> Vec<f64> {
        to_nodes(&self.dphi)
    }

    pub fn min_dphi(&self) -> f64 {
        self.dphi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_dphi(&self) -> f64 {
        self.dphi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fails if `dphi <= 0` somewhere: the angle no longer parametrizes the curve.
    pub fn check_parametrization(&self) -> Result<()> {
        match self.dphi.iter().position(|&v| !(v > 0.0)) {
            Some(cell) => Err(Error::ParametrizationLoss {
                cell,
                value: self.dphi[cell],
                time: self.time,
            }),
            None => Ok(()),
        }
    }

    /// `|Icos(1)| = |int_0^1 cos(phi)|`, the radial gap left at the second pole.
    pub fn closure_defect(&self) -> f64 {
        math::abs(*icos(self).last().unwrap())
    }

    /// Re-closes the profile by adding a multiple of `cos(pi x)` to `dphi`.
    ///
    /// `cos(pi x)` is the direction along which `Icos(1)` moves at first order
    /// around the sphere; a scalar Newton iteration on its amplitude removes the
    /// defect without touching `phi(1)`. Returns the amplitude that was added.
    pub fn close(&mut self) -> Result<f64> {
        let basis: Vec<f64> = self.grid.center_iter().map(|y| math::cos(PI * y)).collect();
        let base = self.dphi.clone();
        let defect_for = |profile: &mut WallProfile, amp: f64| {
            for ((v, b), c) in profile.dphi.iter_mut().zip(&base).zip(&basis) {
                *v = b + amp * c;
            }
            *icos(profile).last().unwrap()
        };
        let mut amp = 0.0;
        let mut f = defect_for(self, amp);
        for _ in 0..50 {
            if math::abs(f) < 1e-15 {
                break;
            }
            let h = 1e-7;
            let fp = defect_for(self, amp + h);
            let slope = (fp - f) / h;
            if slope == 0.0 || !slope.is_finite() {
                return Err(Error::Singular { row: 0 });
            }
            amp -= f / slope;
            f = defect_for(self, amp);
        }
        if math::abs(f) > CLOSURE_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "profile",
                reason: "could not close the profile",
            });
        }
        Ok(amp)
    }
}

/// Interpolates a cell field to the nodes (average of the two neighbours,
/// adjacent cell at the poles).
pub fn to_nodes(cells: &[f64]) -> Vec<f64> {
    let n = cells.len();
    let mut out = Vec::with_capacity(n + 1);
    out.push(cells[0]);
    for w in cells.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(cells[n - 1]);
    out
}

/// `Icos(x_i) = int_0^{x_i} cos(phi)` at every node.
pub fn icos(profile: &WallProfile) -> Vec<f64> {
    let phi = profile.phi_nodes();
    let dx = profile.grid.dx();
    let mut out = Vec::with_capacity(phi.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in phi.windows(2) {
        acc += math::int_cos_linear(w[0], w[1], dx);
        out.push(acc);
    }
    out
}

/// `Icos` at the cell centres.
pub fn icos_centers(profile: &WallProfile) -> Vec<f64> {
    let phi = profile.phi_nodes();
    let nodes = icos(profile);
    let half = 0.5 * profile.grid.dx();
    (0..profile.grid.cells())
        .map(|j| {
            let mid = 0.5 * (phi[j] + phi[j + 1]);
            nodes[j] + math::int_cos_linear(phi[j], mid, half)
        })
        .collect()
}

/// `int_0^{x_i} sin(phi)` at every node.
pub fn isin(profile: &WallProfile) -> Vec<f64> {
    let phi = profile.phi_nodes();
    let dx = profile.grid.dx();
    let mut out = Vec::with_capacity(phi.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in phi.windows(2) {
        acc += math::int_sin_linear(w[0], w[1], dx);
        out.push(acc);
    }
    out
}

/// `Icosin = Icos / sin(phi)` at node `i`; the poles return the limit `1/dphi`.
pub fn icosin(profile: &WallProfile, i: usize) -> Result<f64> {
    let nodes = profile.grid.nodes();
    if i >= nodes {
        return Err(Error::InvalidParameter {
            name: "node",
            reason: "index outside the grid",
        });
    }
    if i == 0 {
        return Ok(1.0 / profile.dphi[0]);
    }
    if i == nodes - 1 {
        return Ok(1.0 / profile.dphi[profile.dphi.len() - 1]);
    }
    let phi = profile.phi_nodes();
    let value = icos(profile)[i] / math::sin(phi[i]);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            what: "Icosin",
            index: i,
        })
    }
}

/// `Icosin` at every node, pole limits included.
pub fn icosin_nodes(profile: &WallProfile) -> Result<Vec<f64>> {
    let phi = profile.phi_nodes();
    let ic = icos(profile);
    let last = ic.len() - 1;
    let mut out = Vec::with_capacity(ic.len());
    for i in 0..=last {
        let v = if i == 0 {
            1.0 / profile.dphi[0]
        } else if i == last {
            1.0 / profile.dphi[last - 1]
        } else {
            ic[i] / math::sin(phi[i])
        };
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "Icosin",
                index: i,
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// `Icosin` at the cell centres.
pub fn icosin_centers(profile: &WallProfile) -> Result<Vec<f64>> {
    let phi = profile.phi_nodes();
    let ic = icos_centers(profile);
    ic.iter()
        .enumerate()
        .map(|(j, &c)| {
            let v = c / math::sin(0.5 * (phi[j] + phi[j + 1]));
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite {
                    what: "Icosin",
                    index: j,
                })
            }
        })
        .collect()
}

/// Principal curvatures at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvatures {
    pub kappa_s: Vec<f64>,
    pub kappa_theta: Vec<f64>,
}

impl Curvatures {
    pub fn gaussian(&self) -> Vec<f64> {
        self.kappa_s
            .iter()
            .zip(&self.kappa_theta)
            .map(|(a, b)| a * b)
            .collect()
    }
}

/// `kappa_s = dphi / L` and `kappa_theta = sin(phi) / (L Icos)`, with
/// `kappa_theta = kappa_s` at the poles.
pub fn curvatures(profile: &WallProfile) -> Curvatures {
    let l = profile.length;
    let phi = profile.phi_nodes();
    let ic = icos(profile);
    let kappa_s: Vec<f64> = profile.dphi_nodes().iter().map(|u| u / l).collect();
    let last = phi.len() - 1;
    let kappa_theta = (0..=last)
        .map(|i| {
            if i == 0 || i == last {
                kappa_s[i]
            } else {
                math::sin(phi[i]) / (l * ic[i])
            }
        })
        .collect();
    Curvatures {
        kappa_s,
        kappa_theta,
    }
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// `int K dA` over the revolved surface, with `K = kappa_s kappa_theta` and
/// `dA = 2 pi r L dx`, integrated by 5-point Gauss–Legendre on every cell of the
/// piecewise linear reconstruction.
pub fn gaussian_curvature_integral(profile: &WallProfile) -> f64 {
    let l = profile.length;
    let dx = profile.grid.dx();
    let phi = profile.phi_nodes();
    let ic = icos(profile);
    let mut total = 0.0;
    for (j, &u) in profile.dphi.iter().enumerate() {
        let kappa_s = u / l;
        let mut cell = 0.0;
        for (xi, w) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
            let h = 0.5 * dx * (1.0 + xi);
            let p = phi[j] + u * h;
            let icos_here = ic[j] + math::int_cos_linear(phi[j], p, h);
            let r = l * icos_here;
            let kappa_theta = math::sin(p) / r;
            cell += w * kappa_s * kappa_theta * 2.0 * PI * r * l;
        }
        total += 0.5 * dx * cell;
    }
    total
}

/// Points `(r, z)` of the generatrix at the nodes: `r = L Icos`, `z = L int sin(phi)`.
pub fn generatrix(profile: &WallProfile) -> Vec<(f64, f64)> {
    let l = profile.length;
    icos(profile)
        .into_iter()
        .zip(isin(profile))
        .map(|(c, s)| (l * c, l * s))
        .collect()
}

/// Triangulated surface of revolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    /// Generatrix points `(r, z)` from pole to pole.
    pub rings: Vec<(f64, f64)>,
    /// Turning angle `dphi dx` of the generatrix across each cell.
    pub turning: Vec<f64>,
    pub azimuthal_res: usize,
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based triangle indices.
    pub faces: Vec<[usize; 3]>,
    pub closure_defect: f64,
    /// Set when `closure_defect` exceeds [`CLOSURE_TOLERANCE`].
    pub closure_warning: bool,
}

impl SurfaceMesh {
    /// Polygonal (chord) length of the generatrix.
    pub fn chord_length(&self) -> f64 {
        self.chords().sum()
    }

    /// Arclength of the generatrix. Between two rings the generatrix is a
    /// circular arc turning by `turning[j]`, so each chord is lengthened by
    /// `(theta/2) / sin(theta/2)`.
    pub fn generatrix_length(&self) -> f64 {
        self.chords()
            .zip(&self.turning)
            .map(|(c, &theta)| c / math::sinc(0.5 * theta))
            .sum()
    }

    fn chords(&self) -> impl Iterator<Item = f64> + '_ {
        self.rings.windows(2).map(|w| {
            let dr = w[1].0 - w[0].0;
            let dz = w[1].1 - w[0].1;
            math::sqrt(dr * dr + dz * dz)
        })
    }
}

/// Revolves the generatrix around the z-axis. The poles become single vertices.
pub fn reconstruct(profile: &WallProfile, azimuthal_res: usize) -> Result<SurfaceMesh> {
    if azimuthal_res < 3 {
        return Err(Error::InvalidParameter {
            name: "azimuthal_res",
            reason: "need at least 3 segments",
        });
    }
    let rings = generatrix(profile);
    let n = rings.len();
    let closure_defect = math::abs(rings[n - 1].0) / profile.length;
    let mut vertices = Vec::with_capacity(2 + (n - 2) * azimuthal_res);
    vertices.push([0.0, 0.0, rings[0].1]);
    for &(r, z) in &rings[1..n - 1] {
        for a in 0..azimuthal_res {
            let theta = 2.0 * PI * a as f64 / azimuthal_res as f64;
            vertices.push([r * math::cos(theta), r * math::sin(theta), z]);
        }
    }
    vertices.push([0.0, 0.0, rings[n - 1].1]);

    let ring_start = |i: usize| 1 + (i - 1) * azimuthal_res;
    let mut faces = Vec::new();
    for a in 0..azimuthal_res {
        let b = (a + 1) % azimuthal_res;
        faces.push([0, ring_start(1) + b, ring_start(1) + a]);
    }
    for i in 1..n - 2 {
        let (s0, s1) = (ring_start(i), ring_start(i + 1));
        for a in 0..azimuthal_res {
            let b = (a + 1) % azimuthal_res;
            faces.push([s0 + a, s0 + b, s1 + b]);
            faces.push([s0 + a, s1 + b, s1 + a]);
        }
    }
    let last_vertex = vertices.len() - 1;
    let s = ring_start(n - 2);
    for a in 0..azimuthal_res {
        let b = (a + 1) % azimuthal_res;
        faces.push([s + a, s + b, last_vertex]);
    }
    Ok(SurfaceMesh {
        rings,
        turning: profile.dphi.iter().map(|u| u * profile.grid.dx()).collect(),
        azimuthal_res,
        vertices,
        faces,
        closure_defect,
        closure_warning: closure_defect > CLOSURE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sphere(m: usize) -> WallProfile {
        WallProfile::sphere(Grid::new(m).unwrap(), 2.0).unwrap()
    }

    /// A closed, non-symmetric perturbation of the sphere.
    fn perturbed(m: usize) -> WallProfile {
        let mut p = WallProfile::with_cosine_modes(
            Grid::new(m).unwrap(),
            1.7,
            &[(2, 0.3), (3, -0.2), (5, 0.1)],
        )
        .unwrap();
        p.close().unwrap();
        p
    }

    /// Adaptive Simpson quadrature, independent of the cell-wise antiderivatives.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let c = 0.5 * (a + b);
            let left = simpson(f, a, c);
            let right = simpson(f, c, b);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, c, left, 0.5 * tol, depth - 1) + rec(f, c, b, right, 0.5 * tol, depth - 1)
            }
        }
        rec(f, a, b, simpson(f, a, b), tol, 40)
    }

    fn phi_at(profile: &WallProfile, x: f64) -> f64 {
        let dx = profile.grid().dx();
        let phi = profile.phi_nodes();
        let j = ((x / dx) as usize).min(profile.grid().cells() - 1);
        phi[j] + profile.dphi()[j] * (x - j as f64 * dx)
    }

    #[test]
    fn sphere_icos_matches_sine() {
        let p = sphere(99);
        let ic = icos(&p);
        assert_abs_diff_eq!(ic[50], 1.0 / PI, epsilon = 1e-14);
        assert_abs_diff_eq!(*ic.last().unwrap(), 0.0, epsilon = 1e-14);
        assert!(p.closure_defect() < 1e-14);
    }

    #[test]
    fn icos_matches_quadrature_oracle() {
        let p = perturbed(64);
        let ic = icos(&p);
        let f = |x: f64| phi_at(&p, x).cos();
        let g = p.grid();
        for i in [1, 7, 20, 33, 50, 64, 65] {
            // integrate cell by cell so the kinks of phi fall on panel boundaries
            let mut oracle = 0.0;
            for j in 0..i {
                oracle += adaptive_simpson(&f, g.node(j), g.node(j + 1), 1e-14);
            }
            assert_abs_diff_eq!(ic[i], oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn icosin_on_sphere_and_poles() {
        let p = sphere(99);
        assert_abs_diff_eq!(icosin(&p, 50).unwrap(), 1.0 / PI, epsilon = 1e-14);
        assert_abs_diff_eq!(icosin(&p, 0).unwrap(), 1.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(icosin(&p, 100).unwrap(), 1.0 / PI, epsilon = 1e-15);
        assert!(icosin(&p, 101).is_err());
    }

    #[test]
    fn icosin_perturbed_is_ratio_of_oracles() {
        let p = perturbed(64);
        let g = p.grid();
        let f = |x: f64| phi_at(&p, x).cos();
        for i in [5, 31, 60] {
            let mut num = 0.0;
            for j in 0..i {
                num += adaptive_simpson(&f, g.node(j), g.node(j + 1), 1e-14);
            }
            let oracle = num / phi_at(&p, g.node(i)).sin();
            assert_abs_diff_eq!(icosin(&p, i).unwrap(), oracle, epsilon = 1e-9);
        }
    }

    #[test]
    fn icosin_flags_vanishing_sine() {
        // phi climbs to pi/3, stalls, then jumps to pi at node 6 while Icos stays positive
        let g = Grid::new(9).unwrap();
        let dx = g.dx();
        let mut dphi = alloc::vec![1e-300; 10];
        dphi[0] = PI / 3.0 / dx;
        dphi[5] = 2.0 * PI / 3.0 / dx;
        let p = WallProfile::new(g, dphi, 1.0, 0.0).unwrap();
        assert!(icos(&p)[6] > 0.1 * dx);
        let r = icosin(&p, 6);
        assert!(matches!(r, Err(Error::NonFinite { .. })) || r.unwrap().abs() > 1e12);
    }

    #[test]
    fn sphere_curvatures() {
        let l = 2.0;
        let c = curvatures(&sphere(99));
        for (ks, kt) in c.kappa_s.iter().zip(&c.kappa_theta) {
            assert_abs_diff_eq!(*ks, PI / l, epsilon = 1e-13);
            assert_abs_diff_eq!(*kt, PI / l, epsilon = 1e-12);
        }
        for k in c.gaussian() {
            assert_abs_diff_eq!(k, PI * PI / (l * l), epsilon = 1e-11);
        }
    }

    /// Curvature of the reconstructed (r, z) curve by finite differences on a
    /// 10x finer sampling of the same piecewise linear phi.
    #[test]
    fn curvatures_match_differential_geometry_oracle() {
        let p = perturbed(100);
        let c = curvatures(&p);
        let l = p.length();
        let g = p.grid();
        let fine = 10 * (g.m() + 1);
        let h = 1.0 / fine as f64;
        // r(x), z(x) by cumulative exact integration on the fine grid
        let mut r = alloc::vec![0.0; fine + 1];
        let mut z = alloc::vec![0.0; fine + 1];
        for i in 0..fine {
            let (a, b) = (phi_at(&p, i as f64 * h), phi_at(&p, (i + 1) as f64 * h));
            r[i + 1] = r[i] + l * crate::math::int_cos_linear(a, b, h);
            z[i + 1] = z[i] + l * crate::math::int_sin_linear(a, b, h);
        }
        // compare at interior nodes away from the poles, where the oracle's
        // central differences straddle a kink of phi
        for i in (10..=90).step_by(10) {
            let k = 10 * i;
            let (r1, r0, r2) = (r[k], r[k - 10], r[k + 10]);
            let (z1, z0, z2) = (z[k], z[k - 10], z[k + 10]);
            let hh = 10.0 * h;
            let (rp, zp) = ((r2 - r0) / (2.0 * hh), (z2 - z0) / (2.0 * hh));
            let (rpp, zpp) = (
                (r2 - 2.0 * r1 + r0) / (hh * hh),
                (z2 - 2.0 * z1 + z0) / (hh * hh),
            );
            let speed = (rp * rp + zp * zp).sqrt();
            let kappa_s = (rp * zpp - zp * rpp) / speed.powi(3);
            // first derivatives on the fine step for the circumferential curvature
            let (rq, zq) = (
                (r[k + 1] - r[k - 1]) / (2.0 * h),
                (z[k + 1] - z[k - 1]) / (2.0 * h),
            );
            let kappa_theta = zq / ((rq * rq + zq * zq).sqrt() * r1);
            assert_abs_diff_eq!(c.kappa_s[i], kappa_s, epsilon = 2e-3);
            assert_abs_diff_eq!(c.kappa_theta[i], kappa_theta, epsilon = 1e-4);
        }
    }

    #[test]
    fn pole_curvature_gap_closes_first_order() {
        let gap = |m: usize| {
            let p = perturbed(m);
            let c = curvatures(&p);
            (c.kappa_theta[1] - c.kappa_s[1]).abs()
        };
        let (g1, g2) = (gap(100), gap(400));
        assert!(g2 < g1);
        assert!(g2 < 0.1);
    }

    #[test]
    fn gauss_bonnet_on_closed_profiles() {
        for m in [50, 400] {
            let v = gaussian_curvature_integral(&perturbed(m));
            assert_abs_diff_eq!(v, 4.0 * PI, epsilon = 1e-6);
        }
    }

    #[test]
    fn sphere_reconstruction_is_unit_sphere() {
        let p = WallProfile::sphere(Grid::new(200).unwrap(), PI).unwrap();
        let mesh = reconstruct(&p, 16).unwrap();
        let zc = 0.5 * (mesh.rings[0].1 + mesh.rings.last().unwrap().1);
        let worst = mesh
            .rings
            .iter()
            .map(|&(r, z)| ((r * r + (z - zc) * (z - zc)).sqrt() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        assert!(mesh.rings.last().unwrap().0.abs() < 1e-12);
        assert!(!mesh.closure_warning);
        assert_eq!(mesh.vertices.len(), 2 + 200 * 16);
        assert_eq!(mesh.faces.len(), 2 * 16 + 2 * 16 * 199);
    }

    #[test]
    fn mesh_generatrix_has_length_l() {
        let p = perturbed(300);
        let mesh = reconstruct(&p, 8).unwrap();
        assert_abs_diff_eq!(mesh.generatrix_length(), p.length(), epsilon = 1e-10);
        // chords cut corners by O(dx^2) overall
        let gap = p.length() - mesh.chord_length();
        assert!(gap > 0.0 && gap < 1e-4, "{gap}");
    }

    #[test]
    fn open_profile_raises_mesh_warning() {
        let p = WallProfile::with_cosine_modes(Grid::new(50).unwrap(), 1.0, &[(1, 0.3)]).unwrap();
        let mesh = reconstruct(&p, 4).unwrap();
        assert!(mesh.closure_warning);
    }

    #[test]
    fn close_removes_the_defect() {
        let mut p =
            WallProfile::with_cosine_modes(Grid::new(80).unwrap(), 1.0, &[(1, 0.2), (4, 0.1)])
                .unwrap();
        assert!(p.closure_defect() > 1e-3);
        p.close().unwrap();
        assert!(p.closure_defect() < 1e-14);
        assert_abs_diff_eq!(*p.phi_nodes().last().unwrap(), PI, epsilon = 1e-12);
    }
}
