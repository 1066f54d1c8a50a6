//! Quasi-stationary growth-material density on the wall.
//!
//! Both the 2D and the 3D equations are written in weighted divergence form
//!
//! ```text
//! -(sigma / pi^2) (1/w) d/dx (w dmu/dx) + mu = rhs,     w dmu/dx = 0 at x = 0, 1
//! ```
//!
//! with `w = 1` in 2D and `w = Icos` in 3D, and discretized by finite volumes on
//! the cells. Multiplying each row by its mass weight gives a symmetric
//! positive definite tridiagonal matrix.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{self, WallProfile};
use crate::grid::Grid;
use crate::math::{self, PI};
use crate::tridiag;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthField {
    pub grid: Grid,
    /// Nondimensional density on the cells.
    pub mu: Vec<f64>,
    pub sigma: f64,
}

/// Discrete `-(sigma/pi^2) (1/w) (w mu')' + mu` on a grid.
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    grid: Grid,
    sigma: f64,
    /// `w` at the nodes; entries 0 and m+1 are never used (zero flux).
    flux_weights: Vec<f64>,
    /// `w` at the cell centres.
    mass_weights: Vec<f64>,
}

impl EllipticOperator {
    /// The 2D operator, `w = 1`.
    pub fn planar(grid: Grid, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self {
            grid,
            sigma,
            flux_weights: alloc::vec![1.0; grid.nodes()],
            mass_weights: alloc::vec![1.0; grid.cells()],
        })
    }

    /// The 3D (Laplace–Beltrami) operator, `w = Icos` of the profile.
    pub fn axisymmetric(profile: &WallProfile, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        let grid = *profile.grid();
        let flux_weights = geometry::icos(profile);
        for (i, &w) in flux_weights
            .iter()
            .enumerate()
            .take(grid.nodes() - 1)
            .skip(1)
        {
            if !(w > 0.0) {
                return Err(Error::InvalidProfile { node: i, value: w });
            }
        }
        let mass_weights = geometry::icos_centers(profile);
        if let Some(j) = mass_weights.iter().position(|&w| !(w > 0.0)) {
            return Err(Error::InvalidProfile {
                node: j,
                value: mass_weights[j],
            });
        }
        Ok(Self {
            grid,
            sigma,
            flux_weights,
            mass_weights,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass_weights(&self) -> &[f64] {
        &self.mass_weights
    }

    fn coupling(&self, i: usize) -> f64 {
        // node i couples cells i-1 and i
        if i == 0 || i == self.grid.nodes() - 1 {
            0.0
        } else {
            let dx = self.grid.dx();
            self.sigma / (PI * PI * dx * dx) * self.flux_weights[i]
        }
    }

    /// Applies the operator (divided by the mass weight) to a cell field.
    pub fn apply(&self, mu: &[f64]) -> Vec<f64> {
        let n = self.grid.cells();
        (0..n)
            .map(|j| {
                let left = self.coupling(j) * (mu[j] - if j > 0 { mu[j - 1] } else { mu[j] });
                let right =
                    self.coupling(j + 1) * (if j + 1 < n { mu[j + 1] } else { mu[j] } - mu[j]);
                mu[j] + (left - right) / self.mass_weights[j]
            })
            .collect()
    }

    /// Discrete fluxes `w dmu/dx` at the nodes; both ends are zero by construction.
    pub fn fluxes(&self, mu: &[f64]) -> Vec<f64> {
        let dx = self.grid.dx();
        let last = self.grid.nodes() - 1;
        (0..=last)
            .map(|i| {
                if i == 0 || i == last {
                    0.0
                } else {
                    self.flux_weights[i] * (mu[i] - mu[i - 1]) / dx
                }
            })
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.cells();
        if rhs.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: rhs.len(),
            });
        }
        let mut lower = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for j in 0..n {
            let (cl, cr) = (self.coupling(j), self.coupling(j + 1));
            lower.push(-cl);
            diag.push(self.mass_weights[j] + cl + cr);
            upper.push(-cr);
            b.push(self.mass_weights[j] * rhs[j]);
        }
        tridiag::solve(&lower, &diag, &upper, &b)
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "sigma",
            reason: "must be positive",
        })
    }
}

/// Curvature source of the 2D equation, `dphi / pi`.
pub fn source_2d(profile: &WallProfile) -> Vec<f64> {
    profile.dphi().iter().map(|u| u / PI).collect()
}

/// Curvature source of the 3D equation, `dphi sin(phi) / (pi^2 Icos)` at the cells
/// (the nondimensional Gaussian curvature).
pub fn source_3d(profile: &WallProfile) -> Vec<f64> {
    let phi = profile.phi_nodes();
    let ic = geometry::icos_centers(profile);
    profile
        .dphi()
        .iter()
        .enumerate()
        .map(|(j, &u)| u * math::sin(0.5 * (phi[j] + phi[j + 1])) / (PI * PI * ic[j]))
        .collect()
}

/// Solves `-(sigma/pi^2) mu'' + mu = dphi / pi` with zero-flux ends.
pub fn solve_mu_2d(profile: &WallProfile, sigma: f64) -> Result<GrowthField> {
    let op = EllipticOperator::planar(*profile.grid(), sigma)?;
    let mu = op.solve(&source_2d(profile))?;
    Ok(GrowthField {
        grid: *profile.grid(),
        mu,
        sigma,
    })
}

/// Solves the Laplace–Beltrami problem
/// `-(sigma/pi^2) (mu'' + cos(phi)/Icos mu') + mu = dphi sin(phi) / (pi^2 Icos)`.
pub fn solve_mu_3d(profile: &WallProfile, sigma: f64) -> Result<GrowthField> {
    let op = EllipticOperator::axisymmetric(profile, sigma)?;
    let mu = op.solve(&source_3d(profile))?;
    Ok(GrowthField {
        grid: *profile.grid(),
        mu,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(m: usize) -> Grid {
        Grid::new(m).unwrap()
    }

    fn cosine_coefficient(field: &[f64], k: usize, g: &Grid) -> f64 {
        let dx = g.dx();
        2.0 * field
            .iter()
            .zip(g.center_iter())
            .map(|(f, y)| f * (k as f64 * PI * y).cos())
            .sum::<f64>()
            * dx
    }

    #[test]
    fn circle_gives_unit_density() {
        let p = WallProfile::sphere(grid(120), 1.0).unwrap();
        for sigma in [1e-3, 0.05, 1.0, 30.0] {
            let f = solve_mu_2d(&p, sigma).unwrap();
            for v in &f.mu {
                assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_gives_unit_density() {
        let p = WallProfile::sphere(grid(200), 1.0).unwrap();
        for v in source_3d(&p) {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
        let f = solve_mu_3d(&p, 0.05).unwrap();
        for v in &f.mu {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn planar_mode_response() {
        let (eps, sigma) = (1e-3, 0.07);
        for k in 1..=4 {
            let g = grid(400);
            let p = WallProfile::with_cosine_modes(g, 1.0, &[(k, eps * PI)]).unwrap();
            let f = solve_mu_2d(&p, sigma).unwrap();
            for (j, y) in g.center_iter().enumerate().step_by(37) {
                let expected =
                    1.0 + eps * (k as f64 * PI * y).cos() / (1.0 + sigma * (k * k) as f64);
                assert_abs_diff_eq!(f.mu[j], expected, epsilon = 1e-7);
            }
        }
    }

    /// Dense Gaussian elimination on the matrix assembled from the stencil
    /// definition, independent of the tridiagonal path.
    fn dense_oracle(
        sigma: f64,
        w_nodes: &[f64],
        w_cells: &[f64],
        rhs: &[f64],
        dx: f64,
    ) -> Vec<f64> {
        let n = rhs.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        let c = sigma / (PI * PI * dx * dx);
        for j in 0..n {
            a[j][j] = 1.0;
            if j > 0 {
                let k = c * w_nodes[j] / w_cells[j];
                a[j][j] += k;
                a[j][j - 1] -= k;
            }
            if j + 1 < n {
                let k = c * w_nodes[j + 1] / w_cells[j];
                a[j][j] += k;
                a[j][j + 1] -= k;
            }
            a[j][n] = rhs[j];
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
            x[row] = (a[row][n] - s) / a[row][row];
        }
        x
    }

    #[test]
    fn matches_dense_solve() {
        let g = grid(63);
        let rhs: Vec<f64> = (0..g.cells())
            .map(|j| 1.0 + 0.5 * ((j * 7919 % 97) as f64 / 97.0 - 0.5))
            .collect();
        let op = EllipticOperator::planar(g, 0.3).unwrap();
        let x = op.solve(&rhs).unwrap();
        let oracle = dense_oracle(
            0.3,
            &vec![1.0; g.nodes()],
            &vec![1.0; g.cells()],
            &rhs,
            g.dx(),
        );
        for (a, b) in x.iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }

        let p = WallProfile::with_cosine_modes(g, 1.0, &[(2, 0.2), (3, 0.1)]).unwrap();
        let op = EllipticOperator::axisymmetric(&p, 0.1).unwrap();
        let x = op.solve(&rhs).unwrap();
        let oracle = dense_oracle(
            0.1,
            &geometry::icos(&p),
            &geometry::icos_centers(&p),
            &rhs,
            g.dx(),
        );
        for (a, b) in x.iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    /// Manufactured solution `mu* = 1 + cos(2 pi x)` on the sphere; its source is
    /// `1 + 2 sigma + (1 + 6 sigma) cos(2 pi x)`.
    fn mms_error(m: usize, sigma: f64) -> f64 {
        let g = grid(m);
        let p = WallProfile::sphere(g, 1.0).unwrap();
        let op = EllipticOperator::axisymmetric(&p, sigma).unwrap();
        let rhs: Vec<f64> = g
            .center_iter()
            .map(|y| 1.0 + 2.0 * sigma + (1.0 + 6.0 * sigma) * (2.0 * PI * y).cos())
            .collect();
        let mu = op.solve(&rhs).unwrap();
        let sq: f64 = mu
            .iter()
            .zip(g.center_iter())
            .map(|(v, y)| (v - 1.0 - (2.0 * PI * y).cos()).powi(2))
            .sum();
        (sq * g.dx()).sqrt()
    }

    #[test]
    fn manufactured_solution_converges_second_order() {
        let (e1, e2) = (mms_error(100, 0.2), mms_error(400, 0.2));
        let order = (e1 / e2).ln() / (401.0f64 / 101.0).ln();
        assert!(order >= 1.9, "order {order} ({e1:e} -> {e2:e})");
    }

    #[test]
    fn weighted_mass_is_conserved() {
        let p = WallProfile::with_cosine_modes(grid(150), 1.0, &[(2, 0.3), (5, -0.2)]).unwrap();
        let op = EllipticOperator::axisymmetric(&p, 0.05).unwrap();
        let rhs = source_3d(&p);
        let mu = op.solve(&rhs).unwrap();
        let w = op.mass_weights();
        let lhs: f64 = mu.iter().zip(w).map(|(a, b)| a * b).sum();
        let rhs_mass: f64 = rhs.iter().zip(w).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(lhs, rhs_mass, epsilon = 1e-11 * rhs_mass.abs());
        let fl = op.fluxes(&mu);
        assert_eq!(fl[0] + fl[fl.len() - 1], 0.0);
    }

    #[test]
    fn planar_maximum_principle() {
        let p = WallProfile::with_cosine_modes(grid(90), 1.0, &[(1, 0.4), (4, 0.8), (9, -0.3)])
            .unwrap();
        let rhs = source_2d(&p);
        let (lo, hi) = rhs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        for sigma in [1e-3, 0.1, 10.0] {
            let f = solve_mu_2d(&p, sigma).unwrap();
            for v in &f.mu {
                assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
                assert!(*v > 0.0);
            }
        }
    }

    /// First-order response of the 3D density to a single cosine mode of dphi:
    /// `c_k = (k + 1) a_k / (pi (k - sigma k^2 + sigma k^3))` for `k >= 2`.
    #[test]
    fn axisymmetric_mode_response() {
        let sigma = 0.05;
        for k in [2usize, 3, 4, 6] {
            let g = grid(400);
            let eps = 1e-5;
            let mut p = WallProfile::with_cosine_modes(g, 1.0, &[(k, eps)]).unwrap();
            p.close().unwrap();
            let f = solve_mu_3d(&p, sigma).unwrap();
            let dev: Vec<f64> = f.mu.iter().map(|v| v - 1.0).collect();
            let measured = cosine_coefficient(&dev, k, &g) / eps;
            // dphi mode k drives density mode k through t1(k + 1) / s1(k + 1)
            let j = k as f64 + 1.0;
            let expected = (j + 1.0) / (PI * (j - sigma * j * j + sigma * j.powi(3)));
            assert!(
                (measured - expected).abs() < 2e-3 * expected.abs(),
                "k={k}: {measured} vs {expected}"
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = WallProfile::sphere(grid(10), 1.0).unwrap();
        assert!(solve_mu_2d(&p, 0.0).is_err());
        assert!(solve_mu_3d(&p, -1.0).is_err());
        // profile that folds back: Icos turns negative inside
        let bad = WallProfile::from_fn(grid(40), 1.0, |y| {
            if y < 0.5 {
                3.0 * PI / 2.0
            } else {
                PI / 2.0
            }
        })
        .unwrap();
        assert!(matches!(
            solve_mu_3d(&bad, 0.1),
            Err(Error::InvalidProfile { .. })
        ));
    }
}
