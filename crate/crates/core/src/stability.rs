//! Linear stability of the radially symmetric shape.
//!
//! Around the circle (2D) or sphere (3D), the cosine mode `k` of `dphi` evolves
//! at the rate `lambda_k = P L F * N(k) / D(k)` with `D > 0`, so its sign is
//! that of the quartic dispersion polynomial `N`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{self, PI};
use crate::mechanics::Dim;
use crate::poly;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPolynomial {
    pub dim: Dim,
    pub sigma: f64,
    pub d: f64,
    /// Ignored in 2D.
    pub nu: f64,
    /// Ascending coefficients of `N(k)`; `n[1] = n[3] = 0` in 2D.
    pub n: [f64; 5],
}

/// `N(k) = (1 - d) + (sigma - 2 + d) k^2 - 2 sigma k^4`.
pub fn dispersion_2d(sigma: f64, d: f64) -> StabilityPolynomial {
    StabilityPolynomial {
        dim: Dim::Two,
        sigma,
        d,
        nu: 0.0,
        n: [1.0 - d, 0.0, sigma - 2.0 + d, 0.0, -2.0 * sigma],
    }
}

pub fn dispersion_3d(sigma: f64, d: f64, nu: f64) -> StabilityPolynomial {
    let a = 1.0 - nu;
    StabilityPolynomial {
        dim: Dim::Three,
        sigma,
        d,
        nu,
        n: [
            a * (1.0 - 2.0 * d),
            -a * (sigma + d) + 1.0,
            -nu * sigma - 1.0 + a * d,
            2.0 * sigma,
            -sigma,
        ],
    }
}

pub fn dispersion(dim: Dim, sigma: f64, d: f64, nu: f64) -> StabilityPolynomial {
    match dim {
        Dim::Two => dispersion_2d(sigma, d),
        Dim::Three => dispersion_3d(sigma, d, nu),
    }
}

impl StabilityPolynomial {
    /// Smallest mode the theory speaks about.
    pub fn first_mode(&self) -> usize {
        match self.dim {
            Dim::Two => 1,
            Dim::Three => 2,
        }
    }

    /// Cosine index of `dphi` that carries mode `k`. In 3D the modal
    /// coefficients are offset by one: mode `k` lives on `cos((k - 1) pi x)`.
    pub fn fourier_index(&self, k: usize) -> usize {
        match self.dim {
            Dim::Two => k,
            Dim::Three => k - 1,
        }
    }

    pub fn numerator(&self, k: f64) -> f64 {
        poly::eval(&self.n, k)
    }

    pub fn denominator(&self, k: f64) -> f64 {
        let s = self.sigma;
        match self.dim {
            Dim::Two => PI * (1.0 + s * k * k),
            Dim::Three => PI * (s * k * k - s * k + 1.0),
        }
    }

    /// `(G1, G2)` of the nested-radical root formulas.
    pub fn g(&self) -> (f64, f64) {
        let (s, d, nu) = (self.sigma, self.d, self.nu);
        match self.dim {
            Dim::Two => {
                let g1 = 1.0 + (d - 2.0) / s;
                let g2 = 1.0 + 2.0 * (2.0 - 3.0 * d) / s + (d - 2.0) * (d - 2.0) / (s * s);
                (g1, g2)
            }
            Dim::Three => {
                let a = 1.0 - nu;
                let b = a * d - 1.0;
                let g1 = 3.0 - 2.0 * nu + 2.0 * b / s;
                let g2 = a * a - 2.0 * a * ((3.0 + nu) * d - 1.0) / s + b * b / (s * s);
                (g1, g2)
            }
        }
    }

    /// The four zeros of `N` from the closed-form formulas:
    /// 2D `+-(1/2) sqrt(G1 +- sqrt(G2))`, 3D `1/2 +- (1/2) sqrt(G1 +- 2 sqrt(G2))`.
    pub fn roots(&self) -> [Complex64; 4] {
        let (g1, g2) = self.g();
        let sg2 = Complex64::new(g2, 0.0).sqrt();
        let g1 = Complex64::new(g1, 0.0);
        let half = Complex64::new(0.5, 0.0);
        match self.dim {
            Dim::Two => {
                let a = (g1 + sg2).sqrt() * half;
                let b = (g1 - sg2).sqrt() * half;
                [a, -a, b, -b]
            }
            Dim::Three => {
                let a = (g1 + sg2 * 2.0).sqrt() * half;
                let b = (g1 - sg2 * 2.0).sqrt() * half;
                [half + a, half - a, half + b, half - b]
            }
        }
    }

    /// Zeros of `N` from the companion-matrix eigenvalues.
    pub fn roots_by_eigenvalues(&self) -> Result<Vec<Complex64>> {
        poly::roots(&self.n)
    }

    /// Real zeros of `N` in decreasing order. A root counts as real when its
    /// imaginary part is below `1e-9 max(1, |root|)`.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .roots()
            .iter()
            .filter(|z| math::abs(z.im) <= 1e-9 * z.norm().max(1.0))
            .map(|z| z.re)
            .collect();
        out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
        out
    }

    /// Width of the largest positive-`N` interval, `k1 - k2`, or 0 when `N`
    /// has fewer than two real zeros.
    pub fn root_gap(&self) -> f64 {
        let r = self.real_roots();
        if r.len() < 2 {
            0.0
        } else {
            r[0] - r[1]
        }
    }

    /// Integer modes `k >= first_mode()` with `N(k) > 0`, ascending.
    pub fn unstable_modes(&self) -> Vec<usize> {
        let top = self.real_roots().first().copied().unwrap_or(0.0);
        let kmax = if top.is_finite() && top > 0.0 {
            math::floor(top) as usize + 1
        } else {
            0
        };
        (self.first_mode()..=kmax.max(self.first_mode()))
            .filter(|&k| self.numerator(k as f64) > 0.0)
            .collect()
    }

    pub fn is_stable(&self) -> bool {
        self.unstable_modes().is_empty()
    }

    /// `N(k) / D(k)`.
    pub fn reduced_rate(&self, k: usize) -> f64 {
        let k = k as f64;
        self.numerator(k) / self.denominator(k)
    }

    /// `prefactor * N(k) / D(k)`, the prefactor being `P L F(mu^c)`.
    pub fn lambda(&self, k: usize, prefactor: f64) -> f64 {
        prefactor * self.reduced_rate(k)
    }
}

pub fn lambda_k(dim: Dim, sigma: f64, d: f64, nu: f64, k: usize, prefactor: f64) -> f64 {
    dispersion(dim, sigma, d, nu).lambda(k, prefactor)
}

/// Smallest `d` allowing any real instability: `2 + 3 sigma` in 2D
/// (`G1 >= 4`) and `(1 + (3 + nu) sigma) / (1 - nu)` in 3D (`G1 >= 9`).
pub fn necessary_condition(dim: Dim, sigma: f64, nu: f64) -> f64 {
    match dim {
        Dim::Two => 2.0 + 3.0 * sigma,
        Dim::Three => (1.0 + (3.0 + nu) * sigma) / (1.0 - nu),
    }
}

/// Left and right side of the elimination identity behind the necessary
/// condition: 2D `G2 - (4 - G1)^2 = -8 (1 + 1/sigma)`, 3D
/// `4 G2 - (9 - G1)^2 = -16 (1 + nu)(2 + 1/sigma)`.
pub fn elimination_identity(p: &StabilityPolynomial) -> (f64, f64) {
    let (g1, g2) = p.g();
    let s = p.sigma;
    match p.dim {
        Dim::Two => (g2 - (4.0 - g1) * (4.0 - g1), -8.0 * (1.0 + 1.0 / s)),
        Dim::Three => (
            4.0 * g2 - (9.0 - g1) * (9.0 - g1),
            -16.0 * (1.0 + p.nu) * (2.0 + 1.0 / s),
        ),
    }
}

/// Upper-triangular matrix with nonzeros at `(k, k)` and `(k, k + 2)` only,
/// indexed by modes `2..2 + size`.
#[derive(Debug, Clone)]
struct Banded {
    diag: Vec<f64>,
    super2: Vec<f64>,
}

impl Banded {
    fn build(size: usize, f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> Self {
        let ks = (0..size).map(|i| (i + 2) as f64);
        Self {
            diag: ks.clone().map(&f1).collect(),
            super2: ks.map(&f2).collect(),
        }
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.diag.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i + 2 < n {
                a[i][i + 2] = self.super2[i];
            }
        }
        a
    }
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in i..n {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in k..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// Solves `U X = B` for upper-triangular `U` by back substitution.
fn upper_solve(u: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = u.len();
    let mut x = vec![vec![0.0; n]; n];
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = b[i][col];
            for k in i + 1..n {
                s -= u[i][k] * x[k][col];
            }
            if u[i][i] == 0.0 {
                return Err(Error::Singular { row: i });
            }
            x[i][col] = s / u[i][i];
        }
    }
    Ok(x)
}

/// The reduced mode-coupling matrix `M1^-1 M2 + d M1^-1 M3 N1^-1 N2`,
/// truncated to modes `2..2 + size`, built from the banded factors by dense
/// triangular solves.
pub fn mode_matrix_3d(sigma: f64, d: f64, nu: f64, size: usize) -> Result<Vec<Vec<f64>>> {
    if size < 1 {
        return Err(Error::InvalidParameter {
            name: "size",
            reason: "must be at least 1",
        });
    }
    let a = 1.0 - nu;
    let m1 = Banded::build(size, |k| PI * (2.0 + k), |k| PI * (2.0 - k)).to_dense();
    let m2 = Banded::build(
        size,
        |k| -k * k * k - k * k + (3.0 - nu) * k + 2.0 * a,
        |k| k * k * k - k * k - (3.0 - nu) * k + 2.0 * a,
    )
    .to_dense();
    let r = |k: f64| PI * a * k * (k * k - 4.0);
    let m3 = Banded::build(size, r, |k| -r(k)).to_dense();
    let n1 = Banded::build(
        size,
        |k| PI * (k - sigma * k * k + sigma * k * k * k),
        |k| -PI * (k + sigma * k * k + sigma * k * k * k),
    )
    .to_dense();
    let n2 = Banded::build(size, |k| k + 1.0, |k| -(k - 1.0)).to_dense();

    let mechanics = upper_solve(&m1, &m2)?;
    let c_of_a = upper_solve(&n1, &n2)?;
    let coupling = upper_solve(&m1, &matmul(&m3, &c_of_a))?;
    Ok(mechanics
        .iter()
        .zip(&coupling)
        .map(|(rm, rc)| rm.iter().zip(rc).map(|(x, y)| x + d * y).collect())
        .collect())
}

/// Diagonal of [`mode_matrix_3d`] for modes `2..2 + size`.
pub fn matrix_oracle_3d(sigma: f64, d: f64, nu: f64, size: usize) -> Result<Vec<f64>> {
    let m = mode_matrix_3d(sigma, d, nu, size)?;
    Ok((0..size).map(|i| m[i][i]).collect())
}

/// Inclusive linear range `start..=end` with `count >= 2` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Range {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 || !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidParameter {
                name: "range",
                reason: "need start < end and at least 2 samples",
            });
        }
        Ok(Self { start, end, count })
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + (self.end - self.start) * i as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.value(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell {
    pub d: f64,
    pub sigma: f64,
    pub smallest_unstable: Option<usize>,
}

impl RegionCell {
    pub fn stable(&self) -> bool {
        self.smallest_unstable.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionScan {
    pub dim: Dim,
    pub nu: f64,
    pub d_range: Range,
    pub sigma_range: Range,
    /// Row-major: `cells[i * sigma.count + j]` is `(d_i, sigma_j)`.
    pub cells: Vec<RegionCell>,
    /// For each `d`, the largest scanned `sigma` that is unstable.
    pub boundary: Vec<(f64, Option<f64>)>,
    /// Points `(d, sigma)` where the two largest roots are one unit apart.
    pub root_gap_locus: Vec<(f64, f64)>,
}

pub fn classify(dim: Dim, nu: f64, d: f64, sigma: f64) -> RegionCell {
    let p = dispersion(dim, sigma, d, nu);
    RegionCell {
        d,
        sigma,
        smallest_unstable: p.unstable_modes().first().copied(),
    }
}

/// `sigma` in `[lo, hi]` where the root gap crosses 1, by bisection.
pub fn root_gap_sigma(dim: Dim, nu: f64, d: f64, lo: f64, hi: f64) -> Option<f64> {
    let f = |s: f64| dispersion(dim, s, d, nu).root_gap() - 1.0;
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() || fa * fb > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid) * fa > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-14 * b.max(1.0) {
            break;
        }
    }
    Some(0.5 * (a + b))
}

impl RegionScan {
    /// Assembles a scan from precomputed cells (lets callers parallelize).
    pub fn from_cells(
        dim: Dim,
        nu: f64,
        d_range: Range,
        sigma_range: Range,
        cells: Vec<RegionCell>,
    ) -> Self {
        let ns = sigma_range.count;
        let boundary = (0..d_range.count)
            .map(|i| {
                let row = &cells[i * ns..(i + 1) * ns];
                (
                    d_range.value(i),
                    row.iter().rev().find(|c| !c.stable()).map(|c| c.sigma),
                )
            })
            .collect();
        let root_gap_locus = d_range
            .values()
            .filter_map(|d| {
                root_gap_sigma(dim, nu, d, sigma_range.start, sigma_range.end).map(|s| (d, s))
            })
            .collect();
        Self {
            dim,
            nu,
            d_range,
            sigma_range,
            cells,
            boundary,
            root_gap_locus,
        }
    }

    pub fn cell(&self, i: usize, j: usize) -> &RegionCell {
        &self.cells[i * self.sigma_range.count + j]
    }

    /// Unstable cells violating the necessary condition; should be empty.
    pub fn necessary_condition_violations(&self) -> Vec<RegionCell> {
        self.cells
            .iter()
            .filter(|c| !c.stable() && c.d < necessary_condition(self.dim, c.sigma, self.nu))
            .copied()
            .collect()
    }

    /// Lattice check that instability is favoured by larger `d` and smaller
    /// `sigma`: an unstable cell has unstable neighbours at `(d + dd, sigma)`
    /// and `(d, sigma - ds)`. Returns the number of exceptions.
    pub fn monotonicity_exceptions(&self) -> usize {
        let (nd, ns) = (self.d_range.count, self.sigma_range.count);
        let mut bad = 0;
        for i in 0..nd {
            for j in 0..ns {
                if self.cell(i, j).stable() {
                    continue;
                }
                if i + 1 < nd && self.cell(i + 1, j).stable() {
                    bad += 1;
                }
                if j > 0 && self.cell(i, j - 1).stable() {
                    bad += 1;
                }
            }
        }
        bad
    }

    pub fn unstable_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.stable()).count()
    }
}

/// Serial region scan over the `(d, sigma)` lattice.
pub fn region_scan(dim: Dim, nu: f64, d_range: Range, sigma_range: Range) -> RegionScan {
    let cells = d_range
        .values()
        .flat_map(|d| sigma_range.values().map(move |s| (d, s)))
        .map(|(d, s)| classify(dim, nu, d, s))
        .collect();
    RegionScan::from_cells(dim, nu, d_range, sigma_range, cells)
}

/// Sample polyline of the necessary-condition curve `d_min(sigma)`.
pub fn necessary_condition_curve(dim: Dim, nu: f64, sigma_range: Range) -> Vec<(f64, f64)> {
    sigma_range
        .values()
        .map(|s| (necessary_condition(dim, s, nu), s))
        .collect()
}
