//! Cosine-mode diagnostics of `dphi` and exponential rate fits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::WallProfile;
use crate::grid::Grid;
use crate::math::{self, PI};

#[derive(Debug, Clone, PartialEq)]
pub struct CosineCoefficients {
    /// `a_1..a_K`.
    pub values: Vec<f64>,
    /// `K > m/2`: the upper modes are poorly resolved.
    pub aliasing: bool,
}

/// `a_k = 2 sum_j f(y_j) cos(k pi y_j) dx` for `k = 1..=k_max` (midpoint rule).
/// The constant part of `f` drops out exactly for `k <= 2m + 1`.
pub fn cosine_coeffs(grid: &Grid, field: &[f64], k_max: usize) -> Result<CosineCoefficients> {
    if field.len() != grid.cells() {
        return Err(Error::LengthMismatch {
            expected: grid.cells(),
            actual: field.len(),
        });
    }
    let dx = grid.dx();
    let values = (1..=k_max)
        .map(|k| {
            let kp = k as f64 * PI;
            2.0 * dx
                * grid
                    .center_iter()
                    .zip(field)
                    .map(|(y, f)| f * math::cos(kp * y))
                    .sum::<f64>()
        })
        .collect();
    Ok(CosineCoefficients {
        values,
        aliasing: 2 * k_max > grid.m(),
    })
}

/// Coefficients of `dphi - mean(dphi)` of a profile.
pub fn profile_modes(profile: &WallProfile, k_max: usize) -> Result<CosineCoefficients> {
    let u = profile.dphi();
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    let centred: Vec<f64> = u.iter().map(|v| v - mean).collect();
    cosine_coeffs(profile.grid(), &centred, k_max)
}

/// Density coefficient driven by the `dphi` coefficient `a_k` in 2D:
/// `c_k = a_k / (pi (1 + sigma k^2))`.
pub fn ck_from_ak_2d(a_k: f64, sigma: f64, k: usize) -> f64 {
    let k = k as f64;
    a_k / (PI * (1.0 + sigma * k * k))
}

/// Time series of the cosine coefficients `a_1..a_K`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeSeries {
    pub times: Vec<f64>,
    /// `coeffs[n][k - 1]` is `a_k(times[n])`.
    pub coeffs: Vec<Vec<f64>>,
}

impl ModeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, a: Vec<f64>) {
        self.times.push(t);
        self.coeffs.push(a);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    /// `a_k` over time.
    pub fn mode(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.coeffs.iter().map(move |a| a[k - 1])
    }

    /// `sum_k a_k^2` over time.
    pub fn energy(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|a| a.iter().map(|v| v * v).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitWindow {
    /// `t in [start, end]`.
    Explicit { start: f64, end: f64 },
    /// From `start` until some `|a_j|` first exceeds `threshold`.
    Auto { start: f64, threshold: f64 },
}

impl Default for FitWindow {
    fn default() -> Self {
        Self::Auto {
            start: 0.0,
            threshold: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

pub const MIN_R_SQUARED: f64 = 0.99;

/// Least-squares slope of `ln |a_k|` over the window.
pub fn fit_rate(series: &ModeSeries, k: usize, window: FitWindow) -> Result<RateFit> {
    if k == 0 || k > series.modes() {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "mode not present in the series",
        });
    }
    let (start, end) = match window {
        FitWindow::Explicit { start, end } => (start, end),
        FitWindow::Auto { start, threshold } => {
            let end = series
                .times
                .iter()
                .zip(&series.coeffs)
                .find(|(_, a)| a.iter().any(|v| math::abs(*v) > threshold))
                .map_or(f64::INFINITY, |(t, _)| *t);
            (start, end)
        }
    };
    let picked: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(series.mode(k))
        .filter(|(t, _)| **t >= start && **t < end || (**t == end && end.is_finite()))
        .map(|(t, a)| (*t, a))
        .collect();
    if picked.len() < 3 {
        return Err(Error::TooFewSamples {
            points: picked.len(),
        });
    }
    let sign = picked[0].1.signum();
    if picked.iter().any(|(_, a)| a.signum() != sign || *a == 0.0) {
        return Err(Error::Oscillatory);
    }
    let pts: Vec<(f64, f64)> = picked
        .iter()
        .map(|(t, a)| (*t, math::ln(math::abs(*a))))
        .collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in &pts {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    if stt == 0.0 {
        return Err(Error::TooFewSamples { points: 1 });
    }
    let rate = sty / stt;
    let intercept = my - rate * mt;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sty * sty / (stt * syy)
    };
    if r_squared < MIN_R_SQUARED {
        return Err(Error::PoorFit { r_squared });
    }
    Ok(RateFit {
        rate,
        intercept,
        r_squared,
        t_start: pts[0].0,
        t_end: pts[pts.len() - 1].0,
        samples: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn orthogonality() {
        let g = Grid::new(200).unwrap();
        let f: Vec<f64> = g.center_iter().map(|y| (3.0 * PI * y).cos()).collect();
        let a = cosine_coeffs(&g, &f, 10).unwrap();
        for (i, v) in a.values.iter().enumerate() {
            let want = if i + 1 == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*v, want, epsilon = 1e-12);
        }
        assert!(!a.aliasing);
        assert!(cosine_coeffs(&g, &f, 150).unwrap().aliasing);
    }

    #[test]
    fn constant_has_no_modes() {
        let g = Grid::new(99).unwrap();
        let a = cosine_coeffs(&g, &vec![PI; 100], 20).unwrap();
        assert!(a.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn second_order_against_fine_quadrature() {
        // f(x) = exp(x) sin(3x): a_k by quadrature on a much finer grid
        let f = |x: f64| x.exp() * (3.0 * x).sin();
        let fine = Grid::new(20_000).unwrap();
        let ff: Vec<f64> = fine.center_iter().map(f).collect();
        let reference = cosine_coeffs(&fine, &ff, 5).unwrap().values;
        let err = |m: usize| {
            let g = Grid::new(m).unwrap();
            let v: Vec<f64> = g.center_iter().map(f).collect();
            let a = cosine_coeffs(&g, &v, 5).unwrap().values;
            a.iter()
                .zip(&reference)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(49), err(99));
        let order = (e1 / e2).log2();
        assert!(order > 1.9, "{order}");
    }

    #[test]
    fn ck_relation() {
        assert_abs_diff_eq!(ck_from_ak_2d(2.0, 0.0, 7), 2.0 / PI, epsilon = 1e-15);
        assert!(ck_from_ak_2d(1.0, 0.1, 1_000_000).abs() < 1e-11);
    }

    #[test]
    fn exact_exponential_rate() {
        let mut s = ModeSeries::new();
        for i in 0..50 {
            let t = i as f64 * 0.1;
            s.push(t, vec![1e-6 * (0.7 * t).exp(), 0.0]);
        }
        let fit = fit_rate(&s, 1, FitWindow::default()).unwrap();
        assert_abs_diff_eq!(fit.rate, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn auto_window_stops_at_threshold() {
        let mut s = ModeSeries::new();
        for i in 0..100 {
            let t = i as f64 * 0.1;
            s.push(t, vec![1e-4 * t.exp()]);
        }
        let fit = fit_rate(
            &s,
            1,
            FitWindow::Auto {
                start: 0.5,
                threshold: 1e-2,
            },
        )
        .unwrap();
        assert!(fit.t_start >= 0.5);
        assert!(1e-4 * (fit.t_end).exp() <= 1.2e-2);
    }

    #[test]
    fn sign_change_is_rejected() {
        let mut s = ModeSeries::new();
        for i in 0..20 {
            let t = i as f64 * 0.1;
            s.push(t, vec![1e-4 * (3.0 * t).cos()]);
        }
        assert_eq!(
            fit_rate(&s, 1, FitWindow::default()),
            Err(Error::Oscillatory)
        );
    }

    #[test]
    fn poor_fit_and_short_window() {
        let mut s = ModeSeries::new();
        for i in 0..30 {
            let t = i as f64;
            let noisy = 1e-4 * (1.0 + 0.9 * ((i * 7919 % 13) as f64 / 13.0));
            s.push(t, vec![noisy]);
        }
        assert!(matches!(
            fit_rate(&s, 1, FitWindow::default()),
            Err(Error::PoorFit { .. })
        ));
        let window = FitWindow::Explicit {
            start: 0.0,
            end: 1.0,
        };
        assert!(matches!(
            fit_rate(&s, 1, window),
            Err(Error::TooFewSamples { .. })
        ));
    }

    proptest! {
        #[test]
        fn extraction_is_linear(a in prop::collection::vec(-1.0f64..1.0, 6), b in prop::collection::vec(-1.0f64..1.0, 6), c in -3.0f64..3.0) {
            let g = Grid::new(64).unwrap();
            let field = |w: &[f64]| -> Vec<f64> {
                g.center_iter().map(|y| w.iter().enumerate().map(|(i, v)| v * ((i + 1) as f64 * PI * y).cos()).sum()).collect()
            };
            let (fa, fb) = (field(&a), field(&b));
            let sum: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x + c * y).collect();
            let ca = cosine_coeffs(&g, &fa, 8).unwrap().values;
            let cb = cosine_coeffs(&g, &fb, 8).unwrap().values;
            let cs = cosine_coeffs(&g, &sum, 8).unwrap().values;
            for k in 0..8 {
                prop_assert!((cs[k] - ca[k] - c * cb[k]).abs() < 1e-12);
                let want = if k < 6 { a[k] } else { 0.0 };
                prop_assert!((ca[k] - want).abs() < 1e-12);
            }
        }

        #[test]
        fn rate_is_amplitude_invariant(rate in -2.0f64..2.0, amp in 1e-6f64..1e-3, scale in 0.1f64..10.0) {
            let build = |a0: f64| {
                let mut s = ModeSeries::new();
                for i in 0..40 {
                    let t = i as f64 * 0.05;
                    s.push(t, vec![a0 * (rate * t).exp() * (1.0 + 1e-3 * (t * 5.0).sin())]);
                }
                s
            };
            let w = FitWindow::Explicit { start: 0.0, end: 2.0 };
            let r1 = fit_rate(&build(amp), 1, w);
            let r2 = fit_rate(&build(amp * scale), 1, w);
            match (r1, r2) {
                (Ok(f1), Ok(f2)) => prop_assert!((f1.rate - f2.rate).abs() < 1e-6),
                (Err(e1), Err(e2)) => prop_assert_eq!(core::mem::discriminant(&e1), core::mem::discriminant(&e2)),
                _ => prop_assert!(false),
            }
        }
    }
}
