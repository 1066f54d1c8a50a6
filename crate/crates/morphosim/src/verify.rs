//! Verification suite: simulation-versus-theory rate checks and the oracle
//! checks behind the acceptance criteria.
//!
//! Each criterion is a function of the [`Suite`]; `Fast` shrinks grids and
//! lattices, `Full` runs the reference sizes.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use morphosim_core::dynamics::{self, InitialCondition, SimConfig, Simulation};
use morphosim_core::ellipsoid::{self, EllipsoidState, DEFAULT_CEILING};
use morphosim_core::geometry;
use morphosim_core::growth_field::{self, EllipticOperator};
use morphosim_core::spectral::{self, FitWindow, ModeSeries};
use morphosim_core::stability::{self, Range};
use morphosim_core::{poly, CouplingFunction, Diffusion, Dim, Grid, ModelParams, WallProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Fast,
    Full,
}

impl Suite {
    fn pick<T>(self, fast: T, full: T) -> T {
        match self {
            Self::Fast => fast,
            Self::Full => full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub criterion: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "criterion {:>2} [{verdict}] {} ({:.1} s): {}",
            self.criterion, self.name, self.seconds, self.detail
        )
    }
}

pub type Criterion = fn(Suite) -> CheckResult;

/// All criteria in order.
pub const CRITERIA: [Criterion; 10] = [
    dispersion_3d,
    dispersion_2d,
    shape_classifications,
    matrix_oracle,
    root_formulas,
    necessary_conditions,
    exact_solutions,
    elliptic_solver,
    ellipsoid_model,
    gauss_bonnet,
];

/// Runs the whole suite on a pool of `jobs` threads (0 = all cores).
pub fn run(suite: Suite, jobs: usize) -> Vec<CheckResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| CRITERIA.par_iter().map(|c| c(suite)).collect())
}

fn timed(criterion: u8, name: &'static str, body: impl FnOnce() -> (bool, String)) -> CheckResult {
    let t0 = Instant::now();
    let (passed, detail) = body();
    CheckResult {
        criterion,
        name,
        passed,
        detail,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// Outcome of one single-mode run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRate {
    /// Theory mode index.
    pub k: usize,
    /// Fitted rate in units of the rate prefactor.
    pub measured: f64,
    pub theory: f64,
}

impl ModeRate {
    pub fn relative_error(&self) -> f64 {
        rel_err(self.measured, self.theory)
    }

    pub fn sign_matches(&self) -> bool {
        self.measured.signum() == self.theory.signum()
    }
}

/// Seeds theory mode `k` with amplitude `1e-4` on a fixed-length sphere and
/// fits the exponential rate of its coefficient.
pub fn measure_mode_rate(
    dim: Dim,
    sigma: f64,
    d: f64,
    nu: f64,
    k: usize,
    m: usize,
) -> Result<ModeRate, String> {
    let params = ModelParams::quasi_stationary(dim, sigma, d, nu);
    let poly = stability::dispersion(dim, sigma, d, nu);
    let j = poly.fourier_index(k);
    // fast modes leave the resolvable range quickly; shorten their window
    let (t_end, max_dt) = match dim {
        Dim::Two => (4.0, 5e-4),
        Dim::Three => (10.0, 2e-3),
    };
    let mut cfg = SimConfig::new(params);
    cfg.m = m;
    cfg.t_end = t_end;
    cfg.output_interval = t_end / 40.0;
    cfg.control.max_dt = max_dt;
    cfg.initial = InitialCondition::Modes(vec![(j, 1e-4)]);
    let mut sim = Simulation::new(cfg).map_err(|e| e.to_string())?;
    let mut series = ModeSeries::new();
    let kmax = j + 2;
    let mut failure = None;
    sim.run(|p| match spectral::profile_modes(p, kmax) {
        Ok(c) => series.push(p.time(), c.values),
        Err(e) => failure = Some(e.to_string()),
    })
    .map_err(|e| e.to_string())?;
    if let Some(e) = failure {
        return Err(e);
    }
    let fit = spectral::fit_rate(
        &series,
        j,
        FitWindow::Explicit {
            start: 0.1 * t_end,
            end: t_end,
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(ModeRate {
        k,
        measured: fit.rate / params.rate_prefactor(1.0),
        theory: poly.reduced_rate(k),
    })
}

fn rate_table(dim: Dim, ks: &[usize], m: usize) -> Result<Vec<ModeRate>, String> {
    ks.par_iter()
        .map(|&k| measure_mode_rate(dim, 0.05, 4.0, 0.5, k, m))
        .collect()
}

fn describe(rates: &[ModeRate]) -> String {
    rates
        .iter()
        .map(|r| {
            format!(
                "k={} {:+.4} vs {:+.4} ({:.2}%)",
                r.k,
                r.measured,
                r.theory,
                100.0 * r.relative_error()
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Theory mode 2 in 3D is the one cosine mode of `dphi` that opens the
/// surface; only its sign is compared.
pub fn dispersion_3d(suite: Suite) -> CheckResult {
    timed(1, "3D dispersion cross-check", || {
        let m = suite.pick(100, 400);
        match rate_table(Dim::Three, &[2, 3, 4, 5], m) {
            Err(e) => (false, e),
            Ok(rates) => {
                let signs = rates.iter().all(ModeRate::sign_matches);
                let close = rates
                    .iter()
                    .filter(|r| r.k >= 3)
                    .all(|r| r.relative_error() < 0.05);
                (
                    signs && close,
                    format!("m={m}: {} (k=2 sign only)", describe(&rates)),
                )
            }
        }
    })
}

pub fn dispersion_2d(suite: Suite) -> CheckResult {
    timed(2, "2D dispersion cross-check", || {
        let m = suite.pick(100, 400);
        match rate_table(Dim::Two, &[1, 2, 3, 4, 5], m) {
            Err(e) => (false, e),
            Ok(rates) => {
                let ok = rates
                    .iter()
                    .all(|r| r.sign_matches() && r.relative_error() < 0.05);
                (ok, format!("m={m}: {}", describe(&rates)))
            }
        }
    })
}

/// Energy `sum a_k^2` and `sigma(L)` of a run, sampled at the output times.
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub sigma: Vec<f64>,
}

pub fn energy_trace(cfg: SimConfig) -> Result<EnergyTrace, String> {
    let params = cfg.params;
    let modes = cfg.modes;
    let mut sim = Simulation::new(cfg).map_err(|e| e.to_string())?;
    let mut trace = EnergyTrace {
        times: vec![],
        energy: vec![],
        sigma: vec![],
    };
    sim.run(|p| {
        let a = spectral::profile_modes(p, modes)
            .map(|c| c.values)
            .unwrap_or_default();
        trace.times.push(p.time());
        trace.energy.push(a.iter().map(|v| v * v).sum());
        trace.sigma.push(params.sigma(p.length()));
    })
    .map_err(|e| e.to_string())?;
    Ok(trace)
}

/// Fixed-length run with random initial data, as in the stable/unstable figures.
pub fn classification_config(sigma: f64, m: usize, t_end: f64, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::new(ModelParams::quasi_stationary(Dim::Three, sigma, 4.0, 0.5));
    cfg.m = m;
    cfg.t_end = t_end;
    cfg.output_interval = t_end / 100.0;
    cfg.initial = InitialCondition::Random {
        seed,
        count: 10,
        epsilon: 0.01 * PI,
    };
    cfg
}

/// Inflating run whose reduced diffusion starts at `sigma0` and falls as `L^-2`.
/// The density scale is chosen so that `mu^c(L0) = 1`.
pub fn inflating_config(sigma0: f64, m: usize, t_end: f64, seed: u64) -> SimConfig {
    let params = ModelParams {
        pressure: 1.0,
        poisson: 0.5,
        coupling: CouplingFunction::Power(4.0),
        diffusion: Diffusion::Physical {
            gamma: sigma0 / (PI * PI),
            alpha: 1.0,
            beta: 1.0 / (PI * PI),
        },
        dim: Dim::Three,
        inflating: true,
    };
    let mut cfg = SimConfig::new(params);
    cfg.m = m;
    cfg.t_end = t_end;
    cfg.output_interval = t_end / 100.0;
    cfg.initial = InitialCondition::Random {
        seed,
        count: 10,
        epsilon: 0.01 * PI,
    };
    cfg
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(0, |best, (i, x)| if *x < v[best] { i } else { best })
}

pub fn shape_classifications(suite: Suite) -> CheckResult {
    timed(3, "shape classifications", || {
        let m = suite.pick(80, 160);
        let runs = [
            energy_trace(classification_config(0.1, m, 40.0, 1)),
            energy_trace(classification_config(0.05, m, 40.0, 1)),
            energy_trace(inflating_config(0.1, m, 400.0, 1)),
        ];
        let mut notes = Vec::new();
        let mut ok = true;
        let mut traces = Vec::new();
        for r in runs {
            match r {
                Ok(t) => traces.push(t),
                Err(e) => return (false, e),
            }
        }
        // stable: decays, and monotonically once the first quarter has passed
        let s = &traces[0].energy;
        let tail = &s[s.len() / 4..];
        let stable = s[s.len() - 1] < 1e-2 * s[0] && tail.windows(2).all(|w| w[1] <= w[0]);
        notes.push(format!(
            "sigma=0.1: E {:.2e} -> {:.2e}",
            s[0],
            s[s.len() - 1]
        ));
        ok &= stable;
        // unstable: grows, and is still growing over the second half
        let u = &traces[1].energy;
        let unstable = u[u.len() - 1] > 2.0 * u[0] && u[u.len() - 1] > u[u.len() / 2];
        notes.push(format!(
            "sigma=0.05: E {:.2e} -> {:.2e}",
            u[0],
            u[u.len() - 1]
        ));
        ok &= unstable;
        // inflating: dips, then grows once sigma has fallen
        let f = &traces[2];
        let i = argmin(&f.energy);
        let last = f.energy.len() - 1;
        let late =
            i > 0 && i < last && f.energy[last] > 2.0 * f.energy[i] && f.energy[i] < f.energy[0];
        notes.push(format!(
            "inflating: E {:.2e} -> min {:.2e} (t={:.0}, sigma={:.3}) -> {:.2e} (sigma={:.3})",
            f.energy[0], f.energy[i], f.times[i], f.sigma[i], f.energy[last], f.sigma[last]
        ));
        ok &= late;
        (ok, notes.join("; "))
    })
}

fn random_triples(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (
                rng.random_range(0.01..1.0),
                rng.random_range(0.0..10.0),
                rng.random_range(0.05..0.95),
            )
        })
        .collect()
}

pub fn matrix_oracle(suite: Suite) -> CheckResult {
    timed(4, "matrix oracle", || {
        let n = suite.pick(10, 25);
        let mut worst: f64 = 0.0;
        for (sigma, d, nu) in random_triples(n, 2024) {
            let Ok(diag) = stability::matrix_oracle_3d(sigma, d, nu, 21) else {
                return (
                    false,
                    format!("singular factor at sigma={sigma}, d={d}, nu={nu}"),
                );
            };
            let p = stability::dispersion_3d(sigma, d, nu);
            for (i, v) in diag.iter().enumerate() {
                let want = p.reduced_rate(i + 2);
                worst = worst.max((v - want).abs() / want.abs().max(1.0));
            }
        }
        (
            worst <= 1e-12,
            format!("{n} triples, k=2..22, worst deviation {worst:.2e}"),
        )
    })
}

pub fn root_formulas(suite: Suite) -> CheckResult {
    timed(5, "root formulas", || {
        let n = suite.pick(20, 50);
        let sigmas = Range::new(0.01, 1.0, n).expect("range");
        let ds = Range::new(0.0, 10.0, n).expect("range");
        let nus = [0.1, 0.3, 0.5, 0.7, 0.9];
        let mut roots: f64 = 0.0;
        let mut identity: f64 = 0.0;
        let mut check = |p: stability::StabilityPolynomial| {
            if let Ok(eig) = p.roots_by_eigenvalues() {
                roots = roots.max(poly::max_relative_mismatch(&p.roots(), &eig));
            } else {
                roots = f64::INFINITY;
            }
            let (lhs, rhs) = stability::elimination_identity(&p);
            identity = identity.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        };
        for s in sigmas.values() {
            for d in ds.values() {
                check(stability::dispersion_2d(s, d));
                for nu in nus {
                    check(stability::dispersion_3d(s, d, nu));
                }
            }
        }
        let ok = roots <= 1e-10 && identity <= 1e-12;
        (
            ok,
            format!(
                "{n}x{n}x5 lattice: root mismatch {roots:.2e}, identity residual {identity:.2e}"
            ),
        )
    })
}

pub fn necessary_conditions(suite: Suite) -> CheckResult {
    timed(6, "necessary conditions", || {
        let n = suite.pick(40, 100);
        let d_range = Range::new(2.0, 8.0, n).expect("range");
        let s_range = Range::new(0.01, 0.5, n).expect("range");
        let three = stability::region_scan(Dim::Three, 0.5, d_range, s_range);
        let two = stability::region_scan(Dim::Two, 0.5, d_range, s_range);
        let (v3, v2) = (
            three.necessary_condition_violations().len(),
            two.necessary_condition_violations().len(),
        );
        let ok = v3 == 0 && v2 == 0 && three.unstable_count() > 0 && two.unstable_count() > 0;
        (
            ok,
            format!(
                "{n}x{n}: 3D {} unstable cells, {v3} violations; 2D {} unstable, {v2} violations",
                three.unstable_count(),
                two.unstable_count()
            ),
        )
    })
}

/// Largest `|dphi - pi|` after `steps` steps from the sphere. The parameters
/// are linearly stable in both dimensions, so roundoff is not amplified; at
/// `d = 4` the circle is unstable in 2D.
pub fn sphere_drift(dim: Dim, m: usize, steps: usize) -> Result<f64, String> {
    let d = match dim {
        Dim::Two => 2.0,
        Dim::Three => 4.0,
    };
    let mut cfg = SimConfig::new(ModelParams::quasi_stationary(dim, 0.1, d, 0.5));
    cfg.m = m;
    cfg.initial = InitialCondition::Sphere;
    let mut sim = Simulation::new(cfg).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        sim.advance(f64::INFINITY).map_err(|e| e.to_string())?;
        worst = sim
            .state()
            .dphi()
            .iter()
            .fold(worst, |w, u| w.max((u - PI).abs()));
    }
    Ok(worst)
}

/// Largest relative gap between the inflating sphere and the radial ODE
/// while `L` doubles.
pub fn radial_gap(dim: Dim, m: usize) -> Result<f64, String> {
    let params = ModelParams {
        pressure: 1.0,
        poisson: 0.5,
        coupling: CouplingFunction::Power(2.0),
        diffusion: Diffusion::Physical {
            gamma: 0.1,
            alpha: 1.0,
            beta: 1.0,
        },
        dim,
        inflating: true,
    };
    let ode = dynamics::radial_ode(&params, 1.0, 1e4).map_err(|e| e.to_string())?;
    let t_double = ode
        .time_to_reach(2.0)
        .ok_or("radial solution never doubles")?;
    let mut cfg = SimConfig::new(params);
    cfg.m = m;
    cfg.initial = InitialCondition::Sphere;
    cfg.t_end = t_double;
    cfg.output_interval = t_double / 20.0;
    let mut sim = Simulation::new(cfg).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    sim.run(|p| {
        let want = ode.length_at(p.time()).unwrap_or(f64::NAN);
        worst = worst.max((p.length() - want).abs() / want);
    })
    .map_err(|e| e.to_string())?;
    Ok(worst)
}

pub fn exact_solutions(suite: Suite) -> CheckResult {
    timed(7, "exact-solution preservation", || {
        let steps = suite.pick(2_000, 10_000);
        let m = suite.pick(50, 100);
        let mut notes = Vec::new();
        let mut ok = true;
        for (dim, name) in [(Dim::Two, "2D"), (Dim::Three, "3D")] {
            match (sphere_drift(dim, m, steps), radial_gap(dim, m)) {
                (Ok(drift), Ok(gap)) => {
                    ok &= drift < 1e-6 && gap < 1e-4;
                    notes.push(format!(
                        "{name}: sphere drift {drift:.1e} over {steps} steps, L gap {gap:.1e}"
                    ));
                }
                (a, b) => {
                    ok = false;
                    notes.push(format!("{name}: {:?} {:?}", a.err(), b.err()));
                }
            }
        }
        (ok, notes.join("; "))
    })
}

/// L2 error of the axisymmetric solver for `mu = 1 + cos(2 pi x)` on the sphere.
pub fn manufactured_error(m: usize, sigma: f64) -> Result<f64, String> {
    let g = Grid::new(m).map_err(|e| e.to_string())?;
    let p = WallProfile::sphere(g, 1.0).map_err(|e| e.to_string())?;
    let op = EllipticOperator::axisymmetric(&p, sigma).map_err(|e| e.to_string())?;
    let rhs: Vec<f64> = g
        .center_iter()
        .map(|y| 1.0 + 2.0 * sigma + (1.0 + 6.0 * sigma) * (2.0 * PI * y).cos())
        .collect();
    let mu = op.solve(&rhs).map_err(|e| e.to_string())?;
    let sq: f64 = mu
        .iter()
        .zip(g.center_iter())
        .map(|(v, y)| (v - 1.0 - (2.0 * PI * y).cos()).powi(2))
        .sum();
    Ok((sq * g.dx()).sqrt())
}

pub fn elliptic_solver(_suite: Suite) -> CheckResult {
    timed(8, "elliptic solver", || {
        let (e1, e2) = match (manufactured_error(100, 0.2), manufactured_error(400, 0.2)) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => return (false, format!("{:?} {:?}", a.err(), b.err())),
        };
        let order = (e1 / e2).ln() / (401.0f64 / 101.0).ln();
        let sphere = WallProfile::sphere(Grid::new(200).expect("grid"), 1.0).expect("sphere");
        let flat = match growth_field::solve_mu_3d(&sphere, 0.1) {
            Ok(f) => f.mu.iter().fold(0.0f64, |w, v| w.max((v - 1.0).abs())),
            Err(e) => return (false, e.to_string()),
        };
        (
            order >= 1.9 && flat < 1e-10,
            format!("order {order:.3} ({e1:.2e} -> {e2:.2e}); sphere |mu - 1| {flat:.1e}"),
        )
    })
}

pub fn ellipsoid_model(_suite: Suite) -> CheckResult {
    timed(9, "ellipsoid toy model", || {
        let t0 = Instant::now();
        let run = |a: f64, c: f64, dt: f64, t: f64| {
            ellipsoid::integrate(
                EllipsoidState::new(a, c).expect("state"),
                dt,
                t,
                DEFAULT_CEILING,
            )
            .expect("integrate")
        };
        let drift = [(1.0, 2.0), (2.0, 1.0), (1.3, 1.1)]
            .iter()
            .map(|&(a, c)| run(a, c, 1e-3, 5.0).invariant_drift())
            .fold(0.0, f64::max);

        let cigar = run(1.0, 2.0, 1e-4, 50.0);
        let delta = ellipsoid::invariant(&cigar.states[0]);
        let a_gap = (cigar.last().a - delta.powf(-1.0 / 3.0)).abs();
        let blow_up = cigar.blow_up;

        let flat = run(2.0, 1.0, 1e-3, 200.0);
        let delta_f = ellipsoid::invariant(&flat.states[0]);
        let end = flat.last();
        let c_gap = (end.c - (-delta_f).powf(-1.0 / 3.0)).abs();
        let n = flat.states.len();
        let prev = &flat.states[n - 1001];
        let slope = (end.a - prev.a) / (end.t - prev.t);
        let slope_gap = (slope - (-delta_f).powf(2.0 / 3.0)).abs();
        let seconds = t0.elapsed().as_secs_f64();

        let ok = drift < 1e-8
            && a_gap < 1e-3
            && blow_up.is_some()
            && c_gap < 1e-3
            && slope_gap < 1e-3
            && seconds < 1.0;
        (
            ok,
            format!(
                "drift {drift:.1e}; cigar |a - a_inf| {a_gap:.1e}, blow-up at t={:.3}; flat |c - c_inf| {c_gap:.1e}, slope gap {slope_gap:.1e}; {seconds:.2} s",
                blow_up.unwrap_or(f64::NAN)
            ),
        )
    })
}

pub fn gauss_bonnet(suite: Suite) -> CheckResult {
    timed(10, "Gauss-Bonnet", || {
        let seeds = suite.pick(3, 10);
        let g = Grid::new(400).expect("grid");
        let mut worst: f64 = 0.0;
        for seed in 0..seeds as u64 {
            let ic = InitialCondition::Random {
                seed,
                count: 10,
                epsilon: 0.05 * PI,
            };
            let p = match ic.build(g, 1.0 + seed as f64 * 0.1, Dim::Three) {
                Ok(p) => p,
                Err(e) => return (false, e.to_string()),
            };
            worst = worst.max((geometry::gaussian_curvature_integral(&p) - 4.0 * PI).abs());
        }
        (
            worst < 1e-6,
            format!("{seeds} random closed profiles at m=400, worst |int K dA - 4 pi| {worst:.1e}"),
        )
    })
}
