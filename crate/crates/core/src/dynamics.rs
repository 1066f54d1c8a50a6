//! Time integration of the rescaled wall-expansion equations.
//!
//! Both models are written as `d(phi)/dt = G` at the nodes with
//!
//! ```text
//! G = A(x) dphi + S(x),    A(x) = I(1) x - I(x)
//! ```
//!
//! where `I` is the cumulative tangential stretching (`int (Lambda1 + Lambda2 dphi)`
//! in 3D, `P L int Psi / dphi` in 2D). `L'/L = I(1)` when the length evolves,
//! and the same anchoring keeps the radial shape a fixed point when `L` is
//! frozen. Differentiating in `x` gives a conservation law for the state
//! `u = dphi` on the cells, `du/dt = dG/dx`, with `G = 0` at both poles, so
//! `sum u dx = pi` is kept exactly. `A dphi` is upwinded, the part of `S` that
//! behaves like `W du/dx` is implicit.

use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::geometry::{self, to_nodes, WallProfile, CLOSURE_TOLERANCE};
use crate::grid::Grid;
use crate::growth_field::{self, GrowthField};
use crate::math::{self, PI};
use crate::mechanics::{self, lambda_pair, Dim, ModelParams};
use crate::tridiag;

/// Time-step limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Courant number for the advection coefficient, in `(0, 1]`.
    pub cfl: f64,
    /// Cap on `dt` in units of the modal time scale `1 / rate_prefactor`.
    pub max_dt: f64,
    /// `dt <= theta dx^2 / max W` (3D only): the pole terms are explicit and
    /// stiff like a diffusion with coefficient of order `W`.
    pub diffusion_number: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            max_dt: 0.05,
            diffusion_number: 1.0,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "cfl",
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.max_dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "max_dt",
                reason: "must be positive",
            });
        }
        if !(self.diffusion_number > 0.0) {
            return Err(Error::InvalidParameter {
                name: "diffusion_number",
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `dphi = pi`.
    Sphere,
    /// `dphi = pi + sum a_k cos(k pi x)`.
    Modes(Vec<(usize, f64)>),
    /// Modes `1..=count` with amplitudes uniform in `[-epsilon, epsilon]`.
    Random {
        seed: u64,
        count: usize,
        epsilon: f64,
    },
}

/// Amplitudes of [`InitialCondition::Random`].
pub fn random_modes(seed: u64, count: usize, epsilon: f64) -> Vec<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=count)
        .map(|k| {
            let unit = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            (k, epsilon * (2.0 * unit - 1.0))
        })
        .collect()
}

impl InitialCondition {
    /// Builds the profile. Random data are re-closed in 3D (the second pole
    /// must sit on the axis); explicit modes are taken as given.
    pub fn build(&self, grid: Grid, length: f64, dim: Dim) -> Result<WallProfile> {
        let profile = match self {
            Self::Sphere => WallProfile::sphere(grid, length)?,
            Self::Modes(modes) => WallProfile::with_cosine_modes(grid, length, modes)?,
            Self::Random {
                seed,
                count,
                epsilon,
            } => {
                let mut p = WallProfile::with_cosine_modes(
                    grid,
                    length,
                    &random_modes(*seed, *count, *epsilon),
                )?;
                if dim == Dim::Three {
                    p.close()?;
                }
                p
            }
        };
        profile.check_parametrization()?;
        Ok(profile)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Number of interior cells.
    pub m: usize,
    pub length0: f64,
    pub control: StepControl,
    pub t_end: f64,
    pub initial: InitialCondition,
    /// Spacing of the observation times.
    pub output_interval: f64,
    /// Number of cosine modes tracked by the drivers.
    pub modes: usize,
    /// Re-close the profile after every step (3D). Off by default: drift is
    /// reported instead of hidden.
    pub project_closure: bool,
    pub max_steps: usize,
}

impl SimConfig {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            m: 200,
            length0: 1.0,
            control: StepControl::default(),
            t_end: 10.0,
            initial: InitialCondition::Sphere,
            output_interval: 0.1,
            modes: 10,
            project_closure: false,
            max_steps: 50_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.control.validate()?;
        if self.m < 2 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "need at least 2 cells",
            });
        }
        if !(self.length0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "L0",
                reason: "must be positive",
            });
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: "must be positive",
            });
        }
        if !(self.output_interval > 0.0) {
            return Err(Error::InvalidParameter {
                name: "output_interval",
                reason: "must be positive",
            });
        }
        if let InitialCondition::Random { epsilon, .. } = self.initial {
            if !(epsilon >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "epsilon",
                    reason: "must be non-negative",
                });
            }
        }
        Ok(())
    }
}

/// `G = A dphi + S` at the nodes, with the diffusive coefficient `W` used by
/// the implicit part.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsSplit {
    pub advection: Vec<f64>,
    pub source: Vec<f64>,
    pub diffusion: Vec<f64>,
    /// `I(1)`, equal to `L'/L` when the length evolves.
    pub stretch: f64,
}

impl RhsSplit {
    /// `d(phi)/dt` at the nodes with `dphi` averaged to the nodes.
    pub fn dphi_dt(&self, profile: &WallProfile) -> Vec<f64> {
        let u = profile.dphi_nodes();
        self.advection
            .iter()
            .zip(&self.source)
            .zip(&u)
            .map(|((a, s), u)| a * u + s)
            .collect()
    }
}

/// Solves for the density of the current shape.
pub fn solve_field(profile: &WallProfile, params: &ModelParams) -> Result<GrowthField> {
    let sigma = params.sigma(profile.length());
    match params.dim {
        Dim::Two => growth_field::solve_mu_2d(profile, sigma),
        Dim::Three => growth_field::solve_mu_3d(profile, sigma),
    }
}

fn advection_from_cumulative(grid: &Grid, cumulative: &[f64]) -> (Vec<f64>, f64) {
    let total = *cumulative.last().unwrap();
    let a = grid
        .node_iter()
        .zip(cumulative)
        .map(|(x, c)| total * x - c)
        .collect();
    (a, total)
}

/// 2D split: `A = I(1) x - I(x)`, `I = P L int Psi/dphi`,
/// `S = -P L d/dx (Psi / dphi^2)`, `W = 2 P L Psi / dphi^3`.
pub fn rhs_2d(
    profile: &WallProfile,
    field: &GrowthField,
    params: &ModelParams,
) -> Result<RhsSplit> {
    profile.check_parametrization()?;
    let grid = *profile.grid();
    let (n, dx, l) = (grid.cells(), grid.dx(), profile.length());
    let pl = params.pressure * l;
    let psi = params.psi(&field.mu, l);
    let u = profile.dphi();
    let mut cumulative = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    cumulative.push(0.0);
    for j in 0..n {
        acc += dx * pl * psi[j] / u[j];
        cumulative.push(acc);
    }
    let (advection, stretch) = advection_from_cumulative(&grid, &cumulative);
    let flux: Vec<f64> = (0..n).map(|j| psi[j] / (u[j] * u[j])).collect();
    let mut source = vec![0.0; n + 1];
    let mut diffusion = vec![0.0; n + 1];
    let (psi_n, u_n) = (to_nodes(&psi), profile.dphi_nodes());
    for i in 1..n {
        source[i] = -pl * (flux[i] - flux[i - 1]) / dx;
        diffusion[i] = 2.0 * pl * psi_n[i] / (u_n[i] * u_n[i] * u_n[i]);
    }
    Ok(RhsSplit {
        advection,
        source,
        diffusion,
        stretch,
    })
}

/// 3D split: `A = I(1) x - I(x)`, `I = int (Lambda1 + Lambda2 dphi)`,
/// `S = cot(phi) Lambda1 - dLambda2/dx`, `W = (P L Psi / 2) Icosin^3`.
pub fn rhs_3d(
    profile: &WallProfile,
    field: &GrowthField,
    params: &ModelParams,
) -> Result<RhsSplit> {
    profile.check_parametrization()?;
    let grid = *profile.grid();
    let (n, dx, l) = (grid.cells(), grid.dx(), profile.length());
    let psi = params.psi(&field.mu, l);
    let lam = mechanics::lambdas(profile, &psi, params)?;
    let u = profile.dphi();
    let mut cumulative = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    cumulative.push(0.0);
    for j in 0..n {
        acc += dx * (lam.lambda1[j] + lam.lambda2[j] * u[j]);
        cumulative.push(acc);
    }
    let (advection, stretch) = advection_from_cumulative(&grid, &cumulative);

    let phi = profile.phi_nodes();
    let j_n = geometry::icosin_nodes(profile)?;
    let (psi_n, u_n) = (to_nodes(&psi), profile.dphi_nodes());
    let half_pl = 0.5 * params.pressure * l;
    let mut source = vec![0.0; n + 1];
    let mut diffusion = vec![0.0; n + 1];
    for i in 1..n {
        let h = half_pl * psi_n[i];
        let (l1, _) = lambda_pair(h, params.poisson, j_n[i], u_n[i]);
        let cot = math::cos(phi[i]) / math::sin(phi[i]);
        source[i] = cot * l1 - (lam.lambda2[i] - lam.lambda2[i - 1]) / dx;
        diffusion[i] = h * j_n[i] * j_n[i] * j_n[i];
    }
    if let Some(i) = source.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "source",
            index: i,
        });
    }
    Ok(RhsSplit {
        advection,
        source,
        diffusion,
        stretch,
    })
}

/// Solves the density and builds the split for the model's dimension.
pub fn rhs(profile: &WallProfile, params: &ModelParams) -> Result<RhsSplit> {
    let field = solve_field(profile, params)?;
    match params.dim {
        Dim::Two => rhs_2d(profile, &field, params),
        Dim::Three => rhs_3d(profile, &field, params),
    }
}

/// `I(1)` for a given extensibility on the cells.
fn stretch_integral(profile: &WallProfile, psi: &[f64], params: &ModelParams) -> Result<f64> {
    let n = profile.grid().cells();
    if psi.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: psi.len(),
        });
    }
    let dx = profile.grid().dx();
    let u = profile.dphi();
    match params.dim {
        Dim::Two => {
            let pl = params.pressure * profile.length();
            Ok((0..n).map(|j| dx * pl * psi[j] / u[j]).sum())
        }
        Dim::Three => {
            let lam = mechanics::lambdas(profile, psi, params)?;
            Ok((0..n)
                .map(|j| dx * (lam.lambda1[j] + lam.lambda2[j] * u[j]))
                .sum())
        }
    }
}

/// `L'(t)`: `L int (Lambda1 + Lambda2 dphi)` in 3D, `P L^2 int Psi/dphi` in 2D.
pub fn elongation_rate(profile: &WallProfile, psi: &[f64], params: &ModelParams) -> Result<f64> {
    Ok(profile.length() * stretch_integral(profile, psi, params)?)
}

/// `L'` of the current shape evaluated at another length (shape frozen).
fn length_rate(profile: &WallProfile, length: f64, params: &ModelParams) -> Result<f64> {
    let mut p = profile.clone();
    p.set_length(length);
    let field = solve_field(&p, params)?;
    let psi = params.psi(&field.mu, length);
    elongation_rate(&p, &psi, params)
}

/// Largest stable step for the given split.
pub fn stable_dt(
    split: &RhsSplit,
    grid: &Grid,
    params: &ModelParams,
    length: f64,
    control: &StepControl,
) -> f64 {
    let dx = grid.dx();
    let mut dt = control.max_dt / params.rate_prefactor(length);
    let amax = split
        .advection
        .iter()
        .fold(0.0f64, |m, a| m.max(math::abs(*a)));
    if amax > 0.0 {
        dt = dt.min(control.cfl * dx / amax);
    }
    if params.dim == Dim::Three {
        let wmax = split.diffusion.iter().fold(0.0f64, |m, w| m.max(*w));
        if wmax > 0.0 {
            dt = dt.min(control.diffusion_number * dx * dx / wmax);
        }
    }
    dt
}

/// One time step of at most `dt_limit`. Returns the new profile and the step taken.
pub fn step(
    profile: &WallProfile,
    params: &ModelParams,
    control: &StepControl,
    dt_limit: f64,
) -> Result<(WallProfile, f64)> {
    let grid = *profile.grid();
    let split = rhs(profile, params)?;
    let dt = stable_dt(&split, &grid, params, profile.length(), control).min(dt_limit);
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "time step must be positive",
        });
    }
    let (n, dx) = (grid.cells(), grid.dx());
    let u = profile.dphi();
    let w = &split.diffusion;

    let mut explicit = vec![0.0; n + 1];
    for i in 1..n {
        let a = split.advection[i];
        let upwind = if a > 0.0 {
            u[i]
        } else if a < 0.0 {
            u[i - 1]
        } else {
            0.5 * (u[i] + u[i - 1])
        };
        explicit[i] = a * upwind + split.source[i] - w[i] * (u[i] - u[i - 1]) / dx;
    }
    let r = dt / (dx * dx);
    let mut lower = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for j in 0..n {
        let (wl, wr) = (w[j], w[j + 1]);
        lower.push(-r * wl);
        diag.push(1.0 + r * (wl + wr));
        upper.push(-r * wr);
        b.push(u[j] + dt * (explicit[j + 1] - explicit[j]) / dx);
    }
    let next_u = tridiag::solve(&lower, &diag, &upper, &b)?;

    let l = profile.length();
    let next_l = if params.inflating {
        // RK4 on L' = L I(1) with the shape frozen over the step
        let k1 = l * split.stretch;
        let k2 = length_rate(profile, l + 0.5 * dt * k1, params)?;
        let k3 = length_rate(profile, l + 0.5 * dt * k2, params)?;
        let k4 = length_rate(profile, l + dt * k3, params)?;
        l + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    } else {
        l
    };
    let next = WallProfile::new(grid, next_u, next_l, profile.time() + dt)?;
    next.check_parametrization()?;
    Ok((next, dt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub time: f64,
    pub length: f64,
    pub max_closure_defect: f64,
    /// The closure defect exceeded [`CLOSURE_TOLERANCE`] at some point.
    pub closure_warning: bool,
}

/// A single simulation: owns its state and advances it.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    state: WallProfile,
    steps: usize,
    max_closure_defect: f64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let grid = Grid::new(config.m)?;
        let state = config
            .initial
            .build(grid, config.length0, config.params.dim)?;
        Self::with_profile(config, state)
    }

    /// Starts from a given profile; `config.m` and `config.length0` are ignored.
    pub fn with_profile(config: SimConfig, state: WallProfile) -> Result<Self> {
        config.validate()?;
        state.check_parametrization()?;
        let defect = state.closure_defect();
        Ok(Self {
            config,
            state,
            steps: 0,
            max_closure_defect: defect,
        })
    }

    pub fn state(&self) -> &WallProfile {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn max_closure_defect(&self) -> f64 {
        self.max_closure_defect
    }

    /// Advances by one step without passing `t_limit`; lands on it exactly
    /// when the stable step reaches it.
    pub fn advance(&mut self, t_limit: f64) -> Result<f64> {
        let t = self.state.time();
        let (mut next, dt) = step(
            &self.state,
            &self.config.params,
            &self.config.control,
            t_limit - t,
        )?;
        if t + dt >= t_limit - 1e-12 * t_limit.abs().max(1.0) {
            next.set_time(t_limit);
        }
        if self.config.project_closure && self.config.params.dim == Dim::Three {
            next.close()?;
        }
        self.max_closure_defect = self.max_closure_defect.max(next.closure_defect());
        self.state = next;
        self.steps += 1;
        Ok(dt)
    }

    /// Runs to `t_end`, calling `observe` at `t0` and at every multiple of the
    /// output interval.
    pub fn run(&mut self, mut observe: impl FnMut(&WallProfile)) -> Result<RunSummary> {
        let t_end = self.config.t_end;
        let interval = self.config.output_interval;
        observe(&self.state);
        let mut k = 1.0;
        let t0 = self.state.time();
        while self.state.time() < t_end {
            let next_out = (t0 + k * interval).min(t_end);
            while self.state.time() < next_out {
                if self.steps >= self.config.max_steps {
                    return Err(Error::BlowUp {
                        time: self.state.time(),
                    });
                }
                let dt = self.advance(next_out)?;
                let scale = 1.0 / self.config.params.rate_prefactor(self.state.length());
                if dt < 1e-12 * scale {
                    return Err(Error::BlowUp {
                        time: self.state.time(),
                    });
                }
            }
            observe(&self.state);
            k += 1.0;
        }
        Ok(self.summary())
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            steps: self.steps,
            time: self.state.time(),
            length: self.state.length(),
            max_closure_defect: self.max_closure_defect,
            closure_warning: self.max_closure_defect > CLOSURE_TOLERANCE,
        }
    }
}

/// `L'` of the radial solution at length `L`: `P F(mu^c) L^2 / pi` in 2D and
/// `P (1 - nu) F(mu^c) L^2 / (2 pi)` in 3D.
pub fn radial_rate(params: &ModelParams, length: f64) -> f64 {
    let c = match params.dim {
        Dim::Two => 1.0 / PI,
        Dim::Three => (1.0 - params.poisson) / (2.0 * PI),
    };
    c * params.pressure * params.radial_psi(length) * length * length
}

/// Radial trajectory `L^c(t)` at the accepted steps of the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub l0: f64,
    pub times: Vec<f64>,
    pub lengths: Vec<f64>,
    /// `mu^c(t)` (1 in reduced mode).
    pub mu: Vec<f64>,
    rates: Vec<f64>,
    /// Estimated blow-up time when the solution escapes before `T`.
    pub blow_up: Option<f64>,
}

impl RadialSolution {
    /// Cubic Hermite interpolation of `L^c` between accepted steps.
    pub fn length_at(&self, t: f64) -> Option<f64> {
        let last = *self.times.last()?;
        if t < self.times[0] || t > last {
            return None;
        }
        let i = match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(i) => return Some(self.lengths[i]),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1, f0, f1) = (
            self.lengths[i],
            self.lengths[i + 1],
            self.rates[i],
            self.rates[i + 1],
        );
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Some(h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1)
    }

    /// First time at which `L^c` reaches `target`, if it does.
    pub fn time_to_reach(&self, target: f64) -> Option<f64> {
        let i = self.lengths.iter().position(|&l| l >= target)?;
        if i == 0 {
            return Some(self.times[0]);
        }
        let (mut a, mut b) = (self.times[i - 1], self.times[i]);
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if self.length_at(mid)? < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }
}

/// Integrates `dL/dt = radial_rate(L)` from `L0` to `t_end` with step-doubling
/// RK4 (relative tolerance `1e-12` per step). Stops with a blow-up estimate
/// once `L` exceeds `1e8 L0`.
pub fn radial_ode(params: &ModelParams, l0: f64, t_end: f64) -> Result<RadialSolution> {
    if !(l0 > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "L0/T",
            reason: "must be positive",
        });
    }
    let f = |l: f64| radial_rate(params, l);
    let rk4 = |l: f64, h: f64| {
        let k1 = f(l);
        let k2 = f(l + 0.5 * h * k1);
        let k3 = f(l + 0.5 * h * k2);
        let k4 = f(l + h * k3);
        l + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let tol = 1e-12;
    let (mut t, mut l) = (0.0, l0);
    let rate0 = f(l0);
    let mut h = if rate0 > 0.0 {
        (1e-3 * l0 / rate0).min(t_end)
    } else {
        t_end
    };
    let mut out = RadialSolution {
        l0,
        times: vec![0.0],
        lengths: vec![l0],
        mu: vec![params.radial_mu(l0)],
        rates: vec![rate0],
        blow_up: None,
    };
    while t < t_end {
        h = h.min(t_end - t);
        let full = rk4(l, h);
        let half = rk4(rk4(l, 0.5 * h), 0.5 * h);
        let err = math::abs(full - half) / (15.0 * math::abs(half).max(1e-300));
        if !half.is_finite() || err > tol {
            h *= 0.5;
            if h < 1e-15 * t.max(1.0) {
                out.blow_up = Some(t);
                return Ok(out);
            }
            continue;
        }
        t = if t + h >= t_end { t_end } else { t + h };
        l = half + (half - full) / 15.0;
        let rate = f(l);
        out.times.push(t);
        out.lengths.push(l);
        out.mu.push(params.radial_mu(l));
        out.rates.push(rate);
        if l > 1e8 * l0 {
            // local exponent q of L' ~ L^q; the remaining time to blow-up is L / ((q - 1) L')
            let n = out.lengths.len();
            let (la, ra) = (out.lengths[n - 2], out.rates[n - 2]);
            let q = math::ln(rate / ra) / math::ln(l / la);
            let remaining = if q > 1.0 { l / ((q - 1.0) * rate) } else { 0.0 };
            out.blow_up = Some(t + remaining);
            return Ok(out);
        }
        let grow = if err > 0.0 {
            math::powf(tol / err, 0.2).min(4.0) * 0.9
        } else {
            4.0
        };
        h *= grow.max(0.2);
    }
    Ok(out)
}
