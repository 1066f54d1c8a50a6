//! Constitutive coupling between wall geometry, stresses and expansion rates.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{self, to_nodes, WallProfile};
use crate::math::{self, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Two,
    Three,
}

/// Extensibility law `Psi = F(mu)`.
#[derive(Debug, Clone, Copy)]
pub enum CouplingFunction {
    /// `F(mu) = mu^d`.
    Power(f64),
    /// `F(mu) = exp(mu)`.
    Exponential,
    /// Any increasing, positive function together with its derivative.
    Custom {
        f: fn(f64) -> f64,
        df: fn(f64) -> f64,
    },
}

impl CouplingFunction {
    pub fn eval(&self, mu: f64) -> f64 {
        match *self {
            Self::Power(d) => math::powf(mu, d),
            Self::Exponential => math::exp(mu),
            Self::Custom { f, .. } => f(mu),
        }
    }

    pub fn derivative(&self, mu: f64) -> f64 {
        match *self {
            Self::Power(d) => {
                if d == 0.0 {
                    0.0
                } else {
                    d * math::powf(mu, d - 1.0)
                }
            }
            Self::Exponential => math::exp(mu),
            Self::Custom { df, .. } => df(mu),
        }
    }
}

impl PartialEq for CouplingFunction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Power(a), Self::Power(b)) => a == b,
            (Self::Exponential, Self::Exponential) => true,
            (Self::Custom { f: f1, df: d1 }, Self::Custom { f: f2, df: d2 }) => {
                core::ptr::fn_addr_eq(*f1, *f2) && core::ptr::fn_addr_eq(*d1, *d2)
            }
            _ => false,
        }
    }
}

impl Default for CouplingFunction {
    fn default() -> Self {
        Self::Power(4.0)
    }
}

/// `deg(F; mu) = F'(mu) mu / F(mu)`.
pub fn degree_of_nonlinearity(coupling: &CouplingFunction, mu: f64) -> Result<f64> {
    if let CouplingFunction::Power(d) = coupling {
        return Ok(*d);
    }
    let f = coupling.eval(mu);
    if f == 0.0 || !f.is_finite() {
        return Err(Error::ZeroCoupling);
    }
    Ok(coupling.derivative(mu) * mu / f)
}

/// How the reduced diffusion and the density scale are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diffusion {
    /// `sigma` given directly. The density is normalized so that the radial
    /// solution has `mu = 1` and `Psi = 1`.
    Reduced(f64),
    /// Physical constants of `-gamma Lap mu + alpha mu = beta K`;
    /// `sigma(L) = gamma pi^2 / (alpha L^2)`.
    Physical { gamma: f64, alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Turgor pressure (wall thickness absorbed).
    pub pressure: f64,
    /// Poisson's ratio; unused in 2D.
    pub poisson: f64,
    pub coupling: CouplingFunction,
    pub diffusion: Diffusion,
    pub dim: Dim,
    /// Whether `L(t)` evolves.
    pub inflating: bool,
}

impl ModelParams {
    /// Quasi-stationary parameters with `F = mu^d` and `P = 1`.
    pub fn quasi_stationary(dim: Dim, sigma: f64, d: f64, nu: f64) -> Self {
        Self {
            pressure: 1.0,
            poisson: nu,
            coupling: CouplingFunction::Power(d),
            diffusion: Diffusion::Reduced(sigma),
            dim,
            inflating: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pressure > 0.0) {
            return Err(Error::InvalidParameter {
                name: "pressure",
                reason: "must be positive",
            });
        }
        if self.dim == Dim::Three && !(self.poisson > 0.0 && self.poisson < 1.0) {
            return Err(Error::InvalidParameter {
                name: "nu",
                reason: "must lie in (0, 1)",
            });
        }
        match self.diffusion {
            Diffusion::Reduced(s) => {
                if !(s > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "sigma",
                        reason: "must be positive",
                    });
                }
                if self.inflating {
                    return Err(Error::InvalidParameter {
                        name: "inflating",
                        reason: "an inflating run needs gamma, alpha, beta",
                    });
                }
            }
            Diffusion::Physical { gamma, alpha, beta } => {
                if !(gamma > 0.0 && alpha > 0.0 && beta > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "gamma/alpha/beta",
                        reason: "must be positive",
                    });
                }
            }
        }
        Ok(())
    }

    pub fn sigma(&self, length: f64) -> f64 {
        match self.diffusion {
            Diffusion::Reduced(s) => s,
            Diffusion::Physical { gamma, alpha, .. } => gamma * PI * PI / (alpha * length * length),
        }
    }

    /// Physical density of the radial solution, `mu^c(L)`; 1 in reduced mode.
    pub fn radial_mu(&self, length: f64) -> f64 {
        match self.diffusion {
            Diffusion::Reduced(_) => 1.0,
            Diffusion::Physical { alpha, beta, .. } => match self.dim {
                Dim::Two => beta * PI / (alpha * length),
                Dim::Three => beta * PI * PI / (alpha * length * length),
            },
        }
    }

    fn psi_normalization(&self) -> f64 {
        match self.diffusion {
            Diffusion::Reduced(_) => self.coupling.eval(1.0),
            Diffusion::Physical { .. } => 1.0,
        }
    }

    /// Extensibility `Psi` from the nondimensional density.
    pub fn psi(&self, mu: &[f64], length: f64) -> Vec<f64> {
        let scale = self.radial_mu(length);
        let norm = self.psi_normalization();
        mu.iter()
            .map(|&m| self.coupling.eval(scale * m) / norm)
            .collect()
    }

    /// `Psi^c`, the extensibility of the radial solution.
    pub fn radial_psi(&self, length: f64) -> f64 {
        self.coupling.eval(self.radial_mu(length)) / self.psi_normalization()
    }

    /// Rate scale of the linearized dynamics: `P L Psi^c` in 2D and
    /// `P L Psi^c / 2` in 3D, where the forcing terms carry that half.
    pub fn rate_prefactor(&self, length: f64) -> f64 {
        let scale = self.pressure * length * self.radial_psi(length);
        match self.dim {
            Dim::Two => scale,
            Dim::Three => 0.5 * scale,
        }
    }

    /// `deg(F; mu^c)`.
    pub fn degree(&self, length: f64) -> Result<f64> {
        degree_of_nonlinearity(&self.coupling, self.radial_mu(length))
    }
}

/// Meridional and circumferential stresses at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Stresses {
    pub sigma_s: Vec<f64>,
    pub sigma_theta: Vec<f64>,
}

/// `sigma_s = P / (2 kappa_theta)`, `sigma_theta = sigma_s (2 - kappa_s / kappa_theta)`.
pub fn stresses(profile: &WallProfile, pressure: f64) -> Stresses {
    let c = geometry::curvatures(profile);
    stresses_from_curvatures(&c.kappa_s, &c.kappa_theta, pressure)
}

pub fn stresses_from_curvatures(kappa_s: &[f64], kappa_theta: &[f64], pressure: f64) -> Stresses {
    let sigma_s: Vec<f64> = kappa_theta.iter().map(|kt| pressure / (2.0 * kt)).collect();
    let sigma_theta = sigma_s
        .iter()
        .zip(kappa_s.iter().zip(kappa_theta))
        .map(|(ss, (ks, kt))| ss * (2.0 - ks / kt))
        .collect();
    Stresses {
        sigma_s,
        sigma_theta,
    }
}

/// `(Lambda1, Lambda2)` at one point, given `h = P L Psi / 2`, `Icosin` and `dphi`.
///
/// `Lambda1` is kept in the factored form `J (J u - 1)(J u - 1 + 2 nu)` so that
/// it vanishes to rounding wherever `J u = 1`, as on the sphere.
#[inline]
pub(crate) fn lambda_pair(h: f64, nu: f64, icosin: f64, dphi: f64) -> (f64, f64) {
    let ju = icosin * dphi;
    let l1 = h * icosin * (ju - 1.0) * (ju - 1.0 + 2.0 * nu);
    let l2 = h * icosin * icosin * ((2.0 - nu) - ju);
    (l1, l2)
}

/// The 3D forcing terms on the cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambdas {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
}

/// `Lambda1 = (P L Psi / 2) [(1-2nu) J + 2(nu-1) J^2 u + J^3 u^2]` and
/// `Lambda2 = (P L Psi / 2) [(2-nu) J^2 - J^3 u]` with `J = Icosin`, `u = dphi`,
/// evaluated at the cell centres. `psi` lives on the cells.
pub fn lambdas(profile: &WallProfile, psi: &[f64], params: &ModelParams) -> Result<Lambdas> {
    let n = profile.grid().cells();
    if psi.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: psi.len(),
        });
    }
    let j = geometry::icosin_centers(profile)?;
    let half_pl = 0.5 * params.pressure * profile.length();
    let (lambda1, lambda2) = (0..n)
        .map(|c| lambda_pair(half_pl * psi[c], params.poisson, j[c], profile.dphi()[c]))
        .unzip();
    Ok(Lambdas { lambda1, lambda2 })
}

/// Normal and tangential wall velocities at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocities {
    pub v_n: Vec<f64>,
    pub v_tau: Vec<f64>,
}

/// Recovers the velocity field from the constitutive relations.
///
/// 3D: `v_tau = L sin(phi) int_0^x Lambda1 / sin(phi)` solves the tangential
/// equation with `v_tau(0) = 0`, and `v_n = L Lambda2 - cot(phi) v_tau`, written
/// as `L (Lambda2 - cos(phi) int_0^x Lambda1/sin(phi))` to stay regular at the
/// poles. 2D: `v_tau = 0`, `v_n = P Psi / kappa^2`. Diagnostic only.
pub fn recover_velocities(
    profile: &WallProfile,
    psi: &[f64],
    params: &ModelParams,
) -> Result<Velocities> {
    let n = profile.grid().cells();
    if psi.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: psi.len(),
        });
    }
    let l = profile.length();
    let psi_nodes = to_nodes(psi);
    let u_nodes = profile.dphi_nodes();
    if params.dim == Dim::Two {
        let v_n = psi_nodes
            .iter()
            .zip(&u_nodes)
            .map(|(p, u)| params.pressure * p * l * l / (u * u))
            .collect();
        return Ok(Velocities {
            v_n,
            v_tau: alloc::vec![0.0; n + 1],
        });
    }
    let phi = profile.phi_nodes();
    let j = geometry::icosin_nodes(profile)?;
    let half_pl = 0.5 * params.pressure * l;
    let last = n;
    let (l1, l2): (Vec<f64>, Vec<f64>) = (0..=last)
        .map(|i| lambda_pair(half_pl * psi_nodes[i], params.poisson, j[i], u_nodes[i]))
        .unzip();
    // Lambda1 = O(x^2) at the poles, so Lambda1 / sin(phi) -> 0 there.
    let ratio: Vec<f64> = (0..=last)
        .map(|i| {
            if i == 0 || i == last {
                0.0
            } else {
                l1[i] / math::sin(phi[i])
            }
        })
        .collect();
    let dx = profile.grid().dx();
    let mut integral = Vec::with_capacity(last + 1);
    let mut acc = 0.0;
    integral.push(0.0);
    for w in ratio.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        integral.push(acc);
    }
    let v_tau = (0..=last)
        .map(|i| l * math::sin(phi[i]) * integral[i])
        .collect();
    let v_n = (0..=last)
        .map(|i| l * (l2[i] - math::cos(phi[i]) * integral[i]))
        .collect();
    Ok(Velocities { v_n, v_tau })
}

/// Meridional and circumferential strain rates.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainRates {
    pub meridional: Vec<f64>,
    pub circumferential: Vec<f64>,
}

/// Kinematic strain rates of a velocity field at the interior nodes `1..=m`:
/// `v_n kappa_s + d v_tau / ds` and `v_n kappa_theta + v_tau cos(phi) / r`.
pub fn kinematic_strain_rates(profile: &WallProfile, v: &Velocities) -> StrainRates {
    let c = geometry::curvatures(profile);
    let phi = profile.phi_nodes();
    let ic = geometry::icos(profile);
    let l = profile.length();
    let dx = profile.grid().dx();
    let m = profile.grid().m();
    let mut meridional = Vec::with_capacity(m);
    let mut circumferential = Vec::with_capacity(m);
    for i in 1..=m {
        let dvds = (v.v_tau[i + 1] - v.v_tau[i - 1]) / (2.0 * dx * l);
        meridional.push(v.v_n[i] * c.kappa_s[i] + dvds);
        circumferential
            .push(v.v_n[i] * c.kappa_theta[i] + v.v_tau[i] * math::cos(phi[i]) / (l * ic[i]));
    }
    StrainRates {
        meridional,
        circumferential,
    }
}

/// Constitutive strain rates `Psi (sigma_s - nu sigma_theta)` and
/// `Psi (sigma_theta - nu sigma_s)` at the interior nodes `1..=m`.
pub fn constitutive_strain_rates(
    profile: &WallProfile,
    psi: &[f64],
    params: &ModelParams,
) -> StrainRates {
    let s = stresses(profile, params.pressure);
    let psi_nodes = to_nodes(psi);
    let nu = params.poisson;
    let m = profile.grid().m();
    let meridional = (1..=m)
        .map(|i| psi_nodes[i] * (s.sigma_s[i] - nu * s.sigma_theta[i]))
        .collect();
    let circumferential = (1..=m)
        .map(|i| psi_nodes[i] * (s.sigma_theta[i] - nu * s.sigma_s[i]))
        .collect();
    StrainRates {
        meridional,
        circumferential,
    }
}
