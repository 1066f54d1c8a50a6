//! Inflating spheroid whose axes grow with the Gaussian curvature at the tips:
//! `da/dt = 1/c^2`, `dc/dt = c^2/a^4`, with `a^-3 - c^-3` conserved.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidState {
    /// Equatorial semi-axis.
    pub a: f64,
    /// Polar semi-axis.
    pub c: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Cigar,
    Flat,
    Sphere,
}

impl Shape {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Cigar => "cigar",
            Self::Flat => "flat",
            Self::Sphere => "sphere",
        }
    }
}

pub const SPHERE_BAND: f64 = 1e-12;
pub const DEFAULT_CEILING: f64 = 100.0;

impl EllipsoidState {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && c > 0.0) || !a.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "a/c",
                reason: "semi-axes must be positive",
            });
        }
        Ok(Self { a, c, t: 0.0 })
    }

    fn rhs(a: f64, c: f64) -> (f64, f64) {
        (1.0 / (c * c), c * c / (a * a * a * a))
    }
}

/// `delta = a^-3 - c^-3`.
pub fn invariant(s: &EllipsoidState) -> f64 {
    1.0 / (s.a * s.a * s.a) - 1.0 / (s.c * s.c * s.c)
}

pub fn classify(s: &EllipsoidState) -> Shape {
    let delta = invariant(s);
    if delta > SPHERE_BAND {
        Shape::Cigar
    } else if delta < -SPHERE_BAND {
        Shape::Flat
    } else {
        Shape::Sphere
    }
}

/// One classical RK4 step.
pub fn flow(s: &EllipsoidState, dt: f64) -> EllipsoidState {
    let (a, c) = (s.a, s.c);
    let (k1a, k1c) = EllipsoidState::rhs(a, c);
    let (k2a, k2c) = EllipsoidState::rhs(a + 0.5 * dt * k1a, c + 0.5 * dt * k1c);
    let (k3a, k3c) = EllipsoidState::rhs(a + 0.5 * dt * k2a, c + 0.5 * dt * k2c);
    let (k4a, k4c) = EllipsoidState::rhs(a + dt * k3a, c + dt * k3c);
    EllipsoidState {
        a: a + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        c: c + dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c),
        t: s.t + dt,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<EllipsoidState>,
    /// Time at which `c` crossed the ceiling, if it did.
    pub blow_up: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &EllipsoidState {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    /// Largest `|delta(t) - delta(0)|`.
    pub fn invariant_drift(&self) -> f64 {
        let d0 = invariant(&self.states[0]);
        self.states
            .iter()
            .map(|s| math::abs(invariant(s) - d0))
            .fold(0.0, f64::max)
    }
}

/// Fixed-step RK4 up to `t_end`, stopping early once `c >= ceiling`.
pub fn integrate(start: EllipsoidState, dt: f64, t_end: f64, ceiling: f64) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end >= start.t) {
        return Err(Error::InvalidParameter {
            name: "dt/t_end",
            reason: "need dt > 0 and t_end >= t0",
        });
    }
    let steps = math::ceil((t_end - start.t) / dt - 1e-9) as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start);
    let mut s = start;
    for i in 0..steps {
        let h = if i + 1 == steps { t_end - s.t } else { dt };
        let next = flow(&s, h);
        if !(next.c < ceiling) || !next.c.is_finite() {
            let frac = if next.c.is_finite() {
                (ceiling - s.c) / (next.c - s.c)
            } else {
                0.5
            };
            let time = s.t + frac.clamp(0.0, 1.0) * h;
            return Ok(Trajectory {
                states,
                blow_up: Some(time),
            });
        }
        s = next;
        states.push(s);
    }
    Ok(Trajectory {
        states,
        blow_up: None,
    })
}

/// `da/dt = (a^-3 - delta)^(2/3)` by RK4, sampled at every step.
pub fn integrate_reduced(a0: f64, delta: f64, dt: f64, t_end: f64) -> Result<Vec<(f64, f64)>> {
    if !(dt > 0.0) || !(a0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "a0/dt",
            reason: "must be positive",
        });
    }
    let f = |a: f64| {
        let base = 1.0 / (a * a * a) - delta;
        // clamp: the flow stalls exactly at a = delta^(-1/3)
        let base = if base > 0.0 { base } else { 0.0 };
        math::powf(base, 2.0 / 3.0)
    };
    let steps = math::ceil(t_end / dt - 1e-9) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut t, mut a) = (0.0, a0);
    out.push((t, a));
    for i in 0..steps {
        let h = if i + 1 == steps { t_end - t } else { dt };
        let k1 = f(a);
        let k2 = f(a + 0.5 * h * k1);
        let k3 = f(a + 0.5 * h * k2);
        let k4 = f(a + h * k3);
        a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        out.push((t, a));
    }
    Ok(out)
}
