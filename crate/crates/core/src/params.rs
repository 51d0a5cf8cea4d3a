//! Physical parameters in natural units (hbar = c = 1).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.0;
pub const C: f64 = 1.0;

/// Rest mass together with the quantities it fixes.
///
/// The internal time `tau0` is the de Broglie period `2*pi*hbar / (m0 c^2)`,
/// so `tau0 * m0 == 2*pi` and the energy and time gaps are complementary:
/// `energy_gap * time_gap == 4 h = 8*pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysParams {
    pub m0: f64,
    pub hbar: f64,
    pub c: f64,
    pub tau0: f64,
    pub energy_gap: f64,
    pub time_gap: f64,
}

impl PhysParams {
    pub fn new(m0: f64) -> Result<Self> {
        if !m0.is_finite() {
            return Err(Error::NonFinite("m0"));
        }
        if m0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rest mass must be positive, got {m0}"
            )));
        }
        let tau0 = 2.0 * PI * HBAR / (m0 * C * C);
        Ok(Self {
            m0,
            hbar: HBAR,
            c: C,
            tau0,
            energy_gap: 2.0 * m0 * C * C,
            time_gap: 2.0 * tau0,
        })
    }

    /// Rest energy `m0 c^2`.
    pub fn rest_energy(&self) -> f64 {
        self.m0 * self.c * self.c
    }

    /// de Broglie period, identical to `tau0`.
    pub fn de_broglie_period(&self) -> f64 {
        self.tau0
    }

    /// Spacetime interval constant `s0 = c * tau0`.
    pub fn s0(&self) -> f64 {
        self.c * self.tau0
    }

    /// `E(p) = sqrt((c p)^2 + (m0 c^2)^2)` for a momentum magnitude squared.
    pub fn energy(&self, p2: f64) -> f64 {
        (self.c * self.c * p2 + self.rest_energy().powi(2)).sqrt()
    }

    /// `tau(r) = sqrt((r / c)^2 + tau0^2)` for a radius squared.
    pub fn time_level(&self, r2: f64) -> f64 {
        (r2 / (self.c * self.c) + self.tau0 * self.tau0).sqrt()
    }
}
