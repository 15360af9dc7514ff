use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical couplings of the dimer plus the derived semiclassical scales.
///
/// `n` is the conserved total polariton number. The effective Planck
/// constant of the Fock-space picture is `h = 1/n` and the rescaled
/// on-site coupling is `g' = g / sqrt(2 n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Total polariton number N.
    pub n: u32,
    /// Cavity-qubit coupling g.
    pub g: f64,
    /// Photon hopping J.
    pub j: f64,
    /// Symmetry-breaking strength applied as `eps_imb * Z` on the diagonal.
    pub eps_imb: f64,
}

impl ModelParams {
    pub fn new(n: u32, g: f64, j: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::InvalidParams(format!("g must be finite and >= 0, got {g}")));
        }
        if !(j >= 0.0) || !j.is_finite() {
            return Err(Error::InvalidParams(format!("J must be finite and >= 0, got {j}")));
        }
        Ok(Self { n, g, j, eps_imb: 0.0 })
    }

    /// Same couplings with the parity-breaking probe term switched on.
    pub fn with_eps_imb(mut self, eps_imb: f64) -> Self {
        self.eps_imb = eps_imb;
        self
    }

    /// Construct from the ratio `J/g'` at a given hopping J.
    pub fn from_j_over_gprime(n: u32, j_over_gprime: f64, j: f64) -> Result<Self> {
        if j_over_gprime <= 0.0 {
            return Err(Error::InvalidParams("J/g' must be positive".into()));
        }
        let gprime = j / j_over_gprime;
        let g = gprime * (2.0 * n as f64).sqrt();
        Self::new(n, g, j)
    }

    /// Construct from the ratio `g / (J sqrt(2N))` at a given hopping J.
    pub fn from_g_over_jsqrt2n(n: u32, ratio: f64, j: f64) -> Result<Self> {
        if ratio < 0.0 {
            return Err(Error::InvalidParams("g/(J sqrt(2N)) must be >= 0".into()));
        }
        let g = ratio * j * (2.0 * n as f64).sqrt();
        Self::new(n, g, j)
    }

    /// Effective Planck constant h = 1/N.
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Rescaled coupling g' = g / sqrt(2N).
    #[inline]
    pub fn gprime(&self) -> f64 {
        self.g / (2.0 * self.n as f64).sqrt()
    }

    #[inline]
    pub fn j_over_gprime(&self) -> f64 {
        self.j / self.gprime()
    }

    /// Critical level of the upper-upper band, `2g' - J`.
    #[inline]
    pub fn eps_c1(&self) -> f64 {
        2.0 * self.gprime() - self.j
    }

    /// Critical level of the lower-lower band, `-2g' + J`.
    #[inline]
    pub fn eps_c4(&self) -> f64 {
        -self.eps_c1()
    }
}
