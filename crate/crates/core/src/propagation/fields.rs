use crate::geometry::GridField;
use crate::{Error, Result};

/// Pointwise nonlinearity applied to the kernel before normalisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `max(z − τ, 0)`.
    Rectifier { tau: f64 },
    /// `1 / (1 + e^{−z})`.
    Logistic,
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Nonlinearity::Rectifier { tau: 0.0 }
    }
}

impl Nonlinearity {
    pub fn rectifier(tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("rectifier threshold must be >= 0 (got {tau})")));
        }
        Ok(Nonlinearity::Rectifier { tau })
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match *self {
            Nonlinearity::Rectifier { tau } => (z - tau).max(0.0),
            Nonlinearity::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }
}

/// How the first iterate is seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// `K_1 = S(·, p0)`.
    Normalized,
    /// `K_1 = K(·, p0)`, signed, as produced by the bank.
    Raw,
}

/// `K_n^{p0}` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    pub field: GridField,
    /// Coordinates of `p0`, one per grid axis.
    pub origin: Vec<f64>,
    pub step: usize,
    pub init: InitMode,
    pub nonlinearity: Option<Nonlinearity>,
    pub truncated: bool,
}

impl KernelField {
    /// A plain kernel column `K(·, p0)` with no propagation applied.
    pub fn raw(field: GridField, origin: Vec<f64>) -> Self {
        KernelField { field, origin, step: 0, init: InitMode::Raw, nonlinearity: None, truncated: false }
    }
}

/// Lifted image activity `I_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Activation {
    pub field: GridField,
    pub step: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectifier_and_logistic() {
        let r = Nonlinearity::rectifier(0.5).unwrap();
        assert_eq!(r.apply(0.2), 0.0);
        assert_eq!(r.apply(1.5), 1.0);
        assert!(Nonlinearity::rectifier(-1.0).is_err());
        let l = Nonlinearity::Logistic;
        assert_eq!(l.apply(0.0), 0.5);
        for z in [-30.0, -1.0, 2.0, 30.0] {
            let v = l.apply(z);
            assert!(v > 0.0 && v < 1.0);
        }
    }
}
