//! The exponent pair (p, p̂) with 1/p + 1/p̂ = 1.

use crate::error::TreeError;

/// A validated exponent `p` together with its conjugate `p̂ = p/(p-1)`.
///
/// Validated entry points restrict `p` to `[1.01, 100]`: conjugate-exponent
/// arithmetic degrades quickly outside that window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent {
    p: f64,
    p_hat: f64,
}

impl PExponent {
    pub const MIN_P: f64 = 1.01;
    pub const MAX_P: f64 = 100.0;

    pub fn new(p: f64) -> Result<Self, TreeError> {
        if !p.is_finite() || !(Self::MIN_P..=Self::MAX_P).contains(&p) {
            return Err(TreeError::BadParameter {
                name: "p",
                value: p,
                range: "[1.01, 100]",
            });
        }
        Ok(Self {
            p,
            p_hat: p / (p - 1.0),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The conjugate exponent p̂ = p/(p-1); satisfies (p̂-1)(p-1) = 1.
    pub fn conjugate(&self) -> f64 {
        self.p_hat
    }
}
