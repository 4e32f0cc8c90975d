//! Compensated floating-point accumulation.
//!
//! Identity checks in this crate are asserted to 1e-10 relative error on
//! sums with up to 10^4 terms of mixed sign, so every reduction goes
//! through a Neumaier accumulator instead of a bare `+=`.

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of terms.
pub fn sum_compensated<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// Relative gap |a - b| / max(|a|, |b|), zero when both vanish.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_beats_naive_summation() {
        // 1 + 1e-16 repeated: naive summation loses the tail entirely.
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1000.0 * 1e-16)).abs() < 1e-18);
    }

    #[test]
    fn relative_gap_handles_zero() {
        assert_eq!(relative_gap(0.0, 0.0), 0.0);
        assert!(relative_gap(1.0, 1.0 + 1e-12) < 2e-12);
    }
}
