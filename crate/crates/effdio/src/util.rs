//! Small numeric helpers.

/// Kahan compensated summation; keeps absolute error near machine epsilon
/// even for 10^7-term prefix sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// log^+(x) = max(0, ln x), with log^+(0) = 0.
#[inline]
pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_harmonic() {
        let mut k = KahanSum::new();
        let n = 2_000_000u64;
        for i in 1..=n {
            k.add(1.0 / i as f64);
        }
        // reverse-order naive sum is accurate; forward Kahan must match it tightly
        let mut rev = 0.0;
        for i in (1..=n).rev() {
            rev += 1.0 / i as f64;
        }
        assert!((k.value() - rev).abs() < 1e-11);
    }

    #[test]
    fn log_plus_clamps() {
        assert_eq!(log_plus(0.0), 0.0);
        assert_eq!(log_plus(0.5), 0.0);
        assert!((log_plus(std::f64::consts::E) - 1.0).abs() < 1e-15);
    }
}
