//! The smooth step built from `e(u) = exp(−1/u)` and the bump profile used by every cutoff
//! and partition of unity in the crate.

/// `exp(−1/u)` for `u > 0`, zero otherwise.
fn e(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, flat to all orders at both ends.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = e(u);
    let b = e(1.0 - u);
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let a = e(u);
    let b = e(1.0 - u);
    let da = a / (u * u);
    let db = -b / ((1.0 - u) * (1.0 - u));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// Profile equal to 1 on `[0, a]` and 0 on `[b, ∞)`, smooth and nonincreasing between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpProfile {
    pub a: f64,
    pub b: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self { a: 0.25, b: 1.0 }
    }
}

impl BumpProfile {
    pub fn new(a: f64, b: f64) -> crate::Result<Self> {
        if !(0.0 < a && a < b && b.is_finite()) {
            return Err(crate::Error::InvalidParameter(format!("bump radii must satisfy 0 < a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub fn value(&self, t: f64) -> f64 {
        1.0 - smooth_step((t - self.a) / (self.b - self.a))
    }

    pub fn derivative(&self, t: f64) -> f64 {
        -smooth_step_derivative((t - self.a) / (self.b - self.a)) / (self.b - self.a)
    }

    /// Increasing version: 0 on `[0, a]`, 1 on `[b, ∞)`.
    pub fn rising(&self, t: f64) -> f64 {
        smooth_step((t - self.a) / (self.b - self.a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus() {
        let p = BumpProfile::default();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(0.25), 1.0);
        assert_eq!(p.value(1.0), 0.0);
        assert_eq!(p.value(7.0), 0.0);
        assert!(p.value(0.6) > 0.0 && p.value(0.6) < 1.0);
    }

    #[test]
    fn monotone_and_symmetric_step() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            let s = smooth_step(u);
            assert!(s >= prev);
            assert!((s + smooth_step(1.0 - u) - 1.0).abs() < 1e-15);
            prev = s;
        }
    }

    #[test]
    fn derivatives_vanish_at_the_ends() {
        let p = BumpProfile::default();
        let h = 1e-4;
        for t in [p.a, p.b] {
            let d1 = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            let d2 = (p.value(t + h) - 2.0 * p.value(t) + p.value(t - h)) / (h * h);
            assert!(d1.abs() < 1e-8, "first derivative at {t}: {d1}");
            assert!(d2.abs() < 1e-6, "second derivative at {t}: {d2}");
        }
        // analytic derivative matches differences inside
        let t = 0.6;
        let fd = (p.value(t + 1e-6) - p.value(t - 1e-6)) / 2e-6;
        assert!((fd - p.derivative(t)).abs() < 1e-6);
    }
}
