//! Truncated Taylor series (`c[k] = f^(k)(x0) / k!`) with the handful of
//! operations the test-function derivatives need.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Jet(pub Vec<f64>);

impl Jet {
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    /// Cauchy product truncated to the shorter order.
    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.order().min(other.order());
        Jet((0..=n)
            .map(|k| (0..=k).map(|i| self.0[i] * other.0[k - i]).sum())
            .collect())
    }

    /// `exp(f - f(x0))`; the caller carries `e^f(x0)` separately, which keeps
    /// the coefficients in range when `f(x0)` is very negative.
    pub fn exp_shifted(&self) -> Jet {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = 1.0;
        for m in 1..=n {
            let s: f64 = (1..=m).map(|k| k as f64 * self.0[k] * e[m - k]).sum();
            e[m] = s / m as f64;
        }
        Jet(e)
    }

    /// `sqrt(f)` for `f(x0) > 0`.
    pub fn sqrt(&self) -> Jet {
        let n = self.order();
        let mut s = vec![0.0; n + 1];
        s[0] = self.0[0].sqrt();
        for m in 1..=n {
            let cross: f64 = (1..m).map(|k| s[k] * s[m - k]).sum();
            s[m] = (self.0[m] - cross) / (2.0 * s[0]);
        }
        Jet(s)
    }

    /// `(x0 + h)^d`.
    pub fn power(x0: f64, d: u32, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        let mut binom = 1.0;
        for (k, ck) in c.iter_mut().enumerate().take(d as usize + 1) {
            if k > 0 {
                binom *= f64::from(d - k as u32 + 1) / k as f64;
            }
            *ck = binom * x0.powi((d - k as u32) as i32);
        }
        Jet(c)
    }

    /// `k!` times the `k`-th coefficient, i.e. the `k`-th derivative at `x0`,
    /// returned as `(sign, ln|value|)`.
    pub fn ln_derivative(&self, k: usize) -> (i8, f64) {
        let c = self.0[k];
        if c == 0.0 {
            return (0, f64::NEG_INFINITY);
        }
        let ln_fact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
        (if c > 0.0 { 1 } else { -1 }, c.abs().ln() + ln_fact)
    }
}
