//! Truncated Taylor series in time with a first-order tangent direction.
//!
//! A [`Jet`] holds the Taylor coefficients `a₀ + a₁s + a₂s² + …` of a
//! quantity along the closed-loop flow, up to a truncation order. Each
//! coefficient carries a tangent part (a dual number), so evaluating a
//! stage expression on jets yields both its time derivatives and its
//! directional derivative along a seeded state perturbation.
//!
//! Constants have unbounded order; every arithmetic operation truncates to
//! the smaller order of its operands.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest Taylor order a jet can carry.
pub const MAX_ORDER: usize = 8;
const LEN: usize = MAX_ORDER + 1;
const UNBOUNDED: usize = usize::MAX;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Dual {
    re: f64,
    eps: f64,
}

impl Dual {
    const ZERO: Dual = Dual { re: 0.0, eps: 0.0 };

    fn mul(self, o: Dual) -> Dual {
        Dual {
            re: self.re * o.re,
            eps: self.re * o.eps + self.eps * o.re,
        }
    }

    fn add(self, o: Dual) -> Dual {
        Dual {
            re: self.re + o.re,
            eps: self.eps + o.eps,
        }
    }

    fn sub(self, o: Dual) -> Dual {
        Dual {
            re: self.re - o.re,
            eps: self.eps - o.eps,
        }
    }

    fn div(self, o: Dual) -> Dual {
        let re = self.re / o.re;
        Dual {
            re,
            eps: (self.eps - re * o.eps) / o.re,
        }
    }

    fn scale(self, s: f64) -> Dual {
        Dual {
            re: self.re * s,
            eps: self.eps * s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    c: [Dual; LEN],
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        let mut c = [Dual::ZERO; LEN];
        c[0].re = value;
        Self {
            order: UNBOUNDED,
            c,
        }
    }

    /// Order-0 jet: a plain value with a tangent.
    pub fn point(value: f64, tangent: f64) -> Self {
        let mut c = [Dual::ZERO; LEN];
        c[0] = Dual {
            re: value,
            eps: tangent,
        };
        Self { order: 0, c }
    }

    /// Jet with the given Taylor coefficients and zero tangent.
    pub fn from_coefficients(coeffs: &[f64]) -> Self {
        assert!(
            !coeffs.is_empty() && coeffs.len() <= LEN,
            "jets carry between 1 and {LEN} coefficients"
        );
        let mut c = [Dual::ZERO; LEN];
        for (slot, v) in c.iter_mut().zip(coeffs) {
            slot.re = *v;
        }
        Self {
            order: coeffs.len() - 1,
            c,
        }
    }

    /// Truncation order; `None` for constants.
    pub fn order(&self) -> Option<usize> {
        (self.order != UNBOUNDED).then_some(self.order)
    }

    fn top(&self) -> usize {
        self.order.min(MAX_ORDER)
    }

    pub fn value(&self) -> f64 {
        self.c[0].re
    }

    /// Directional derivative of the value along the seeded tangent.
    pub fn tangent(&self) -> f64 {
        self.c[0].eps
    }

    /// Taylor coefficient `k` (the k-th time derivative divided by k!).
    pub fn coefficient(&self, k: usize) -> f64 {
        if k > self.top() {
            0.0
        } else {
            self.c[k].re
        }
    }

    /// k-th time derivative.
    pub fn derivative_value(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coefficient(k) * fact
    }

    /// Sets coefficient `k` (value and tangent) and raises the order to `k`.
    pub(crate) fn extend(&mut self, k: usize, value: f64, tangent: f64) {
        debug_assert!(k == self.order + 1 && k <= MAX_ORDER);
        self.c[k] = Dual {
            re: value,
            eps: tangent,
        };
        self.order = k;
    }

    pub(crate) fn coefficient_tangent(&self, k: usize) -> f64 {
        if k > self.top() {
            0.0
        } else {
            self.c[k].eps
        }
    }

    /// Time derivative of the series; the order drops by one.
    pub fn derivative(&self) -> Jet {
        if self.order == UNBOUNDED {
            return Jet::constant(0.0);
        }
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut c = [Dual::ZERO; LEN];
        for (k, ck) in c.iter_mut().enumerate().take(self.order) {
            *ck = self.c[k + 1].scale((k + 1) as f64);
        }
        Jet {
            order: self.order - 1,
            c,
        }
    }

    fn with_order(order: usize) -> Jet {
        Jet {
            order,
            c: [Dual::ZERO; LEN],
        }
    }

    pub fn sin(self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(self) -> Jet {
        self.sin_cos().1
    }

    /// Series sine and cosine by the coupled recurrences
    /// `k sₖ = Σ j aⱼ c₍ₖ₋ⱼ₎`, `k cₖ = −Σ j aⱼ s₍ₖ₋ⱼ₎`.
    pub fn sin_cos(self) -> (Jet, Jet) {
        let mut s = Jet::with_order(self.order);
        let mut co = Jet::with_order(self.order);
        let a0 = self.c[0];
        s.c[0] = Dual {
            re: a0.re.sin(),
            eps: a0.eps * a0.re.cos(),
        };
        co.c[0] = Dual {
            re: a0.re.cos(),
            eps: -a0.eps * a0.re.sin(),
        };
        for k in 1..=self.top() {
            let mut ds = Dual::ZERO;
            let mut dc = Dual::ZERO;
            for j in 1..=k {
                let ja = self.c[j].scale(j as f64);
                ds = ds.add(ja.mul(co.c[k - j]));
                dc = dc.sub(ja.mul(s.c[k - j]));
            }
            s.c[k] = ds.scale(1.0 / k as f64);
            co.c[k] = dc.scale(1.0 / k as f64);
        }
        (s, co)
    }

    pub fn exp(self) -> Jet {
        let mut e = Jet::with_order(self.order);
        let a0 = self.c[0];
        let ea = a0.re.exp();
        e.c[0] = Dual {
            re: ea,
            eps: a0.eps * ea,
        };
        for k in 1..=self.top() {
            let mut acc = Dual::ZERO;
            for j in 1..=k {
                acc = acc.add(self.c[j].scale(j as f64).mul(e.c[k - j]));
            }
            e.c[k] = acc.scale(1.0 / k as f64);
        }
        e
    }

    pub fn powi(self, n: u32) -> Jet {
        (0..n).fold(Jet::constant(1.0), |acc, _| acc * self)
    }
}

impl Add for Jet {
    type Output = Jet;

    fn add(self, o: Jet) -> Jet {
        let mut r = Jet::with_order(self.order.min(o.order));
        for k in 0..=r.top() {
            r.c[k] = self.c[k].add(o.c[k]);
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;

    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;

    fn neg(mut self) -> Jet {
        for k in 0..=self.top() {
            self.c[k] = self.c[k].scale(-1.0);
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;

    // Cauchy product; the index arithmetic is not jet arithmetic
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: Jet) -> Jet {
        let mut r = Jet::with_order(self.order.min(o.order));
        for k in 0..=r.top() {
            let mut acc = Dual::ZERO;
            for j in 0..=k {
                acc = acc.add(self.c[j].mul(o.c[k - j]));
            }
            r.c[k] = acc;
        }
        r
    }
}

impl Div for Jet {
    type Output = Jet;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        let mut r = Jet::with_order(self.order.min(o.order));
        for k in 0..=r.top() {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc = acc.sub(o.c[j].mul(r.c[k - j]));
            }
            r.c[k] = acc.div(o.c[0]);
        }
        r
    }
}

impl Add<f64> for Jet {
    type Output = Jet;

    fn add(mut self, s: f64) -> Jet {
        self.c[0].re += s;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;

    fn sub(self, s: f64) -> Jet {
        self + (-s)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;

    fn mul(mut self, s: f64) -> Jet {
        for k in 0..=self.top() {
            self.c[k] = self.c[k].scale(s);
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;

    fn div(self, s: f64) -> Jet {
        self * (1.0 / s)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;

    fn mul(self, j: Jet) -> Jet {
        j * self
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;

    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;

    fn sub(self, j: Jet) -> Jet {
        -j + self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn time_series(t: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = t;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Jet::from_coefficients(&coeffs)
    }

    #[test]
    fn sine_derivatives_match_closed_form() {
        let t = 0.7;
        let s = (2.0 * time_series(t, 5)).sin();
        for k in 0..=5 {
            let expected =
                2f64.powi(k as i32) * (2.0 * t + k as f64 * std::f64::consts::FRAC_PI_2).sin();
            assert!((s.derivative_value(k) - expected).abs() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn quotient_and_exp_derivatives() {
        let t = 0.3;
        let x = time_series(t, 3);
        // d/dt (e^t / (1 + t)) = e^t t / (1 + t)^2
        let q = x.exp() / (x + 1.0);
        let expected = t.exp() * t / (1.0 + t).powi(2);
        assert!((q.derivative_value(1) - expected).abs() < 1e-12);
    }

    #[test]
    fn tangent_is_directional_derivative() {
        // f(x) = x sin x, f'(x) = sin x + x cos x
        let x = Jet::point(1.3, 1.0);
        let f = x * x.sin();
        assert!((f.tangent() - (1.3f64.sin() + 1.3 * 1.3f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn order_is_the_minimum() {
        let a = time_series(0.0, 4);
        let b = time_series(0.0, 2);
        assert_eq!((a * b).order(), Some(2));
        assert_eq!((a * Jet::constant(2.0)).order(), Some(4));
        assert_eq!(a.derivative().order(), Some(3));
        assert_eq!(Jet::constant(3.0).order(), None);
    }

    #[test]
    fn powi_matches_product() {
        let x = time_series(1.5, 3);
        let p = x.powi(3);
        assert!((p.derivative_value(1) - 3.0 * 1.5f64.powi(2)).abs() < 1e-12);
        assert!((p.derivative_value(3) - 6.0).abs() < 1e-12);
    }
}
