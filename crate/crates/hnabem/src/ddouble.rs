//! Minimal double-double (~31 significant digits) arithmetic.
//!
//! The generalized log-weight Gaussian rules are roots of a moment system
//! whose conditioning grows quickly with the point count; plain `f64` Newton
//! stalls around 1e-13 residuals well before the rules meet their moment
//! contract. Constructing the rules in double-double pushes the achievable
//! residual far below the `f64` rounding of the final nodes and weights.
//!
//! Only the operations the rule construction needs are provided: the four
//! arithmetic operations, `ln`, `exp`, and comparisons. Algorithms are the
//! classical error-free transformations (Dekker/Knuth two-sum, FMA-based
//! two-product) as used in the QD library of Hida, Li and Bailey.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Requires `|a| >= |b|` (or a = 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = f64::mul_add(a, b, -p);
    (p, e)
}

pub(crate) const LN_2: Dd = Dd {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};

/// Euler-Mascheroni constant.
pub(crate) const GAMMA: Dd = Dd {
    hi: 0.577_215_664_901_532_9,
    lo: -4.942_915_152_430_645e-18,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    /// Square root; requires a non-negative value.
    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        assert!(self.hi > 0.0, "Dd::sqrt of negative value");
        // One Newton step on the f64 root recovers full double-double
        // accuracy: y = (y0 + x/y0)/2 with y0 correct to ~1e-16.
        let y0 = Dd::from_f64(self.hi.sqrt());
        (y0 + self / y0) * Dd::from_f64(0.5)
    }

    /// Natural logarithm; requires a strictly positive value.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "Dd::ln of non-positive value");
        // One Newton correction of the f64 logarithm: with y0 = ln(hi) to
        // f64 accuracy, p = x*exp(-y0) - 1 is O(1e-16) and
        // ln x = y0 + ln(1+p) with a three-term series for ln(1+p).
        let y0 = self.hi.ln();
        let p = self * Dd::from_f64(-y0).exp() - Dd::ONE;
        let p2 = p * p;
        let corr = p - p2 * Dd::from_f64(0.5) + p2 * p * Dd::from_f64(1.0 / 3.0);
        Dd::from_f64(y0) + corr
    }

    /// Exponential, by range reduction modulo ln 2 and a Taylor series.
    pub fn exp(self) -> Dd {
        if self.hi < -746.0 {
            return Dd::ZERO;
        }
        assert!(self.hi < 709.0, "Dd::exp overflow");
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2 * Dd::from_f64(k);
        // |r| <= ln(2)/2; terms decay faster than (0.35)^i / i!.
        let mut sum = Dd::ONE + r;
        let mut term = r;
        for i in 2..40 {
            term = term * r / Dd::from_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        // 2^k is exact in f64 for the ranges reachable here.
        let scale = 2f64.powi(k as i32);
        Dd {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s2, e2) = quick_two_sum(s, e + t);
        Dd::new(s2, e2 + f)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        Dd::new(p, e + self.hi * rhs.lo + self.lo * rhs.hi)
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::new(s, e + q3)
    }
}

impl PartialOrd for Dd {
    #[inline]
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_dd_close(a: Dd, hi: f64, lo: f64, tol: f64) {
        let err = (a - Dd::new(hi, lo)).abs();
        assert!(
            err.hi < tol,
            "dd mismatch: got ({:e},{:e}), want ({hi:e},{lo:e}), err {:e}",
            a.hi,
            a.lo,
            err.hi
        );
    }

    #[test]
    fn add_captures_tiny_summand() {
        let s = Dd::from_f64(1.0) + Dd::from_f64(1e-20);
        assert_eq!(s.hi, 1.0);
        assert_eq!(s.lo, 1e-20);
    }

    #[test]
    fn mul_is_error_free_on_products() {
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60 exactly.
        let a = Dd::from_f64(1.0 + 2f64.powi(-30));
        let p = a * a;
        let exact = Dd::new(1.0 + 2f64.powi(-29), 2f64.powi(-60));
        assert_eq!(p.hi, exact.hi);
        assert_eq!(p.lo, exact.lo);
    }

    #[test]
    fn div_roundtrips() {
        let a = Dd::new(0.3333333333333333, 1.8503717077085942e-17);
        let b = Dd::from_f64(7.0);
        let q = a / b;
        assert_dd_close(q * b, a.hi, a.lo, 1e-31);
    }

    #[test]
    fn exp_one_is_e() {
        // e in double-double
        assert_dd_close(Dd::ONE.exp(), 2.718281828459045, 1.4456468917292502e-16, 1e-30);
    }

    #[test]
    fn exp_negative_reference() {
        assert_dd_close(
            Dd::from_f64(-0.3).exp(),
            0.7408182206817179,
            -1.805530505953e-18,
            1e-31,
        );
    }

    #[test]
    fn ln_reference_values() {
        assert_dd_close(Dd::from_f64(2.0).ln(), LN_2.hi, LN_2.lo, 1e-31);
        assert_dd_close(
            Dd::from_f64(10.0).ln(),
            2.302585092994046,
            -2.1707562233822494e-16,
            1e-30,
        );
        assert_dd_close(
            Dd::from_f64(0.7).ln(),
            -0.35667494393873245,
            4.82556379937662e-18,
            1e-31,
        );
    }

    #[test]
    fn sqrt_squares_back() {
        for &x in &[1e-20, 0.3, 2.0, 7.5e11] {
            let r = Dd::from_f64(x).sqrt();
            let back = r * r;
            let rel = ((back - Dd::from_f64(x)) / Dd::from_f64(x)).abs();
            assert!(rel.hi < 1e-30, "sqrt at {x}: rel {:e}", rel.hi);
        }
        assert_eq!(Dd::ZERO.sqrt().hi, 0.0);
    }

    #[test]
    fn ln_exp_roundtrip() {
        for &x in &[1e-8, 0.02, 0.5, 1.0, 3.25, 40.0, 1e5] {
            let y = Dd::from_f64(x).ln().exp();
            let rel = ((y - Dd::from_f64(x)) / Dd::from_f64(x)).abs();
            assert!(rel.hi < 1e-30, "roundtrip at {x}: rel {:e}", rel.hi);
        }
    }
}
