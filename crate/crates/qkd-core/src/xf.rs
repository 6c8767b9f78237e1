//! Extended-exponent floating point scalar.
//!
//! Repeated B steps square the error-pattern probabilities, so after a
//! dozen steps the interesting marginals sit around 1e-4000 while the
//! dominant entries stay near 1/2. Plain f64 flushes the tails to zero and
//! the sign of the residual rate becomes meaningless. `Xf` carries the
//! binary exponent in a separate i64 so the tails keep full f64 mantissa
//! precision at any scale this crate can reach.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value `m * 2^e`, kept normalized so that `0.5 <= |m| < 1`.
/// Zero is represented as `m == 0.0, e == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Xf {
    m: f64,
    e: i64,
}

/// Split a finite nonzero f64 into (mantissa, exponent) with mantissa in
/// [0.5, 1). Subnormals are rescaled into the normal range first.
fn frexp(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite());
    if x == 0.0 {
        return (0.0, 0);
    }
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & 0x800F_FFFF_FFFF_FFFF) | (1022u64 << 52));
    (m, raw_exp - 1022)
}

impl Xf {
    pub const ZERO: Xf = Xf { m: 0.0, e: 0 };

    pub fn new(x: f64) -> Xf {
        let (m, e) = frexp(x);
        Xf { m, e }
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    pub fn is_positive(self) -> bool {
        self.m > 0.0
    }

    /// Round back to f64, saturating to 0 or +/-inf outside its range.
    pub fn to_f64(self) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        if self.e > 1025 {
            return f64::INFINITY.copysign(self.m);
        }
        if self.e < -1200 {
            return 0.0;
        }
        let e1 = (self.e / 2) as i32;
        let e2 = (self.e - self.e / 2) as i32;
        self.m * 2f64.powi(e1) * 2f64.powi(e2)
    }

    /// Natural log of a positive value; the result always fits in f64.
    pub fn ln(self) -> f64 {
        assert!(self.m > 0.0, "ln of a non-positive Xf");
        self.m.ln() + self.e as f64 * std::f64::consts::LN_2
    }

    fn sign(self) -> i8 {
        if self.m > 0.0 {
            1
        } else if self.m < 0.0 {
            -1
        } else {
            0
        }
    }
}

impl From<f64> for Xf {
    fn from(x: f64) -> Xf {
        Xf::new(x)
    }
}

impl Add for Xf {
    type Output = Xf;
    fn add(self, rhs: Xf) -> Xf {
        if self.m == 0.0 {
            return rhs;
        }
        if rhs.m == 0.0 {
            return self;
        }
        let (hi, lo) = if self.e >= rhs.e { (self, rhs) } else { (rhs, self) };
        let gap = hi.e - lo.e;
        if gap > 120 {
            /* below one ulp of the larger operand */
            return hi;
        }
        let raw = hi.m + lo.m * 2f64.powi(-(gap as i32));
        if raw == 0.0 {
            return Xf::ZERO;
        }
        let (m, de) = frexp(raw);
        Xf { m, e: hi.e + de }
    }
}

impl Sub for Xf {
    type Output = Xf;
    fn sub(self, rhs: Xf) -> Xf {
        self + (-rhs)
    }
}

impl Neg for Xf {
    type Output = Xf;
    fn neg(self) -> Xf {
        Xf { m: -self.m, e: self.e }
    }
}

impl Mul for Xf {
    type Output = Xf;
    fn mul(self, rhs: Xf) -> Xf {
        if self.m == 0.0 || rhs.m == 0.0 {
            return Xf::ZERO;
        }
        let (m, de) = frexp(self.m * rhs.m);
        Xf { m, e: self.e + rhs.e + de }
    }
}

impl Div for Xf {
    type Output = Xf;
    fn div(self, rhs: Xf) -> Xf {
        assert!(rhs.m != 0.0, "Xf division by zero");
        if self.m == 0.0 {
            return Xf::ZERO;
        }
        let (m, de) = frexp(self.m / rhs.m);
        Xf { m, e: self.e - rhs.e + de }
    }
}

impl Mul<f64> for Xf {
    type Output = Xf;
    fn mul(self, rhs: f64) -> Xf {
        self * Xf::new(rhs)
    }
}

impl PartialOrd for Xf {
    fn partial_cmp(&self, other: &Xf) -> Option<Ordering> {
        Some((*self - *other).sign().cmp(&0))
    }
}
