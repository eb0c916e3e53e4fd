//! Double-double arithmetic: a value is the unevaluated sum `hi + lo` of two
//! f64 words, giving roughly 31 significant decimal digits.
//!
//! Radial ladders sample symbols at levels up to 2^50. At those levels the
//! difference of two nearly equal f64 values, such as `log(1+n) - log(n)`,
//! loses every significant digit (the true difference sits below one ulp of
//! the operands). Carrying ~106 mantissa bits through the evaluation keeps
//! difference quantities accurate to better than 1e-15 relative across the
//! whole ladder, which the convergence classifier depends on.

/// Unevaluated sum of two f64 words with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Exact sum: returns `(s, e)` with `s = fl(a+b)` and `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Exact sum assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Exact product: returns `(p, e)` with `p = fl(a*b)` and `a * b = p + e`.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

pub const LN_2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

/// Euler-Mascheroni constant, used by the harmonic-number helper.
pub const EULER_GAMMA: Dd = Dd {
    hi: 0.577_215_664_901_532_9,
    lo: -4.942_915_152_430_645e-18,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Nearest f64 to the represented value.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        if !x.is_finite() {
            return Dd { hi: x, lo: 0.0 };
        }
        let xd = Dd::from_f64(x);
        let err = (self - xd * xd).hi / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, err);
        Dd { hi, lo }
    }

    /// Largest integer not exceeding the value, exact for the whole dd range.
    pub fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f != self.hi {
            return Dd { hi: f, lo: 0.0 };
        }
        let g = self.lo.floor();
        let (hi, lo) = quick_two_sum(f, g);
        Dd { hi, lo }
    }

    #[inline]
    pub fn lt(self, other: Dd) -> bool {
        self.hi < other.hi || (self.hi == other.hi && self.lo < other.lo)
    }

    #[inline]
    pub fn min(self, other: Dd) -> Dd {
        if self.lt(other) {
            self
        } else {
            other
        }
    }

    #[inline]
    pub fn max(self, other: Dd) -> Dd {
        if self.lt(other) {
            other
        } else {
            self
        }
    }

    /// Scales by 2^k exactly (both words are shifted).
    fn ldexp(self, k: i32) -> Dd {
        let s = libm_ldexp(1.0, k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// exp via argument reduction `x = k*ln2 + r`, `exp(r) = exp(r/2^12)^(2^12)`,
    /// and a short Taylor series on the reduced argument.
    pub fn exp(self) -> Dd {
        if self.hi > 710.0 {
            return Dd {
                hi: f64::INFINITY,
                lo: 0.0,
            };
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2 * Dd::from_f64(k);
        const SHIFT: i32 = 12;
        let r = r.ldexp(-SHIFT);
        // expm1(r) by Taylor; |r| <= ln2 / 2 / 2^12 < 8.5e-5, ten terms reach ~1e-41.
        let mut term = r;
        let mut sum = r;
        for i in 2..=10 {
            term = term * r / Dd::from_f64(i as f64);
            sum = sum + term;
        }
        // Undo the scaling: (1+s)^2 - 1 = 2s + s^2, applied SHIFT times.
        let mut s = sum;
        for _ in 0..SHIFT {
            s = s + s + s * s;
        }
        (s + Dd::ONE).ldexp(k as i32)
    }

    /// Natural log via binary reduction `x = m * 2^e`, one f64 seed for
    /// `ln m`, and a dd Newton correction `ln m = y + (m*exp(-y) - 1) - c^2/2`.
    pub fn ln(self) -> Option<Dd> {
        if self.hi <= 0.0 || !self.is_finite() {
            return None;
        }
        let (m, e) = frexp(self.hi);
        // m in [0.5, 1); fold one factor of two so the mantissa lies in [1, 2).
        let (m, e) = (m * 2.0, e - 1);
        let m_dd = Dd {
            hi: m,
            lo: self.lo * libm_ldexp(1.0, -e),
        };
        let y = m.ln();
        let c = m_dd * Dd::from_f64(-y).exp() - Dd::ONE;
        let half_c2 = (c * c).ldexp(-1);
        let ln_m = Dd::from_f64(y) + c - half_c2;
        Some(LN_2 * Dd::from_f64(e as f64) + ln_m)
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: i64) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { Dd::ONE / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;

    fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = {
            let s2 = s2 + t1;
            let (hi, lo) = quick_two_sum(s1, s2);
            (hi, lo + t2)
        };
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;

    #[inline]
    fn sub(self, other: Dd) -> Dd {
        self + (-other)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;

    fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;

    fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        if !q1.is_finite() {
            return Dd { hi: q1, lo: 0.0 };
        }
        let r = self - other * Dd::from_f64(q1);
        let q2 = r.hi / other.hi;
        let r = r - other * Dd::from_f64(q2);
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

/// Decomposes a positive finite f64 into `m * 2^e` with `m` in `[0.5, 1)`.
fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    if exp_field == 0 {
        // Subnormal: rescale by 2^64 first.
        let (m, e) = frexp(x * 1.844_674_407_370_955_2e19);
        return (m, e - 64);
    }
    let e = exp_field - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e)
}

/// 2^k as f64, exact over the normal range used here.
fn libm_ldexp(x: f64, k: i32) -> f64 {
    if (-1022..=1023).contains(&k) {
        x * f64::from_bits(((k + 1023) as u64) << 52)
    } else if k > 1023 {
        x * f64::from_bits(2046u64 << 52) * libm_ldexp(1.0, k - 1023)
    } else {
        x * f64::from_bits(1) * libm_ldexp(1.0, k + 1074)
    }
}

/// Harmonic number H_n in dd: exact prefix sums for small n, Euler-Maclaurin
/// beyond (truncation error under 1e-36 past the switchover).
pub fn harmonic(n: u64) -> Dd {
    if n == 0 {
        return Dd::ZERO;
    }
    if n <= 4096 {
        let mut s = Dd::ZERO;
        for j in 1..=n {
            s = s + Dd::ONE / Dd::from_f64(j as f64);
        }
        return s;
    }
    let x = Dd::from_f64(n as f64);
    let inv = Dd::ONE / x;
    let inv2 = inv * inv;
    let inv4 = inv2 * inv2;
    // H_n = ln n + gamma + 1/(2n) - 1/(12 n^2) + 1/(120 n^4) - 1/(252 n^6)
    //       + 1/(240 n^8) - ...
    let mut s = x.ln().expect("positive") + EULER_GAMMA;
    s = s + inv.ldexp(-1);
    s = s - inv2 / Dd::from_f64(12.0);
    s = s + inv4 / Dd::from_f64(120.0);
    s = s - inv4 * inv2 / Dd::from_f64(252.0);
    s = s + inv4 * inv4 / Dd::from_f64(240.0);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn arithmetic_round_trips() {
        let a = Dd::from_f64(0.1) + Dd::from_f64(0.2);
        assert!((a.to_f64() - 0.3).abs() < 1e-16);
        let b = Dd::from_f64(3.0) / Dd::from_f64(7.0) * Dd::from_f64(7.0);
        assert!(close(b, 3.0, 1e-30));
        let c = Dd::from_f64(2.0).sqrt();
        assert!(close(c * c, 2.0, 1e-30));
    }

    #[test]
    fn exp_and_ln_are_mutually_inverse() {
        for &x in &[1e-8, 0.5, 1.0, 2.0, 10.0, 123.456, 1e10, 3e15] {
            let l = Dd::from_f64(x).ln().expect("positive argument");
            let back = l.exp();
            assert!(close(back, x, 1e-27), "ln/exp round trip failed at {x}");
        }
        let e = Dd::ONE.exp();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        let l2 = Dd::from_f64(2.0).ln().expect("positive argument");
        assert!((l2 - LN_2).to_f64().abs() < 1e-30);
    }

    #[test]
    fn log_difference_keeps_precision_at_huge_levels() {
        // n * (log(1+n) - log(n)) -> 1; at n = 2^50 plain f64 gives garbage.
        let n = (1u64 << 50) as f64;
        let a = Dd::from_f64(n + 1.0).ln().expect("positive argument");
        let b = Dd::from_f64(n).ln().expect("positive argument");
        let q = (Dd::from_f64(n) * (a - b)).to_f64();
        // True value is 1 - 1/(2n) + O(1/n^2).
        let expected = 1.0 - 0.5 / n;
        assert!(
            (q - expected).abs() < 1e-14,
            "weighted log difference lost precision: {q} vs {expected}"
        );
    }

    #[test]
    fn floor_handles_integer_hi_with_negative_lo() {
        let x = Dd {
            hi: 3.0,
            lo: -1e-30,
        };
        assert_eq!(x.floor().to_f64(), 2.0);
        let y = Dd { hi: 3.0, lo: 1e-30 };
        assert_eq!(y.floor().to_f64(), 3.0);
        assert_eq!(Dd::from_f64(-2.5).floor().to_f64(), -3.0);
    }

    #[test]
    fn harmonic_matches_prefix_sums_across_the_switchover() {
        let mut s = Dd::ZERO;
        for j in 1..=16384u64 {
            s = s + Dd::ONE / Dd::from_f64(j as f64);
            if j == 4096 || j == 4097 || j == 10000 || j == 16384 {
                let h = harmonic(j);
                assert!(
                    (h - s).to_f64().abs() < 1e-27,
                    "harmonic({j}) disagrees with direct sum"
                );
            }
        }
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        let x = Dd::from_f64(1.5);
        let mut acc = Dd::ONE;
        for _ in 0..13 {
            acc = acc * x;
        }
        assert!((x.powi(13) - acc).to_f64().abs() < 1e-25);
        let inv = x.powi(-2);
        assert!(close(inv * x * x, 1.0, 1e-30));
    }
}
