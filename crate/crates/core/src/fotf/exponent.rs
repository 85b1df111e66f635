use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_integer::Integer;

/// A non-negative rational power of `s`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    num: u32,
    den: u32,
}

impl Exponent {
    pub const ZERO: Exponent = Exponent { num: 0, den: 1 };
    pub const ONE: Exponent = Exponent { num: 1, den: 1 };

    /// Builds `num/den` reduced to lowest terms.
    ///
    /// Panics if `den == 0`.
    pub fn new(num: u32, den: u32) -> Self {
        assert!(den > 0, "exponent denominator must be positive");
        let g = num.gcd(&den);
        Exponent {
            num: num / g,
            den: den / g,
        }
    }

    pub fn integer(n: u32) -> Self {
        Exponent { num: n, den: 1 }
    }

    pub fn numer(self) -> u32 {
        self.num
    }

    pub fn denom(self) -> u32 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Best rational approximation of `x >= 0` with denominator at most
    /// `max_den`, by continued-fraction convergents and semiconvergents.
    pub fn approximate(x: f64, max_den: u32) -> Option<Self> {
        if !x.is_finite() || x < 0.0 || max_den == 0 {
            return None;
        }
        let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
        let mut r = x;
        let max_den = max_den as u64;
        loop {
            let a = r.floor();
            if a > u32::MAX as f64 {
                break;
            }
            let a = a as u64;
            let p2 = a * p1 + p0;
            let q2 = a * q1 + q0;
            if q2 > max_den {
                // semiconvergent with the largest admissible partial quotient
                let k = (max_den - q0) / q1;
                let (ps, qs) = (k * p1 + p0, k * q1 + q0);
                let best = if (ps as f64 / qs as f64 - x).abs() < (p1 as f64 / q1 as f64 - x).abs()
                {
                    (ps, qs)
                } else {
                    (p1, q1)
                };
                return Self::checked(best.0, best.1);
            }
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            let frac = r - a as f64;
            if frac.abs() < 1e-12 || (p1 as f64 / q1 as f64 - x).abs() < 1e-15 * x.max(1.0) {
                break;
            }
            r = 1.0 / frac;
        }
        Self::checked(p1, q1)
    }

    fn checked(p: u64, q: u64) -> Option<Self> {
        if p > u32::MAX as u64 || q == 0 || q > u32::MAX as u64 {
            return None;
        }
        Some(Exponent::new(p as u32, q as u32))
    }

    /// Integer power of `w = s^(1/n)` that this exponent maps to. `n` must be a
    /// multiple of the denominator.
    pub fn scaled_to(self, n: u32) -> u32 {
        debug_assert_eq!(n % self.den, 0);
        self.num * (n / self.den)
    }
}

impl Add for Exponent {
    type Output = Exponent;

    fn add(self, rhs: Exponent) -> Exponent {
        let l = self.den.lcm(&rhs.den);
        Exponent::new(self.num * (l / self.den) + rhs.num * (l / rhs.den), l)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Exact signed rational, used for relative degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0);
        let g = num.gcd(&den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Rational {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn difference(a: Exponent, b: Exponent) -> Self {
        let (an, ad) = (a.numer() as i64, a.denom() as i64);
        let (bn, bd) = (b.numer() as i64, b.denom() as i64);
        Rational::new(an * bd - bn * ad, ad * bd)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
