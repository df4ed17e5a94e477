//! Real arguments of exponential sums and exact reduction of `α·n` mod 1.
//!
//! A finite `f64` is a dyadic rational, so `frac(α·n)` is held exactly as a
//! 128-bit fixed-point fraction of a turn. Rational inputs `p/q` reduce
//! `p·n mod q` in integer arithmetic. Either way no trigonometric function is
//! ever called with a large argument.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::arith::gcd;
use crate::error::{Error, Result};

/// Steps between exact resynchronisations of an incremental phase walk.
pub const RESYNC_INTERVAL: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    Real(f64),
    Rational { num: i64, den: u64 },
    /// A phase known exactly mod 1, e.g. an integer multiple of a real α.
    Fixed(Turns),
}

/// Fraction of a turn in units of 2^-128.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turns(pub u128);

impl Turns {
    pub fn from_f64(x: f64) -> Turns {
        if x == 0.0 || !x.is_finite() {
            return Turns(0);
        }
        let bits = x.abs().to_bits();
        let exp_bits = ((bits >> 52) & 0x7ff) as i32;
        let frac_bits = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_bits == 0 {
            (frac_bits, -1074)
        } else {
            (frac_bits | (1u64 << 52), exp_bits - 1075)
        };
        let shift = exp + 128;
        let mag = if shift >= 128 {
            0
        } else if shift >= 0 {
            (mantissa as u128).wrapping_shl(shift as u32)
        } else if shift > -64 {
            let s = (-shift) as u32;
            ((mantissa as u128) + (1u128 << (s - 1))) >> s
        } else {
            0
        };
        if x < 0.0 {
            Turns(mag.wrapping_neg())
        } else {
            Turns(mag)
        }
    }

    #[inline]
    pub fn mul_int(self, n: i128) -> Turns {
        Turns(self.0.wrapping_mul(n as u128))
    }

    #[inline]
    pub fn add(self, other: Turns) -> Turns {
        Turns(self.0.wrapping_add(other.0))
    }

    /// Signed fraction in `[-1/2, 1/2)`.
    #[inline]
    pub fn to_signed_f64(self) -> f64 {
        (self.0 as i128) as f64 * (1.0 / 2f64.powi(128))
    }

    /// Fraction in `[0, 1)`.
    pub fn to_unit_f64(self) -> f64 {
        let v = self.0 as f64 * (1.0 / 2f64.powi(128));
        if v >= 1.0 {
            0.0
        } else {
            v
        }
    }

    #[inline]
    pub fn cis(self) -> Complex64 {
        e_of(self.to_signed_f64())
    }
}

/// `e(x) = exp(2πix)` for a small argument.
#[inline]
pub fn e_of(x: f64) -> Complex64 {
    let (s, c) = (TAU * x).sin_cos();
    Complex64::new(c, s)
}

impl Alpha {
    pub fn rational(num: i64, den: u64) -> Result<Alpha> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let g = gcd(num.unsigned_abs(), den).max(1);
        Ok(Alpha::Rational {
            num: num / g as i64,
            den: den / g,
        })
    }

    pub fn real(x: f64) -> Result<Alpha> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite, got {x}")));
        }
        Ok(Alpha::Real(x))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Alpha::Real(x) => x,
            Alpha::Rational { num, den } => num as f64 / den as f64,
            Alpha::Fixed(t) => t.to_signed_f64(),
        }
    }

    pub fn is_finite(self) -> bool {
        match self {
            Alpha::Real(x) => x.is_finite(),
            Alpha::Rational { .. } | Alpha::Fixed(_) => true,
        }
    }

    pub fn neg(self) -> Alpha {
        match self {
            Alpha::Real(x) => Alpha::Real(-x),
            Alpha::Rational { num, den } => Alpha::Rational { num: -num, den },
            Alpha::Fixed(t) => Alpha::Fixed(Turns(t.0.wrapping_neg())),
        }
    }

    /// `k·α` reduced mod 1, exactly.
    pub fn scale(self, k: i64) -> Alpha {
        match self {
            Alpha::Real(x) => Alpha::Fixed(Turns::from_f64(x).mul_int(k as i128)),
            Alpha::Fixed(t) => Alpha::Fixed(t.mul_int(k as i128)),
            Alpha::Rational { num, den } => {
                let r = ((num as i128 * k as i128).rem_euclid(den as i128)) as i64;
                Alpha::Rational { num: r, den }
            }
        }
    }

    /// `frac(α·n)` in `[0, 1)`, reduced exactly before rounding to `f64`.
    pub fn frac_at(self, n: i128) -> f64 {
        match self {
            Alpha::Real(x) => Turns::from_f64(x).mul_int(n).to_unit_f64(),
            Alpha::Fixed(t) => t.mul_int(n).to_unit_f64(),
            Alpha::Rational { num, den } => {
                let r = (num as i128 * n).rem_euclid(den as i128);
                r as f64 / den as f64
            }
        }
    }

    /// Distance from `α·n` to the nearest integer, in `[0, 1/2]`.
    pub fn dist_to_int_at(self, n: i128) -> f64 {
        let f = self.frac_at(n);
        f.min(1.0 - f)
    }

    /// `e(α·n)`.
    pub fn e_at(self, n: i128) -> Complex64 {
        match self {
            Alpha::Real(x) => Turns::from_f64(x).mul_int(n).cis(),
            Alpha::Fixed(t) => t.mul_int(n).cis(),
            Alpha::Rational { num, den } => {
                let d = den as i128;
                let mut r = (num as i128 * n).rem_euclid(d);
                if 2 * r >= d {
                    r -= d;
                }
                e_of(r as f64 / den as f64)
            }
        }
    }

    /// Incremental `e(α·n)` for `n = start, start + 1, ...`.
    pub fn walk(self, start: i128) -> PhaseWalker {
        PhaseWalker {
            alpha: self,
            n: start,
            current: self.e_at(start),
            step: self.e_at(1),
            since_sync: 0,
        }
    }

    /// `true` when α is an integer.
    pub fn is_integral(self) -> bool {
        match self {
            Alpha::Real(x) => x.fract() == 0.0,
            Alpha::Rational { den, .. } => den == 1,
            Alpha::Fixed(t) => t.0 == 0,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Real(x) => write!(f, "{x}"),
            Alpha::Rational { num, den } => write!(f, "{num}/{den}"),
            Alpha::Fixed(t) => write!(f, "{}", t.to_signed_f64()),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Alpha> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let num: i64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad numerator in {s:?}")))?;
            let den: u64 = q
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad denominator in {s:?}")))?;
            return Alpha::rational(num, den);
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::Domain(format!("cannot parse alpha {s:?}")))?;
        Alpha::real(x)
    }
}

/// Multiplies by `e(α)` each step and snaps back to the exact phase every
/// [`RESYNC_INTERVAL`] steps, which keeps the drift below 1e-9.
#[derive(Clone, Debug)]
pub struct PhaseWalker {
    alpha: Alpha,
    n: i128,
    current: Complex64,
    step: Complex64,
    since_sync: usize,
}

impl Iterator for PhaseWalker {
    type Item = Complex64;

    #[inline]
    fn next(&mut self) -> Option<Complex64> {
        let out = self.current;
        self.n += 1;
        self.since_sync += 1;
        if self.since_sync == RESYNC_INTERVAL {
            self.since_sync = 0;
            self.current = self.alpha.e_at(self.n);
        } else {
            self.current *= self.step;
        }
        Some(out)
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: f64,
    im: f64,
    cre: f64,
    cim: f64,
}

#[inline]
fn two_sum(acc: &mut f64, comp: &mut f64, x: f64) {
    let t = *acc + x;
    if acc.abs() >= x.abs() {
        *comp += (*acc - t) + x;
    } else {
        *comp += (x - t) + *acc;
    }
    *acc = t;
}

impl ComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        two_sum(&mut self.re, &mut self.cre, z.re);
        two_sum(&mut self.im, &mut self.cim, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.cre, self.im + self.cim)
    }
}

/// Neumaier-compensated real sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut acc, mut comp) = (0.0, 0.0);
    for x in xs {
        two_sum(&mut acc, &mut comp, x);
    }
    acc + comp
}
