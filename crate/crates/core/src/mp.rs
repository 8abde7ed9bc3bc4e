//! Arbitrary-precision real and complex arithmetic on top of `dashu-float`.
//!
//! Every value carries a binary precision; arithmetic results take the larger
//! precision of their operands, so callers bring all inputs to a common
//! working precision with [`Real::at`] first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use dashu_int::ops::{BitTest, UnsignedAbs};
use dashu_int::IBig;

use crate::whgroup::DisplacementIndex;

type Float = FBig<HalfEven, 2>;

/// Bits needed for `digits` decimal digits.
pub fn bits_for_digits(digits: usize) -> usize {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 8
}

#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn zero(bits: usize) -> Self {
        Self::from_f64(0.0, bits)
    }

    pub fn one(bits: usize) -> Self {
        Self::from_f64(1.0, bits)
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        let f = Float::try_from(x).expect("finite input");
        Self(f.with_precision(bits).value())
    }

    pub fn from_int(n: i64, bits: usize) -> Self {
        Self(Float::from(IBig::from(n)).with_precision(bits).value())
    }

    /// Parses a decimal literal such as `-0.125` or `1.5e-30`.
    pub fn from_decimal(s: &str, bits: usize) -> Option<Self> {
        let dec = DBig::from_str(s.strip_prefix('+').unwrap_or(s)).ok()?;
        let bin = dec.with_base_and_precision::<2>(bits).value();
        Some(Self(bin.with_rounding::<HalfEven>()))
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }

    /// Same value rounded (or extended) to `bits` bits.
    pub fn at(&self, bits: usize) -> Self {
        Self(self.0.clone().with_precision(bits).value())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn is_negative(&self) -> bool {
        self.0 < Float::ZERO
    }

    pub fn is_zero(&self) -> bool {
        self.0 == Float::ZERO
    }

    pub fn sqrt(&self) -> Self {
        Self(self.0.sqrt())
    }

    pub fn recip(&self) -> Self {
        Self(Float::ONE.with_precision(self.precision()).value() / self.0.clone())
    }

    pub fn div(&self, other: &Real) -> Self {
        Self(self.0.clone() / other.0.clone())
    }

    pub fn scale_int(&self, n: i64) -> Self {
        Self(self.0.clone() * Float::from(IBig::from(n)))
    }

    /// `log10 |x|`, `-inf` for zero. Accurate to double precision.
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let f = self.to_f64().abs();
        if f > 0.0 && f.is_finite() {
            return f.log10();
        }
        // Outside the f64 range: use the binary exponent.
        let (sig, exp) = self.0.repr().clone().into_parts();
        let mag = sig.unsigned_abs();
        let shift = mag.bit_len().saturating_sub(60);
        let top = u64::try_from(mag >> shift).expect("60-bit head") as f64;
        top.log10() + (shift as f64 + exp as f64) * std::f64::consts::LOG10_2
    }

    /// Signed fixed-point decimal with exactly `digits` fractional digits;
    /// negative zero prints as `+0`.
    pub fn to_fixed(&self, digits: usize) -> String {
        let bits = self.precision().max(64) + bits_for_digits(digits) + 8;
        let scale = Float::from(IBig::from(10u8).pow(digits)).with_precision(bits).value();
        let scaled = self.0.clone().with_precision(bits).value() * scale;
        let n: IBig = scaled.round().to_int().value();
        let negative = n < IBig::ZERO;
        let mag = if negative { -n } else { n }.to_string();
        let mag = if mag.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - mag.len()), mag) } else { mag };
        let (int, frac) = mag.split_at(mag.len() - digits);
        let sign = if negative { '-' } else { '+' };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// `m.mmme±x` with `frac` mantissa digits, valid far outside the f64 range.
    pub fn to_scientific(&self, frac: usize) -> String {
        if self.is_zero() {
            return format!("{:.*e}", frac, 0.0);
        }
        let mut e = self.log10_abs().floor() as i64;
        let bits = self.precision().max(64) + bits_for_digits(frac) + 8;
        let ten = IBig::from(10u8);
        for _ in 0..2 {
            let x = self.abs().at(bits).0;
            let m = if e >= 0 {
                x / Float::from(ten.pow(e as usize)).with_precision(bits).value()
            } else {
                x * Float::from(ten.pow((-e) as usize))
            };
            let text = Real(m).to_fixed(frac);
            let text = &text[1..];
            if text.starts_with("10") {
                e += 1;
                continue;
            }
            if text.starts_with('0') {
                e -= 1;
                continue;
            }
            let sign = if self.is_negative() { "-" } else { "" };
            return format!("{sign}{text}e{e}");
        }
        format!("{:.*e}", frac, self.to_f64())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for &Real {
    type Output = Real;
    fn add(self, rhs: &Real) -> Real {
        Real(&self.0 + &rhs.0)
    }
}

impl Sub for &Real {
    type Output = Real;
    fn sub(self, rhs: &Real) -> Real {
        Real(&self.0 - &rhs.0)
    }
}

impl Mul for &Real {
    type Output = Real;
    fn mul(self, rhs: &Real) -> Real {
        Real(&self.0 * &rhs.0)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Real,
    pub im: Real,
}

impl BigComplex {
    pub fn new(re: Real, im: Real) -> Self {
        Self { re, im }
    }

    pub fn zero(bits: usize) -> Self {
        Self::new(Real::zero(bits), Real::zero(bits))
    }

    pub fn one(bits: usize) -> Self {
        Self::new(Real::one(bits), Real::zero(bits))
    }

    pub fn from_c64(z: num_complex::Complex64, bits: usize) -> Self {
        Self::new(Real::from_f64(z.re, bits), Real::from_f64(z.im, bits))
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn at(&self, bits: usize) -> Self {
        Self::new(self.re.at(bits), self.im.at(bits))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `i·z`.
    pub fn mul_i(&self) -> Self {
        Self::new(-self.im.clone(), self.re.clone())
    }

    pub fn norm_sqr(&self) -> Real {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn scale(&self, s: &Real) -> Self {
        Self::new(&self.re * s, &self.im * s)
    }

    pub fn div(&self, other: &BigComplex) -> Self {
        let n = other.norm_sqr();
        let num = self * &other.conj();
        Self::new(num.re.div(&n), num.im.div(&n))
    }
}

impl Add for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        BigComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        BigComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        BigComplex::new(&(&self.re * &rhs.re) - &(&self.im * &rhs.im), &(&self.re * &rhs.im) + &(&self.im * &rhs.re))
    }
}

/// `e^{2πi k/n}` to `bits` bits: exact on the axes, Newton-polished from the
/// double-precision value otherwise.
pub fn root_of_unity(k: i64, n: usize, bits: usize) -> BigComplex {
    let k = k.rem_euclid(n as i64);
    if (4 * k) % n as i64 == 0 {
        let quarter = 4 * k / n as i64;
        let (re, im) = [(1, 0), (0, 1), (-1, 0), (0, -1)][quarter as usize];
        return BigComplex::new(Real::from_int(re, bits), Real::from_int(im, bits));
    }
    let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
    let start = num_complex::Complex64::from_polar(1.0, angle);
    polish_root(&BigComplex::from_c64(start, bits), n, &BigComplex::one(bits), bits)
}

/// Newton iteration for `z^n = c` from a nearby `z`.
pub fn polish_root(z: &BigComplex, n: usize, c: &BigComplex, bits: usize) -> BigComplex {
    let mut z = z.at(bits);
    let c = c.at(bits);
    let mut correct_bits = 40usize;
    loop {
        let mut pow = BigComplex::one(bits);
        for _ in 0..n - 1 {
            pow = &pow * &z;
        }
        let zn = &pow * &z;
        let step = (&zn - &c).div(&pow.scale(&Real::from_int(n as i64, bits)));
        z = &z - &step;
        if correct_bits >= bits {
            break;
        }
        correct_bits *= 2;
    }
    // One extra step absorbs the rounding of the last doubling.
    let mut pow = BigComplex::one(bits);
    for _ in 0..n - 1 {
        pow = &pow * &z;
    }
    let zn = &pow * &z;
    &z - &(&zn - &c).div(&pow.scale(&Real::from_int(n as i64, bits)))
}

/// `D_{lα} v` with exact phases `ζ^e`, `ζ = e^{iπ/d}`.
pub fn apply_displacement(idx: DisplacementIndex, v: &[BigComplex], bits: usize) -> Vec<BigComplex> {
    let d = idx.dim();
    let mut out = vec![BigComplex::zero(bits); d];
    let base = idx.l() as i64 * idx.alpha() as i64 * (d as i64 + 1);
    for (j, vj) in v.iter().enumerate() {
        let e = base + 2 * (idx.alpha() * j) as i64;
        out[(j + idx.l()) % d] = &root_of_unity(e, 2 * d, bits) * vj;
    }
    out
}

pub fn norm(v: &[BigComplex], bits: usize) -> Real {
    v.iter().fold(Real::zero(bits), |acc, z| &acc + &z.norm_sqr()).sqrt()
}

/// `⟨a|b⟩`.
pub fn inner(a: &[BigComplex], b: &[BigComplex], bits: usize) -> BigComplex {
    a.iter().zip(b).fold(BigComplex::zero(bits), |acc, (x, y)| &acc + &(&x.conj() * y))
}

/// `min_φ max_j |a_j − e^{iφ} b_j|` with `φ = arg⟨b|a⟩`, as `log10`.
pub fn ray_distance_log10(a: &[BigComplex], b: &[BigComplex], bits: usize) -> f64 {
    let ov = inner(b, a, bits);
    let n = ov.norm_sqr().sqrt();
    if n.is_zero() {
        return 0.0;
    }
    let phase = BigComplex::new(ov.re.div(&n), ov.im.div(&n));
    a.iter().zip(b).map(|(x, y)| (x - &(&phase * y)).norm_sqr().sqrt().log10_abs()).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        let bits = bits_for_digits(60);
        let s = "+0.707106781186547524400844362104849039284835937688474036588339";
        let x = Real::from_decimal(s, bits).unwrap();
        assert_eq!(x.to_fixed(60), s);
        assert_eq!(Real::from_decimal("-0.5", 64).unwrap().to_fixed(3), "-0.500");
        assert_eq!(Real::from_decimal("-0.0001", 64).unwrap().to_fixed(2), "+0.00");
        assert_eq!(Real::from_decimal("12.5", 64).unwrap().to_fixed(0), "+13");
        assert!(Real::from_decimal("abc", 64).is_none());
    }

    #[test]
    fn sqrt_two_to_fifty_digits() {
        let bits = bits_for_digits(70);
        let two = Real::from_int(2, bits);
        let r = two.sqrt();
        assert_eq!(r.to_fixed(50), "+1.41421356237309504880168872420969807856967187537695");
        let back = &(&r * &r) - &two;
        assert!(back.log10_abs() < -68.0);
    }

    #[test]
    fn roots_of_unity() {
        let bits = bits_for_digits(80);
        for n in [3usize, 5, 7, 12] {
            for k in 0..n as i64 {
                let z = root_of_unity(k, n, bits);
                let mut p = BigComplex::one(bits);
                for _ in 0..n {
                    p = &p * &z;
                }
                assert!((&p - &BigComplex::one(bits)).norm_sqr().log10_abs() < -150.0, "n={n} k={k}");
                let f = z.to_c64();
                let want = num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
                assert!((f - want).norm() < 1e-15);
            }
        }
        assert_eq!(root_of_unity(1, 4, 64), BigComplex::new(Real::from_int(0, 64), Real::from_int(1, 64)));
    }

    #[test]
    fn scientific_matches_std_in_range() {
        for x in [1.5e-33, 2.0, 9.999999, 123.456, 7.25e-300, 1e-5] {
            let r = Real::from_f64(x, 200);
            assert_eq!(r.to_scientific(6), format!("{x:.6e}"), "{x}");
        }
        let tiny = Real::from_decimal("3.25e-612", 256).unwrap();
        assert_eq!(tiny.to_scientific(3), "3.250e-612");
    }

    #[test]
    fn log10_out_of_double_range() {
        let bits = bits_for_digits(50);
        let tiny = Real::from_decimal("1e-400", bits).unwrap();
        assert!((tiny.log10_abs() + 400.0).abs() < 0.01, "{} {}", tiny.log10_abs(), tiny.to_f64());
        assert_eq!(Real::zero(64).log10_abs(), f64::NEG_INFINITY);
    }

    #[test]
    fn displacement_matches_double_precision() {
        let d = 5;
        let bits = 200;
        let v: Vec<BigComplex> = (0..d)
            .map(|j| BigComplex::from_c64(num_complex::Complex64::new(j as f64 * 0.25, 1.0 - j as f64 * 0.1), bits))
            .collect();
        let vf: Vec<num_complex::Complex64> = v.iter().map(|z| z.to_c64()).collect();
        for p in DisplacementIndex::all(d) {
            let hi = apply_displacement(p, &v, bits);
            let lo = crate::whgroup::apply_displacement(p, &vf);
            for (a, b) in hi.iter().zip(&lo) {
                assert!((a.to_c64() - b).norm() < 1e-14);
            }
        }
    }
}
