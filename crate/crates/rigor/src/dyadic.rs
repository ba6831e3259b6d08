//! Dyadic binary floating values `m * 2^e` with directed rounding.
//!
//! Every finite `f64` is a dyadic, but unlike hardware floats the rounding
//! direction and the working precision here are explicit, so enclosures built
//! on top of these values are reproducible bit-for-bit on any platform.

use std::cmp::Ordering;
use std::fmt;

/// Hard cap on the mantissa precision, in bits.
///
/// Chosen so that every intermediate `i128` in add/mul/div stays clear of
/// overflow: aligned sums need up to `2*prec + 6` bits.
pub const MAX_PRECISION: u32 = 60;

/// Rounding direction for an operation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Round {
    /// Toward negative infinity (lower bounds).
    Floor,
    /// Toward positive infinity (upper bounds).
    Ceil,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Floor => Round::Ceil,
            Round::Ceil => Round::Floor,
        }
    }
}

/// A dyadic rational `m * 2^e`, normalized so zero is `(0, 0)` and nonzero
/// mantissas are odd.
#[derive(Clone, Copy, Debug)]
pub struct Dyadic {
    m: i128,
    e: i64,
}

#[inline]
fn bits(m: i128) -> u32 {
    if m == 0 {
        0
    } else {
        128 - m.unsigned_abs().leading_zeros()
    }
}

#[inline]
fn clamp_prec(prec: u32) -> u32 {
    prec.clamp(2, MAX_PRECISION)
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { m: 0, e: 0 };
    pub const ONE: Dyadic = Dyadic { m: 1, e: 0 };

    /// Builds `m * 2^e` exactly.
    pub fn new(m: i128, e: i64) -> Dyadic {
        Dyadic { m, e }.normalized()
    }

    pub fn from_i64(v: i64) -> Dyadic {
        Dyadic::new(v as i128, 0)
    }

    /// Exact conversion: every finite `f64` is a dyadic.
    pub fn from_f64_exact(v: f64) -> Option<Dyadic> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::ZERO);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i128 } else { 1i128 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (m, e) = if exp == 0 {
            (frac, -1074) // subnormal
        } else {
            (frac | (1i128 << 52), exp - 1075)
        };
        Some(Dyadic::new(sign * m, e))
    }

    fn normalized(mut self) -> Dyadic {
        if self.m == 0 {
            return Dyadic::ZERO;
        }
        let tz = self.m.trailing_zeros();
        if tz > 0 {
            self.m >>= tz;
            self.e += tz as i64;
        }
        self
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn signum(&self) -> i32 {
        self.m.signum() as i32
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { m: -self.m, e: self.e }
    }

    /// Exact doubling / halving by exponent shift.
    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.m == 0 {
            Dyadic::ZERO
        } else {
            Dyadic { m: self.m, e: self.e.saturating_add(k) }
        }
    }

    /// Position of the most significant bit: value magnitude is in
    /// `[2^(msb_exp()-1), 2^msb_exp())`. Zero has no MSB.
    fn msb_exp(&self) -> i64 {
        debug_assert!(self.m != 0);
        self.e + bits(self.m) as i64
    }

    /// Directed rounding to `prec` significant bits. `sticky` records the sign
    /// of an infinitesimal not captured in `m` (0 if none); when it points in
    /// the rounding direction the result is widened by one extra ulp.
    fn round(m: i128, e: i64, prec: u32, dir: Round, sticky: i32) -> Dyadic {
        let prec = clamp_prec(prec);
        if m == 0 {
            debug_assert!(sticky == 0, "sticky on zero mantissa");
            return Dyadic::ZERO;
        }
        let b = bits(m);
        let (mut q, mut e) = if b <= prec {
            (m, e)
        } else {
            let drop = (b - prec) as i64;
            let floor_q = m >> drop; // arithmetic shift: floor
            let exact = (floor_q << drop) == m;
            let q = match dir {
                Round::Floor => floor_q,
                Round::Ceil => {
                    if exact {
                        floor_q
                    } else {
                        floor_q + 1
                    }
                }
            };
            (q, e + drop)
        };
        // One conservative extra ulp when the discarded infinitesimal points
        // in the rounding direction.
        match dir {
            Round::Floor if sticky < 0 => q -= 1,
            Round::Ceil if sticky > 0 => q += 1,
            _ => {}
        }
        Dyadic { m: q, e }.normalized()
    }

    /// Rounds this value to `prec` bits in the given direction. Used to bring
    /// wide raw constants down to a working precision before arithmetic.
    pub fn round_to(&self, prec: u32, dir: Round) -> Dyadic {
        Dyadic::round(self.m, self.e, prec, dir, 0)
    }

    /// `self + rhs`, rounded in `dir` at `prec` bits.
    ///
    /// Operands must carry at most 62 mantissa bits (anything produced by the
    /// rounding ops does); that keeps the aligned sum inside `i128`.
    pub fn add(&self, rhs: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        let prec = clamp_prec(prec);
        debug_assert!(bits(self.m) <= 62 && bits(rhs.m) <= 62);
        if self.m == 0 {
            return Dyadic::round(rhs.m, rhs.e, prec, dir, 0);
        }
        if rhs.m == 0 {
            return Dyadic::round(self.m, self.e, prec, dir, 0);
        }
        let (hi, lo) = if self.msb_exp() >= rhs.msb_exp() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        // If `lo` sits entirely below the rounding granularity of the result,
        // fold it into the sticky bit instead of aligning mantissas.
        if hi.msb_exp() - lo.msb_exp() > (prec as i64) + 4 {
            return Dyadic::round(hi.m, hi.e, prec, dir, lo.m.signum() as i32);
        }
        let e = lo.e.min(hi.e);
        let sum = (hi.m << (hi.e - e)) + (lo.m << (lo.e - e));
        Dyadic::round(sum, e, prec, dir, 0)
    }

    pub fn sub(&self, rhs: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        self.add(&rhs.neg(), prec, dir)
    }

    /// Exact product. Mantissas are bounded by the precision cap, so the
    /// `i128` product cannot overflow.
    pub fn mul_exact(&self, rhs: &Dyadic) -> Dyadic {
        if self.m == 0 || rhs.m == 0 {
            return Dyadic::ZERO;
        }
        debug_assert!(bits(self.m) + bits(rhs.m) <= 126);
        Dyadic {
            m: self.m * rhs.m,
            e: self.e + rhs.e,
        }
        .normalized()
    }

    pub fn mul(&self, rhs: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        let p = self.mul_exact(rhs);
        Dyadic::round(p.m, p.e, prec, dir, 0)
    }

    /// `self / rhs`, rounded in `dir` at `prec` bits. `rhs` must be nonzero.
    pub fn div(&self, rhs: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        let prec = clamp_prec(prec);
        assert!(rhs.m != 0, "dyadic division by zero");
        if self.m == 0 {
            return Dyadic::ZERO;
        }
        let sign = (self.m.signum() * rhs.m.signum()) as i32;
        let na = self.m.unsigned_abs();
        let nb = rhs.m.unsigned_abs();
        // Scale the numerator so the quotient carries prec+3 significant bits.
        let want = prec as i64 + 3 + bits(rhs.m) as i64 - bits(self.m) as i64;
        let shift = want.max(0) as u32;
        debug_assert!(bits(self.m) + shift <= 127);
        let num = na << shift;
        let q = (num / nb) as i128;
        let rem = num % nb;
        let sticky = if rem == 0 { 0 } else { sign };
        let e = self.e - rhs.e - shift as i64;
        Dyadic::round(sign as i128 * q, e, prec, dir, sticky)
    }

    /// Exact comparison.
    pub fn cmp(&self, rhs: &Dyadic) -> Ordering {
        let (sa, sb) = (self.m.signum(), rhs.m.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let (ma, mb) = (self.msb_exp(), rhs.msb_exp());
        if ma != mb {
            let mag = ma.cmp(&mb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        // Same sign and same MSB position: aligning shifts by at most the
        // mantissa width difference, which fits comfortably.
        let e = self.e.min(rhs.e);
        let a = self.m << (self.e - e);
        let b = rhs.m << (rhs.e - e);
        a.cmp(&b)
    }

    pub fn min(self, rhs: Dyadic) -> Dyadic {
        if self.cmp(&rhs) == Ordering::Greater {
            rhs
        } else {
            self
        }
    }

    pub fn max(self, rhs: Dyadic) -> Dyadic {
        if self.cmp(&rhs) == Ordering::Less {
            rhs
        } else {
            self
        }
    }

    pub fn abs(&self) -> Dyadic {
        if self.m < 0 {
            self.neg()
        } else {
            *self
        }
    }

    /// Conversion for reporting, rounded outward in `dir` by one extra ulp so
    /// the printed value still bounds the true one.
    pub fn to_f64(&self, dir: Round) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        let approx = (self.m as f64) * (self.e as f64).exp2();
        match dir {
            Round::Floor => {
                if approx.is_finite() {
                    approx.next_down()
                } else {
                    approx.min(f64::MAX)
                }
            }
            Round::Ceil => {
                if approx.is_finite() {
                    approx.next_up()
                } else {
                    approx.max(f64::MIN)
                }
            }
        }
    }

    /// Nearest-ish conversion for display only.
    pub fn to_f64_lossy(&self) -> f64 {
        (self.m as f64) * (self.e as f64).exp2()
    }

    pub fn mantissa(&self) -> i128 {
        self.m
    }

    pub fn exponent(&self) -> i64 {
        self.e
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        // Normalized representation is canonical.
        self.m == other.m && (self.m == 0 || self.e == other.e)
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        Dyadic::cmp(self, other)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64_lossy())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(m: i128, e: i64) -> Dyadic {
        Dyadic::new(m, e)
    }

    #[test]
    fn exact_small_arithmetic() {
        let a = dy(3, 0); // 3
        let b = dy(5, -1); // 2.5
        assert_eq!(a.add(&b, 53, Round::Floor), dy(11, -1));
        assert_eq!(a.add(&b, 53, Round::Ceil), dy(11, -1));
        assert_eq!(a.mul_exact(&b), dy(15, -1));
        assert_eq!(a.sub(&b, 53, Round::Floor), dy(1, -1));
    }

    #[test]
    fn directed_division_brackets_truth() {
        // 1/3 is not dyadic: floor < 1/3 < ceil, and they differ by one ulp.
        let one = Dyadic::ONE;
        let three = dy(3, 0);
        let lo = one.div(&three, 24, Round::Floor);
        let hi = one.div(&three, 24, Round::Ceil);
        assert!(lo.cmp(&hi) == Ordering::Less);
        // 3*lo < 1 < 3*hi
        assert!(lo.mul_exact(&three).cmp(&one) == Ordering::Less);
        assert!(hi.mul_exact(&three).cmp(&one) == Ordering::Greater);
    }

    #[test]
    fn rounding_direction_on_sums() {
        // Adding a tiny value to 1 at low precision must move the ceil up
        // and leave the floor at or below 1.
        let one = Dyadic::ONE;
        let tiny = dy(1, -200);
        let up = one.add(&tiny, 8, Round::Ceil);
        let down = one.add(&tiny, 8, Round::Floor);
        assert!(up.cmp(&one) == Ordering::Greater);
        assert!(down.cmp(&one) != Ordering::Greater);
        // and symmetric for subtraction
        let up2 = one.sub(&tiny, 8, Round::Ceil);
        let down2 = one.sub(&tiny, 8, Round::Floor);
        assert!(down2.cmp(&one) == Ordering::Less);
        assert!(up2.cmp(&one) != Ordering::Less);
    }

    #[test]
    fn comparison_across_scales() {
        assert_eq!(dy(1, 100).cmp(&dy(1, 2)), Ordering::Greater);
        assert_eq!(dy(-1, 100).cmp(&dy(-1, 2)), Ordering::Less);
        assert_eq!(dy(-1, 0).cmp(&dy(1, -30)), Ordering::Less);
        assert_eq!(dy(5, -1).cmp(&dy(10, -2)), Ordering::Equal);
        assert_eq!(dy(7, -3).cmp(&dy(9, -3)), Ordering::Less);
    }

    #[test]
    fn f64_roundtrip_is_exact() {
        for v in [0.0, 1.0, -2.5, 0.1, 3.136e-12, -7.25e9, f64::MIN_POSITIVE] {
            let d = Dyadic::from_f64_exact(v).unwrap();
            assert_eq!(d.to_f64_lossy(), v);
        }
        assert!(Dyadic::from_f64_exact(f64::INFINITY).is_none());
    }
}
