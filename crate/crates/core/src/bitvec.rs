//! Fixed-width unsigned bit-vectors with wrap-around arithmetic.
//!
//! Widths range over `1..=64`. Binary operations zero-extend the narrower
//! operand to the wider width and wrap modulo `2^width` of the result.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitVecValue {
    width: u32,
    bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitVecError {
    #[error("bit-vector width must be in 1..={MAX_WIDTH}, got {0}")]
    BadWidth(u32),
    #[error("value {value} does not fit in {width} bits")]
    Overflow { value: u64, width: u32 },
}

#[inline]
pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl BitVecValue {
    /// Builds a value, rejecting bit patterns that do not fit the width.
    pub fn new(width: u32, bits: u64) -> Result<Self, BitVecError> {
        check_width(width)?;
        if bits & !mask(width) != 0 {
            return Err(BitVecError::Overflow { value: bits, width });
        }
        Ok(Self { width, bits })
    }

    /// Builds a value, truncating `bits` to the width.
    pub fn wrapping(width: u32, bits: u64) -> Self {
        let width = width.clamp(1, MAX_WIDTH);
        Self {
            width,
            bits: bits & mask(width),
        }
    }

    pub fn zero(width: u32) -> Self {
        Self::wrapping(width, 0)
    }

    /// A literal sized to the fewest bits that hold it (at least one).
    pub fn literal(value: u64) -> Self {
        let width = (64 - value.leading_zeros()).max(1);
        Self { width, bits: value }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, index: u32) -> bool {
        index < self.width && (self.bits >> index) & 1 == 1
    }

    pub fn zero_extend(&self, width: u32) -> Self {
        Self::wrapping(width.max(self.width), self.bits)
    }

    /// Re-sizes to exactly `width`, truncating high bits when narrowing.
    pub fn resize(&self, width: u32) -> Self {
        Self::wrapping(width, self.bits)
    }

    pub fn wrapping_add(&self, rhs: &Self) -> Self {
        let w = self.width.max(rhs.width);
        Self::wrapping(w, self.bits.wrapping_add(rhs.bits))
    }

    pub fn wrapping_sub(&self, rhs: &Self) -> Self {
        let w = self.width.max(rhs.width);
        Self::wrapping(w, self.bits.wrapping_sub(rhs.bits))
    }

    /// Unsigned comparison after zero-extension.
    pub fn compare(&self, rhs: &Self) -> Ordering {
        self.bits.cmp(&rhs.bits)
    }
}

fn check_width(width: u32) -> Result<(), BitVecError> {
    if (1..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(BitVecError::BadWidth(width))
    }
}

impl fmt::Display for BitVecValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counter_wraps_at_width() {
        let mut v = BitVecValue::zero(5);
        let one = BitVecValue::literal(1);
        for _ in 0..32 {
            v = v.wrapping_add(&one);
        }
        assert_eq!(v, BitVecValue::zero(5));
    }

    #[test]
    fn sub_wraps_below_zero() {
        let v = BitVecValue::zero(3).wrapping_sub(&BitVecValue::literal(1));
        assert_eq!(v.bits(), 7);
        assert_eq!(v.width(), 3);
    }

    #[test]
    fn rejects_bad_widths_and_overflow() {
        assert_eq!(BitVecValue::new(0, 0), Err(BitVecError::BadWidth(0)));
        assert_eq!(BitVecValue::new(65, 0), Err(BitVecError::BadWidth(65)));
        assert!(BitVecValue::new(2, 4).is_err());
        assert!(BitVecValue::new(64, u64::MAX).is_ok());
    }

    #[test]
    fn zero_extension_picks_widest() {
        let a = BitVecValue::new(2, 3).unwrap();
        let b = BitVecValue::literal(4); // 3 bits
        let s = a.wrapping_add(&b);
        assert_eq!((s.width(), s.bits()), (3, 7));
    }

    proptest! {
        #[test]
        fn results_stay_in_range(wa in 1u32..=16, wb in 1u32..=16, a in any::<u64>(), b in any::<u64>()) {
            let x = BitVecValue::wrapping(wa, a);
            let y = BitVecValue::wrapping(wb, b);
            for r in [x.wrapping_add(&y), x.wrapping_sub(&y), x.zero_extend(wb), x.resize(wb)] {
                prop_assert!(r.width() >= 1);
                prop_assert!(r.bits() < (1u64 << r.width()));
            }
            // arithmetic oracle over u128
            let w = wa.max(wb);
            let m = 1u128 << w;
            let expect_add = ((x.bits() as u128 + y.bits() as u128) % m) as u64;
            let expect_sub = ((x.bits() as u128 + m - y.bits() as u128) % m) as u64;
            prop_assert_eq!(x.wrapping_add(&y).bits(), expect_add);
            prop_assert_eq!(x.wrapping_sub(&y).bits(), expect_sub);
        }
    }
}
