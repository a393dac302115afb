//! Scalar abstraction shared by the geometry, feature and forest code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Integer key with the same order as the (non-NaN) values; `-0.0` and
    /// `0.0` share a key.
    fn order_key(self) -> u64;

    /// Inverse of [`Scalar::order_key`].
    fn from_order_key(key: u64) -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn order_key(self) -> u64 {
        let bits = (self + 0.0).to_bits();
        u64::from(if bits >> 31 == 1 {
            !bits
        } else {
            bits | 1 << 31
        })
    }

    #[inline]
    fn from_order_key(key: u64) -> Self {
        let k = key as u32;
        f32::from_bits(if k >> 31 == 1 { k & !(1 << 31) } else { !k })
    }
}

impl Scalar for f64 {
    #[inline]
    fn order_key(self) -> u64 {
        let bits = (self + 0.0).to_bits();
        if bits >> 63 == 1 {
            !bits
        } else {
            bits | 1 << 63
        }
    }

    #[inline]
    fn from_order_key(key: u64) -> Self {
        f64::from_bits(if key >> 63 == 1 {
            key & !(1 << 63)
        } else {
            !key
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_keys_sort_like_values() {
        let xs = [
            -3.5,
            -1e-300,
            -0.0,
            0.0,
            1e-300,
            2.0,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ];
        for &a in &xs {
            assert_eq!(f64::from_order_key(a.order_key()), a + 0.0);
            assert_eq!(f32::from_order_key((a as f32).order_key()), a as f32 + 0.0);
            for &b in &xs {
                assert_eq!(
                    a.partial_cmp(&b).unwrap(),
                    a.order_key().cmp(&b.order_key()),
                    "{a} {b}"
                );
                let (fa, fb) = (a as f32, b as f32);
                assert_eq!(
                    fa.partial_cmp(&fb).unwrap(),
                    fa.order_key().cmp(&fb.order_key())
                );
            }
        }
    }
}
