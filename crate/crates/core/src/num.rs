//! Scalar abstraction shared by the accounting engines.
//!
//! Balance-sheet, capital and liquidity arithmetic is written once against
//! [`Scalar`] and instantiated with exact decimals for money (the default
//! used by file ingestion and the CLI), with binary floats for quick
//! exploratory work, or with exact rationals in tests.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};
use rust_decimal::{Decimal, RoundingStrategy};

/// Number type usable for money amounts and risk fractions.
pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Rounds to `dp` fractional decimal digits, ties to even.
    fn round_half_even(self, dp: u32) -> Self;

    /// Exact `num / den` where representable.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer fits scalar") / Self::from_i64(den).expect("integer fits scalar")
    }

    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for Decimal {
    fn round_half_even(self, dp: u32) -> Self {
        self.round_dp_with_strategy(dp, RoundingStrategy::MidpointNearestEven)
    }
}

impl Scalar for f64 {
    fn round_half_even(self, dp: u32) -> Self {
        let scale = 10f64.powi(dp as i32);
        (self * scale).round_ties_even() / scale
    }
}

impl Scalar for f32 {
    fn round_half_even(self, dp: u32) -> Self {
        let scale = 10f32.powi(dp as i32);
        (self * scale).round_ties_even() / scale
    }
}

impl Scalar for Ratio<i128> {
    fn round_half_even(self, dp: u32) -> Self {
        let scale = 10i128.pow(dp);
        let scaled = self * Ratio::from_integer(scale);
        let floor = scaled.floor();
        let frac = scaled - floor;
        let half = Ratio::new(1, 2);
        let mut units = floor.to_integer();
        if frac > half || (frac == half && units % 2 != 0) {
            units += 1;
        }
        Ratio::new(units, scale)
    }
}

/// Sums in iteration order; callers fix the order for reproducible results.
pub fn sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}
