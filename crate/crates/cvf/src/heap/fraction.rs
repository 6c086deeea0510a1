use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// An exact nonnegative rational coefficient, always kept in reduced form.
///
/// Coefficients in verification are built from literals by addition and
/// subtraction, so rationals are closed under everything we do and the
/// `wok` check never sees rounding error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(Ratio<i64>);

impl Fraction {
    /// `p/q` with `p >= 0`, `q >= 1`. Returns `None` otherwise.
    pub fn new(p: i64, q: i64) -> Option<Self> {
        if p < 0 || q < 1 {
            return None;
        }
        Some(Fraction(Ratio::new(p, q)))
    }

    pub fn zero() -> Self {
        Fraction(Ratio::zero())
    }

    pub fn one() -> Self {
        Fraction(Ratio::one())
    }

    pub fn half() -> Self {
        Fraction(Ratio::new(1, 2))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    #[allow(clippy::should_implement_trait)] // fallible partner `sub` rules out the std traits
    pub fn add(self, other: Self) -> Self {
        Fraction(self.0 + other.0)
    }

    /// Subtraction below zero is a caller bug, so it returns `None`.
    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Self) -> Option<Self> {
        let d = self.0 - other.0;
        if d.is_negative() {
            None
        } else {
            Some(Fraction(d))
        }
    }

    /// Smallest multiplicity of whole chunks covering this coefficient.
    pub fn ceil_to_u32(&self) -> u32 {
        self.0.ceil().to_integer().max(0) as u32
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_and_ordered() {
        assert_eq!(Fraction::new(2, 4), Fraction::new(1, 2));
        assert!(Fraction::new(1, 2) < Fraction::new(1, 1));
        assert_eq!(Fraction::new(-1, 2), None);
        assert_eq!(Fraction::new(1, 0), None);
    }

    #[test]
    fn arithmetic() {
        let h = Fraction::half();
        assert_eq!(h.add(h), Fraction::one());
        assert_eq!(Fraction::one().sub(h), Some(h));
        assert_eq!(h.sub(Fraction::one()), None);
        assert_eq!(format!("{}", h), "1/2");
        assert_eq!(format!("{}", Fraction::one()), "1");
        assert_eq!(Fraction::new(3, 2).unwrap().ceil_to_u32(), 2);
    }
}
