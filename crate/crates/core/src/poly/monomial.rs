use std::fmt;

/// Maximum number of variables a [`Monomial`] can carry.
pub const MAX_VARS: usize = 4;
/// Largest exponent representable for a single variable.
pub const MAX_EXPONENT: u32 = (1 << EXP_BITS) - 1;

const EXP_BITS: u32 = 12;
const EXP_MASK: u64 = (1 << EXP_BITS) - 1;
const TOTAL_SHIFT: u32 = 48;

/// An exponent vector packed into a single word.
///
/// Layout (most significant first): 16 bits of total degree, then 12 bits per
/// variable in variable order. Comparing the packed words therefore yields the
/// graded lexicographic order with variable 0 the most significant, and
/// multiplying monomials is plain addition of the words.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(u64);

#[inline]
fn shift(var: usize) -> u32 {
    debug_assert!(var < MAX_VARS);
    36 - EXP_BITS * var as u32
}

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_exponents(exps: &[u32]) -> Self {
        assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} variables supported");
        let mut word = 0u64;
        let mut total = 0u64;
        for (i, &e) in exps.iter().enumerate() {
            assert!(e <= MAX_EXPONENT, "exponent {e} exceeds {MAX_EXPONENT}");
            word |= (e as u64) << shift(i);
            total += e as u64;
        }
        Monomial(word | (total << TOTAL_SHIFT))
    }

    pub fn var(var: usize, exp: u32) -> Self {
        assert!(exp <= MAX_EXPONENT);
        Monomial(((exp as u64) << shift(var)) | ((exp as u64) << TOTAL_SHIFT))
    }

    #[inline]
    pub fn exponent(self, var: usize) -> u32 {
        ((self.0 >> shift(var)) & EXP_MASK) as u32
    }

    #[inline]
    pub fn total_degree(self) -> u32 {
        (self.0 >> TOTAL_SHIFT) as u32
    }

    pub fn exponents(self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exponent(i)).collect()
    }

    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn divides(self, other: Monomial) -> bool {
        (0..MAX_VARS).all(|i| self.exponent(i) <= other.exponent(i))
    }

    /// Replaces the exponent of `var`.
    pub fn with_exponent(self, var: usize, exp: u32) -> Monomial {
        let old = self.exponent(var) as u64;
        let word = (self.0 & !(EXP_MASK << shift(var))) | ((exp as u64) << shift(var));
        let total = (word >> TOTAL_SHIFT) - old + exp as u64;
        Monomial((word & ((1u64 << TOTAL_SHIFT) - 1)) | (total << TOTAL_SHIFT))
    }

    pub fn raw(self) -> u64 {
        self.0
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exponents(MAX_VARS))
    }
}

/// Product of two monomials. The caller guarantees the per-variable sums
/// stay within [`MAX_EXPONENT`].
impl std::ops::Mul for Monomial {
    type Output = Monomial;

    // packed exponents: one word addition adds every field
    #[allow(clippy::suspicious_arithmetic_impl)]
    #[inline]
    fn mul(self, other: Monomial) -> Monomial {
        Monomial(self.0 + other.0)
    }
}

/// Quotient `self / other`; requires `other.divides(self)`.
impl std::ops::Div for Monomial {
    type Output = Monomial;

    #[allow(clippy::suspicious_arithmetic_impl)]
    #[inline]
    fn div(self, other: Monomial) -> Monomial {
        debug_assert!(other.divides(self));
        Monomial(self.0 - other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_orders_grlex() {
        let a = Monomial::from_exponents(&[2, 0]);
        let b = Monomial::from_exponents(&[1, 1]);
        let c = Monomial::from_exponents(&[0, 3]);
        assert!(c > a && a > b);
        assert_eq!((a * b), Monomial::from_exponents(&[3, 1]));
        assert_eq!((a * b).total_degree(), 4);
        assert!(b.divides(a * b));
        assert!(!c.divides(a));
        assert_eq!(a.with_exponent(1, 5), Monomial::from_exponents(&[2, 5]));
    }
}
