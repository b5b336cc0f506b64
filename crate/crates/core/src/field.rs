//! Prime-field arithmetic on `u64` values.
//!
//! A [`Field`] is a lightweight context object holding the modulus; elements
//! are plain `u64` values in `[0, modulus)`. Intermediate products go through
//! `u128`, so moduli up to [`Field::MAX_MODULUS`] are supported exactly.

use thiserror::Error;

/// Default modulus used throughout the pipeline: the Mersenne prime 2^61 - 1.
///
/// It leaves enough headroom for 16-to-24-bit contract words, whose widest
/// internal circuit values stay below 2^(2n+2).
pub const DEFAULT_MODULUS: u64 = 2_305_843_009_213_693_951;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum 2^62")]
    TooLarge(u64),
    #[error("modulus must be at least 2")]
    TooSmall,
}

/// Arithmetic context for the prime field `Z_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    modulus: u64,
}

impl Field {
    /// Largest accepted modulus (exclusive bound keeps `a + b` inside `u64`
    /// after one reduction and is far more than the pipeline ever needs).
    pub const MAX_MODULUS: u64 = 1 << 62;

    /// Creates a field, verifying primality of the modulus.
    pub fn new(modulus: u64) -> Result<Self, FieldError> {
        if modulus < 2 {
            return Err(FieldError::TooSmall);
        }
        if modulus >= Self::MAX_MODULUS {
            return Err(FieldError::TooLarge(modulus));
        }
        if !is_prime_u64(modulus) {
            return Err(FieldError::NotPrime(modulus));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn reduce(self, x: u64) -> u64 {
        x % self.modulus
    }

    /// Reduces a signed wide value into `[0, p)`.
    pub fn reduce_i128(self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a % self.modulus
        }
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        base %= self.modulus;
        let mut acc = 1u64 % self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    ///
    /// Panics on zero: callers guarantee non-zero operands (the polynomial
    /// routines only invert leading coefficients and non-zero abscissa gaps).
    pub fn inv(self, a: u64) -> u64 {
        assert!(a % self.modulus != 0, "inverse of zero in F_{}", self.modulus);
        self.pow(a, self.modulus - 2)
    }

    /// Interprets an element in the balanced range `(-p/2, p/2]` — used for
    /// width bookkeeping of "negative" wire values.
    pub fn balanced(self, a: u64) -> i128 {
        let a = (a % self.modulus) as i128;
        let p = self.modulus as i128;
        if a <= (p - 1) / 2 {
            a
        } else {
            a - p
        }
    }
}

/// Deterministic Miller-Rabin primality test, exact for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(acc, base);
            }
            base = mulmod(base, base);
            exp >>= 1;
        }
        acc
    };
    // These twelve witnesses decide primality for every 64-bit integer.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_field_ops() {
        let f = Field::new(13).unwrap();
        assert_eq!(f.add(9, 9), 5);
        assert_eq!(f.sub(3, 7), 9);
        assert_eq!(f.neg(0), 0);
        assert_eq!(f.neg(5), 8);
        assert_eq!(f.mul(6, 7), 3); // 42 = 3*13 + 3
        assert_eq!(f.pow(3, 5), 9); // 243 = 18*13 + 9
    }

    #[test]
    fn inverses_in_f13() {
        // Full inverse table for F_13, computed by hand from a*b = 1 mod 13.
        let f = Field::new(13).unwrap();
        let table = [
            (1, 1),
            (2, 7),
            (3, 9),
            (4, 10),
            (5, 8),
            (6, 11),
            (7, 2),
            (8, 5),
            (9, 3),
            (10, 4),
            (11, 6),
            (12, 12),
        ];
        for (a, inv) in table {
            assert_eq!(f.inv(a), inv, "inv({a})");
            assert_eq!(f.mul(a, inv), 1);
        }
    }

    #[test]
    fn balanced_representation() {
        let f = Field::new(13).unwrap();
        assert_eq!(f.balanced(0), 0);
        assert_eq!(f.balanced(6), 6);
        assert_eq!(f.balanced(7), -6);
        assert_eq!(f.balanced(12), -1);
    }

    #[test]
    fn primality_basics() {
        assert!(!is_prime_u64(0));
        assert!(!is_prime_u64(1));
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(3));
        assert!(!is_prime_u64(4));
        assert!(is_prime_u64(1_000_003));
        assert!(!is_prime_u64(1_000_001)); // 101 * 9901
        assert!(!is_prime_u64(561)); // Carmichael number 3*11*17
        assert!(is_prime_u64(DEFAULT_MODULUS)); // Mersenne prime 2^61 - 1
        assert!(!is_prime_u64(DEFAULT_MODULUS - 2));
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(Field::new(1), Err(FieldError::TooSmall));
        assert_eq!(Field::new(91), Err(FieldError::NotPrime(91)));
        assert!(matches!(Field::new(u64::MAX), Err(FieldError::TooLarge(_))));
    }

    proptest! {
        #[test]
        fn field_laws(a in 0u64.., b in 0u64.., c in 0u64..) {
            let f = Field::new(DEFAULT_MODULUS).unwrap();
            let (a, b, c) = (f.reduce(a), f.reduce(b), f.reduce(c));
            prop_assert_eq!(f.add(a, b), f.add(b, a));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }
    }
}
