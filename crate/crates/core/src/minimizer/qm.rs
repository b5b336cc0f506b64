//! Quine-McCluskey prime-implicant computation.
//!
//! Minterms are combined pairwise (same care mask, Hamming distance one on
//! the cared bits) round by round; anything that never combines is prime.
//! The result is the complete, duplicate-free list of prime implicants.

use super::MinimizeError;
use std::collections::BTreeSet;

/// A product term over `n` variables: variable `j` (bit `j`) is fixed to the
/// corresponding bit of `bits` where `mask` has a one, and don't-care where
/// it has a zero. `covered_minterms` lists exactly the minterm indices the
/// pattern matches, ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Implicant {
    pub bits: u32,
    pub mask: u32,
    pub n: u32,
    pub covered_minterms: Vec<u32>,
}

impl Implicant {
    pub fn matches(&self, minterm: u32) -> bool {
        minterm & self.mask == self.bits
    }

    /// Number of literals in the product term.
    pub fn literals(&self) -> u32 {
        self.mask.count_ones()
    }

    /// The literals as (variable index, positive) pairs, ascending.
    pub fn literal_list(&self) -> Vec<(u32, bool)> {
        (0..self.n)
            .filter(|j| self.mask >> j & 1 == 1)
            .map(|j| (j, self.bits >> j & 1 == 1))
            .collect()
    }
}

/// Complete prime-implicant list of the function given as a truth table of
/// length 2^n (index = minterm, LSB = variable 0).
pub fn quine_mccluskey(table: &[bool]) -> Result<Vec<Implicant>, MinimizeError> {
    assert!(table.len().is_power_of_two(), "truth table length must be 2^n");
    let n = table.len().trailing_zeros();
    if n > 16 {
        return Err(MinimizeError::TooManyVariables { vars: n });
    }
    let minterms: Vec<u32> = (0..table.len() as u32).filter(|&m| table[m as usize]).collect();

    // Terms as (mask, bits); a round combines terms of equal mask differing
    // in exactly one cared bit.
    let mut current: BTreeSet<(u32, u32)> =
        minterms.iter().map(|&m| (((1u64 << n) - 1) as u32, m)).collect();
    let mut primes: BTreeSet<(u32, u32)> = BTreeSet::new();
    while !current.is_empty() {
        let terms: Vec<(u32, u32)> = current.iter().copied().collect();
        let mut combined = vec![false; terms.len()];
        let mut next = BTreeSet::new();
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                let (mask_a, bits_a) = terms[i];
                let (mask_b, bits_b) = terms[j];
                if mask_a != mask_b {
                    continue;
                }
                let diff = bits_a ^ bits_b;
                if diff.count_ones() == 1 {
                    combined[i] = true;
                    combined[j] = true;
                    next.insert((mask_a & !diff, bits_a & !diff));
                }
            }
        }
        for (i, &term) in terms.iter().enumerate() {
            if !combined[i] {
                primes.insert(term);
            }
        }
        current = next;
    }

    Ok(primes
        .into_iter()
        .map(|(mask, bits)| Implicant {
            bits,
            mask,
            n,
            covered_minterms: minterms.iter().copied().filter(|&m| m & mask == bits).collect(),
        })
        .collect())
}
