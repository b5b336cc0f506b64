//! Petrick's method: choose a minimum prime-implicant cover from the
//! covering chart.
//!
//! The chart is a product of sums σ_1 · σ_2 · … · σ_M, one σ per minterm,
//! each σ listing the labels of the prime implicants covering it. Phase one
//! walks the factor list pairwise left to right, simplifying each pair with
//! the rules
//!
//!   (1) u(u + v) = u        (absorption between factors)
//!   (2) u(u' + v) = uv      (never fires here: labels are uncomplemented)
//!   (3) (u + v)(u + w) = u + vw   (merge factors sharing addends)
//!
//! in that order, first match wins. Comparisons are counted as steps; the
//! count is bounded by M(M−1)/2 because each comparison consumes a distinct
//! pair of original factors. Phase two expands the residual product into a
//! sum of products and returns the term with the fewest labels, breaking
//! ties by the lexicographically smallest sorted label set.

use super::MinimizeError;

/// The covering chart: one sum of prime-implicant labels per minterm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetrickExpression {
    pub sums: Vec<Vec<usize>>,
}

impl PetrickExpression {
    /// Chart for `minterm_covers[i]` = labels covering minterm i.
    pub fn new(sums: Vec<Vec<usize>>) -> Self {
        PetrickExpression { sums }
    }
}

/// Outcome of the reduction: the chosen cover and the number of pairwise
/// comparison steps spent in phase one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetrickSolution {
    pub cover: Vec<usize>,
    pub steps: usize,
}

/// A factor: a sum of product terms, each term a sorted label set.
type Term = Vec<usize>;
type Factor = Vec<Term>;

/// Drops duplicate terms and terms absorbed by a subset term (u + uv = u).
fn absorb(mut factor: Factor) -> Factor {
    factor.sort();
    factor.dedup();
    let kept: Vec<bool> = factor
        .iter()
        .map(|term| {
            !factor.iter().any(|other| {
                other.len() < term.len() && other.iter().all(|l| term.contains(l))
            })
        })
        .collect();
    factor
        .into_iter()
        .zip(kept)
        .filter_map(|(t, keep)| keep.then_some(t))
        .collect()
}

/// Applies rules 1–3 to one (left, right) pair; `None` means no rule fired.
fn combine(left: &Factor, right: &Factor) -> Option<Factor> {
    let subset = |a: &Factor, b: &Factor| a.iter().all(|t| b.contains(t));
    // Rule 1: if one factor's addends all appear in the other, the product
    // collapses to the smaller sum.
    if subset(left, right) {
        return Some(left.clone());
    }
    if subset(right, left) {
        return Some(right.clone());
    }
    // Rule 2 would rewrite u(u' + v); chart labels are plain prime-implicant
    // names with no complements, so the pattern cannot occur.
    // Rule 3: factor out shared addends, multiply the remainders.
    let shared: Vec<Term> = left.iter().filter(|t| right.contains(t)).cloned().collect();
    if shared.is_empty() {
        return None;
    }
    let rest = |f: &Factor| -> Factor {
        f.iter().filter(|t| !shared.contains(t)).cloned().collect()
    };
    let mut merged = shared.clone();
    for a in rest(left) {
        for b in rest(right) {
            let mut t = a.clone();
            t.extend_from_slice(&b);
            t.sort_unstable();
            t.dedup();
            merged.push(t);
        }
    }
    Some(absorb(merged))
}

/// Multiplies two factors outright (phase-two expansion).
fn cross(left: &Factor, right: &Factor) -> Factor {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for a in left {
        for b in right {
            let mut t = a.clone();
            t.extend_from_slice(b);
            t.sort_unstable();
            t.dedup();
            out.push(t);
        }
    }
    absorb(out)
}

pub fn petrick_reduce(chart: &PetrickExpression) -> Result<PetrickSolution, MinimizeError> {
    if chart.sums.is_empty() {
        return Err(MinimizeError::EmptyChart);
    }
    let m = chart.sums.len();
    let mut factors: Vec<Factor> = chart
        .sums
        .iter()
        .map(|sum| {
            assert!(!sum.is_empty(), "every minterm must be covered by some implicant");
            absorb(sum.iter().map(|&l| vec![l]).collect())
        })
        .collect();

    // Phase one: pairwise traversal with the simplification rules.
    let mut steps = 0usize;
    let mut i = 0;
    while i < factors.len() {
        let mut j = i + 1;
        while j < factors.len() {
            steps += 1;
            if let Some(merged) = combine(&factors[i], &factors[j]) {
                factors[i] = merged;
                factors.remove(j);
            } else {
                j += 1;
            }
        }
        i += 1;
    }
    debug_assert!(steps <= m * (m - 1) / 2);

    // Phase two: expand what is left and pick the cheapest term.
    let mut sop = factors[0].clone();
    for factor in &factors[1..] {
        sop = cross(&sop, factor);
    }
    let cover = sop
        .iter()
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
        .expect("nonempty chart expands to a nonempty sum")
        .clone();
    Ok(PetrickSolution { cover, steps })
}
