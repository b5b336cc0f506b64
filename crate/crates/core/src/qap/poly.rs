//! Dense univariate polynomials over a prime field.
//!
//! Coefficients are stored in ascending order with no trailing zeros; the
//! zero polynomial has an empty coefficient vector.

use crate::field::Field;
use crate::qap::QapError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldPoly {
    coeffs: Vec<u64>,
    field: Field,
}

impl FieldPoly {
    /// Builds a polynomial, reducing coefficients and trimming trailing zeros.
    pub fn new(field: Field, mut coeffs: Vec<u64>) -> Self {
        for c in &mut coeffs {
            *c = field.reduce(*c);
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs, field }
    }

    pub fn zero(field: Field) -> Self {
        Self { coeffs: Vec::new(), field }
    }

    pub fn constant(field: Field, c: u64) -> Self {
        Self::new(field, vec![c])
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: u64) -> u64 {
        let f = self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |f, a, b| f.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |f, a, b| f.sub(a, b))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Field, u64, u64) -> u64) -> Self {
        assert_eq!(self.field, other.field, "mixed-field polynomial arithmetic");
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                op(self.field, a, b)
            })
            .collect();
        Self::new(self.field, coeffs)
    }

    pub fn scale(&self, c: u64) -> Self {
        let f = self.field;
        Self::new(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.field, other.field, "mixed-field polynomial arithmetic");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.field);
        }
        let f = self.field;
        let mut coeffs = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = f.add(coeffs[i + j], f.mul(a, b));
            }
        }
        Self::new(f, coeffs)
    }

    /// Long division: returns `(quotient, remainder)` with
    /// `self = quotient * divisor + remainder` and `deg r < deg divisor`.
    pub fn divide(&self, divisor: &Self) -> Result<(Self, Self), QapError> {
        assert_eq!(self.field, divisor.field, "mixed-field polynomial arithmetic");
        if divisor.is_zero() {
            return Err(QapError::DivisionByZeroPoly);
        }
        let f = self.field;
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return Ok((Self::zero(f), self.clone()));
        }
        let lead_inv = f.inv(*divisor.coeffs.last().unwrap());
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let q = f.mul(rem[i], lead_inv);
            quot[i - dd] = q;
            if q != 0 {
                for (j, &dc) in divisor.coeffs.iter().enumerate() {
                    rem[i - dd + j] = f.sub(rem[i - dd + j], f.mul(q, dc));
                }
            }
        }
        rem.truncate(dd);
        Ok((Self::new(f, quot), Self::new(f, rem)))
    }

    /// Monic product `prod (x - r_i)`.
    pub fn vanishing(field: Field, roots: &[u64]) -> Self {
        let mut acc = Self::constant(field, 1);
        for &r in roots {
            acc = acc.mul(&Self::new(field, vec![field.neg(r), 1]));
        }
        acc
    }

    /// Quotient of `self` by the monic linear factor `(x - r)`.
    /// The division must be exact or the remainder is simply dropped;
    /// callers use it on polynomials known to vanish at `r`.
    fn divide_linear(&self, r: u64) -> Self {
        let f = self.field;
        if self.coeffs.len() < 2 {
            return Self::zero(f);
        }
        let mut q = vec![0u64; self.coeffs.len() - 1];
        let mut carry = 0u64;
        for i in (0..self.coeffs.len() - 1).rev() {
            carry = f.add(self.coeffs[i + 1], f.mul(r, carry));
            q[i] = carry;
        }
        Self::new(f, q)
    }
}

/// Lagrange basis over distinct abscissas: `basis[i]` is 1 at `xs[i]` and 0 at
/// every other point. Built in O(n^2) by synthetic division of the vanishing
/// polynomial.
pub fn lagrange_basis(field: Field, xs: &[u64]) -> Result<Vec<FieldPoly>, QapError> {
    let xs: Vec<u64> = xs.iter().map(|&x| field.reduce(x)).collect();
    let vanish = FieldPoly::vanishing(field, &xs);
    let mut basis = Vec::with_capacity(xs.len());
    for (i, &xi) in xs.iter().enumerate() {
        let mut denom = 1u64;
        for (j, &xj) in xs.iter().enumerate() {
            if i != j {
                let d = field.sub(xi, xj);
                if d == 0 {
                    return Err(QapError::DuplicateAbscissa(xi));
                }
                denom = field.mul(denom, d);
            }
        }
        let num = vanish.divide_linear(xi);
        basis.push(num.scale(field.inv(denom)));
    }
    Ok(basis)
}

/// Lagrange interpolation through the given `(x, y)` points.
pub fn interpolate(field: Field, points: &[(u64, u64)]) -> Result<FieldPoly, QapError> {
    let xs: Vec<u64> = points.iter().map(|&(x, _)| x).collect();
    let basis = lagrange_basis(field, &xs)?;
    let mut acc = FieldPoly::zero(field);
    for (b, &(_, y)) in basis.iter().zip(points) {
        if field.reduce(y) != 0 {
            acc = acc.add(&b.scale(y));
        }
    }
    Ok(acc)
}
