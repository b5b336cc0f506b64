//! Fixed-width two's-complement integer semantics.
//!
//! Contract programs compute over `n`-bit machine words. Values are stored as
//! the raw unsigned representation in `[0, 2^n)`; a separate signedness flag
//! decides how comparisons and right shifts interpret them. These helpers are
//! the single definition of that semantics, shared by constant folding and
//! both reference interpreters.

pub const MAX_WIDTH: u32 = 32;

/// Masks a raw value to `width` bits.
pub fn mask(width: u32, v: u64) -> u64 {
    debug_assert!(width >= 1 && width <= MAX_WIDTH);
    v & ((1u64 << width) - 1)
}

/// Signed interpretation of an `width`-bit raw value.
pub fn to_signed(width: u32, v: u64) -> i64 {
    let v = mask(width, v);
    let sign = 1u64 << (width - 1);
    if v & sign != 0 {
        v as i64 - (1i64 << width)
    } else {
        v as i64
    }
}

/// Raw `width`-bit representation of a (possibly negative) integer.
pub fn from_signed(width: u32, v: i64) -> u64 {
    mask(width, v as u64)
}

pub fn add(width: u32, a: u64, b: u64) -> u64 {
    mask(width, a.wrapping_add(b))
}

pub fn sub(width: u32, a: u64, b: u64) -> u64 {
    mask(width, a.wrapping_sub(b))
}

pub fn mul(width: u32, a: u64, b: u64) -> u64 {
    mask(width, mask(width, a).wrapping_mul(mask(width, b)))
}

pub fn not(width: u32, a: u64) -> u64 {
    mask(width, !a)
}

pub fn shl(width: u32, a: u64, k: u32) -> u64 {
    debug_assert!(k < width);
    mask(width, a << k)
}

/// Right shift: logical for unsigned values, arithmetic for signed ones.
pub fn shr(width: u32, signed: bool, a: u64, k: u32) -> u64 {
    debug_assert!(k < width);
    if signed {
        from_signed(width, to_signed(width, a) >> k)
    } else {
        mask(width, mask(width, a) >> k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Neq,
}

/// Comparison under the given signedness; returns 0 or 1.
pub fn cmp(width: u32, signed: bool, rel: Rel, a: u64, b: u64) -> u64 {
    let ord = if signed {
        to_signed(width, a).cmp(&to_signed(width, b))
    } else {
        mask(width, a).cmp(&mask(width, b))
    };
    let holds = match rel {
        Rel::Lt => ord.is_lt(),
        Rel::Gt => ord.is_gt(),
        Rel::Le => ord.is_le(),
        Rel::Ge => ord.is_ge(),
        Rel::Eq => ord.is_eq(),
        Rel::Neq => ord.is_ne(),
    };
    holds as u64
}
