//! Exact rational arithmetic helpers.
//!
//! All probability computation in this crate is exact: no floating point
//! appears anywhere in the symbolic pipeline. Rationals use
//! arbitrary-precision integers so correctness never silently degrades.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact rational number, always stored reduced with positive denominator.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Parse "p/q" or a bare integer "p".
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("invalid rational numerator: {s:?}"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| format!("invalid rational denominator: {s:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in rational: {s:?}"));
    }
    Ok(Rat::new(num, den))
}

/// Render as "p" for integers, "p/q" otherwise.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Render always as "p/q", the wire form used in JSON reports.
pub fn fmt_rat_exact(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
