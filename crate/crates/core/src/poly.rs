//! Input-symbol probability polynomials.
//!
//! A `ProbPoly` is a linear combination of the four input symbols
//! `X00, X01, X10, X11` with nonnegative rational coefficients. These are
//! the annotations next to each card sequence inside a KWH box: the symbol
//! `Xab` stands for the prior probability that the inputs are `(a, b)`.
//! The shorthands `X0 = X00 + X01 + X10` and `X1 = X11` are views used on
//! output only, never stored.

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::rational::{fmt_rat, one, zero, Rat};

/// One of the four input symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    X00,
    X01,
    X10,
    X11,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::X00, Symbol::X01, Symbol::X10, Symbol::X11];

    pub fn index(self) -> usize {
        match self {
            Symbol::X00 => 0,
            Symbol::X01 => 1,
            Symbol::X10 => 2,
            Symbol::X11 => 3,
        }
    }

    /// The input pair (a, b) this symbol stands for.
    pub fn bits(self) -> (u8, u8) {
        match self {
            Symbol::X00 => (0, 0),
            Symbol::X01 => (0, 1),
            Symbol::X10 => (1, 0),
            Symbol::X11 => (1, 1),
        }
    }

    pub fn from_bits(a: u8, b: u8) -> Symbol {
        match (a, b) {
            (0, 0) => Symbol::X00,
            (0, 1) => Symbol::X01,
            (1, 0) => Symbol::X10,
            _ => Symbol::X11,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Symbol::X00 => "X00",
            Symbol::X01 => "X01",
            Symbol::X10 => "X10",
            Symbol::X11 => "X11",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("scalar must be nonnegative")]
    NegativeScalar,
    #[error("cannot normalize by zero")]
    ZeroDivisor,
    #[error("distribution must sum to 1")]
    BadDistribution,
}

/// Linear combination of the four input symbols.
///
/// Zero coefficients are not distinguished from absent ones, so structural
/// equality is canonical equality; the engine relies on this when
/// deduplicating boxes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbPoly {
    coeffs: [Rat; 4],
}

impl ProbPoly {
    pub fn zero() -> ProbPoly {
        ProbPoly {
            coeffs: [zero(), zero(), zero(), zero()],
        }
    }

    /// The polynomial consisting of a single unit symbol.
    pub fn unit(sym: Symbol) -> ProbPoly {
        let mut p = ProbPoly::zero();
        p.coeffs[sym.index()] = one();
        p
    }

    /// X00 + X01 + X10 + X11, the total-probability polynomial every box
    /// must sum to.
    pub fn total() -> ProbPoly {
        ProbPoly {
            coeffs: [one(), one(), one(), one()],
        }
    }

    pub fn from_coeffs(coeffs: [Rat; 4]) -> ProbPoly {
        ProbPoly { coeffs }
    }

    pub fn coeff(&self, sym: Symbol) -> &Rat {
        &self.coeffs[sym.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &ProbPoly) -> ProbPoly {
        let mut coeffs = self.coeffs.clone();
        for (c, o) in coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        ProbPoly { coeffs }
    }

    /// Coefficient-wise multiply by a nonnegative scalar.
    pub fn scale(&self, c: &Rat) -> Result<ProbPoly, PolyError> {
        if c < &zero() {
            return Err(PolyError::NegativeScalar);
        }
        let coeffs = self.coeffs.clone().map(|x| x * c);
        Ok(ProbPoly { coeffs })
    }

    /// Divide every coefficient by `c`; conditions a box on an observed
    /// turn outcome of probability `c`.
    pub fn normalize(&self, c: &Rat) -> Result<ProbPoly, PolyError> {
        if c.is_zero() {
            return Err(PolyError::ZeroDivisor);
        }
        let coeffs = self.coeffs.clone().map(|x| x / c);
        Ok(ProbPoly { coeffs })
    }

    /// Returns `c` iff the polynomial is exactly c·(X00+X01+X10+X11).
    ///
    /// This is the security predicate for a turn outcome: the probability
    /// of observing it must not depend on the inputs.
    pub fn constant_fraction_of_total(&self) -> Option<Rat> {
        let c = &self.coeffs[0];
        if self.coeffs.iter().all(|x| x == c) {
            Some(c.clone())
        } else {
            None
        }
    }

    /// Returns `c` iff the polynomial is exactly c·(X00+X01+X10) with no
    /// X11 component and c > 0.
    pub fn x0_multiple(&self) -> Option<Rat> {
        let c = &self.coeffs[0];
        if !c.is_zero()
            && self.coeffs[1] == *c
            && self.coeffs[2] == *c
            && self.coeffs[3].is_zero()
        {
            Some(c.clone())
        } else {
            None
        }
    }

    /// Returns `c` iff the polynomial is exactly c·X11 with c > 0.
    pub fn x1_multiple(&self) -> Option<Rat> {
        let c = &self.coeffs[3];
        if !c.is_zero() && self.coeffs[..3].iter().all(|x| x.is_zero()) {
            Some(c.clone())
        } else {
            None
        }
    }

    /// Substitute a numeric input distribution into the polynomial.
    pub fn evaluate(&self, dist: &[(Symbol, Rat)]) -> Result<Rat, PolyError> {
        let mut sum = zero();
        let mut values = [zero(), zero(), zero(), zero()];
        for (sym, p) in dist {
            if p < &zero() {
                return Err(PolyError::BadDistribution);
            }
            values[sym.index()] += p;
            sum += p;
        }
        if sum != one() {
            return Err(PolyError::BadDistribution);
        }
        let mut acc = zero();
        for (c, v) in self.coeffs.iter().zip(&values) {
            acc += c * v;
        }
        Ok(acc)
    }
}

impl fmt::Display for ProbPoly {
    /// Renders e.g. `1/2 X00 + 1/2 X01`, sorted by symbol. The `X0`/`X1`
    /// shorthands are used only when the coefficient pattern matches
    /// exactly: equal nonzero coefficients on X00, X01, X10 become `X0`,
    /// and the X11 coefficient then prints as `X1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let term = |coeff: &Rat, name: &str| {
            if coeff == &one() {
                name.to_string()
            } else {
                format!("{} {}", fmt_rat(coeff), name)
            }
        };
        let mut terms = Vec::new();
        let c0 = &self.coeffs[0];
        let shorthand =
            !c0.is_zero() && self.coeffs[1] == *c0 && self.coeffs[2] == *c0;
        if shorthand {
            terms.push(term(c0, "X0"));
            if !self.coeffs[3].is_zero() {
                terms.push(term(&self.coeffs[3], "X1"));
            }
        } else {
            for sym in Symbol::ALL {
                let c = self.coeff(sym);
                if !c.is_zero() {
                    terms.push(term(c, &sym.to_string()));
                }
            }
        }
        f.write_str(&terms.join(" + "))
    }
}
