use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::poly::{Polynomial, Var};
use super::rational::Rational;
use super::ArithError;

/// Quotient of two polynomials. Normalized by removing the rational content
/// and the common monomial factor of numerator and denominator; no
/// multivariate gcd is attempted.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn zero() -> Self {
        Self::from_poly(Polynomial::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Polynomial::one())
    }

    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let mut num = num;
        let mut den = den;
        let mono = num.monomial_content().gcd(&den.monomial_content());
        if !mono.is_one() {
            num = num.div_monomial(&mono).expect("common monomial factor");
            den = den.div_monomial(&mono).expect("common monomial factor");
        }
        let (cn, cd) = (num.content(), den.content());
        let ratio = &cn / &cd;
        let mut p = Rational::from(ratio.numer().clone());
        let mut q = Rational::from(ratio.denom().clone());
        if den.leading_coefficient().is_negative() {
            p = -p;
            q = -q;
        }
        num = num.scale(&(&p / &cn));
        den = den.scale(&(&q / &cd));
        if !den.is_constant() {
            if let Some(q) = num.div_exact(&den) {
                return Self::from_poly(q);
            }
        }
        RationalFunction { num, den }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial value, if the denominator is constant.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        self.den.as_constant().map(|c| self.num.scale(&c.recip()))
    }

    pub fn evaluate(&self, assignment: &HashMap<Var, Rational>) -> Result<Rational, ArithError> {
        let d = self.den.evaluate(assignment)?;
        if d.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        Ok(&self.num.evaluate(assignment)? / &d)
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        RationalFunction::new(self.den.clone(), self.num.clone())
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Polynomial> for RationalFunction {
    fn from(p: Polynomial) -> Self {
        Self::from_poly(p)
    }
}

impl Add<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::normalized(&self.num + &rhs.num, self.den.clone());
        }
        RationalFunction::normalized(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div<&RationalFunction> for &RationalFunction {
    type Output = Result<RationalFunction, ArithError>;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &RationalFunction) -> Result<RationalFunction, ArithError> {
        Ok(self * &rhs.recip()?)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::parse_polynomial;

    fn rf(n: &str, d: &str) -> RationalFunction {
        RationalFunction::new(parse_polynomial(n).unwrap(), parse_polynomial(d).unwrap()).unwrap()
    }

    #[test]
    fn content_and_monomials_are_removed() {
        let r = rf("4*x^2*y", "-6*x*z");
        assert_eq!(r.numerator().to_string(), "-2*x*y");
        assert_eq!(r.denominator().to_string(), "3*z");
    }

    #[test]
    fn arithmetic_identities() {
        let a = rf("x", "x + y");
        let b = rf("y", "x + y");
        assert_eq!((&a + &b), RationalFunction::one());
        let prod = &a * &rf("x + y", "x");
        assert_eq!(prod, RationalFunction::one());
        assert!(RationalFunction::new(Polynomial::one(), Polynomial::zero()).is_err());
    }
}
