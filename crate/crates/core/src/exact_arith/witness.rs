use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use super::parse::parse_polynomial;
use super::poly::Polynomial;
use super::rational::Rational;
use super::ArithError;

/// Proof tree that a polynomial is nonnegative on all of ℝⁿ: squares and
/// positive constants closed under sums and products.
///
/// Serialized as nested arrays: `["sq", "<poly>"]`, `["const", "4"]`,
/// `["sum", child, ...]`, `["prod", child, ...]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonNegWitness {
    Square(Polynomial),
    PositiveConst(Rational),
    Sum(Vec<NonNegWitness>),
    Product(Vec<NonNegWitness>),
}

/// Marker returned by successful checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verified;

impl NonNegWitness {
    pub fn square(p: Polynomial) -> Self {
        NonNegWitness::Square(p)
    }

    pub fn constant(c: impl Into<Rational>) -> Self {
        NonNegWitness::PositiveConst(c.into())
    }

    pub fn expand(&self) -> Result<Polynomial, ArithError> {
        match self {
            NonNegWitness::Square(p) => Ok(p * p),
            NonNegWitness::PositiveConst(c) => {
                if !c.is_positive() {
                    return Err(ArithError::NonPositiveConstant(c.clone()));
                }
                Ok(Polynomial::constant(c.clone()))
            }
            NonNegWitness::Sum(ch) => {
                let mut acc = Polynomial::zero();
                for c in ch {
                    acc.add_assign_ref(&c.expand()?);
                }
                Ok(acc)
            }
            NonNegWitness::Product(ch) => {
                let mut acc = Polynomial::one();
                for c in ch {
                    acc = &acc * &c.expand()?;
                }
                Ok(acc)
            }
        }
    }

    /// The same tree with `f` applied to every squared polynomial.
    pub fn map_polys(&self, f: &impl Fn(&Polynomial) -> Polynomial) -> NonNegWitness {
        match self {
            NonNegWitness::Square(p) => NonNegWitness::Square(f(p)),
            NonNegWitness::PositiveConst(c) => NonNegWitness::PositiveConst(c.clone()),
            NonNegWitness::Sum(ch) => {
                NonNegWitness::Sum(ch.iter().map(|c| c.map_polys(f)).collect())
            }
            NonNegWitness::Product(ch) => {
                NonNegWitness::Product(ch.iter().map(|c| c.map_polys(f)).collect())
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            NonNegWitness::Square(p) => Value::Array(vec!["sq".into(), p.to_string().into()]),
            NonNegWitness::PositiveConst(c) => {
                Value::Array(vec!["const".into(), c.to_string().into()])
            }
            NonNegWitness::Sum(ch) | NonNegWitness::Product(ch) => {
                let tag = if matches!(self, NonNegWitness::Sum(_)) {
                    "sum"
                } else {
                    "prod"
                };
                let mut v = vec![Value::from(tag)];
                v.extend(ch.iter().map(|c| c.to_json()));
                Value::Array(v)
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, String> {
        let arr = v.as_array().ok_or("witness node must be an array")?;
        let tag = arr
            .first()
            .and_then(|t| t.as_str())
            .ok_or("witness node must start with a tag")?;
        let leaf = || -> Result<&str, String> {
            match arr.as_slice() {
                [_, Value::String(s)] => Ok(s.as_str()),
                _ => Err(format!("`{tag}` node takes exactly one string")),
            }
        };
        match tag {
            "sq" => Ok(NonNegWitness::Square(
                parse_polynomial(leaf()?).map_err(|e| e.to_string())?,
            )),
            "const" => {
                let c: Rational = leaf()?
                    .parse()
                    .map_err(|e: super::ParseRationalError| e.to_string())?;
                if !c.is_positive() {
                    return Err(format!("constant {c} is not positive"));
                }
                Ok(NonNegWitness::PositiveConst(c))
            }
            "sum" | "prod" => {
                let ch = arr[1..]
                    .iter()
                    .map(NonNegWitness::from_json)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(if tag == "sum" {
                    NonNegWitness::Sum(ch)
                } else {
                    NonNegWitness::Product(ch)
                })
            }
            other => Err(format!("unknown witness tag `{other}`")),
        }
    }
}

impl Serialize for NonNegWitness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NonNegWitness {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        NonNegWitness::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Verified iff the witness expands to exactly `target`; a verified witness
/// proves `target >= 0` everywhere.
pub fn check_nonneg_witness(
    target: &Polynomial,
    w: &NonNegWitness,
) -> Result<Verified, ArithError> {
    let diff = target - &w.expand()?;
    if diff.is_zero() {
        Ok(Verified)
    } else {
        Err(ArithError::ExpansionMismatch(diff))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    #[test]
    fn product_of_constant_and_square() {
        let w = NonNegWitness::Product(vec![
            NonNegWitness::constant(4),
            NonNegWitness::square(p("alpha_14*alpha_24")),
        ]);
        assert_eq!(
            check_nonneg_witness(&p("4*alpha_14^2*alpha_24^2"), &w),
            Ok(Verified)
        );
    }

    #[test]
    fn square_of_sum_of_squares() {
        let w = NonNegWitness::square(p("alpha_14^2 + alpha_24^2"));
        assert!(check_nonneg_witness(&p("(alpha_14^2 + alpha_24^2)^2"), &w).is_ok());
    }

    #[test]
    fn negative_somewhere_never_verifies() {
        let target = p("x^2 - 1");
        for w in [
            NonNegWitness::square(p("x")),
            NonNegWitness::Sum(vec![
                NonNegWitness::square(p("x")),
                NonNegWitness::constant(1),
            ]),
        ] {
            match check_nonneg_witness(&target, &w) {
                Err(ArithError::ExpansionMismatch(d)) => assert!(!d.is_zero()),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn json_shape() {
        let w = NonNegWitness::Product(vec![
            NonNegWitness::constant(4),
            NonNegWitness::square(p("x")),
        ]);
        let j = serde_json::to_string(&w).unwrap();
        assert_eq!(j, r#"["prod",["const","4"],["sq","x"]]"#);
        let back: NonNegWitness = serde_json::from_str(&j).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<NonNegWitness>(r#"["const","-1"]"#).is_err());
    }
}
