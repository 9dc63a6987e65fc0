//! Structure-equation DSL.
//!
//! ```text
//! tuple := '(' slot (',' slot)* ')'
//! slot  := polynomial expression, linear in the basis symbols eIJ
//! ```
//!
//! `eIJ` is e^i∧e^j (single digits, so n ≤ 9); `e21` is read as −e^{12}.
//! Other identifiers must be declared family parameters; they become
//! variables `fam_<name>`. Coefficients may be any polynomial in the
//! parameters: `-e13`, `2/3*e15`, `(p + 1)*e34`, `-p*e24`.

use std::collections::HashMap;

use crate::exact_arith::{tokenize, Parser, Polynomial, Tok, Var};
use crate::exterior::KForm;
use crate::lie::{LieAlgebra, LieError};

use super::CatalogError;

const MARKER_PREFIX: &str = "dsl_e";

fn marker(i: usize, j: usize) -> Var {
    Var::new(&format!("{MARKER_PREFIX}{i}{j}"))
}

pub fn family_var(name: &str) -> Var {
    Var::new(&format!("fam_{name}"))
}

struct SlotResolver<'a> {
    params: &'a [String],
}

impl crate::exact_arith::Resolver for SlotResolver<'_> {
    fn resolve(&self, ident: &str) -> Option<Polynomial> {
        if let Some(rest) = ident.strip_prefix('e') {
            let b = rest.as_bytes();
            if b.len() == 2 && b.iter().all(u8::is_ascii_digit) {
                return Some(Polynomial::var(marker(
                    (b[0] - b'0') as usize,
                    (b[1] - b'0') as usize,
                )));
            }
        }
        self.params
            .iter()
            .any(|p| p == ident)
            .then(|| Polynomial::var(family_var(ident)))
    }

    fn describe(&self) -> &'static str {
        "basis symbol eIJ or family parameter"
    }
}

/// Parse to the list of differentials without checking d² = 0.
pub fn parse_differentials(text: &str, params: &[String]) -> Result<Vec<KForm>, CatalogError> {
    let resolver = SlotResolver { params };
    let mut p = Parser::new(tokenize(text, 0)?, &resolver);
    p.expect_sym('(')?;
    let mut slots = vec![(p.position(), p.expr()?)];
    loop {
        match p.peek() {
            Tok::Sym(',') => {
                p.bump();
                slots.push((p.position(), p.expr()?));
            }
            Tok::Sym(')') => {
                p.bump();
                break;
            }
            _ => return Err(p.error(&["`,`", "`)`"]).into()),
        }
    }
    if p.peek() != &Tok::End {
        return Err(p.error(&["end of input"]).into());
    }
    let n = slots.len();
    if n > 9 {
        return Err(CatalogError::TooManySlots(n));
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(k, (pos, poly))| slot_to_form(k + 1, pos, &poly, n))
        .collect()
}

fn slot_to_form(
    slot: usize,
    position: usize,
    poly: &Polynomial,
    n: usize,
) -> Result<KForm, CatalogError> {
    let mut form = KForm::zero(n, 2);
    for (mono, c) in poly.terms() {
        let mut basis = None;
        let mut rest = Polynomial::constant(c.clone());
        for (v, e) in mono.factors() {
            let name = v.name();
            match name.strip_prefix(MARKER_PREFIX) {
                Some(ij) if e == 1 && basis.is_none() => {
                    let b = ij.as_bytes();
                    basis = Some(((b[0] - b'0') as usize, (b[1] - b'0') as usize));
                }
                Some(_) => return Err(CatalogError::NotLinearInBasis { slot, position }),
                None => rest = &rest * &Polynomial::var(v),
            }
        }
        let Some((i, j)) = basis else {
            return Err(CatalogError::NotLinearInBasis { slot, position });
        };
        for idx in [i, j] {
            if idx == 0 || idx > n {
                return Err(CatalogError::IndexOutOfRange {
                    index: idx,
                    dim: n,
                    position,
                });
            }
        }
        if i == j {
            continue;
        }
        let term = KForm::monomial(n, &[i, j], rest)?;
        form = &form + &term;
    }
    Ok(form)
}

/// Parse and check the Jacobi identity (d² = 0) identically in the family
/// parameters.
pub fn parse_structure_equations(
    text: &str,
    params: &[String],
) -> Result<LieAlgebra, CatalogError> {
    let diffs = parse_differentials(text, params)?;
    match LieAlgebra::new(String::new(), diffs) {
        Ok(l) => Ok(l),
        Err(LieError::JacobiFails { index, residue }) => {
            Err(CatalogError::JacobiFailure { index, residue })
        }
        Err(e) => Err(e.into()),
    }
}

/// Render an algebra back into the DSL, parameters written by their
/// declared names.
pub fn format_structure_equations(l: &LieAlgebra) -> String {
    let mut rename = HashMap::new();
    for v in l.parameters() {
        if let Some(short) = v.name().strip_prefix("fam_") {
            rename.insert(v, Var::new(short));
        }
    }
    let slots: Vec<String> = l
        .differentials()
        .iter()
        .map(|f| {
            let mut s = String::new();
            for (idx, c) in f.sorted_terms() {
                let c = c.rename(&rename);
                let basis = format!("e{}{}", idx[0], idx[1]);
                let (neg, body) = match c.as_constant() {
                    Some(k) if k.abs().is_one() => (k.is_negative(), basis),
                    Some(k) => (k.is_negative(), format!("{}*{basis}", k.abs())),
                    None => (false, format!("({c})*{basis}")),
                };
                match (s.is_empty(), neg) {
                    (true, true) => s.push('-'),
                    (true, false) => {}
                    (false, true) => s.push_str(" - "),
                    (false, false) => s.push_str(" + "),
                }
                s.push_str(&body);
            }
            if s.is_empty() {
                "0".into()
            } else {
                s
            }
        })
        .collect();
    format!("({})", slots.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::KForm;

    fn no_params(text: &str) -> Result<LieAlgebra, CatalogError> {
        parse_structure_equations(text, &[])
    }

    #[test]
    fn g34_plus_r3() {
        let l = no_params("(-e13, e23, 0, 0, 0, 0)").unwrap();
        assert_eq!(l.dim(), 6);
        assert_eq!(
            l.de(1),
            &KForm::monomial(6, &[1, 3], Polynomial::int(-1)).unwrap()
        );
        assert!(l.de(4).is_zero());
    }

    #[test]
    fn abelian_six() {
        let l = no_params("(0,0,0,0,0,0)").unwrap();
        assert!(l.differentials().iter().all(KForm::is_zero));
    }

    #[test]
    fn rational_coefficients() {
        let l = no_params("(-e24 - 2/3*e15, -e34 + 1/3*e25, 4/3*e35, -e45, 0, 0)").unwrap();
        assert_eq!(
            l.de(1).coeff(&[1, 5]),
            Polynomial::constant("-2/3".parse().unwrap())
        );
        assert_eq!(
            l.de(3).coeff(&[3, 5]),
            Polynomial::constant("4/3".parse().unwrap())
        );
    }

    #[test]
    fn reversed_indices_flip_sign() {
        let l = no_params("(e32, 0, 0)").unwrap();
        assert_eq!(l.de(1).coeff(&[2, 3]), Polynomial::int(-1));
    }

    #[test]
    fn family_parameters() {
        let params = vec!["p".to_string()];
        let l = parse_structure_equations("(-e14, -p*e24, (p + 1)*e34, 0, 0, 0)", &params).unwrap();
        assert_eq!(
            l.de(3).coeff(&[3, 4]),
            &Polynomial::named("fam_p") + &Polynomial::one()
        );
        assert!(matches!(
            parse_structure_equations("(-e14, -q*e24, 0, 0, 0, 0)", &params),
            Err(CatalogError::Syntax(_))
        ));
    }

    #[test]
    fn errors() {
        match no_params("(-e13, e23,, 0)") {
            Err(CatalogError::Syntax(e)) => assert_eq!(e.position, 11),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            no_params("(e17, 0, 0)"),
            Err(CatalogError::IndexOutOfRange {
                index: 7,
                dim: 3,
                ..
            })
        ));
        assert!(matches!(
            no_params("(e12*e23, 0, 0)"),
            Err(CatalogError::NotLinearInBasis { slot: 1, .. })
        ));
        assert!(matches!(
            no_params("(1, 0, 0)"),
            Err(CatalogError::NotLinearInBasis { .. })
        ));
        assert!(matches!(
            no_params("(0, 0, 0))"),
            Err(CatalogError::Syntax(_))
        ));
        match no_params("(e23, 0, e14, 0)") {
            Err(CatalogError::JacobiFailure { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn format_round_trip() {
        let params = vec!["p".to_string()];
        for src in [
            "(-e13, e23, 0, 0, 0, 0)",
            "(-e24 - 2/3*e15, -e34 + 1/3*e25, 4/3*e35, -e45, 0, 0)",
            "(-e14, (-p)*e24, (p + 1)*e34, 0, 0, 0)",
        ] {
            let l = parse_structure_equations(src, &params).unwrap();
            let text = format_structure_equations(&l);
            let back = parse_structure_equations(&text, &params).unwrap();
            assert_eq!(back.differentials(), l.differentials(), "{text}");
        }
    }
}
