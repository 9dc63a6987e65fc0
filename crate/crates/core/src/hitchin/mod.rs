//! Stable-form invariants: the bilinear form b_φ of a 3-form in dimension 7,
//! and K_ψ, λ(ψ) and h = ω(·, K_ψ ·) for a pair (ω, ψ) in dimension 6.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exact_arith::{determinant_q, PolyMatrix, Polynomial, QMatrix, Rational};
use crate::exterior::{contract, top_coefficient, wedge, ExteriorError, KForm, VectorExpr};

mod numeric;

pub use numeric::lambda_numeric;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HitchinError {
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("expected a {expected}-dimensional form, got dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected a form of degree {expected}, got degree {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("K^2 - lambda*Id is not zero at entry ({row}, {col}): {residue}")]
    KSquareNotScalar {
        row: usize,
        col: usize,
        residue: Polynomial,
    },
    #[error("matrix entry ({0}, {1}) is not a rational number")]
    NonNumericEntries(usize, usize),
}

type Result<T> = std::result::Result<T, HitchinError>;

fn expect_shape(f: &KForm, dim: usize, degree: usize) -> Result<()> {
    if f.dim() != dim {
        return Err(HitchinError::DimensionMismatch {
            expected: dim,
            found: f.dim(),
        });
    }
    if f.degree() != degree && !f.is_zero() {
        return Err(HitchinError::DegreeMismatch {
            expected: degree,
            found: f.degree(),
        });
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymBilinear {
    pub entries: PolyMatrix,
}

impl SymBilinear {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// (i, j) entry, 1-based.
    pub fn at(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i - 1][j - 1]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i + 1..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn to_rational(&self) -> Result<QMatrix> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, c)| {
                        c.as_constant()
                            .ok_or(HitchinError::NonNumericEntries(i + 1, j + 1))
                    })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Debug for SymBilinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    PosDef,
    NegDef,
    Indefinite,
    Degenerate,
}

/// Exact classification from leading principal minors.
pub fn is_definite(b: &SymBilinear) -> Result<Definiteness> {
    let m = b.to_rational()?;
    let n = m.len();
    let minor = |k: usize| -> Rational {
        let sub: QMatrix = m[..k].iter().map(|r| r[..k].to_vec()).collect();
        determinant_q(&sub)
    };
    if minor(n).is_zero() {
        return Ok(Definiteness::Degenerate);
    }
    let signs: Vec<i32> = (1..=n).map(|k| minor(k).signum()).collect();
    if signs.iter().all(|&s| s > 0) {
        Ok(Definiteness::PosDef)
    } else if signs
        .iter()
        .enumerate()
        .all(|(k, &s)| if k % 2 == 0 { s < 0 } else { s > 0 })
    {
        Ok(Definiteness::NegDef)
    } else {
        Ok(Definiteness::Indefinite)
    }
}

/// b_φ(e_i, e_j) = (1/6)·top(ι_{e_i}φ ∧ ι_{e_j}φ ∧ φ).
pub fn b_phi(phi: &KForm) -> Result<SymBilinear> {
    expect_shape(phi, 7, 3)?;
    let n = 7;
    let sixth = Rational::new(1, 6);
    let contracted: Vec<KForm> = (1..=n)
        .map(|i| contract(&VectorExpr::basis(n, i), phi))
        .collect::<std::result::Result<_, _>>()?;
    let mut entries = vec![vec![Polynomial::zero(); n]; n];
    for i in 0..n {
        let left = wedge(&contracted[i], phi)?;
        for j in i..n {
            let t = top_coefficient(&wedge(&contracted[j], &left)?)?.scale(&sixth);
            entries[j][i] = t.clone();
            entries[i][j] = t;
        }
    }
    Ok(SymBilinear { entries })
}

/// K_ψ together with λ(ψ) = (1/6)·tr K².
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KOperator {
    pub entries: PolyMatrix,
    pub lambda: Polynomial,
}

impl KOperator {
    pub fn apply(&self, v: &VectorExpr) -> VectorExpr {
        VectorExpr::apply(&self.entries, v)
    }

    /// K e_i, 1-based.
    pub fn column(&self, i: usize) -> VectorExpr {
        VectorExpr::new(self.entries.iter().map(|r| r[i - 1].clone()).collect())
    }
}

impl fmt::Debug for KOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KOperator")
            .field("entries", &self.entries)
            .field("lambda", &self.lambda)
            .finish()
    }
}

/// K_ψ with volume e^{123456}: K[j][i] = top(ι_{e_i}ψ ∧ ψ ∧ e^j).
/// The identity K² = λ·Id is verified before returning.
pub fn k_psi(psi: &KForm) -> Result<KOperator> {
    let k = k_psi_unchecked(psi)?;
    let n = 6;
    let sq = crate::exact_arith::mat_mul(&k.entries, &k.entries);
    for (i, row) in sq.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            let expected = if i == j {
                k.lambda.clone()
            } else {
                Polynomial::zero()
            };
            if *c != expected {
                return Err(HitchinError::KSquareNotScalar {
                    row: i + 1,
                    col: j + 1,
                    residue: c - &expected,
                });
            }
        }
    }
    debug_assert_eq!(sq.len(), n);
    Ok(k)
}

/// K_ψ and λ without the K² = λ·Id self-check.
pub fn k_psi_unchecked(psi: &KForm) -> Result<KOperator> {
    expect_shape(psi, 6, 3)?;
    let n = 6;
    let mut entries = vec![vec![Polynomial::zero(); n]; n];
    for i in 1..=n {
        let five = wedge(&contract(&VectorExpr::basis(n, i), psi)?, psi)?;
        for j in 1..=n {
            let t = top_coefficient(&wedge(&five, &KForm::basis(n, &[j])?)?)?;
            entries[j - 1][i - 1] = t;
        }
    }
    let mut tr = Polynomial::zero();
    for i in 0..n {
        for j in 0..n {
            if !entries[i][j].is_zero() && !entries[j][i].is_zero() {
                tr.add_assign_ref(&(&entries[i][j] * &entries[j][i]));
            }
        }
    }
    Ok(KOperator {
        entries,
        lambda: tr.scale(&Rational::new(1, 6)),
    })
}

/// λ(ψ) alone.
pub fn lambda(psi: &KForm) -> Result<Polynomial> {
    Ok(k_psi_unchecked(psi)?.lambda)
}

/// h(e_i, e_j) = ω(e_i, K e_j).
pub fn h_form(omega: &KForm, k: &KOperator) -> Result<SymBilinear> {
    expect_shape(omega, 6, 2)?;
    let n = 6;
    let mut entries = vec![vec![Polynomial::zero(); n]; n];
    for i in 1..=n {
        let row = contract(&VectorExpr::basis(n, i), omega)?;
        for j in 1..=n {
            let kej = k.column(j);
            entries[i - 1][j - 1] = contract(&kej, &row)?.coeff_mask(0);
        }
    }
    Ok(SymBilinear { entries })
}

/// Which definite signs of h count as positivity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositivityMode {
    /// Either definite sign passes.
    #[default]
    EitherSign,
    /// sign(top(ω³))·h must be positive definite.
    OrientationMatched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Su3Outcome {
    Passes,
    FailsNondegeneracy,
    FailsStability,
    FailsPrimitivity,
    FailsPositivity,
}

/// Conditions in order: ω³ ≠ 0, λ(ψ) < 0, ω ∧ ψ = 0, h definite.
pub fn su3_check(omega: &KForm, psi: &KForm, mode: PositivityMode) -> Result<Su3Outcome> {
    expect_shape(omega, 6, 2)?;
    expect_shape(psi, 6, 3)?;
    if let Some(out) = numeric::su3_check_numeric(omega, psi, mode) {
        return Ok(out);
    }
    let cube = wedge(&wedge(omega, omega)?, omega)?;
    let vol = if cube.is_zero() {
        Polynomial::zero()
    } else {
        top_coefficient(&cube)?
    };
    let vol = vol
        .as_constant()
        .ok_or(HitchinError::NonNumericEntries(0, 0))?;
    if vol.is_zero() {
        return Ok(Su3Outcome::FailsNondegeneracy);
    }
    let k = k_psi_unchecked(psi)?;
    let lam = k
        .lambda
        .as_constant()
        .ok_or(HitchinError::NonNumericEntries(0, 0))?;
    if !lam.is_negative() {
        return Ok(Su3Outcome::FailsStability);
    }
    if !wedge(omega, psi)?.is_zero() {
        return Ok(Su3Outcome::FailsPrimitivity);
    }
    let h = h_form(omega, &k)?;
    let class = is_definite(&h)?;
    let ok = match mode {
        PositivityMode::EitherSign => matches!(class, Definiteness::PosDef | Definiteness::NegDef),
        PositivityMode::OrientationMatched => {
            (vol.is_positive() && class == Definiteness::PosDef)
                || (vol.is_negative() && class == Definiteness::NegDef)
        }
    };
    Ok(if ok {
        Su3Outcome::Passes
    } else {
        Su3Outcome::FailsPositivity
    })
}

/// ω₀ = e¹² + e³⁴ + e⁵⁶ and ψ₀ = e¹³⁵ − e¹⁴⁶ − e²³⁶ − e²⁴⁵.
pub fn standard_su3_pair() -> (KForm, KForm) {
    let b = |idx: &[usize]| KForm::basis(6, idx).expect("valid");
    let omega = &(&b(&[1, 2]) + &b(&[3, 4])) + &b(&[5, 6]);
    let psi = &(&(&b(&[1, 3, 5]) - &b(&[1, 4, 6])) - &b(&[2, 3, 6])) - &b(&[2, 4, 5]);
    (omega, psi)
}

/// φ₀ = e¹²³ + e¹⁴⁵ + e¹⁶⁷ + e²⁴⁶ − e²⁵⁷ − e³⁴⁷ − e³⁵⁶.
pub fn standard_g2_form() -> KForm {
    let b = |idx: &[usize]| KForm::basis(7, idx).expect("valid");
    let mut phi = &(&b(&[1, 2, 3]) + &b(&[1, 4, 5])) + &b(&[1, 6, 7]);
    phi = &phi + &b(&[2, 4, 6]);
    for idx in [[2, 5, 7], [3, 4, 7], [3, 5, 6]] {
        phi = &phi - &b(&idx);
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::parse_polynomial;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn diag(d: &[i64]) -> SymBilinear {
        let n = d.len();
        SymBilinear {
            entries: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                Polynomial::int(d[i])
                            } else {
                                Polynomial::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn b_phi_standard_form_is_identity() {
        let b = b_phi(&standard_g2_form()).unwrap();
        // oracle: expand every (i, j) wedge triple term by term
        let phi = standard_g2_form();
        for i in 1..=7 {
            for j in 1..=7 {
                let mut acc = Polynomial::zero();
                let ci = contract(&VectorExpr::basis(7, i), &phi).unwrap();
                let cj = contract(&VectorExpr::basis(7, j), &phi).unwrap();
                for (ma, a) in ci.terms() {
                    for (mb, bb) in cj.terms() {
                        for (mc, c) in phi.terms() {
                            let fa =
                                KForm::monomial(7, &crate::exterior::mask_indices(ma), a.clone())
                                    .unwrap();
                            let fb =
                                KForm::monomial(7, &crate::exterior::mask_indices(mb), bb.clone())
                                    .unwrap();
                            let fc =
                                KForm::monomial(7, &crate::exterior::mask_indices(mc), c.clone())
                                    .unwrap();
                            let w = wedge(&wedge(&fa, &fb).unwrap(), &fc).unwrap();
                            if !w.is_zero() {
                                acc.add_assign_ref(&top_coefficient(&w).unwrap());
                            }
                        }
                    }
                }
                assert_eq!(b.at(i, j), &acc.scale(&Rational::new(1, 6)));
                assert_eq!(b.at(i, j), &Polynomial::int((i == j) as i64));
            }
        }
        assert_eq!(is_definite(&b).unwrap(), Definiteness::PosDef);
    }

    #[test]
    fn b_phi_zero_and_errors() {
        let b = b_phi(&KForm::zero(7, 3)).unwrap();
        assert!(b.entries.iter().flatten().all(|c| c.is_zero()));
        assert!(matches!(
            b_phi(&KForm::zero(6, 3)),
            Err(HitchinError::DimensionMismatch {
                expected: 7,
                found: 6
            })
        ));
    }

    #[test]
    fn definiteness_classes() {
        assert_eq!(
            is_definite(&diag(&[1, 1, 1])).unwrap(),
            Definiteness::PosDef
        );
        assert_eq!(
            is_definite(&diag(&[-1, -2, -3])).unwrap(),
            Definiteness::NegDef
        );
        assert_eq!(
            is_definite(&diag(&[1, -1, 1])).unwrap(),
            Definiteness::Indefinite
        );
        assert_eq!(
            is_definite(&diag(&[1, 1, 0])).unwrap(),
            Definiteness::Degenerate
        );
        let sym = SymBilinear {
            entries: vec![vec![p("x")]],
        };
        assert_eq!(
            is_definite(&sym),
            Err(HitchinError::NonNumericEntries(1, 1))
        );
    }

    #[test]
    fn k_psi_degenerate_and_standard() {
        let k = k_psi(&KForm::basis(6, &[1, 2, 3]).unwrap()).unwrap();
        assert!(k.lambda.is_zero());
        assert!(k.entries.iter().flatten().all(|c| c.is_zero()));
        let (_, psi) = standard_su3_pair();
        let k = k_psi(&psi).unwrap();
        let lam = k.lambda.as_constant().unwrap();
        assert!(lam.is_negative());
        // brute-force oracle for K column by column
        for i in 1..=6 {
            let five = wedge(&contract(&VectorExpr::basis(6, i), &psi).unwrap(), &psi).unwrap();
            for j in 1..=6 {
                let mut expected = Polynomial::zero();
                for (m, c) in five.terms() {
                    if m & (1 << (j - 1)) == 0 {
                        let mut idx = crate::exterior::mask_indices(m);
                        idx.push(j);
                        expected.add_assign_ref(
                            &KForm::monomial(6, &idx, c.clone())
                                .unwrap()
                                .coeff(&[1, 2, 3, 4, 5, 6]),
                        );
                    }
                }
                assert_eq!(k.entries[j - 1][i - 1], expected);
            }
        }
    }

    #[test]
    fn orientation_flip_negates_k() {
        let (_, psi) = standard_su3_pair();
        let mut flip = crate::exact_arith::identity(6);
        flip[5][5] = p("-1");
        let flipped = crate::exterior::pullback(&flip, &psi).unwrap();
        // in the flipped basis the fixed volume changes sign
        let k = k_psi(&psi).unwrap();
        let kf = k_psi(&flipped).unwrap();
        assert_eq!(k.lambda, kf.lambda);
        let conj =
            crate::exact_arith::mat_mul(&crate::exact_arith::mat_mul(&flip, &k.entries), &flip);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(kf.entries[i][j], -&conj[i][j]);
            }
        }
    }

    #[test]
    fn h_form_with_zero_k() {
        let (omega, _) = standard_su3_pair();
        let k = k_psi(&KForm::basis(6, &[1, 2, 3]).unwrap()).unwrap();
        let h = h_form(&omega, &k).unwrap();
        assert!(h.entries.iter().flatten().all(|c| c.is_zero()));
    }

    #[test]
    fn su3_check_examples() {
        let (omega, psi) = standard_su3_pair();
        assert_eq!(
            su3_check(&omega, &psi, PositivityMode::EitherSign).unwrap(),
            Su3Outcome::Passes
        );
        assert_eq!(
            su3_check(&omega, &psi, PositivityMode::OrientationMatched).unwrap(),
            Su3Outcome::Passes
        );
        let h = h_form(&omega, &k_psi(&psi).unwrap()).unwrap();
        assert!(h.is_symmetric());
        assert_eq!(is_definite(&h).unwrap(), Definiteness::PosDef);
        assert_eq!(
            su3_check(
                &omega,
                &KForm::basis(6, &[1, 2, 3]).unwrap(),
                PositivityMode::EitherSign
            )
            .unwrap(),
            Su3Outcome::FailsStability
        );
        let degenerate = &KForm::basis(6, &[1, 2]).unwrap() + &KForm::basis(6, &[3, 4]).unwrap();
        assert_eq!(
            su3_check(&degenerate, &psi, PositivityMode::EitherSign).unwrap(),
            Su3Outcome::FailsNondegeneracy
        );
        let not_primitive = &omega + &KForm::basis(6, &[1, 3]).unwrap();
        assert_eq!(
            su3_check(&not_primitive, &psi, PositivityMode::EitherSign).unwrap(),
            Su3Outcome::FailsPrimitivity
        );
    }
}
