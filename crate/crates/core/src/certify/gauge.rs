//! Gauge transport: pull the candidate back along F = exp(S), S a nilpotent
//! derivation, solve for the S-parameters that kill chosen coefficients of
//! F*ψ, and read off an h-null direction.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::derivations::{verify_derivation, DerivationFamily, ExtensionSpec};
use crate::exact_arith::{
    affine_system, identity, mat_mul, solve_linear, ArithError, PolyMatrix, Polynomial, Rational,
    Var,
};
use crate::exterior::{pullback, KForm};
use crate::hitchin::{k_psi_unchecked, lambda};

use super::{candidate_forms, Certificate, CertificateKind, CertifyError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeData {
    pub s_matrix: PolyMatrix,
    pub s_params: Vec<String>,
    pub targets: Vec<Vec<usize>>,
    /// Cramer numerators of the solved parameters, in `s_params` order.
    pub numerators: Vec<Polynomial>,
    /// Determinant of the gauge system: the solution is valid where it
    /// does not vanish.
    pub determinant: Polynomial,
    pub null_pair: [usize; 2],
    /// det^scale_exponent · F̄*ψ, nonzero terms only.
    pub transformed_psi: Vec<(Vec<usize>, Polynomial)>,
    pub scale_exponent: u32,
    /// K e_i for the scaled form; zero outside rows i and j.
    pub k_column: Vec<Polynomial>,
}

/// exp(S) = Σ S^k/k! for a nilpotent S.
pub fn matrix_exp_nilpotent(s: &PolyMatrix) -> PolyMatrix {
    let n = s.len();
    let mut out = identity(n);
    let mut power = identity(n);
    let mut fact = Rational::one();
    for k in 1..=n {
        power = mat_mul(&power, s);
        if power.iter().flatten().all(Polynomial::is_zero) {
            break;
        }
        fact = &fact * &Rational::from_int(k as i64);
        let inv = fact.recip();
        for (row, prow) in out.iter_mut().zip(&power) {
            for (x, p) in row.iter_mut().zip(prow) {
                x.add_assign_ref(&p.scale(&inv));
            }
        }
    }
    out
}

fn degree_in_set(p: &Polynomial, vars: &BTreeSet<Var>) -> u32 {
    p.terms()
        .map(|(m, _)| {
            m.factors()
                .filter(|(v, _)| vars.contains(v))
                .map(|(_, e)| e)
                .sum()
        })
        .max()
        .unwrap_or(0)
}

/// Gauge-transport certificate for the candidate of `e`.
///
/// Errors with `SingularSymbolicSystem` when the target coefficients do not
/// determine the parameters of `s` (including when `s` has too few of them).
pub fn gauge_transport(
    id: &str,
    e: &ExtensionSpec,
    s: &DerivationFamily,
    targets: &[Vec<usize>],
    null_pair: [usize; 2],
) -> Result<Certificate> {
    let base = &e.base;
    let n = base.dim();
    verify_derivation(base, s)?;
    if !s.is_identically_nilpotent() {
        return Err(CertifyError::IdentityFailure("S is not nilpotent".into()));
    }
    let f = matrix_exp_nilpotent(&s.matrix);
    let (omega, psi) = candidate_forms(base, &e.derivation)?;
    let fpsi = pullback(&f, &psi)?;

    if s.params.len() != targets.len() || targets.is_empty() {
        return Err(CertifyError::SingularSymbolicSystem(Polynomial::zero()));
    }
    let eqs: Vec<Polynomial> = targets.iter().map(|t| fpsi.coeff(t)).collect();
    let (a, b) = affine_system(&eqs, &s.params)?;
    let sol = match solve_linear(&a, &b) {
        Ok(sol) => sol,
        Err(ArithError::SingularSymbolicSystem(det)) => {
            return Err(CertifyError::SingularSymbolicSystem(det))
        }
        Err(err) => return Err(err.into()),
    };
    let det = sol.determinant.clone();
    let nums: HashMap<Var, Polynomial> = s
        .params
        .iter()
        .copied()
        .zip(sol.numerators.iter().cloned())
        .collect();
    let svars: BTreeSet<Var> = s.params.iter().copied().collect();

    let mut cleared = Vec::new();
    for (idx, c) in fpsi.sorted_terms() {
        let v = c.substitute_fractions(&nums, &det);
        if targets.contains(&idx) {
            if !v.is_zero() {
                return Err(CertifyError::IdentityFailure(format!(
                    "target coefficient {idx:?} survives the substitution"
                )));
            }
            continue;
        }
        if !v.is_zero() {
            cleared.push((idx, v, degree_in_set(c, &svars)));
        }
    }
    let scale = cleared.iter().map(|(_, _, d)| *d).max().unwrap_or(0);
    let mut powers = vec![Polynomial::one()];
    for k in 1..=scale as usize {
        powers.push(&powers[k - 1] * &det);
    }
    let transformed: Vec<(Vec<usize>, Polynomial)> = cleared
        .into_iter()
        .map(|(idx, v, d)| (idx, &v * &powers[(scale - d) as usize]))
        .collect();

    let [i, j] = null_pair;
    let fomega = pullback(&f, &omega)?;
    let w = fomega.coeff(&[i, j]).substitute_fractions(&nums, &det);
    if !w.is_zero() {
        return Err(CertifyError::IdentityFailure(format!(
            "F̄*ω(e{i}, e{j}) = {w} after clearing denominators"
        )));
    }

    let mut psi_bar = KForm::zero(n, 3);
    for (idx, c) in &transformed {
        psi_bar = &psi_bar + &KForm::monomial(n, idx, c.clone())?;
    }
    let k = k_psi_unchecked(&psi_bar)?;
    let col: Vec<Polynomial> = k.column(i).coords().to_vec();
    for (r, c) in col.iter().enumerate() {
        if r + 1 != i && r + 1 != j && !c.is_zero() {
            return Err(CertifyError::IdentityFailure(format!(
                "K e{i} has component {c} along e{}",
                r + 1
            )));
        }
    }
    if lambda(&fpsi)? != lambda(&psi)? {
        return Err(CertifyError::IdentityFailure(
            "λ is not preserved by exp(S)".into(),
        ));
    }

    Ok(Certificate::new(
        id,
        CertificateKind::GaugeNull(Box::new(GaugeData {
            s_matrix: s.matrix.clone(),
            s_params: s.params.iter().map(|v| v.name().to_string()).collect(),
            targets: targets.to_vec(),
            numerators: sol.numerators,
            determinant: det,
            null_pair,
            transformed_psi: transformed,
            scale_exponent: scale,
            k_column: col,
        })),
    ))
}
