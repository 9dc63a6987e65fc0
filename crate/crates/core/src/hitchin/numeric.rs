//! Dense integer evaluation of the dimension-6 invariants for forms with
//! rational coefficients. Forms are first rescaled to integer coefficients
//! by a positive factor, which changes none of the signs read off below.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact_arith::{determinant_q, QMatrix, Rational};
use crate::exterior::{merge_sign, KForm};

use super::{Definiteness, PositivityMode, Su3Outcome};

const N: usize = 6;
const FULL: u16 = (1 << N) - 1;

type IntForm = BTreeMap<u16, BigInt>;

/// Integer coefficients of `l·f` with `l > 0` the lcm of the denominators,
/// together with `l`; `None` if a coefficient is not a constant.
fn integral(f: &KForm) -> Option<(IntForm, BigInt)> {
    let mut coeffs = Vec::with_capacity(f.num_terms());
    let mut l = BigInt::one();
    for (m, c) in f.terms() {
        let q = c.as_constant()?;
        l = l.lcm(q.denom());
        coeffs.push((m, q));
    }
    let out = coeffs
        .into_iter()
        .map(|(m, q)| (m, q.numer() * (&l / q.denom())))
        .filter(|(_, v)| !v.is_zero())
        .collect();
    Some((out, l))
}

fn wedge_int(a: &IntForm, b: &IntForm) -> IntForm {
    let mut out = IntForm::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if ma & mb != 0 {
                continue;
            }
            let p = ca * cb;
            let e = out.entry(ma | mb).or_insert_with(BigInt::zero);
            if merge_sign(*ma, *mb) {
                *e -= p;
            } else {
                *e += p;
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// K[j][i] = top(ι_{e_i}ψ ∧ ψ ∧ e^j) for an integer 3-form.
fn k_int(psi: &IntForm) -> Vec<Vec<BigInt>> {
    let mut k = vec![vec![BigInt::zero(); N]; N];
    for i in 0..N {
        let bit = 1u16 << i;
        let mut contracted = IntForm::new();
        for (m, c) in psi {
            if m & bit == 0 {
                continue;
            }
            let below = (m & (bit - 1)).count_ones();
            let v = if below % 2 == 1 { -c } else { c.clone() };
            *contracted.entry(m & !bit).or_insert_with(BigInt::zero) += v;
        }
        for (five, c) in wedge_int(&contracted, psi) {
            if five.count_ones() != 5 {
                continue;
            }
            let missing = FULL & !five;
            let j = missing.trailing_zeros() as usize;
            k[j][i] = if merge_sign(five, missing) { -c } else { c };
        }
    }
    k
}

fn trace_sq(k: &[Vec<BigInt>]) -> BigInt {
    let mut tr = BigInt::zero();
    for i in 0..N {
        for j in 0..N {
            tr += &k[i][j] * &k[j][i];
        }
    }
    tr
}

/// λ(ψ) for a numeric 3-form on ℝ⁶; `None` if some coefficient is symbolic.
pub fn lambda_numeric(psi: &KForm) -> Option<Rational> {
    let (p, l) = integral(psi)?;
    let den = BigInt::from(6) * l.pow(4);
    Some(Rational::new(trace_sq(&k_int(&p)), den))
}

/// Leading principal minors decide definiteness; Bareiss elimination gives
/// all of them in one pass.
fn definiteness(h: &[Vec<BigInt>]) -> Definiteness {
    let mut a = h.to_vec();
    let mut prev = BigInt::one();
    let mut signs = Vec::with_capacity(N);
    for k in 0..N {
        let pivot = a[k][k].clone();
        if pivot.is_zero() {
            let q: QMatrix = h
                .iter()
                .map(|r| r.iter().map(|x| Rational::from(x.clone())).collect())
                .collect();
            return if determinant_q(&q).is_zero() {
                Definiteness::Degenerate
            } else {
                Definiteness::Indefinite
            };
        }
        signs.push(pivot.signum());
        for i in k + 1..N {
            for j in k + 1..N {
                let v = &(&pivot * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = v / &prev;
            }
        }
        prev = pivot;
    }
    let one = BigInt::one();
    if signs.iter().all(|s| *s == one) {
        Definiteness::PosDef
    } else if signs
        .iter()
        .enumerate()
        .all(|(k, s)| if k % 2 == 0 { *s == -&one } else { *s == one })
    {
        Definiteness::NegDef
    } else {
        Definiteness::Indefinite
    }
}

/// su3_check for numeric forms; `None` if a coefficient is symbolic.
pub(super) fn su3_check_numeric(
    omega: &KForm,
    psi: &KForm,
    mode: PositivityMode,
) -> Option<Su3Outcome> {
    let (w, _) = integral(omega)?;
    let (p, _) = integral(psi)?;
    let vol = wedge_int(&wedge_int(&w, &w), &w)
        .remove(&FULL)
        .unwrap_or_default();
    if vol.is_zero() {
        return Some(Su3Outcome::FailsNondegeneracy);
    }
    let k = k_int(&p);
    if !trace_sq(&k).is_negative() {
        return Some(Su3Outcome::FailsStability);
    }
    if !wedge_int(&w, &p).is_empty() {
        return Some(Su3Outcome::FailsPrimitivity);
    }
    let mut om = vec![vec![BigInt::zero(); N]; N];
    for (m, c) in &w {
        let i = m.trailing_zeros() as usize;
        let j = (m & (m - 1)).trailing_zeros() as usize;
        om[i][j] = c.clone();
        om[j][i] = -c;
    }
    let h: Vec<Vec<BigInt>> = (0..N)
        .map(|i| {
            (0..N)
                .map(|j| (0..N).map(|r| &om[i][r] * &k[r][j]).sum())
                .collect()
        })
        .collect();
    let class = definiteness(&h);
    let ok = match mode {
        PositivityMode::EitherSign => matches!(class, Definiteness::PosDef | Definiteness::NegDef),
        PositivityMode::OrientationMatched => {
            (vol.is_positive() && class == Definiteness::PosDef)
                || (vol.is_negative() && class == Definiteness::NegDef)
        }
    };
    Some(if ok {
        Su3Outcome::Passes
    } else {
        Su3Outcome::FailsPositivity
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hitchin::{lambda, standard_su3_pair};

    #[test]
    fn standard_pair_numeric() {
        let (omega, psi) = standard_su3_pair();
        assert_eq!(lambda_numeric(&psi), Some(Rational::from_int(-4)));
        assert_eq!(lambda_numeric(&psi), lambda(&psi).unwrap().as_constant());
        assert_eq!(
            su3_check_numeric(&omega, &psi, PositivityMode::EitherSign),
            Some(Su3Outcome::Passes)
        );
        let half = psi.scale_q(&Rational::new(1, 2));
        assert_eq!(lambda_numeric(&half), Some(Rational::new(-1, 4)));
    }

    #[test]
    fn bareiss_minors() {
        let m = |rows: [[i64; 6]; 6]| -> Vec<Vec<BigInt>> {
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect()
        };
        let mut id = [[0i64; 6]; 6];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 2;
        }
        assert_eq!(definiteness(&m(id)), Definiteness::PosDef);
        id[5][5] = 0;
        assert_eq!(definiteness(&m(id)), Definiteness::Degenerate);
        id[5][5] = -1;
        assert_eq!(definiteness(&m(id)), Definiteness::Indefinite);
        let neg = id.map(|r| r.map(|x| -x.abs()));
        assert_eq!(definiteness(&m(neg)), Definiteness::NegDef);
    }
}
