//! Exact linear algebra over ℚ and over the fraction field of ℚ[x₁,…].

use super::poly::{Polynomial, Var};
use super::ratfun::RationalFunction;
use super::rational::Rational;
use super::ArithError;

pub type PolyMatrix = Vec<Vec<Polynomial>>;
pub type QMatrix = Vec<Vec<Rational>>;

/// Fraction-free (Bareiss) elimination. Returns (rank, sign of row
/// permutation, echelon matrix). Every division is exact.
fn bareiss(mut m: PolyMatrix) -> (usize, i32, PolyMatrix) {
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut prev = Polynomial::one();
    let mut sign = 1;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows)
            .filter(|&i| !m[i][c].is_zero())
            .min_by_key(|&i| m[i][c].num_terms())
        else {
            continue;
        };
        if p != r {
            m.swap(p, r);
            sign = -sign;
        }
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let t = &(&m[r][c] * &m[i][j]) - &(&m[i][c] * &m[r][j]);
                m[i][j] = t.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[i][c] = Polynomial::zero();
        }
        // columns left of c in rows below r are already zero
        prev = m[r][c].clone();
        r += 1;
    }
    (r, sign, m)
}

pub fn determinant(m: &PolyMatrix) -> Polynomial {
    let n = m.len();
    if n == 0 {
        return Polynomial::one();
    }
    assert!(m.iter().all(|r| r.len() == n), "square matrix required");
    let (rank, sign, e) = bareiss(m.clone());
    if rank < n {
        return Polynomial::zero();
    }
    let d = e[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Rank over the rational-function field.
pub fn rank(m: &PolyMatrix) -> usize {
    bareiss(m.clone()).0
}

/// Solution of a square symbolic system by Cramer's rule; all components
/// share `determinant` as denominator.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub numerators: Vec<Polynomial>,
    pub determinant: Polynomial,
}

impl LinearSolution {
    pub fn values(&self) -> Vec<RationalFunction> {
        self.numerators
            .iter()
            .map(|n| {
                RationalFunction::new(n.clone(), self.determinant.clone()).expect("nonzero det")
            })
            .collect()
    }
}

pub fn solve_linear(system: &PolyMatrix, rhs: &[Polynomial]) -> Result<LinearSolution, ArithError> {
    let n = system.len();
    if system.iter().any(|r| r.len() != n) || rhs.len() != n {
        return Err(ArithError::ShapeMismatch);
    }
    let det = determinant(system);
    if det.is_zero() {
        return Err(ArithError::SingularSymbolicSystem(det));
    }
    let numerators = (0..n)
        .map(|i| {
            let mut a = system.clone();
            for (row, b) in a.iter_mut().zip(rhs) {
                row[i] = b.clone();
            }
            determinant(&a)
        })
        .collect();
    Ok(LinearSolution {
        numerators,
        determinant: det,
    })
}

/// Reduced row echelon form over ℚ in place; returns pivot columns.
pub fn rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_q(m: &QMatrix) -> usize {
    rref(&mut m.clone()).len()
}

/// Basis of {x : m x = 0}, one vector per free column, in increasing
/// free-column order; each basis vector has a 1 in its free column.
pub fn nullspace(m: &QMatrix, cols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -&a[row][f];
            }
            v
        })
        .collect()
}

pub fn determinant_q(m: &QMatrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in (c + 1)..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= &t;
            }
        }
    }
    det
}

/// Extract the coefficient matrix and right-hand side of equations
/// `e_k(vars) = 0` that are affine in `vars`: returns (A, b) with A·vars = b.
pub fn affine_system(
    equations: &[Polynomial],
    vars: &[Var],
) -> Result<(PolyMatrix, Vec<Polynomial>), ArithError> {
    let set = vars.iter().copied().collect();
    let mut a = Vec::with_capacity(equations.len());
    let mut b = Vec::with_capacity(equations.len());
    for e in equations {
        if !e.is_affine_in(&set) {
            return Err(ArithError::NotAffine(e.clone()));
        }
        let (coeffs, constant) = e.affine_parts(vars);
        a.push(coeffs);
        b.push(-constant);
    }
    Ok((a, b))
}

pub fn identity(n: usize) -> PolyMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Polynomial::one()
                    } else {
                        Polynomial::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &PolyMatrix, b: &PolyMatrix) -> PolyMatrix {
    let n = a.len();
    let m = b.first().map(|r| r.len()).unwrap_or(0);
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = Polynomial::zero();
                    for l in 0..k {
                        if a[i][l].is_zero() || b[l][j].is_zero() {
                            continue;
                        }
                        acc.add_assign_ref(&(&a[i][l] * &b[l][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_is_zero(a: &PolyMatrix) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}
