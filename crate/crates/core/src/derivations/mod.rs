//! Derivations of a Lie algebra, their action on forms, one-dimensional
//! extensions s ⋊_D ℝ and the strong-unimodularity constraints.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::exact_arith::{
    mat_is_zero, mat_mul, nullspace, rank_q, rref, PolyMatrix, Polynomial, QMatrix, Rational,
    RationalFunction, Var,
};
use crate::exterior::{mask_indices, wedge, KForm, VectorExpr};
use crate::lie::{bracket, descending_central_series, LieAlgebra, LieError, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DerivationError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("Leibniz rule fails on (e{i}, e{j}) in component {k}: residual {residual}")]
    LeibnizViolation {
        i: usize,
        j: usize,
        k: usize,
        residual: Polynomial,
    },
    #[error("derivation does not preserve the nilradical")]
    NilradicalNotInvariant,
    #[error("derivation matrix is {found}x{found}, algebra has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("structure constants must be numeric to solve for derivations")]
    SymbolicStructureConstants,
}

type Result<T> = std::result::Result<T, DerivationError>;

/// A matrix family D(a_1, …, a_m) of derivations, affine in the parameters.
#[derive(Clone, PartialEq, Eq)]
pub struct DerivationFamily {
    pub matrix: PolyMatrix,
    pub params: Vec<Var>,
}

impl DerivationFamily {
    pub fn new(matrix: PolyMatrix, params: Vec<Var>) -> Self {
        DerivationFamily { matrix, params }
    }

    pub fn zero(n: usize) -> Self {
        DerivationFamily::new(vec![vec![Polynomial::zero(); n]; n], Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    /// D e_i, 1-based.
    pub fn image(&self, i: usize) -> VectorExpr {
        VectorExpr::new(self.matrix.iter().map(|r| r[i - 1].clone()).collect())
    }

    pub fn apply(&self, v: &VectorExpr) -> VectorExpr {
        VectorExpr::apply(&self.matrix, v)
    }

    pub fn substitute(&self, map: &HashMap<Var, Polynomial>) -> DerivationFamily {
        DerivationFamily {
            matrix: self
                .matrix
                .iter()
                .map(|r| r.iter().map(|c| c.substitute(map)).collect())
                .collect(),
            params: self
                .params
                .iter()
                .filter(|v| !map.contains_key(v))
                .copied()
                .collect(),
        }
    }

    pub fn partial_eval(&self, values: &HashMap<Var, Rational>) -> DerivationFamily {
        DerivationFamily {
            matrix: self
                .matrix
                .iter()
                .map(|r| r.iter().map(|c| c.partial_eval(values)).collect())
                .collect(),
            params: self
                .params
                .iter()
                .filter(|v| !values.contains_key(v))
                .copied()
                .collect(),
        }
    }

    /// Is D nilpotent for every parameter value (Dⁿ ≡ 0)?
    pub fn is_identically_nilpotent(&self) -> bool {
        let mut p = self.matrix.clone();
        for _ in 1..self.dim() {
            if mat_is_zero(&p) {
                return true;
            }
            p = mat_mul(&p, &self.matrix);
        }
        mat_is_zero(&p)
    }

    /// Dⁿ, whose vanishing decides nilpotency.
    pub fn top_power(&self) -> PolyMatrix {
        let mut p = self.matrix.clone();
        for _ in 1..self.dim() {
            p = mat_mul(&p, &self.matrix);
        }
        p
    }

    /// The span of the family as matrices, one vector of n² coordinates per
    /// parameter (coefficient of that parameter), at numeric remaining values.
    fn parameter_span(&self, values: &HashMap<Var, Rational>) -> Option<QMatrix> {
        let mut rows = Vec::new();
        for v in &self.params {
            let mut row = Vec::new();
            for r in &self.matrix {
                for c in r {
                    let coeff = c.derivative(*v).partial_eval(values);
                    row.push(coeff.as_constant()?);
                }
            }
            rows.push(row);
        }
        Some(rows)
    }

    /// Do two families span the same space of matrices once the remaining
    /// (family) parameters take the given values?
    pub fn same_span_at(&self, other: &DerivationFamily, values: &HashMap<Var, Rational>) -> bool {
        let (Some(a), Some(b)) = (self.parameter_span(values), other.parameter_span(values)) else {
            return false;
        };
        let ra = rank_q(&a);
        let rb = rank_q(&b);
        let mut both = a;
        both.extend(b);
        ra == rb && rank_q(&both) == ra
    }
}

impl fmt::Display for DerivationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.matrix {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for DerivationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Checks D[e_i, e_j] = [De_i, e_j] + [e_i, De_j] as polynomial identities.
pub fn verify_derivation(l: &LieAlgebra, d: &DerivationFamily) -> Result<()> {
    let n = l.dim();
    if d.dim() != n {
        return Err(DerivationError::DimensionMismatch {
            expected: n,
            found: d.dim(),
        });
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            let (ei, ej) = (VectorExpr::basis(n, i), VectorExpr::basis(n, j));
            let lhs = d.apply(&bracket(l, &ei, &ej));
            let rhs = &bracket(l, &d.image(i), &ej) + &bracket(l, &ei, &d.image(j));
            let diff = &lhs - &rhs;
            if let Some(k) = (1..=n).find(|&k| !diff.coord(k).is_zero()) {
                return Err(DerivationError::LeibnizViolation {
                    i,
                    j,
                    k,
                    residual: diff.coord(k).clone(),
                });
            }
        }
    }
    Ok(())
}

/// Derivation parameter `a_k`.
pub fn derivation_param(k: usize) -> Var {
    Var::new(&format!("a_{k}"))
}

/// Der(L) at numeric structure constants. The free parameters are the
/// earliest matrix entries (row-major) that can be chosen independently;
/// they are named a_1, a_2, … in that order and appear verbatim as entries.
pub fn solve_derivations(l: &LieAlgebra) -> Result<DerivationFamily> {
    let n = l.dim();
    let mut c = vec![vec![vec![Rational::zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let b = bracket(
                l,
                &VectorExpr::basis(n, i + 1),
                &VectorExpr::basis(n, j + 1),
            );
            for k in 0..n {
                c[i][j][k] = b.coords()[k]
                    .as_constant()
                    .ok_or(DerivationError::SymbolicStructureConstants)?;
            }
        }
    }
    // unknown D_ab sits in column (n² - 1) - (a n + b), so that RREF pivots
    // land on the latest entries and free columns on the earliest
    let col = |a: usize, b: usize| n * n - 1 - (a * n + b);
    let mut rows: QMatrix = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                let mut row = vec![Rational::zero(); n * n];
                for m in 0..n {
                    // (D[e_i,e_j])_k = Σ_m D_km c_ij^m
                    row[col(k, m)] += &c[i][j][m];
                    // ([De_i, e_j])_k = Σ_m D_mi c_mj^k
                    row[col(m, i)] -= &c[m][j][k];
                    // ([e_i, De_j])_k = Σ_m D_mj c_im^k
                    row[col(m, j)] -= &c[i][m][k];
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let basis = if rows.is_empty() {
        (0..n * n)
            .map(|f| {
                let mut v = vec![Rational::zero(); n * n];
                v[f] = Rational::one();
                v
            })
            .collect()
    } else {
        nullspace(&rows, n * n)
    };
    // nullspace vectors come in increasing free-column order, i.e.
    // decreasing row-major entry order
    let mut matrix = vec![vec![Polynomial::zero(); n]; n];
    let mut params = Vec::new();
    for (k, v) in basis.iter().rev().enumerate() {
        let a = derivation_param(k + 1);
        params.push(a);
        let pa = Polynomial::var(a);
        for r in 0..n {
            for s in 0..n {
                let x = &v[col(r, s)];
                if !x.is_zero() {
                    matrix[r][s].add_assign_ref(&pa.scale(x));
                }
            }
        }
    }
    Ok(DerivationFamily::new(matrix, params))
}

/// D* on forms: D*e^i = Σ_j D_ij e^j, extended as a derivation.
pub fn dstar_action(d: &DerivationFamily, f: &KForm) -> KForm {
    let n = f.dim();
    assert_eq!(d.dim(), n, "derivation and form dimensions differ");
    let images: Vec<KForm> = (0..n)
        .map(|i| {
            let mut g = KForm::zero(n, 1);
            for (j, c) in d.matrix[i].iter().enumerate() {
                g.add_term(1 << j, c.clone());
            }
            g
        })
        .collect();
    let mut out = KForm::zero(n, f.degree());
    for (mask, c) in f.terms() {
        let idx = mask_indices(mask);
        for r in 0..idx.len() {
            let left = KForm::monomial(n, &idx[..r], c.clone()).expect("valid");
            let right = KForm::basis(n, &idx[r + 1..]).expect("valid");
            let term =
                wedge(&wedge(&left, &images[idx[r] - 1]).expect("dims"), &right).expect("dims");
            for (m, t) in term.terms() {
                out.add_term(m, t.clone());
            }
        }
    }
    out
}

/// s ⋊_D ℝ with de^i = d̂e^i + Σ_j D_ij e^{j7} and de^7 = 0, so that
/// [e_7, x] = Dx.
#[derive(Clone, Debug)]
pub struct ExtensionSpec {
    pub base: LieAlgebra,
    pub derivation: DerivationFamily,
    pub result: LieAlgebra,
}

pub fn extend(base: &LieAlgebra, d: &DerivationFamily) -> Result<ExtensionSpec> {
    let n = base.dim();
    if d.dim() != n {
        return Err(DerivationError::DimensionMismatch {
            expected: n,
            found: d.dim(),
        });
    }
    let m = n + 1;
    let mut diffs = Vec::with_capacity(m);
    for i in 1..=n {
        let mut f = base.de(i).extend_dim(m);
        for j in 1..=n {
            let c = &d.matrix[i - 1][j - 1];
            if !c.is_zero() {
                f.add_term((1 << (j - 1)) | (1 << n), c.clone());
            }
        }
        diffs.push(f);
    }
    diffs.push(KForm::zero(m, 2));
    let result = LieAlgebra::new(format!("{} x_D R", base.name()), diffs)?;
    Ok(ExtensionSpec {
        base: base.clone(),
        derivation: d.clone(),
        result,
    })
}

/// Strong-unimodularity conditions split by origin.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuConstraints {
    /// Traces of D on the quotients nⁱ/nⁱ⁺¹; in solved (reduced echelon)
    /// form `a_k - (…)` when linear with rational coefficients.
    pub derivation: Vec<Polynomial>,
    /// Traces of ad_{e_j}, j ≤ dim s, on the same quotients: conditions on
    /// the family parameters alone (a nonzero constant means no extension is
    /// strongly unimodular).
    pub inner: Vec<Polynomial>,
}

impl SuConstraints {
    /// Solved-form derivation constraints as a substitution a_k ↦ (…).
    pub fn solved_substitution(&self) -> Option<HashMap<Var, Polynomial>> {
        let mut out = HashMap::new();
        for c in &self.derivation {
            let (lead, coeff) = c
                .sorted_terms()
                .into_iter()
                .find(|(m, _)| m.degree() == 1)
                .map(|(m, k)| (m.clone(), k.clone()))?;
            let v = lead.factors().next()?.0;
            if !coeff.is_one() || c.degree_in(v) != 1 {
                return None;
            }
            out.insert(v, &Polynomial::var(v) - c);
        }
        Some(out)
    }

    pub fn inner_inconsistent(&self) -> Option<&Polynomial> {
        self.inner.iter().find(|p| p.is_constant() && !p.is_zero())
    }
}

fn numerator_constraint(t: &RationalFunction) -> Option<Polynomial> {
    if t.is_zero() {
        None
    } else {
        let n = t.numerator();
        Some(n.scale(&n.content().recip()))
    }
}

/// Traces of D and of each ad_{e_j} on the quotients of the descending
/// central series of the base nilradical.
pub fn strongly_unimodular_constraints(
    e: &ExtensionSpec,
    nilradical: &Subspace,
) -> Result<SuConstraints> {
    let base = &e.base;
    let n = base.dim();
    for g in nilradical.generators() {
        if !nilradical.contains(&e.derivation.apply(g)) {
            return Err(DerivationError::NilradicalNotInvariant);
        }
    }
    let mut series = descending_central_series(base, nilradical)?;
    if !series.last().map(|s| s.is_zero()).unwrap_or(true) {
        series.push(Subspace::zero(n));
    }
    let mut d_raw = Vec::new();
    let mut inner = Vec::new();
    for w in series.windows(2) {
        let t = w[0].quotient_trace(&w[1], &e.derivation.matrix);
        d_raw.extend(numerator_constraint(&t));
        for j in 1..=n {
            let t = w[0].quotient_trace(&w[1], &base.ad_basis(j));
            if let Some(c) = numerator_constraint(&t) {
                if !inner.contains(&c) {
                    inner.push(c);
                }
            }
        }
    }
    Ok(SuConstraints {
        derivation: solve_linear_constraints(&d_raw, &e.derivation.params).unwrap_or(d_raw),
        inner,
    })
}

/// Reduced echelon form of linear equations in `vars` with rational
/// coefficients; `None` if any equation is not of that shape.
fn solve_linear_constraints(eqs: &[Polynomial], vars: &[Var]) -> Option<Vec<Polynomial>> {
    let set: BTreeSet<Var> = vars.iter().copied().collect();
    let mut rows: QMatrix = Vec::new();
    for e in eqs {
        if !e.vars().is_subset(&set) || e.total_degree() > 1 {
            return None;
        }
        let (coeffs, constant) = e.affine_parts(vars);
        let mut row: Vec<Rational> = coeffs
            .iter()
            .map(|c| c.as_constant())
            .collect::<Option<_>>()?;
        row.push(constant.as_constant()?);
        rows.push(row);
    }
    let pivots = rref(&mut rows);
    let out = rows
        .into_iter()
        .take(pivots.len())
        .map(|row| {
            let mut p = Polynomial::constant(row[vars.len()].clone());
            for (v, c) in vars.iter().zip(&row) {
                p.add_term(crate::exact_arith::Monomial::var(*v, 1), c);
            }
            p
        })
        .collect();
    Some(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NilradicalBranch {
    /// D nilpotent: the nilradical is n ⋊ ℝ.
    Nilpotent {
        condition: Vec<Polynomial>,
        nilradical: Subspace,
    },
    /// D not nilpotent: the nilradical is n.
    NotNilpotent {
        condition: Vec<Polynomial>,
        nilradical: Subspace,
    },
}

/// Nilradical of s ⋊_D ℝ by cases on the nilpotency of D. Each branch
/// carries the entries of Dⁿ: they all vanish on the nilpotent branch and
/// not all vanish on the other. Branches that cannot occur are omitted.
pub fn nilradical_of_extension(e: &ExtensionSpec, n_base: &Subspace) -> Vec<NilradicalBranch> {
    let m = e.result.dim();
    let lifted: Vec<VectorExpr> = n_base
        .generators()
        .iter()
        .map(|g| {
            let mut c = g.coords().to_vec();
            c.push(Polynomial::zero());
            VectorExpr::new(c)
        })
        .collect();
    let n_only = Subspace::span(m, lifted.clone());
    let mut with_r = lifted;
    with_r.push(VectorExpr::basis(m, m));
    let n_semi = Subspace::span(m, with_r);
    let power: Vec<Polynomial> = e
        .derivation
        .top_power()
        .into_iter()
        .flatten()
        .filter(|c| !c.is_zero())
        .collect();
    let nil = NilradicalBranch::Nilpotent {
        condition: power.clone(),
        nilradical: n_semi,
    };
    let not_nil = NilradicalBranch::NotNilpotent {
        condition: power.clone(),
        nilradical: n_only,
    };
    if power.is_empty() {
        vec![nil]
    } else if power.iter().any(|c| c.is_constant()) {
        vec![not_nil]
    } else {
        vec![nil, not_nil]
    }
}
