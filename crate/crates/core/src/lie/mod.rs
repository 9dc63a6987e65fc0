//! Lie algebras given by structure equations (de¹, …, deⁿ).
//!
//! Convention: de^k(x, y) = -e^k([x, y]).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::exact_arith::{
    determinant, rank, rref, PolyMatrix, Polynomial, QMatrix, Rational, RationalFunction, Var,
};
use crate::exterior::{contract, mask_indices, wedge, ExteriorError, KForm, VectorExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LieError {
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("de^{index} must be a 2-form on dimension {dim}")]
    BadDifferential { index: usize, dim: usize },
    #[error("Jacobi identity fails: d(de^{index}) = {residue}")]
    JacobiFails { index: usize, residue: KForm },
    #[error("subspace is not an ideal")]
    NotAnIdeal,
    #[error("declared nilradical rejected: {0}")]
    NilradicalRejected(String),
}

type Result<T> = std::result::Result<T, LieError>;

#[derive(Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    name: String,
    differentials: Vec<KForm>,
    labels: Vec<String>,
}

impl LieAlgebra {
    /// Checks shapes and d² = 0 identically in the family parameters.
    pub fn new(name: impl Into<String>, differentials: Vec<KForm>) -> Result<Self> {
        let l = LieAlgebra::new_unchecked(name, differentials)?;
        l.check_jacobi()?;
        Ok(l)
    }

    /// Checks shapes only.
    pub fn new_unchecked(name: impl Into<String>, differentials: Vec<KForm>) -> Result<Self> {
        let n = differentials.len();
        for (k, f) in differentials.iter().enumerate() {
            if f.dim() != n || (f.degree() != 2 && !f.is_zero()) {
                return Err(LieError::BadDifferential {
                    index: k + 1,
                    dim: n,
                });
            }
        }
        let differentials = differentials
            .into_iter()
            .map(|f| {
                if f.degree() == 2 {
                    f
                } else {
                    KForm::zero(n, 2)
                }
            })
            .collect();
        Ok(LieAlgebra {
            name: name.into(),
            differentials,
            labels: (1..=n).map(|i| format!("e{i}")).collect(),
        })
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra::new_unchecked(format!("R{dim}"), vec![KForm::zero(dim, 2); dim])
            .expect("abelian")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.differentials.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// de^k, 1-based.
    pub fn de(&self, k: usize) -> &KForm {
        &self.differentials[k - 1]
    }

    pub fn differentials(&self) -> &[KForm] {
        &self.differentials
    }

    /// Family parameters occurring in the structure constants.
    pub fn parameters(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for f in &self.differentials {
            for (_, c) in f.terms() {
                out.extend(c.vars());
            }
        }
        out
    }

    pub fn check_jacobi(&self) -> Result<()> {
        for (k, f) in self.differentials.iter().enumerate() {
            let dd = ce_differential(self, f)?;
            if !dd.is_zero() {
                return Err(LieError::JacobiFails {
                    index: k + 1,
                    residue: dd,
                });
            }
        }
        Ok(())
    }

    /// g ⊕ h with h's basis shifted after g's.
    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let n = self.dim() + other.dim();
        let shift = self.dim();
        let mut diffs: Vec<KForm> = self.differentials.iter().map(|f| f.extend_dim(n)).collect();
        for f in &other.differentials {
            let mut g = KForm::zero(n, 2);
            for (m, c) in f.terms() {
                g.add_term(m << shift, c.clone());
            }
            diffs.push(g);
        }
        LieAlgebra::new_unchecked(format!("{}+{}", self.name, other.name), diffs)
            .expect("shapes agree")
    }

    /// Substitute family parameters; d² = 0 is preserved by any
    /// specialization.
    pub fn substitute(&self, map: &HashMap<Var, Polynomial>) -> LieAlgebra {
        LieAlgebra {
            name: self.name.clone(),
            differentials: self
                .differentials
                .iter()
                .map(|f| f.substitute(map))
                .collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn partial_eval(&self, values: &HashMap<Var, Rational>) -> LieAlgebra {
        LieAlgebra {
            name: self.name.clone(),
            differentials: self
                .differentials
                .iter()
                .map(|f| f.partial_eval(values))
                .collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Structure equations in the usual tuple notation.
    pub fn structure_equations(&self) -> String {
        let parts: Vec<String> = self.differentials.iter().map(|f| f.to_string()).collect();
        format!("({})", parts.join(", "))
    }

    /// Matrix of ad_x: column j holds [x, e_j].
    pub fn ad(&self, x: &VectorExpr) -> PolyMatrix {
        let n = self.dim();
        let mut m = vec![vec![Polynomial::zero(); n]; n];
        for j in 1..=n {
            let col = bracket(self, x, &VectorExpr::basis(n, j));
            for i in 0..n {
                m[i][j - 1] = col.coords()[i].clone();
            }
        }
        m
    }

    pub fn ad_basis(&self, i: usize) -> PolyMatrix {
        self.ad(&VectorExpr::basis(self.dim(), i))
    }
}

impl fmt::Display for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.name, self.structure_equations())
    }
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Chevalley–Eilenberg differential: the antiderivation extending e^k ↦ de^k.
pub fn ce_differential(l: &LieAlgebra, f: &KForm) -> Result<KForm> {
    let n = l.dim();
    if f.dim() != n {
        return Err(ExteriorError::DimensionMismatch(f.dim(), n).into());
    }
    if f.degree() + 1 > n {
        return Ok(KForm::zero(n, n));
    }
    let mut out = KForm::zero(n, f.degree() + 1);
    for (mask, c) in f.terms() {
        let idx = mask_indices(mask);
        for (r, &i) in idx.iter().enumerate() {
            let de = l.de(i);
            if de.is_zero() {
                continue;
            }
            let left = KForm::basis(n, &idx[..r])?;
            let right = KForm::basis(n, &idx[r + 1..])?;
            let mut term = wedge(&wedge(&left, de)?, &right)?;
            if r % 2 == 1 {
                term = -&term;
            }
            for (m, t) in term.terms() {
                out.add_term(m, t * c);
            }
        }
    }
    Ok(out)
}

/// [x, y] = -Σ_k de^k(x, y) e_k.
pub fn bracket(l: &LieAlgebra, x: &VectorExpr, y: &VectorExpr) -> VectorExpr {
    let coords = l
        .differentials
        .iter()
        .map(|de| {
            if de.is_zero() {
                return Polynomial::zero();
            }
            let v = contract(y, &contract(x, de).expect("dims checked")).expect("degree 1");
            -&v.coeff_mask(0)
        })
        .collect();
    VectorExpr::new(coords)
}

pub fn unimodular_check(l: &LieAlgebra) -> bool {
    (1..=l.dim()).all(|i| trace(&l.ad_basis(i)).is_zero())
}

pub fn trace(m: &PolyMatrix) -> Polynomial {
    let mut acc = Polynomial::zero();
    for (i, row) in m.iter().enumerate() {
        acc.add_assign_ref(&row[i]);
    }
    acc
}

/// Linear subspace of ℝⁿ over the field of rational functions in the
/// family parameters. Generators are kept linearly independent; when they
/// have constant coordinates they are stored in reduced echelon form.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    dim: usize,
    generators: Vec<VectorExpr>,
}

fn matrix_of(vs: &[VectorExpr]) -> PolyMatrix {
    vs.iter().map(|v| v.coords().to_vec()).collect()
}

impl Subspace {
    pub fn zero(dim: usize) -> Self {
        Subspace {
            dim,
            generators: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        Subspace::coordinate(dim, &(1..=dim).collect::<Vec<_>>())
    }

    /// ⟨e_i : i ∈ indices⟩, 1-based.
    pub fn coordinate(dim: usize, indices: &[usize]) -> Self {
        Subspace::span(
            dim,
            indices.iter().map(|&i| VectorExpr::basis(dim, i)).collect(),
        )
    }

    pub fn span(dim: usize, vectors: Vec<VectorExpr>) -> Self {
        let vectors: Vec<VectorExpr> = vectors.into_iter().filter(|v| !v.is_zero()).collect();
        let constant = vectors
            .iter()
            .all(|v| v.coords().iter().all(|c| c.is_constant()));
        if constant {
            let mut m: QMatrix = vectors
                .iter()
                .map(|v| {
                    v.coords()
                        .iter()
                        .map(|c| c.as_constant().expect("constant"))
                        .collect()
                })
                .collect();
            let r = rref(&mut m).len();
            let generators = m
                .into_iter()
                .take(r)
                .map(|row| VectorExpr::new(row.into_iter().map(Polynomial::constant).collect()))
                .collect();
            return Subspace { dim, generators };
        }
        let mut generators: Vec<VectorExpr> = Vec::new();
        for v in vectors {
            generators.push(v);
            if rank(&matrix_of(&generators)) < generators.len() {
                generators.pop();
            }
        }
        Subspace { dim, generators }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[VectorExpr] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn contains(&self, v: &VectorExpr) -> bool {
        if v.is_zero() {
            return true;
        }
        let mut m = matrix_of(&self.generators);
        m.push(v.coords().to_vec());
        rank(&m) == self.generators.len()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.generators.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Subspace::span(self.dim, gens)
    }

    /// Trace of a linear map A on this subspace, assuming A preserves it:
    /// with B the n×r generator matrix and I a set of rows where B_I is
    /// invertible, A|_V has matrix B_I⁻¹ (AB)_I.
    pub fn restricted_trace(&self, a: &PolyMatrix) -> RationalFunction {
        let r = self.dimension();
        if r == 0 {
            return RationalFunction::zero();
        }
        let n = self.dim;
        let cols: Vec<Vec<Polynomial>> = self
            .generators
            .iter()
            .map(|v| v.coords().to_vec())
            .collect();
        let images: Vec<Vec<Polynomial>> = self
            .generators
            .iter()
            .map(|v| VectorExpr::apply(a, v).coords().to_vec())
            .collect();
        let rows = pivot_rows(&cols, n);
        let minor = |replace: Option<usize>| -> Polynomial {
            let m: PolyMatrix = rows
                .iter()
                .map(|&i| {
                    (0..r)
                        .map(|j| {
                            if replace == Some(j) {
                                images[j][i].clone()
                            } else {
                                cols[j][i].clone()
                            }
                        })
                        .collect()
                })
                .collect();
            determinant(&m)
        };
        let det = minor(None);
        let mut num = Polynomial::zero();
        for j in 0..r {
            num.add_assign_ref(&minor(Some(j)));
        }
        RationalFunction::new(num, det).expect("pivot minor is nonzero")
    }

    /// Trace of A on self / sub, for A preserving both.
    pub fn quotient_trace(&self, sub: &Subspace, a: &PolyMatrix) -> RationalFunction {
        &self.restricted_trace(a) - &sub.restricted_trace(a)
    }
}

/// Greedy choice of r coordinate rows making the generator minor nonsingular.
fn pivot_rows(cols: &[Vec<Polynomial>], n: usize) -> Vec<usize> {
    let r = cols.len();
    let mut rows: Vec<usize> = Vec::new();
    for i in 0..n {
        rows.push(i);
        let m: PolyMatrix = rows
            .iter()
            .map(|&k| (0..r).map(|j| cols[j][k].clone()).collect())
            .collect();
        if rank(&m) < rows.len() {
            rows.pop();
        }
        if rows.len() == r {
            break;
        }
    }
    debug_assert_eq!(rows.len(), r);
    rows
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// [A, B] as a subspace.
pub fn bracket_subspaces(l: &LieAlgebra, a: &Subspace, b: &Subspace) -> Subspace {
    let mut out = Vec::new();
    for x in a.generators() {
        for y in b.generators() {
            out.push(bracket(l, x, y));
        }
    }
    Subspace::span(l.dim(), out)
}

pub fn is_ideal(l: &LieAlgebra, s: &Subspace) -> bool {
    let n = l.dim();
    (1..=n).all(|i| {
        let ei = VectorExpr::basis(n, i);
        s.generators()
            .iter()
            .all(|g| s.contains(&bracket(l, &ei, g)))
    })
}

pub fn derived_algebra(l: &LieAlgebra) -> Subspace {
    let full = Subspace::full(l.dim());
    bracket_subspaces(l, &full, &full)
}

/// n⁰ = N, nⁱ = [N, nⁱ⁻¹], until the sequence stabilizes.
pub fn descending_central_series(l: &LieAlgebra, n: &Subspace) -> Result<Vec<Subspace>> {
    if !is_ideal(l, n) {
        return Err(LieError::NotAnIdeal);
    }
    let mut series = vec![n.clone()];
    loop {
        let last = series.last().expect("nonempty");
        let next = bracket_subspaces(l, n, last);
        if next.dimension() == last.dimension() {
            return Ok(series);
        }
        let done = next.is_zero();
        series.push(next);
        if done {
            return Ok(series);
        }
    }
}

pub fn is_nilpotent(l: &LieAlgebra, n: &Subspace) -> Result<bool> {
    Ok(descending_central_series(l, n)?
        .last()
        .map(|s| s.is_zero())
        .unwrap_or(true))
}

/// Accepts a declared nilradical if it is a nilpotent ideal of the declared
/// dimension containing the derived algebra.
pub fn verify_nilradical(l: &LieAlgebra, n: &Subspace, declared_dim: usize) -> Result<()> {
    if n.dimension() != declared_dim {
        return Err(LieError::NilradicalRejected(format!(
            "dimension {} differs from declared {declared_dim}",
            n.dimension()
        )));
    }
    if !is_nilpotent(l, n)? {
        return Err(LieError::NilradicalRejected("not nilpotent".into()));
    }
    if !n.contains_subspace(&derived_algebra(l)) {
        return Err(LieError::NilradicalRejected(
            "does not contain the derived algebra".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::parse_polynomial;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn two(n: usize, terms: &[(&str, usize, usize)]) -> KForm {
        let mut f = KForm::zero(n, 2);
        for (c, i, j) in terms {
            f = &f + &KForm::monomial(n, &[*i, *j], p(c)).unwrap();
        }
        f
    }

    fn g34_r3() -> LieAlgebra {
        // (-e13, e23, 0, 0, 0, 0)
        let n = 6;
        let mut d = vec![two(n, &[("-1", 1, 3)]), two(n, &[("1", 2, 3)])];
        d.extend((0..4).map(|_| KForm::zero(n, 2)));
        LieAlgebra::new("g34+R3", d).unwrap()
    }

    fn q4() -> LieAlgebra {
        let n = 7;
        LieAlgebra::new(
            "q4",
            vec![
                two(n, &[("-1", 2, 3)]),
                two(n, &[("-2", 1, 2)]),
                two(n, &[("2", 1, 3)]),
                two(n, &[("-1", 1, 4), ("-1", 2, 5), ("-1", 4, 7)]),
                two(n, &[("1", 1, 5), ("-1", 3, 4), ("-1", 5, 7)]),
                two(n, &[("2", 6, 7)]),
                KForm::zero(n, 2),
            ],
        )
        .unwrap()
    }

    fn g530() -> LieAlgebra {
        let n = 6;
        LieAlgebra::new(
            "g530+R",
            vec![
                two(n, &[("-1", 2, 4), ("-2/3", 1, 5)]),
                two(n, &[("-1", 3, 4), ("1/3", 2, 5)]),
                two(n, &[("4/3", 3, 5)]),
                two(n, &[("-1", 4, 5)]),
                KForm::zero(n, 2),
                KForm::zero(n, 2),
            ],
        )
        .unwrap()
    }

    fn e(n: usize, i: usize) -> VectorExpr {
        VectorExpr::basis(n, i)
    }

    #[test]
    fn ce_differential_on_basis_and_constants() {
        let l = g34_r3();
        let d1 = ce_differential(&l, &KForm::basis(6, &[1]).unwrap()).unwrap();
        assert_eq!(d1, two(6, &[("-1", 1, 3)]));
        let d0 = ce_differential(&l, &KForm::scalar(6, p("0"))).unwrap();
        assert!(d0.is_zero());
        // d∘d = 0 on a generic 2-form
        let a = crate::exterior::generic_form(6, 2, "alpha");
        let da = ce_differential(&l, &a).unwrap();
        assert!(ce_differential(&l, &da).unwrap().is_zero());
    }

    #[test]
    fn bracket_sign_convention() {
        let l = g34_r3();
        assert_eq!(bracket(&l, &e(6, 1), &e(6, 3)), e(6, 1));
        assert_eq!(bracket(&l, &e(6, 3), &e(6, 1)), e(6, 1).scale(&p("-1")));
        let q = q4();
        assert_eq!(bracket(&q, &e(7, 6), &e(7, 7)), e(7, 6).scale(&p("-2")));
        let ab = LieAlgebra::abelian(3);
        assert!(bracket(&ab, &e(3, 1), &e(3, 2)).is_zero());
    }

    #[test]
    fn bracket_and_differential_consistent() {
        let l = q4();
        for i in 1..=7 {
            for j in (i + 1)..=7 {
                let b = bracket(&l, &e(7, i), &e(7, j));
                for k in 1..=7 {
                    let lhs = l.de(k).eval(&[e(7, i), e(7, j)]).unwrap();
                    assert_eq!(lhs, -b.coord(k));
                }
            }
        }
    }

    #[test]
    fn q4_ad_e7_on_e456() {
        let ad = q4().ad_basis(7);
        let diag: Vec<Polynomial> = (3..6).map(|i| ad[i][i].clone()).collect();
        assert_eq!(diag, vec![p("-1"), p("-1"), p("2")]);
    }

    #[test]
    fn jacobi_violation_detected() {
        let n = 3;
        let so3 = vec![
            two(n, &[("1", 2, 3)]),
            two(n, &[("1", 3, 1)]),
            two(n, &[("1", 1, 2)]),
        ];
        assert!(LieAlgebra::new("so3", so3).is_ok());
        // d(de1) = d(e23) = -e2 ∧ e14 = e124
        let n = 4;
        let bad = vec![
            two(n, &[("1", 2, 3)]),
            KForm::zero(n, 2),
            two(n, &[("1", 1, 4)]),
            KForm::zero(n, 2),
        ];
        match LieAlgebra::new("bad", bad) {
            Err(LieError::JacobiFails { index, residue }) => {
                assert_eq!(index, 1);
                assert_eq!(residue, KForm::basis(4, &[1, 2, 4]).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unimodularity() {
        assert!(unimodular_check(&g34_r3()));
        assert!(unimodular_check(&q4()));
        let aff = LieAlgebra::new("aff", vec![two(2, &[("1", 1, 2)]), KForm::zero(2, 2)]).unwrap();
        assert!(!unimodular_check(&aff));
        // [e2, e1] = e1
        assert_eq!(trace(&aff.ad_basis(2)), p("1"));
    }

    #[test]
    fn central_series_g530() {
        let l = g530();
        let n = Subspace::coordinate(6, &[1, 2, 3, 4, 6]);
        let s = descending_central_series(&l, &n).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[1], Subspace::coordinate(6, &[1, 2]));
        assert_eq!(s[2], Subspace::coordinate(6, &[1]));
        assert!(s[3].is_zero());
        assert!(is_nilpotent(&l, &n).unwrap());
        verify_nilradical(&l, &n, 5).unwrap();
        assert!(verify_nilradical(&l, &n, 4).is_err());
        for t in &s {
            assert!(is_ideal(&l, t));
        }
    }

    #[test]
    fn series_of_abelian_ideal_and_non_ideal() {
        let l = g34_r3();
        let n = Subspace::coordinate(6, &[1, 2, 4, 5, 6]);
        let s = descending_central_series(&l, &n).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s[1].is_zero());
        let bad = Subspace::coordinate(6, &[3]);
        assert_eq!(
            descending_central_series(&l, &bad),
            Err(LieError::NotAnIdeal)
        );
        assert_eq!(derived_algebra(&l), Subspace::coordinate(6, &[1, 2]));
    }

    #[test]
    fn restricted_trace_symbolic() {
        let a: PolyMatrix = vec![
            vec![p("x"), p("1"), p("0")],
            vec![p("0"), p("y"), p("0")],
            vec![p("0"), p("0"), p("z")],
        ];
        let v = Subspace::coordinate(3, &[1, 2]);
        assert_eq!(v.restricted_trace(&a).as_polynomial().unwrap(), p("x + y"));
        let w = Subspace::coordinate(3, &[1]);
        assert_eq!(v.quotient_trace(&w, &a).as_polynomial().unwrap(), p("y"));
        let skew = Subspace::span(3, vec![VectorExpr::new(vec![p("1"), p("t"), p("0")])]);
        assert!(skew.contains(&VectorExpr::new(vec![p("2"), p("2*t"), p("0")])));
        assert!(!skew.contains(&e(3, 1)));
    }
}
