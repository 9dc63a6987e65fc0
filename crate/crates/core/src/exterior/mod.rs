//! Alternating forms on ℝⁿ (n ≤ 16) with polynomial coefficients.
//!
//! A basis k-form e^{i₁…i_k} (i₁ < … < i_k, 1-based) is stored as the bitmask
//! with bits i₁-1, …, i_k-1 set.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::exact_arith::{PolyMatrix, Polynomial, Rational, Var};

pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExteriorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cannot contract a 0-form")]
    DegreeZero,
    #[error("expected a form of degree {expected}, found degree {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("basis index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

type Result<T> = std::result::Result<T, ExteriorError>;

/// Sign of e^a ∧ e^b for disjoint masks.
pub(crate) fn merge_sign(a: u16, b: u16) -> bool {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    inversions % 2 == 1
}

pub fn mask_indices(mask: u16) -> Vec<usize> {
    (0..MAX_DIM)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i + 1)
        .collect()
}

#[derive(Clone, PartialEq, Eq)]
pub struct KForm {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<u16, Polynomial>,
}

impl KForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(
            dim <= MAX_DIM && degree <= dim,
            "form degree {degree} on dimension {dim}"
        );
        KForm {
            dim,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, c: Polynomial) -> Self {
        let mut f = KForm::zero(dim, 0);
        f.add_term(0, c);
        f
    }

    /// c·e^{i₁…i_k} for arbitrary (1-based) indices; repeated indices give 0,
    /// unsorted ones pick up the permutation sign.
    pub fn monomial(dim: usize, indices: &[usize], c: Polynomial) -> Result<Self> {
        let mut f = KForm::zero(dim, indices.len().min(dim));
        if indices.len() > dim {
            return Ok(KForm::zero(dim, dim));
        }
        let mut mask = 0u16;
        let mut negative = false;
        for &i in indices {
            if i == 0 || i > dim {
                return Err(ExteriorError::IndexOutOfRange { index: i, dim });
            }
            let bit = 1u16 << (i - 1);
            if mask & bit != 0 {
                return Ok(f);
            }
            negative ^= merge_sign(mask, bit);
            mask |= bit;
        }
        f.add_term(mask, if negative { -c } else { c });
        Ok(f)
    }

    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        KForm::monomial(dim, indices, Polynomial::one())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u16, &Polynomial)> {
        self.coeffs.iter().map(|(m, c)| (*m, c))
    }

    /// Terms in lexicographic order of their index tuples.
    pub fn sorted_terms(&self) -> Vec<(Vec<usize>, &Polynomial)> {
        let mut out: Vec<_> = self
            .coeffs
            .iter()
            .map(|(m, c)| (mask_indices(*m), c))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn coeff_mask(&self, mask: u16) -> Polynomial {
        self.coeffs
            .get(&mask)
            .cloned()
            .unwrap_or_else(Polynomial::zero)
    }

    /// Coefficient of e^{i₁…i_k} (sorted or not).
    pub fn coeff(&self, indices: &[usize]) -> Polynomial {
        match KForm::basis(self.dim, indices) {
            Ok(b) if b.degree == self.degree => match b.coeffs.iter().next() {
                Some((m, s)) => &self.coeff_mask(*m) * s,
                None => Polynomial::zero(),
            },
            _ => Polynomial::zero(),
        }
    }

    pub fn add_term(&mut self, mask: u16, c: Polynomial) {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(mask) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign_ref(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Polynomial) -> KForm {
        self.map_coeffs(|p| p * c)
    }

    pub fn scale_q(&self, c: &Rational) -> KForm {
        self.map_coeffs(|p| p.scale(c))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Polynomial) -> Polynomial) -> KForm {
        let mut out = KForm::zero(self.dim, self.degree);
        for (m, c) in &self.coeffs {
            out.add_term(*m, f(c));
        }
        out
    }

    pub fn substitute(&self, map: &HashMap<Var, Polynomial>) -> KForm {
        self.map_coeffs(|p| p.substitute(map))
    }

    pub fn partial_eval(&self, values: &HashMap<Var, Rational>) -> KForm {
        self.map_coeffs(|p| p.partial_eval(values))
    }

    pub fn try_add(&self, other: &KForm) -> Result<KForm> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    fn same_shape(&self, other: &KForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimensionMismatch(self.dim, other.dim));
        }
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(ExteriorError::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    /// Value on k vectors: f(v₁,…,v_k).
    pub fn eval(&self, vectors: &[VectorExpr]) -> Result<Polynomial> {
        if vectors.len() != self.degree {
            return Err(ExteriorError::DegreeMismatch {
                expected: self.degree,
                found: vectors.len(),
            });
        }
        let mut f = self.clone();
        for v in vectors {
            f = contract(v, &f)?;
        }
        Ok(f.coeff_mask(0))
    }

    /// Same form viewed on ℝᵐ ⊇ ℝⁿ (m ≥ n), spanned by the first n covectors.
    pub fn extend_dim(&self, m: usize) -> KForm {
        assert!(m >= self.dim && m <= MAX_DIM);
        KForm {
            dim: m,
            degree: self.degree,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Restriction to ℝᵐ (m ≤ n): drop every term involving e^{m+1},…
    pub fn truncate_dim(&self, m: usize) -> KForm {
        let keep: u16 = if m >= 16 { u16::MAX } else { (1u16 << m) - 1 };
        let mut out = KForm::zero(m, self.degree.min(m));
        if self.degree > m {
            return out;
        }
        for (mask, c) in &self.coeffs {
            if mask & !keep == 0 {
                out.add_term(*mask, c.clone());
            }
        }
        out
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (idx, c)) in self.sorted_terms().into_iter().enumerate() {
            let basis: String = idx.iter().map(|i| i.to_string()).collect();
            let cs = c.to_string();
            let (neg, body) = if c.num_terms() == 1 && cs.starts_with('-') {
                (true, cs[1..].to_string())
            } else {
                (false, cs)
            };
            if k > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            if idx.is_empty() {
                write!(f, "{body}")?;
            } else if body == "1" {
                write!(f, "e^{basis}")?;
            } else if c.num_terms() == 1 {
                write!(f, "{body}*e^{basis}")?;
            } else {
                write!(f, "({body})*e^{basis}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm[{};{}]({})", self.dim, self.degree, self)
    }
}

impl Add<&KForm> for &KForm {
    type Output = KForm;
    fn add(self, rhs: &KForm) -> KForm {
        self.try_add(rhs).expect("adding forms of different shape")
    }
}

impl Sub<&KForm> for &KForm {
    type Output = KForm;
    fn sub(self, rhs: &KForm) -> KForm {
        self + &(-rhs)
    }
}

impl Neg for &KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.map_coeffs(|p| -p)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct VectorExpr {
    coords: Vec<Polynomial>,
}

impl VectorExpr {
    pub fn new(coords: Vec<Polynomial>) -> Self {
        assert!(coords.len() <= MAX_DIM);
        VectorExpr { coords }
    }

    pub fn zero(dim: usize) -> Self {
        VectorExpr::new(vec![Polynomial::zero(); dim])
    }

    /// e_i, 1-based.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = VectorExpr::zero(dim);
        v.coords[i - 1] = Polynomial::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Polynomial] {
        &self.coords
    }

    /// i-th coordinate, 1-based.
    pub fn coord(&self, i: usize) -> &Polynomial {
        &self.coords[i - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &Polynomial) -> VectorExpr {
        VectorExpr::new(self.coords.iter().map(|x| x * c).collect())
    }

    pub fn map_coeffs(&self, f: impl Fn(&Polynomial) -> Polynomial) -> VectorExpr {
        VectorExpr::new(self.coords.iter().map(f).collect())
    }

    /// M·v.
    pub fn apply(m: &PolyMatrix, v: &VectorExpr) -> VectorExpr {
        VectorExpr::new(
            m.iter()
                .map(|row| {
                    let mut acc = Polynomial::zero();
                    for (a, x) in row.iter().zip(&v.coords) {
                        if !a.is_zero() && !x.is_zero() {
                            acc.add_assign_ref(&(a * x));
                        }
                    }
                    acc
                })
                .collect(),
        )
    }
}

impl Add<&VectorExpr> for &VectorExpr {
    type Output = VectorExpr;
    fn add(self, rhs: &VectorExpr) -> VectorExpr {
        assert_eq!(self.dim(), rhs.dim());
        VectorExpr::new(
            self.coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub<&VectorExpr> for &VectorExpr {
    type Output = VectorExpr;
    fn sub(self, rhs: &VectorExpr) -> VectorExpr {
        assert_eq!(self.dim(), rhs.dim());
        VectorExpr::new(
            self.coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl fmt::Display for VectorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.as_constant().map(|k| k.is_one()).unwrap_or(false) {
                write!(f, "e_{}", i + 1)?;
            } else {
                write!(f, "({c})*e_{}", i + 1)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for VectorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    if a.dim != b.dim {
        return Err(ExteriorError::DimensionMismatch(a.dim, b.dim));
    }
    let degree = a.degree + b.degree;
    if degree > a.dim {
        return Ok(KForm::zero(a.dim, a.dim));
    }
    let mut out = KForm::zero(a.dim, degree);
    for (ma, ca) in &a.coeffs {
        for (mb, cb) in &b.coeffs {
            if ma & mb != 0 {
                continue;
            }
            let prod = ca * cb;
            out.add_term(ma | mb, if merge_sign(*ma, *mb) { -prod } else { prod });
        }
    }
    Ok(out)
}

/// Wedge of several forms, left to right.
pub fn wedge_all(forms: &[&KForm]) -> Result<KForm> {
    let (first, rest) = forms.split_first().expect("at least one form");
    rest.iter()
        .try_fold((*first).clone(), |acc, f| wedge(&acc, f))
}

/// Interior product ι_v f, with (ι_v f)(w, …) = f(v, w, …).
pub fn contract(v: &VectorExpr, f: &KForm) -> Result<KForm> {
    if v.dim() != f.dim {
        return Err(ExteriorError::DimensionMismatch(v.dim(), f.dim));
    }
    if f.degree == 0 {
        return Err(ExteriorError::DegreeZero);
    }
    let mut out = KForm::zero(f.dim, f.degree - 1);
    for (m, c) in &f.coeffs {
        let mut rest = *m;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let vi = &v.coords[i];
            if vi.is_zero() {
                continue;
            }
            let below = (m & ((1u16 << i) - 1)).count_ones();
            let term = vi * c;
            out.add_term(m & !(1u16 << i), if below % 2 == 1 { -term } else { term });
        }
    }
    Ok(out)
}

/// F*f with F*e^i = Σ_j M_ij e^j, so (F*f)(v₁,…) = f(Mv₁,…).
pub fn pullback(m: &PolyMatrix, f: &KForm) -> Result<KForm> {
    let n = f.dim;
    if m.len() != n {
        return Err(ExteriorError::DimensionMismatch(m.len(), n));
    }
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(ExteriorError::DimensionMismatch(row.len(), n));
    }
    let images: Vec<KForm> = (0..n)
        .map(|i| {
            let mut g = KForm::zero(n, 1);
            for (j, c) in m[i].iter().enumerate() {
                g.add_term(1 << j, c.clone());
            }
            g
        })
        .collect();
    let mut out = KForm::zero(n, f.degree);
    for (mask, c) in &f.coeffs {
        let mut img = KForm::scalar(n, c.clone());
        for i in mask_indices(*mask) {
            img = wedge(&img, &images[i - 1])?;
            if img.is_zero() {
                break;
            }
        }
        for (mm, cc) in img.coeffs {
            out.add_term(mm, cc);
        }
    }
    Ok(out)
}

pub fn top_coefficient(f: &KForm) -> Result<Polynomial> {
    if f.degree != f.dim {
        return Err(ExteriorError::DegreeMismatch {
            expected: f.dim,
            found: f.degree,
        });
    }
    let full: u16 = if f.dim == 16 {
        u16::MAX
    } else {
        (1u16 << f.dim) - 1
    };
    Ok(f.coeff_mask(full))
}

/// Volume form e^{1…n}.
pub fn volume(dim: usize) -> KForm {
    KForm::basis(dim, &(1..=dim).collect::<Vec<_>>()).expect("valid indices")
}

/// det M computed through the exterior algebra, used as a cross-check.
pub fn det_via_pullback(m: &PolyMatrix) -> Polynomial {
    let n = m.len();
    top_coefficient(&pullback(m, &volume(n)).expect("square")).expect("top degree")
}

/// Generic symbolic k-form Σ sym_{i…} e^{i…} with `prefix` naming
/// (`alpha_ij`, `beta_ij`, …) for indices below 10.
pub fn generic_form(dim: usize, degree: usize, prefix: &str) -> KForm {
    let mut out = KForm::zero(dim, degree);
    for mask in 0..(1u32 << dim) {
        let mask = mask as u16;
        if mask.count_ones() as usize != degree {
            continue;
        }
        let name: String = mask_indices(mask).iter().map(|i| i.to_string()).collect();
        out.add_term(mask, Polynomial::named(&format!("{prefix}_{name}")));
    }
    out
}
