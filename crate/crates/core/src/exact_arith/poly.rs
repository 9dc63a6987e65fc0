use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use super::rational::Rational;
use super::ArithError;

/// Reserved variable prefixes, in global order.
pub const PREFIXES: [&str; 5] = ["alpha_", "beta_", "a_", "s_", "fam_"];

struct Registry {
    names: Vec<Arc<str>>,
    keys: Vec<VarKey>,
    ids: HashMap<Arc<str>, u32>,
}

fn registry() -> &'static RwLock<Registry> {
    static REG: OnceLock<RwLock<Registry>> = OnceLock::new();
    REG.get_or_init(|| {
        RwLock::new(Registry {
            names: Vec::new(),
            keys: Vec::new(),
            ids: HashMap::new(),
        })
    })
}

/// Sort key giving the global variable order: reserved prefix class first,
/// then natural order on the remainder (digit runs compare numerically).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct VarKey {
    class: usize,
    chunks: Vec<Chunk>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Chunk {
    Num(u64),
    Text(String),
}

fn var_key(name: &str) -> VarKey {
    let (class, rest) = PREFIXES
        .iter()
        .enumerate()
        .find_map(|(i, p)| name.strip_prefix(p).map(|r| (i, r)))
        .unwrap_or((PREFIXES.len(), name));
    let mut chunks = Vec::new();
    let mut buf = String::new();
    let mut digits = false;
    for c in rest.chars() {
        let d = c.is_ascii_digit();
        if !buf.is_empty() && d != digits {
            chunks.push(make_chunk(&buf, digits));
            buf.clear();
        }
        digits = d;
        buf.push(c);
    }
    if !buf.is_empty() {
        chunks.push(make_chunk(&buf, digits));
    }
    VarKey { class, chunks }
}

fn make_chunk(s: &str, digits: bool) -> Chunk {
    if digits {
        s.parse()
            .map(Chunk::Num)
            .unwrap_or_else(|_| Chunk::Text(s.into()))
    } else {
        Chunk::Text(s.into())
    }
}

/// An interned variable name.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn new(name: &str) -> Var {
        if let Some(&id) = registry().read().unwrap().ids.get(name) {
            return Var(id);
        }
        let mut reg = registry().write().unwrap();
        if let Some(&id) = reg.ids.get(name) {
            return Var(id);
        }
        let id = reg.names.len() as u32;
        let name: Arc<str> = Arc::from(name);
        reg.names.push(name.clone());
        reg.keys.push(var_key(&name));
        reg.ids.insert(name, id);
        Var(id)
    }

    pub fn name(&self) -> Arc<str> {
        registry().read().unwrap().names[self.0 as usize].clone()
    }

    /// Compare by the global (name-based) variable order.
    pub fn global_cmp(&self, other: &Var) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let reg = registry().read().unwrap();
        reg.keys[self.0 as usize]
            .cmp(&reg.keys[other.0 as usize])
            .then_with(|| reg.names[self.0 as usize].cmp(&reg.names[other.0 as usize]))
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Sparse exponent vector, sorted by variable id, no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Monomial(SmallVec<[(Var, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(SmallVec::from_slice(&[(v, e)]))
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = self.0.clone();
        for &(v, e) in other.0.iter() {
            let pos = out.iter().position(|(w, _)| *w == v)?;
            if out[pos].1 < e {
                return None;
            }
            out[pos].1 -= e;
            if out[pos].1 == 0 {
                out.remove(pos);
            }
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let out = self
            .0
            .iter()
            .filter_map(|&(v, e)| {
                let f = other.exponent(v);
                (f > 0).then(|| (v, e.min(f)))
            })
            .collect();
        Monomial(out)
    }

    fn without(&self, v: Var) -> Monomial {
        Monomial(self.0.iter().copied().filter(|(w, _)| *w != v).collect())
    }

    /// Graded lexicographic comparison under the global variable order.
    pub fn grlex_cmp(&self, other: &Monomial) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        let mut a: Vec<(Var, u32)> = self.0.to_vec();
        let mut b: Vec<(Var, u32)> = other.0.to_vec();
        a.sort_by(|x, y| x.0.global_cmp(&y.0));
        b.sort_by(|x, y| x.0.global_cmp(&y.0));
        for (x, y) in a.iter().zip(b.iter()) {
            if x.0 != y.0 {
                // the monomial containing the earlier variable is larger
                return y.0.global_cmp(&x.0);
            }
            if x.1 != y.1 {
                return x.1.cmp(&y.1);
            }
        }
        a.len().cmp(&b.len())
    }

    /// Cheap internal term order (graded, then by variable id); only used
    /// where any consistent monomial order will do.
    fn internal_cmp(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (x, y) in self.0.iter().zip(other.0.iter()) {
                if x.0 != y.0 {
                    return y.0.cmp(&x.0);
                }
                if x.1 != y.1 {
                    return x.1.cmp(&y.1);
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

/// Sparse multivariate polynomial with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Polynomial::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn int(n: i64) -> Self {
        Polynomial::constant(Rational::from_int(n))
    }

    pub fn var(v: Var) -> Self {
        Polynomial::monomial(Monomial::var(v, 1), Rational::one())
    }

    /// Shorthand for `Polynomial::var(Var::new(name))`.
    pub fn named(name: &str) -> Self {
        Polynomial::var(Var::new(name))
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Polynomial::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, other: &Polynomial) {
        for (m, c) in other.terms.iter() {
            self.add_term(m.clone(), c);
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Polynomial) {
        for (m, c) in other.terms.iter() {
            self.add_term(m.clone(), &-c);
        }
    }

    /// `self += c * m * other`
    pub fn add_scaled(&mut self, other: &Polynomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (m, d) in other.terms.iter() {
            self.add_term(m.clone(), &(d * c));
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().map(|(v, _)| v))
            .collect()
    }

    /// Coefficients of `self` viewed as a polynomial in `v`: entry k is the
    /// coefficient of `v^k`.
    pub fn coeffs_in(&self, v: Var) -> Vec<Polynomial> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Polynomial::zero(); deg + 1];
        for (m, c) in self.terms.iter() {
            let k = m.exponent(v) as usize;
            out[k].add_term(m.without(v), c);
        }
        out
    }

    /// Exact evaluation; fails if some variable has no value.
    pub fn evaluate(&self, assignment: &HashMap<Var, Rational>) -> Result<Rational, ArithError> {
        self.evaluate_with(|v| assignment.get(&v).cloned())
    }

    pub fn evaluate_with(
        &self,
        lookup: impl Fn(Var) -> Option<Rational>,
    ) -> Result<Rational, ArithError> {
        let mut cache: HashMap<Var, Rational> = HashMap::new();
        let mut acc = Rational::zero();
        for (m, c) in self.terms.iter() {
            let mut t = c.clone();
            for (v, e) in m.factors() {
                let val = match cache.get(&v) {
                    Some(x) => x.clone(),
                    None => {
                        let x = lookup(v)
                            .ok_or_else(|| ArithError::MissingVariable(v.name().to_string()))?;
                        cache.insert(v, x.clone());
                        x
                    }
                };
                t *= &val.pow(e);
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Replace some variables by polynomials; others are left untouched.
    pub fn substitute(&self, map: &HashMap<Var, Polynomial>) -> Polynomial {
        if map.is_empty() {
            return self.clone();
        }
        let mut powers: HashMap<(Var, u32), Polynomial> = HashMap::new();
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let mut kept = Monomial::one();
            let mut factor = Polynomial::constant(c.clone());
            for (v, e) in m.factors() {
                match map.get(&v) {
                    Some(p) => {
                        let pw = powers.entry((v, e)).or_insert_with(|| p.pow(e));
                        factor = &factor * &*pw;
                    }
                    None => kept = kept.mul(&Monomial::var(v, e)),
                }
            }
            if factor.is_zero() {
                continue;
            }
            for (fm, fc) in factor.terms.into_iter() {
                out.add_term(fm.mul(&kept), &fc);
            }
        }
        out
    }

    /// Substitute rational values for some of the variables.
    pub fn partial_eval(&self, values: &HashMap<Var, Rational>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let mut coeff = c.clone();
            let mut kept = Monomial::one();
            for (v, e) in m.factors() {
                match values.get(&v) {
                    Some(x) => coeff *= &x.pow(e),
                    None => kept = kept.mul(&Monomial::var(v, e)),
                }
            }
            out.add_term(kept, &coeff);
        }
        out
    }

    /// `den^d * self(x_i = num_i / den)` for the substituted variables, where
    /// d is the largest total degree of `self` in those variables. This is the
    /// denominator-cleared form of substituting a common-denominator solution.
    pub fn substitute_fractions(
        &self,
        nums: &HashMap<Var, Polynomial>,
        den: &Polynomial,
    ) -> Polynomial {
        let sub_deg = |m: &Monomial| -> u32 {
            m.factors()
                .filter(|(v, _)| nums.contains_key(v))
                .map(|(_, e)| e)
                .sum()
        };
        let d = self.terms.keys().map(sub_deg).max().unwrap_or(0);
        let mut den_pows = vec![Polynomial::one()];
        for k in 1..=d {
            let next = &den_pows[(k - 1) as usize] * den;
            den_pows.push(next);
        }
        let mut powers: HashMap<(Var, u32), Polynomial> = HashMap::new();
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let mut kept = Monomial::one();
            let mut factor = Polynomial::constant(c.clone());
            for (v, e) in m.factors() {
                match nums.get(&v) {
                    Some(p) => {
                        let pw = powers.entry((v, e)).or_insert_with(|| p.pow(e));
                        factor = &factor * &*pw;
                    }
                    None => kept = kept.mul(&Monomial::var(v, e)),
                }
            }
            let factor = &factor * &den_pows[(d - sub_deg(m)) as usize];
            for (fm, fc) in factor.terms.into_iter() {
                out.add_term(fm.mul(&kept), &fc);
            }
        }
        out
    }

    /// Rational content: positive rational c such that self / c has coprime
    /// integer coefficients.
    pub fn content(&self) -> Rational {
        let mut num = num_bigint::BigInt::zero();
        let mut den = num_bigint::BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            Rational::one()
        } else {
            Rational::new(num, den)
        }
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(),
            Some(first) => it.fold(first.clone(), |g, m| g.gcd(m)),
        }
    }

    pub fn div_monomial(&self, m: &Monomial) -> Option<Polynomial> {
        let mut out = Polynomial::zero();
        for (t, c) in self.terms.iter() {
            out.terms.insert(t.div(m)?, c.clone());
        }
        Some(out)
    }

    fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| a.0.internal_cmp(b.0))
    }

    /// Leading coefficient under the canonical (grlex) order.
    pub fn leading_coefficient(&self) -> Rational {
        self.terms
            .iter()
            .max_by(|a, b| a.0.grlex_cmp(b.0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Exact division: `Some(q)` with `self = q * d`, or `None` if `d` does
    /// not divide `self`.
    pub fn div_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut r = self.clone();
        let mut q = Polynomial::zero();
        while let Some((rm, rc)) = r.leading() {
            let qm = rm.div(&dm)?;
            let qc = rc / &dc;
            for (m, c) in d.terms.iter() {
                r.add_term(m.mul(&qm), &-(c * &qc));
            }
            q.add_term(qm, &qc);
        }
        Some(q)
    }

    /// Terms in canonical order (graded lex, global variable order, largest first).
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| b.0.grlex_cmp(a.0));
        v
    }

    /// Partial derivative.
    pub fn derivative(&self, v: Var) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let reduced = m.div(&Monomial::var(v, 1)).expect("exponent checked");
            out.add_term(reduced, &(c * &Rational::from_int(e as i64)));
        }
        out
    }

    /// Rename variables.
    pub fn rename(&self, map: &HashMap<Var, Var>) -> Polynomial {
        let subs = map.iter().map(|(k, v)| (*k, Polynomial::var(*v))).collect();
        self.substitute(&subs)
    }

    /// Is every term of degree at most one in `vars` (jointly)?
    pub fn is_affine_in(&self, vars: &BTreeSet<Var>) -> bool {
        self.terms.keys().all(|m| {
            m.factors()
                .filter(|(v, _)| vars.contains(v))
                .map(|(_, e)| e)
                .sum::<u32>()
                <= 1
        })
    }

    /// Split an expression affine in `vars` into (coefficient of each var, constant part).
    pub fn affine_parts(&self, vars: &[Var]) -> (Vec<Polynomial>, Polynomial) {
        let mut coeffs = vec![Polynomial::zero(); vars.len()];
        let mut constant = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            match vars.iter().position(|v| m.exponent(*v) > 0) {
                Some(i) => coeffs[i].add_term(m.without(vars[i]), c),
                None => constant.add_term(m.clone(), c),
            }
        }
        (coeffs, constant)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<(Var, u32)> = m.factors().collect();
            factors.sort_by(|a, b| a.0.global_cmp(&b.0));
            let mut parts: Vec<String> = Vec::new();
            if !abs.is_one() || factors.is_empty() {
                parts.push(abs.to_string());
            }
            for (v, e) in factors {
                if e == 1 {
                    parts.push(v.name().to_string());
                } else {
                    parts.push(format!("{}^{}", v.name(), e));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        super::parse::parse_polynomial(&s).map_err(serde::de::Error::custom)
    }
}

impl From<Rational> for Polynomial {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c)
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        out.add_assign_ref(small);
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self.add_assign_ref(&rhs);
        self
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        self.sub_assign_ref(&rhs);
        self
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut acc: HashMap<Monomial, Rational> =
            HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in rhs.terms.iter() {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.get_mut(&m) {
                    Some(x) => *x += &c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Polynomial {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Polynomial {
        Polynomial::named(name)
    }

    #[test]
    fn additive_inverse_is_zero() {
        let x = v("x");
        assert!((&x + &(-&x)).is_zero());
    }

    #[test]
    fn product_of_monomials() {
        let a14 = v("alpha_14");
        let a24 = v("alpha_24");
        let left = &a14 * &a24;
        let right = (&a14 * &a24).scale(&Rational::from_int(4));
        let prod = &left * &right;
        let expected = Polynomial::monomial(
            Monomial::var(Var::new("alpha_14"), 2).mul(&Monomial::var(Var::new("alpha_24"), 2)),
            Rational::from_int(4),
        );
        assert_eq!(prod, expected);
        assert_eq!(prod.to_string(), "4*alpha_14^2*alpha_24^2");
    }

    #[test]
    fn binomial_square_matches_schoolbook() {
        let (x, y) = (v("x"), v("y"));
        let sq = (&x + &y).pow(2);
        // schoolbook: x*x + x*y + y*x + y*y
        let mut school = Polynomial::zero();
        for a in [&x, &y] {
            for b in [&x, &y] {
                school.add_assign_ref(&(a * b));
            }
        }
        assert_eq!(sq, school);
        assert_eq!(sq.to_string(), "x^2 + 2*x*y + y^2");
    }

    #[test]
    fn evaluate_and_missing_variable() {
        let p = (&v("alpha_14").pow(2) * &v("alpha_24").pow(2)).scale(&Rational::from_int(4));
        let mut asg = HashMap::new();
        asg.insert(Var::new("alpha_14"), Rational::from_int(1));
        asg.insert(Var::new("alpha_24"), Rational::from_int(2));
        assert_eq!(p.evaluate(&asg).unwrap(), 16);
        assert_eq!(Polynomial::zero().evaluate(&HashMap::new()).unwrap(), 0);
        asg.remove(&Var::new("alpha_24"));
        assert!(matches!(
            p.evaluate(&asg),
            Err(ArithError::MissingVariable(_))
        ));
    }

    #[test]
    fn exact_division() {
        let (x, y) = (v("x"), v("y"));
        let a = &x + &y;
        let b = &x - &y.scale(&Rational::from_int(3));
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        assert_eq!((&prod + &Polynomial::one()).div_exact(&a), None);
    }

    #[test]
    fn fraction_substitution_clears_denominators() {
        // p = x*y + 1 with x = u/w, y = 2/w  =>  w^2 p = 2u + w^2
        let p = &(&v("x") * &v("y")) + &Polynomial::one();
        let mut nums = HashMap::new();
        nums.insert(Var::new("x"), v("u"));
        nums.insert(Var::new("y"), Polynomial::int(2));
        let out = p.substitute_fractions(&nums, &v("w"));
        assert_eq!(out, &v("u").scale(&Rational::from_int(2)) + &v("w").pow(2));
    }

    #[test]
    fn canonical_order_is_graded_lex_by_global_list() {
        let p = &(&v("fam_p") + &v("alpha_2")) + &(&v("alpha_10") * &v("beta_1"));
        assert_eq!(p.to_string(), "alpha_10*beta_1 + alpha_2 + fam_p");
    }
}
