//! Lie-algebra datasets: entries, validation and JSON persistence.

mod dsl;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::derivations::{verify_derivation, DerivationError, DerivationFamily};
use crate::exact_arith::{
    parse_polynomial_with, NonNegWitness, Polynomial, Rational, SyntaxError, Var,
};
use crate::exec::{map_collect, Parallelism};
use crate::exterior::{ExteriorError, KForm};
use crate::lie::{verify_nilradical, LieAlgebra, LieError, Subspace};

pub use dsl::{
    family_var, format_structure_equations, parse_differentials, parse_structure_equations,
};

pub const CATALOG_SCHEMA: &str = "g2cert-catalog/1";

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("basis index {index} out of range for dimension {dim} (position {position})")]
    IndexOutOfRange {
        index: usize,
        dim: usize,
        position: usize,
    },
    #[error("slot {slot} is not linear in the basis symbols (position {position})")]
    NotLinearInBasis { slot: usize, position: usize },
    #[error("{0} slots; single-digit indices allow at most 9")]
    TooManySlots(usize),
    #[error("d²e^{index} = {residue} is not zero")]
    JacobiFailure { index: usize, residue: KForm },
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("entry `{entry}`: {cause}")]
    ValidationFailure { entry: String, cause: String },
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("unsupported schema `{0}`")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, CatalogError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Ne,
    Gt,
    Ge,
    Lt,
    Le,
}

impl Relation {
    pub fn holds(self, v: &Rational) -> bool {
        match self {
            Relation::Eq => v.is_zero(),
            Relation::Ne => !v.is_zero(),
            Relation::Gt => v.is_positive(),
            Relation::Ge => !v.is_negative(),
            Relation::Lt => v.is_negative(),
            Relation::Le => !v.is_positive(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }
}

/// `poly rel 0` as written in a catalog file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomSource {
    pub poly: String,
    pub rel: Relation,
}

/// A parsed domain atom `poly rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub poly: Polynomial,
    pub rel: Relation,
}

impl Atom {
    pub fn new(poly: Polynomial, rel: Relation) -> Self {
        Atom { poly, rel }
    }

    /// `None` if some variable of the atom is unassigned.
    pub fn holds_at(&self, values: &HashMap<Var, Rational>) -> Option<bool> {
        self.poly.evaluate(values).ok().map(|v| self.rel.holds(&v))
    }
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} 0", self.poly, self.rel.symbol())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    #[default]
    Shipped,
    /// Equations not available; reported as data not shipped.
    Stub,
}

/// One certification step to attempt after the λ and strong-unimodularity
/// stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanStep {
    /// dim 7: b_φ(e_i, e_i) ≡ 0 for the generic exact φ.
    ZeroDiagonal { indices: Vec<usize> },
    /// h(e_i, e_i) ≡ 0.
    NullDirection { indices: Vec<usize> },
    /// h(e_i,e_i)·h(e_j,e_j) = −W with W a nonnegativity witness.
    SignProduct { i: usize, j: usize, witness: Value },
    /// Pull back by exp(S), kill `targets` (index strings like "136"), read
    /// off a K-invariant pair.
    Gauge {
        s_matrix: Vec<Vec<String>>,
        targets: Vec<String>,
        null_pair: [usize; 2],
    },
    /// Not machine-proved. With `sample` set, non-proving exact sampling is
    /// run, restricted to `slice` if given.
    OutOfScope {
        reason: String,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        sample: bool,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        slice: Vec<AtomSource>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraEntry {
    pub id: String,
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<AtomSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equations: Option<String>,
    /// 1-based basis indices spanning the nilradical.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nilradical: Vec<usize>,
    /// Derivation family D(a_1, …) as matrix rows of expressions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation: Option<Vec<Vec<String>>>,
    /// Expected solved strong-unimodularity substitutions, `var → expr`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub su_constraints: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_witness: Option<Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plan: Vec<PlanStep>,
    #[serde(default, skip_serializing_if = "is_shipped")]
    pub status: EntryStatus,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
}

fn is_shipped(s: &EntryStatus) -> bool {
    *s == EntryStatus::Shipped
}

const FREE_PREFIXES: [&str; 4] = ["alpha_", "beta_", "a_", "s_"];

impl AlgebraEntry {
    fn fail(&self, cause: impl std::fmt::Display) -> CatalogError {
        CatalogError::ValidationFailure {
            entry: self.id.clone(),
            cause: cause.to_string(),
        }
    }

    pub fn is_stub(&self) -> bool {
        self.status == EntryStatus::Stub || self.equations.is_none()
    }

    /// Parse an expression in the entry's family parameters and the
    /// reserved symbol families alpha_ij, beta_i, a_k, s_k.
    pub fn parse_expr(&self, src: &str) -> Result<Polynomial> {
        let resolve = |ident: &str| -> Option<Polynomial> {
            if self.params.iter().any(|p| p == ident) {
                Some(Polynomial::var(family_var(ident)))
            } else if FREE_PREFIXES.iter().any(|p| ident.starts_with(p)) {
                Some(Polynomial::named(ident))
            } else {
                None
            }
        };
        parse_polynomial_with(src, &resolve).map_err(|e| self.fail(format!("`{src}`: {e}")))
    }

    /// Declared name → variable.
    pub fn param_vars(&self) -> Vec<Var> {
        self.params.iter().map(|p| family_var(p)).collect()
    }

    pub fn algebra(&self) -> Result<LieAlgebra> {
        let src = self
            .equations
            .as_deref()
            .ok_or_else(|| self.fail("no structure equations shipped"))?;
        let l = parse_structure_equations(src, &self.params).map_err(|e| self.fail(e))?;
        if l.dim() != self.dim {
            return Err(self.fail(format!(
                "{} slots, declared dimension {}",
                l.dim(),
                self.dim
            )));
        }
        Ok(l.with_name(self.name.clone()))
    }

    pub fn atoms(&self) -> Result<Vec<Atom>> {
        parse_atoms(self, &self.assumptions)
    }

    pub fn nilradical_subspace(&self) -> Option<Subspace> {
        (!self.nilradical.is_empty()).then(|| Subspace::coordinate(self.dim, &self.nilradical))
    }

    pub fn derivation_family(&self) -> Result<Option<DerivationFamily>> {
        let Some(rows) = &self.derivation else {
            return Ok(None);
        };
        if rows.len() != self.dim || rows.iter().any(|r| r.len() != self.dim) {
            return Err(self.fail("derivation matrix has the wrong shape"));
        }
        let matrix = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| self.parse_expr(s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut params: Vec<Var> = matrix
            .iter()
            .flatten()
            .flat_map(|p| p.vars())
            .filter(|v| v.name().starts_with("a_"))
            .collect();
        params.sort_by(|a, b| a.global_cmp(b));
        params.dedup();
        Ok(Some(DerivationFamily::new(matrix, params)))
    }

    /// Declared strong-unimodularity substitution.
    pub fn su_substitution(&self) -> Result<HashMap<Var, Polynomial>> {
        self.su_constraints
            .iter()
            .map(|(k, v)| {
                let key = self.parse_expr(k)?;
                let var = match key.vars().into_iter().collect::<Vec<_>>()[..] {
                    [v] if key == Polynomial::var(v) => v,
                    _ => return Err(self.fail(format!("`{k}` is not a variable"))),
                };
                Ok((var, self.parse_expr(v)?))
            })
            .collect()
    }

    pub fn witness(&self, v: &Value) -> Result<NonNegWitness> {
        let raw = NonNegWitness::from_json(v).map_err(|e| self.fail(e))?;
        let rename: HashMap<Var, Var> = self
            .params
            .iter()
            .map(|p| (Var::new(p), family_var(p)))
            .collect();
        Ok(raw.map_polys(&|p| p.rename(&rename)))
    }

    /// Parse everything and check d² = 0, the nilradical and the
    /// derivation family.
    pub fn validate(&self) -> Result<()> {
        if self.is_stub() {
            return Ok(());
        }
        let l = self.algebra()?;
        self.atoms()?;
        if let Some(n) = self.nilradical_subspace() {
            verify_nilradical(&l, &n, self.nilradical.len()).map_err(|e| self.fail(e))?;
        }
        if let Some(d) = self.derivation_family()? {
            verify_derivation(&l, &d).map_err(|e: DerivationError| self.fail(e))?;
        }
        self.su_substitution()?;
        if let Some(w) = &self.lambda_witness {
            self.witness(w)?;
        }
        for step in &self.plan {
            match step {
                PlanStep::SignProduct { witness, .. } => {
                    self.witness(witness)?;
                }
                PlanStep::Gauge {
                    s_matrix, targets, ..
                } => {
                    if s_matrix.len() != self.dim {
                        return Err(self.fail("gauge matrix has the wrong shape"));
                    }
                    for s in s_matrix.iter().flatten() {
                        self.parse_expr(s)?;
                    }
                    for t in targets {
                        parse_index_string(t, self.dim)
                            .ok_or_else(|| self.fail(format!("bad target `{t}`")))?;
                    }
                }
                PlanStep::OutOfScope { slice, .. } => {
                    parse_atoms(self, slice)?;
                }
                PlanStep::ZeroDiagonal { .. } | PlanStep::NullDirection { .. } => {}
            }
        }
        Ok(())
    }
}

pub fn parse_atoms(entry: &AlgebraEntry, src: &[AtomSource]) -> Result<Vec<Atom>> {
    src.iter()
        .map(|a| Ok(Atom::new(entry.parse_expr(&a.poly)?, a.rel)))
        .collect()
}

/// "136" → [1, 3, 6].
pub fn parse_index_string(s: &str, dim: usize) -> Option<Vec<usize>> {
    let idx: Vec<usize> = s
        .chars()
        .map(|c| c.to_digit(10).map(|d| d as usize))
        .collect::<Option<_>>()?;
    (idx.iter().all(|&i| i >= 1 && i <= dim) && idx.windows(2).all(|w| w[0] < w[1])).then_some(idx)
}

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    schema: String,
    entries: Vec<AlgebraEntry>,
}

/// Canonical serialized form: pretty JSON with a trailing newline.
pub fn to_canonical_string(entries: &[AlgebraEntry]) -> String {
    let file = CatalogFile {
        schema: CATALOG_SCHEMA.into(),
        entries: entries.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("catalog serializes");
    s.push('\n');
    s
}

/// Parse and validate a catalog document; blank input is an empty catalog.
pub fn parse_catalog(text: &str) -> Result<Vec<AlgebraEntry>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let file: CatalogFile = serde_json::from_str(text)?;
    if file.schema != CATALOG_SCHEMA {
        return Err(CatalogError::Schema(file.schema));
    }
    validate_all(&file.entries)?;
    Ok(file.entries)
}

pub fn validate_all(entries: &[AlgebraEntry]) -> Result<()> {
    let results = map_collect(Parallelism::Auto, entries.iter().collect(), |e| {
        e.validate()
    });
    results.into_iter().collect()
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Vec<AlgebraEntry>> {
    parse_catalog(&std::fs::read_to_string(path)?)
}

pub fn save_catalog(entries: &[AlgebraEntry], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_canonical_string(entries))?;
    Ok(())
}

const TABLE1: &str = include_str!("../../data/table1.json");
const NONSOLVABLE: &str = include_str!("../../data/nonsolvable.json");
const INDECOMPOSABLE: &str = include_str!("../../data/indecomposable.json");

pub const BUILTIN_DATASETS: [&str; 3] = ["table1", "nonsolvable", "indecomposable"];

/// Shipped dataset by name; `all` concatenates every dataset.
pub fn builtin(name: &str) -> Result<Vec<AlgebraEntry>> {
    match name {
        "table1" => parse_catalog(TABLE1),
        "nonsolvable" => parse_catalog(NONSOLVABLE),
        "indecomposable" => parse_catalog(INDECOMPOSABLE),
        "all" => {
            let mut out = Vec::new();
            for n in BUILTIN_DATASETS {
                out.extend(builtin(n)?);
            }
            Ok(out)
        }
        other => Err(CatalogError::UnknownDataset(other.into())),
    }
}

/// Find an entry by id or by name across all shipped datasets.
pub fn find_builtin(key: &str) -> Result<AlgebraEntry> {
    builtin("all")?
        .into_iter()
        .find(|e| e.id == key || e.name == key)
        .ok_or_else(|| CatalogError::UnknownDataset(key.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_sizes() {
        assert_eq!(builtin("table1").unwrap().len(), 31);
        let q = builtin("nonsolvable").unwrap();
        assert_eq!(
            q.iter().map(|e| e.id.as_str()).collect::<Vec<_>>(),
            ["q1", "q2", "q3", "q4"]
        );
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn empty_input_is_empty_catalog() {
        assert!(parse_catalog("").unwrap().is_empty());
        assert!(parse_catalog("  \n").unwrap().is_empty());
    }

    #[test]
    fn canonical_form_is_byte_stable() {
        for name in BUILTIN_DATASETS {
            let entries = builtin(name).unwrap();
            let s = to_canonical_string(&entries);
            let back = parse_catalog(&s).unwrap();
            assert_eq!(back, entries);
            assert_eq!(to_canonical_string(&back), s);
        }
    }

    #[test]
    fn shipped_files_are_canonical() {
        for (name, text) in [
            ("table1", TABLE1),
            ("nonsolvable", NONSOLVABLE),
            ("indecomposable", INDECOMPOSABLE),
        ] {
            let entries = parse_catalog(text).unwrap();
            assert_eq!(to_canonical_string(&entries), text, "{name}");
        }
    }

    #[test]
    fn validation_names_the_entry() {
        let mut e = builtin("table1").unwrap().remove(0);
        e.nilradical = vec![1, 2, 3];
        match e.validate() {
            Err(CatalogError::ValidationFailure { entry, .. }) => assert_eq!(entry, e.id),
            other => panic!("{other:?}"),
        }
        let mut e = builtin("table1").unwrap().remove(0);
        e.equations = Some("(-e13, e23, e12, 0, 0, 0)".into());
        assert!(e.validate().is_err());
    }

    #[test]
    fn atoms_and_witnesses_use_declared_names() {
        let e = find_builtin("g519_r").unwrap();
        let atoms = e.atoms().unwrap();
        assert_eq!(atoms[0].to_string(), "fam_p + 1 != 0");
        let w = e.witness(e.lambda_witness.as_ref().unwrap()).unwrap();
        assert!(w.expand().unwrap().vars().contains(&family_var("p")));
    }

    #[test]
    fn save_and_load() {
        let dir = std::env::temp_dir().join(format!("g2cert-cat-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("q.json");
        let entries = builtin("nonsolvable").unwrap();
        save_catalog(&entries, &path).unwrap();
        assert_eq!(load_catalog(&path).unwrap(), entries);
        std::fs::remove_dir_all(dir).ok();
    }
}
