//! Obstruction certificates: exact polynomial identities that rule out
//! exact G₂- and SU(3)-candidates, plus quarantined sampling evidence.

mod gauge;
mod pipeline;
mod report;
mod sample;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::catalog::{Atom, CatalogError};
use crate::derivations::{dstar_action, extend, DerivationError, DerivationFamily, ExtensionSpec};
use crate::exact_arith::{
    check_nonneg_witness, ArithError, NonNegWitness, Polynomial, Rational, Var,
};
use crate::exterior::{generic_form, ExteriorError, KForm};
use crate::hitchin::{b_phi, h_form, k_psi, HitchinError, KOperator, SymBilinear};
use crate::lie::{ce_differential, LieAlgebra, LieError};

pub use gauge::{gauge_transport, matrix_exp_nilpotent, GaugeData};
pub use pipeline::{
    entry_candidate, recheck, run_catalog, run_pipeline, spot_check, PipelineConfig,
};
pub use report::{EntryReport, Outcome, Report, REPORT_SCHEMA};
pub use sample::{random_rational, sample_falsify, SampleStats, SamplingProblem};

#[derive(Debug, thiserror::Error)]
pub enum CertifyError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Hitchin(#[from] HitchinError),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("witness does not expand to the target; residual {0}")]
    WitnessMismatch(Polynomial),
    #[error("h(e{index}, e{index}) is not identically zero: {residual}")]
    NotIdenticallyZero { index: usize, residual: Polynomial },
    #[error("sign-product identity fails; residual {0}")]
    IdentityMismatch(Polynomial),
    #[error("gauge system is singular; determinant {0}")]
    SingularSymbolicSystem(Polynomial),
    #[error("gauge identity fails: {0}")]
    IdentityFailure(String),
    #[error("sampler exhausted its budget after {draws} draws with {accepted} accepted samples")]
    AtomUnsatisfiableAfterBudget { draws: u64, accepted: u64 },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("strong-unimodularity constraint mismatch: {0}")]
    SuMismatch(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, CertifyError>;

/// What a certificate asserts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateKind {
    /// b_φ(e_i, e_i) ≡ 0 for the generic exact 3-form φ = dα.
    ZeroDiagonal {
        indices: Vec<usize>,
    },
    LambdaIdenticallyZero,
    LambdaNonNegative {
        lambda: Polynomial,
        witness: NonNegWitness,
    },
    /// h(e_i, e_i) ≡ 0.
    NullDirection {
        index: usize,
        context: String,
    },
    /// h(e_i,e_i)·h(e_j,e_j) = −W with W ≥ 0, so h is not definite.
    SignProduct {
        i: usize,
        j: usize,
        witness: NonNegWitness,
    },
    GaugeNull(Box<GaugeData>),
    /// Non-proving.
    SampledNoSu3(SampleStats),
}

impl CertificateKind {
    pub fn is_proving(&self) -> bool {
        !matches!(self, CertificateKind::SampledNoSu3(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            CertificateKind::ZeroDiagonal { .. } => "zero_diagonal",
            CertificateKind::LambdaIdenticallyZero => "lambda_identically_zero",
            CertificateKind::LambdaNonNegative { .. } => "lambda_non_negative",
            CertificateKind::NullDirection { .. } => "null_direction",
            CertificateKind::SignProduct { .. } => "sign_product",
            CertificateKind::GaugeNull(_) => "gauge_null",
            CertificateKind::SampledNoSu3(_) => "sampled_no_su3",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Catalog id of the algebra.
    pub algebra: String,
    pub kind: CertificateKind,
    /// Domain atoms the conclusion depends on.
    #[serde(default)]
    pub assumptions: Vec<Atom>,
    /// Substitutions applied before the check (strong unimodularity),
    /// keyed by variable name.
    #[serde(default)]
    pub substitution: BTreeMap<String, Polynomial>,
    pub verified: bool,
}

impl Certificate {
    pub fn new(algebra: &str, kind: CertificateKind) -> Self {
        Certificate {
            algebra: algebra.to_string(),
            kind,
            assumptions: Vec::new(),
            substitution: BTreeMap::new(),
            verified: true,
        }
    }

    pub fn with_assumptions(mut self, atoms: Vec<Atom>) -> Self {
        self.assumptions = atoms;
        self
    }

    pub fn with_substitution(mut self, sub: &HashMap<Var, Polynomial>) -> Self {
        self.substitution = sub
            .iter()
            .map(|(k, v)| (k.name().to_string(), v.clone()))
            .collect();
        self
    }

    pub fn substitution_map(&self) -> HashMap<Var, Polynomial> {
        self.substitution
            .iter()
            .map(|(k, v)| (Var::new(k), v.clone()))
            .collect()
    }
}

/// Symbolic data attached to a (dim-6 base, derivation) pair.
#[derive(Clone, Debug)]
pub struct Su3Candidate {
    pub omega: KForm,
    pub psi: KForm,
    pub k: KOperator,
    pub lambda: Polynomial,
    pub h: SymBilinear,
}

/// ψ = d̂α for the generic 2-form α = Σ alpha_ij e^{ij}.
pub fn generic_exact_psi(l: &LieAlgebra) -> Result<KForm> {
    Ok(ce_differential(l, &generic_form(l.dim(), 2, "alpha"))?)
}

/// φ = dα for the generic α on a 7-dimensional algebra, and b_φ.
pub fn generic_exact_g2(l: &LieAlgebra) -> Result<(KForm, SymBilinear)> {
    if l.dim() != 7 {
        return Err(CertifyError::DimensionMismatch {
            expected: 7,
            found: l.dim(),
        });
    }
    let phi = generic_exact_psi(l)?;
    let b = b_phi(&phi)?;
    Ok((phi, b))
}

/// ω = d̂β − D*α and ψ = d̂α for generic α, β (the closed-form ansatz for
/// s ⋊_D ℝ), with K_ψ, λ(ψ) and h = ω(·, K·).
pub fn generic_su3_candidate(e: &ExtensionSpec) -> Result<Su3Candidate> {
    let (omega, psi) = candidate_forms(&e.base, &e.derivation)?;
    let k = k_psi(&psi)?;
    let h = h_form(&omega, &k)?;
    Ok(Su3Candidate {
        lambda: k.lambda.clone(),
        omega,
        psi,
        k,
        h,
    })
}

pub(crate) fn candidate_forms(base: &LieAlgebra, d: &DerivationFamily) -> Result<(KForm, KForm)> {
    if base.dim() != 6 {
        return Err(CertifyError::DimensionMismatch {
            expected: 6,
            found: base.dim(),
        });
    }
    let alpha = generic_form(6, 2, "alpha");
    let beta = generic_form(6, 1, "beta");
    let psi = ce_differential(base, &alpha)?;
    let omega = &ce_differential(base, &beta)? - &dstar_action(d, &alpha);
    Ok((omega, psi))
}

/// b_φ(e_i, e_i) ≡ 0 for every listed i.
pub fn certify_zero_diagonal(id: &str, l: &LieAlgebra, indices: &[usize]) -> Result<Certificate> {
    let (_, b) = generic_exact_g2(l)?;
    for &i in indices {
        let r = b.at(i, i);
        if !r.is_zero() {
            return Err(CertifyError::NotIdenticallyZero {
                index: i,
                residual: r.clone(),
            });
        }
    }
    Ok(Certificate::new(
        id,
        CertificateKind::ZeroDiagonal {
            indices: indices.to_vec(),
        },
    ))
}

/// Result of the λ-sign stage.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaOutcome {
    Certified(Certificate),
    /// λ takes negative values: a witness point.
    NoObstruction {
        lambda: Polynomial,
        sample: BTreeMap<String, Rational>,
    },
    /// Neither a witness nor a negative sample was found.
    Undecided {
        lambda: Polynomial,
    },
}

/// λ(d̂α) for the generic α: identically zero, certified nonnegative by
/// `witness`, or exhibited negative at a sample point.
pub fn certify_lambda_sign(
    id: &str,
    l: &LieAlgebra,
    witness: Option<&NonNegWitness>,
    atoms: &[Atom],
    seed: u64,
) -> Result<LambdaOutcome> {
    if l.dim() != 6 {
        return Err(CertifyError::DimensionMismatch {
            expected: 6,
            found: l.dim(),
        });
    }
    let lambda = crate::hitchin::lambda(&generic_exact_psi(l)?)?;
    if lambda.is_zero() {
        return Ok(LambdaOutcome::Certified(Certificate::new(
            id,
            CertificateKind::LambdaIdenticallyZero,
        )));
    }
    if let Some(w) = witness {
        return match check_nonneg_witness(&lambda, w) {
            Ok(_) => Ok(LambdaOutcome::Certified(
                Certificate::new(
                    id,
                    CertificateKind::LambdaNonNegative {
                        lambda,
                        witness: w.clone(),
                    },
                )
                .with_assumptions(atoms.to_vec()),
            )),
            Err(ArithError::ExpansionMismatch(r)) => Err(CertifyError::WitnessMismatch(r)),
            Err(e) => Err(e.into()),
        };
    }
    match sample::negative_point(&lambda, atoms, seed, 400) {
        Some(sample) => Ok(LambdaOutcome::NoObstruction {
            lambda,
            sample: sample
                .into_iter()
                .map(|(k, v)| (k.name().to_string(), v))
                .collect(),
        }),
        None => Ok(LambdaOutcome::Undecided { lambda }),
    }
}

/// h(e_i, e_i) ≡ 0 on the candidate.
pub fn certify_null_direction(
    id: &str,
    c: &Su3Candidate,
    i: usize,
    context: &str,
) -> Result<Certificate> {
    let r = c.h.at(i, i);
    if !r.is_zero() {
        return Err(CertifyError::NotIdenticallyZero {
            index: i,
            residual: r.clone(),
        });
    }
    Ok(Certificate::new(
        id,
        CertificateKind::NullDirection {
            index: i,
            context: context.to_string(),
        },
    ))
}

/// h(e_i,e_i)·h(e_j,e_j) + W ≡ 0 with W the expansion of `witness`.
pub fn certify_sign_product(
    id: &str,
    c: &Su3Candidate,
    i: usize,
    j: usize,
    witness: &NonNegWitness,
) -> Result<Certificate> {
    let lhs = c.h.at(i, i) * c.h.at(j, j);
    let w = witness.expand()?;
    let r = &lhs + &w;
    if !r.is_zero() {
        return Err(CertifyError::IdentityMismatch(r));
    }
    Ok(Certificate::new(
        id,
        CertificateKind::SignProduct {
            i,
            j,
            witness: witness.clone(),
        },
    ))
}

/// Convenience: extension of `base` by `d`, then the generic candidate.
pub fn candidate_for(base: &LieAlgebra, d: &DerivationFamily) -> Result<Su3Candidate> {
    generic_su3_candidate(&extend(base, d)?)
}
