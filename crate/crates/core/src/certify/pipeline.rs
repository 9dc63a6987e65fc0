//! Per-entry orchestration: λ stage, derivations and strong unimodularity,
//! then the entry's plan.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::{parse_atoms, parse_index_string, AlgebraEntry, Atom, PlanStep, Relation};
use crate::derivations::{
    extend, solve_derivations, strongly_unimodular_constraints, DerivationFamily, ExtensionSpec,
};
use crate::exact_arith::{NonNegWitness, PolyMatrix, Polynomial, Rational, Var};
use crate::exec::{map_collect, Parallelism};
use crate::exterior::{generic_form, pullback};
use crate::hitchin::{b_phi, h_form, k_psi_unchecked, lambda, PositivityMode};
use crate::lie::{ce_differential, LieAlgebra};

use super::gauge::matrix_exp_nilpotent;
use super::report::{EntryReport, Outcome, Report};
use super::sample::random_rational;
use super::{
    candidate_for, candidate_forms, certify_lambda_sign, certify_null_direction,
    certify_sign_product, certify_zero_diagonal, gauge_transport, sample_falsify, Certificate,
    CertificateKind, CertifyError, LambdaOutcome, Result, SamplingProblem,
};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// Accepted samples per sampled step; 0 skips sampling.
    pub samples: u64,
    pub seed: u64,
    pub parallelism: Parallelism,
    /// Run gauge steps (the most expensive exact step).
    pub gauge: bool,
    pub mode: PositivityMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            samples: 1000,
            seed: 20_240_601,
            parallelism: Parallelism::Auto,
            gauge: true,
            mode: PositivityMode::EitherSign,
        }
    }
}

fn family_part(sub: &HashMap<Var, Polynomial>) -> HashMap<Var, Polynomial> {
    sub.iter()
        .filter(|(v, _)| v.name().starts_with("fam_"))
        .map(|(v, p)| (*v, p.clone()))
        .collect()
}

fn entry_witness(entry: &AlgebraEntry) -> Result<Option<NonNegWitness>> {
    Ok(entry
        .lambda_witness
        .as_ref()
        .map(|w| entry.witness(w))
        .transpose()?)
}

/// The base algebra and derivation family after a substitution.
fn context(
    entry: &AlgebraEntry,
    sub: &HashMap<Var, Polynomial>,
) -> Result<(LieAlgebra, Option<DerivationFamily>)> {
    let l = entry.algebra()?.substitute(&family_part(sub));
    let d = entry.derivation_family()?.map(|d| d.substitute(sub));
    Ok((l, d))
}

fn derivation_or_solve(entry: &AlgebraEntry, l: &LieAlgebra) -> Result<DerivationFamily> {
    match entry.derivation_family()? {
        Some(d) => Ok(d),
        None => Ok(solve_derivations(l)?),
    }
}

/// Gauge matrix of a plan step, its s_* parameters in global order.
fn gauge_family(
    entry: &AlgebraEntry,
    s_matrix: &[Vec<String>],
    sub: &HashMap<Var, Polynomial>,
) -> Result<DerivationFamily> {
    let m: PolyMatrix = s_matrix
        .iter()
        .map(|r| {
            r.iter()
                .map(|c| Ok(entry.parse_expr(c)?.substitute(sub)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut params: Vec<Var> = m
        .iter()
        .flatten()
        .flat_map(|c| c.vars())
        .filter(|v| v.name().starts_with("s_"))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    params.sort_by(|a, b| a.global_cmp(b));
    Ok(DerivationFamily::new(m, params))
}

/// Checks the computed strong-unimodularity constraints against the
/// declared substitution. Returns the substitution to apply and notes.
fn reconcile_su(
    entry: &AlgebraEntry,
    e: &ExtensionSpec,
    report: &mut EntryReport,
) -> Result<HashMap<Var, Polynomial>> {
    let declared = entry.su_substitution()?;
    let Some(nil) = entry.nilradical_subspace() else {
        return Ok(declared);
    };
    let su = strongly_unimodular_constraints(e, &nil)?;
    report.su_constraints = su
        .derivation
        .iter()
        .chain(su.inner.iter().filter(|c| !c.is_constant()))
        .cloned()
        .collect();
    if let Some(c) = su.inner_inconsistent() {
        report.notes.push(format!(
            "inner trace constraint {c} = 0 is inconsistent; only the derivation traces are imposed"
        ));
    }
    if declared.is_empty() {
        if !su.derivation.is_empty() {
            return su.solved_substitution().ok_or_else(|| {
                CertifyError::SuMismatch("constraints are not in solved form".into())
            });
        }
        return Ok(declared);
    }
    let mut touched = BTreeSet::new();
    for c in su
        .derivation
        .iter()
        .chain(su.inner.iter().filter(|c| !c.is_constant()))
    {
        touched.extend(c.vars());
        let r = c.substitute(&declared);
        if !r.is_zero() {
            return Err(CertifyError::SuMismatch(format!(
                "{c} = 0 is not implied by the declared constraints (residual {r})"
            )));
        }
    }
    for v in declared.keys() {
        if !touched.contains(v) {
            return Err(CertifyError::SuMismatch(format!(
                "declared constraint on {v} is not computed"
            )));
        }
    }
    Ok(declared)
}

/// The full pipeline for one entry.
pub fn run_pipeline(entry: &AlgebraEntry, config: &PipelineConfig) -> Result<EntryReport> {
    let mut report = EntryReport::new(&entry.id, &entry.name);
    if entry.is_stub() {
        report.outcome = Outcome::DataNotShipped;
        report.notes.push(
            format!("structure equations not shipped; {}", entry.notes)
                .trim_end_matches("; ")
                .to_string(),
        );
        return Ok(report);
    }
    let l = entry.algebra()?;
    let atoms = entry.atoms()?;
    let mut out_of_scope = false;

    if entry.dim == 7 {
        for step in &entry.plan {
            run_step(
                entry,
                step,
                config,
                None,
                &HashMap::new(),
                &atoms,
                &mut report,
                &mut out_of_scope,
            )?;
        }
        report.outcome = settle(&report, out_of_scope);
        return Ok(report);
    }

    let witness = entry_witness(entry)?;
    let mut deferred = false;
    match certify_lambda_sign(&entry.id, &l, witness.as_ref(), &atoms, config.seed) {
        Ok(LambdaOutcome::Certified(c)) => {
            report.lambda = lambda_of(&c);
            report.certificates.push(c);
            report.outcome = Outcome::Obstructed;
            return Ok(report);
        }
        Ok(LambdaOutcome::NoObstruction { lambda, sample }) => {
            report.reached_su3_stage = true;
            report.lambda = Some(lambda);
            let pts: Vec<String> = sample.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            report.notes.push(format!("λ < 0 at {}", pts.join(", ")));
        }
        Ok(LambdaOutcome::Undecided { lambda }) => {
            report.reached_su3_stage = true;
            report.lambda = Some(lambda);
        }
        Err(CertifyError::WitnessMismatch(_)) if !entry.su_constraints.is_empty() => {
            deferred = true
        }
        Err(e) => return Err(e),
    }

    let d = derivation_or_solve(entry, &l)?;
    let ext = extend(&l, &d)?;
    let sub = reconcile_su(entry, &ext, &mut report)?;
    let fam = family_part(&sub);
    let l_sub = l.substitute(&fam);
    if deferred || !fam.is_empty() {
        match certify_lambda_sign(&entry.id, &l_sub, witness.as_ref(), &atoms, config.seed)? {
            LambdaOutcome::Certified(c) => {
                report.lambda = lambda_of(&c);
                report.certificates.push(c.with_substitution(&fam));
                report.reached_su3_stage = false;
                report.outcome = Outcome::Obstructed;
                return Ok(report);
            }
            LambdaOutcome::NoObstruction { lambda, .. } | LambdaOutcome::Undecided { lambda } => {
                report.reached_su3_stage = true;
                report.lambda = Some(lambda);
            }
        }
    }
    if entry.plan.is_empty() {
        report.outcome = Outcome::NotObstructed;
        return Ok(report);
    }
    let d_sub = d.substitute(&sub);
    let ext_sub = extend(&l_sub, &d_sub)?;
    for step in &entry.plan {
        run_step(
            entry,
            step,
            config,
            Some(&ext_sub),
            &sub,
            &atoms,
            &mut report,
            &mut out_of_scope,
        )?;
    }
    report.outcome = settle(&report, out_of_scope);
    Ok(report)
}

fn lambda_of(c: &Certificate) -> Option<Polynomial> {
    match &c.kind {
        CertificateKind::LambdaNonNegative { lambda, .. } => Some(lambda.clone()),
        CertificateKind::LambdaIdenticallyZero => Some(Polynomial::zero()),
        _ => None,
    }
}

fn settle(report: &EntryReport, out_of_scope: bool) -> Outcome {
    if report.certificates.iter().any(|c| !c.verified) {
        return Outcome::Failed;
    }
    match (report.has_proving_certificate(), out_of_scope) {
        (true, false) => Outcome::Obstructed,
        (true, true) => Outcome::PartiallyOutOfScope,
        (false, true) => Outcome::OutOfScope,
        (false, false) => Outcome::NotObstructed,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_step(
    entry: &AlgebraEntry,
    step: &PlanStep,
    config: &PipelineConfig,
    ext: Option<&ExtensionSpec>,
    sub: &HashMap<Var, Polynomial>,
    atoms: &[Atom],
    report: &mut EntryReport,
    out_of_scope: &mut bool,
) -> Result<()> {
    let id = entry.id.as_str();
    let need_ext = || {
        ext.ok_or_else(|| {
            CertifyError::Unsupported(format!("plan step {step:?} needs a six-dimensional base"))
        })
    };
    let finish = |c: Certificate| c.with_substitution(sub);
    match step {
        PlanStep::ZeroDiagonal { indices } => {
            let c = certify_zero_diagonal(id, &entry.algebra()?, indices)?;
            report.certificates.push(c.with_assumptions(atoms.to_vec()));
        }
        PlanStep::NullDirection { indices } => {
            let e = need_ext()?;
            let cand = super::generic_su3_candidate(e)?;
            for &i in indices {
                let c = certify_null_direction(
                    id,
                    &cand,
                    i,
                    &format!("h(e{i}, e{i}) after strong unimodularity"),
                )?;
                report
                    .certificates
                    .push(finish(c.with_assumptions(atoms.to_vec())));
            }
        }
        PlanStep::SignProduct { i, j, witness } => {
            let e = need_ext()?;
            let cand = super::generic_su3_candidate(e)?;
            let w = entry.witness(witness)?.map_polys(&|p| p.substitute(sub));
            let c = certify_sign_product(id, &cand, *i, *j, &w)?;
            report
                .certificates
                .push(finish(c.with_assumptions(atoms.to_vec())));
        }
        PlanStep::Gauge {
            s_matrix,
            targets,
            null_pair,
        } => {
            if !config.gauge {
                report
                    .notes
                    .push("gauge step skipped by configuration".into());
                *out_of_scope = true;
                return Ok(());
            }
            let e = need_ext()?;
            let s = gauge_family(entry, s_matrix, sub)?;
            let t: Vec<Vec<usize>> = targets
                .iter()
                .map(|t| {
                    parse_index_string(t, entry.dim)
                        .ok_or_else(|| CertifyError::Unsupported(format!("bad target {t}")))
                })
                .collect::<Result<_>>()?;
            let c = gauge_transport(id, e, &s, &t, *null_pair)?;
            let mut assumptions = atoms.to_vec();
            if let CertificateKind::GaugeNull(g) = &c.kind {
                assumptions.push(Atom::new(g.determinant.clone(), Relation::Ne));
                report.notes.push(format!(
                    "gauge solution valid where the system determinant {} is nonzero",
                    g.determinant
                ));
            }
            report
                .certificates
                .push(finish(c.with_assumptions(assumptions)));
        }
        PlanStep::OutOfScope {
            reason,
            sample,
            slice,
        } => {
            *out_of_scope = true;
            report.notes.push(format!("out of scope: {reason}"));
            if *sample && config.samples > 0 {
                let e = need_ext()?;
                let mut all = atoms.to_vec();
                all.extend(
                    parse_atoms(entry, slice)?
                        .into_iter()
                        .map(|a| Atom::new(a.poly.substitute(sub), a.rel)),
                );
                let c = sampled_certificate(id, e, all, config)?;
                report.certificates.push(finish(c));
            }
        }
    }
    Ok(())
}

fn sampled_certificate(
    id: &str,
    e: &ExtensionSpec,
    atoms: Vec<Atom>,
    config: &PipelineConfig,
) -> Result<Certificate> {
    let (omega, psi) = candidate_forms(&e.base, &e.derivation)?;
    let mut problem = SamplingProblem::new(omega, psi, atoms.clone());
    problem.mode = config.mode;
    let stats = sample_falsify(&problem, config.samples, config.seed, config.parallelism)?;
    let verified = stats.passes == 0;
    let mut c = Certificate::new(id, CertificateKind::SampledNoSu3(stats)).with_assumptions(atoms);
    c.verified = verified;
    Ok(c)
}

/// Every entry, in catalog order, in parallel.
pub fn run_catalog(entries: &[AlgebraEntry], config: &PipelineConfig) -> Report {
    let mut report = Report::new(config.seed, config.samples);
    // Sampling fans out internally; keep the outer loop sequential then.
    let inner = PipelineConfig {
        parallelism: Parallelism::Sequential,
        ..config.clone()
    };
    let results = map_collect(config.parallelism, entries.iter().collect(), |entry| {
        let start = Instant::now();
        let r = run_pipeline(entry, &inner)
            .unwrap_or_else(|e| EntryReport::failed(&entry.id, &entry.name, e));
        (r, start.elapsed().as_millis() as u64)
    });
    for (r, ms) in results {
        report.timing_ms.insert(r.id.clone(), ms);
        report.entries.push(r);
    }
    report
}

/// Recompute a stored certificate from the entry and the certificate's own
/// data; the result compares equal to the input when it re-verifies.
pub fn recheck(cert: &Certificate, entry: &AlgebraEntry) -> Result<Certificate> {
    let sub = cert.substitution_map();
    let (l, d) = context(entry, &sub)?;
    let ext = || -> Result<ExtensionSpec> {
        let d = d
            .clone()
            .ok_or_else(|| CertifyError::Unsupported("no derivation family".into()))?;
        Ok(extend(&l, &d)?)
    };
    let id = cert.algebra.as_str();
    let fresh = match &cert.kind {
        CertificateKind::ZeroDiagonal { indices } => certify_zero_diagonal(id, &l, indices)?,
        CertificateKind::LambdaIdenticallyZero | CertificateKind::LambdaNonNegative { .. } => {
            let w = match &cert.kind {
                CertificateKind::LambdaNonNegative { witness, .. } => Some(witness),
                _ => None,
            };
            match certify_lambda_sign(id, &l, w, &cert.assumptions, 0)? {
                LambdaOutcome::Certified(c) => c,
                other => {
                    return Err(CertifyError::Unsupported(format!(
                        "λ certificate no longer verifies: {other:?}"
                    )))
                }
            }
        }
        CertificateKind::NullDirection { index, context } => {
            let cand = super::generic_su3_candidate(&ext()?)?;
            certify_null_direction(id, &cand, *index, context)?
        }
        CertificateKind::SignProduct { i, j, witness } => {
            let cand = super::generic_su3_candidate(&ext()?)?;
            certify_sign_product(id, &cand, *i, *j, witness)?
        }
        CertificateKind::GaugeNull(g) => {
            let params: Vec<Var> = g.s_params.iter().map(|s| Var::new(s)).collect();
            let s = DerivationFamily::new(g.s_matrix.clone(), params);
            gauge_transport(id, &ext()?, &s, &g.targets, g.null_pair)?
        }
        CertificateKind::SampledNoSu3(stats) => {
            let config = PipelineConfig {
                samples: stats.trials,
                seed: stats.seed,
                ..Default::default()
            };
            let mut c = sampled_certificate(id, &ext()?, cert.assumptions.clone(), &config)?;
            c.substitution = cert.substitution.clone();
            return Ok(c);
        }
    };
    Ok(Certificate {
        assumptions: cert.assumptions.clone(),
        substitution: cert.substitution.clone(),
        ..fresh
    })
}

/// Evaluate the identity behind a proving certificate at `n` random points
/// by computing everything numerically at each point. Returns the number of
/// points checked (points where a gauge determinant vanishes are skipped).
pub fn spot_check(cert: &Certificate, entry: &AlgebraEntry, n: usize, seed: u64) -> Result<usize> {
    let sub = cert.substitution_map();
    let (l, d) = context(entry, &sub)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fail = |what: String| Err(CertifyError::IdentityFailure(format!("spot check: {what}")));
    let mut checked = 0;
    for _ in 0..n {
        let mut vals: HashMap<Var, Rational> = HashMap::new();
        let mut assign = |p: &Polynomial, vals: &mut HashMap<Var, Rational>| {
            for v in p.vars() {
                vals.entry(v).or_insert_with(|| random_rational(&mut rng));
            }
        };
        let dim = l.dim();
        let alpha = generic_form(dim, 2, "alpha");
        let beta = generic_form(dim, 1, "beta");
        for f in l.differentials().iter().chain([&alpha, &beta]) {
            for (_, c) in f.terms() {
                assign(c, &mut vals);
            }
        }
        if let Some(d) = &d {
            for c in d.matrix.iter().flatten() {
                assign(c, &mut vals);
            }
        }
        if let CertificateKind::GaugeNull(g) = &cert.kind {
            for c in g.s_matrix.iter().flatten() {
                assign(c, &mut vals);
            }
        }
        let ln = l.partial_eval(&vals);
        let psi = ce_differential(&ln, &alpha.partial_eval(&vals))?;
        let numeric_pair = || -> Result<(crate::exterior::KForm, crate::exterior::KForm)> {
            let dn = d
                .as_ref()
                .ok_or_else(|| CertifyError::Unsupported("no derivation family".into()))?
                .partial_eval(&vals);
            let (omega, psi) = candidate_forms(&ln, &dn)?;
            Ok((omega.partial_eval(&vals), psi.partial_eval(&vals)))
        };
        match &cert.kind {
            CertificateKind::ZeroDiagonal { indices } => {
                let b = b_phi(&psi)?;
                for &i in indices {
                    if !b.at(i, i).is_zero() {
                        return fail(format!("b(e{i}, e{i}) = {}", b.at(i, i)));
                    }
                }
            }
            CertificateKind::LambdaIdenticallyZero => {
                if !lambda(&psi)?.is_zero() {
                    return fail("λ ≠ 0".into());
                }
            }
            CertificateKind::LambdaNonNegative { witness, .. } => {
                let lam = lambda(&psi)?;
                let w = witness.expand()?.partial_eval(&vals);
                if lam != w || w.as_constant().map(|x| x.is_negative()).unwrap_or(true) {
                    return fail(format!("λ = {lam}, witness = {w}"));
                }
            }
            CertificateKind::NullDirection { index, .. } => {
                let (omega, psi) = numeric_pair()?;
                let h = h_form(&omega, &k_psi_unchecked(&psi)?)?;
                if !h.at(*index, *index).is_zero() {
                    return fail(format!("h(e{index}, e{index}) = {}", h.at(*index, *index)));
                }
            }
            CertificateKind::SignProduct { i, j, witness } => {
                let (omega, psi) = numeric_pair()?;
                let h = h_form(&omega, &k_psi_unchecked(&psi)?)?;
                let w = witness.expand()?.partial_eval(&vals);
                let r = &(h.at(*i, *i) * h.at(*j, *j)) + &w;
                if !r.is_zero() {
                    return fail(format!("sign product residual {r}"));
                }
            }
            CertificateKind::GaugeNull(g) => {
                let det = g.determinant.partial_eval(&vals);
                if det.is_zero() {
                    continue;
                }
                let mut s_vals = vals.clone();
                for (name, num) in g.s_params.iter().zip(&g.numerators) {
                    let v = &num.partial_eval(&vals).as_constant().expect("numeric")
                        / &det.as_constant().expect("numeric");
                    s_vals.insert(Var::new(name), v);
                }
                let s: PolyMatrix = g
                    .s_matrix
                    .iter()
                    .map(|r| r.iter().map(|c| c.partial_eval(&s_vals)).collect())
                    .collect();
                let f = matrix_exp_nilpotent(&s);
                let (omega, psi) = numeric_pair()?;
                let fpsi = pullback(&f, &psi)?;
                for t in &g.targets {
                    if !fpsi.coeff(t).is_zero() {
                        return fail(format!("target {t:?} = {}", fpsi.coeff(t)));
                    }
                }
                let [i, j] = g.null_pair;
                let w = pullback(&f, &omega)?.coeff(&[i, j]);
                if !w.is_zero() {
                    return fail(format!("F*ω(e{i}, e{j}) = {w}"));
                }
                let col = k_psi_unchecked(&fpsi)?.column(i);
                for (r, c) in col.coords().iter().enumerate() {
                    if r + 1 != i && r + 1 != j && !c.is_zero() {
                        return fail(format!("K e{i} has component along e{}", r + 1));
                    }
                }
            }
            CertificateKind::SampledNoSu3(_) => return Ok(0),
        }
        checked += 1;
    }
    Ok(checked)
}

/// Candidate for an entry after its declared substitution; for tests and
/// the CLI.
pub fn entry_candidate(entry: &AlgebraEntry) -> Result<super::Su3Candidate> {
    let sub = entry.su_substitution()?;
    let (l, d) = context(entry, &sub)?;
    let d = match d {
        Some(d) => d,
        None => solve_derivations(&l)?,
    };
    candidate_for(&l, &d)
}
