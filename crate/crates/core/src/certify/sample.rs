//! Exact rational sampling of SU(3)-candidates. Non-proving: it only
//! reports how many constrained samples pass the SU(3) checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{Atom, Relation};
use crate::exact_arith::{nullspace, Polynomial, QMatrix, Rational, Var};
use crate::exec::{map_collect, Parallelism};
use crate::exterior::{wedge, KForm};
use crate::hitchin::{lambda, lambda_numeric, su3_check, PositivityMode, Su3Outcome};

use super::{CertifyError, Result};

/// Numerators and denominators are drawn from [-BOUND, BOUND] and [1, BOUND].
pub const BOUND: i64 = 1000;
/// Draws allowed per requested trial before giving up.
const DRAWS_PER_TRIAL: u64 = 200;

pub fn random_rational(rng: &mut impl Rng) -> Rational {
    Rational::new(rng.gen_range(-BOUND..=BOUND), rng.gen_range(1..=BOUND))
}

fn random_nonzero(rng: &mut impl Rng) -> Rational {
    loop {
        let r = random_rational(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

/// Template of an SU(3)-candidate: ω is affine in `linear_vars` once every
/// other variable has a value; ψ does not involve them.
#[derive(Clone, Debug)]
pub struct SamplingProblem {
    pub omega: KForm,
    pub psi: KForm,
    pub linear_vars: Vec<Var>,
    /// Domain atoms; at most one equality.
    pub atoms: Vec<Atom>,
    pub mode: PositivityMode,
}

impl SamplingProblem {
    /// Linear variables are the beta_* and a_* symbols of ω.
    pub fn new(omega: KForm, psi: KForm, atoms: Vec<Atom>) -> Self {
        let mut linear_vars: Vec<Var> = omega
            .terms()
            .flat_map(|(_, c)| c.vars())
            .filter(|v| {
                let n = v.name();
                n.starts_with("beta_") || n.starts_with("a_")
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        linear_vars.sort_by(|a, b| a.global_cmp(b));
        SamplingProblem {
            omega,
            psi,
            linear_vars,
            atoms,
            mode: PositivityMode::EitherSign,
        }
    }

    fn outer_vars(&self) -> Vec<Var> {
        let linear: BTreeSet<Var> = self.linear_vars.iter().copied().collect();
        let mut vars: BTreeSet<Var> = BTreeSet::new();
        for f in [&self.omega, &self.psi] {
            for (_, c) in f.terms() {
                vars.extend(c.vars());
            }
        }
        for a in &self.atoms {
            vars.extend(a.poly.vars());
        }
        let mut out: Vec<Var> = vars.into_iter().filter(|v| !linear.contains(v)).collect();
        out.sort_by(|a, b| a.global_cmp(b));
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStats {
    pub trials: u64,
    pub seed: u64,
    /// Samples that reached the SU(3) check.
    pub accepted: u64,
    pub passes: u64,
    pub draws: u64,
    /// Outcome of su3_check on accepted samples.
    #[serde(default)]
    pub outcomes: BTreeMap<String, u64>,
}

/// How an equality atom is satisfied exactly.
#[derive(Clone, Debug)]
enum EqPlan {
    /// p = c1·v + c0.
    Linear { v: Var, c: [Polynomial; 2] },
    /// p = c2·v² + c1·v + c0 with discriminant affine in w: set it to r².
    Quadratic {
        v: Var,
        w: Var,
        c: [Polynomial; 3],
        disc: [Polynomial; 2],
    },
}

fn eq_plan(p: &Polynomial) -> Result<EqPlan> {
    let mut vars: Vec<Var> = p.vars().into_iter().collect();
    vars.sort_by(|a, b| a.global_cmp(b));
    for &v in &vars {
        if p.degree_in(v) == 1 {
            let c = p.coeffs_in(v);
            return Ok(EqPlan::Linear {
                v,
                c: [c[0].clone(), c[1].clone()],
            });
        }
    }
    for &v in &vars {
        if p.degree_in(v) != 2 {
            continue;
        }
        let c = p.coeffs_in(v);
        let disc = &(&c[1] * &c[1]) - &(&c[2] * &c[0]).scale(&Rational::from_int(4));
        let mut ws: Vec<Var> = disc
            .vars()
            .into_iter()
            .filter(|w| disc.degree_in(*w) == 1)
            .collect();
        ws.sort_by(|a, b| a.global_cmp(b));
        if let Some(&w) = ws.first() {
            let d = disc.coeffs_in(w);
            return Ok(EqPlan::Quadratic {
                v,
                w,
                c: [c[0].clone(), c[1].clone(), c[2].clone()],
                disc: [d[0].clone(), d[1].clone()],
            });
        }
    }
    Err(CertifyError::Unsupported(format!(
        "cannot sample the equality {p} = 0 exactly"
    )))
}

fn eval(p: &Polynomial, vals: &HashMap<Var, Rational>) -> Rational {
    p.evaluate(vals).expect("all variables assigned")
}

/// Values for `vars` satisfying the equality plan, or `None` on a
/// degenerate draw.
fn draw_point(
    rng: &mut impl Rng,
    vars: &[Var],
    plan: Option<&EqPlan>,
) -> Option<HashMap<Var, Rational>> {
    let skip: Vec<Var> = match plan {
        Some(EqPlan::Linear { v, .. }) => vec![*v],
        Some(EqPlan::Quadratic { v, w, .. }) => vec![*v, *w],
        None => vec![],
    };
    let mut vals: HashMap<Var, Rational> = vars
        .iter()
        .filter(|v| !skip.contains(v))
        .map(|&v| (v, random_rational(rng)))
        .collect();
    match plan {
        None => {}
        Some(EqPlan::Linear { v, c }) => {
            let c1 = eval(&c[1], &vals);
            if c1.is_zero() {
                return None;
            }
            vals.insert(*v, -&(&eval(&c[0], &vals) / &c1));
        }
        Some(EqPlan::Quadratic { v, w, c, disc }) => {
            let r = random_rational(rng);
            let d1 = eval(&disc[1], &vals);
            if d1.is_zero() {
                return None;
            }
            let wv = &(&(&r * &r) - &eval(&disc[0], &vals)) / &d1;
            vals.insert(*w, wv);
            let c2 = eval(&c[2], &vals);
            if c2.is_zero() {
                return None;
            }
            let r = if rng.gen_bool(0.5) { -r } else { r };
            let two = Rational::from_int(2);
            vals.insert(*v, &(&r - &eval(&c[1], &vals)) / &(&two * &c2));
        }
    }
    Some(vals)
}

/// Positive multiple of a numeric form with coprime integer coefficients.
/// Every su3_check verdict is invariant under positive rescaling of ω or ψ,
/// and integer coefficients keep the BigRational arithmetic cheap.
fn primitive_scaled(f: &KForm) -> KForm {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for (_, c) in f.terms() {
        let Some(q) = c.as_constant() else {
            return f.clone();
        };
        num = num.gcd(q.numer());
        den = den.lcm(q.denom());
    }
    if num.is_zero() {
        return f.clone();
    }
    f.scale_q(&Rational::new(den, num))
}

fn integral_row(row: &[Rational]) -> Vec<Rational> {
    let l = row.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
    let l = Rational::from(l);
    row.iter().map(|q| q * &l).collect()
}

fn atoms_hold(atoms: &[Atom], vals: &HashMap<Var, Rational>) -> bool {
    atoms.iter().all(|a| a.holds_at(vals).unwrap_or(false))
}

/// A point (over the variables of `p` and `atoms`) satisfying the
/// inequality atoms with p < 0, if one is found within `tries` draws.
pub(crate) fn negative_point(
    p: &Polynomial,
    atoms: &[Atom],
    seed: u64,
    tries: u64,
) -> Option<HashMap<Var, Rational>> {
    let mut vars: BTreeSet<Var> = p.vars();
    for a in atoms {
        vars.extend(a.poly.vars());
    }
    let vars: Vec<Var> = vars.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ineq: Vec<Atom> = atoms
        .iter()
        .filter(|a| a.rel != Relation::Eq)
        .cloned()
        .collect();
    for _ in 0..tries {
        let vals = draw_point(&mut rng, &vars, None)?;
        if atoms_hold(&ineq, &vals) && eval(p, &vals).is_negative() {
            return Some(vals);
        }
    }
    None
}

enum TrialResult {
    Accepted { draws: u64, outcome: Su3Outcome },
    Exhausted { draws: u64 },
}

fn run_trial(
    problem: &SamplingProblem,
    outer: &[Var],
    plan: Option<&EqPlan>,
    ineq: &[Atom],
    seed: u64,
    index: u64,
) -> Result<TrialResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let linear = &problem.linear_vars;
    for draws in 1..=DRAWS_PER_TRIAL {
        let Some(vals) = draw_point(&mut rng, outer, plan) else {
            continue;
        };
        if !atoms_hold(ineq, &vals) {
            continue;
        }
        let psi = primitive_scaled(&problem.psi.partial_eval(&vals));
        let lam = match lambda_numeric(&psi) {
            Some(l) => l,
            None => lambda(&psi)?.as_constant().unwrap_or_else(Rational::zero),
        };
        if !lam.is_negative() {
            continue;
        }
        // ω ∧ ψ = 0 is linear in the remaining symbols; pick a random
        // solution (last column carries the constant term).
        let omega = problem.omega.partial_eval(&vals);
        let prim = wedge(&omega, &psi)?;
        let rows: QMatrix = prim
            .terms()
            .map(|(_, c)| {
                let (coeffs, constant) = c.affine_parts(linear);
                coeffs
                    .iter()
                    .chain(std::iter::once(&constant))
                    .map(|x| x.as_constant().expect("affine with numeric coefficients"))
                    .collect::<Vec<_>>()
            })
            .map(|row| integral_row(&row))
            .collect();
        let cols = linear.len() + 1;
        let basis = if rows.is_empty() {
            (0..cols)
                .map(|k| {
                    (0..cols)
                        .map(|j| {
                            if j == k {
                                Rational::one()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect()
        } else {
            nullspace(&rows, cols)
        };
        let mut x = vec![Rational::zero(); cols];
        for b in &basis {
            let t = random_nonzero(&mut rng);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += &(&t * bi);
            }
        }
        if x[cols - 1].is_zero() {
            continue;
        }
        let norm = x[cols - 1].recip();
        let lin_vals: HashMap<Var, Rational> = linear
            .iter()
            .zip(&x)
            .map(|(v, xi)| (*v, xi * &norm))
            .collect();
        let omega = primitive_scaled(&omega.partial_eval(&lin_vals));
        let outcome = su3_check(&omega, &psi, problem.mode)?;
        if outcome == Su3Outcome::FailsNondegeneracy {
            continue;
        }
        return Ok(TrialResult::Accepted { draws, outcome });
    }
    Ok(TrialResult::Exhausted {
        draws: DRAWS_PER_TRIAL,
    })
}

/// `trials` accepted samples (atoms hold, λ < 0, ω ∧ ψ = 0, ω³ ≠ 0), each
/// run through su3_check. Deterministic in `seed`.
pub fn sample_falsify(
    problem: &SamplingProblem,
    trials: u64,
    seed: u64,
    mode: Parallelism,
) -> Result<SampleStats> {
    let mut stats = SampleStats {
        trials,
        seed,
        ..Default::default()
    };
    if trials == 0 {
        return Ok(stats);
    }
    let eqs: Vec<&Atom> = problem
        .atoms
        .iter()
        .filter(|a| a.rel == Relation::Eq)
        .collect();
    let plan = match eqs.as_slice() {
        [] => None,
        [a] => Some(eq_plan(&a.poly)?),
        _ => {
            return Err(CertifyError::Unsupported(
                "more than one equality atom".into(),
            ))
        }
    };
    let outer = problem.outer_vars();
    // The equality atom holds by construction of each draw.
    let ineq: Vec<Atom> = problem
        .atoms
        .iter()
        .filter(|a| a.rel != Relation::Eq)
        .cloned()
        .collect();
    let results = map_collect(mode, (0..trials).collect(), |k| {
        run_trial(problem, &outer, plan.as_ref(), &ineq, seed, k)
    });
    for r in results {
        match r? {
            TrialResult::Accepted { draws, outcome } => {
                stats.draws += draws;
                stats.accepted += 1;
                if outcome == Su3Outcome::Passes {
                    stats.passes += 1;
                }
                *stats.outcomes.entry(format!("{outcome:?}")).or_default() += 1;
            }
            TrialResult::Exhausted { draws } => stats.draws += draws,
        }
    }
    if stats.accepted < trials {
        return Err(CertifyError::AtomUnsatisfiableAfterBudget {
            draws: stats.draws,
            accepted: stats.accepted,
        });
    }
    Ok(stats)
}
