//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to
//! see the table when everything passes.

use std::collections::{BTreeMap, HashMap};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use g2cert::catalog::{builtin, find_builtin, parse_atoms, AlgebraEntry, PlanStep};
use g2cert::certify::{
    certify_lambda_sign, certify_null_direction, certify_sign_product, certify_zero_diagonal,
    entry_candidate, generic_exact_psi, run_pipeline, sample_falsify, CertificateKind, GaugeData,
    LambdaOutcome, Outcome, PipelineConfig, Report, SamplingProblem,
};
use g2cert::derivations::{
    extend, solve_derivations, strongly_unimodular_constraints, verify_derivation,
};
use g2cert::exact_arith::{Polynomial, Rational, Var};
use g2cert::exec::Parallelism;
use g2cert::exterior::KForm;
use g2cert::hitchin::{k_psi, lambda, standard_su3_pair, su3_check, PositivityMode, Su3Outcome};

type Verdict = Result<String, String>;
type Check = (&'static str, fn() -> Verdict);
type Case<'a> = (&'a str, &'a [(&'a str, Rational)], &'a str);

const SEED: u64 = 20_240_601;

fn entry(id: &str) -> AlgebraEntry {
    find_builtin(id).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn expr(e: &AlgebraEntry, s: &str) -> Polynomial {
    e.parse_expr(s)
        .unwrap_or_else(|err| panic!("{}: {s}: {err}", e.id))
}

fn family_values(vals: &[(&str, Rational)]) -> HashMap<Var, Rational> {
    vals.iter()
        .map(|(k, v)| (g2cert::catalog::family_var(k), v.clone()))
        .collect()
}

fn family_sub(vals: &[(&str, Rational)]) -> HashMap<Var, Polynomial> {
    family_values(vals)
        .into_iter()
        .map(|(k, v)| (k, Polynomial::constant(v)))
        .collect()
}

fn lambda_of(e: &AlgebraEntry, vals: &[(&str, Rational)]) -> Polynomial {
    let l = e.algebra().unwrap().substitute(&family_sub(vals));
    lambda(&generic_exact_psi(&l).unwrap()).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn criterion_1() -> Verdict {
    let all = builtin("all").map_err(|e| e.to_string())?;
    let table1 = builtin("table1").map_err(|e| e.to_string())?;
    let mut checked = 0;
    for e in all.iter().filter(|e| !e.is_stub()) {
        let l = e.algebra().map_err(|err| format!("{}: {err}", e.id))?;
        l.check_jacobi().map_err(|err| format!("{}: {err}", e.id))?;
        checked += 1;
    }
    let required = [
        "q1",
        "q2",
        "q3",
        "q4",
        "g654",
        "g670",
        "g6101_am1",
        "g6101",
        "g6114",
        "g655",
        "g683",
        "g6135",
    ];
    let missing: Vec<&str> = required
        .iter()
        .copied()
        .filter(|id| {
            all.iter()
                .find(|e| e.id == *id)
                .map(|e| e.is_stub())
                .unwrap_or(true)
        })
        .collect();
    let summary = format!(
        "{checked} entries satisfy d² = 0 identically ({} Table 1 rows)",
        table1.len()
    );
    if table1.len() < 30 || !missing.is_empty() {
        return Err(format!(
            "{summary}; no structure equations shipped for {}",
            missing.join(", ")
        ));
    }
    Ok(summary)
}

fn criterion_2() -> Verdict {
    for id in ["q1", "q2", "q3"] {
        let e = entry(id);
        let l = e.algebra().map_err(|err| err.to_string())?;
        if id != "q1" && l.parameters().is_empty() {
            return Err(format!("{id} should carry the symbolic parameter mu"));
        }
        certify_zero_diagonal(id, &l, &[5, 6, 7]).map_err(|err| format!("{id}: {err}"))?;
    }
    Ok("b_φ(e_i,e_i) ≡ 0 for i = 5,6,7 on q1, q2(μ), q3(μ)".into())
}

fn criterion_3() -> Verdict {
    let printed = [
        ("g34_g31", "4*alpha_14^2*alpha_24^2"),
        ("g34_g35", "4*(alpha_14^2 + alpha_15^2)*(alpha_24^2 + alpha_25^2)"),
        ("g35_g31", "(alpha_14^2 + alpha_24^2)^2"),
        (
            "g35_g35",
            "((alpha_14 + alpha_25)^2 + (alpha_15 - alpha_24)^2)*((alpha_14 - alpha_25)^2 + (alpha_15 + alpha_24)^2)",
        ),
        ("g519_r", "4*(1 + p)^2*alpha_14^2*alpha_16^2"),
        ("g523_r", "16*alpha_14^2*alpha_16^2"),
        ("g525_r", "16*p^2*alpha_14^2*alpha_16^2"),
        ("g528_r", "alpha_14^2*alpha_16^2"),
    ];
    let survivors = ["g34_g34", "g530_r", "g533_r", "g535_r"];
    let mut fails = Vec::new();
    for (id, s) in printed {
        let e = entry(id);
        let l = e.algebra().unwrap();
        if lambda_of(&e, &[]) != expr(&e, s) {
            fails.push(format!("{id}: λ differs from the printed formula"));
            continue;
        }
        let w = e.lambda_witness.as_ref().map(|w| e.witness(w).unwrap());
        match certify_lambda_sign(id, &l, w.as_ref(), &e.atoms().unwrap(), SEED) {
            Ok(LambdaOutcome::Certified(c))
                if matches!(c.kind, CertificateKind::LambdaNonNegative { .. }) => {}
            other => fails.push(format!("{id}: witness does not certify ({other:?})")),
        }
    }
    let mut zero = 0;
    for e in builtin("table1").unwrap() {
        let id = e.id.as_str();
        if printed.iter().any(|(p, _)| *p == id) {
            continue;
        }
        let out = certify_lambda_sign(id, &e.algebra().unwrap(), None, &e.atoms().unwrap(), SEED);
        match (survivors.contains(&id), out) {
            (false, Ok(LambdaOutcome::Certified(c)))
                if c.kind == CertificateKind::LambdaIdenticallyZero =>
            {
                zero += 1
            }
            (true, Ok(LambdaOutcome::NoObstruction { .. })) => {}
            (_, other) => fails.push(format!("{id}: unexpected λ outcome {other:?}")),
        }
    }
    if fails.is_empty() {
        Ok(format!("8 printed formulas reproduced and witnessed, {zero} algebras with λ ≡ 0, 4 survivors with λ < 0"))
    } else {
        Err(fails.join("; "))
    }
}

fn criterion_4() -> Verdict {
    let cases: [Case; 7] = [
        (
            "g530_r",
            &[],
            "4/9*(4*alpha_13^2*alpha_16^2 + 2*alpha_16*alpha_26*alpha_12*alpha_13 - 10*alpha_12*alpha_16^2*alpha_23 \
             - 4*alpha_12^2*alpha_16*alpha_36 + alpha_12^2*alpha_26^2)",
        ),
        (
            "g535_r",
            &[],
            "4*(alpha_26^2 + alpha_36^2)*(alpha_12^2 + alpha_13^2) + 16*alpha_23*alpha_16*(alpha_12*alpha_36 - alpha_13*alpha_26)",
        ),
        ("g34_g34", &[], "16*alpha_14*alpha_15*alpha_24*alpha_25"),
        (
            "g533_r",
            &[],
            "4*(alpha_26*alpha_36*alpha_12*alpha_13 - alpha_23*alpha_36*alpha_12*alpha_16 + alpha_13*alpha_16*alpha_23*alpha_26)",
        ),
        ("g654", &[("l", Rational::from_int(-1))], "16*alpha_12^2*alpha_24*alpha_13"),
        ("g670", &[("p", Rational::from_int(0))], "4*alpha_12^2*((alpha_13 - alpha_24)^2 + (alpha_14 + alpha_23)^2)"),
        (
            "g6114",
            &[],
            "(a*(alpha_13*alpha_24 + alpha_14*alpha_23) - 2*alpha_13*alpha_23 - 2*alpha_14*alpha_24)^2 \
             + 4*(-alpha_13*alpha_24 + alpha_14*alpha_23)^2",
        ),
    ];
    let mut fails = Vec::new();
    for (id, vals, s) in cases {
        let e = entry(id);
        let got = lambda_of(&e, vals);
        let want = expr(&e, s);
        if got != want {
            fails.push(format!("{id}: residual {}", &got - &want));
        }
    }
    if fails.is_empty() {
        Ok("7 survivor formulas match term for term".into())
    } else {
        Err(fails.join("; "))
    }
}

fn same_up_to_sign(a: &Polynomial, b: &Polynomial) -> bool {
    a == b || a == &-b
}

fn criterion_5() -> Verdict {
    let cases: [(&str, &[(&str, Rational)]); 6] = [
        ("g530_r", &[]),
        ("g34_g34", &[]),
        ("g533_r", &[]),
        ("g535_r", &[]),
        ("g6101_am1", &[("b", q(3, 5))]),
        ("g6101", &[("a", q(2, 7)), ("b", q(-5, 3))]),
    ];
    let mut notes = Vec::new();
    for (id, vals) in cases {
        let e = entry(id);
        let l = e.algebra().unwrap();
        let printed = e
            .derivation_family()
            .unwrap()
            .ok_or(format!("{id}: no printed family"))?;
        verify_derivation(&l, &printed)
            .map_err(|err| format!("{id}: printed family is not a derivation: {err}"))?;
        let values = family_values(vals);
        let ln = l.partial_eval(&values);
        let solved = solve_derivations(&ln).map_err(|err| format!("{id}: {err}"))?;
        let nil = e
            .nilradical_subspace()
            .ok_or(format!("{id}: no nilradical"))?;
        let su = strongly_unimodular_constraints(&extend(&ln, &solved).unwrap(), &nil).unwrap();
        let restricted = su.solved_substitution().map(|s| solved.substitute(&s));
        let printed_n = printed.partial_eval(&values);
        let empty = HashMap::new();
        if printed_n.same_span_at(&solved, &empty) {
            notes.push(format!("{id}: Der ({} params)", printed.params.len()));
        } else if restricted
            .as_ref()
            .is_some_and(|r| printed_n.same_span_at(r, &empty))
        {
            notes.push(format!(
                "{id}: SU-restricted Der ({} params)",
                printed.params.len()
            ));
        } else {
            return Err(format!(
                "{id}: printed family does not match the solved derivations"
            ));
        }
    }

    let su_of = |id: &str, vals: &[(&str, Rational)]| {
        let e = entry(id);
        let sub = family_sub(vals);
        let l = e.algebra().unwrap().substitute(&sub);
        let d = e.derivation_family().unwrap().unwrap().substitute(&sub);
        strongly_unimodular_constraints(&extend(&l, &d).unwrap(), &e.nilradical_subspace().unwrap())
            .unwrap()
    };
    let contains = |set: &[Polynomial], e: &AlgebraEntry, s: &str| {
        set.iter().any(|c| same_up_to_sign(c, &expr(e, s)))
    };

    let g530 = entry("g530_r");
    let su = su_of("g530_r", &[]);
    if su.derivation.len() != 3
        || !["a_1", "a_5", "a_8"]
            .iter()
            .all(|s| contains(&su.derivation, &g530, s))
    {
        return Err(format!("g530_r: constraints {:?}", su.derivation));
    }
    let g670 = entry("g670");
    let su = su_of("g670", &[]);
    let all670: Vec<Polynomial> = su.derivation.iter().chain(&su.inner).cloned().collect();
    if !["a_1", "a_8", "p"]
        .iter()
        .all(|s| contains(&all670, &g670, s))
    {
        return Err(format!("g670: constraints {all670:?}"));
    }
    let g654 = entry("g654");
    let su = su_of("g654", &[]);
    if !contains(&su.inner, &g654, "l + 1") {
        return Err(format!("g654: constraints {:?}", su.inner));
    }
    notes.push("SU: {a1=a5=a8=0}, {a1=a8=0, p=0}, {l+1=0}".into());
    Ok(notes.join(", "))
}

fn criterion_6() -> Verdict {
    let c = entry_candidate(&entry("g530_r")).map_err(|e| e.to_string())?;
    for i in 1..=3 {
        certify_null_direction("g530_r", &c, i, "").map_err(|e| format!("g530_r: {e}"))?;
    }
    let c = entry_candidate(&entry("g654")).map_err(|e| e.to_string())?;
    for i in 1..=4 {
        certify_null_direction("g654", &c, i, "").map_err(|e| format!("g654: {e}"))?;
    }
    let e = entry("g535_r");
    let c = entry_candidate(&e).map_err(|e| e.to_string())?;
    let printed = expr(
        &e,
        "16*alpha_16^2*(alpha_26^2 + alpha_36^2)*(alpha_12^2 + alpha_13^2)*(a_1 + 2*a_3)^2",
    );
    let shipped = e
        .plan
        .iter()
        .find_map(|s| match s {
            PlanStep::SignProduct { witness, .. } => Some(e.witness(witness).unwrap()),
            _ => None,
        })
        .ok_or("g535_r: no sign-product step")?;
    if shipped.expand().unwrap() != printed {
        return Err("g535_r: shipped witness differs from the printed expression".into());
    }
    certify_sign_product("g535_r", &c, 1, 6, &shipped).map_err(|e| format!("g535_r: {e}"))?;
    let with_lambda = &(c.h.at(1, 1) * c.h.at(6, 6)) + &(&c.lambda * &printed);
    let note = if with_lambda.is_zero() {
        ""
    } else {
        " (the variant h11·h66 + λ·W is not an identity)"
    };
    Ok(format!(
        "h_ii ≡ 0 on g5,30⊕R (i=1..3) and g6,54 (i=1..4); h11·h66 + W ≡ 0 on g5,35⊕R{note}"
    ))
}

fn gauge_of(id: &str) -> Result<GaugeData, String> {
    let config = PipelineConfig {
        samples: 0,
        ..Default::default()
    };
    let rep = run_pipeline(&entry(id), &config).map_err(|e| format!("{id}: {e}"))?;
    rep.certificates
        .into_iter()
        .find_map(|c| match c.kind {
            CertificateKind::GaugeNull(g) if c.verified => Some(*g),
            _ => None,
        })
        .ok_or(format!("{id}: no verified gauge certificate"))
}

fn criterion_7() -> Verdict {
    let e = entry("g34_g34");
    let g = gauge_of("g34_g34")?;
    let printed = [
        ("235", "alpha_25"),
        ("256", "-alpha_25"),
        ("234", "alpha_24"),
        ("246", "alpha_24"),
        ("135", "-alpha_15"),
        ("156", "-alpha_15"),
        ("134", "-alpha_14"),
        ("146", "alpha_14"),
    ];
    let mut psi_bar = BTreeMap::new();
    for (idx, c) in &g.transformed_psi {
        psi_bar.insert(
            idx.iter().map(|i| i.to_string()).collect::<String>(),
            c.clone(),
        );
    }
    let want: BTreeMap<String, Polynomial> = printed
        .iter()
        .map(|(k, v)| (k.to_string(), expr(&e, v)))
        .collect();
    if psi_bar != want || g.scale_exponent != 0 {
        return Err(format!("g34_g34: F̄*ψ = {psi_bar:?}"));
    }
    let det = expr(&e, "(alpha_14*alpha_25 - alpha_15*alpha_24)^2");
    let lam = lambda_of(&e, &[]);
    let stability = &expr(&e, "(alpha_14*alpha_25 + alpha_15*alpha_24)^2") - &lam.scale(&q(1, 4));
    if g.determinant != det || stability != det {
        return Err(format!("g34_g34: determinant {}", g.determinant));
    }
    if g.null_pair != [3, 6]
        || g.k_column
            .iter()
            .enumerate()
            .any(|(r, c)| r != 2 && r != 5 && !c.is_zero())
    {
        return Err("g34_g34: K e3 leaves <e3, e6>".into());
    }

    let e = entry("g6101_am1");
    let g = gauge_of("g6101_am1")?;
    let col5 = expr(&e, "-2*((b + 1)*alpha_13*alpha_24 + alpha_12*alpha_34)");
    let col6 = expr(&e, "2*(alpha_12*alpha_34 - alpha_13*alpha_24)");
    let scale = g.determinant.pow(g.scale_exponent);
    let others_zero = g
        .k_column
        .iter()
        .enumerate()
        .all(|(r, c)| r == 4 || r == 5 || c.is_zero());
    // K is fixed only up to the orientation of the volume form.
    let matches = |sign: i64| {
        let c = scale.scale(&Rational::from_int(sign));
        g.k_column[4] == &col5 * &c && g.k_column[5] == &col6 * &c
    };
    if g.null_pair != [5, 6] || !others_zero || !(matches(1) || matches(-1)) {
        return Err(format!(
            "g6101 (a=-1): K e5 = ({}, {})",
            g.k_column[4], g.k_column[5]
        ));
    }

    let e = entry("g6101");
    let g = gauge_of("g6101")?;
    let t2_num = expr(
        &e,
        "a^2*b^2*alpha_13^2*alpha_24^2 - 2*a^2*b^2*alpha_13*alpha_14*alpha_23*alpha_24 + a^2*b^2*alpha_14^2*alpha_23^2 \
         - 2*a^2*b*alpha_12*alpha_13*alpha_24*alpha_34 - 2*a^2*b*alpha_12*alpha_14*alpha_23*alpha_34 \
         + 2*a^2*b*alpha_13^2*alpha_24^2 - 2*a^2*b*alpha_13*alpha_14*alpha_23*alpha_24 \
         + 2*a*b^2*alpha_12*alpha_13*alpha_24*alpha_34 + 2*a*b^2*alpha_12*alpha_14*alpha_23*alpha_34 \
         - 2*a*b^2*alpha_13*alpha_14*alpha_23*alpha_24 + 2*a*b^2*alpha_14^2*alpha_23^2 + a^2*alpha_12^2*alpha_34^2 \
         - 2*a^2*alpha_12*alpha_13*alpha_24*alpha_34 + a^2*alpha_13^2*alpha_24^2 - 2*a*b*alpha_12^2*alpha_34^2 \
         + 2*a*b*alpha_12*alpha_13*alpha_24*alpha_34 - 2*a*b*alpha_12*alpha_14*alpha_23*alpha_34 \
         - 2*a*b*alpha_13*alpha_14*alpha_23*alpha_24 + b^2*alpha_12^2*alpha_34^2 \
         + 2*b^2*alpha_12*alpha_14*alpha_23*alpha_34 + b^2*alpha_14^2*alpha_23^2",
    );
    // t2 = -t2_num / (a(1 + a)), so det is a nonzero multiple of t2 exactly
    // when det / t2_num is a nonzero constant.
    let ratio = g
        .determinant
        .div_exact(&t2_num)
        .ok_or("g6101: determinant is not a multiple of t2")?;
    let c = ratio
        .as_constant()
        .filter(|c| !c.is_zero())
        .ok_or(format!("g6101: det / t2 = {ratio}"))?;
    Ok(format!(
        "g3,4⊕g3,4 gauge reproduces F̄*ψ, det = (α14α25 − α15α24)² > 0 under λ < 0; g6,101 (a=−1) K e5 ∈ <e5,e6> as printed; \
         g6,101 (a≠−1) det = {}·a(1+a)·t2",
        -c
    ))
}

fn criterion_8() -> Verdict {
    let mut parts = Vec::new();
    let mut fails = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let masks: Vec<u16> = (0u16..64).filter(|m| m.count_ones() == 3).collect();
    for _ in 0..500 {
        let mut psi = KForm::zero(6, 3);
        for &m in &masks {
            psi.add_term(
                m,
                Polynomial::constant(Rational::new(rng.gen_range(-50..=50), rng.gen_range(1..=9))),
            );
        }
        if let Err(e) = k_psi(&psi) {
            fails.push(format!("K² ≠ λ·Id: {e}"));
            break;
        }
    }
    parts.push("K² = λ·Id on 500 random ψ".to_string());

    let (omega, psi) = standard_su3_pair();
    let direct = su3_check(&omega, &psi, PositivityMode::EitherSign).unwrap();
    let problem = SamplingProblem::new(omega.scale(&Polynomial::named("beta_1")), psi, Vec::new());
    let stats =
        sample_falsify(&problem, 100, SEED, Parallelism::Auto).map_err(|e| e.to_string())?;
    if direct != Su3Outcome::Passes || stats.passes != 100 {
        fails.push(format!(
            "negative control: {direct:?}, sampler {}/{}",
            stats.passes, stats.accepted
        ));
    } else {
        parts.push("negative control passes (100/100 sampled)".into());
    }

    let e = entry("g6101");
    let slice = e
        .plan
        .iter()
        .find_map(|s| match s {
            PlanStep::OutOfScope { slice, .. } if !slice.is_empty() => Some(slice.clone()),
            _ => None,
        })
        .ok_or("g6101: no t2 = 0 slice")?;
    let mut atoms = e.atoms().unwrap();
    atoms.extend(parse_atoms(&e, &slice).unwrap());
    let c = entry_candidate(&e).map_err(|e| e.to_string())?;
    let problem = SamplingProblem::new(c.omega, c.psi, atoms);
    match sample_falsify(&problem, 10_000, SEED, Parallelism::Auto) {
        Ok(s) if s.passes == 0 && s.accepted == 10_000 => parts.push(format!(
            "g6,101 t2 = 0 slice: 0 passes in 10^4 samples (seed {SEED})"
        )),
        Ok(s) => fails.push(format!(
            "g6,101 slice: {} passes in {} samples",
            s.passes, s.accepted
        )),
        Err(err) => fails.push(format!("g6,101 slice: {err}")),
    }

    for id in ["g6115", "g6118"] {
        if entry(id).is_stub() {
            fails.push(format!(
                "{id}: structure equations not shipped, sampling impossible"
            ));
        }
    }
    if fails.is_empty() {
        Ok(parts.join("; "))
    } else {
        Err(format!("{}; {}", parts.join("; "), fails.join("; ")))
    }
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("report.json");
    let md = dir.path().join("report.md");
    let status = Command::new(env!("CARGO_BIN_EXE_g2cert"))
        .args(["run-all", "all", "--out"])
        .arg(&out)
        .arg("--md")
        .arg(&md)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("run-all exited with {}", status.status));
    }
    let report =
        Report::from_json(&std::fs::read_to_string(&out).unwrap()).map_err(|e| e.to_string())?;
    let out_of_scope_stubs = ["g6115", "g6118"];
    let bad: Vec<String> = report
        .entries
        .iter()
        .filter(|e| match e.outcome {
            Outcome::Obstructed | Outcome::PartiallyOutOfScope | Outcome::OutOfScope => false,
            Outcome::DataNotShipped => !out_of_scope_stubs.contains(&e.id.as_str()),
            Outcome::NotObstructed | Outcome::Failed => true,
        })
        .map(|e| format!("{} ({})", e.id, e.outcome.label()))
        .collect();
    let obstructed = report
        .entries
        .iter()
        .filter(|e| e.outcome == Outcome::Obstructed)
        .count();
    let summary = format!(
        "run-all exit 0, {} entries, {obstructed} obstructed",
        report.entries.len()
    );
    if bad.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; not accounted for: {}", bad.join(", ")))
    }
}

#[test]
fn acceptance() {
    let criteria: [Check; 9] = [
        ("Jacobi identity on every shipped entry", criterion_1),
        ("non-solvable zero diagonal", criterion_2),
        ("λ table reproduction", criterion_3),
        ("survivor λ formulas", criterion_4),
        ("derivations and strong unimodularity", criterion_5),
        ("obstruction identities", criterion_6),
        ("gauge certificates", criterion_7),
        ("property suite", criterion_8),
        ("end to end run-all", criterion_9),
    ];
    let mut failed = Vec::new();
    for (k, (title, f)) in criteria.iter().enumerate() {
        let n = k + 1;
        match f() {
            Ok(detail) => println!("criterion {n}: PASS  {title}: {detail}"),
            Err(detail) => {
                println!("criterion {n}: FAIL  {title}: {detail}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
