//! Acceptance run: one PASS/FAIL line per criterion, checked against
//! brute-force oracles in `common`. Exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use bdcsp::classify::{
    find_ppp, is_affine, is_im_conj, normalized_formula, trichotomy, Flavor, TrichotomyTag,
};
use bdcsp::counting::{count_csp, count_csp_with_budget};
use bdcsp::gadgets::{synthesize_equality, GadgetCertificate};
use bdcsp::language::{PIN_ONE, PIN_ZERO};
use bdcsp::ppp::PppDerivation;
use bdcsp::reductions::{csp_to_his, expand_degree, his_to_csp};
use bdcsp::report::{classify_language, his_status, Verdict, HIS_TABLE};
use bdcsp::{standard, BooleanRelation, Constraint, ConstraintLanguage, CspInstance, Term};

use common::*;

const SEED: u64 = 0x5eed_2024;
const CRITERION_1_LIMIT: Duration = Duration::from_secs(300);
const CRITERION_2_LIMIT: Duration = Duration::from_secs(60);
const PER_GADGET_LIMIT: Duration = Duration::from_secs(1);
const CRITERION_9_LIMIT: Duration = Duration::from_secs(120);
const RANDOM_CASES: usize = 200;
const COUNTING_CASES: usize = 100;
/// Output instances of the degree expansion are counted by the library with
/// this component budget; anything at most `BRUTE_LIMIT` is also brute forced.
const EXPAND_BUDGET: usize = 64;
const BRUTE_LIMIT: usize = 22;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lang(rels: &[(&str, BooleanRelation)]) -> ConstraintLanguage {
    ConstraintLanguage::from_relations(rels.iter().cloned()).unwrap()
}

fn to_u64(x: &BigUint) -> u64 {
    x.try_into().expect("count fits in u64")
}

/// Applies a derivation without the library: filter by pins, read kept
/// columns.
fn apply_oracle(d: &PppDerivation, rel: &BooleanRelation) -> BTreeSet<Vec<bool>> {
    tuples(rel)
        .into_iter()
        .filter(|t| d.pins_to_zero.iter().all(|&c| !t[c]) && d.pins_to_one.iter().all(|&c| t[c]))
        .map(|t| d.kept_columns.iter().map(|&c| t[c]).collect())
        .collect()
}

fn check_certificate(cert: &GadgetCertificate, k: usize, d: usize) -> Result<(), String> {
    let m = simulation_ok(&cert.instance, &cert.language, &cert.terminals, d)
        .ok_or_else(|| format!("oracle rejects gadget {:?}", cert.transcript))?;
    ensure(cert.verified && to_u64(&cert.m) == m, || {
        format!("recorded m {} but oracle counts {m}", cert.m)
    })?;
    ensure(cert.terminals.len() == k, || {
        "wrong number of terminals".into()
    })?;
    let deg = degrees(&cert.instance);
    ensure(cert.terminals.iter().all(|&t| deg[t] < d), || {
        "terminal degree too high".into()
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut certified = 0usize;
    for arity in 0..=4usize {
        let rels: Vec<BooleanRelation> = all_relations(arity).collect();
        let results: Vec<Result<usize, String>> = rels
            .par_iter()
            .map(|rel| {
                let out = trichotomy(rel).map_err(|e| format!("{rel}: {e}"))?;
                let or = pseudo_monotone(rel, true);
                let nand = pseudo_monotone(rel, false);
                match &out.tag {
                    TrichotomyTag::OrConj(_) => ensure(or, || format!("{rel} tagged OR-conj"))?,
                    TrichotomyTag::NandConj(_) => {
                        ensure(!or && nand, || format!("{rel} tagged NAND-conj"))?
                    }
                    TrichotomyTag::SimulatesEquality(cert) => {
                        ensure(!or && !nand, || format!("{rel} tagged simulates-equality"))?;
                        check_certificate(cert, 2, 3).map_err(|e| format!("{rel}: {e}"))?;
                    }
                }
                let mut n = 0;
                if arity <= 3 && matches!(out.tag, TrichotomyTag::SimulatesEquality(_)) {
                    let l = lang(&[("R", rel.clone())]);
                    for k in [2, 3] {
                        let cert = synthesize_equality(&l, k, 3)
                            .map_err(|e| format!("{rel} k={k}: {e}"))?;
                        check_certificate(&cert, k, 3).map_err(|e| format!("{rel} k={k}: {e}"))?;
                        n += 1;
                    }
                }
                Ok(n)
            })
            .collect();
        for r in results {
            certified += r?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= CRITERION_1_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "one tag for all relations of arity <= 4, {certified} extra certificates at arity <= 3, {elapsed:.1?}"
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for arity in 0..=4usize {
        for rel in all_relations(arity) {
            let or = normalized_formula(&rel, Flavor::OrConj).is_some();
            let nand = normalized_formula(&rel, Flavor::NandConj).is_some();
            ensure(or == pseudo_monotone(&rel, true), || {
                format!("OR-conj mismatch on {rel}")
            })?;
            ensure(nand == pseudo_monotone(&rel, false), || {
                format!("NAND-conj mismatch on {rel}")
            })?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= CRITERION_2_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} relations, {elapsed:.1?}"))
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    for arity in 0..=4usize {
        let table = normalized_or_formulas(arity);
        for rel in all_relations(arity) {
            for flavor in [Flavor::OrConj, Flavor::NandConj] {
                let Some(f) = normalized_formula(&rel, flavor) else {
                    continue;
                };
                ensure(f.is_normalized(), || {
                    format!("{rel}: {f} is not normalized")
                })?;
                let back = f.to_relation().map_err(|e| e.to_string())?;
                ensure(back == rel, || format!("{rel}: {f} defines {back}"))?;
                ensure(
                    normalized_formula(&back, flavor).as_ref() == Some(&f),
                    || format!("{rel}: formula changes on the round trip"),
                )?;
                // compare against the enumerated formula; NAND goes through
                // the complement
                let key = match flavor {
                    Flavor::OrConj => member_indices(&rel),
                    Flavor::NandConj => member_indices(&rel.complement()),
                };
                match table.get(&key) {
                    None => ensure(rel.is_empty() && f.unsatisfiable, || {
                        format!("{rel}: no enumerated formula")
                    })?,
                    Some(o) => {
                        let pins: Vec<(usize, bool)> = f
                            .pins
                            .iter()
                            .map(|(&c, &v)| (c, if flavor == Flavor::NandConj { !v } else { v }))
                            .collect();
                        let mut clauses = f.clauses.clone();
                        clauses.sort();
                        ensure(
                            pins == o.pins.clone().into_iter().collect::<Vec<_>>()
                                && clauses == o.clauses,
                            || format!("{rel}: {f} differs from the enumerated {o:?}"),
                        )?;
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} formula round trips"))
}

fn criterion_4() -> Outcome {
    let imp = standard::r_imp();
    let imp_set: BTreeSet<Vec<bool>> = tuples(&imp).into_iter().collect();
    let (mut im_cases, mut or_cases) = (0, 0);
    for arity in 0..=4usize {
        let im = im_conj_family(arity);
        let ors = normalized_or_formulas(arity);
        for rel in all_relations(arity) {
            let idx = member_indices(&rel);
            if im.contains(&idx) && !affine_by_hull(&rel) {
                let d = find_ppp(&imp, &rel)
                    .map_err(|e| e.to_string())?
                    .ok_or_else(|| format!("no R_imp from {rel}"))?;
                ensure(apply_oracle(&d, &rel) == imp_set, || {
                    format!("bad R_imp derivation from {rel}")
                })?;
                im_cases += 1;
            }
            if let Some(o) = ors.get(&idx) {
                for j in 2..=o.width() {
                    let target = standard::or_k(j).unwrap();
                    let want: BTreeSet<Vec<bool>> = tuples(&target).into_iter().collect();
                    let d = find_ppp(&target, &rel)
                        .map_err(|e| e.to_string())?
                        .ok_or_else(|| format!("no OR_{j} from {rel}"))?;
                    ensure(apply_oracle(&d, &rel) == want, || {
                        format!("bad OR_{j} derivation from {rel}")
                    })?;
                    or_cases += 1;
                }
            }
        }
    }
    Ok(format!(
        "{im_cases} R_imp witnesses, {or_cases} OR_j witnesses"
    ))
}

fn criterion_5() -> Outcome {
    let mut checked = 0;
    for arity in 0..=4usize {
        let im = im_conj_family(arity);
        for rel in all_relations(arity) {
            ensure(is_affine(&rel) == affine_by_hull(&rel), || {
                format!("affine mismatch on {rel}")
            })?;
            let expected = im.contains(&member_indices(&rel));
            ensure(is_im_conj(&rel).is_some() == expected, || {
                format!("IM-conj mismatch on {rel}")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} relations"))
}

fn criterion_6() -> Outcome {
    let mut certs: Vec<(GadgetCertificate, usize)> = Vec::new();
    for arity in 0..=3usize {
        for rel in all_relations(arity) {
            if pseudo_monotone(&rel, true) || pseudo_monotone(&rel, false) {
                continue;
            }
            let l = lang(&[("R", rel)]);
            for k in [2, 3, 4] {
                certs.push((synthesize_equality(&l, k, 3).map_err(|e| e.to_string())?, k));
            }
        }
    }
    for (l, k, d) in [
        (lang(&[("imp", standard::r_imp())]), 4, 3),
        (lang(&[("eq", standard::r_eq())]), 3, 3),
        (lang(&[("neq", standard::r_neq())]), 3, 5),
        (
            lang(&[("or", standard::r_or()), ("nand", standard::r_nand())]),
            2,
            3,
        ),
        (
            lang(&[("or", standard::r_or()), ("nand", standard::r_nand())]),
            4,
            25,
        ),
    ] {
        certs.push((synthesize_equality(&l, k, d).map_err(|e| e.to_string())?, k));
    }
    let mut slowest = Duration::ZERO;
    for (cert, k) in &certs {
        let start = Instant::now();
        let m = cert.reverify().map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        ensure(elapsed <= PER_GADGET_LIMIT, || {
            format!("reverification took {elapsed:?}")
        })?;
        ensure(m == cert.m, || "reverified m differs".into())?;
        check_certificate(cert, *k, cert.d)?;
    }
    Ok(format!(
        "{} certificates, slowest reverification {slowest:.1?}",
        certs.len()
    ))
}

fn conj_pool(flavor: Flavor) -> Vec<BooleanRelation> {
    let up = flavor == Flavor::OrConj;
    (2..=4)
        .flat_map(all_relations)
        .filter(|r| pseudo_monotone(r, up) && !r.is_empty() && constant_columns(r).is_empty())
        .collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // degree expansion
    let eq_free = relation(3, |b| b[0] == b[1]);
    let expand_langs = [
        lang(&[("imp", standard::r_imp())]),
        lang(&[("eq", standard::r_eq())]),
        lang(&[("neq", standard::r_neq())]),
        lang(&[("or", standard::r_or()), ("nand", standard::r_nand())]),
        lang(&[("R", eq_free), ("nand", standard::r_nand())]),
        lang(&[
            ("R", relation(3, |b| b[0] || !b[1] || b[2])),
            ("imp", standard::r_imp()),
        ]),
    ];
    let mut expanded = 0;
    for case in 0..RANDOM_CASES {
        let l = &expand_langs[case % expand_langs.len()];
        let vars = rng.gen_range(2..=12);
        let constraints = rng.gen_range(1..=7);
        let mut inst = random_instance(&mut rng, l, vars, constraints, 0.1);
        if case % 2 == 0 {
            // funnel positions into x1 so it needs splitting
            let hubbed: Vec<Constraint> = inst
                .constraints()
                .iter()
                .map(|c| {
                    let scope = c
                        .scope
                        .iter()
                        .map(|&t| if rng.gen_bool(0.4) { Term::Var(0) } else { t })
                        .collect();
                    Constraint::new(c.relation.clone(), scope)
                })
                .collect();
            inst = CspInstance::with_constraints(vars, hubbed).unwrap();
        }
        let d = rng.gen_range(3..=4);
        let receipt = expand_degree(&inst, l, d).map_err(|e| format!("case {case}: {e}"))?;
        let (out, out_lang) = receipt.csp().unwrap();
        ensure(out.degree() <= d, || {
            format!("case {case}: degree {} above {d}", out.degree())
        })?;
        let z_in = brute_count(&inst, l);
        let z_out = count_csp_with_budget(out, out_lang, EXPAND_BUDGET)
            .map_err(|e| format!("case {case}: {e}"))?
            .value;
        if out.variable_count() <= BRUTE_LIMIT {
            ensure(to_u64(&z_out) == brute_count(out, out_lang), || {
                format!("case {case}: library count")
            })?;
        }
        ensure(z_out == &receipt.multiplier * z_in, || {
            format!(
                "case {case}: Z(out) = {z_out}, M = {}, Z(in) = {z_in}",
                receipt.multiplier
            )
        })?;
        if inst.degree() > d {
            expanded += 1;
        }
    }

    // csp -> his
    let pools = [conj_pool(Flavor::OrConj), conj_pool(Flavor::NandConj)];
    let mut annihilated = 0;
    for case in 0..RANDOM_CASES {
        let pool = &pools[case % 2];
        let count = rng.gen_range(1..=3);
        let rels: Vec<(String, BooleanRelation)> = (0..count)
            .map(|i| (format!("C{i}"), pool[rng.gen_range(0..pool.len())].clone()))
            .collect();
        let l = ConstraintLanguage::from_relations(rels.clone()).unwrap();
        let vars = rng.gen_range(1..=12);
        let constraints = rng.gen_range(1..=8);
        let mut inst = random_instance(&mut rng, &l, vars, constraints, 0.05);
        if rng.gen_bool(0.3) {
            let v = rng.gen_range(0..vars);
            inst.add(if rng.gen_bool(0.5) { PIN_ONE } else { PIN_ZERO }, &[v])
                .unwrap();
        }
        let receipt = csp_to_his(&inst, &l).map_err(|e| format!("case {case}: {e}"))?;
        let z = brute_count(&inst, &l);
        if receipt.annihilated {
            ensure(z == 0, || format!("case {case}: annihilated but Z = {z}"))?;
            annihilated += 1;
            continue;
        }
        let h = receipt.hypergraph().unwrap();
        ensure(brute_independent_sets(h) == z, || {
            format!("case {case}: #IS differs from Z = {z}")
        })?;
        // bounds from the enumerated formulas of the flavor in use
        let all_nand = rels.iter().all(|(_, r)| pseudo_monotone(r, false));
        let (k, w) = rels
            .iter()
            .filter(|(n, _)| inst.constraints().iter().any(|c| &c.relation == n))
            .map(|(_, r)| {
                let key = if all_nand {
                    member_indices(&r.complement())
                } else {
                    member_indices(r)
                };
                let o = normalized_or_formulas(r.arity())
                    .remove(&key)
                    .expect("conj relation");
                (o.max_occurrences(r.arity()), o.width())
            })
            .fold((0, 0), |(k, w), (a, b)| (k.max(a), w.max(b)));
        ensure(h.degree() <= k * inst.degree(), || {
            format!("case {case}: degree bound")
        })?;
        ensure(h.width() <= w, || format!("case {case}: width bound"))?;
    }

    // his -> csp
    for case in 0..RANDOM_CASES {
        let vertices = rng.gen_range(1..=10);
        let edges = rng.gen_range(0..=8);
        let h = random_hypergraph(&mut rng, vertices, edges, 4);
        // width-4 clause on x1..x4 plus short clauses through x5
        let mut clauses = vec![vec![0, 1, 2, 3]];
        for j in 0..4 {
            if rng.gen_bool(0.4) {
                clauses.push(vec![j, 4]);
            }
        }
        let or = case % 2 == 0;
        let rel = relation(5, |b| {
            clauses.iter().all(|cl| cl.iter().any(|&c| b[c] == or))
        });
        let receipt = his_to_csp(&h, "R", &rel).map_err(|e| format!("case {case}: {e}"))?;
        let (out, out_lang) = receipt.csp().unwrap();
        let deg = degrees(out);
        ensure(deg[..vertices].iter().all(|&x| x <= h.degree()), || {
            format!("case {case}: vertex degree")
        })?;
        ensure(deg[vertices..].iter().all(|&x| x <= 1), || {
            format!("case {case}: auxiliary degree")
        })?;
        let z = count_csp(out, out_lang).map_err(|e| e.to_string())?.value;
        if out.variable_count() <= BRUTE_LIMIT {
            ensure(to_u64(&z) == brute_count(out, out_lang), || {
                format!("case {case}: library count")
            })?;
        }
        let is = BigUint::from(brute_independent_sets(&h));
        ensure(z == &receipt.multiplier * is, || {
            format!("case {case}: Z(out) != M * #IS")
        })?;
    }
    Ok(format!(
        "{RANDOM_CASES} cases per reduction ({expanded} needed expansion, {annihilated} annihilated)"
    ))
}

fn criterion_8() -> Outcome {
    let verdict = |rels: &[(&str, BooleanRelation)], d: usize| -> Result<Verdict, String> {
        classify_language(&lang(rels), d)
            .map(|r| r.verdict)
            .map_err(|e| e.to_string())
    };
    let eq = [("eq", standard::r_eq())];
    let imp = [("imp", standard::r_imp())];
    let or = [("or", standard::r_or())];
    let both = [("or", standard::r_or()), ("nand", standard::r_nand())];
    ensure(verdict(&eq, 3)? == Verdict::FpAffine, || "{R_=}".into())?;
    ensure(verdict(&imp, 3)? == Verdict::BisEquivalent, || {
        "{R_imp}".into()
    })?;
    for d in [3, 25] {
        ensure(
            verdict(&or, d)?
                == Verdict::HisSandwich {
                    w: 2,
                    k: 1,
                    lower_degree: d,
                    upper_degree: d,
                },
            || format!("{{R_OR}} at d = {d}"),
        )?;
    }
    ensure(
        verdict(&both, 3)? == Verdict::SatEquivalent { no_fpras: false },
        || "{R_OR, R_NAND} at 3".into(),
    )?;
    let report = classify_language(&lang(&both), 25).map_err(|e| e.to_string())?;
    ensure(
        report.verdict == Verdict::SatEquivalent { no_fpras: true } && !report.witness_missing,
        || "{R_OR, R_NAND} at 25".into(),
    )?;
    for rels in [&eq[..], &imp[..], &or[..], &both[..], &[][..]] {
        ensure(verdict(rels, 1)? == Verdict::TrivialFp, || "d = 1".into())?;
        ensure(verdict(rels, 2)? == Verdict::OpenD2, || "d = 2".into())?;
    }
    let expected = [
        "1 / ≥ 2 / FP",
        "2 / 2 / FP",
        "2 / ≥ 3 / FPRAS",
        "3 / 2,3 / FPRAS",
        "3,4,5 / 2 / PTAS",
        "6,...,24 / ≥ 2 / The MCMC method is likely to fail",
        "≥ 25 / ≥ 2 / No FPRAS unless NP=RP",
    ];
    let rows: Vec<String> = HIS_TABLE.iter().map(|r| r.to_string()).collect();
    ensure(rows == expected, || format!("table rows {rows:?}"))?;
    for (w, d, status) in [
        (3, 2, "FPRAS"),
        (2, 4, "PTAS"),
        (2, 30, "No FPRAS unless NP=RP"),
    ] {
        ensure(his_status(w, d).status == status, || {
            format!("his_status({w}, {d})")
        })?;
    }
    Ok("verdicts and seven table rows".into())
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let l = lang(&[
        ("or", standard::r_or()),
        ("nand", standard::r_nand()),
        ("imp", standard::r_imp()),
        ("eq3", standard::eq_k(3).unwrap()),
        ("R", relation(3, |b| b[0] ^ b[1] ^ b[2] || (b[0] && b[1]))),
    ]);
    let cases: Vec<CspInstance> = (0..COUNTING_CASES)
        .map(|_| {
            let vars = rng.gen_range(1..=20);
            let constraints = rng.gen_range(0..=vars);
            random_instance(&mut rng, &l, vars, constraints, 0.1)
        })
        .collect();
    cases.par_iter().enumerate().try_for_each(|(i, inst)| {
        let z = to_u64(&count_csp(inst, &l).map_err(|e| e.to_string())?.value);
        ensure(z == brute_count(inst, &l), || {
            format!("case {i}: component count {z}")
        })?;
        let mut wider =
            CspInstance::with_constraints(inst.variable_count() + 1, inst.constraints().to_vec())
                .unwrap();
        ensure(
            to_u64(&count_csp(&wider, &l).unwrap().value) == 2 * z,
            || format!("case {i}: doubling"),
        )?;
        wider
            .push(Constraint::new(
                "or",
                vec![Term::Var(inst.variable_count()), Term::Const(true)],
            ))
            .unwrap();
        ensure(
            to_u64(&count_csp(&wider, &l).unwrap().value) == 2 * z,
            || format!("case {i}: satisfied constraint"),
        )
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed <= CRITERION_9_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{COUNTING_CASES} instances, {elapsed:.1?}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("trichotomy exhaustiveness", criterion_1),
        ("OR-conj iff pseudo-monotone", criterion_2),
        ("normalized formula round trip", criterion_3),
        ("R_imp and OR_j witnesses", criterion_4),
        ("affine and IM-conj decisions", criterion_5),
        ("simulation soundness", criterion_6),
        ("reduction count preservation", criterion_7),
        ("verdict table", criterion_8),
        ("counting self-checks", criterion_9),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        match run() {
            Ok(detail) => println!("PASS {label}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {label}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
