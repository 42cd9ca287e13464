//! Equality simulation gadgets.
//!
//! A gadget for `Eq_k` is a small instance with `k` terminal variables whose
//! solutions put the terminals all at 0 or all at 1, equally often, with
//! every terminal used at most `d - 1` times. Gadgets are built from
//! ppp-derivations of `R_=`, `R_≠`, `R_imp` (cycles and alternating chains)
//! or of `R_OR` and `R_NAND` (alternating OR/NAND chains), and every gadget
//! is checked by exhaustive counting before it is handed out.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::classify::{normalized_formula, Flavor};
use crate::counting::count_csp;
use crate::error::{Error, Result, SimulationFailure};
use crate::instance::{CspInstance, Term};
use crate::language::{ConstraintLanguage, PIN_ONE, PIN_ZERO};
use crate::ppp::{all_derivations, find_ppp, PppDerivation};
use crate::relation::{standard, BitTuple, BooleanRelation};

/// Largest instance [`verify_simulation`] will count exhaustively.
pub const VERIFY_LIMIT: usize = 25;

/// Relations above this arity are first reduced by pinning or projecting
/// columns before derivations are searched for.
const SEARCH_ARITY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mechanism {
    ChainViaEq,
    ChainViaNeq,
    ChainViaImp,
    OrNandChain,
    PinRecursion,
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::ChainViaEq => "chain-via-eq",
            Mechanism::ChainViaNeq => "chain-via-neq",
            Mechanism::ChainViaImp => "chain-via-imp",
            Mechanism::OrNandChain => "or-nand-chain",
            Mechanism::PinRecursion => "pin-recursion",
        })
    }
}

/// A verified simulation of `Eq_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GadgetCertificate {
    pub instance: CspInstance,
    /// The relations the instance refers to.
    pub language: ConstraintLanguage,
    pub terminals: Vec<usize>,
    pub k: usize,
    pub d: usize,
    pub m: BigUint,
    pub verified: bool,
    pub mechanism: Mechanism,
    /// How the gadget was found: derivations used and the extension counts
    /// that predict `m`.
    pub transcript: Vec<String>,
}

impl GadgetCertificate {
    /// Reruns verification from scratch and checks the recorded `m`.
    pub fn reverify(&self) -> Result<BigUint> {
        let m = verify_simulation(&self.instance, &self.language, &self.terminals, self.d)?;
        if m != self.m {
            return Err(Error::SynthesisFailed(format!(
                "recorded multiplicity {} but verification counts {m}",
                self.m
            )));
        }
        Ok(m)
    }

    /// Largest degree of any terminal inside the gadget.
    pub fn terminal_degree(&self) -> usize {
        let deg = self.instance.degrees();
        self.terminals.iter().map(|&t| deg[t]).max().unwrap_or(0)
    }

    /// Total number of variables, terminals included.
    pub fn variable_count(&self) -> usize {
        self.instance.variable_count()
    }
}

fn pin_all(instance: &CspInstance, vars: &[usize], value: bool) -> Result<CspInstance> {
    let mut pinned = instance.clone();
    for &v in vars {
        pinned.add(if value { PIN_ONE } else { PIN_ZERO }, &[v])?;
    }
    Ok(pinned)
}

/// Checks that `instance` `d`-simulates `Eq_k` on `terminals` and returns the
/// multiplicity `m`.
pub fn verify_simulation(
    instance: &CspInstance,
    language: &ConstraintLanguage,
    terminals: &[usize],
    d: usize,
) -> Result<BigUint> {
    let n = instance.variable_count();
    if n > VERIFY_LIMIT {
        return Err(SimulationFailure::TooLarge(n).into());
    }
    if terminals.is_empty() {
        return Err(SimulationFailure::BadTerminals("no terminals".into()).into());
    }
    for (i, &t) in terminals.iter().enumerate() {
        if t >= n {
            return Err(
                SimulationFailure::BadTerminals(format!("x{} does not exist", t + 1)).into(),
            );
        }
        if terminals[..i].contains(&t) {
            return Err(SimulationFailure::BadTerminals(format!("x{} listed twice", t + 1)).into());
        }
    }
    instance.validate(language)?;
    let degrees = instance.degrees();
    for &t in terminals {
        if degrees[t] + 1 > d {
            return Err(SimulationFailure::TerminalDegree {
                variable: t + 1,
                degree: degrees[t],
                limit: d.saturating_sub(1),
            }
            .into());
        }
    }
    if let Some(v) = (0..n).find(|&v| degrees[v] > d) {
        return Err(SimulationFailure::AuxiliaryDegree {
            variable: v + 1,
            degree: degrees[v],
            limit: d,
        }
        .into());
    }

    let total = count_csp(instance, language)?.value;
    let zeros = count_csp(&pin_all(instance, terminals, false)?, language)?.value;
    let ones = count_csp(&pin_all(instance, terminals, true)?, language)?.value;
    if total != &zeros + &ones {
        return Err(SimulationFailure::MixedPattern {
            pattern: mixed_witness(instance, language, terminals)?,
        }
        .into());
    }
    if zeros.is_zero() && ones.is_zero() {
        return Err(SimulationFailure::NoSolutions.into());
    }
    if zeros != ones {
        return Err(SimulationFailure::Unbalanced {
            zeros: zeros.to_string(),
            ones: ones.to_string(),
        }
        .into());
    }
    Ok(zeros)
}

/// Some mixed terminal pattern that has a solution, as a bitstring.
fn mixed_witness(
    instance: &CspInstance,
    language: &ConstraintLanguage,
    terminals: &[usize],
) -> Result<String> {
    let k = terminals.len();
    for p in 1..(1usize << k) - 1 {
        let pattern = BitTuple::new(k, p);
        let mut pinned = instance.clone();
        for (j, &t) in terminals.iter().enumerate() {
            pinned.add(if pattern.get(j) { PIN_ONE } else { PIN_ZERO }, &[t])?;
        }
        if !count_csp(&pinned, language)?.value.is_zero() {
            return Ok(pattern.to_string());
        }
    }
    Ok("?".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ChainTarget {
    Eq,
    Neq,
    Imp,
}

fn classify_target(rel: &BooleanRelation) -> Option<ChainTarget> {
    if *rel == standard::r_eq() {
        Some(ChainTarget::Eq)
    } else if *rel == standard::r_neq() {
        Some(ChainTarget::Neq)
    } else if *rel == standard::r_imp() || *rel == standard::r_imp_rev() {
        Some(ChainTarget::Imp)
    } else {
        None
    }
}

/// Pins projected columns until tuples extending `00` and `11` are equally
/// many. Each step pins the lowest projected column on which two extensions
/// of the more frequent prefix differ, to its value in the first extension
/// of the other prefix.
fn balance(
    rel: &BooleanRelation,
    mut deriv: PppDerivation,
    transcript: &mut Vec<String>,
) -> Result<PppDerivation> {
    loop {
        let counts = deriv.extension_counts(rel)?;
        let (alpha, gamma) = (counts[0b00], counts[0b11]);
        if alpha == gamma {
            return Ok(deriv);
        }
        let (big, small) = if alpha > gamma {
            (0b00, 0b11)
        } else {
            (0b11, 0b00)
        };
        let extensions = |prefix: usize| -> Vec<BitTuple> {
            let d = &deriv;
            rel.members()
                .filter(|&a| {
                    d.pins_to_zero.iter().all(|&c| !a.get(c))
                        && d.pins_to_one.iter().all(|&c| a.get(c))
                        && d.kept_columns
                            .iter()
                            .enumerate()
                            .all(|(j, &c)| a.get(c) == ((prefix >> (1 - j)) & 1 == 1))
                })
                .collect()
        };
        let many = extensions(big);
        let reference = extensions(small)[0];
        let column = deriv
            .projected
            .iter()
            .copied()
            .filter(|&c| many.iter().any(|a| a.get(c) != many[0].get(c)))
            .min()
            .ok_or_else(|| {
                Error::SynthesisFailed("unbalanced derivation has no free column".into())
            })?;
        transcript.push(format!(
            "alpha={alpha} gamma={gamma}: pin column {} to {}",
            column + 1,
            reference.get(column) as u8
        ));
        deriv = deriv.with_pin(column, reference.get(column))?;
    }
}

/// Builds the cycle (for `R_=`/`R_imp`) or alternating chain (for `R_≠`)
/// realizing `Eq_k` through `deriv`, and verifies it.
pub fn simulate_eq_via_chain(
    name: &str,
    rel: &BooleanRelation,
    deriv: &PppDerivation,
    k: usize,
) -> Result<GadgetCertificate> {
    if k < 2 {
        return Err(Error::InvalidK(k));
    }
    let derived = deriv.apply(rel)?;
    let target = classify_target(&derived).ok_or_else(|| {
        Error::UnusableDerivation(format!(
            "derivation yields {derived}, not R_=, R_≠ or R_imp"
        ))
    })?;
    let mut transcript = vec![format!(
        "derive {derived} from {name}: {}",
        deriv.describe()
    )];
    let mut deriv = deriv.clone();
    if derived == standard::r_imp_rev() {
        deriv.kept_columns.reverse();
    }

    let mut instance = CspInstance::new(k);
    let terminals: Vec<usize> = (0..k).collect();
    let expected: BigUint;
    let mechanism;
    match target {
        ChainTarget::Eq | ChainTarget::Imp => {
            deriv = balance(rel, deriv, &mut transcript)?;
            let alpha = deriv.extension_counts(rel)?[0b00];
            transcript.push(format!("cycle of {k} constraints, alpha={alpha}"));
            for i in 0..k {
                let args = [Term::Var(i), Term::Var((i + 1) % k)];
                let mut next = instance.variable_count();
                let c = deriv.instantiate(name, &args, || {
                    next += 1;
                    next - 1
                });
                while instance.variable_count() < next {
                    instance.fresh_variable();
                }
                instance.push(c)?;
            }
            expected = BigUint::from(alpha).pow(k as u32);
            mechanism = if target == ChainTarget::Eq {
                Mechanism::ChainViaEq
            } else {
                Mechanism::ChainViaImp
            };
        }
        ChainTarget::Neq => {
            let counts = deriv.extension_counts(rel)?;
            let (alpha, beta) = (counts[0b01], counts[0b10]);
            transcript.push(format!(
                "alternating chain of {} constraints, alpha={alpha} beta={beta}",
                2 * k
            ));
            for _ in 0..k {
                instance.fresh_variable();
            }
            for i in 0..k {
                let (x, y, x_next) = (Term::Var(i), Term::Var(k + i), Term::Var((i + 1) % k));
                for args in [[x, y], [y, x_next]] {
                    let mut next = instance.variable_count();
                    let c = deriv.instantiate(name, &args, || {
                        next += 1;
                        next - 1
                    });
                    while instance.variable_count() < next {
                        instance.fresh_variable();
                    }
                    instance.push(c)?;
                }
            }
            expected = BigUint::from(alpha).pow(k as u32) * BigUint::from(beta).pow(k as u32);
            mechanism = Mechanism::ChainViaNeq;
        }
    }
    let language = ConstraintLanguage::from_relations([(name, rel.clone())])?;
    finish(
        instance, language, terminals, k, 3, mechanism, transcript, expected,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    instance: CspInstance,
    language: ConstraintLanguage,
    terminals: Vec<usize>,
    k: usize,
    d: usize,
    mechanism: Mechanism,
    transcript: Vec<String>,
    expected: BigUint,
) -> Result<GadgetCertificate> {
    let m = verify_simulation(&instance, &language, &terminals, d)?;
    if m != expected {
        return Err(Error::SynthesisFailed(format!(
            "construction predicts multiplicity {expected} but verification counts {m}"
        )));
    }
    Ok(GadgetCertificate {
        instance,
        language,
        terminals,
        k,
        d,
        m,
        verified: true,
        mechanism,
        transcript,
    })
}

/// `OR(x_1,y_1) ∧ NAND(y_1,x_2) ∧ ... ∧ OR(x_k,y_k) ∧ NAND(y_k,x_1)` with
/// the two derivations chosen so both all-equal patterns have the same
/// weight.
fn or_nand_chain(
    or_name: &str,
    or_rel: &BooleanRelation,
    or_derivs: &[PppDerivation],
    nand_name: &str,
    nand_rel: &BooleanRelation,
    nand_derivs: &[PppDerivation],
    k: usize,
) -> Result<Option<GadgetCertificate>> {
    let or_counts = or_derivs
        .iter()
        .map(|d| d.extension_counts(or_rel))
        .collect::<Result<Vec<_>>>()?;
    let nand_counts = nand_derivs
        .iter()
        .map(|d| d.extension_counts(nand_rel))
        .collect::<Result<Vec<_>>>()?;
    for (od, oc) in or_derivs.iter().zip(&or_counts) {
        for (nd, nc) in nand_derivs.iter().zip(&nand_counts) {
            // x all 0 forces y all 1: OR(0,1), NAND(1,0); x all 1 forces y
            // all 0: OR(1,0), NAND(0,1)
            let low = oc[0b01] * nc[0b10];
            let high = oc[0b10] * nc[0b01];
            if low != high {
                continue;
            }
            let transcript = vec![
                format!("derive R_OR from {or_name}: {}", od.describe()),
                format!("derive R_NAND from {nand_name}: {}", nd.describe()),
                format!(
                    "alternating chain of {} constraints, weight {low} per link",
                    2 * k
                ),
            ];
            let mut instance = CspInstance::new(2 * k);
            for i in 0..k {
                let (x, y, x_next) = (Term::Var(i), Term::Var(k + i), Term::Var((i + 1) % k));
                for (name, d, args) in [(or_name, od, [x, y]), (nand_name, nd, [y, x_next])] {
                    let mut next = instance.variable_count();
                    let c = d.instantiate(name, &args, || {
                        next += 1;
                        next - 1
                    });
                    while instance.variable_count() < next {
                        instance.fresh_variable();
                    }
                    instance.push(c)?;
                }
            }
            let mut language = ConstraintLanguage::from_relations([(or_name, or_rel.clone())])?;
            if nand_name != or_name {
                language.push(nand_name, nand_rel.clone())?;
            }
            let expected = BigUint::from(low).pow(k as u32);
            return finish(
                instance,
                language,
                (0..k).collect(),
                k,
                3,
                Mechanism::OrNandChain,
                transcript,
                expected,
            )
            .map(Some);
        }
    }
    Ok(None)
}

/// Chain gadget from `R_OR ≤ppp or_rel` and `R_NAND ≤ppp nand_rel`.
pub fn simulate_eq_via_or_nand(
    or_name: &str,
    or_rel: &BooleanRelation,
    nand_name: &str,
    nand_rel: &BooleanRelation,
    k: usize,
) -> Result<GadgetCertificate> {
    if k < 2 {
        return Err(Error::InvalidK(k));
    }
    let or_derivs = candidate_derivations(&standard::r_or(), or_rel)?.0;
    if or_derivs.is_empty() {
        return Err(Error::SynthesisFailed(format!(
            "no R_OR derivation from {or_name}"
        )));
    }
    let nand_derivs = candidate_derivations(&standard::r_nand(), nand_rel)?.0;
    if nand_derivs.is_empty() {
        return Err(Error::SynthesisFailed(format!(
            "no R_NAND derivation from {nand_name}"
        )));
    }
    or_nand_chain(
        or_name,
        or_rel,
        &or_derivs,
        nand_name,
        nand_rel,
        &nand_derivs,
        k,
    )?
    .ok_or_else(|| {
        Error::SynthesisFailed("no pair of OR/NAND derivations with equal weights".into())
    })
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Pin(usize, bool),
    Project(usize),
}

/// Shrinks a relation above [`SEARCH_ARITY`] one column at a time, taking
/// the first of pin-to-0, pin-to-1, project (lowest column first) whose
/// result is still neither OR-conj nor NAND-conj.
fn reduce_for_search(rel: &BooleanRelation) -> Result<Option<(BooleanRelation, Vec<Step>)>> {
    let mut current = rel.clone();
    let mut steps = Vec::new();
    let is_conj = |r: &BooleanRelation| {
        normalized_formula(r, Flavor::OrConj).is_some()
            || normalized_formula(r, Flavor::NandConj).is_some()
    };
    while current.arity() > SEARCH_ARITY {
        let mut next = None;
        'columns: for c in 0..current.arity() {
            for step in [Step::Pin(c, false), Step::Pin(c, true), Step::Project(c)] {
                let candidate = match step {
                    Step::Pin(c, v) => current.pin_and_project(c, v)?,
                    Step::Project(c) => current.project_out(c)?,
                };
                if !is_conj(&candidate) {
                    next = Some((candidate, step));
                    break 'columns;
                }
            }
        }
        let Some((candidate, step)) = next else {
            return Ok(None);
        };
        current = candidate;
        steps.push(step);
    }
    Ok(Some((current, steps)))
}

fn lift_through(mut d: PppDerivation, steps: &[Step]) -> PppDerivation {
    for step in steps.iter().rev() {
        d = match *step {
            Step::Pin(c, v) => d.lift(c, v),
            Step::Project(c) => {
                let mut lifted = d.lift(c, false);
                lifted.pins_to_zero.retain(|&x| x != c);
                lifted.projected.push(c);
                lifted.projected.sort_unstable();
                lifted
            }
        };
    }
    d
}

/// All derivations of `target` from `rel`, plus whether the relation had to
/// be reduced first. OR-conj/NAND-conj relations above the search arity use
/// the clause derivation read off their normalized formula.
fn candidate_derivations(
    target: &BooleanRelation,
    rel: &BooleanRelation,
) -> Result<(Vec<PppDerivation>, bool)> {
    if rel.arity() <= SEARCH_ARITY {
        return Ok((all_derivations(target, rel)?, false));
    }
    for flavor in [Flavor::OrConj, Flavor::NandConj] {
        if let Some(f) = normalized_formula(rel, flavor) {
            let wanted = match flavor {
                Flavor::OrConj => standard::r_or(),
                Flavor::NandConj => standard::r_nand(),
            };
            let found = if *target == wanted {
                f.derive_clause_relation(2).into_iter().collect()
            } else {
                Vec::new()
            };
            return Ok((found, false));
        }
    }
    match reduce_for_search(rel)? {
        Some((small, steps)) => Ok((
            all_derivations(target, &small)?
                .into_iter()
                .map(|d| lift_through(d, &steps))
                .collect(),
            true,
        )),
        None => Ok((Vec::new(), false)),
    }
}

fn first_derivation(
    target: &BooleanRelation,
    rel: &BooleanRelation,
) -> Result<Option<(PppDerivation, bool)>> {
    if rel.arity() <= SEARCH_ARITY {
        return Ok(find_ppp(target, rel)?.map(|d| (d, false)));
    }
    let (all, reduced) = candidate_derivations(target, rel)?;
    Ok(all.into_iter().next().map(|d| (d, reduced)))
}

/// Finds and verifies an `Eq_k` gadget over `language`, trying in order:
/// a derivation of `R_=`, `R_≠` or `R_imp` from some relation (cycle or
/// alternating chain); derivations of `R_OR` and `R_NAND` from some pair of
/// relations (OR/NAND chain). Relations too wide to search directly are
/// first shrunk by pinning or projecting columns while they stay outside
/// OR-conj and NAND-conj.
pub fn synthesize_equality(
    language: &ConstraintLanguage,
    k: usize,
    d: usize,
) -> Result<GadgetCertificate> {
    if d < 3 {
        return Err(Error::DegreeTooSmall(d));
    }
    if k < 2 {
        return Err(Error::InvalidK(k));
    }
    let targets = [standard::r_eq(), standard::r_neq(), standard::r_imp()];
    for (name, rel) in language.iter() {
        for target in &targets {
            if let Some((deriv, reduced)) = first_derivation(target, rel)? {
                let mut cert = simulate_eq_via_chain(name, rel, &deriv, k)?;
                if reduced {
                    cert.mechanism = Mechanism::PinRecursion;
                }
                return relabel(cert, d);
            }
        }
    }

    let mut ors = Vec::new();
    let mut nands = Vec::new();
    for (name, rel) in language.iter() {
        let (o, o_red) = candidate_derivations(&standard::r_or(), rel)?;
        let (n, n_red) = candidate_derivations(&standard::r_nand(), rel)?;
        ors.push((name, rel, o, o_red));
        nands.push((name, rel, n, n_red));
    }
    for (or_name, or_rel, or_derivs, o_red) in &ors {
        if or_derivs.is_empty() {
            continue;
        }
        for (nand_name, nand_rel, nand_derivs, n_red) in &nands {
            if nand_derivs.is_empty() {
                continue;
            }
            if let Some(mut cert) = or_nand_chain(
                or_name,
                or_rel,
                or_derivs,
                nand_name,
                nand_rel,
                nand_derivs,
                k,
            )? {
                if *o_red || *n_red {
                    cert.mechanism = Mechanism::PinRecursion;
                }
                return relabel(cert, d);
            }
        }
    }
    Err(Error::SynthesisFailed(format!(
        "no relation among [{}] yields R_=, R_≠, R_imp or an OR/NAND pair",
        language.names().collect::<Vec<_>>().join(", ")
    )))
}

/// Restamps a degree-3 gadget with a larger bound `d` after re-verifying.
fn relabel(mut cert: GadgetCertificate, d: usize) -> Result<GadgetCertificate> {
    if d != cert.d {
        cert.d = d;
        cert.m = verify_simulation(&cert.instance, &cert.language, &cert.terminals, d)?;
    }
    Ok(cert)
}

/// Copies needed for a variable of the given degree when each copy can take
/// `capacity` outside occurrences. Degree at most `d` needs no copies.
pub fn copies_needed(degree: usize, d: usize, capacity: usize) -> usize {
    if degree <= d {
        1
    } else {
        degree.div_ceil(capacity.max(1))
    }
}

/// Largest number of copies any variable needs when every copy keeps `d - 1`
/// of the original occurrences and one slot for its gadget attachment.
pub fn max_eq_arity_needed(instance: &CspInstance, d: usize) -> usize {
    instance
        .degrees()
        .into_iter()
        .map(|deg| copies_needed(deg, d, d.saturating_sub(1)))
        .max()
        .unwrap_or(1)
}

/// Multiplicity to expect from [`simulate_eq_via_chain`]'s cycle when the
/// derivation is balanced with `alpha` extensions per prefix.
pub fn cycle_multiplicity(alpha: u64, k: usize) -> BigUint {
    BigUint::from(alpha).pow(k as u32)
}
