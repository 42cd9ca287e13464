//! Brute-force oracles and random generators shared by the integration
//! tests. Nothing here calls into the library's classification, counting or
//! search code; relations are read only through membership queries.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use bdcsp::{
    BitTuple, BooleanRelation, Constraint, ConstraintLanguage, CspInstance, Hypergraph, Term,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn member(rel: &BooleanRelation, bits: &[bool]) -> bool {
    let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    rel.contains(BitTuple::new(bits.len(), index))
}

pub fn bits_of(arity: usize, index: usize) -> Vec<bool> {
    (0..arity)
        .map(|c| (index >> (arity - 1 - c)) & 1 == 1)
        .collect()
}

pub fn tuples(rel: &BooleanRelation) -> Vec<Vec<bool>> {
    let r = rel.arity();
    (0..1usize << r)
        .map(|i| bits_of(r, i))
        .filter(|b| member(rel, b))
        .collect()
}

pub fn all_relations(arity: usize) -> impl Iterator<Item = BooleanRelation> {
    assert!(arity <= 4);
    (0u64..1 << (1 << arity)).map(move |m| BooleanRelation::from_mask(arity, m))
}

/// Relation from a predicate on bit vectors, indexed as the library does.
pub fn relation(arity: usize, pred: impl Fn(&[bool]) -> bool) -> BooleanRelation {
    let tuples: Vec<BitTuple> = (0..1usize << arity)
        .filter(|&i| pred(&bits_of(arity, i)))
        .map(|i| BitTuple::new(arity, i))
        .collect();
    BooleanRelation::from_tuples(arity, tuples).unwrap()
}

/// Columns that take one value across all tuples.
pub fn constant_columns(rel: &BooleanRelation) -> Vec<usize> {
    let ts = tuples(rel);
    if ts.is_empty() {
        return Vec::new();
    }
    (0..rel.arity())
        .filter(|&c| ts.iter().all(|t| t[c] == ts[0][c]))
        .collect()
}

/// Upward closure on non-constant columns (downward when `up` is false).
pub fn pseudo_monotone(rel: &BooleanRelation, up: bool) -> bool {
    let constant = constant_columns(rel);
    let ts = tuples(rel);
    let r = rel.arity();
    ts.iter().all(|t| {
        (0..r).filter(|c| !constant.contains(c)).all(|c| {
            if t[c] == up {
                return true;
            }
            let mut u = t.clone();
            u[c] = up;
            member(rel, &u)
        })
    })
}

/// Size of the GF(2) affine hull equals the relation size.
pub fn affine_by_hull(rel: &BooleanRelation) -> bool {
    let ts = tuples(rel);
    if ts.is_empty() {
        return true;
    }
    let to_int = |t: &Vec<bool>| t.iter().fold(0u32, |a, &b| (a << 1) | b as u32);
    let base = to_int(&ts[0]);
    let mut span: Vec<u32> = vec![0];
    for t in &ts {
        let v = to_int(t) ^ base;
        if !span.contains(&v) {
            let extra: Vec<u32> = span.iter().map(|s| s ^ v).collect();
            span.extend(extra);
        }
    }
    span.len() == ts.len()
}

/// Every relation on `r` variables expressible as pins plus implications,
/// as the set of member indices. A variable may be pinned both ways, which
/// gives the empty relation; with no variables only the empty conjunction,
/// true, is available.
pub fn im_conj_family(r: usize) -> std::collections::HashSet<Vec<usize>> {
    let pairs: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| (0..r).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut out = std::collections::HashSet::new();
    for p in 0..4usize.pow(r as u32) {
        // 0 free, 1 pinned to 0, 2 pinned to 1, 3 pinned both ways
        let pins: Vec<usize> = (0..r).map(|i| (p / 4usize.pow(i as u32)) % 4).collect();
        for set in 0u32..1 << pairs.len() {
            let members: Vec<usize> = (0..1usize << r)
                .filter(|&idx| {
                    let b = bits_of(r, idx);
                    pins.iter().enumerate().all(|(i, &pv)| match pv {
                        0 => true,
                        1 => !b[i],
                        2 => b[i],
                        _ => false,
                    }) && pairs
                        .iter()
                        .enumerate()
                        .all(|(k, &(i, j))| (set >> k) & 1 == 0 || !b[i] || b[j])
                })
                .collect();
            out.insert(members);
        }
    }
    out
}

pub fn member_indices(rel: &BooleanRelation) -> Vec<usize> {
    (0..1usize << rel.arity())
        .filter(|&i| member(rel, &bits_of(rel.arity(), i)))
        .collect()
}

/// A normalized OR formula given as pins and clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleFormula {
    pub pins: BTreeMap<usize, bool>,
    pub clauses: Vec<Vec<usize>>,
}

impl OracleFormula {
    pub fn holds(&self, b: &[bool]) -> bool {
        self.pins.iter().all(|(&c, &v)| b[c] == v)
            && self.clauses.iter().all(|cl| cl.iter().any(|&c| b[c]))
    }

    pub fn width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_occurrences(&self, r: usize) -> usize {
        (0..r)
            .map(|c| {
                self.pins.contains_key(&c) as usize
                    + self.clauses.iter().filter(|cl| cl.contains(&c)).count()
            })
            .max()
            .unwrap_or(0)
    }
}

/// Every normalized OR formula on `r` variables, keyed by the member indices
/// of the relation it defines. Panics if two formulas define the same
/// relation.
pub fn normalized_or_formulas(r: usize) -> HashMap<Vec<usize>, OracleFormula> {
    let mut out = HashMap::new();
    for p in 0..3usize.pow(r as u32) {
        let pins: BTreeMap<usize, bool> = (0..r)
            .filter_map(|i| match (p / 3usize.pow(i as u32)) % 3 {
                0 => None,
                v => Some((i, v == 2)),
            })
            .collect();
        let free: Vec<usize> = (0..r).filter(|c| !pins.contains_key(c)).collect();
        let subsets: Vec<Vec<usize>> = (0u32..1 << free.len())
            .filter(|m| m.count_ones() >= 2)
            .map(|m| {
                free.iter()
                    .enumerate()
                    .filter(|(k, _)| (m >> k) & 1 == 1)
                    .map(|(_, &c)| c)
                    .collect()
            })
            .collect();
        for family in 0u64..1 << subsets.len() {
            let clauses: Vec<Vec<usize>> = (0..subsets.len())
                .filter(|k| (family >> k) & 1 == 1)
                .map(|k| subsets[k].clone())
                .collect();
            let antichain = clauses.iter().enumerate().all(|(i, a)| {
                clauses
                    .iter()
                    .enumerate()
                    .all(|(j, b)| i == j || !a.iter().all(|c| b.contains(c)))
            });
            if !antichain {
                continue;
            }
            let mut sorted = clauses.clone();
            sorted.sort();
            let f = OracleFormula {
                pins: pins.clone(),
                clauses: sorted,
            };
            let members: Vec<usize> = (0..1usize << r)
                .filter(|&i| f.holds(&bits_of(r, i)))
                .collect();
            if let Some(old) = out.insert(members, f.clone()) {
                panic!("two normalized formulas define one relation: {old:?} and {f:?}");
            }
        }
    }
    out
}

pub fn term_value(t: &Term, values: &[bool]) -> bool {
    match *t {
        Term::Var(v) => values[v],
        Term::Const(c) => c,
    }
}

pub fn lookup<'a>(lang: &'a ConstraintLanguage, name: &str) -> &'a BooleanRelation {
    lang.get(name)
        .unwrap_or_else(|| panic!("unknown relation {name}"))
}

fn pin_relation(name: &str) -> Option<bool> {
    match name {
        "R_zero" => Some(false),
        "R_one" => Some(true),
        _ => None,
    }
}

pub fn satisfies(inst: &CspInstance, lang: &ConstraintLanguage, values: &[bool]) -> bool {
    inst.constraints().iter().all(|c| {
        let bits: Vec<bool> = c.scope.iter().map(|t| term_value(t, values)).collect();
        match (lang.get(&c.relation), pin_relation(&c.relation)) {
            (Some(rel), _) => member(rel, &bits),
            (None, Some(v)) => bits == [v],
            (None, None) => panic!("unknown relation {}", c.relation),
        }
    })
}

/// Monolithic enumeration of all assignments.
pub fn brute_count(inst: &CspInstance, lang: &ConstraintLanguage) -> u64 {
    let n = inst.variable_count();
    assert!(n <= 24, "brute force over {n} variables");
    (0u64..1 << n)
        .filter(|&a| {
            let values: Vec<bool> = (0..n).map(|i| (a >> i) & 1 == 1).collect();
            satisfies(inst, lang, &values)
        })
        .count() as u64
}

pub fn brute_independent_sets(h: &Hypergraph) -> u64 {
    let n = h.vertex_count();
    assert!(n <= 24);
    (0u64..1 << n)
        .filter(|&s| {
            h.edges()
                .iter()
                .all(|e| !e.iter().all(|&v| (s >> v) & 1 == 1))
        })
        .count() as u64
}

/// Solutions grouped as (all terminals 0, all terminals 1, mixed).
pub fn terminal_patterns(
    inst: &CspInstance,
    lang: &ConstraintLanguage,
    terminals: &[usize],
) -> (u64, u64, u64) {
    let n = inst.variable_count();
    assert!(n <= 24);
    let (mut zeros, mut ones, mut mixed) = (0, 0, 0);
    for a in 0u64..1 << n {
        let values: Vec<bool> = (0..n).map(|i| (a >> i) & 1 == 1).collect();
        if !satisfies(inst, lang, &values) {
            continue;
        }
        let ts: Vec<bool> = terminals.iter().map(|&t| values[t]).collect();
        if ts.iter().all(|&b| !b) {
            zeros += 1;
        } else if ts.iter().all(|&b| b) {
            ones += 1;
        } else {
            mixed += 1;
        }
    }
    (zeros, ones, mixed)
}

pub fn degrees(inst: &CspInstance) -> Vec<usize> {
    let mut deg = vec![0; inst.variable_count()];
    for c in inst.constraints() {
        for t in &c.scope {
            if let Term::Var(v) = t {
                deg[*v] += 1;
            }
        }
    }
    deg
}

/// Independent check of an equality simulation: balanced, no mixed
/// solutions, terminals of degree at most `d - 1`, everything at most `d`.
pub fn simulation_ok(
    inst: &CspInstance,
    lang: &ConstraintLanguage,
    terminals: &[usize],
    d: usize,
) -> Option<u64> {
    let deg = degrees(inst);
    if terminals.iter().any(|&t| deg[t] + 1 > d) || deg.iter().any(|&x| x > d) {
        return None;
    }
    let (zeros, ones, mixed) = terminal_patterns(inst, lang, terminals);
    (zeros == ones && zeros >= 1 && mixed == 0).then_some(zeros)
}

pub fn random_instance(
    rng: &mut ChaCha8Rng,
    lang: &ConstraintLanguage,
    vars: usize,
    constraints: usize,
    constant_rate: f64,
) -> CspInstance {
    let names: Vec<(&str, usize)> = lang.iter().map(|(n, r)| (n, r.arity())).collect();
    let mut inst = CspInstance::new(vars);
    for _ in 0..constraints {
        let (name, arity) = names[rng.gen_range(0..names.len())];
        let scope = (0..arity)
            .map(|_| {
                if rng.gen_bool(constant_rate) {
                    Term::Const(rng.gen_bool(0.5))
                } else {
                    Term::Var(rng.gen_range(0..vars))
                }
            })
            .collect();
        inst.push(Constraint::new(name, scope)).unwrap();
    }
    inst
}

pub fn random_hypergraph(
    rng: &mut ChaCha8Rng,
    vertices: usize,
    edges: usize,
    max_width: usize,
) -> Hypergraph {
    let mut es = Vec::new();
    for _ in 0..edges {
        let size = rng.gen_range(1..=max_width.min(vertices));
        let mut e: Vec<usize> = Vec::new();
        while e.len() < size {
            let v = rng.gen_range(0..vertices);
            if !e.contains(&v) {
                e.push(v);
            }
        }
        es.push(e);
    }
    Hypergraph::new(vertices, es).unwrap()
}

pub fn random_relation(rng: &mut ChaCha8Rng, arity: usize) -> BooleanRelation {
    let tuples: Vec<BitTuple> = (0..1usize << arity)
        .filter(|_| rng.gen_bool(0.5))
        .map(|i| BitTuple::new(arity, i))
        .collect();
    BooleanRelation::from_tuples(arity, tuples).unwrap()
}
