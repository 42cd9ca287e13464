//! Exact counting: `Z(I)` for CSP instances and independent sets of
//! hypergraphs.
//!
//! Both counters split the variable-constraint incidence graph into
//! connected components, enumerate each component by backtracking (highest
//! degree first, each constraint checked as soon as its last variable is
//! set) and multiply the component counts. Variables in no constraint
//! contribute a factor of two each.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{CspInstance, Hypergraph, Term};
use crate::language::ConstraintLanguage;
use crate::relation::BooleanRelation;

/// Default limit on the size of one connected component.
pub const DEFAULT_BUDGET: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountResult {
    pub value: BigUint,
    /// Partial assignments visited during enumeration.
    pub assignments_examined: u64,
}

#[derive(Clone, Copy)]
enum Check<'a> {
    Table(&'a BooleanRelation, &'a [Term]),
    /// Violated when every listed vertex is 1.
    Edge(&'a [usize]),
}

impl Check<'_> {
    fn variables(&self) -> Vec<usize> {
        match self {
            Check::Table(_, scope) => scope.iter().filter_map(|t| t.var()).collect(),
            Check::Edge(vs) => vs.to_vec(),
        }
    }

    fn holds(&self, values: &[bool]) -> bool {
        match self {
            Check::Table(rel, scope) => {
                let index = scope.iter().fold(0usize, |acc, t| {
                    let bit = match *t {
                        Term::Var(v) => values[v],
                        Term::Const(c) => c,
                    };
                    (acc << 1) | bit as usize
                });
                rel.contains_index(index)
            }
            Check::Edge(vs) => !vs.iter().all(|&v| values[v]),
        }
    }
}

/// Counts satisfying assignments of `instance` under `language`.
pub fn count_csp(instance: &CspInstance, language: &ConstraintLanguage) -> Result<CountResult> {
    count_csp_with_budget(instance, language, DEFAULT_BUDGET)
}

pub fn count_csp_with_budget(
    instance: &CspInstance,
    language: &ConstraintLanguage,
    budget: usize,
) -> Result<CountResult> {
    instance.validate(language)?;
    let relations = instance
        .constraints()
        .iter()
        .map(|c| language.resolve(&c.relation))
        .collect::<Result<Vec<_>>>()?;
    let checks: Vec<Check<'_>> = instance
        .constraints()
        .iter()
        .zip(&relations)
        .map(|(c, r)| Check::Table(r, &c.scope))
        .collect();
    count_checks(instance.variable_count(), &checks, budget)
}

/// Counts vertex subsets of `h` that contain no hyperedge.
pub fn count_his(h: &Hypergraph) -> Result<CountResult> {
    count_his_with_budget(h, DEFAULT_BUDGET)
}

pub fn count_his_with_budget(h: &Hypergraph, budget: usize) -> Result<CountResult> {
    let checks: Vec<Check<'_>> = h.edges().iter().map(|e| Check::Edge(e)).collect();
    count_checks(h.vertex_count(), &checks, budget)
}

struct Component {
    variables: Vec<usize>,
    checks: Vec<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn components(variable_count: usize, checks: &[Check<'_>]) -> (Vec<Component>, usize) {
    let mut parent: Vec<usize> = (0..variable_count).collect();
    let mut touched = vec![false; variable_count];
    let vars: Vec<Vec<usize>> = checks.iter().map(Check::variables).collect();
    for vs in &vars {
        for &v in vs {
            touched[v] = true;
        }
        for w in vs.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut slot = vec![usize::MAX; variable_count];
    let mut comps: Vec<Component> = Vec::new();
    for v in (0..variable_count).filter(|&v| touched[v]) {
        let root = find(&mut parent, v);
        if slot[root] == usize::MAX {
            slot[root] = comps.len();
            comps.push(Component {
                variables: Vec::new(),
                checks: Vec::new(),
            });
        }
        comps[slot[root]].variables.push(v);
    }
    for (i, vs) in vars.iter().enumerate() {
        if let Some(&v) = vs.first() {
            let root = find(&mut parent, v);
            comps[slot[root]].checks.push(i);
        }
    }
    let free = touched.iter().filter(|&&t| !t).count();
    (comps, free)
}

fn count_checks(variable_count: usize, checks: &[Check<'_>], budget: usize) -> Result<CountResult> {
    // Constraints over constants only are decided up front.
    let values = vec![false; variable_count];
    if checks
        .iter()
        .any(|c| c.variables().is_empty() && !c.holds(&values))
    {
        return Ok(CountResult {
            value: BigUint::default(),
            assignments_examined: 0,
        });
    }
    let (comps, free) = components(variable_count, checks);
    if let Some(big) = comps.iter().map(|c| c.variables.len()).max() {
        if big > budget {
            return Err(Error::CountBudget { found: big, budget });
        }
    }
    let counts: Vec<(u64, u64)> = comps
        .par_iter()
        .map(|comp| count_component(variable_count, checks, comp))
        .collect();
    let mut value = BigUint::one() << free;
    let mut examined = 0;
    for (count, seen) in counts {
        value *= count;
        examined += seen;
    }
    Ok(CountResult {
        value,
        assignments_examined: examined,
    })
}

fn count_component(variable_count: usize, checks: &[Check<'_>], comp: &Component) -> (u64, u64) {
    let mut degree = vec![0usize; variable_count];
    for &ci in &comp.checks {
        for v in checks[ci].variables() {
            degree[v] += 1;
        }
    }
    let mut order = comp.variables.clone();
    order.sort_by_key(|&v| (std::cmp::Reverse(degree[v]), v));
    let mut position = vec![0usize; variable_count];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    // ready[p]: checks whose last variable in the order sits at position p
    let mut ready: Vec<Vec<Check<'_>>> = vec![Vec::new(); order.len()];
    for &ci in &comp.checks {
        let last = checks[ci]
            .variables()
            .into_iter()
            .map(|v| position[v])
            .max()
            .expect("component checks mention a variable");
        ready[last].push(checks[ci]);
    }

    let n = order.len();
    if n == 0 {
        return (1, 0);
    }
    let mut values = vec![false; variable_count];
    let mut count = 0u64;
    let mut examined = 0u64;
    // next[p]: the next value to try at depth p (0, 1, or 2 = exhausted)
    let mut next = vec![0u8; n + 1];
    let mut depth = 0usize;
    loop {
        if depth == n {
            count += 1;
            depth -= 1;
            continue;
        }
        if next[depth] == 2 {
            next[depth] = 0;
            if depth == 0 {
                break;
            }
            depth -= 1;
            continue;
        }
        let value = next[depth] == 1;
        next[depth] += 1;
        values[order[depth]] = value;
        examined += 1;
        if ready[depth].iter().all(|c| c.holds(&values)) {
            depth += 1;
        }
    }
    (count, examined)
}

/// Degree accounting for an instance or hypergraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub degree: usize,
    /// Largest hyperedge; `None` for CSP instances.
    pub width: Option<usize>,
    pub per_variable: Vec<usize>,
}

pub trait HasDegreeProfile {
    fn degree_profile(&self) -> DegreeProfile;
}

impl HasDegreeProfile for CspInstance {
    fn degree_profile(&self) -> DegreeProfile {
        let per_variable = self.degrees();
        DegreeProfile {
            degree: per_variable.iter().copied().max().unwrap_or(0),
            width: None,
            per_variable,
        }
    }
}

impl HasDegreeProfile for Hypergraph {
    fn degree_profile(&self) -> DegreeProfile {
        let per_variable = self.degrees();
        DegreeProfile {
            degree: per_variable.iter().copied().max().unwrap_or(0),
            width: Some(self.width()),
            per_variable,
        }
    }
}

pub fn degree_profile<T: HasDegreeProfile>(x: &T) -> DegreeProfile {
    x.degree_profile()
}
