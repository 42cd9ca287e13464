//! CSP instances, assignments and hypergraphs.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::language::ConstraintLanguage;
use crate::relation::BitTuple;

/// One scope position: a variable or a literal constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Term {
    Var(usize),
    Const(bool),
}

impl Term {
    pub fn var(self) -> Option<usize> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "x{}", v + 1),
            Term::Const(c) => write!(f, "{}", *c as u8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Constraint {
    pub relation: String,
    pub scope: Vec<Term>,
}

impl Constraint {
    pub fn new(relation: impl Into<String>, scope: Vec<Term>) -> Self {
        Constraint {
            relation: relation.into(),
            scope,
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.scope.iter().filter_map(|t| t.var())
    }
}

/// A CSP instance over variables `0..variable_count`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CspInstance {
    variable_count: usize,
    constraints: Vec<Constraint>,
}

impl CspInstance {
    pub fn new(variable_count: usize) -> Self {
        CspInstance {
            variable_count,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraints(variable_count: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let mut inst = CspInstance::new(variable_count);
        for c in constraints {
            inst.push(c)?;
        }
        Ok(inst)
    }

    pub fn push(&mut self, constraint: Constraint) -> Result<()> {
        if let Some(index) = constraint.variables().find(|&v| v >= self.variable_count) {
            return Err(Error::VariableOutOfRange {
                index,
                count: self.variable_count,
            });
        }
        self.constraints.push(constraint);
        Ok(())
    }

    /// Shorthand for scopes made only of variables.
    pub fn add(&mut self, relation: &str, vars: &[usize]) -> Result<()> {
        self.push(Constraint::new(
            relation,
            vars.iter().map(|&v| Term::Var(v)).collect(),
        ))
    }

    /// Appends a fresh variable and returns its index.
    pub fn fresh_variable(&mut self) -> usize {
        self.variable_count += 1;
        self.variable_count - 1
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Checks every constraint against the arity of its relation.
    pub fn validate(&self, language: &ConstraintLanguage) -> Result<()> {
        for c in &self.constraints {
            let rel = language.resolve(&c.relation)?;
            if rel.arity() != c.scope.len() {
                return Err(Error::ScopeArity {
                    name: c.relation.clone(),
                    expected: rel.arity(),
                    found: c.scope.len(),
                });
            }
        }
        Ok(())
    }

    /// Occurrences per variable, counting repeats within a scope. Constants
    /// contribute nothing.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.variable_count];
        for c in &self.constraints {
            for v in c.variables() {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Renames variables by `map[old] = new`; `new_count` is the size of the
    /// target variable set.
    pub fn rename(&self, map: &[usize], new_count: usize) -> Result<CspInstance> {
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                Constraint::new(
                    c.relation.clone(),
                    c.scope
                        .iter()
                        .map(|t| match *t {
                            Term::Var(v) => Term::Var(map[v]),
                            k => k,
                        })
                        .collect(),
                )
            })
            .collect();
        CspInstance::with_constraints(new_count, constraints)
    }
}

/// A total assignment, indexed by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Assignment {
    pub values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    /// Assignment whose variable `i` is bit `i` of `bits`.
    pub fn from_bits(variable_count: usize, bits: u64) -> Self {
        Assignment {
            values: (0..variable_count).map(|i| (bits >> i) & 1 == 1).collect(),
        }
    }

    pub fn value(&self, term: Term) -> bool {
        match term {
            Term::Var(v) => self.values[v],
            Term::Const(c) => c,
        }
    }

    pub fn satisfies(&self, instance: &CspInstance, language: &ConstraintLanguage) -> Result<bool> {
        if self.values.len() != instance.variable_count() {
            return Err(Error::ArityMismatch {
                expected: instance.variable_count(),
                found: self.values.len(),
            });
        }
        let mut resolver = language.resolver();
        for c in instance.constraints() {
            let rel = resolver.get(&c.relation)?;
            let bits: Vec<bool> = c.scope.iter().map(|&t| self.value(t)).collect();
            if !rel.contains(BitTuple::from_bits(&bits)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A hypergraph on vertices `0..vertex_count`. Hyperedges are stored as
/// sorted vertex lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Hypergraph {
    vertex_count: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(vertex_count: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut h = Hypergraph {
            vertex_count,
            edges: Vec::with_capacity(edges.len()),
        };
        for e in edges {
            h.push_edge(e)?;
        }
        Ok(h)
    }

    pub fn push_edge(&mut self, mut edge: Vec<usize>) -> Result<()> {
        if edge.is_empty() {
            return Err(Error::EmptyHyperedge);
        }
        if let Some(&index) = edge.iter().find(|&&v| v >= self.vertex_count) {
            return Err(Error::VariableOutOfRange {
                index,
                count: self.vertex_count,
            });
        }
        edge.sort_unstable();
        edge.dedup();
        self.edges.push(edge);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn width(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Whether `set` (bit `v` = vertex `v`) contains no hyperedge.
    pub fn is_independent(&self, set: u64) -> bool {
        self.edges
            .iter()
            .all(|e| !e.iter().all(|&v| (set >> v) & 1 == 1))
    }
}
