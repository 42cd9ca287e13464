use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::{standard, BooleanRelation};

/// Names under which the two pin relations are always available.
pub const PIN_ZERO: &str = "R_zero";
pub const PIN_ONE: &str = "R_one";

/// An ordered set of uniquely named relations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConstraintLanguage {
    relations: Vec<(String, BooleanRelation)>,
}

impl ConstraintLanguage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_relations<I, S>(relations: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, BooleanRelation)>,
        S: Into<String>,
    {
        let mut lang = ConstraintLanguage::new();
        for (name, rel) in relations {
            lang.push(name, rel)?;
        }
        Ok(lang)
    }

    /// `{R_zero, R_one}`.
    pub fn pins() -> Self {
        ConstraintLanguage::from_relations([
            (PIN_ZERO, standard::r_zero()),
            (PIN_ONE, standard::r_one()),
        ])
        .expect("distinct names")
    }

    pub fn push(&mut self, name: impl Into<String>, relation: BooleanRelation) -> Result<()> {
        let name = name.into();
        if self.get(&name).is_some() {
            return Err(Error::DuplicateName(name));
        }
        self.relations.push((name, relation));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&BooleanRelation> {
        self.relations
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r)
    }

    /// Looks up `name`, falling back to the built-in pins.
    pub fn resolve(&self, name: &str) -> Result<BooleanRelation> {
        if let Some(rel) = self.get(name) {
            return Ok(rel.clone());
        }
        match name {
            PIN_ZERO => Ok(standard::r_zero()),
            PIN_ONE => Ok(standard::r_one()),
            _ => Err(Error::UnknownRelation(name.to_string())),
        }
    }

    /// Resolves every name once; constraint evaluation indexes into this.
    pub fn resolver(&self) -> Resolver<'_> {
        Resolver {
            language: self,
            cache: HashMap::new(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BooleanRelation)> {
        self.relations.iter().map(|(n, r)| (n.as_str(), r))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Nullary relations; permitted but flagged.
    pub fn degenerate(&self) -> Vec<&str> {
        self.relations
            .iter()
            .filter(|(_, r)| r.arity() == 0)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// This language plus any pin relation it does not already define.
    pub fn with_pins(&self) -> ConstraintLanguage {
        let mut out = self.clone();
        for (name, rel) in ConstraintLanguage::pins().relations {
            if out.get(&name).is_none() {
                out.relations.push((name, rel));
            }
        }
        out
    }
}

pub struct Resolver<'a> {
    language: &'a ConstraintLanguage,
    cache: HashMap<String, BooleanRelation>,
}

impl Resolver<'_> {
    pub fn get(&mut self, name: &str) -> Result<&BooleanRelation> {
        if !self.cache.contains_key(name) {
            let rel = self.language.resolve(name)?;
            self.cache.insert(name.to_string(), rel);
        }
        Ok(&self.cache[name])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut lang = ConstraintLanguage::new();
        lang.push("a", standard::r_or()).unwrap();
        assert_eq!(
            lang.push("a", standard::r_nand()),
            Err(Error::DuplicateName("a".into()))
        );
    }

    #[test]
    fn pins_resolve_without_declaration() {
        let lang = ConstraintLanguage::new();
        assert_eq!(lang.resolve(PIN_ONE).unwrap(), standard::r_one());
        assert!(matches!(lang.resolve("x"), Err(Error::UnknownRelation(_))));
    }

    #[test]
    fn degenerate_flags_nullary() {
        let lang = ConstraintLanguage::from_relations([
            ("t", BooleanRelation::complete(0).unwrap()),
            ("or", standard::r_or()),
        ])
        .unwrap();
        assert_eq!(lang.degenerate(), vec!["t"]);
        assert_eq!(lang.with_pins().len(), 4);
    }
}
