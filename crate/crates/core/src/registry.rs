//! Name-keyed registries of interchangeable strategies.
//!
//! Formulations, Nyström schemes and linear solvers are all trait objects.
//! Each family has a default registry populated with the built-in variants;
//! callers can register their own under a new name.

use std::sync::Arc;

use crate::error::{Error, Result};

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(Vec<String>, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Register `item` under a primary name and any number of aliases.
    /// Re-registering a name replaces the earlier entry.
    pub fn register(&mut self, names: &[&str], item: Arc<T>) -> &mut Self {
        let names: Vec<String> = names.iter().map(|n| n.to_ascii_lowercase()).collect();
        self.entries
            .retain(|(existing, _)| !existing.iter().any(|e| names.contains(e)));
        self.entries.push((names, item));
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        let key = name.trim().to_ascii_lowercase();
        self.entries
            .iter()
            .find(|(names, _)| names.contains(&key))
            .map(|(_, item)| Arc::clone(item))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    /// Primary names in registration order.
    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(n, _)| n[0].clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<T>)> {
        self.entries.iter().map(|(n, item)| (n[0].as_str(), item))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
