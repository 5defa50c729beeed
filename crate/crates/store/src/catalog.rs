use std::collections::BTreeMap;
use std::sync::Arc;

use isol_core::{builtin_iso27001, validate_taxonomy, Taxonomy};

/// Taxonomies that experiments can be started against, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    taxonomies: BTreeMap<String, Arc<Taxonomy>>,
}

impl Catalog {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Catalog holding the bundled ISO 27001 taxonomy.
    pub fn with_builtin() -> Self {
        let mut c = Self::default();
        c.insert(builtin_iso27001()).expect("bundled taxonomy is valid");
        c
    }

    /// Add or replace a taxonomy. Invalid taxonomies are refused with their
    /// error messages.
    pub fn insert(&mut self, taxonomy: Taxonomy) -> Result<(), Vec<String>> {
        let report = validate_taxonomy(&taxonomy);
        if !report.ok {
            return Err(report.errors().map(|i| i.message.clone()).collect());
        }
        self.taxonomies.insert(taxonomy.id.clone(), Arc::new(taxonomy));
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Taxonomy>> {
        self.taxonomies.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Taxonomy>> {
        self.taxonomies.values()
    }
}
