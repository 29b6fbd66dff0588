//! Name-based family lookup for the CLI and plug-in families.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::families::{BinaryFamily, ExponentialFamily, Family, NormalFamily, PoissonFamily};

/// Registry of endpoint families, keyed by name.
pub struct Registry {
    families: BTreeMap<String, Arc<dyn Family>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            families: BTreeMap::new(),
        }
    }

    /// Registry with the built-in families. The normal family registers in
    /// pooled-variance form; planning callers construct
    /// [`NormalFamily::with_variance`] directly.
    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register(Arc::new(BinaryFamily::identity()));
        r.register(Arc::new(BinaryFamily::logit()));
        r.register(Arc::new(PoissonFamily));
        r.register(Arc::new(NormalFamily::pooled()));
        r.register(Arc::new(ExponentialFamily));
        r
    }

    pub fn register(&mut self, family: Arc<dyn Family>) {
        self.families.insert(family.name().to_string(), family);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Family>> {
        self.families.get(name).cloned().ok_or_else(|| {
            Error::Invalid(format!(
                "unknown family '{name}'; available: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.families.keys().map(|s| s.as_str()).collect()
    }
}
