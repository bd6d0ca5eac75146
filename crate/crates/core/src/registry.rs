//! Name-keyed registries of interchangeable strategies.
//!
//! Lyapunov solvers and SDE integrators are selected at runtime by name
//! (config key or CLI flag). Each family is stored behind a trait object and
//! looked up by its registered name.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Something that can be registered: carries its own lookup name.
pub trait Named {
    fn name(&self) -> &'static str;
}

pub struct Registry<T: ?Sized + Named> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Box<T>>,
    default: Option<&'static str>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
            default: None,
        }
    }

    /// Adds a strategy, replacing any previous entry with the same name.
    /// The first registered strategy becomes the default.
    pub fn register(&mut self, strategy: Box<T>) -> &mut Self {
        let name = strategy.name();
        self.default.get_or_insert(name);
        self.entries.insert(name, strategy);
        self
    }

    pub fn set_default(&mut self, name: &str) -> Result<()> {
        let key = self.get(name)?.name();
        self.default = Some(key);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn default_strategy(&self) -> &T {
        let name = self.default.expect("registry is empty");
        self.entries[name].as_ref()
    }

    /// Looks up `name`, falling back to the default when `None`.
    pub fn resolve(&self, name: Option<&str>) -> Result<&T> {
        match name {
            Some(n) => self.get(n),
            None => Ok(self.default_strategy()),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.values().map(|b| b.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Named {
        fn greet(&self) -> String;
    }

    struct Hello;
    struct Hi;

    impl Named for Hello {
        fn name(&self) -> &'static str {
            "hello"
        }
    }
    impl Greeter for Hello {
        fn greet(&self) -> String {
            "hello".into()
        }
    }
    impl Named for Hi {
        fn name(&self) -> &'static str {
            "hi"
        }
    }
    impl Greeter for Hi {
        fn greet(&self) -> String {
            "hi".into()
        }
    }

    #[test]
    fn first_registered_is_default() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register(Box::new(Hi)).register(Box::new(Hello));
        assert_eq!(reg.default_strategy().greet(), "hi");
        reg.set_default("hello").unwrap();
        assert_eq!(reg.resolve(None).unwrap().greet(), "hello");
        assert_eq!(reg.names(), vec!["hello", "hi"]);
    }

    #[test]
    fn unknown_name_lists_available() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register(Box::new(Hello));
        let err = reg.get("bye").err().unwrap().to_string();
        assert!(err.contains("greeter") && err.contains("hello"), "{err}");
    }
}
