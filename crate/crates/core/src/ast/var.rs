use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Words the parser treats as keywords; none of them can name a variable.
pub const KEYWORDS: &[&str] = &[
    "skip", "if", "else", "while", "true", "false", "sup", "inf", "Sup", "Inf", "exists", "forall",
    "and", "or", "not", "implies",
];

/// A variable name.
///
/// User names match `[a-zA-Z_][a-zA-Z0-9_']*`. Names starting with `$` are
/// reserved for helper variables introduced by the constructions in this
/// crate and are rejected inside programs.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

pub type VarSet = BTreeSet<Var>;

impl Var {
    /// A user-facing variable; rejects malformed names and keywords.
    pub fn new(name: &str) -> Result<Var> {
        if is_user_name(name) {
            Ok(Var(name.into()))
        } else {
            Err(Error::InvalidName(name.to_string()))
        }
    }

    /// A helper variable in the reserved `$` namespace.
    pub fn reserved(name: &str) -> Var {
        let body = name.strip_prefix('$').unwrap_or(name);
        assert!(
            body.chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\''),
            "bad reserved name {name}"
        );
        Var(format!("${body}").into())
    }

    /// Accepts both user and reserved names.
    pub fn parse_any(name: &str) -> Result<Var> {
        if let Some(body) = name.strip_prefix('$') {
            if !body.is_empty()
                && body
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
            {
                return Ok(Var(name.into()));
            }
            return Err(Error::InvalidName(name.to_string()));
        }
        Var::new(name)
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('$')
    }

    /// The same name with one more prime.
    pub fn primed(&self) -> Var {
        Var(format!("{}'", self.0).into())
    }
}

fn is_user_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'') && !KEYWORDS.contains(&name)
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Primes `base` until the name is not in `avoid`.
pub fn fresh_from(base: &Var, avoid: &VarSet) -> Var {
    let mut v = base.primed();
    while avoid.contains(&v) {
        v = v.primed();
    }
    v
}

/// `v`, or its first priming not in `avoid`.
pub fn fresh_var(avoid: &VarSet) -> Var {
    fresh_or_same(&Var("v".into()), avoid)
}

/// `base` itself when unused, otherwise its first unused priming.
pub fn fresh_or_same(base: &Var, avoid: &VarSet) -> Var {
    if avoid.contains(base) {
        fresh_from(base, avoid)
    } else {
        base.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn user_names() {
        assert!(Var::new("x").is_ok());
        assert!(Var::new("x_1'").is_ok());
        assert!(Var::new("1x").is_err());
        assert!(Var::new("while").is_err());
        assert!(Var::new("$x").is_err());
        assert!(Var::parse_any("$x").unwrap().is_reserved());
    }

    #[test]
    fn priming() {
        let v = Var::new("v").unwrap();
        let avoid: VarSet = [v.clone(), v.primed()].into_iter().collect();
        assert_eq!(fresh_var(&avoid).name(), "v''");
        assert_eq!(fresh_or_same(&Var::new("w").unwrap(), &avoid).name(), "w");
    }
}
