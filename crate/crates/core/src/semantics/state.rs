use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;

use super::Rat;
use crate::ast::{Var, VarSet};
use crate::error::{Error, Result};

/// Assignment of non-negative rationals to variables; unmentioned
/// variables are `0`. Zero entries are never stored, so equal states have
/// equal representations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State(BTreeMap<Var, Rat>);

impl State {
    pub fn new() -> State {
        State::default()
    }

    pub fn get(&self, v: &Var) -> Rat {
        self.0.get(v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set(&mut self, v: &Var, r: Rat) {
        if r.is_zero() {
            self.0.remove(v);
        } else {
            self.0.insert(v.clone(), r);
        }
    }

    /// Persistent update.
    pub fn with(&self, v: &Var, r: Rat) -> State {
        let mut s = self.clone();
        s.set(v, r);
        s
    }

    /// Keeps only the variables in `vars`.
    pub fn restrict(&self, vars: &VarSet) -> State {
        State(
            self.0
                .iter()
                .filter(|(k, _)| vars.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    /// Non-zero entries.
    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Rat)> {
        self.0.iter()
    }

    pub fn values(&self) -> impl Iterator<Item = &Rat> {
        self.0.values()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a Var, Rat)>) -> State {
        let mut s = State::new();
        for (v, r) in pairs {
            s.set(v, r);
        }
        s
    }

    /// Parses `c=1, x=3/2`.
    pub fn parse(src: &str) -> Result<State> {
        let mut s = State::new();
        for part in src.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Decode(format!("expected `var=value`, found `{part}`")))?;
            let v = Var::parse_any(name.trim())?;
            s.set(&v, value.trim().parse()?);
        }
        Ok(s)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Finite, ordered set of rationals that quantifiers range over under
/// restricted evaluation.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct QDomain(Vec<Rat>);

impl QDomain {
    pub fn from_values(values: impl IntoIterator<Item = Rat>) -> QDomain {
        let set: BTreeSet<Rat> = values.into_iter().collect();
        QDomain(set.into_iter().collect())
    }

    /// `{0, 1, ..., n}`.
    pub fn naturals(n: u64) -> QDomain {
        QDomain((0..=n).map(Rat::from_int).collect())
    }

    pub fn values(&self) -> &[Rat] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: &Rat) -> bool {
        self.0.binary_search(r).is_ok()
    }

    pub fn extended(&self, extra: impl IntoIterator<Item = Rat>) -> QDomain {
        QDomain::from_values(self.0.iter().cloned().chain(extra))
    }
}

/// The first `k` positive rationals in Calkin-Wilf order, together with `0`
/// and `extras`.
pub fn calkin_wilf(k: usize, extras: impl IntoIterator<Item = Rat>) -> QDomain {
    let mut out = vec![Rat::zero()];
    let mut q = Rat::one();
    for _ in 0..k {
        out.push(q.clone());
        // next(q) = 1 / (2 floor(q) - q + 1)
        let two_floor = Rat::from_biguint(q.floor() * BigUint::from(2u32));
        let denom = (&two_floor + &Rat::one())
            .checked_sub(&q)
            .expect("floor(q) <= q");
        q = denom.recip().expect("positive");
    }
    out.extend(extras);
    QDomain::from_values(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calkin_wilf_prefix() {
        let mut q = Rat::one();
        let mut seen = vec![];
        for _ in 0..6 {
            seen.push(q.to_string());
            let t = Rat::from_biguint(q.floor() * BigUint::from(2u32));
            q = ((&t + &Rat::one()).checked_sub(&q).unwrap())
                .recip()
                .unwrap();
        }
        assert_eq!(seen, ["1", "1/2", "2", "1/3", "3/2", "2/3"]);
        let d = calkin_wilf(5, []);
        let names: Vec<String> = d.values().iter().map(|r| r.to_string()).collect();
        assert_eq!(names, ["0", "1/3", "1/2", "1", "3/2", "2"]);
    }

    #[test]
    fn state_defaults_and_parse() {
        let s = State::parse("c=1, x=0").unwrap();
        let x = Var::new("x").unwrap();
        assert_eq!(s.get(&x), Rat::zero());
        assert_eq!(s, State::parse("c=1").unwrap());
        assert_eq!(s.to_string(), "{c=1}");
    }
}
