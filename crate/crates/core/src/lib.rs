//! Symbolic weakest-preexpectation calculus for probabilistic guarded
//! commands over non-negative rationals.
//!
//! The crate is organised bottom-up:
//!
//! * [`ast`]: programs, expressions, expectations, first-order formulas,
//!   parsing, printing and substitution.
//! * [`semantics`]: exact rationals, states, finite quantifier domains and
//!   evaluation.
//! * [`wp`]: the weakest-preexpectation transformer, forward
//!   distributions, and the loop iteration routes.
//! * [`normalform`]: prenex, summation and Dedekind normal forms.
//! * [`goedel`]: beta-function sequence coding and its first-order
//!   definitions.
//! * [`series`]: sums and products of expectations.
//! * [`expressiveness`]: the loop encoding as a closed expectation.
//! * [`gen`]: seeded random generators used by checks and tests.
//! * [`checks`]: property suites comparing independent routes.

pub mod ast;
pub mod checks;
pub mod error;
pub mod expressiveness;
pub mod gen;
pub mod goedel;
pub mod normalform;
pub mod semantics;
pub mod series;
pub mod wp;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/programs.md")]
    mod programs {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/loops.md")]
    mod loops {}
    #[doc = include_str!("../../../book/src/normal-forms.md")]
    mod normal_forms {}
    #[doc = include_str!("../../../book/src/coding.md")]
    mod coding {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/loop-encoding.md")]
    mod loop_encoding {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
