//! Values, states, quantifier domains and evaluation.

mod eval;
mod num;
mod state;

pub use eval::{
    default_domain, eval_aexpr, eval_bexpr, eval_exp, substituted_fo_tag, substituted_tag,
    Evaluator, FoIntrinsic, Intrinsic, Mode,
};
pub use num::{Rat, XReal};
pub use state::{calkin_wilf, QDomain, State};
