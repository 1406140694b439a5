//! Arithmetic coding of finite sequences and its first-order definitions.

pub mod beta;
pub mod fo;
pub mod predicates;

pub use beta::{
    beta, beta_decode, beta_encode, cantor_pair, cantor_unpair, crt, decode_rat_seq, decode_seq,
    decode_state, decode_state_seq, elem, encode_rat_seq, encode_seq, encode_state,
    encode_state_seq, is_rat_seq_code, is_seq_code, rat_code, rat_from_code, GoedelPair, SeqCode,
    SCAN_BUDGET,
};
pub use fo::{fo_nat_to_rat, fo_to_exp, iverson, nat_guards, relativize_nat, robinson_nat_formula};
pub use predicates::{
    elem_formula, enc_state_formula, pair_formula, relem_formula, relprime_formula, rseq_formula,
    seq_formula, state_seq_formula,
};
