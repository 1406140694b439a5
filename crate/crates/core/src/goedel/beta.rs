//! Numeric side of the sequence coding: Cantor pairing, Goedel's beta
//! function, and codes for sequences of naturals, rationals and states.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::ast::VarSet;
use crate::error::{Error, Result};
use crate::semantics::{Rat, State};

/// `(a + b)(a + b + 1)/2 + b`.
pub fn cantor_pair(a: &BigUint, b: &BigUint) -> BigUint {
    let s = a + b;
    (&s * (&s + 1u32)) / 2u32 + b
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(n: &BigUint) -> (BigUint, BigUint) {
    let w = ((n * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let b = n - t;
    let a = w - &b;
    (a, b)
}

/// `a mod (1 + (i + 1) b)`.
pub fn beta(a: &BigUint, b: &BigUint, i: u64) -> BigUint {
    a % (BigUint::one() + b * (i + 1))
}

/// Element `i` of the sequence coded by `num = pair(a, b)`.
pub fn elem(num: &BigUint, i: u64) -> BigUint {
    let (a, b) = cantor_unpair(num);
    beta(&a, &b, i)
}

/// The first `len` elements coded by `num`.
pub fn decode_seq(num: &BigUint, len: usize) -> Vec<BigUint> {
    let (a, b) = cantor_unpair(num);
    (0..len as u64).map(|i| beta(&a, &b, i)).collect()
}

/// Smallest `x >= 0` with `x = r_i (mod m_i)` for all `i`, or `None` when
/// the congruences are inconsistent. Moduli need not be coprime.
pub fn crt(residues: &[BigUint], moduli: &[BigUint]) -> Option<BigUint> {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, mi) in residues.iter().zip(moduli) {
        let r = BigInt::from(r.clone());
        let mi = BigInt::from(mi.clone());
        let e = m.extended_gcd(&mi);
        let g = e.gcd;
        let diff = &r - &x;
        if !(&diff % &g).is_zero() {
            return None;
        }
        let lcm = &m / &g * &mi;
        // x + m * t with t = (diff / g) * inv(m / g) mod (mi / g)
        let step = (&diff / &g * &e.x).mod_floor(&(&mi / &g));
        x = (&x + &m * step).mod_floor(&lcm);
        m = lcm;
    }
    Some(x.to_biguint().expect("non-negative"))
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Base pair of the beta function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoedelPair {
    pub a: BigUint,
    pub b: BigUint,
}

impl GoedelPair {
    pub fn get(&self, i: u64) -> BigUint {
        beta(&self.a, &self.b, i)
    }
}

/// The classical witness: `b = M!` with `M = max(len, max s_i) + 1`, and
/// the least `a` solving the residues. The empty sequence gets `(0, 1)`.
pub fn beta_encode(seq: &[BigUint]) -> GoedelPair {
    if seq.is_empty() {
        return GoedelPair {
            a: BigUint::zero(),
            b: BigUint::one(),
        };
    }
    let m = seq
        .iter()
        .map(|s| s.to_u64().expect("element fits in u64"))
        .chain([seq.len() as u64])
        .max()
        .unwrap_or(0)
        + 1;
    let b = factorial(m);
    let moduli: Vec<BigUint> = (0..seq.len() as u64)
        .map(|i| BigUint::one() + &b * (i + 1))
        .collect();
    let a = crt(seq, &moduli).expect("moduli are pairwise coprime");
    GoedelPair { a, b }
}

pub fn beta_decode(p: &GoedelPair, i: u64) -> BigUint {
    p.get(i)
}

/// Code of a sequence of naturals, with a flag telling whether the search
/// proved it minimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqCode {
    pub num: BigUint,
    pub length: usize,
    pub minimal: bool,
}

impl SeqCode {
    pub fn get(&self, i: usize) -> Result<BigUint> {
        if i >= self.length {
            return Err(Error::IndexOutOfRange {
                index: i,
                length: self.length,
            });
        }
        Ok(elem(&self.num, i as u64))
    }

    pub fn decode(&self) -> Vec<BigUint> {
        decode_seq(&self.num, self.length)
    }
}

/// Number of bases tried after the first feasible one before the search
/// gives up on proving minimality.
pub const SCAN_BUDGET: u64 = 4096;

/// The canonical code of `seq`: the least `num = pair(a, b)` whose beta
/// decoding starts with `seq`, found by scanning `b` upward. For each `b`
/// the least `a` comes from the residue system; the scan stops once
/// `pair(0, b)` exceeds the best code (the result is then the true minimum)
/// or after [`SCAN_BUDGET`] further bases.
pub fn encode_seq(seq: &[BigUint]) -> SeqCode {
    let mut best: Option<BigUint> = None;
    let mut b = seq
        .iter()
        .enumerate()
        .map(|(i, s)| {
            // 1 + (i + 1) b > s
            s.div_ceil(&BigUint::from(i + 1))
        })
        .max()
        .unwrap_or_default();
    let mut tried_after = 0u64;
    loop {
        if let Some(best) = &best {
            if &cantor_pair(&BigUint::zero(), &b) >= best {
                return SeqCode {
                    num: best.clone(),
                    length: seq.len(),
                    minimal: true,
                };
            }
            if tried_after >= SCAN_BUDGET {
                return SeqCode {
                    num: best.clone(),
                    length: seq.len(),
                    minimal: false,
                };
            }
            tried_after += 1;
        }
        let moduli: Vec<BigUint> = (0..seq.len() as u64)
            .map(|i| BigUint::one() + &b * (i + 1))
            .collect();
        if seq.iter().zip(&moduli).all(|(s, m)| s < m) {
            if let Some(a) = crt(seq, &moduli) {
                let code = cantor_pair(&a, &b);
                if best.as_ref().is_none_or(|x| code < *x) {
                    best = Some(code);
                }
            }
        }
        b += 1u32;
    }
}

/// Code `pair(p, q)` of a rational in lowest terms (`0` is `0/1`).
pub fn rat_code(r: &Rat) -> BigUint {
    cantor_pair(&r.numer(), &r.denom())
}

/// Inverse of [`rat_code`]; `None` unless the pair is in lowest terms with
/// a non-zero denominator (and `0/1` for zero).
pub fn rat_from_code(n: &BigUint) -> Option<Rat> {
    let (p, q) = cantor_unpair(n);
    if q.is_zero() {
        return None;
    }
    if p.is_zero() {
        return if q.is_one() { Some(Rat::zero()) } else { None };
    }
    if !p.gcd(&q).is_one() {
        return None;
    }
    Rat::from_parts(p, q)
}

pub fn encode_rat_seq(rs: &[Rat]) -> SeqCode {
    let codes: Vec<BigUint> = rs.iter().map(rat_code).collect();
    encode_seq(&codes)
}

/// The first `len` rationals coded by `num`, if every element is a valid
/// rational code.
pub fn decode_rat_seq(num: &BigUint, len: usize) -> Option<Vec<Rat>> {
    decode_seq(num, len).iter().map(rat_from_code).collect()
}

/// Code of a state: the rational-sequence code of its values in variable
/// order.
pub fn encode_state(s: &State, vars: &VarSet) -> SeqCode {
    let values: Vec<Rat> = vars.iter().map(|v| s.get(v)).collect();
    encode_rat_seq(&values)
}

pub fn decode_state(num: &BigUint, vars: &VarSet) -> Result<State> {
    let values = decode_rat_seq(num, vars.len())
        .ok_or_else(|| Error::Decode(format!("{num} does not code a state")))?;
    Ok(State::from_pairs(vars.iter().zip(values)))
}

/// Code of a state sequence: the sequence code of the state codes.
pub fn encode_state_seq(states: &[State], vars: &VarSet) -> SeqCode {
    let codes: Vec<SeqCode> = states.iter().map(|s| encode_state(s, vars)).collect();
    let nums: Vec<BigUint> = codes.iter().map(|c| c.num.clone()).collect();
    let mut out = encode_seq(&nums);
    out.minimal &= codes.iter().all(|c| c.minimal);
    out
}

pub fn decode_state_seq(num: &BigUint, len: usize, vars: &VarSet) -> Result<Vec<State>> {
    decode_seq(num, len)
        .iter()
        .map(|n| decode_state(n, vars))
        .collect()
}

/// Whether `num` is the canonical code of its first `len` elements.
pub fn is_seq_code(num: &BigUint, len: usize) -> bool {
    encode_seq(&decode_seq(num, len)).num == *num
}

/// Whether `num` is the canonical code of `len` valid rational codes.
pub fn is_rat_seq_code(num: &BigUint, len: usize) -> bool {
    decode_rat_seq(num, len).is_some() && is_seq_code(num, len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn pairing() {
        assert_eq!(cantor_pair(&n(1), &n(2)), n(8));
        assert_eq!(cantor_unpair(&n(8)), (n(1), n(2)));
        assert_eq!(cantor_pair(&n(0), &n(0)), n(0));
    }

    #[test]
    fn classical_roundtrip() {
        let seq = [n(3), n(1), n(4)];
        let p = beta_encode(&seq);
        let got: Vec<BigUint> = (0..3).map(|i| beta_decode(&p, i)).collect();
        assert_eq!(got, seq);
        assert_eq!(beta_encode(&[]), GoedelPair { a: n(0), b: n(1) });
    }

    #[test]
    fn crt_non_coprime() {
        assert_eq!(crt(&[n(1), n(3)], &[n(4), n(6)]), Some(n(9)));
        assert_eq!(crt(&[n(0), n(1)], &[n(4), n(6)]), None);
    }

    #[test]
    fn canonical_codes_decode() {
        for seq in [vec![], vec![n(0)], vec![n(3), n(1), n(4)], vec![n(7), n(7)]] {
            let c = encode_seq(&seq);
            assert_eq!(decode_seq(&c.num, seq.len()), seq);
            assert!(is_seq_code(&c.num, seq.len()));
        }
        assert_eq!(encode_seq(&[]).num, n(0));
    }

    #[test]
    fn rational_codes() {
        let r: Rat = "3/4".parse().unwrap();
        assert_eq!(rat_from_code(&rat_code(&r)), Some(r));
        assert_eq!(rat_from_code(&cantor_pair(&n(2), &n(4))), None);
        assert_eq!(rat_from_code(&cantor_pair(&n(0), &n(0))), None);
        assert_eq!(rat_from_code(&cantor_pair(&n(0), &n(1))), Some(Rat::zero()));
    }
}
