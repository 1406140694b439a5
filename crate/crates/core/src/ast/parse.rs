//! Recursive-descent parsers for programs, expressions, expectations and
//! formulas.

use num_bigint::BigUint;

use super::{AExpr, BExpr, Exp, Formula, Program, Var, KEYWORDS};
use crate::error::{Error, Result};
use crate::semantics::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigUint),
    Ident(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    ":=", "<=", ">=", "!=", "==", "->", "&&", "||", "+", "-", "*", "/", "(", ")", "[", "]", "{",
    "}", ":", ";", ",", "<", ">", "=", "!",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            toks.push(Token {
                tok: Tok::Num(text.parse().expect("digits")),
                line: start.0,
                col: start.1,
            });
            col += j - i;
            i = j;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let mut j = i + 1;
            while j < chars.len()
                && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
            {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            toks.push(Token {
                tok: Tok::Ident(text),
                line: start.0,
                col: start.1,
            });
            col += j - i;
            i = j;
            continue;
        }
        if c == '·' {
            toks.push(Token {
                tok: Tok::Sym("*"),
                line: start.0,
                col: start.1,
            });
            i += 1;
            col += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                toks.push(Token {
                    tok: Tok::Sym(s),
                    line: start.0,
                    col: start.1,
                });
                i += s.len();
                col += s.len();
            }
            None => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    toks.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(toks)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

/// One factor of a product chain in an expectation.
enum Factor {
    Arith(AExpr),
    Guard(BExpr),
    Exp(Exp),
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_eof(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", describe(self.peek())))
        }
    }

    fn var(&mut self) -> Result<Var> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => match Var::parse_any(&name) {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.err(format!("invalid variable name `{name}`")),
            },
            t => self.err(format!("expected a variable, found {}", describe(&t))),
        }
    }

    /// `n` or `n/m`.
    fn number(&mut self) -> Result<Rat> {
        let p = match self.bump() {
            Tok::Num(n) => n,
            t => return self.err(format!("expected a number, found {}", describe(&t))),
        };
        if self.is_sym("/") {
            if let Tok::Num(q) = self.peek_at(1).clone() {
                self.bump();
                self.bump();
                return match Rat::from_parts(p, q) {
                    Some(r) => Ok(r),
                    None => self.err("zero denominator"),
                };
            }
        }
        Ok(Rat::from_biguint(p))
    }

    fn aexpr(&mut self) -> Result<AExpr> {
        let mut lhs = self.aterm()?;
        loop {
            if self.eat_sym("+") {
                lhs = AExpr::add(lhs, self.aterm()?);
            } else if self.eat_sym("-") {
                lhs = AExpr::monus(lhs, self.aterm()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn aterm(&mut self) -> Result<AExpr> {
        let mut lhs = self.afactor()?;
        while self.eat_sym("*") {
            lhs = AExpr::mul(lhs, self.afactor()?);
        }
        Ok(lhs)
    }

    fn afactor(&mut self) -> Result<AExpr> {
        match self.peek() {
            Tok::Num(_) => Ok(AExpr::Lit(self.number()?)),
            Tok::Sym("(") => {
                self.bump();
                let a = self.aexpr()?;
                self.expect_sym(")")?;
                Ok(a)
            }
            _ => Ok(AExpr::Var(self.var()?)),
        }
    }

    fn bexpr(&mut self) -> Result<BExpr> {
        let lhs = self.bor()?;
        if self.eat_sym("->") {
            Ok(BExpr::implies(lhs, self.bexpr()?))
        } else {
            Ok(lhs)
        }
    }

    fn bor(&mut self) -> Result<BExpr> {
        let mut lhs = self.band()?;
        while self.eat_sym("||") {
            lhs = BExpr::or(lhs, self.band()?);
        }
        Ok(lhs)
    }

    fn band(&mut self) -> Result<BExpr> {
        let mut lhs = self.bnot()?;
        while self.eat_sym("&&") {
            lhs = BExpr::and(lhs, self.bnot()?);
        }
        Ok(lhs)
    }

    fn bnot(&mut self) -> Result<BExpr> {
        if self.eat_sym("!") {
            Ok(BExpr::not(self.bnot()?))
        } else {
            self.batom()
        }
    }

    fn batom(&mut self) -> Result<BExpr> {
        if self.eat_kw("true") {
            return Ok(BExpr::tt());
        }
        if self.eat_kw("false") {
            return Ok(BExpr::ff());
        }
        let save = self.pos;
        match self.comparison() {
            Ok(b) => Ok(b),
            Err(e) => {
                self.pos = save;
                if self.eat_sym("(") {
                    let b = self.bexpr()?;
                    self.expect_sym(")")?;
                    Ok(b)
                } else {
                    Err(e)
                }
            }
        }
    }

    fn comparison(&mut self) -> Result<BExpr> {
        let a = self.aexpr()?;
        let op = match self.peek() {
            Tok::Sym(s @ ("<" | "<=" | ">" | ">=" | "=" | "==" | "!=")) => *s,
            t => return self.err(format!("expected a comparison, found {}", describe(t))),
        };
        self.bump();
        let b = self.aexpr()?;
        Ok(match op {
            "<" => BExpr::lt(a, b),
            "<=" => BExpr::le(a, b),
            ">" => BExpr::gt(a, b),
            ">=" => BExpr::ge(a, b),
            "!=" => BExpr::ne(a, b),
            _ => BExpr::eq(a, b),
        })
    }

    fn exp(&mut self) -> Result<Exp> {
        let mut lhs = self.eprod()?;
        loop {
            if self.eat_sym("+") {
                lhs = Exp::add(lhs, self.eprod()?);
            } else if self.is_sym("-") {
                self.bump();
                let rhs = self.eprod()?;
                match (lhs, rhs) {
                    (Exp::Arith(a), Exp::Arith(b)) => lhs = Exp::Arith(AExpr::monus(a, b)),
                    _ => return self.err("`-` needs arithmetic operands"),
                }
            } else {
                return Ok(lhs);
            }
        }
    }

    fn eprod(&mut self) -> Result<Exp> {
        let mut factors = vec![self.eunary()?];
        let mut first_star = None;
        loop {
            if self.is_sym("*") {
                let t = &self.toks[self.pos];
                first_star.get_or_insert((t.line, t.col));
                self.bump();
                factors.push(self.eunary()?);
            } else if self.eat_sym("/") {
                let den = self.eunary()?;
                let num = factors.pop().expect("non-empty");
                match (num, den) {
                    (Factor::Arith(a), Factor::Arith(b)) => factors.push(match (&a, &b) {
                        (AExpr::Lit(p), AExpr::Lit(q)) if !q.is_zero() => {
                            Factor::Arith(AExpr::Lit(p.div(q).expect("non-zero")))
                        }
                        _ => Factor::Exp(crate::series::quotient(a, b)),
                    }),
                    _ => return self.err("`/` needs arithmetic operands"),
                }
            } else {
                break;
            }
        }
        let (line, col) = first_star.unwrap_or((0, 0));
        chain(factors, line, col)
    }

    fn eunary(&mut self) -> Result<Factor> {
        let quant = match self.peek() {
            Tok::Ident(k) if k == "sup" || k == "Sup" => Some(true),
            Tok::Ident(k) if k == "inf" || k == "Inf" => Some(false),
            _ => None,
        };
        if let Some(is_sup) = quant {
            self.bump();
            let v = self.var()?;
            self.expect_sym(":")?;
            let body = self.exp()?;
            return Ok(Factor::Exp(if is_sup {
                Exp::sup(&v, body)
            } else {
                Exp::inf(&v, body)
            }));
        }
        match self.peek() {
            Tok::Sym("[") => {
                self.bump();
                let b = self.bexpr()?;
                self.expect_sym("]")?;
                Ok(Factor::Guard(b))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.exp()?;
                self.expect_sym(")")?;
                Ok(match e {
                    Exp::Arith(a) => Factor::Arith(a),
                    e => Factor::Exp(e),
                })
            }
            Tok::Num(_) => Ok(Factor::Arith(AExpr::Lit(self.number()?))),
            _ => Ok(Factor::Arith(AExpr::Var(self.var()?))),
        }
    }

    fn program(&mut self) -> Result<Program> {
        let first = self.stmt()?;
        if self.eat_sym(";") {
            if self.is_sym("}") || *self.peek() == Tok::Eof {
                return Ok(first);
            }
            let rest = self.program()?;
            Ok(Program::seq(first, rest))
        } else {
            Ok(first)
        }
    }

    fn block(&mut self) -> Result<Program> {
        self.expect_sym("{")?;
        let p = self.program()?;
        self.expect_sym("}")?;
        Ok(p)
    }

    fn stmt(&mut self) -> Result<Program> {
        if self.eat_kw("skip") {
            return Ok(Program::Skip);
        }
        if self.eat_kw("if") {
            self.expect_sym("(")?;
            let g = self.bexpr()?;
            self.expect_sym(")")?;
            let t = self.block()?;
            let e = if self.eat_kw("else") {
                self.block()?
            } else {
                Program::Skip
            };
            return Ok(Program::ite(g, t, e));
        }
        if self.eat_kw("while") {
            self.expect_sym("(")?;
            let g = self.bexpr()?;
            self.expect_sym(")")?;
            let body = self.block()?;
            return Ok(Program::while_loop(g, body));
        }
        if self.is_sym("{") {
            let left = self.block()?;
            if !self.eat_sym("[") {
                return Ok(left);
            }
            let p = self.number()?;
            if p > Rat::one() {
                return Err(Error::ProbabilityOutOfRange(p.to_string()));
            }
            self.expect_sym("]")?;
            let right = self.block()?;
            return Ok(Program::pchoice(left, p, right));
        }
        let x = self.var()?;
        self.expect_sym(":=")?;
        let a = self.aexpr()?;
        Ok(Program::assign(&x, a))
    }

    fn formula(&mut self) -> Result<Formula> {
        if let Some(q) = self.quantifier_kw() {
            self.bump();
            let v = self.var()?;
            self.expect_sym(":")?;
            let body = self.formula()?;
            return Ok(if q {
                Formula::exists(&v, body)
            } else {
                Formula::forall(&v, body)
            });
        }
        let lhs = self.f_or()?;
        if self.eat_kw("implies") {
            Ok(Formula::implies(lhs, self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn quantifier_kw(&self) -> Option<bool> {
        match self.peek() {
            Tok::Ident(k) if k == "exists" => Some(true),
            Tok::Ident(k) if k == "forall" => Some(false),
            _ => None,
        }
    }

    fn f_or(&mut self) -> Result<Formula> {
        let mut lhs = self.f_and()?;
        while self.eat_kw("or") {
            lhs = Formula::or(lhs, self.f_and()?);
        }
        Ok(lhs)
    }

    fn f_and(&mut self) -> Result<Formula> {
        let mut lhs = self.f_not()?;
        while self.eat_kw("and") {
            lhs = Formula::and(lhs, self.f_not()?);
        }
        Ok(lhs)
    }

    fn f_not(&mut self) -> Result<Formula> {
        if self.eat_kw("not") {
            return Ok(Formula::not(self.f_not()?));
        }
        if self.quantifier_kw().is_some() {
            return self.formula();
        }
        let save = self.pos;
        match self.bexpr() {
            Ok(b) => Ok(Formula::Atom(b)),
            Err(e) => {
                self.pos = save;
                if self.eat_sym("(") {
                    let f = self.formula()?;
                    self.expect_sym(")")?;
                    Ok(f)
                } else {
                    Err(e)
                }
            }
        }
    }
}

/// Builds the expectation denoted by a product chain. Arithmetic runs are
/// multiplied out, a guard scopes over the rest of the chain, and a
/// non-arithmetic factor can only be scaled by arithmetic ones.
fn chain(mut factors: Vec<Factor>, line: usize, col: usize) -> Result<Exp> {
    if factors.iter().all(|f| matches!(f, Factor::Arith(_))) {
        let mut it = factors.into_iter().map(|f| match f {
            Factor::Arith(a) => a,
            _ => unreachable!(),
        });
        let first = it.next().expect("non-empty chain");
        return Ok(Exp::Arith(it.fold(first, AExpr::mul)));
    }
    let rest = factors.split_off(1);
    match factors.pop().expect("non-empty chain") {
        Factor::Guard(b) => {
            if rest.is_empty() {
                Ok(Exp::indicator(b))
            } else {
                Ok(Exp::guard(b, chain(rest, line, col)?))
            }
        }
        Factor::Arith(a) => {
            let mut rest = rest;
            let mut coef = a;
            while let Some(Factor::Arith(_)) = rest.first() {
                if let Factor::Arith(b) = rest.remove(0) {
                    coef = AExpr::mul(coef, b);
                }
            }
            Ok(Exp::scale(coef, chain(rest, line, col)?))
        }
        Factor::Exp(e) => {
            if rest.is_empty() {
                return Ok(e);
            }
            let mut coef: Option<AExpr> = None;
            for f in rest {
                match f {
                    Factor::Arith(b) => {
                        coef = Some(match coef {
                            None => b,
                            Some(c) => AExpr::mul(c, b),
                        })
                    }
                    _ => return Err(Error::IllegalProduct { line, col }),
                }
            }
            Ok(Exp::scale(coef.expect("non-empty"), e))
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

pub fn parse_aexpr(src: &str) -> Result<AExpr> {
    let mut p = Parser::new(src)?;
    let a = p.aexpr()?;
    p.expect_eof()?;
    Ok(a)
}

pub fn parse_bexpr(src: &str) -> Result<BExpr> {
    let mut p = Parser::new(src)?;
    let b = p.bexpr()?;
    p.expect_eof()?;
    Ok(b)
}

/// Parses an expectation. `a / b` is accepted as sugar for
/// `sup w: [w * b = a] * w`.
pub fn parse_exp(src: &str) -> Result<Exp> {
    let mut p = Parser::new(src)?;
    let e = p.exp()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses a program; helper variables (`$` prefix) are rejected.
pub fn parse_program(src: &str) -> Result<Program> {
    let mut p = Parser::new(src)?;
    let prog = p.program()?;
    p.expect_eof()?;
    if let Some(v) = prog.vars().into_iter().find(|v| v.is_reserved()) {
        return Err(Error::ReservedName(v.to_string()));
    }
    Ok(prog)
}

pub fn parse_formula(src: &str) -> Result<Formula> {
    let mut p = Parser::new(src)?;
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn program_example() {
        let src = "while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }";
        let p = parse_program(src).unwrap();
        assert_eq!(p.to_string(), src);
        assert!(matches!(p, Program::While(..)));
    }

    #[test]
    fn probability_out_of_range() {
        let e = parse_program("{x := 0} [3/2] {x := 1}").unwrap_err();
        assert!(matches!(e, Error::ProbabilityOutOfRange(_)));
    }

    #[test]
    fn reserved_names_rejected_in_programs() {
        assert!(matches!(
            parse_program("$x := 1"),
            Err(Error::ReservedName(_))
        ));
    }

    #[test]
    fn guard_and_scale() {
        let e = parse_exp("x + [c = 1] * 2").unwrap();
        let x = Var::new("x").unwrap();
        let c = Var::new("c").unwrap();
        assert_eq!(
            e,
            Exp::add(
                Exp::var(&x),
                Exp::guard(BExpr::eq(AExpr::var(&c), AExpr::lit(1)), Exp::lit(2))
            )
        );
    }

    #[test]
    fn sup_example() {
        let e = parse_exp("sup v: [v*v < 2] * v").unwrap();
        assert!(matches!(e, Exp::Sup(..)));
        assert_eq!(e.to_string(), "sup v: [v * v < 2] * v");
    }

    #[test]
    fn illegal_product() {
        let e = parse_exp("(sup v: v) * (inf w: w)").unwrap_err();
        assert!(matches!(e, Error::IllegalProduct { .. }));
    }

    #[test]
    fn parse_error_position() {
        match parse_exp("x + ") {
            Err(Error::Parse {
                line: 1, col: 5, ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn formula_roundtrip() {
        let src = "forall a: exists b: a < b and not b = 0 or (x < 1 implies y < 2)";
        let f = parse_formula(src).unwrap();
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }
}
