//! Expression front end: a recursive-descent parser for germ expressions in
//! `v` and `theta`, exact Taylor expansion into a `PuiseuxPoly` at a chosen
//! truncation order, and the normalization `gamma(0,0) = 0`,
//! `d_theta gamma(0,0) = 0`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | base ('^' natural)?
//! base   := rational | 'v' | 'theta' | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Rational literals are `p/q` (no spaces) or integers. `exp` is the only
//! transcendental; its argument must vanish at the origin so that expansion
//! stays a power series.

use crate::puiseux::{Coefficient, ExpPair, PuiseuxPoly};
use crate::rat::{rat_i, ExtRat, Rat};
use num::traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("non-integer exponent at byte {offset}")]
    NonIntegerExponent { offset: usize },
    #[error("exp argument does not vanish at the origin (byte {offset})")]
    ExpNonVanishing { offset: usize },
    #[error("germ has empty support after expansion")]
    EmptySupport,
    #[error("degenerate input: no mixed monomial v^p theta^q with p, q >= 1 after normalization")]
    DegenerateInput,
}

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum ExprAst {
    Num(Rat),
    V,
    Theta,
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
    Neg(Box<ExprAst>),
    Exp(Box<ExprAst>),
}

impl ExprAst {
    /// Does the expression contain an `exp` node?
    pub fn has_exp(&self) -> bool {
        match self {
            ExprAst::Num(_) | ExprAst::V | ExprAst::Theta => false,
            ExprAst::Add(a, b) | ExprAst::Sub(a, b) | ExprAst::Mul(a, b) => {
                a.has_exp() || b.has_exp()
            }
            ExprAst::Pow(a, _) | ExprAst::Neg(a) => a.has_exp(),
            ExprAst::Exp(_) => true,
        }
    }

    /// Exact value at the origin.
    pub fn value_at_origin(&self) -> Rat {
        match self {
            ExprAst::Num(c) => c.clone(),
            ExprAst::V | ExprAst::Theta => Rat::zero(),
            ExprAst::Add(a, b) => a.value_at_origin() + b.value_at_origin(),
            ExprAst::Sub(a, b) => a.value_at_origin() - b.value_at_origin(),
            ExprAst::Mul(a, b) => a.value_at_origin() * b.value_at_origin(),
            ExprAst::Pow(a, n) => {
                let base = a.value_at_origin();
                let mut acc = Rat::from_integer(1.into());
                for _ in 0..*n {
                    acc = acc * &base;
                }
                acc
            }
            ExprAst::Neg(a) => -a.value_at_origin(),
            // exp arguments vanish at the origin by construction
            ExprAst::Exp(_) => Rat::from_integer(1.into()),
        }
    }

    /// Direct numeric evaluation (the parser's semantics, no truncation).
    pub fn evaluate_f64(&self, v: f64, theta: f64) -> f64 {
        match self {
            ExprAst::Num(c) => crate::rat::rat_to_f64(c),
            ExprAst::V => v,
            ExprAst::Theta => theta,
            ExprAst::Add(a, b) => a.evaluate_f64(v, theta) + b.evaluate_f64(v, theta),
            ExprAst::Sub(a, b) => a.evaluate_f64(v, theta) - b.evaluate_f64(v, theta),
            ExprAst::Mul(a, b) => a.evaluate_f64(v, theta) * b.evaluate_f64(v, theta),
            ExprAst::Pow(a, n) => a.evaluate_f64(v, theta).powi(*n as i32),
            ExprAst::Neg(a) => -a.evaluate_f64(v, theta),
            ExprAst::Exp(a) => a.evaluate_f64(v, theta).exp(),
        }
    }

    /// Bound on `sum |c_pq| r^(p+q)` over the full Taylor series.
    fn majorant(&self, r: f64) -> f64 {
        match self {
            ExprAst::Num(c) => crate::rat::rat_to_f64(c).abs(),
            ExprAst::V | ExprAst::Theta => r,
            ExprAst::Add(a, b) | ExprAst::Sub(a, b) => a.majorant(r) + b.majorant(r),
            ExprAst::Mul(a, b) => a.majorant(r) * b.majorant(r),
            ExprAst::Pow(a, n) => a.majorant(r).powi(*n as i32),
            ExprAst::Neg(a) => a.majorant(r),
            ExprAst::Exp(a) => a.majorant(r).exp(),
        }
    }
}

/// Rigorous bound on the truncation tail `|f(v,t) - P_T(v,t)|` for
/// `|v|, |t| <= r`: the tail coefficients are dominated by the majorant at
/// radius `2r`, so the tail is at most `majorant(2r) * 2^-(T+1)` (geometric).
pub fn truncation_tail_bound(ast: &ExprAst, order: u32, r: f64) -> f64 {
    ast.majorant(2.0 * r) * 0.5f64.powi(order as i32 + 1)
}

// ---------------------------------------------------------------------------
// Lexer / parser
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    V,
    Theta,
    ExpFn,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its starting byte offset.
    fn next(&mut self) -> Result<Option<(Tok, usize)>, ExprError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                let numer: num::BigInt =
                    std::str::from_utf8(&self.src[self.pos..end]).unwrap().parse().unwrap();
                self.pos = end;
                // optional '/denominator' written without spaces
                if self.pos < self.src.len()
                    && self.src[self.pos] == b'/'
                    && self.pos + 1 < self.src.len()
                    && self.src[self.pos + 1].is_ascii_digit()
                {
                    self.pos += 1;
                    let mut end = self.pos;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                    let denom: num::BigInt =
                        std::str::from_utf8(&self.src[self.pos..end]).unwrap().parse().unwrap();
                    self.pos = end;
                    if denom.is_zero() {
                        return Err(ExprError::Syntax {
                            offset: start,
                            message: "zero denominator".into(),
                        });
                    }
                    Tok::Num(Rat::new(numer, denom))
                } else {
                    Tok::Num(Rat::from_integer(numer))
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let word = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                self.pos = end;
                match word {
                    "v" => Tok::V,
                    "theta" => Tok::Theta,
                    "exp" => Tok::ExpFn,
                    other => {
                        return Err(ExprError::Syntax {
                            offset: start,
                            message: format!("unknown identifier `{other}`"),
                        })
                    }
                }
            }
            other => {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((tok, start)))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.idx)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize, ExprError> {
        match self.bump() {
            Some((t, o)) if t == want => Ok(o),
            Some((_, o)) => {
                Err(ExprError::Syntax { offset: o, message: format!("expected {what}") })
            }
            None => Err(ExprError::Syntax {
                offset: self.end,
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn parse_expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some((Tok::Plus, _)) => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    acc = ExprAst::Add(Box::new(acc), Box::new(rhs));
                }
                Some((Tok::Minus, _)) => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    acc = ExprAst::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<ExprAst, ExprError> {
        let mut acc = self.parse_factor()?;
        while let Some((Tok::Star, _)) = self.peek() {
            self.bump();
            let rhs = self.parse_factor()?;
            acc = ExprAst::Mul(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<ExprAst, ExprError> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.bump();
            let inner = self.parse_factor()?;
            return Ok(ExprAst::Neg(Box::new(inner)));
        }
        let base = self.parse_base()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.bump();
            let off = self.here();
            match self.bump() {
                Some((Tok::Num(n), o)) => {
                    if !n.is_integer() || n.is_negative() {
                        return Err(ExprError::NonIntegerExponent { offset: o });
                    }
                    let n = n.to_integer().to_u32().ok_or(ExprError::Syntax {
                        offset: o,
                        message: "exponent too large".into(),
                    })?;
                    if n > 64 {
                        return Err(ExprError::Syntax {
                            offset: o,
                            message: "exponent too large (max 64)".into(),
                        });
                    }
                    return Ok(ExprAst::Pow(Box::new(base), n));
                }
                Some((Tok::LParen, o)) | Some((Tok::Minus, o)) => {
                    return Err(ExprError::NonIntegerExponent { offset: o })
                }
                _ => {
                    return Err(ExprError::Syntax {
                        offset: off,
                        message: "expected a natural number after `^`".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn parse_base(&mut self) -> Result<ExprAst, ExprError> {
        match self.bump() {
            Some((Tok::Num(n), _)) => Ok(ExprAst::Num(n)),
            Some((Tok::V, _)) => Ok(ExprAst::V),
            Some((Tok::Theta, _)) => Ok(ExprAst::Theta),
            Some((Tok::ExpFn, off)) => {
                self.expect(Tok::LParen, "`(` after exp")?;
                let arg = self.parse_expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                if !arg.value_at_origin().is_zero() {
                    return Err(ExprError::ExpNonVanishing { offset: off });
                }
                Ok(ExprAst::Exp(Box::new(arg)))
            }
            Some((Tok::LParen, _)) => {
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some((_, o)) => {
                Err(ExprError::Syntax { offset: o, message: "expected a value".into() })
            }
            None => Err(ExprError::Syntax {
                offset: self.end,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parse an expression in the documented grammar.
pub fn parse(text: &str) -> Result<ExprAst, ExprError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser = Parser { toks, idx: 0, end: text.len() };
    let ast = parser.parse_expr()?;
    if parser.idx != parser.toks.len() {
        return Err(ExprError::Syntax {
            offset: parser.here(),
            message: "trailing input".into(),
        });
    }
    Ok(ast)
}

// ---------------------------------------------------------------------------
// Expansion and germs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    TruncatedAtOrder(u32),
}

impl Exactness {
    pub fn is_exact(&self) -> bool {
        matches!(self, Exactness::Exact)
    }
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exactness::Exact => write!(f, "exact"),
            Exactness::TruncatedAtOrder(t) => write!(f, "truncated-at-order-{t}"),
        }
    }
}

/// An expanded germ: a Puiseux polynomial plus provenance. `trust` is the
/// total degree up to which the stored coefficients agree with the exact
/// analytic germ; it is infinite for exact inputs and shrinks under
/// operations that mix truncated tails downward.
#[derive(Clone, Debug)]
pub struct Germ {
    pub poly: PuiseuxPoly,
    pub exactness: Exactness,
    pub trust: ExtRat,
}

impl Germ {
    pub fn exact(poly: PuiseuxPoly) -> Self {
        Germ { poly, exactness: Exactness::Exact, trust: ExtRat::Infinity }
    }

    pub fn truncated(poly: PuiseuxPoly, order: u32) -> Self {
        let trust = ExtRat::finite(rat_i(order as i64));
        let poly = poly.truncate_total_degree(&rat_i(order as i64));
        Germ { poly, exactness: Exactness::TruncatedAtOrder(order), trust }
    }

    pub fn is_exact(&self) -> bool {
        self.exactness.is_exact()
    }

    fn clipped(mut self) -> Self {
        if let ExtRat::Finite(t) = &self.trust {
            self.poly = self.poly.truncate_total_degree(&t.clone());
        }
        self
    }

    fn merge_exactness(&self, other: &Self) -> Exactness {
        match (&self.exactness, &other.exactness) {
            (Exactness::Exact, Exactness::Exact) => Exactness::Exact,
            (Exactness::TruncatedAtOrder(a), Exactness::TruncatedAtOrder(b)) => {
                Exactness::TruncatedAtOrder(*a.min(b))
            }
            (Exactness::TruncatedAtOrder(a), _) | (_, Exactness::TruncatedAtOrder(a)) => {
                Exactness::TruncatedAtOrder(*a)
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, crate::puiseux::PuiseuxError> {
        let trust = self.trust.clone().min(other.trust.clone());
        Ok(Germ {
            poly: self.poly.add(&other.poly)?,
            exactness: self.merge_exactness(other),
            trust,
        }
        .clipped())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, crate::puiseux::PuiseuxError> {
        let negated = Germ {
            poly: other.poly.neg(),
            exactness: other.exactness.clone(),
            trust: other.trust.clone(),
        };
        self.add(&negated)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, crate::puiseux::PuiseuxError> {
        // An unknown tail of one factor multiplies the lowest stored term of
        // the other, so the product is trusted to min(Ta + ord_b, Tb + ord_a).
        let trust = match (&self.trust, &other.trust) {
            (ExtRat::Infinity, ExtRat::Infinity) => ExtRat::Infinity,
            _ => {
                let ord_a = self.poly.min_total_degree().unwrap_or_else(|| rat_i(0));
                let ord_b = other.poly.min_total_degree().unwrap_or_else(|| rat_i(0));
                let ta = match &self.trust {
                    ExtRat::Infinity => ExtRat::Infinity,
                    ExtRat::Finite(t) => ExtRat::finite(t + &ord_b),
                };
                let tb = match &other.trust {
                    ExtRat::Infinity => ExtRat::Infinity,
                    ExtRat::Finite(t) => ExtRat::finite(t + &ord_a),
                };
                ta.min(tb)
            }
        };
        Ok(Germ {
            poly: self.poly.mul(&other.poly)?,
            exactness: self.merge_exactness(other),
            trust,
        }
        .clipped())
    }

    pub fn d_theta(&self) -> Self {
        let trust = match &self.trust {
            ExtRat::Infinity => ExtRat::Infinity,
            ExtRat::Finite(t) => ExtRat::finite(t - rat_i(1)),
        };
        Germ { poly: self.poly.d_theta(), exactness: self.exactness.clone(), trust }.clipped()
    }

    pub fn d_v(&self) -> Self {
        let trust = match &self.trust {
            ExtRat::Infinity => ExtRat::Infinity,
            ExtRat::Finite(t) => ExtRat::finite(t - rat_i(1)),
        };
        Germ { poly: self.poly.d_v(), exactness: self.exactness.clone(), trust }.clipped()
    }

    pub fn nth_d_theta(&self, n: u32) -> Self {
        let mut g = self.clone();
        for _ in 0..n {
            g = g.d_theta();
        }
        g
    }

    fn shift_trust(&self, w: &Rat) -> ExtRat {
        match &self.trust {
            ExtRat::Infinity => ExtRat::Infinity,
            ExtRat::Finite(t) => {
                if w >= &rat_i(1) {
                    ExtRat::finite(t.clone())
                } else {
                    // An error monomial (p', q') with p'+q' > T maps to total
                    // degrees at least w * (p'+q'), so only w*T is trusted.
                    ExtRat::finite(t * w)
                }
            }
        }
    }

    pub fn substitute_theta_shift(
        &self,
        r: &Coefficient,
        w: &Rat,
    ) -> Result<Self, crate::puiseux::PuiseuxError> {
        let trust = self.shift_trust(w);
        Ok(Germ {
            poly: self.poly.substitute_theta_shift(r, w)?,
            exactness: self.exactness.clone(),
            trust,
        }
        .clipped())
    }

    pub fn substitute_theta_series(
        &self,
        h: &PuiseuxPoly,
    ) -> Result<Self, crate::puiseux::PuiseuxError> {
        let w0 = h.min_total_degree().unwrap_or_else(|| rat_i(1));
        let trust = self.shift_trust(&w0);
        Ok(Germ {
            poly: self.poly.substitute_theta_series(h)?,
            exactness: self.exactness.clone(),
            trust,
        }
        .clipped())
    }

    pub fn rescale_v(&self, m: u32) -> Self {
        let trust = match &self.trust {
            ExtRat::Infinity => ExtRat::Infinity,
            // Exponents only grow, so the trusted window scales up with m.
            ExtRat::Finite(t) => ExtRat::finite(t * rat_i(m as i64)),
        };
        Germ { poly: self.poly.rescale_v(m), exactness: self.exactness.clone(), trust }
    }

    pub fn to_approx(&self) -> Self {
        Germ {
            poly: self.poly.to_approx(),
            exactness: self.exactness.clone(),
            trust: self.trust.clone(),
        }
    }
}

/// Expand an AST into an exact polynomial of total degree at most `order`.
pub fn expand(ast: &ExprAst, order: u32) -> Result<Germ, ExprError> {
    assert!(order >= 2, "expansion order must be at least 2");
    let cap = rat_i(order as i64);
    let poly = expand_rec(ast, &cap);
    if ast.has_exp() {
        Ok(Germ::truncated(poly, order))
    } else {
        Ok(Germ::exact(poly))
    }
}

fn expand_rec(ast: &ExprAst, cap: &Rat) -> PuiseuxPoly {
    match ast {
        ExprAst::Num(c) => {
            PuiseuxPoly::monomial(Coefficient::Rat(c.clone()), ExpPair::int(0, 0))
        }
        ExprAst::V => PuiseuxPoly::monomial(Coefficient::one(), ExpPair::int(1, 0)),
        ExprAst::Theta => PuiseuxPoly::monomial(Coefficient::one(), ExpPair::int(0, 1)),
        ExprAst::Add(a, b) => {
            expand_rec(a, cap).add(&expand_rec(b, cap)).unwrap().truncate_total_degree(cap)
        }
        ExprAst::Sub(a, b) => {
            expand_rec(a, cap).sub(&expand_rec(b, cap)).unwrap().truncate_total_degree(cap)
        }
        ExprAst::Mul(a, b) => {
            expand_rec(a, cap).mul(&expand_rec(b, cap)).unwrap().truncate_total_degree(cap)
        }
        ExprAst::Pow(a, n) => {
            let base = expand_rec(a, cap);
            let mut acc = PuiseuxPoly::monomial(Coefficient::one(), ExpPair::int(0, 0));
            for _ in 0..*n {
                acc = acc.mul(&base).unwrap().truncate_total_degree(cap);
            }
            acc
        }
        ExprAst::Neg(a) => expand_rec(a, cap).neg(),
        ExprAst::Exp(a) => {
            let u = expand_rec(a, cap);
            // u vanishes at the origin, so u^k has min degree >= k and the
            // series stops contributing past k = order.
            let order = cap.to_integer().to_u32().unwrap();
            let mut acc = PuiseuxPoly::monomial(Coefficient::one(), ExpPair::int(0, 0));
            let mut upow = PuiseuxPoly::monomial(Coefficient::one(), ExpPair::int(0, 0));
            let mut kfact = Rat::from_integer(1.into());
            for k in 1..=order {
                upow = upow.mul(&u).unwrap().truncate_total_degree(cap);
                if upow.is_zero() {
                    break;
                }
                kfact = kfact * rat_i(k as i64);
                let inv = Rat::from_integer(1.into()) / &kfact;
                acc = acc.add(&upow.scale(&inv)).unwrap();
            }
            acc.truncate_total_degree(cap)
        }
    }
}

/// Enforce the normal form: drop the constant and the bare-theta coefficient,
/// then require a mixed monomial `v^p theta^q` with `p >= 1`, `q >= 1`.
pub fn normalize(germ: &Germ) -> Result<Germ, ExprError> {
    if germ.poly.is_zero() {
        return Err(ExprError::EmptySupport);
    }
    let mut poly = germ.poly.clone();
    let dropped: Vec<ExpPair> = poly
        .support()
        .into_iter()
        .filter(|e| (e.p.is_zero() && e.q == 0) || (e.p.is_zero() && e.q == 1))
        .collect();
    if !dropped.is_empty() {
        let mut out = PuiseuxPoly::zero();
        for (e, c) in poly.terms() {
            if !dropped.contains(e) {
                out.add_term(e.clone(), c.clone()).unwrap();
            }
        }
        poly = out;
    }
    if poly.is_zero() {
        return Err(ExprError::EmptySupport);
    }
    let has_mixed = poly
        .support()
        .iter()
        .any(|e| e.p >= rat_i(1) && e.q >= 1);
    if !has_mixed {
        return Err(ExprError::DegenerateInput);
    }
    Ok(Germ { poly, exactness: germ.exactness.clone(), trust: germ.trust.clone() })
}

/// Parse, expand and normalize in one step.
pub fn germ_from_text(text: &str, order: u32) -> Result<Germ, ExprError> {
    let ast = parse(text)?;
    let germ = expand(&ast, order)?;
    normalize(&germ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn parse_golden() {
        let ast = parse("(theta - v)^3 * v + v^3").unwrap();
        assert!(matches!(ast, ExprAst::Add(_, _)));
        assert!(!ast.has_exp());

        let ast = parse("v*(exp(theta)-1)").unwrap();
        assert!(ast.has_exp());
    }

    #[test]
    fn parse_errors() {
        match parse("v^(1/2)") {
            Err(ExprError::NonIntegerExponent { offset }) => assert_eq!(offset, 2),
            other => panic!("expected NonIntegerExponent, got {other:?}"),
        }
        match parse("v^1/2") {
            // `1/2` lexes as a single rational literal
            Err(ExprError::NonIntegerExponent { offset }) => assert_eq!(offset, 2),
            other => panic!("expected NonIntegerExponent, got {other:?}"),
        }
        assert!(matches!(parse("exp(1+theta)"), Err(ExprError::ExpNonVanishing { .. })));
        assert!(matches!(parse("v +"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("w"), Err(ExprError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn expansion_golden() {
        // (theta-v)^3 v + v^3 -> v theta^3 - 3 v^2 theta^2 + 3 v^3 theta - v^4 + v^3
        let germ = expand(&parse("(theta - v)^3 * v + v^3").unwrap(), 8).unwrap();
        assert!(germ.is_exact());
        let p = &germ.poly;
        assert_eq!(p.num_terms(), 5);
        assert!(p.coeff(&ExpPair::int(1, 3)).equals(&Coefficient::from_i64(1)));
        assert!(p.coeff(&ExpPair::int(2, 2)).equals(&Coefficient::from_i64(-3)));
        assert!(p.coeff(&ExpPair::int(3, 1)).equals(&Coefficient::from_i64(3)));
        assert!(p.coeff(&ExpPair::int(4, 0)).equals(&Coefficient::from_i64(-1)));
        assert!(p.coeff(&ExpPair::int(3, 0)).equals(&Coefficient::from_i64(1)));
    }

    #[test]
    fn expansion_exp() {
        // v(e^theta - 1) at order 4 -> v theta + v theta^2/2 + v theta^3/6
        let germ = expand(&parse("v*(exp(theta)-1)").unwrap(), 4).unwrap();
        assert_eq!(germ.exactness, Exactness::TruncatedAtOrder(4));
        let p = &germ.poly;
        assert_eq!(p.num_terms(), 3);
        assert!(p.coeff(&ExpPair::int(1, 1)).equals(&Coefficient::from_i64(1)));
        assert!(p.coeff(&ExpPair::int(1, 2)).equals(&Coefficient::Rat(rat(1, 2))));
        assert!(p.coeff(&ExpPair::int(1, 3)).equals(&Coefficient::Rat(rat(1, 6))));
    }

    #[test]
    fn normalize_rules() {
        // v + v theta^2 unchanged
        let g = expand(&parse("v + v*theta^2").unwrap(), 6).unwrap();
        let n = normalize(&g).unwrap();
        assert_eq!(n.poly.num_terms(), 2);

        // 1 + theta + v theta -> v theta
        let g = expand(&parse("1 + theta + v*theta").unwrap(), 6).unwrap();
        let n = normalize(&g).unwrap();
        assert_eq!(n.poly.num_terms(), 1);
        assert!(n.poly.coeff(&ExpPair::int(1, 1)).equals(&Coefficient::one()));

        // theta^2 violates the mixed-monomial assumption
        let g = expand(&parse("theta^2").unwrap(), 6).unwrap();
        assert!(matches!(normalize(&g), Err(ExprError::DegenerateInput)));

        // zero expression
        let g = expand(&parse("v - v").unwrap(), 6).unwrap();
        assert!(matches!(normalize(&g), Err(ExprError::EmptySupport)));
    }

    #[test]
    fn normalize_idempotent() {
        let g = expand(&parse("1 + theta + v*theta + v^2*theta^3").unwrap(), 8).unwrap();
        let n1 = normalize(&g).unwrap();
        let n2 = normalize(&n1).unwrap();
        assert_eq!(n1.poly.support(), n2.poly.support());
    }

    #[test]
    fn round_trip_evaluation() {
        let texts = [
            "(theta - v)^3 * v + v^3",
            "v*(exp(theta)-1)",
            "(theta + exp(v) - 1)^3 * v + v^2",
        ];
        for text in texts {
            let ast = parse(text).unwrap();
            let germ = expand(&ast, 12).unwrap();
            let bound = truncation_tail_bound(&ast, 12, 0.1);
            for (v, t) in [(0.1, 0.1), (0.05, -0.1), (-0.08, 0.03), (0.0, 0.1)] {
                let direct = ast.evaluate_f64(v, t);
                let expanded = germ.poly.evaluate_f64(v, t).unwrap();
                assert!(
                    (direct - expanded).abs() <= bound + 1e-12,
                    "{text} at ({v},{t}): direct {direct}, expanded {expanded}, bound {bound}"
                );
            }
        }
    }
}
