//! A small text format for recurrence specifications.
//!
//! ```text
//! gamma: x + 1; m: 2;
//! lag: {s: 2, coeff: x, binom: true};
//! start: {index: 0, poly: 1};
//! ```
//!
//! or a catalog invocation such as `family: dowling(m=2);`. Statements are
//! `key: value;`. Polynomials are sums of terms like `3x^2`, `x`, `-1/2 x^3`;
//! rationals are written `p/q`. `#` starts a comment running to end of line.
//! Defaults: start index 0, start polynomial 1, no lags.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::ExactPolynomial;
use crate::families::{self, FamilyDescriptor, FamilyParams};
use crate::recurrence::{LagTerm, RecurrenceSpec};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecSource {
    pub text: String,
    pub origin: String,
}

impl SpecSource {
    pub fn inline(text: impl Into<String>) -> Self {
        Self { text: text.into(), origin: "<inline>".into() }
    }

    pub fn file(origin: impl Into<String>, text: impl Into<String>) -> Self {
        Self { text: text.into(), origin: origin.into() }
    }
}

/// A rejection, located at a 1-based line and column (counted in characters)
/// and a byte offset into the source.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{origin}:{line}:{column}: {message}")]
pub struct ParseError {
    pub message: String,
    pub origin: String,
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

/// A `family:` statement, already checked against the catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyRequest {
    pub name: String,
    pub params: FamilyParams,
}

impl FamilyRequest {
    pub fn resolve(&self) -> crate::Result<FamilyDescriptor> {
        families::catalog(&self.name, &self.params)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parsed {
    Spec(RecurrenceSpec),
    Family(FamilyRequest),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Colon,
    Semi,
    Comma,
    Slash,
    Plus,
    Minus,
    Caret,
    Eq,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Eof => f.write_str("end of input"),
            other => {
                let c = match other {
                    Tok::Colon => ':',
                    Tok::Semi => ';',
                    Tok::Comma => ',',
                    Tok::Slash => '/',
                    Tok::Plus => '+',
                    Tok::Minus => '-',
                    Tok::Caret => '^',
                    Tok::Eq => '=',
                    Tok::LBrace => '{',
                    Tok::RBrace => '}',
                    Tok::LParen => '(',
                    _ => ')',
                };
                write!(f, "`{c}`")
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, (String, usize)> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            while chars.next_if(|&(_, c)| c != '\n').is_some() {}
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = i;
            while let Some((j, d)) = chars.next_if(|&(_, d)| d.is_ascii_digit()) {
                end = j + d.len_utf8();
            }
            let value = text[i..end].parse::<BigInt>().expect("digits");
            out.push(Token { tok: Tok::Int(value), offset: i });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = i;
            while let Some((j, d)) = chars.next_if(|&(_, d)| d.is_alphanumeric() || d == '_') {
                end = j + d.len_utf8();
            }
            out.push(Token { tok: Tok::Ident(text[i..end].to_string()), offset: i });
            continue;
        }
        let tok = match c {
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '/' => Tok::Slash,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '^' => Tok::Caret,
            '=' => Tok::Eq,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => return Err((format!("unexpected character `{other}`"), i)),
        };
        chars.next();
        out.push(Token { tok, offset: i });
    }
    out.push(Token { tok: Tok::Eof, offset: text.len() });
    Ok(out)
}

struct Parser<'a> {
    src: &'a SpecSource,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn error_at(&self, offset: usize, message: impl Into<String>) -> ParseError {
        let before = &self.src.text[..offset.min(self.src.text.len())];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = before[line_start..].chars().count() + 1;
        ParseError {
            message: message.into(),
            origin: self.src.origin.clone(),
            line,
            column,
            offset,
        }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        self.error_at(t.offset, format!("expected {expected}, found {}", t.tok))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, usize)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let off = self.bump().offset;
                Ok((s, off))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn signed_int(&mut self) -> PResult<(BigInt, usize)> {
        let start = self.peek().offset;
        let negative = match self.peek().tok {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        match &self.peek().tok {
            Tok::Int(v) => {
                let v = if negative { -v.clone() } else { v.clone() };
                self.bump();
                Ok((v, start))
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn small_uint(&mut self, what: &str) -> PResult<(usize, usize)> {
        let (v, off) = self.signed_int()?;
        match v.to_usize() {
            Some(u) => Ok((u, off)),
            None => Err(self.error_at(off, format!("{what} must be a non-negative integer, got {v}"))),
        }
    }

    /// `int ['/' int]`, no sign.
    fn unsigned_rational(&mut self) -> PResult<Rational> {
        let Tok::Int(num) = self.peek().tok.clone() else {
            return Err(self.unexpected("a number"));
        };
        self.bump();
        if self.peek().tok != Tok::Slash {
            return Ok(Rational::from_integer(num));
        }
        self.bump();
        let den_tok = self.peek().clone();
        let Tok::Int(den) = den_tok.tok else {
            return Err(self.unexpected("a denominator"));
        };
        if den.is_zero() {
            return Err(self.error_at(den_tok.offset, "zero denominator"));
        }
        self.bump();
        Ok(Rational::new(num, den))
    }

    fn signed_rational(&mut self) -> PResult<(Rational, usize)> {
        let start = self.peek().offset;
        let negative = match self.peek().tok {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let v = self.unsigned_rational()?;
        Ok((if negative { -v } else { v }, start))
    }

    fn polynomial(&mut self) -> PResult<(ExactPolynomial, usize)> {
        let start = self.peek().offset;
        let mut acc = ExactPolynomial::zero();
        let mut first = true;
        loop {
            let sign = match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    Some(false)
                }
                Tok::Minus => {
                    self.bump();
                    Some(true)
                }
                _ => None,
            };
            if sign.is_none() && !first {
                break;
            }
            first = false;
            let mut term = self.term()?;
            if sign == Some(true) {
                term = -term;
            }
            acc = &acc + &term;
        }
        Ok((acc, start))
    }

    fn term(&mut self) -> PResult<ExactPolynomial> {
        let coeff = match self.peek().tok {
            Tok::Int(_) => Some(self.unsigned_rational()?),
            _ => None,
        };
        let power = match &self.peek().tok {
            Tok::Ident(v) if v == "x" => {
                self.bump();
                if self.peek().tok == Tok::Caret {
                    self.bump();
                    let tok = self.peek().clone();
                    match tok.tok {
                        Tok::Int(p) => {
                            self.bump();
                            Some(p.to_usize().filter(|&p| p <= 10_000).ok_or_else(|| {
                                self.error_at(tok.offset, format!("exponent {p} is too large"))
                            })?)
                        }
                        _ => return Err(self.unexpected("an exponent")),
                    }
                } else {
                    Some(1)
                }
            }
            Tok::Ident(v) => {
                let msg = format!("unknown variable `{v}`; polynomials are in x");
                return Err(self.error_at(self.peek().offset, msg));
            }
            _ => None,
        };
        match (coeff, power) {
            (None, None) => Err(self.unexpected("a polynomial term")),
            (c, p) => Ok(ExactPolynomial::monomial(
                c.unwrap_or_else(|| Rational::from_integer(1.into())),
                p.unwrap_or(0),
            )),
        }
    }

    fn boolean(&mut self) -> PResult<bool> {
        match &self.peek().tok {
            Tok::Ident(v) if v == "true" => {
                self.bump();
                Ok(true)
            }
            Tok::Ident(v) if v == "false" => {
                self.bump();
                Ok(false)
            }
            _ => Err(self.unexpected("`true` or `false`")),
        }
    }

    /// `{ key: value, ... }`; `field` parses one value by key.
    fn object(
        &mut self,
        keys: &[&str],
        mut field: impl FnMut(&mut Self, &str) -> PResult<()>,
    ) -> PResult<usize> {
        let open = self.expect(Tok::LBrace)?.offset;
        let mut seen: Vec<String> = Vec::new();
        while self.peek().tok != Tok::RBrace {
            let (key, off) = self.ident("a field name")?;
            if !keys.contains(&key.as_str()) {
                return Err(self.error_at(off, format!("unknown field `{key}`; expected one of {}", keys.join(", "))));
            }
            if seen.contains(&key) {
                return Err(self.error_at(off, format!("duplicate field `{key}`")));
            }
            self.expect(Tok::Colon)?;
            field(self, &key)?;
            seen.push(key);
            if self.peek().tok == Tok::Comma {
                self.bump();
            } else if self.peek().tok != Tok::RBrace {
                return Err(self.unexpected("`,` or `}`"));
            }
        }
        let close = self.bump().offset;
        if let Some(missing) = keys.iter().find(|k| !seen.iter().any(|s| s == *k)) {
            let _ = open;
            return Err(self.error_at(close, format!("missing field `{missing}`")));
        }
        Ok(open)
    }

    fn family(&mut self) -> PResult<FamilyRequest> {
        let (name, name_off) = self.ident("a family name")?;
        let Some(info) = families::FAMILIES.iter().find(|f| f.name == name) else {
            return Err(self.error_at(name_off, format!("unknown family `{name}`")));
        };
        self.expect(Tok::LParen)?;
        let mut params = BTreeMap::new();
        while self.peek().tok != Tok::RParen {
            let (key, key_off) = self.ident("a parameter name")?;
            if !info.params.contains(&key.as_str()) {
                return Err(self.error_at(key_off, format!("{name} has no parameter `{key}`")));
            }
            if params.contains_key(&key) {
                return Err(self.error_at(key_off, format!("duplicate parameter `{key}`")));
            }
            self.expect(Tok::Eq)?;
            let (v, v_off) = self.signed_int()?;
            let v = v.to_i64().ok_or_else(|| self.error_at(v_off, "parameter out of range"))?;
            params.insert(key, v);
            if self.peek().tok == Tok::Comma {
                self.bump();
            } else if self.peek().tok != Tok::RParen {
                return Err(self.unexpected("`,` or `)`"));
            }
        }
        let close = self.bump().offset;
        for (key, default) in info.params.iter().zip(info.defaults) {
            params.entry(key.to_string()).or_insert(*default);
        }
        let request = FamilyRequest { name, params };
        if let Err(e) = request.resolve() {
            let at = match &e {
                crate::Error::InvalidParameter(msg) => request
                    .params
                    .keys()
                    .find(|k| msg.contains(&format!(" {k} ")))
                    .and_then(|k| self.find_param_value(name_off, close, k))
                    .unwrap_or(name_off),
                _ => name_off,
            };
            return Err(self.error_at(at, e.to_string()));
        }
        Ok(request)
    }

    fn find_param_value(&self, from: usize, to: usize, key: &str) -> Option<usize> {
        let toks: Vec<&Token> =
            self.toks.iter().filter(|t| t.offset >= from && t.offset <= to).collect();
        toks.windows(3).find_map(|w| match (&w[0].tok, &w[1].tok) {
            (Tok::Ident(k), Tok::Eq) if k == key => Some(w[2].offset),
            _ => None,
        })
    }

    fn parse(&mut self) -> PResult<Parsed> {
        let mut gamma: Option<ExactPolynomial> = None;
        let mut m: Option<Rational> = None;
        let mut lags: Vec<LagTerm> = Vec::new();
        let mut start: Option<(usize, ExactPolynomial)> = None;
        let mut family: Option<FamilyRequest> = None;
        let mut first_key: Option<(String, usize)> = None;

        if self.peek().tok == Tok::Eof {
            return Err(self.error_at(0, "empty specification"));
        }
        while self.peek().tok != Tok::Eof {
            let (key, key_off) = self.ident("a key")?;
            let repeated = match key.as_str() {
                "gamma" => gamma.is_some(),
                "m" => m.is_some(),
                "start" => start.is_some(),
                "family" => family.is_some(),
                "lag" => false,
                _ => {
                    return Err(self.error_at(
                        key_off,
                        format!("unknown key `{key}`; expected gamma, m, lag, start or family"),
                    ))
                }
            };
            if repeated {
                return Err(self.error_at(key_off, format!("duplicate key `{key}`")));
            }
            if let Some((prev, _)) = &first_key {
                if (key == "family") != (prev == "family") {
                    return Err(self.error_at(key_off, "`family` cannot be combined with other keys"));
                }
            } else {
                first_key = Some((key.clone(), key_off));
            }
            self.expect(Tok::Colon)?;
            match key.as_str() {
                "gamma" => gamma = Some(self.polynomial()?.0),
                "m" => {
                    let (v, off) = self.signed_rational()?;
                    if !v.is_positive() {
                        return Err(self.error_at(
                            off,
                            format!("m must be positive (hypothesis m > 0), got {v}"),
                        ));
                    }
                    m = Some(v);
                }
                "lag" => {
                    let mut depth = None;
                    let mut coeff = None;
                    let mut binom = None;
                    let open = self.object(&["s", "coeff", "binom"], |p, k| {
                        match k {
                            "s" => {
                                let (s, off) = p.small_uint("lag depth")?;
                                if s == 0 {
                                    return Err(p.error_at(off, "lag depth must be at least 1"));
                                }
                                if lags.iter().any(|l| l.depth == s) {
                                    return Err(p.error_at(off, format!("duplicate lag depth {s}")));
                                }
                                depth = Some(s);
                            }
                            "coeff" => coeff = Some(p.polynomial()?.0),
                            _ => binom = Some(p.boolean()?),
                        }
                        Ok(())
                    })?;
                    let lag = LagTerm::new(depth.unwrap(), coeff.unwrap(), binom.unwrap())
                        .map_err(|e| self.error_at(open, e.to_string()))?;
                    lags.push(lag);
                }
                "start" => {
                    let mut index = None;
                    let mut poly = None;
                    self.object(&["index", "poly"], |p, k| {
                        if k == "index" {
                            index = Some(p.small_uint("start index")?.0);
                        } else {
                            let (q, off) = p.polynomial()?;
                            if q.is_zero() {
                                return Err(p.error_at(off, "start polynomial must be nonzero"));
                            }
                            poly = Some(q);
                        }
                        Ok(())
                    })?;
                    start = Some((index.unwrap(), poly.unwrap()));
                }
                _ => family = Some(self.family()?),
            }
            if self.peek().tok != Tok::Semi {
                return Err(self.unexpected("`;`"));
            }
            self.bump();
        }

        if let Some(f) = family {
            return Ok(Parsed::Family(f));
        }
        let end = self.src.text.len();
        let gamma = gamma.ok_or_else(|| self.error_at(end, "missing key `gamma`"))?;
        let m = m.ok_or_else(|| self.error_at(end, "missing key `m`"))?;
        let mut spec = RecurrenceSpec::new(gamma, m).map_err(|e| self.error_at(end, e.to_string()))?;
        for lag in lags {
            spec = spec.with_lag(lag).map_err(|e| self.error_at(end, e.to_string()))?;
        }
        if let Some((index, poly)) = start {
            spec = spec.with_start(index, poly).map_err(|e| self.error_at(end, e.to_string()))?;
        }
        Ok(Parsed::Spec(spec.with_label(self.src.origin.clone())))
    }
}

pub fn parse(src: &SpecSource) -> Result<Parsed, ParseError> {
    let toks = lex(&src.text).map_err(|(msg, off)| {
        Parser { src, toks: Vec::new(), pos: 0 }.error_at(off, msg)
    })?;
    Parser { src, toks, pos: 0 }.parse()
}

/// Parses and requires a plain recurrence, resolving `family:` through the
/// catalog.
pub fn parse_spec(src: &SpecSource) -> crate::Result<RecurrenceSpec> {
    match parse(src)? {
        Parsed::Spec(s) => Ok(s),
        Parsed::Family(f) => Ok(f.resolve()?.spec),
    }
}

/// Canonical rendering: gamma, m, lags by depth, then start when it differs
/// from the default `P_0 = 1`.
pub fn format(spec: &RecurrenceSpec) -> String {
    let mut out = format!("gamma: {}; m: {};", spec.gamma(), spec.m());
    for lag in spec.lags() {
        out.push_str(&format!(
            " lag: {{s: {}, coeff: {}, binom: {}}};",
            lag.depth, lag.kappa, lag.binomial
        ));
    }
    if spec.start_index() != 0 || !spec.start_poly().is_one() {
        out.push_str(&format!(
            " start: {{index: {}, poly: {}}};",
            spec.start_index(),
            spec.start_poly()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{integer, rational};
    use crate::families::{default_families, family};

    fn spec(text: &str) -> RecurrenceSpec {
        match parse(&SpecSource::inline(text)).unwrap() {
            Parsed::Spec(s) => s,
            other => panic!("expected spec, got {other:?}"),
        }
    }

    fn err(text: &str) -> ParseError {
        parse(&SpecSource::inline(text)).unwrap_err()
    }

    #[test]
    fn stirling() {
        let s = spec("gamma: x; m: 1;");
        assert!(s.equivalent(&family("stirling2", &[]).unwrap().spec));
        assert_eq!(format(&s), "gamma: x; m: 1;");
    }

    #[test]
    fn lag_statement() {
        let s = spec("gamma: 0; m: 1; lag: {s: 2, coeff: x, binom: true};");
        assert!(s.equivalent(&family("assoc_stirling", &[("s", 2)]).unwrap().spec));
        assert_eq!(format(&s), "gamma: 0; m: 1; lag: {s: 2, coeff: x, binom: true};");
    }

    #[test]
    fn family_statement() {
        let parsed = parse(&SpecSource::inline("family: dowling(m=2);")).unwrap();
        let Parsed::Family(req) = parsed else { panic!() };
        assert_eq!(req.name, "dowling");
        assert_eq!(req.params, [("m".to_string(), 2)].into());
        assert_eq!(req.resolve().unwrap().spec.gamma(), &ExactPolynomial::from_integers(&[1, 1]));
        let neg = parse(&SpecSource::inline("family: galton(m=2, c=-1);")).unwrap();
        assert!(matches!(neg, Parsed::Family(r) if r.params["c"] == -1));
    }

    #[test]
    fn polynomial_literals() {
        assert_eq!(spec("gamma: 2x + x; m: 1;").gamma(), &ExactPolynomial::from_integers(&[0, 3]));
        let g = spec("gamma: -1/2 x^3 + 3x^2 - x + 4/6; m: 1/3;");
        assert_eq!(
            g.gamma(),
            &ExactPolynomial::new(vec![rational(2, 3), integer(-1), integer(3), rational(-1, 2)])
        );
        assert_eq!(g.m(), &rational(1, 3));
        assert!(spec("gamma: x - x; m: 1;").gamma().is_zero());
    }

    #[test]
    fn comments_and_multiline() {
        let s = spec("# Whitney\ngamma: x + 1;   # c = 1\nm: 2;\nstart: {poly: 1, index: 0};\n");
        assert!(s.equivalent(&family("dowling", &[("m", 2)]).unwrap().spec));
    }

    #[test]
    fn positive_m_required() {
        let e = err("gamma: x; m: 0;");
        assert!(e.message.contains("m > 0"));
        assert_eq!((e.line, e.column), (1, 14));
        assert_eq!(err("gamma: x; m: -2;").column, 14);
    }

    #[test]
    fn positions_on_later_lines() {
        let e = err("gamma: x;\nm: 1;\nlagg: 3;");
        assert_eq!((e.line, e.column, e.offset), (3, 1, 16));
        assert!(e.to_string().starts_with("<inline>:3:1:"));
    }

    #[test]
    fn round_trip_catalog() {
        for fam in default_families() {
            let text = format(&fam.spec);
            let back = spec(&text);
            assert!(back.equivalent(&fam.spec), "{text}");
        }
    }
}
