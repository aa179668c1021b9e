//! Text form of superpositions (`.nbl` files).
//!
//! ```text
//! program       := [ 'bits' INT ';' ] superposition
//! superposition := ['+'|'-'] term (('+'|'-') term)*
//! term          := [INT '*'] factor ('*' factor)*
//! factor        := ref | '(' superposition ')' | builtin
//! ref           := 'R' INT '_' ('0'|'1')
//! builtin       := ('U' | 'EVEN' | 'ODD') [ '(' INT ')' ]
//! ```
//!
//! Whitespace is insignificant and `#` starts a line comment. A bare builtin
//! (`U` without an argument) spans the declared system size. The optional
//! leading `INT '*'` carries integer coefficients so that every [`Expr`] has
//! a text form.

use std::collections::HashMap;

use thiserror::Error;

use crate::error::Result;
use crate::expr::{build_parity, Expr, Node};
use crate::reference::WireId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A parsed program: the declared (or inferred) system size and its expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Superposition {
    pub bits: u32,
    pub expr: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Builtin {
    Universe,
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Bits,
    Int(u64),
    Semi,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Ref(WireId),
    Builtin(Builtin),
    Eof,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Bits => "`bits`".into(),
        Tok::Int(n) => format!("integer {n}"),
        Tok::Semi => "`;`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Ref(w) => format!("wire {w}"),
        Tok::Builtin(_) => "builtin".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn err(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError { line: pos.line, column: pos.column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            ';' => Some(Tok::Semi),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, pos));
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| err(pos, format!("integer {s} is too large")))?;
            out.push((Tok::Int(n), pos));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push((word_token(&word, pos)?, pos));
        } else {
            return Err(err(pos, format!("unexpected character {c:?}")));
        }
        col += i - start;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

fn word_token(word: &str, pos: Pos) -> Result<Tok, ParseError> {
    match word {
        "bits" => return Ok(Tok::Bits),
        "U" => return Ok(Tok::Builtin(Builtin::Universe)),
        "EVEN" => return Ok(Tok::Builtin(Builtin::Even)),
        "ODD" => return Ok(Tok::Builtin(Builtin::Odd)),
        _ => {}
    }
    let bad = || err(pos, format!("unknown identifier `{word}`; wires are written R<bit>_<0|1>"));
    let rest = word.strip_prefix('R').ok_or_else(bad)?;
    let (k, v) = rest.split_once('_').ok_or_else(bad)?;
    if k.is_empty() || !k.bytes().all(|b| b.is_ascii_digit()) || (v != "0" && v != "1") {
        return Err(bad());
    }
    let k: u32 = k.parse().map_err(|_| err(pos, format!("bit index in `{word}` is too large")))?;
    WireId::try_new(k, if v == "1" { 1 } else { 0 }).map(Tok::Ref).ok_or_else(|| err(pos, "bit indices start at 1"))
}

#[derive(Debug)]
enum Ast {
    Ref(WireId, Pos),
    Builtin(Builtin, Option<u32>, Pos),
    Sum(Vec<(i64, Ast)>),
    Product(Vec<Ast>),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(pos)
        } else {
            Err(err(pos, format!("expected {}, found {}", describe(&want), describe(&tok))))
        }
    }

    fn int(&mut self) -> Result<(u64, Pos), ParseError> {
        match self.bump() {
            (Tok::Int(n), pos) => Ok((n, pos)),
            (tok, pos) => Err(err(pos, format!("expected integer, found {}", describe(&tok)))),
        }
    }

    fn header(&mut self) -> Result<Option<u32>, ParseError> {
        if *self.peek() != Tok::Bits {
            return Ok(None);
        }
        self.bump();
        let (n, pos) = self.int()?;
        let bits = u32::try_from(n).ok().filter(|&b| b >= 1).ok_or_else(|| err(pos, "`bits` must be at least 1"))?;
        self.expect(Tok::Semi)?;
        Ok(Some(bits))
    }

    fn superposition(&mut self) -> Result<Ast, ParseError> {
        let mut terms = Vec::new();
        let mut sign = match self.peek() {
            Tok::Minus => {
                self.bump();
                -1
            }
            Tok::Plus => {
                self.bump();
                1
            }
            _ => 1,
        };
        loop {
            let (coef, term) = self.term()?;
            terms.push((sign * coef, term));
            sign = match self.peek() {
                Tok::Plus => 1,
                Tok::Minus => -1,
                _ => break,
            };
            self.bump();
        }
        if terms.len() == 1 && terms[0].0 == 1 {
            return Ok(terms.pop().expect("one term").1);
        }
        Ok(Ast::Sum(terms))
    }

    fn term(&mut self) -> Result<(i64, Ast), ParseError> {
        let mut coef = 1i64;
        if let Tok::Int(n) = *self.peek() {
            let pos = self.pos();
            self.bump();
            coef = i64::try_from(n).map_err(|_| err(pos, "coefficient too large"))?;
            if coef == 0 {
                return Err(err(pos, "coefficients must be nonzero"));
            }
            self.expect(Tok::Star)?;
        }
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.factor()?);
        }
        let ast = if factors.len() == 1 { factors.pop().expect("one factor") } else { Ast::Product(factors) };
        Ok((coef, ast))
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        match self.bump() {
            (Tok::Ref(w), pos) => Ok(Ast::Ref(w, pos)),
            (Tok::LParen, _) => {
                let inner = self.superposition()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            (Tok::Builtin(b), pos) => {
                if *self.peek() != Tok::LParen {
                    return Ok(Ast::Builtin(b, None, pos));
                }
                self.bump();
                let (n, npos) = self.int()?;
                let n = u32::try_from(n)
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| err(npos, "builtin size must be at least 1"))?;
                self.expect(Tok::RParen)?;
                Ok(Ast::Builtin(b, Some(n), pos))
            }
            (tok, pos) => Err(err(pos, format!("expected a wire, `(` or builtin, found {}", describe(&tok)))),
        }
    }
}

fn inferred_bits(ast: &Ast) -> u32 {
    match ast {
        Ast::Ref(w, _) => w.bit_index(),
        Ast::Builtin(_, n, _) => n.unwrap_or(0),
        Ast::Sum(t) => t.iter().map(|(_, a)| inferred_bits(a)).max().unwrap_or(0),
        Ast::Product(f) => f.iter().map(inferred_bits).max().unwrap_or(0),
    }
}

struct Lowering {
    bits: Option<u32>,
    builtins: HashMap<(Builtin, u32), Expr>,
}

impl Lowering {
    fn lower(&mut self, ast: &Ast) -> Result<Expr, ParseError> {
        match ast {
            Ast::Ref(w, pos) => {
                if let Some(m) = self.bits {
                    if w.bit_index() > m {
                        return Err(err(*pos, format!("bit index {} in {w} exceeds declared size {m}", w.bit_index())));
                    }
                }
                Ok(Expr::wire(*w))
            }
            Ast::Builtin(b, n, pos) => {
                let size = match (n, self.bits) {
                    (Some(n), Some(m)) if *n > m => {
                        return Err(err(*pos, format!("builtin over {n} bits exceeds declared size {m}")))
                    }
                    (Some(n), _) => *n,
                    (None, Some(m)) => m,
                    (None, None) => return Err(err(*pos, "bare builtin needs a `bits M;` header")),
                };
                if let Some(e) = self.builtins.get(&(*b, size)) {
                    return Ok(e.clone());
                }
                let set = build_parity(size).map_err(|e| err(*pos, e.to_string()))?;
                let e = match b {
                    Builtin::Universe => set.universe,
                    Builtin::Even => set.even,
                    Builtin::Odd => set.odd,
                };
                self.builtins.insert((*b, size), e.clone());
                Ok(e)
            }
            Ast::Sum(terms) => {
                let terms = terms.iter().map(|(c, a)| Ok((*c, self.lower(a)?))).collect::<Result<_, ParseError>>()?;
                Ok(Expr::sum(terms).expect("parser never yields empty sums or zero coefficients"))
            }
            Ast::Product(factors) => {
                let factors = factors.iter().map(|a| self.lower(a)).collect::<Result<_, ParseError>>()?;
                Ok(Expr::product(factors).expect("parser never yields empty products"))
            }
        }
    }
}

/// Parses a program; the system size comes from the `bits` header or, when
/// absent, from the largest bit index mentioned.
pub fn parse_dsl(text: &str) -> Result<Superposition> {
    parse_dsl_with_bits(text, None)
}

/// Parses a program against an externally supplied system size. A header, if
/// present, must agree with `bits`.
pub fn parse_dsl_with_bits(text: &str, bits: Option<u32>) -> Result<Superposition> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let header_pos = p.pos();
    let header = p.header()?;
    let declared = match (header, bits) {
        (Some(h), Some(b)) if h != b => {
            return Err(err(header_pos, format!("header declares {h} bits but {b} were requested")).into())
        }
        (h, b) => h.or(b),
    };
    let ast = p.superposition()?;
    if *p.peek() != Tok::Eof {
        let (tok, pos) = p.bump();
        return Err(err(pos, format!("unexpected {} after expression", describe(&tok))).into());
    }
    let mut lowering = Lowering { bits: declared, builtins: HashMap::new() };
    let expr = lowering.lower(&ast)?;
    let bits = declared.unwrap_or_else(|| inferred_bits(&ast));
    Ok(Superposition { bits, expr })
}

fn min_bit(e: &Expr) -> u32 {
    match e.node() {
        Node::Ref(w) => w.bit_index(),
        Node::Sum(t) => t.iter().map(|(_, x)| min_bit(x)).min().unwrap_or(0),
        Node::Product(f) => f.iter().map(min_bit).min().unwrap_or(0),
    }
}

/// Strips the wrappers the parser also unwraps: a lone coefficient-1 term
/// and a lone factor.
fn peel(mut e: &Expr) -> &Expr {
    loop {
        match e.node() {
            Node::Sum(t) if t.len() == 1 && t[0].0 == 1 => e = &t[0].1,
            Node::Product(f) if f.len() == 1 => e = &f[0],
            _ => return e,
        }
    }
}

fn format_factor(e: &Expr) -> String {
    let e = peel(e);
    match e.node() {
        Node::Ref(w) => w.to_string(),
        _ => format!("({})", format_dsl(e)),
    }
}

fn format_term_body(e: &Expr) -> String {
    let e = peel(e);
    match e.node() {
        Node::Ref(w) => w.to_string(),
        Node::Sum(_) => format!("({})", format_dsl(e)),
        Node::Product(factors) => {
            let mut parts: Vec<(u32, String)> = factors.iter().map(|f| (min_bit(f), format_factor(f))).collect();
            parts.sort();
            parts.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join("*")
        }
    }
}

/// Canonical text of `expr` (no header): factors by ascending bit index, sum
/// terms in lexicographic order. Shared nodes are written out at each use.
pub fn format_dsl(expr: &Expr) -> String {
    let expr = peel(expr);
    let Node::Sum(terms) = expr.node() else {
        return format_term_body(expr);
    };
    let mut parts: Vec<(String, i64)> = terms.iter().map(|(c, e)| (format_term_body(e), *c)).collect();
    parts.sort();
    let mut out = String::new();
    for (i, (body, c)) in parts.iter().enumerate() {
        let sign = if *c < 0 { "-" } else { "+" };
        match (i, *c < 0) {
            (0, false) => {}
            (0, true) => out.push('-'),
            _ => {
                out.push(' ');
                out.push_str(sign);
                out.push(' ');
            }
        }
        let mag = c.unsigned_abs();
        if mag != 1 {
            out.push_str(&format!("{mag}*"));
        }
        out.push_str(body);
    }
    out
}

/// Canonical text with a `bits` header.
pub fn format_program(bits: u32, expr: &Expr) -> String {
    format!("bits {bits};\n{}\n", format_dsl(expr))
}
