//! Shared concrete syntax: tokens, the predicate/expression grammar, name resolution into
//! [`Formula`]/[`Term`], and the printer.
//!
//! Unicode and ASCII spellings are both accepted (`∧` `/\` `&`, `⇒` `=>`, `↦` `|->`,
//! `≤` `<=`, `≠` `!=` `/=`, `¬` `!`, `∀` `#forall`, `∃` `#exists`, `ℕ` `NAT`, `ℤ` `INT`).
//! Comments run from `//` to the end of the line.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::fopeq::{fresh_name, ArithOp, CmpOp, FopeqSignature, Formula, Sort, Term};

/// A syntax or name-resolution error.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Resolve(String),
}

impl SyntaxError {
    pub fn is_parse(&self) -> bool {
        matches!(self, SyntaxError::Parse { .. })
    }
}

fn resolve_err<T>(msg: String) -> Result<T, SyntaxError> {
    Err(SyntaxError::Resolve(msg))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(i64),
    Assign,
    Becomes,
    Colon,
    In,
    Nat,
    IntSet,
    MapsTo,
    LAngle,
    RAngle,
    Dot,
    Comma,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    And,
    Or,
    Implies,
    Iff,
    Not,
    Forall,
    Exists,
    Prime,
    Top,
    Bot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Num(n) => return write!(f, "`{n}`"),
            Tok::Assign => ":=",
            Tok::Becomes => ":|",
            Tok::Colon => ":",
            Tok::In => "∈",
            Tok::Nat => "ℕ",
            Tok::IntSet => "ℤ",
            Tok::MapsTo => "↦",
            Tok::LAngle => "⟨",
            Tok::RAngle => "⟩",
            Tok::Dot => "·",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Eq => "=",
            Tok::Neq => "≠",
            Tok::Lt => "<",
            Tok::Le => "≤",
            Tok::Gt => ">",
            Tok::Ge => "≥",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::And => "∧",
            Tok::Or => "∨",
            Tok::Implies => "⇒",
            Tok::Iff => "⇔",
            Tok::Not => "¬",
            Tok::Forall => "∀",
            Tok::Exists => "∃",
            Tok::Prime => "′",
            Tok::Top => "⊤",
            Tok::Bot => "⊥",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits source text into tokens.
pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let at = |k: usize| chars.get(i + k).copied().unwrap_or('\0');
        let starts = |s: &str| s.chars().enumerate().all(|(k, ch)| at(k) == ch);
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
        if starts("//") {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tline, col: tcol });
            *i += len;
            *col += len;
        };
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = text.parse::<i64>().map_err(|_| SyntaxError::Parse {
                line,
                col,
                msg: format!("integer literal `{text}` is out of range"),
            })?;
            push(Tok::Num(n), j - i, &mut i, &mut col);
            continue;
        }
        if c == 'ℕ' {
            push(Tok::Nat, 1, &mut i, &mut col);
            continue;
        }
        if c == 'ℤ' {
            push(Tok::IntSet, 1, &mut i, &mut col);
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') && !matches!(chars[j], 'ℕ' | 'ℤ') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = match word.as_str() {
                "NAT" => Tok::Nat,
                "INT" => Tok::IntSet,
                _ => Tok::Ident(word),
            };
            push(tok, j - i, &mut i, &mut col);
            continue;
        }
        let table: &[(&str, Tok)] = &[
            ("#forall", Tok::Forall),
            ("#exists", Tok::Exists),
            ("<=>", Tok::Iff),
            ("|->", Tok::MapsTo),
            (":=", Tok::Assign),
            (":|", Tok::Becomes),
            ("=>", Tok::Implies),
            ("<=", Tok::Le),
            (">=", Tok::Ge),
            ("!=", Tok::Neq),
            ("/=", Tok::Neq),
            ("/\\", Tok::And),
            ("\\/", Tok::Or),
            ("≔", Tok::Assign),
            (":∣", Tok::Becomes),
            (":", Tok::Colon),
            ("∈", Tok::In),
            ("↦", Tok::MapsTo),
            ("⟨", Tok::LAngle),
            ("⟩", Tok::RAngle),
            ("·", Tok::Dot),
            ("•", Tok::Dot),
            (".", Tok::Dot),
            (",", Tok::Comma),
            (";", Tok::Semi),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            ("{", Tok::LBrace),
            ("}", Tok::RBrace),
            ("=", Tok::Eq),
            ("≠", Tok::Neq),
            ("<", Tok::Lt),
            ("≤", Tok::Le),
            (">", Tok::Gt),
            ("≥", Tok::Ge),
            ("+", Tok::Plus),
            ("-", Tok::Minus),
            ("−", Tok::Minus),
            ("*", Tok::Star),
            ("∧", Tok::And),
            ("&", Tok::And),
            ("∨", Tok::Or),
            ("⇒", Tok::Implies),
            ("⇔", Tok::Iff),
            ("¬", Tok::Not),
            ("!", Tok::Not),
            ("∀", Tok::Forall),
            ("∃", Tok::Exists),
            ("′", Tok::Prime),
            ("'", Tok::Prime),
            ("⊤", Tok::Top),
            ("⊥", Tok::Bot),
        ];
        match table.iter().find(|(s, _)| starts(s)) {
            Some((s, tok)) => push(tok.clone(), s.chars().count(), &mut i, &mut col),
            None => return Err(SyntaxError::Parse { line, col, msg: format!("unexpected character `{c}`") }),
        }
    }
    Ok(out)
}

/// A position in a token slice with the usual helpers for recursive descent.
pub struct Cursor<'a> {
    toks: &'a [Token],
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token]) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.peek_at(0)
    }

    pub fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    pub fn next(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// An error located at the current token (or the end of input).
    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        let (line, col) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        };
        Err(SyntaxError::Parse { line, col, msg: msg.into() })
    }

    pub fn unexpected<T>(&self, wanted: &str) -> Result<T, SyntaxError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<(), SyntaxError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&t.to_string())
        }
    }

    /// Whether the current token is the identifier `word`.
    pub fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(w)) if w == word)
    }

    pub fn is_word_at(&self, k: usize, word: &str) -> bool {
        matches!(self.peek_at(k), Some(Tok::Ident(w)) if w == word)
    }

    pub fn eat_word(&mut self, word: &str) -> bool {
        if self.is_word(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_word(&mut self, word: &str) -> Result<(), SyntaxError> {
        if self.eat_word(word) {
            Ok(())
        } else {
            self.unexpected(&format!("`{word}`"))
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => self.unexpected("an identifier"),
        }
    }

    /// `a, b, c`
    pub fn ident_list(&mut self) -> Result<Vec<String>, SyntaxError> {
        let mut out = alloc::vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }
}

/// Relational operators of the raw grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Neq,
    Cmp(CmpOp),
    In,
}

/// Unresolved predicates and expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Name(String),
    Primed(String),
    Num(i64),
    Top,
    Bot,
    Nat,
    IntSet,
    App(String, Vec<Expr>),
    SetLit(Vec<Expr>),
    Neg(Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Rel(Rel, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Quant { forall: bool, binders: Vec<(String, Option<Expr>)>, body: Box<Expr> },
}

/// Parses one predicate or expression, stopping at the first token that cannot extend it.
pub fn parse_expr(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    iff(c)
}

fn iff(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    let a = implies(c)?;
    if c.eat(&Tok::Iff) {
        let b = implies(c)?;
        return Ok(Expr::Iff(Box::new(a), Box::new(b)));
    }
    Ok(a)
}

fn implies(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    let a = or(c)?;
    if c.eat(&Tok::Implies) {
        let b = implies(c)?;
        return Ok(Expr::Implies(Box::new(a), Box::new(b)));
    }
    Ok(a)
}

fn or(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    let mut xs = alloc::vec![and(c)?];
    while c.eat(&Tok::Or) {
        xs.push(and(c)?);
    }
    Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Expr::Or(xs) })
}

fn and(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    let mut xs = alloc::vec![not(c)?];
    while c.eat(&Tok::And) {
        xs.push(not(c)?);
    }
    Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Expr::And(xs) })
}

fn not(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    if c.eat(&Tok::Not) {
        return Ok(Expr::Not(Box::new(not(c)?)));
    }
    relational(c)
}

fn relational(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    let a = additive(c)?;
    let rel = match c.peek() {
        Some(Tok::Eq) => Rel::Eq,
        Some(Tok::Neq) => Rel::Neq,
        Some(Tok::Lt) => Rel::Cmp(CmpOp::Lt),
        Some(Tok::Le) => Rel::Cmp(CmpOp::Le),
        Some(Tok::Gt) => Rel::Cmp(CmpOp::Gt),
        Some(Tok::Ge) => Rel::Cmp(CmpOp::Ge),
        Some(Tok::In) => Rel::In,
        _ => return Ok(a),
    };
    c.next();
    let b = additive(c)?;
    Ok(Expr::Rel(rel, Box::new(a), Box::new(b)))
}

fn additive(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    let mut a = multiplicative(c)?;
    loop {
        let op = match c.peek() {
            Some(Tok::Plus) => ArithOp::Add,
            Some(Tok::Minus) => ArithOp::Sub,
            _ => return Ok(a),
        };
        c.next();
        let b = multiplicative(c)?;
        a = Expr::Arith(op, Box::new(a), Box::new(b));
    }
}

fn multiplicative(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    let mut a = unary(c)?;
    while c.eat(&Tok::Star) {
        let b = unary(c)?;
        a = Expr::Arith(ArithOp::Mul, Box::new(a), Box::new(b));
    }
    Ok(a)
}

fn unary(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    if c.eat(&Tok::Minus) {
        return Ok(Expr::Neg(Box::new(unary(c)?)));
    }
    primary(c)
}

fn primary(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    match c.peek() {
        Some(Tok::Num(n)) => {
            c.next();
            Ok(Expr::Num(*n))
        }
        Some(Tok::Top) => {
            c.next();
            Ok(Expr::Top)
        }
        Some(Tok::Bot) => {
            c.next();
            Ok(Expr::Bot)
        }
        Some(Tok::Nat) => {
            c.next();
            Ok(Expr::Nat)
        }
        Some(Tok::IntSet) => {
            c.next();
            Ok(Expr::IntSet)
        }
        Some(Tok::LParen) => {
            c.next();
            let e = parse_expr(c)?;
            c.expect(&Tok::RParen)?;
            Ok(e)
        }
        Some(Tok::LBrace) => {
            c.next();
            let mut items = Vec::new();
            if !c.eat(&Tok::RBrace) {
                loop {
                    items.push(parse_expr(c)?);
                    if c.eat(&Tok::RBrace) {
                        break;
                    }
                    c.expect(&Tok::Comma)?;
                }
            }
            Ok(Expr::SetLit(items))
        }
        Some(Tok::Forall) | Some(Tok::Exists) => {
            let forall = c.next() == Some(&Tok::Forall);
            let mut binders = Vec::new();
            loop {
                let name = c.ident()?;
                let ty = if c.eat(&Tok::Colon) { Some(type_expr(c)?) } else { None };
                binders.push((name, ty));
                if !c.eat(&Tok::Comma) {
                    break;
                }
            }
            c.expect(&Tok::Dot)?;
            let body = parse_expr(c)?;
            Ok(Expr::Quant { forall, binders, body: Box::new(body) })
        }
        Some(Tok::Ident(name)) => {
            c.next();
            if c.eat(&Tok::Prime) {
                return Ok(Expr::Primed(name.clone()));
            }
            if c.peek() == Some(&Tok::LParen) {
                c.next();
                let mut args = Vec::new();
                if !c.eat(&Tok::RParen) {
                    loop {
                        args.push(parse_expr(c)?);
                        if c.eat(&Tok::RParen) {
                            break;
                        }
                        c.expect(&Tok::Comma)?;
                    }
                }
                return Ok(Expr::App(name.clone(), args));
            }
            Ok(Expr::Name(name.clone()))
        }
        _ => c.unexpected("a predicate or expression"),
    }
}

/// A type position: `ℕ`, `ℤ`, a set name or a literal set `{a, b}`.
pub fn type_expr(c: &mut Cursor<'_>) -> Result<Expr, SyntaxError> {
    match c.peek() {
        Some(Tok::Nat) | Some(Tok::IntSet) | Some(Tok::LBrace) | Some(Tok::Ident(_)) => primary(c),
        _ => c.unexpected("a type"),
    }
}

/// Parses a whole string as a single predicate or expression.
pub fn parse_expr_str(src: &str) -> Result<Expr, SyntaxError> {
    let toks = lex(src)?;
    let mut c = Cursor::new(&toks);
    let e = parse_expr(&mut c)?;
    if !c.at_end() {
        return c.unexpected("end of input");
    }
    Ok(e)
}

/// A declared type, as written in typing invariants/axioms and in `ops` blocks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeAnn {
    /// `ℕ`: integers with a non-negativity atom.
    Nat,
    /// `ℤ`
    Int,
    /// `BOOL`
    Bool,
    /// A carrier set.
    Set(String),
    /// A literal set of closed terms of one sort.
    Enum(Vec<Term>),
}

impl TypeAnn {
    pub fn sort(&self, sig: &FopeqSignature) -> Result<Sort, SyntaxError> {
        match self {
            TypeAnn::Nat | TypeAnn::Int => Ok(Sort::Int),
            TypeAnn::Bool => Ok(Sort::Bool),
            TypeAnn::Set(s) => Ok(Sort::User(s.clone())),
            TypeAnn::Enum(items) => {
                let first = items.first().ok_or_else(|| SyntaxError::Resolve("empty literal set".into()))?;
                let s = first.sort_in(sig, &|_, _| None).map_err(|e| SyntaxError::Resolve(e.to_string()))?;
                for t in items {
                    let u = t.sort_in(sig, &|_, _| None).map_err(|e| SyntaxError::Resolve(e.to_string()))?;
                    if u != s {
                        return resolve_err(format!("literal set mixes sorts {s} and {u}"));
                    }
                }
                Ok(s)
            }
        }
    }

    /// The membership atom `t ∈ T` where it carries information beyond the sort.
    pub fn membership(&self, t: &Term) -> Option<Formula> {
        match self {
            TypeAnn::Nat => Some(Formula::ge(t.clone(), Term::Int(0))),
            TypeAnn::Enum(items) => Some(one_of(t, items)),
            _ => None,
        }
    }

    /// Reads a type from a raw expression.
    pub fn from_expr(e: &Expr, sig: &FopeqSignature) -> Result<TypeAnn, SyntaxError> {
        match e {
            Expr::Nat => Ok(TypeAnn::Nat),
            Expr::IntSet => Ok(TypeAnn::Int),
            Expr::Name(n) if n == "BOOL" => Ok(TypeAnn::Bool),
            Expr::Name(n) if sig.sorts.contains(n) => Ok(TypeAnn::Set(n.clone())),
            Expr::SetLit(items) if !items.is_empty() => {
                let empty = BTreeMap::new();
                let mut scope = Scope::new(sig, &empty);
                let terms = items.iter().map(|i| scope.term(i)).collect::<Result<Vec<_>, _>>()?;
                Ok(TypeAnn::Enum(terms))
            }
            Expr::Name(n) => resolve_err(format!("unknown type `{n}`")),
            _ => resolve_err("unsupported type expression".into()),
        }
    }
}

impl fmt::Display for TypeAnn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeAnn::Nat => f.write_str("ℕ"),
            TypeAnn::Int => f.write_str("ℤ"),
            TypeAnn::Bool => f.write_str("BOOL"),
            TypeAnn::Set(s) => f.write_str(s),
            TypeAnn::Enum(items) => {
                let parts: Vec<String> = items.iter().map(print_term).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

fn one_of(t: &Term, items: &[Term]) -> Formula {
    let mut alts: Vec<Formula> = items.iter().map(|i| Formula::eq(t.clone(), i.clone())).collect();
    if alts.len() == 1 {
        alts.pop().unwrap()
    } else {
        Formula::Or(alts)
    }
}

/// Name resolution context: a signature, the state variables, and a stack of locals
/// (event parameters and quantifier binders).
pub struct Scope<'a> {
    pub sig: &'a FopeqSignature,
    pub vars: &'a BTreeMap<String, Sort>,
    pub locals: Vec<(String, Sort)>,
    /// Whether primed state variables may occur.
    pub primes: bool,
}

impl<'a> Scope<'a> {
    pub fn new(sig: &'a FopeqSignature, vars: &'a BTreeMap<String, Sort>) -> Self {
        Scope { sig, vars, locals: Vec::new(), primes: true }
    }

    fn local(&self, name: &str) -> Option<&Sort> {
        self.locals.iter().rev().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    fn taken(&self, name: &str) -> bool {
        self.local(name).is_some() || self.vars.contains_key(name) || self.sig.ops.contains_key(name)
    }

    fn sort_ctx(&self) -> impl Fn(&str, bool) -> Option<Sort> + '_ {
        move |n, p| if p { self.vars.get(n).cloned() } else { self.local(n).or_else(|| self.vars.get(n)).cloned() }
    }

    pub fn sort_of(&self, t: &Term) -> Result<Sort, SyntaxError> {
        t.sort_in(self.sig, &self.sort_ctx()).map_err(|e| SyntaxError::Resolve(e.to_string()))
    }

    pub fn term(&mut self, e: &Expr) -> Result<Term, SyntaxError> {
        match e {
            Expr::Num(n) => Ok(Term::Int(*n)),
            Expr::Name(n) => {
                if self.local(n).is_some() || self.vars.contains_key(n) {
                    return Ok(Term::var(n));
                }
                if let Some(p) = self.sig.ops.get(n) {
                    if !p.args.is_empty() {
                        return resolve_err(format!("`{n}` expects {} arguments", p.args.len()));
                    }
                    return Ok(Term::constant(n));
                }
                match n.as_str() {
                    "TRUE" => Ok(Term::Bool(true)),
                    "FALSE" => Ok(Term::Bool(false)),
                    _ => resolve_err(format!("unknown identifier `{n}`")),
                }
            }
            Expr::Primed(n) => {
                if !self.vars.contains_key(n) {
                    return resolve_err(format!("`{n}′` is not a primed state variable"));
                }
                if !self.primes {
                    return resolve_err(format!("primed variable `{n}′` is not allowed here"));
                }
                Ok(Term::primed(n))
            }
            Expr::App(n, args) => {
                let p = self.sig.ops.get(n).ok_or_else(|| SyntaxError::Resolve(format!("unknown operation `{n}`")))?;
                if p.args.len() != args.len() {
                    return resolve_err(format!("`{n}` expects {} arguments, got {}", p.args.len(), args.len()));
                }
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(Term::app(n, args))
            }
            Expr::Neg(inner) => match &**inner {
                Expr::Num(n) => Ok(Term::Int(-n)),
                other => Ok(Term::sub(Term::Int(0), self.term(other)?)),
            },
            Expr::Arith(op, a, b) => Ok(Term::arith(*op, self.term(a)?, self.term(b)?)),
            _ => resolve_err("expected an expression, found a predicate".into()),
        }
    }

    pub fn formula(&mut self, e: &Expr) -> Result<Formula, SyntaxError> {
        match e {
            Expr::Top => Ok(Formula::True),
            Expr::Bot => Ok(Formula::False),
            Expr::Not(a) => Ok(Formula::not(self.formula(a)?)),
            Expr::And(xs) => Ok(Formula::And(xs.iter().map(|x| self.formula(x)).collect::<Result<_, _>>()?)),
            Expr::Or(xs) => Ok(Formula::Or(xs.iter().map(|x| self.formula(x)).collect::<Result<_, _>>()?)),
            Expr::Implies(a, b) => Ok(Formula::implies(self.formula(a)?, self.formula(b)?)),
            Expr::Iff(a, b) => Ok(Formula::iff(self.formula(a)?, self.formula(b)?)),
            Expr::Quant { forall, binders, body } => self.quantifier(*forall, binders, body),
            Expr::Rel(rel, a, b) => self.relation(*rel, a, b),
            Expr::Name(n) if self.sig.preds.get(n).is_some_and(|p| p.is_empty()) => {
                Ok(Formula::Pred { name: n.clone(), args: Vec::new() })
            }
            Expr::App(n, args) if self.sig.preds.contains_key(n) => {
                let arity = self.sig.preds[n].len();
                if arity != args.len() {
                    return resolve_err(format!("`{n}` expects {arity} arguments, got {}", args.len()));
                }
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(Formula::Pred { name: n.clone(), args })
            }
            _ => resolve_err("expected a predicate, found an expression".into()),
        }
    }

    fn relation(&mut self, rel: Rel, a: &Expr, b: &Expr) -> Result<Formula, SyntaxError> {
        match rel {
            Rel::Eq => {
                if let (Expr::Name(s), Expr::SetLit(items)) = (a, b) {
                    if self.sig.sorts.contains(s) && self.local(s).is_none() && !self.vars.contains_key(s) {
                        return self.partition(s, items);
                    }
                }
                Ok(Formula::eq(self.term(a)?, self.term(b)?))
            }
            Rel::Neq => Ok(Formula::neq(self.term(a)?, self.term(b)?)),
            Rel::Cmp(op) => Ok(Formula::cmp(op, self.term(a)?, self.term(b)?)),
            Rel::In => {
                let t = self.term(a)?;
                match TypeAnn::from_expr(b, self.sig)? {
                    TypeAnn::Enum(items) => Ok(one_of(&t, &items)),
                    ann => {
                        let s = ann.sort(self.sig)?;
                        let got = self.sort_of(&t)?;
                        if got != s {
                            return resolve_err(format!("membership of a {got} term in {ann}"));
                        }
                        Ok(ann.membership(&t).unwrap_or(Formula::True))
                    }
                }
            }
        }
    }

    /// `S = {a, b}` read as `∀x:S · x = a ∨ x = b`.
    fn partition(&mut self, sort: &str, items: &[Expr]) -> Result<Formula, SyntaxError> {
        let terms = items.iter().map(|i| self.term(i)).collect::<Result<Vec<_>, _>>()?;
        let x = fresh_name("x", &|n| self.taken(n));
        Ok(Formula::forall(alloc::vec![(x.clone(), Sort::user(sort))], one_of(&Term::var(&x), &terms)))
    }

    fn quantifier(&mut self, forall: bool, binders: &[(String, Option<Expr>)], body: &Expr) -> Result<Formula, SyntaxError> {
        let mut vs = Vec::new();
        let mut guards = Vec::new();
        for (name, ty) in binders {
            let sort = match ty {
                Some(t) => {
                    let ann = TypeAnn::from_expr(t, self.sig)?;
                    if let Some(g) = ann.membership(&Term::var(name)) {
                        guards.push(g);
                    }
                    ann.sort(self.sig)?
                }
                None => self.infer_sort(name, body).unwrap_or(Sort::Int),
            };
            vs.push((name.clone(), sort));
        }
        let depth = self.locals.len();
        self.locals.extend(vs.iter().cloned());
        let inner = self.formula(body);
        self.locals.truncate(depth);
        let mut inner = inner?;
        if !guards.is_empty() {
            let g = if guards.len() == 1 { guards.pop().unwrap() } else { Formula::And(guards) };
            inner = if forall { Formula::implies(g, inner) } else { Formula::And(alloc::vec![g, inner]) };
        }
        Ok(if forall { Formula::forall(vs, inner) } else { Formula::exists(vs, inner) })
    }

    /// Sort of a local from its uses in `body`: `x ∈ T`, or `x = t` / `t = x` with `t` of
    /// known sort. Returns `None` when nothing pins it down.
    pub fn infer_sort(&self, name: &str, body: &Expr) -> Option<Sort> {
        let mut found = None;
        self.infer_walk(name, body, &mut found);
        found
    }

    fn infer_walk(&self, name: &str, e: &Expr, found: &mut Option<Sort>) {
        if found.is_some() {
            return;
        }
        let is_x = |e: &Expr| matches!(e, Expr::Name(n) if n == name);
        match e {
            Expr::Rel(Rel::In, a, b) if is_x(a) => {
                if let Ok(ann) = TypeAnn::from_expr(b, self.sig) {
                    *found = ann.sort(self.sig).ok();
                }
            }
            Expr::Rel(rel, a, b) => {
                let other = if is_x(a) { Some(&**b) } else if is_x(b) { Some(&**a) } else { None };
                if let Some(o) = other {
                    *found = match rel {
                        Rel::Cmp(_) => Some(Sort::Int),
                        _ => self.guess_sort(o),
                    };
                }
            }
            Expr::Not(a) => self.infer_walk(name, a, found),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| self.infer_walk(name, x, found)),
            Expr::Implies(a, b) | Expr::Iff(a, b) => {
                self.infer_walk(name, a, found);
                self.infer_walk(name, b, found);
            }
            Expr::Quant { binders, body, .. } if !binders.iter().any(|(b, _)| b == name) => {
                self.infer_walk(name, body, found)
            }
            _ => {}
        }
    }

    fn guess_sort(&self, e: &Expr) -> Option<Sort> {
        match e {
            Expr::Num(_) | Expr::Neg(_) | Expr::Arith(..) => Some(Sort::Int),
            Expr::Name(n) if n == "TRUE" || n == "FALSE" => Some(Sort::Bool),
            Expr::Name(n) => self
                .local(n)
                .or_else(|| self.vars.get(n))
                .cloned()
                .or_else(|| self.sig.ops.get(n).map(|p| p.result.clone())),
            Expr::Primed(n) => self.vars.get(n).cloned(),
            Expr::App(n, _) => self.sig.ops.get(n).map(|p| p.result.clone()),
            _ => None,
        }
    }
}

/// Parses and resolves a predicate in one step.
pub fn formula_from_str(src: &str, sig: &FopeqSignature, vars: &BTreeMap<String, Sort>) -> Result<Formula, SyntaxError> {
    let e = parse_expr_str(src)?;
    Scope::new(sig, vars).formula(&e)
}

// ---------------------------------------------------------------------------------------
// Printing

const ARITH_SUM: u8 = 1;
const ARITH_PROD: u8 = 2;
const ARITH_ATOM: u8 = 3;

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Arith(ArithOp::Add | ArithOp::Sub, ..) => ARITH_SUM,
        Term::Arith(ArithOp::Mul, ..) => ARITH_PROD,
        Term::Int(n) if *n < 0 => ARITH_PROD,
        _ => ARITH_ATOM,
    }
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Var { name, primed } => {
            out.push_str(name);
            if *primed {
                out.push('′');
            }
        }
        Term::Op { name, args } => {
            out.push_str(name);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_term(a, out);
                }
                out.push(')');
            }
        }
        Term::Int(n) => out.push_str(&n.to_string()),
        Term::Bool(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
        Term::Arith(op, a, b) => {
            let lvl = term_level(t);
            let wrap = |x: &Term, need: u8, out: &mut String| {
                if term_level(x) < need {
                    out.push('(');
                    write_term(x, out);
                    out.push(')');
                } else {
                    write_term(x, out);
                }
            };
            wrap(a, lvl, out);
            out.push_str(op.symbol());
            // left-associative: the right operand must bind tighter
            wrap(b, lvl + 1, out);
        }
    }
}

pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, &mut s);
    s
}

const F_IFF: u8 = 1;
const F_IMPLIES: u8 = 2;
const F_OR: u8 = 3;
const F_AND: u8 = 4;
const F_NOT: u8 = 5;
const F_ATOM: u8 = 6;

fn formula_level(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => F_IFF,
        Formula::Implies(..) => F_IMPLIES,
        Formula::Or(xs) if xs.len() >= 2 => F_OR,
        Formula::And(xs) if xs.len() >= 2 => F_AND,
        Formula::Or(xs) | Formula::And(xs) if xs.len() == 1 => formula_level(&xs[0]),
        Formula::Not(inner) if !matches!(**inner, Formula::Eq(..)) => F_NOT,
        // quantifiers extend as far right as possible
        Formula::Forall(..) | Formula::Exists(..) if partition_view(f).is_none() => 0,
        _ => F_ATOM,
    }
}

/// Recognises the `S = {a, b}` shape produced by the resolver.
fn partition_view(f: &Formula) -> Option<(&str, Vec<&Term>)> {
    let Formula::Forall(vs, body) = f else { return None };
    let [(x, Sort::User(s))] = vs.as_slice() else { return None };
    let alts: Vec<&Formula> = match &**body {
        Formula::Or(xs) if !xs.is_empty() => xs.iter().collect(),
        eq @ Formula::Eq(..) => alloc::vec![eq],
        _ => return None,
    };
    let mut items = Vec::new();
    for a in alts {
        match a {
            Formula::Eq(Term::Var { name, primed: false }, t) if name == x && t.free_vars().is_empty() => items.push(t),
            _ => return None,
        }
    }
    Some((s.as_str(), items))
}

fn write_formula(f: &Formula, out: &mut String) {
    let wrap = |x: &Formula, need: u8, out: &mut String| {
        if formula_level(x) < need {
            out.push('(');
            write_formula(x, out);
            out.push(')');
        } else {
            write_formula(x, out);
        }
    };
    let infix = |xs: &[Formula], sym: &str, lvl: u8, out: &mut String| {
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                out.push(' ');
                out.push_str(sym);
                out.push(' ');
            }
            // nested chains of the same connective keep their grouping
            wrap(x, lvl + 1, out);
        }
    };
    match f {
        Formula::True => out.push('⊤'),
        Formula::False => out.push('⊥'),
        Formula::Eq(a, b) => {
            write_term(a, out);
            out.push_str(" = ");
            write_term(b, out);
        }
        Formula::Cmp(op, a, b) => {
            write_term(a, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_term(b, out);
        }
        Formula::Pred { name, args } => write_term(&Term::app(name, args.clone()), out),
        Formula::Not(inner) => match &**inner {
            Formula::Eq(a, b) => {
                write_term(a, out);
                out.push_str(" ≠ ");
                write_term(b, out);
            }
            g => {
                out.push('¬');
                wrap(g, F_NOT, out);
            }
        },
        Formula::And(xs) if xs.is_empty() => out.push('⊤'),
        Formula::Or(xs) if xs.is_empty() => out.push('⊥'),
        Formula::And(xs) | Formula::Or(xs) if xs.len() == 1 => write_formula(&xs[0], out),
        Formula::And(xs) => infix(xs, "∧", F_AND, out),
        Formula::Or(xs) => infix(xs, "∨", F_OR, out),
        Formula::Implies(a, b) => {
            wrap(a, F_IMPLIES + 1, out);
            out.push_str(" ⇒ ");
            wrap(b, F_IMPLIES, out);
        }
        Formula::Iff(a, b) => {
            wrap(a, F_IFF + 1, out);
            out.push_str(" ⇔ ");
            wrap(b, F_IFF + 1, out);
        }
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            if let Some((s, items)) = partition_view(f) {
                let parts: Vec<String> = items.into_iter().map(print_term).collect();
                out.push_str(&format!("{s} = {{{}}}", parts.join(",")));
                return;
            }
            if vs.is_empty() {
                write_formula(body, out);
                return;
            }
            out.push(if matches!(f, Formula::Forall(..)) { '∀' } else { '∃' });
            for (i, (v, s)) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(v);
                if *s != Sort::Int {
                    out.push(':');
                    out.push_str(&s.to_string());
                }
            }
            out.push('·');
            write_formula(body, out);
        }
    }
}

pub fn print_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(f, &mut s);
    s
}

fn expr_level(e: &Expr) -> u8 {
    match e {
        Expr::Quant { .. } => 0,
        Expr::Iff(..) => 1,
        Expr::Implies(..) => 2,
        Expr::Or(_) => 3,
        Expr::And(_) => 4,
        Expr::Not(_) => 5,
        Expr::Rel(..) => 6,
        Expr::Arith(ArithOp::Add | ArithOp::Sub, ..) => 7,
        Expr::Arith(ArithOp::Mul, ..) => 8,
        Expr::Neg(_) => 9,
        _ => 10,
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    let wrap = |x: &Expr, need: u8, out: &mut String| {
        if expr_level(x) < need {
            out.push('(');
            write_expr(x, out);
            out.push(')');
        } else {
            write_expr(x, out);
        }
    };
    let list = |xs: &[Expr], out: &mut String| {
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_expr(x, out);
        }
    };
    match e {
        Expr::Name(n) => out.push_str(n),
        Expr::Primed(n) => {
            out.push_str(n);
            out.push('′');
        }
        Expr::Num(n) => out.push_str(&n.to_string()),
        Expr::Top => out.push('⊤'),
        Expr::Bot => out.push('⊥'),
        Expr::Nat => out.push('ℕ'),
        Expr::IntSet => out.push('ℤ'),
        Expr::App(n, args) => {
            out.push_str(n);
            out.push('(');
            list(args, out);
            out.push(')');
        }
        Expr::SetLit(items) => {
            out.push('{');
            list(items, out);
            out.push('}');
        }
        Expr::Neg(x) => {
            out.push('-');
            wrap(x, 9, out);
        }
        Expr::Arith(op, a, b) => {
            let lvl = expr_level(e);
            wrap(a, lvl, out);
            out.push_str(op.symbol());
            wrap(b, lvl + 1, out);
        }
        Expr::Rel(rel, a, b) => {
            wrap(a, 7, out);
            out.push_str(match rel {
                Rel::Eq => " = ",
                Rel::Neq => " ≠ ",
                Rel::In => " ∈ ",
                Rel::Cmp(CmpOp::Lt) => " < ",
                Rel::Cmp(CmpOp::Le) => " ≤ ",
                Rel::Cmp(CmpOp::Gt) => " > ",
                Rel::Cmp(CmpOp::Ge) => " ≥ ",
            });
            wrap(b, 7, out);
        }
        Expr::Not(x) => {
            out.push('¬');
            wrap(x, 5, out);
        }
        Expr::And(xs) | Expr::Or(xs) => {
            let (sym, lvl) = if matches!(e, Expr::And(_)) { (" ∧ ", 4) } else { (" ∨ ", 3) };
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sym);
                }
                wrap(x, lvl + 1, out);
            }
        }
        Expr::Implies(a, b) => {
            wrap(a, 3, out);
            out.push_str(" ⇒ ");
            wrap(b, 2, out);
        }
        Expr::Iff(a, b) => {
            wrap(a, 2, out);
            out.push_str(" ⇔ ");
            wrap(b, 2, out);
        }
        Expr::Quant { forall, binders, body } => {
            out.push(if *forall { '∀' } else { '∃' });
            for (i, (v, ty)) in binders.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(v);
                if let Some(t) = ty {
                    out.push(':');
                    write_expr(t, out);
                }
            }
            out.push('·');
            write_expr(body, out);
        }
    }
}

/// Prints a raw expression so that [`parse_expr_str`] reads it back unchanged.
pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

/// Token-level comparison of two texts, ignoring whitespace and comments.
pub fn same_tokens(a: &str, b: &str) -> Result<bool, SyntaxError> {
    let ta: Vec<Tok> = lex(a)?.into_iter().map(|t| t.tok).collect();
    let tb: Vec<Tok> = lex(b)?.into_iter().map(|t| t.tok).collect();
    Ok(ta == tb)
}

/// First position where two token streams differ, rendered for diagnostics.
pub fn first_token_difference(a: &str, b: &str) -> Option<String> {
    let (ta, tb) = (lex(a).ok()?, lex(b).ok()?);
    for (i, (x, y)) in ta.iter().zip(&tb).enumerate() {
        if x.tok != y.tok {
            return Some(format!("token {i}: {} at {}:{} vs {} at {}:{}", x.tok, x.line, x.col, y.tok, y.line, y.col));
        }
    }
    if ta.len() != tb.len() {
        return Some(format!("lengths differ: {} vs {} tokens", ta.len(), tb.len()));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> FopeqSignature {
        FopeqSignature::new()
            .with_op("d", alloc::vec![], Sort::Int)
            .with_sort("Color")
            .with_op("red", alloc::vec![], Sort::user("Color"))
            .with_op("green", alloc::vec![], Sort::user("Color"))
    }

    fn vars() -> BTreeMap<String, Sort> {
        [("n", Sort::Int), ("a", Sort::Int), ("b", Sort::Int), ("ml_tl", Sort::user("Color")), ("y", Sort::Bool)]
            .into_iter()
            .map(|(n, s)| (n.to_string(), s))
            .collect()
    }

    fn f(src: &str) -> Formula {
        formula_from_str(src, &sig(), &vars()).unwrap()
    }

    #[test]
    fn ascii_and_unicode_spellings_agree() {
        assert_eq!(f("n <= d /\\ n' >= 0"), f("n ≤ d ∧ n′ ≥ 0"));
        assert_eq!(f("ml_tl = green => n /= 0"), f("ml_tl = green ⇒ n ≠ 0"));
        assert_eq!(f("#exists p . p > 0 & p < 2"), f("∃p·p > 0 ∧ p < 2"));
    }

    #[test]
    fn memberships_expand() {
        assert_eq!(f("n ∈ ℕ"), Formula::ge(Term::var("n"), Term::Int(0)));
        assert_eq!(f("y ∈ BOOL"), Formula::True);
        assert_eq!(
            f("ml_tl ∈ {red,green}"),
            Formula::Or(alloc::vec![
                Formula::eq(Term::var("ml_tl"), Term::constant("red")),
                Formula::eq(Term::var("ml_tl"), Term::constant("green")),
            ])
        );
        assert_eq!(print_formula(&f("Color = {green,red}")), "Color = {green,red}");
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(print_formula(&f("n = a+b+1")), "n = a+b+1");
        assert_eq!(print_formula(&f("n = a-(b-1)")), "n = a-(b-1)");
        assert_eq!(print_formula(&f("n = 2*a+b")), "n = 2*a+b");
        assert_eq!(print_formula(&f("n = 2*(a+b)")), "n = 2*(a+b)");
        assert_eq!(print_formula(&f("a=0 ∨ b=0 ∧ n=1")), "a = 0 ∨ b = 0 ∧ n = 1");
        assert_eq!(print_formula(&f("(a=0 ∨ b=0) ∧ n=1")), "(a = 0 ∨ b = 0) ∧ n = 1");
        assert_eq!(print_formula(&f("¬(a=0)")), "a ≠ 0");
        assert_eq!(print_formula(&f("¬(a<0 ∧ b<0)")), "¬(a < 0 ∧ b < 0)");
        assert_eq!(print_formula(&f("n = -3")), "n = -3");
    }

    #[test]
    fn binder_sorts_are_inferred() {
        let g = f("∃c·c = red ∧ ml_tl′ = c");
        let Formula::Exists(vs, _) = &g else { panic!() };
        assert_eq!(vs[0].1, Sort::user("Color"));
        assert_eq!(formula_from_str(&print_formula(&g), &sig(), &vars()).unwrap(), g);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_expr_str("n <\n  ").unwrap_err();
        assert!(err.is_parse());
        assert!(formula_from_str("q = 1", &sig(), &vars()).is_err());
        assert!(lex("n ? 1").is_err());
    }

    #[test]
    fn juxtaposed_predicates_split() {
        let toks = lex("a+b<d c=0 thenAct").unwrap();
        let mut c = Cursor::new(&toks);
        assert!(matches!(parse_expr(&mut c).unwrap(), Expr::Rel(..)));
        assert!(matches!(parse_expr(&mut c).unwrap(), Expr::Rel(..)));
        assert!(c.is_word("thenAct"));
    }

    #[test]
    fn token_comparison_ignores_layout() {
        assert!(same_tokens("n ≤ d // x", "n<=d").unwrap());
        assert!(!same_tokens("n < d", "n ≤ d").unwrap());
    }
}
