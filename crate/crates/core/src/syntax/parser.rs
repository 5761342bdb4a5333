//! Hand-written lexer and recursive-descent parser for `.pgl` files.
//!
//! Parsing happens in two phases. The first turns text into a flat list of
//! statements, each tagged with the position of its leading keyword. The
//! second resolves names: sorts, then `var` declarations, then clauses
//! (where unseen atom names become abstract atoms), then queries. Statement
//! order in the file therefore does not affect atom numbering beyond the
//! relative order of declarations and first uses.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::ast::{
    Clause, FuzzyVar, MembershipSource, Program, ProgramBuilder, ProgramError, SortId,
};
use crate::degrees::{parse_rational, Degree, NumberError, Rational};
use crate::fuzzy::{Element, FuzzySet, SortDomain, Trapezoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax,
    UndeclaredSort,
    UndeclaredAtom,
    Duplicate,
    NotNormalized,
    WeightOutOfRange,
    InvalidNumber,
    InvalidDomain,
}

/// A parse or validation failure pinned to a source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{location}: {message}")]
pub struct Diagnostic {
    pub location: Location,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    fn new(location: Location, kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic {
            location,
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Equals,
    Amp,
    Arrow,
    DotDot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Location)>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);

    let is_ident_start = |c: char| c.is_ascii_alphabetic() || c == '_';
    let is_ident_char = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '.';

    while i < chars.len() {
        let c = chars[i];
        let loc = Location { line, column: col };
        let peek = chars.get(i + 1).copied();
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };

        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Equals),
            '&' => Some(Tok::Amp),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push((tok, loc));
            advance(1, &mut i);
            continue;
        }
        if c == '-' && peek == Some('>') {
            tokens.push((Tok::Arrow, loc));
            advance(2, &mut i);
            continue;
        }
        if c == '.' && peek == Some('.') {
            tokens.push((Tok::DotDot, loc));
            advance(2, &mut i);
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            col += i - start;
            tokens.push((Tok::Ident(chars[start..i].iter().collect()), loc));
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || (c == '-' && peek.is_some_and(|p| p.is_ascii_digit() || p == '.'))
            || (c == '.' && peek.is_some_and(|p| p.is_ascii_digit()));
        if starts_number {
            let start = i;
            if c == '-' {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            // a single `.` followed by a digit continues the literal; `..` does not
            if i < chars.len()
                && chars[i] == '.'
                && chars.get(i + 1).is_some_and(|p| p.is_ascii_digit())
            {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && chars[i] == '/' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            col += i - start;
            tokens.push((Tok::Number(chars[start..i].iter().collect()), loc));
            continue;
        }
        return Err(Diagnostic::new(
            loc,
            DiagnosticKind::Syntax,
            format!("unexpected character `{c}`"),
        ));
    }
    tokens.push((Tok::Eof, Location { line, column: col }));
    Ok(tokens)
}

#[derive(Debug)]
enum Stmt {
    Sort {
        name: String,
        body: SortBody,
        at: Location,
    },
    Var {
        name: String,
        typed: Option<(String, Location, MembershipSyntax)>,
        at: Location,
    },
    Clause {
        body: Vec<(String, Location)>,
        head: (String, Location),
        weight: (String, Location),
    },
    Query {
        name: String,
        at: Location,
    },
}

#[derive(Debug)]
enum SortBody {
    Range {
        lo: (String, Location),
        hi: (String, Location),
        step: Option<(String, Location)>,
        unit: Option<String>,
    },
    Labels(Vec<(String, Location)>),
}

#[derive(Debug)]
enum MembershipSyntax {
    Trapezoid([(String, Location); 4]),
    Explicit(Vec<((String, Location), (String, Location))>),
}

struct Parser {
    tokens: Vec<(Tok, Location)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn loc(&self) -> Location {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Location) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Diagnostic {
        Diagnostic::new(
            self.loc(),
            DiagnosticKind::Syntax,
            format!("expected {expected}, found {}", self.peek()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<Location, Diagnostic> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn ident(&mut self) -> Result<(String, Location), Diagnostic> {
        match self.peek() {
            Tok::Ident(_) => match self.bump() {
                (Tok::Ident(s), at) => Ok((s, at)),
                _ => unreachable!(),
            },
            _ => Err(self.error("an identifier")),
        }
    }

    fn number(&mut self) -> Result<(String, Location), Diagnostic> {
        match self.peek() {
            Tok::Number(_) => match self.bump() {
                (Tok::Number(s), at) => Ok((s, at)),
                _ => unreachable!(),
            },
            _ => Err(self.error("a number")),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn statements(&mut self) -> Result<Vec<Stmt>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            let at = self.loc();
            let stmt = match self.peek() {
                Tok::Eof => return Ok(out),
                Tok::Ident(kw) if kw == "sort" => {
                    self.bump();
                    self.sort(at)?
                }
                Tok::Ident(kw) if kw == "var" => {
                    self.bump();
                    self.var(at)?
                }
                Tok::Ident(kw) if kw == "clause" => {
                    self.bump();
                    self.clause()?
                }
                Tok::Ident(kw) if kw == "query" => {
                    self.bump();
                    let (name, at) = self.ident()?;
                    Stmt::Query { name, at }
                }
                _ => return Err(self.error("`sort`, `var`, `clause` or `query`")),
            };
            out.push(stmt);
        }
    }

    fn sort(&mut self, at: Location) -> Result<Stmt, Diagnostic> {
        let (name, _) = self.ident()?;
        self.expect(Tok::Equals)?;
        let body = if *self.peek() == Tok::LBrace {
            self.bump();
            let mut labels = vec![self.ident()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                labels.push(self.ident()?);
            }
            self.expect(Tok::RBrace)?;
            SortBody::Labels(labels)
        } else {
            let lo = self.number()?;
            self.expect(Tok::DotDot)?;
            let hi = self.number()?;
            let step = if self.at_keyword("step") {
                self.bump();
                Some(self.number()?)
            } else {
                None
            };
            let unit = if self.at_keyword("unit") {
                self.bump();
                Some(self.ident()?.0)
            } else {
                None
            };
            SortBody::Range { lo, hi, step, unit }
        };
        Ok(Stmt::Sort { name, body, at })
    }

    fn var(&mut self, at: Location) -> Result<Stmt, Diagnostic> {
        let (name, _) = self.ident()?;
        if *self.peek() != Tok::Colon {
            return Ok(Stmt::Var {
                name,
                typed: None,
                at,
            });
        }
        self.bump();
        let (sort, sort_at) = self.ident()?;
        self.expect(Tok::Equals)?;
        let membership = if self.at_keyword("trapezoid") {
            self.bump();
            self.expect(Tok::LParen)?;
            let t1 = self.number()?;
            self.expect(Tok::Comma)?;
            let t2 = self.number()?;
            self.expect(Tok::Comma)?;
            let t3 = self.number()?;
            self.expect(Tok::Comma)?;
            let t4 = self.number()?;
            self.expect(Tok::RParen)?;
            MembershipSyntax::Trapezoid([t1, t2, t3, t4])
        } else if *self.peek() == Tok::LBrace {
            self.bump();
            let mut entries = Vec::new();
            if *self.peek() != Tok::RBrace {
                loop {
                    let key = match self.peek() {
                        Tok::Ident(_) => self.ident()?,
                        Tok::Number(_) => self.number()?,
                        _ => return Err(self.error("a domain element")),
                    };
                    self.expect(Tok::Colon)?;
                    let value = self.number()?;
                    entries.push((key, value));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrace)?;
            MembershipSyntax::Explicit(entries)
        } else {
            return Err(self.error("`trapezoid(...)` or `{element: degree, ...}`"));
        };
        Ok(Stmt::Var {
            name,
            typed: Some((sort, sort_at, membership)),
            at,
        })
    }

    fn clause(&mut self) -> Result<Stmt, Diagnostic> {
        self.expect(Tok::LParen)?;
        let mut atoms = vec![self.ident()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            atoms.push(self.ident()?);
        }
        let (body, head) = if *self.peek() == Tok::Arrow {
            self.bump();
            (atoms, self.ident()?)
        } else if atoms.len() == 1 {
            (Vec::new(), atoms.pop().unwrap())
        } else {
            return Err(self.error("`->`"));
        };
        self.expect(Tok::Comma)?;
        let weight = self.number()?;
        self.expect(Tok::RParen)?;
        Ok(Stmt::Clause { body, head, weight })
    }
}

fn number_diag(at: Location, err: NumberError) -> Diagnostic {
    let kind = match err {
        NumberError::OutOfRange(_) => DiagnosticKind::WeightOutOfRange,
        _ => DiagnosticKind::InvalidNumber,
    };
    Diagnostic::new(at, kind, err.to_string())
}

fn rational(lit: &(String, Location)) -> Result<Rational, Diagnostic> {
    parse_rational(&lit.0).map_err(|e| number_diag(lit.1, e))
}

fn degree(lit: &(String, Location)) -> Result<Degree, Diagnostic> {
    lit.0.parse::<Degree>().map_err(|e| number_diag(lit.1, e))
}

fn program_diag(at: Location, err: ProgramError) -> Diagnostic {
    let kind = match &err {
        ProgramError::DuplicateSort(_) | ProgramError::DuplicateAtom(_) => {
            DiagnosticKind::Duplicate
        }
        ProgramError::UnknownSort(_) => DiagnosticKind::UndeclaredSort,
        ProgramError::UnknownAtom(_) => DiagnosticKind::UndeclaredAtom,
        ProgramError::SortMismatch { .. } => DiagnosticKind::InvalidDomain,
        ProgramError::Interpretation { source, .. } => match source {
            crate::fuzzy::FuzzyError::NotNormalized { .. } => DiagnosticKind::NotNormalized,
            _ => DiagnosticKind::InvalidDomain,
        },
    };
    Diagnostic::new(at, kind, err.to_string())
}

/// Parses and validates a `.pgl` program.
pub fn parse_program(text: &str) -> Result<Program, Diagnostic> {
    let tokens = lex(text)?;
    let stmts = Parser { tokens, pos: 0 }.statements()?;
    let mut builder = ProgramBuilder::new();

    for stmt in &stmts {
        if let Stmt::Sort { name, body, at } = stmt {
            let domain = match body {
                SortBody::Range { lo, hi, step, unit } => {
                    let step = match step {
                        Some(s) => rational(s)?,
                        None => Rational::from_integer(1),
                    };
                    let d = SortDomain::range(name.clone(), rational(lo)?, rational(hi)?, step)
                        .map_err(|e| {
                            Diagnostic::new(*at, DiagnosticKind::InvalidDomain, e.to_string())
                        })?;
                    match unit {
                        Some(u) => d.with_unit(u.clone()),
                        None => d,
                    }
                }
                SortBody::Labels(labels) => {
                    SortDomain::labels(name.clone(), labels.iter().map(|l| l.0.clone())).map_err(
                        |e| Diagnostic::new(*at, DiagnosticKind::InvalidDomain, e.to_string()),
                    )?
                }
            };
            builder.sort(domain).map_err(|e| program_diag(*at, e))?;
        }
    }

    for stmt in &stmts {
        if let Stmt::Var { name, typed, at } = stmt {
            match typed {
                None => {
                    builder
                        .declare_atom(name)
                        .map_err(|e| program_diag(*at, e))?;
                }
                Some((sort, sort_at, membership)) => {
                    let sort_id: SortId = builder.sort_id(sort).ok_or_else(|| {
                        program_diag(*sort_at, ProgramError::UnknownSort(sort.clone()))
                    })?;
                    let var = membership_var(&builder, sort_id, membership, name, *at)?;
                    builder
                        .fuzzy_atom(name, sort_id, var)
                        .map_err(|e| program_diag(*at, e))?;
                }
            }
        }
    }

    for stmt in &stmts {
        if let Stmt::Clause {
            body, head, weight, ..
        } = stmt
        {
            let weight = degree(weight)?;
            let body: Vec<_> = body.iter().map(|(n, _)| builder.atom(n)).collect();
            let head = builder.atom(&head.0);
            builder.clause(Clause::new(body, head, weight));
        }
    }

    for stmt in &stmts {
        if let Stmt::Query { name, at } = stmt {
            let id = builder
                .program()
                .atom_id(name)
                .ok_or_else(|| program_diag(*at, ProgramError::UnknownAtom(name.clone())))?;
            builder.query(id);
        }
    }
    Ok(builder.build())
}

fn membership_var(
    builder: &ProgramBuilder,
    sort: SortId,
    membership: &MembershipSyntax,
    atom: &str,
    at: Location,
) -> Result<FuzzyVar, Diagnostic> {
    let domain = builder.domain(sort).clone();
    match membership {
        MembershipSyntax::Trapezoid(params) => {
            let [t1, t2, t3, t4] = [
                rational(&params[0])?,
                rational(&params[1])?,
                rational(&params[2])?,
                rational(&params[3])?,
            ];
            let t = Trapezoid::new(t1, t2, t3, t4).map_err(|e| {
                Diagnostic::new(params[0].1, DiagnosticKind::InvalidDomain, e.to_string())
            })?;
            let set = t.to_fuzzy_unchecked(&domain).map_err(|e| {
                program_diag(
                    at,
                    ProgramError::Interpretation {
                        atom: atom.to_string(),
                        source: e,
                    },
                )
            })?;
            Ok(FuzzyVar {
                source: MembershipSource::Trapezoid(t),
                set,
            })
        }
        MembershipSyntax::Explicit(entries) => {
            let mut values: BTreeMap<usize, Degree> = BTreeMap::new();
            for (key, value) in entries {
                let element = if domain.is_numeric() {
                    Element::Number(rational(key)?)
                } else {
                    Element::Label(key.0.clone())
                };
                let index = domain.index_of(&element).ok_or_else(|| {
                    Diagnostic::new(
                        key.1,
                        DiagnosticKind::InvalidDomain,
                        format!("`{}` is not an element of sort `{}`", key.0, domain.name()),
                    )
                })?;
                if values.insert(index, degree(value)?).is_some() {
                    return Err(Diagnostic::new(
                        key.1,
                        DiagnosticKind::Duplicate,
                        format!("`{}` is given a membership twice", key.0),
                    ));
                }
            }
            // unlisted points have membership 0
            let memberships = (0..domain.len())
                .map(|i| values.get(&i).copied().unwrap_or(Degree::ZERO))
                .collect();
            let set = FuzzySet::new(domain, memberships).expect("one value per point");
            Ok(FuzzyVar {
                source: MembershipSource::Explicit,
                set,
            })
        }
    }
}
