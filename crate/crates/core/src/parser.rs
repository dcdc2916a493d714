//! Reader for the pure Prolog subset: facts, rules, lists, integers and quoted atoms.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::canon::canonicalize;
use crate::error::ParseError;
use crate::term::{Atom, Clause, Program, Term, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Int(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bar,
    Comma,
    Neck,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        column,
        message: message.into(),
    })
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_layout(&mut self) -> Result<(), ParseError> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') => {
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    if ahead.peek() != Some(&'*') {
                        return Ok(());
                    }
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    let mut prev = ' ';
                    loop {
                        match self.bump() {
                            Some('/') if prev == '*' => break,
                            Some(c) => prev = c,
                            None => return err(line, col, "unterminated block comment"),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn ident(&mut self, first: char) -> String {
        let mut s = String::from(first);
        while let Some(&c) = self.chars.peek() {
            if c.is_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn quoted(&mut self, line: usize, col: usize) -> Result<String, ParseError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('\'') => {
                    if self.chars.peek() == Some(&'\'') {
                        self.bump();
                        s.push('\'');
                    } else {
                        return Ok(s);
                    }
                }
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(c @ ('\\' | '\'')) => s.push(c),
                    _ => return err(self.line, self.col, "bad escape in quoted atom"),
                },
                Some(c) => s.push(c),
                None => return err(line, col, "unterminated quoted atom"),
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, ParseError> {
        self.skip_layout()?;
        let (line, col) = (self.line, self.col);
        let Some(c) = self.bump() else {
            return Ok(None);
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '|' => Tok::Bar,
            ',' => Tok::Comma,
            '.' => match self.chars.peek() {
                None => Tok::End,
                Some(&n) if n.is_whitespace() || n == '%' => Tok::End,
                _ => return err(line, col, "unexpected `.`"),
            },
            ':' => {
                if self.chars.peek() == Some(&'-') {
                    self.bump();
                    Tok::Neck
                } else {
                    return err(line, col, "expected `:-`");
                }
            }
            '\'' => Tok::Name(self.quoted(line, col)?),
            '!' | ';' => Tok::Name(c.to_string()),
            c if c.is_ascii_digit() => {
                let mut s = String::from(c);
                while let Some(&d) = self.chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Int(s)
            }
            c if c.is_uppercase() || c == '_' => Tok::Var(self.ident(c)),
            c if c.is_alphabetic() => Tok::Name(self.ident(c)),
            c => return err(line, col, format!("unexpected character `{c}`")),
        };
        Ok(Some(Token { tok, line, col }))
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer::new(src);
    let mut out = Vec::new();
    while let Some(t) = lx.next_token()? {
        out.push(t);
    }
    Ok(out)
}

/// An atom with its line and column.
type Located = (Atom, (usize, usize));

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
    scope: HashMap<String, Var>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        let toks = tokenize(src)?;
        let lines = src.split('\n').count();
        let last = src.rsplit('\n').next().unwrap_or("");
        Ok(Parser {
            toks,
            pos: 0,
            eof: (lines, last.chars().count() + 1),
            scope: HashMap::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.eof)
    }

    fn at_eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let (line, col) = self.here();
        match self.advance() {
            Some(t) if t.tok == want => Ok(()),
            Some(_) => err(line, col, format!("expected {what}")),
            None => err(line, col, format!("expected {what}, found end of input")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (line, col) = self.here();
        let Some(t) = self.advance() else {
            return err(line, col, "expected a term, found end of input");
        };
        match t.tok {
            Tok::Var(name) if name == "_" => Ok(Term::fresh_var()),
            Tok::Var(name) => {
                let v = self
                    .scope
                    .entry(name.clone())
                    .or_insert_with(|| Var::fresh_named(&name))
                    .clone();
                Ok(Term::Var(v))
            }
            Tok::Int(n) => Ok(Term::constant(&n)),
            Tok::Name(name) => {
                let args = self.args()?;
                Ok(Term::App(Arc::from(name.as_str()), Arc::from(args)))
            }
            Tok::LBracket => self.list_rest(),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => err(line, col, "expected a term"),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        if self.peek() != Some(&Tok::LParen) {
            return Ok(Vec::new());
        }
        self.advance();
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.advance();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(args)
    }

    fn list_rest(&mut self) -> Result<Term, ParseError> {
        if self.peek() == Some(&Tok::RBracket) {
            self.advance();
            return Ok(Term::nil());
        }
        let mut items = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.advance();
            items.push(self.term()?);
        }
        let tail = if self.peek() == Some(&Tok::Bar) {
            self.advance();
            Some(self.term()?)
        } else {
            None
        };
        self.expect(Tok::RBracket, "`]`")?;
        Ok(Term::list(items, tail))
    }

    fn atom(&mut self) -> Result<(Atom, (usize, usize)), ParseError> {
        let at = self.here();
        match self.term()? {
            Term::App(name, args) if !name.chars().all(|c| c.is_ascii_digit()) => Ok((
                Atom {
                    name,
                    args: args.to_vec(),
                },
                at,
            )),
            _ => err(at.0, at.1, "expected an atom"),
        }
    }

    fn clause(&mut self) -> Result<(Clause, Vec<Located>), ParseError> {
        self.scope.clear();
        let (head, hpos) = self.atom()?;
        if head.is_true() {
            return err(hpos.0, hpos.1, "`true` cannot be a clause head");
        }
        let mut located = vec![(head.clone(), hpos)];
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Neck) {
            self.advance();
            loop {
                let (b, bpos) = self.atom()?;
                if !b.is_true() {
                    located.push((b.clone(), bpos));
                    body.push(b);
                }
                if self.peek() == Some(&Tok::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::End, "`.` at end of clause")?;
        Ok((Clause::new(head, body), located))
    }
}

/// Source positions (line, column) of each clause start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub program: Program,
    pub positions: Vec<(usize, usize)>,
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    parse_program_with_positions(src).map(|s| s.program)
}

pub fn parse_program_with_positions(src: &str) -> Result<SourceProgram, ParseError> {
    let mut p = Parser::new(src)?;
    let mut clauses = Vec::new();
    let mut positions = Vec::new();
    let mut arities: BTreeMap<String, usize> = BTreeMap::new();
    while !p.at_eof() {
        let start = p.here();
        let (c, located) = p.clause()?;
        for (a, (line, col)) in located {
            match arities.get(&*a.name) {
                Some(&n) if n != a.arity() => {
                    return err(
                        line,
                        col,
                        format!("relation `{}` used with arity {} and {}", a.name, n, a.arity()),
                    )
                }
                Some(_) => {}
                None => {
                    arities.insert(a.name.to_string(), a.arity());
                }
            }
        }
        clauses.push(c);
        positions.push(start);
    }
    let program = Program::new(clauses).map_err(|e| ParseError {
        line: 1,
        column: 1,
        message: e.to_string(),
    })?;
    Ok(SourceProgram { program, positions })
}

/// Parses a single atomic query, with or without a terminating `.`.
pub fn parse_query(src: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(src)?;
    let (a, pos) = p.atom()?;
    if a.is_true() {
        return err(pos.0, pos.1, "`true` is not a query atom");
    }
    if p.peek() == Some(&Tok::End) {
        p.advance();
    }
    if !p.at_eof() {
        let (line, col) = p.here();
        return err(line, col, "a query is a single atom");
    }
    Ok(a)
}

/// Renders a program, one clause per line, with canonical variable names.
pub fn render(program: &Program) -> String {
    let mut out = String::new();
    for c in program.clauses() {
        out.push_str(&canonicalize(c).to_string());
        out.push('\n');
    }
    out
}
