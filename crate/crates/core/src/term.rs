//! Terms, atoms, clauses and programs.
//!
//! Variables are identified by an integer id drawn from a process-wide
//! monotone counter; the optional name only matters for display.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::subst::Substitution;

/// Ids below this bound are reserved for canonical forms.
pub(crate) const FRESH_BASE: u64 = 1 << 40;

static NEXT_VAR: AtomicU64 = AtomicU64::new(FRESH_BASE);

/// Name of the list constructor.
pub const CONS: &str = ".";
/// Name of the empty list.
pub const NIL: &str = "[]";
/// Name of the distinguished empty-body atom.
pub const TRUE: &str = "true";

#[derive(Clone, Debug)]
pub struct Var {
    id: u64,
    name: Option<Arc<str>>,
}

impl Var {
    pub fn fresh() -> Var {
        Var {
            id: NEXT_VAR.fetch_add(1, Ordering::Relaxed),
            name: None,
        }
    }

    pub fn fresh_named(name: &str) -> Var {
        Var {
            id: NEXT_VAR.fetch_add(1, Ordering::Relaxed),
            name: Some(Arc::from(name)),
        }
    }

    /// A variable in the reserved canonical range, displayed as `X<index>`.
    pub(crate) fn canonical(index: u64) -> Var {
        debug_assert!(index < FRESH_BASE);
        Var {
            id: index,
            name: Some(Arc::from(format!("X{index}").as_str())),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => f.write_str(n),
            None => write!(f, "_G{}", self.id),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    /// A function symbol applied to its arguments; constants have no arguments.
    App(Arc<str>, Arc<[Term]>),
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn fresh_var() -> Term {
        Term::Var(Var::fresh())
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Arc::from(name), Arc::from([]))
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(name), Arc::from(args))
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::App(Arc::from(CONS), Arc::from([head, tail]))
    }

    /// Builds `[items | tail]`, or a proper list when `tail` is `None`.
    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail.unwrap_or_else(Term::nil), |acc, t| Term::cons(t, acc))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Nesting depth; variables and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred {
    pub name: Arc<str>,
    pub arity: usize,
}

impl Pred {
    pub fn new(name: &str, arity: usize) -> Pred {
        Pred {
            name: Arc::from(name),
            arity,
        }
    }

    /// Parses a `name/arity` indicator.
    pub fn parse_indicator(s: &str) -> Option<Pred> {
        let (name, arity) = s.rsplit_once('/')?;
        if name.is_empty() {
            return None;
        }
        Some(Pred::new(name, arity.trim().parse().ok()?))
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub name: Arc<str>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: &str, args: Vec<Term>) -> Atom {
        Atom {
            name: Arc::from(name),
            args,
        }
    }

    pub fn truth() -> Atom {
        Atom::new(TRUE, Vec::new())
    }

    pub fn is_true(&self) -> bool {
        self.args.is_empty() && &*self.name == TRUE
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn pred(&self) -> Pred {
        Pred {
            name: self.name.clone(),
            arity: self.args.len(),
        }
    }

    pub fn same_pred(&self, other: &Atom) -> bool {
        self.name == other.name && self.args.len() == other.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }
}

/// A definite clause `head :- body`; an empty body is a fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Atom>) -> Clause {
        Clause { head, body }
    }

    pub fn fact(head: Atom) -> Clause {
        Clause {
            head,
            body: Vec::new(),
        }
    }

    pub fn is_binary(&self) -> bool {
        self.body.len() <= 1
    }
}

/// A binary clause `head :- body`, where `None` stands for `true`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinClause {
    pub head: Atom,
    pub body: Option<Atom>,
}

impl BinClause {
    pub fn new(head: Atom, body: Option<Atom>) -> BinClause {
        BinClause { head, body }
    }

    pub fn is_success_pattern(&self) -> bool {
        self.body.is_none()
    }

    pub fn to_clause(&self) -> Clause {
        Clause {
            head: self.head.clone(),
            body: self.body.iter().cloned().collect(),
        }
    }
}

impl TryFrom<&Clause> for BinClause {
    type Error = ();

    fn try_from(c: &Clause) -> Result<Self, ()> {
        match c.body.as_slice() {
            [] => Ok(BinClause::new(c.head.clone(), None)),
            [b] => Ok(BinClause::new(c.head.clone(), Some(b.clone()))),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("relation symbol `{name}` used with arity {first} and {second}")]
pub struct ArityConflict {
    pub name: String,
    pub first: usize,
    pub second: usize,
}

/// An ordered list of clauses whose relation symbols each have one arity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
    signature: BTreeSet<Pred>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Result<Program, ArityConflict> {
        let mut arities: BTreeMap<Arc<str>, usize> = BTreeMap::new();
        let mut signature = BTreeSet::new();
        for atom in clauses
            .iter()
            .flat_map(|c| std::iter::once(&c.head).chain(&c.body))
        {
            match arities.get(&atom.name) {
                Some(&a) if a != atom.arity() => {
                    return Err(ArityConflict {
                        name: atom.name.to_string(),
                        first: a,
                        second: atom.arity(),
                    })
                }
                Some(_) => {}
                None => {
                    arities.insert(atom.name.clone(), atom.arity());
                    signature.insert(atom.pred());
                }
            }
        }
        Ok(Program { clauses, signature })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// The relation symbols occurring in the program.
    pub fn signature(&self) -> &BTreeSet<Pred> {
        &self.signature
    }

    /// Relation symbols that head at least one clause, in first-definition order.
    pub fn defined_preds(&self) -> Vec<Pred> {
        let mut seen = BTreeSet::new();
        self.clauses
            .iter()
            .map(|c| c.head.pred())
            .filter(|p| seen.insert(p.clone()))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

/// Values that contain variables and can be instantiated.
pub trait Subst: Sized {
    fn apply(&self, s: &Substitution) -> Self;
    fn visit_vars(&self, f: &mut dyn FnMut(&Var));

    /// Variables in order of first occurrence.
    fn vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit_vars(&mut |v| {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        });
        out
    }

    fn var_set(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }
}

impl Subst for Term {
    fn apply(&self, s: &Substitution) -> Term {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(s)).collect()),
        }
    }

    fn visit_vars(&self, f: &mut dyn FnMut(&Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }
}

impl Subst for Atom {
    fn apply(&self, s: &Substitution) -> Atom {
        Atom {
            name: self.name.clone(),
            args: self.args.iter().map(|a| a.apply(s)).collect(),
        }
    }

    fn visit_vars(&self, f: &mut dyn FnMut(&Var)) {
        self.args.iter().for_each(|a| a.visit_vars(f))
    }
}

impl Subst for Clause {
    fn apply(&self, s: &Substitution) -> Clause {
        Clause {
            head: self.head.apply(s),
            body: self.body.iter().map(|b| b.apply(s)).collect(),
        }
    }

    fn visit_vars(&self, f: &mut dyn FnMut(&Var)) {
        self.head.visit_vars(f);
        self.body.iter().for_each(|b| b.visit_vars(f));
    }
}

impl Subst for BinClause {
    fn apply(&self, s: &Substitution) -> BinClause {
        BinClause {
            head: self.head.apply(s),
            body: self.body.as_ref().map(|b| b.apply(s)),
        }
    }

    fn visit_vars(&self, f: &mut dyn FnMut(&Var)) {
        self.head.visit_vars(f);
        if let Some(b) = &self.body {
            b.visit_vars(f);
        }
    }
}

impl<T: Subst> Subst for Vec<T> {
    fn apply(&self, s: &Substitution) -> Vec<T> {
        self.iter().map(|x| x.apply(s)).collect()
    }

    fn visit_vars(&self, f: &mut dyn FnMut(&Var)) {
        self.iter().for_each(|x| x.visit_vars(f))
    }
}

/// Renames every variable of `x` to a fresh one; returns the variant and the renaming.
pub fn rename<T: Subst>(x: &T) -> (T, Substitution) {
    let mut ren = Substitution::new();
    for v in x.vars() {
        ren.bind(v, Term::fresh_var());
    }
    (x.apply(&ren), ren)
}

/// Returns a variant of `c` sharing no variable with `avoid`, plus the renaming used.
pub fn rename_apart<T: Subst>(c: &T, avoid: &BTreeSet<Var>) -> (T, Substitution) {
    let mut ren = Substitution::new();
    for v in c.vars() {
        let mut fresh = Var::fresh();
        while avoid.contains(&fresh) {
            fresh = Var::fresh();
        }
        ren.bind(v, Term::Var(fresh));
    }
    (c.apply(&ren), ren)
}

fn is_solo_char(c: char) -> bool {
    matches!(c, '!' | ';')
}

fn needs_quotes(name: &str) -> bool {
    if name == NIL || name.chars().all(is_solo_char) && name.len() == 1 {
        return false;
    }
    if !name.is_empty() && name.chars().all(|c| c.is_ascii_digit()) {
        return false;
    }
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_lowercase() => !chars.all(|c| c.is_alphanumeric() || c == '_'),
        _ => true,
    }
}

pub(crate) fn fmt_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if needs_quotes(name) {
        f.write_str("'")?;
        for c in name.chars() {
            match c {
                '\'' => f.write_str("''")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                c => write!(f, "{c}")?,
            }
        }
        f.write_str("'")
    } else {
        f.write_str(name)
    }
}

fn fmt_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) if &**name == CONS && args.len() == 2 => {
                write!(f, "[{}", args[0])?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::App(n, a) if &**n == CONS && a.len() == 2 => {
                            write!(f, ",{}", a[0])?;
                            tail = &a[1];
                        }
                        Term::App(n, a) if &**n == NIL && a.is_empty() => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                f.write_str("]")
            }
            Term::App(name, args) => {
                fmt_name(f, name)?;
                if args.is_empty() {
                    Ok(())
                } else {
                    fmt_args(f, args)
                }
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_name(f, &self.name)?;
        if self.args.is_empty() {
            Ok(())
        } else {
            fmt_args(f, &self.args)
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            write!(f, "{b}")?;
        }
        f.write_str(".")
    }
}

impl fmt::Display for BinClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Some(b) => write!(f, "{} :- {}.", self.head, b),
            None => write!(f, "{}.", self.head),
        }
    }
}
