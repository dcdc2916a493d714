//! A small leftmost SLD interpreter used to confirm inferred loops.

use std::collections::{BTreeSet, HashMap};

use rustc_hash::FxHashMap;
use std::fmt::Write as _;

use crate::subst::Substitution;
use crate::term::{rename, Atom, Clause, Subst, Term, Var};
use crate::unify::mgu;

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// One derivation step with the renamed input clause that produced it.
#[derive(Debug, Clone)]
pub struct Step {
    pub clause: Clause,
    pub mgu: Substitution,
    pub resolvent: Vec<Atom>,
}

#[derive(Debug, Clone, Default)]
pub struct DerivationTrace {
    pub query: Vec<Atom>,
    pub steps: Vec<Step>,
}

impl DerivationTrace {
    fn new(query: Vec<Atom>) -> Self {
        DerivationTrace {
            query,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Whether every input clause is variable disjoint from the initial query and
    /// from the clauses and resolvents of earlier steps.
    pub fn standardized_apart(&self) -> bool {
        let mut seen: BTreeSet<Var> = self.query.var_set();
        for step in &self.steps {
            let cv = step.clause.var_set();
            if !cv.is_disjoint(&seen) {
                return false;
            }
            seen.extend(cv);
            seen.extend(step.resolvent.var_set());
        }
        true
    }

    /// Numbered steps, with variables named by first occurrence across the trace.
    pub fn render(&self) -> String {
        let mut names = Namer::default();
        let mut out = String::new();
        let _ = writeln!(out, "query: {}", names.atoms(&self.query));
        for (k, step) in self.steps.iter().enumerate() {
            let clause = names.clause(&step.clause);
            let mgu = names.subst(&step.mgu);
            let resolvent = names.atoms(&step.resolvent);
            let _ = writeln!(out, "{}. clause: {clause}", k + 1);
            let _ = writeln!(out, "   mgu: {mgu}");
            let _ = writeln!(out, "   resolvent: {resolvent}");
        }
        out
    }
}

#[derive(Default)]
struct Namer {
    map: HashMap<Var, Term>,
}

impl Namer {
    fn name<T: Subst>(&mut self, x: &T) -> T {
        for v in x.vars() {
            let n = self.map.len() as u64 + 1;
            self.map.entry(v).or_insert_with(|| Term::Var(Var::canonical(n)));
        }
        let s: Substitution = self.map.iter().map(|(v, t)| (v.clone(), t.clone())).collect();
        x.apply(&s)
    }

    fn atoms(&mut self, q: &[Atom]) -> String {
        if q.is_empty() {
            return "[]".to_string();
        }
        let q = self.name(&q.to_vec());
        q.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
    }

    fn clause(&mut self, c: &Clause) -> String {
        self.name(c).to_string()
    }

    fn subst(&mut self, s: &Substitution) -> String {
        let parts: Vec<String> = s
            .iter()
            .map(|(v, t)| {
                let v = self.name(&Term::Var(v.clone()));
                let t = self.name(t);
                format!("{v}/{t}")
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Resolves the leftmost atom of `q` with a variant of `c` that shares no
/// variable with `q`. Fresh variables come from a global counter, so a plain
/// renaming is already apart from everything built so far.
pub fn left_step(q: &[Atom], c: &Clause) -> Option<Step> {
    let (first, rest) = q.split_first()?;
    if !first.same_pred(&c.head) {
        return None;
    }
    let (clause, _) = rename(c);
    let theta = mgu(first, &clause.head)?;
    let resolvent = clause.body.iter().chain(rest).map(|a| a.apply(&theta)).collect();
    Some(Step {
        clause,
        mgu: theta,
        resolvent,
    })
}

#[derive(Debug, Clone)]
pub struct LoopCheck {
    /// A left derivation of the requested length was found.
    pub loops: bool,
    /// The node budget ran out before the search finished.
    pub budget_exhausted: bool,
    /// Derivation steps attempted.
    pub nodes: usize,
    /// The witness derivation when `loops` holds and a trace was requested.
    pub trace: DerivationTrace,
}

struct Frame {
    query: Vec<Atom>,
    next: usize,
    depth: usize,
}

fn next_candidate(program: &[Clause], query: &[Atom], from: usize) -> Option<usize> {
    let first = query.first()?;
    (from..program.len()).find(|&k| first.same_pred(&program[k].head))
}

fn search(program: &[Clause], q: &Atom, depth: usize, budget: usize, record: bool) -> LoopCheck {
    let root = vec![q.clone()];
    let mut frames = vec![Frame {
        query: root.clone(),
        next: 0,
        depth: 0,
    }];
    let mut path: Vec<Step> = Vec::new();
    let mut nodes = 0;
    let finish = |loops, budget_exhausted, nodes, steps: Vec<Step>| LoopCheck {
        loops,
        budget_exhausted,
        nodes,
        trace: DerivationTrace {
            query: root.clone(),
            steps,
        },
    };
    while let Some(top) = frames.last_mut() {
        if top.depth >= depth {
            path.truncate(top.depth);
            return finish(true, false, nodes, path);
        }
        let Some(k) = next_candidate(program, &top.query, top.next) else {
            frames.pop();
            continue;
        };
        top.next = k + 1;
        if nodes >= budget {
            return finish(false, true, nodes, Vec::new());
        }
        nodes += 1;
        let Some(step) = left_step(&top.query, &program[k]) else {
            continue;
        };
        let child_depth = top.depth + 1;
        // With no alternative left, the parent frame is never resumed.
        let last = next_candidate(program, &top.query, top.next).is_none();
        let query = if record {
            path.truncate(top.depth);
            let query = step.resolvent.clone();
            path.push(step);
            query
        } else {
            step.resolvent
        };
        let child = Frame {
            query,
            next: 0,
            depth: child_depth,
        };
        if last {
            *top = child;
        } else {
            frames.push(child);
        }
    }
    finish(false, false, nodes, Vec::new())
}

/// Depth-first search, clauses in program order, for a left derivation of
/// `depth` steps from `q`. The witness is kept in `trace`.
pub fn loops_to_depth(program: &[Clause], q: &Atom, depth: usize, budget: usize) -> LoopCheck {
    search(program, q, depth, budget, true)
}

/// Variable bindings of a search in progress, undone on backtracking. Terms
/// are never instantiated in place; lookups dereference through the store.
#[derive(Default)]
struct Store {
    bound: FxHashMap<u64, Term>,
    trail: Vec<u64>,
}

impl Store {
    fn deref(&self, t: &Term) -> Term {
        let mut t = t.clone();
        while let Term::Var(v) = &t {
            match self.bound.get(&v.id()) {
                Some(b) => t = b.clone(),
                None => break,
            }
        }
        t
    }

    fn bind(&mut self, v: &Var, t: Term) {
        self.bound.insert(v.id(), t);
        self.trail.push(v.id());
    }

    fn undo(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.bound.remove(&v);
        }
    }

    fn occurs(&self, v: &Var, t: &Term) -> bool {
        let mut stack = vec![t.clone()];
        while let Some(t) = stack.pop() {
            match self.deref(&t) {
                Term::Var(w) if w == *v => return true,
                Term::Var(_) => {}
                Term::App(_, args) => stack.extend(args.iter().cloned()),
            }
        }
        false
    }

    /// Unifies the head of a clause, renamed to `fresh`, with a goal. Head
    /// subterms are only instantiated when a goal variable is bound to them. A
    /// head variable that is unbound and not yet reachable from the goal side
    /// cannot occur in the term it meets, so its binding skips the occur check.
    fn unify_head(&mut self, t: &Template, fresh: &[Var], goal: &Atom) -> bool {
        let mut seen: Vec<u64> = Vec::new();
        // `true` marks a pair whose left side is an uninstantiated head subterm.
        let mut stack: Vec<(Term, Term, bool)> = t
            .clause
            .head
            .args
            .iter()
            .cloned()
            .zip(goal.args.iter().cloned())
            .map(|(h, g)| (h, g, true))
            .collect();
        while let Some((a, b, head_side)) = stack.pop() {
            let a = match (&a, head_side) {
                (Term::Var(v), true) => {
                    let fv = t.rename_var(v, fresh);
                    let id = fv.id();
                    if !self.bound.contains_key(&id) && !seen.contains(&id) {
                        seen.push(id);
                        self.bind(&fv, b);
                        continue;
                    }
                    Term::Var(fv)
                }
                (Term::App(f, xs), true) => match self.deref(&b) {
                    Term::App(g, ys) => {
                        if *f != g || xs.len() != ys.len() {
                            return false;
                        }
                        stack.extend(
                            xs.iter()
                                .cloned()
                                .zip(ys.iter().cloned())
                                .map(|(x, y)| (x, y, true)),
                        );
                        continue;
                    }
                    Term::Var(_) => t.term(&a, fresh),
                },
                (_, false) => a,
            };
            let a = self.deref(&a);
            let b = self.deref(&b);
            match (&a, &b) {
                (Term::Var(x), Term::Var(y)) if x == y => {}
                (Term::Var(x), t) | (t, Term::Var(x)) => {
                    if self.occurs(x, t) {
                        return false;
                    }
                    seen.push(x.id());
                    t.visit_vars(&mut |w: &Var| seen.push(w.id()));
                    self.bind(x, t.clone());
                }
                (Term::App(f, xs), Term::App(g, ys)) => {
                    if f != g || xs.len() != ys.len() {
                        return false;
                    }
                    stack.extend(
                        xs.iter()
                            .cloned()
                            .zip(ys.iter().cloned())
                            .map(|(x, y)| (x, y, false)),
                    );
                }
            }
        }
        true
    }
}

/// A clause with its variables listed once, renamed by position.
struct Template<'c> {
    clause: &'c Clause,
    vars: Vec<Var>,
}

impl<'c> Template<'c> {
    fn new(clause: &'c Clause) -> Self {
        Template {
            clause,
            vars: clause.vars(),
        }
    }

    fn rename_var(&self, v: &Var, fresh: &[Var]) -> Var {
        let k = self.vars.iter().position(|w| w == v).expect("clause variable");
        fresh[k].clone()
    }

    fn term(&self, t: &Term, fresh: &[Var]) -> Term {
        match t {
            Term::Var(v) => Term::Var(self.rename_var(v, fresh)),
            Term::App(_, args) if args.is_empty() => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.term(a, fresh)).collect()),
        }
    }

    fn atom(&self, a: &Atom, fresh: &[Var]) -> Atom {
        Atom {
            name: a.name.clone(),
            args: a.args.iter().map(|t| self.term(t, fresh)).collect(),
        }
    }

    fn fresh(&self) -> Vec<Var> {
        self.vars.iter().map(|_| Var::fresh()).collect()
    }
}

struct LazyFrame {
    goals: Vec<Atom>,
    next: usize,
    depth: usize,
    mark: usize,
}

/// As [`loops_to_depth`] without recording the derivation. Bindings live in a
/// trailed store instead of being applied to the resolvent, so a step costs
/// time proportional to the clause rather than to the terms it builds.
pub fn left_loops(program: &[Clause], q: &Atom, depth: usize, budget: usize) -> LoopCheck {
    let templates: Vec<Template> = program.iter().map(Template::new).collect();
    let mut store = Store::default();
    let mut frames = vec![LazyFrame {
        goals: vec![q.clone()],
        next: 0,
        depth: 0,
        mark: 0,
    }];
    let mut nodes = 0;
    let finish = |loops, budget_exhausted, nodes| LoopCheck {
        loops,
        budget_exhausted,
        nodes,
        trace: DerivationTrace::new(vec![q.clone()]),
    };
    while let Some(top) = frames.last_mut() {
        if top.depth >= depth {
            return finish(true, false, nodes);
        }
        let Some(k) = next_candidate(program, &top.goals, top.next) else {
            frames.pop();
            continue;
        };
        top.next = k + 1;
        if nodes >= budget {
            return finish(false, true, nodes);
        }
        nodes += 1;
        store.undo(top.mark);
        let t = &templates[k];
        let fresh = t.fresh();
        if !store.unify_head(t, &fresh, &top.goals[0]) {
            continue;
        }
        let child = LazyFrame {
            goals: t
                .clause
                .body
                .iter()
                .map(|a| t.atom(a, &fresh))
                .chain(top.goals[1..].iter().cloned())
                .collect(),
            next: 0,
            depth: top.depth + 1,
            mark: store.trail.len(),
        };
        if next_candidate(program, &top.goals, top.next).is_none() {
            *top = child;
        } else {
            frames.push(child);
        }
    }
    finish(false, false, nodes)
}

#[derive(Debug, Clone)]
pub enum QueryOutcome {
    Success { answer: Atom, trace: DerivationTrace },
    Failure,
    DepthExceeded,
}

/// Standard depth-first leftmost execution; `max_steps` bounds the number of
/// derivation steps attempted over the whole search.
pub fn run_query(program: &[Clause], q: &Atom, max_steps: usize) -> QueryOutcome {
    let mut frames = vec![Frame {
        query: vec![q.clone()],
        next: 0,
        depth: 0,
    }];
    let mut path: Vec<Step> = Vec::new();
    let mut steps = 0;
    while let Some(top) = frames.last_mut() {
        if top.query.is_empty() {
            let mut answer = q.clone();
            for s in &path {
                answer = answer.apply(&s.mgu);
            }
            let mut trace = DerivationTrace::new(vec![q.clone()]);
            trace.steps = path;
            return QueryOutcome::Success { answer, trace };
        }
        if top.next >= program.len() {
            frames.pop();
            path.pop();
            continue;
        }
        let c = &program[top.next];
        top.next += 1;
        if !top.query[0].same_pred(&c.head) {
            continue;
        }
        if steps >= max_steps {
            return QueryOutcome::DepthExceeded;
        }
        steps += 1;
        if let Some(step) = left_step(&top.query, c) {
            let query = step.resolvent.clone();
            path.push(step);
            frames.push(Frame {
                query,
                next: 0,
                depth: 0,
            });
        }
    }
    QueryOutcome::Failure
}
