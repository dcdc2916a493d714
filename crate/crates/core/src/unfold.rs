//! Iterates of the binary-unfoldings operator.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::canon::canonical_form;
use crate::error::ResourceError;
use crate::subst::Substitution;
use crate::term::{rename, Atom, BinClause, Clause, Pred, Program, Subst, Term};
use crate::unify::unify_with;

pub const DEFAULT_POOL_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnfoldConfig {
    pub pool_cap: usize,
}

impl Default for UnfoldConfig {
    fn default() -> Self {
        UnfoldConfig {
            pool_cap: DEFAULT_POOL_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub clause: BinClause,
    /// First iteration at which a variant of the clause appeared.
    pub stamp: usize,
    /// Canonical rendering, unique within a pool.
    pub key: String,
}

/// The union of the first iterates, ordered by stamp and then canonical text.
#[derive(Debug, Clone, Default)]
pub struct BinClausePool {
    entries: Vec<PoolEntry>,
    index: HashMap<String, usize>,
    iterations: usize,
    fixpoint: Option<usize>,
}

impl BinClausePool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    /// Number of iterations computed so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// The `k` with `T↑(k+1) = T↑k`, if it has been observed.
    pub fn fixpoint(&self) -> Option<usize> {
        self.fixpoint
    }

    pub fn contains_variant(&self, c: &BinClause) -> bool {
        self.index.contains_key(&canonical_form(c))
    }

    pub fn stamp_of(&self, c: &BinClause) -> Option<usize> {
        self.index.get(&canonical_form(c)).map(|&i| self.entries[i].stamp)
    }

    pub fn success_patterns(&self) -> impl Iterator<Item = &PoolEntry> {
        self.entries.iter().filter(|e| e.clause.is_success_pattern())
    }

    pub fn proper(&self) -> impl Iterator<Item = &PoolEntry> {
        self.entries.iter().filter(|e| !e.clause.is_success_pattern())
    }

    /// Canonical keys of the clauses with stamp at most `k`.
    pub fn keys_upto(&self, k: usize) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.stamp <= k)
            .map(|e| e.key.as_str())
            .collect()
    }

    /// One line per clause, `<stamp> <canonical clause>`, in stamp then text order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{} {}\n", e.stamp, e.key));
        }
        out
    }

    fn insert_batch(
        &mut self,
        mut batch: Vec<(String, BinClause)>,
        stamp: usize,
        cap: usize,
    ) -> Result<usize, ResourceError> {
        batch.sort_by(|a, b| a.0.cmp(&b.0));
        let mut added = 0;
        for (key, clause) in batch {
            if self.index.contains_key(&key) {
                continue;
            }
            if self.entries.len() >= cap {
                return Err(ResourceError::PoolCap {
                    cap,
                    iteration: stamp,
                });
            }
            self.index.insert(key.clone(), self.entries.len());
            self.entries.push(PoolEntry { clause, stamp, key });
            added += 1;
        }
        Ok(added)
    }
}

/// Premises drawn from the current pool, grouped by the relation of their head.
struct Premises<'a> {
    success: BTreeMap<Pred, Vec<(&'a BinClause, usize)>>,
    proper: BTreeMap<Pred, Vec<(&'a BinClause, usize)>>,
}

impl<'a> Premises<'a> {
    fn new<I: IntoIterator<Item = (&'a BinClause, usize)>>(items: I) -> Self {
        let mut success: BTreeMap<Pred, Vec<_>> = BTreeMap::new();
        let mut proper: BTreeMap<Pred, Vec<_>> = BTreeMap::new();
        for (c, stamp) in items {
            let bucket = if c.is_success_pattern() {
                &mut success
            } else {
                &mut proper
            };
            bucket.entry(c.head.pred()).or_default().push((c, stamp));
        }
        Premises { success, proper }
    }
}

struct StepCtx<'a, 'p> {
    premises: &'p Premises<'a>,
    /// When set, only derivations using a premise with this stamp are produced.
    newest: Option<usize>,
    /// Keys already in the pool; their variants are not emitted again.
    known: Option<&'p HashMap<String, usize>>,
    fresh: HashSet<String>,
    /// Generation stops once `known` plus `fresh` outgrows this.
    limit: usize,
    overflow: bool,
    out: Vec<(String, BinClause)>,
}

impl<'a, 'p> StepCtx<'a, 'p> {
    fn new(
        premises: &'p Premises<'a>,
        newest: Option<usize>,
        known: Option<&'p HashMap<String, usize>>,
        limit: usize,
    ) -> Self {
        StepCtx {
            premises,
            newest,
            known,
            fresh: HashSet::new(),
            limit,
            overflow: false,
            out: Vec::new(),
        }
    }

    fn emit(&mut self, c: BinClause) {
        let key = canonical_form(&c);
        if self.known.is_some_and(|k| k.contains_key(&key)) || self.fresh.contains(&key) {
            return;
        }
        self.fresh.insert(key.clone());
        self.out.push((key, c));
        let size = self.known.map_or(0, HashMap::len) + self.fresh.len();
        if size > self.limit {
            self.overflow = true;
        }
    }

    fn clause(&mut self, c: &Clause) {
        if c.body.is_empty() {
            if self.newest.is_none() {
                self.emit(BinClause::new(c.head.clone(), None));
            }
            return;
        }
        for i in 0..c.body.len() {
            self.prefix(c, i, 0, &Substitution::new(), false);
        }
    }

    /// Resolves body atoms `0..j` with success patterns, then handles atom `i`.
    fn prefix(&mut self, c: &Clause, i: usize, j: usize, theta: &Substitution, used_new: bool) {
        if j == i {
            self.last(c, i, theta, used_new);
            return;
        }
        let goal = &c.body[j];
        let Some(cands) = self.premises.success.get(&goal.pred()) else {
            return;
        };
        for &(sp, stamp) in cands {
            if self.overflow {
                return;
            }
            let (sp, _) = rename(sp);
            let mut s = theta.clone();
            if unify_with(&mut s, goal, &sp.head) {
                let new = used_new || Some(stamp) == self.newest;
                self.prefix(c, i, j + 1, &s, new);
            }
        }
    }

    fn last(&mut self, c: &Clause, i: usize, theta: &Substitution, used_new: bool) {
        let goal = &c.body[i];
        let is_last = i + 1 == c.body.len();
        if self.newest.is_none() || used_new {
            // The identity clause goal :- goal.
            self.emit(BinClause::new(c.head.apply(theta), Some(goal.apply(theta))));
        }
        let pred = goal.pred();
        let proper = self.premises.proper.get(&pred).into_iter().flatten();
        let success = self
            .premises
            .success
            .get(&pred)
            .into_iter()
            .flatten()
            .filter(|_| is_last);
        for &(prem, stamp) in proper.chain(success) {
            if self.overflow {
                return;
            }
            let new = used_new || Some(stamp) == self.newest;
            if self.newest.is_some() && !new {
                continue;
            }
            let (prem, _) = rename(prem);
            let mut s = theta.clone();
            if unify_with(&mut s, goal, &prem.head) {
                let body = prem.body.as_ref().map(|b| b.apply(&s));
                self.emit(BinClause::new(c.head.apply(&s), body));
            }
        }
    }
}

fn dedup(mut v: Vec<(String, BinClause)>) -> Vec<(String, BinClause)> {
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v.dedup_by(|a, b| a.0 == b.0);
    v
}

/// One application of the operator to `x`, canonicalized, deduplicated and sorted.
pub fn tp_beta_step(program: &Program, x: &[BinClause]) -> Vec<BinClause> {
    let premises = Premises::new(x.iter().map(|c| (c, 0)));
    let mut ctx = StepCtx::new(&premises, None, None, usize::MAX);
    for c in program.clauses() {
        ctx.clause(c);
    }
    dedup(ctx.out).into_iter().map(|(_, c)| c).collect()
}

/// Computes the union of the first `max` iterates, stopping early at a fixpoint.
pub fn tp_beta_upto(
    program: &Program,
    max: usize,
    config: &UnfoldConfig,
) -> Result<BinClausePool, ResourceError> {
    let mut pool = BinClausePool::new();
    extend_pool(&mut pool, program, max, config)?;
    Ok(pool)
}

/// Continues the iteration of `pool` up to `max` iterations.
pub fn extend_pool(
    pool: &mut BinClausePool,
    program: &Program,
    max: usize,
    config: &UnfoldConfig,
) -> Result<(), ResourceError> {
    while pool.fixpoint.is_none() && pool.iterations < max {
        let k = pool.iterations;
        let out = {
            let premises = Premises::new(pool.entries.iter().map(|e| (&e.clause, e.stamp)));
            let newest = if k == 0 { None } else { Some(k) };
            let mut ctx = StepCtx::new(&premises, newest, Some(&pool.index), config.pool_cap);
            for c in program.clauses() {
                if ctx.overflow {
                    break;
                }
                ctx.clause(c);
            }
            if ctx.overflow {
                return Err(ResourceError::PoolCap {
                    cap: config.pool_cap,
                    iteration: k + 1,
                });
            }
            ctx.out
        };
        let added = pool.insert_batch(dedup(out), k + 1, config.pool_cap)?;
        pool.iterations = k + 1;
        if added == 0 {
            pool.fixpoint = Some(k);
        }
    }
    Ok(())
}

/// The identity clause `p(X1..Xn) :- p(X1..Xn)` for a relation symbol.
pub fn identity_clause(p: &Pred) -> BinClause {
    let args: Vec<Term> = (0..p.arity).map(|_| Term::fresh_var()).collect();
    let a = Atom::new(&p.name, args);
    BinClause::new(a.clone(), Some(a))
}
