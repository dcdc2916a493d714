//! Loop dictionaries and looping conditions inferred from binary unfoldings.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::canon::canonical_form;
use crate::dn::{check_dn, delta_more_general, dna, DnViolation, PosTermMap};
use crate::error::ResourceError;
use crate::term::{Atom, BinClause, Pred, Program};
use crate::unfold::{tp_beta_upto, BinClausePool, UnfoldConfig};
use crate::unify::is_variant_atoms;

pub const DEFAULT_PAIR_CAP: usize = 8;
pub const DEFAULT_PASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferenceConfig {
    pub unfold: UnfoldConfig,
    /// Longest binary-clause sequence kept in the dictionary.
    pub pair_cap: usize,
    /// Upper bound on sweeps over the pool.
    pub passes: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            unfold: UnfoldConfig::default(),
            pair_cap: DEFAULT_PAIR_CAP,
            passes: DEFAULT_PASSES,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StampedClause {
    pub clause: BinClause,
    pub stamp: usize,
    pub key: String,
}

impl StampedClause {
    pub fn new(clause: BinClause, stamp: usize) -> Self {
        let key = canonical_form(&clause);
        StampedClause { clause, stamp, key }
    }
}

/// A binary-clause sequence with the chain of sets of positions that certify it.
/// `taus[k]` is DN for `clauses[k..]`.
#[derive(Debug, Clone)]
pub struct LoopingPair {
    clauses: Vec<StampedClause>,
    taus: Vec<PosTermMap>,
}

impl LoopingPair {
    pub fn clauses(&self) -> &[StampedClause] {
        &self.clauses
    }

    pub fn tau(&self) -> &PosTermMap {
        &self.taus[0]
    }

    pub fn taus(&self) -> &[PosTermMap] {
        &self.taus
    }

    pub fn head(&self) -> &Atom {
        &self.clauses[0].clause.head
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn bin_seq(&self) -> Vec<BinClause> {
        self.clauses.iter().map(|c| c.clause.clone()).collect()
    }

    /// Pairs agreeing on their first clause and certificate yield the same
    /// condition and pass the same extension tests, so only the first is kept.
    fn key(&self) -> String {
        format!("{} | {}", self.clauses[0].key, self.tau())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("pair is empty or its certificate chain has the wrong length")]
    Shape,
    #[error("link {index}: {violation}")]
    NotDn { index: usize, violation: DnViolation },
    #[error("link {index}: body is not Δ-more general than the next head")]
    NotMoreGeneral { index: usize },
    #[error("link {index}: a binary clause in the sequence has body `true`")]
    TrueBody { index: usize },
}

/// Re-checks a looping pair from scratch: every suffix certificate is DN for
/// its suffix, each body is Δ-more general than the next head under the next
/// certificate, and the last body is Δ-more general than its own head.
pub fn check_certificate(pair: &LoopingPair) -> Result<(), CertificateError> {
    fn check_from(pair: &LoopingPair, k: usize) -> Result<(), CertificateError> {
        let n = pair.clauses.len();
        let seq: Vec<BinClause> = pair.clauses[k..].iter().map(|c| c.clause.clone()).collect();
        check_dn(&seq, &pair.taus[k]).map_err(|violation| CertificateError::NotDn { index: k, violation })?;
        let c = &pair.clauses[k].clause;
        let body = c.body.as_ref().ok_or(CertificateError::TrueBody { index: k })?;
        if k + 1 == n {
            if delta_more_general(body, &c.head, &pair.taus[k]) {
                Ok(())
            } else {
                Err(CertificateError::NotMoreGeneral { index: k })
            }
        } else {
            let next = &pair.clauses[k + 1].clause.head;
            if !delta_more_general(body, next, &pair.taus[k + 1]) {
                return Err(CertificateError::NotMoreGeneral { index: k });
            }
            check_from(pair, k + 1)
        }
    }
    if pair.clauses.is_empty() || pair.clauses.len() != pair.taus.len() {
        return Err(CertificateError::Shape);
    }
    check_from(pair, 0)
}

/// Removes from `tau` the positions of the first head's symbol whose argument
/// is ground. Such a position is mapped to that same ground term, so every
/// argument it admits is already fixed by the head, and the class of queries
/// denoted by the head only grows.
fn drop_ground_head_positions(head: &Atom, tau: &mut PosTermMap) {
    let ground: BTreeSet<usize> = head
        .args
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_ground())
        .map(|(i, _)| i + 1)
        .collect();
    tau.retain(&head.pred(), |i| !ground.contains(&i));
}

#[derive(Debug, Clone, Default)]
pub struct LoopDictionary {
    pairs: Vec<LoopingPair>,
    keys: HashSet<String>,
}

impl LoopDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> &[LoopingPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn add(&mut self, pair: LoopingPair) -> bool {
        debug_assert!(check_certificate(&pair).is_ok());
        if self.keys.insert(pair.key()) {
            self.pairs.push(pair);
            true
        } else {
            false
        }
    }
}

/// Adds `[c]` when its body is Δ-more general than its head under the DN set
/// refined from the most permissive one over `sig`. Returns whether a pair was added.
pub fn unit_loop(c: &StampedClause, dict: &mut LoopDictionary, sig: &BTreeSet<Pred>) -> bool {
    let Some(body) = &c.clause.body else {
        return false;
    };
    let seq = [c.clause.clone()];
    let mut tau = dna(&seq, &PosTermMap::tau_max(sig));
    if !delta_more_general(body, &c.clause.head, &tau) {
        return false;
    }
    drop_ground_head_positions(&c.clause.head, &mut tau);
    dict.add(LoopingPair {
        clauses: vec![c.clone()],
        taus: vec![tau],
    })
}

/// Prefixes `c` to every pair whose first head `c`'s body is Δ-more general
/// than. Pairs longer than `pair_cap` are not built. Returns the number added.
pub fn loops_from_dict(c: &StampedClause, dict: &mut LoopDictionary, pair_cap: usize) -> usize {
    let Some(body) = &c.clause.body else {
        return 0;
    };
    let mut fresh = Vec::new();
    for pair in &dict.pairs {
        if pair.len() + 1 > pair_cap || !delta_more_general(body, pair.head(), pair.tau()) {
            continue;
        }
        let mut clauses = Vec::with_capacity(pair.len() + 1);
        clauses.push(c.clone());
        clauses.extend(pair.clauses.iter().cloned());
        let seq: Vec<BinClause> = clauses.iter().map(|s| s.clause.clone()).collect();
        let mut tau = dna(&seq, pair.tau());
        drop_ground_head_positions(&c.clause.head, &mut tau);
        let mut taus = Vec::with_capacity(pair.len() + 1);
        taus.push(tau);
        taus.extend(pair.taus.iter().cloned());
        fresh.push(LoopingPair { clauses, taus });
    }
    fresh.into_iter().filter(|p| dict.add(p.clone())).count()
}

/// Sweeps the pool in stamp then canonical order, repeating until nothing new
/// is found or `passes` sweeps have run.
pub fn loop_dict_from_pool(
    pool: &BinClausePool,
    sig: &BTreeSet<Pred>,
    config: &InferenceConfig,
) -> LoopDictionary {
    let clauses: Vec<StampedClause> = pool
        .proper()
        .map(|e| StampedClause {
            clause: e.clause.clone(),
            stamp: e.stamp,
            key: e.key.clone(),
        })
        .collect();
    let mut dict = LoopDictionary::new();
    for _ in 0..config.passes {
        let before = dict.len();
        for c in &clauses {
            unit_loop(c, &mut dict, sig);
            loops_from_dict(c, &mut dict, config.pair_cap);
        }
        if dict.len() == before {
            break;
        }
    }
    dict
}

pub fn infer_loop_dict(
    program: &Program,
    max: usize,
    config: &InferenceConfig,
) -> Result<(BinClausePool, LoopDictionary), ResourceError> {
    let pool = tp_beta_upto(program, max, &config.unfold)?;
    let dict = loop_dict_from_pool(&pool, program.signature(), config);
    Ok((pool, dict))
}

/// An atom with a set of positions with associated terms such that the atom and
/// every query Δ-more general than it left loop.
#[derive(Debug, Clone)]
pub struct LoopingCondition {
    pub atom: Atom,
    pub tau: PosTermMap,
    /// The looping pair the condition was read from.
    pub provenance: LoopingPair,
}

impl LoopingCondition {
    pub fn pred(&self) -> Pred {
        self.atom.pred()
    }

    /// Positions distinguished for the atom's relation symbol.
    pub fn neutral_positions(&self) -> BTreeSet<usize> {
        self.tau.domain(&self.pred())
    }

    fn key(&self) -> String {
        format!(
            "{} {}",
            canonical_form(&self.atom),
            self.tau.render_pred(&self.pred())
        )
    }
}

impl fmt::Display for LoopingCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}  [{}]",
            canonical_form(&self.atom),
            self.tau.render_pred(&self.pred())
        )
    }
}

/// The conditions read off a dictionary, one per distinct atom and neutral map.
pub fn conditions_from_dict(dict: &LoopDictionary) -> Vec<LoopingCondition> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for pair in dict.pairs() {
        let cond = LoopingCondition {
            atom: pair.head().clone(),
            tau: pair.tau().clone(),
            provenance: pair.clone(),
        };
        if seen.insert(cond.key()) {
            out.push(cond);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Inference {
    pub pool: BinClausePool,
    pub dict: LoopDictionary,
    pub conditions: Vec<LoopingCondition>,
}

pub fn infer_loop_cond(
    program: &Program,
    max: usize,
    config: &InferenceConfig,
) -> Result<Inference, ResourceError> {
    let (pool, dict) = infer_loop_dict(program, max, config)?;
    let conditions = conditions_from_dict(&dict);
    Ok(Inference {
        pool,
        dict,
        conditions,
    })
}

/// Whether `q` belongs to the class of queries the condition denotes.
pub fn membership(q: &Atom, cond: &LoopingCondition) -> bool {
    is_variant_atoms(q, &cond.atom) || delta_more_general(q, &cond.atom, &cond.tau)
}
