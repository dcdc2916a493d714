//! Checks inferred conditions against the interpreter, on the condition's own
//! atom and on random members of the class it denotes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::loops::{membership, LoopingCondition};
use crate::oracle::{left_loops, DEFAULT_NODE_BUDGET};
use crate::subst::Substitution;
use crate::term::{rename, Atom, Clause, Subst, Term};

pub const DEFAULT_DEPTH: usize = 1000;
pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfirmConfig {
    pub depth: usize,
    pub samples: usize,
    pub seed: u64,
    pub node_budget: usize,
}

impl Default for ConfirmConfig {
    fn default() -> Self {
        ConfirmConfig {
            depth: DEFAULT_DEPTH,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confirmation {
    /// The condition's atom loops against the provenance sequence.
    pub witness: bool,
    pub members_total: usize,
    pub members_confirmed: usize,
}

impl Confirmation {
    pub fn confirmed(&self) -> bool {
        self.witness && self.members_confirmed == self.members_total
    }
}

const CONSTANTS: [&str; 4] = ["a", "b", "0", "[]"];

fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    let choice = if depth == 0 {
        rng.gen_range(0..2)
    } else {
        rng.gen_range(0..5)
    };
    match choice {
        0 => Term::fresh_var(),
        1 => Term::constant(CONSTANTS.choose(rng).expect("non-empty")),
        2 => Term::app("s", vec![random_term(rng, depth - 1)]),
        3 => Term::cons(random_term(rng, depth - 1), random_term(rng, depth - 1)),
        _ => Term::app(
            "f",
            vec![random_term(rng, depth - 1), random_term(rng, depth - 1)],
        ),
    }
}

/// A random instance of `u`, with variables renamed apart from everything else.
fn random_instance(u: &Term, rng: &mut ChaCha8Rng) -> Term {
    let (u, _) = rename(u);
    let mut s = Substitution::new();
    for v in u.vars() {
        if rng.gen_bool(0.5) {
            s.bind(v, random_term(rng, 2));
        }
    }
    u.apply(&s)
}

/// Replaces random subterm occurrences of `t` by distinct fresh variables.
fn random_generalization(t: &Term, rng: &mut ChaCha8Rng) -> Term {
    if rng.gen_bool(0.25) {
        return Term::fresh_var();
    }
    match t {
        Term::Var(_) => t.clone(),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| random_generalization(a, rng)).collect(),
        ),
    }
}

/// A random query in the class denoted by `cond`.
pub fn sample_member(cond: &LoopingCondition, rng: &mut ChaCha8Rng) -> Atom {
    let pred = cond.pred();
    let args = cond
        .atom
        .args
        .iter()
        .enumerate()
        .map(|(k, a)| match cond.tau.term(&pred, k + 1) {
            Some(u) => random_instance(u, rng),
            None => random_generalization(a, rng),
        })
        .collect();
    Atom::new(&cond.atom.name, args)
}

/// Runs the oracle on the condition's atom and on `config.samples` members,
/// each against the condition's provenance sequence. `index` perturbs the seed
/// so that each condition draws its own members.
pub fn confirm(cond: &LoopingCondition, config: &ConfirmConfig, index: u64) -> Confirmation {
    let program: Vec<Clause> = cond.provenance.bin_seq().iter().map(|c| c.to_clause()).collect();
    let loops = |q: &Atom| left_loops(&program, q, config.depth, config.node_budget).loops;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(index));
    let mut out = Confirmation {
        witness: loops(&cond.atom),
        ..Confirmation::default()
    };
    for _ in 0..config.samples {
        let q = sample_member(cond, &mut rng);
        out.members_total += 1;
        if membership(&q, cond) && loops(&q) {
            out.members_confirmed += 1;
        }
    }
    out
}
