//! Seeded generators for random terms, binary programs and queries.

#![allow(dead_code)]

use std::collections::BTreeMap;

use loopfinder::dn::PosTermMap;
use loopfinder::subst::Substitution;
use loopfinder::term::{rename, Atom, BinClause, Clause, Pred, Program, Subst, Term, Var};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

const PREDS: [&str; 3] = ["p", "q", "r"];

/// Random term over `vars`, constants `a`, `b`, `[]` and functors `f/1`,
/// `g/2` and list cons, of depth at most `depth`.
pub fn term(rng: &mut Rng8, vars: &[Var], depth: usize) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        return if !vars.is_empty() && rng.gen_bool(0.6) {
            Term::Var(vars.choose(rng).unwrap().clone())
        } else {
            Term::constant(["a", "b", "[]"].choose(rng).unwrap())
        };
    }
    match rng.gen_range(0..3) {
        0 => Term::app("f", vec![term(rng, vars, depth - 1)]),
        1 => Term::app("g", vec![term(rng, vars, depth - 1), term(rng, vars, depth - 1)]),
        _ => Term::cons(term(rng, vars, depth - 1), term(rng, vars, depth - 1)),
    }
}

/// A fixed arity (0..=3) for each of the predicate symbols.
pub fn arities(rng: &mut Rng8) -> BTreeMap<&'static str, usize> {
    PREDS.iter().map(|p| (*p, rng.gen_range(0..=3))).collect()
}

pub fn atom(rng: &mut Rng8, arities: &BTreeMap<&'static str, usize>, vars: &[Var], depth: usize) -> Atom {
    let (name, n) = arities
        .iter()
        .collect::<Vec<_>>()
        .choose(rng)
        .map(|(a, b)| (**a, **b))
        .unwrap();
    Atom::new(name, (0..n).map(|_| term(rng, vars, depth)).collect())
}

pub fn var_pool(n: usize) -> Vec<Var> {
    (0..n).map(|k| Var::fresh_named(&format!("V{k}"))).collect()
}

/// A binary clause; the body is `true` with probability one fifth.
pub fn bin_clause(rng: &mut Rng8, arities: &BTreeMap<&'static str, usize>, depth: usize) -> BinClause {
    let vars = var_pool(4);
    let head = atom(rng, arities, &vars, depth);
    let body = (!rng.gen_bool(0.2)).then(|| atom(rng, arities, &vars, depth));
    BinClause::new(head, body)
}

/// Up to six binary clauses over shared arities.
pub fn bin_program(rng: &mut Rng8, depth: usize) -> Vec<BinClause> {
    let ar = arities(rng);
    let n = rng.gen_range(1..=6);
    (0..n).map(|_| bin_clause(rng, &ar, depth)).collect()
}

pub fn signature(prog: &[BinClause]) -> Vec<Pred> {
    let mut sig: Vec<Pred> = prog
        .iter()
        .flat_map(|c| std::iter::once(c.head.pred()).chain(c.body.iter().map(Atom::pred)))
        .collect();
    sig.sort();
    sig.dedup();
    sig
}

/// A random set of positions with associated terms over `sig`.
pub fn pos_term_map(rng: &mut Rng8, sig: &[Pred], depth: usize) -> PosTermMap {
    let mut tau = PosTermMap::new();
    let vars = var_pool(3);
    for p in sig {
        for i in 1..=p.arity {
            if rng.gen_bool(0.6) {
                let t = if rng.gen_bool(0.5) {
                    Term::fresh_var()
                } else {
                    term(rng, &vars, depth)
                };
                tau.insert(p, i, &t);
            }
        }
    }
    tau
}

/// Binds each variable of `x` to a random term with probability one half.
pub fn instance<T: Subst>(rng: &mut Rng8, x: &T, depth: usize) -> T {
    let (x, _) = rename(x);
    let extra = var_pool(2);
    let mut s = Substitution::new();
    for v in x.vars() {
        if rng.gen_bool(0.5) {
            s.bind(v, term(rng, &extra, depth));
        }
    }
    x.apply(&s)
}

/// Replaces random subterm occurrences by distinct fresh variables.
pub fn generalize(rng: &mut Rng8, t: &Term) -> Term {
    if rng.gen_bool(0.3) {
        return Term::fresh_var();
    }
    match t {
        Term::Var(_) => t.clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| generalize(rng, a)).collect()),
    }
}

pub fn generalize_atom(rng: &mut Rng8, a: &Atom) -> Atom {
    Atom::new(&a.name, a.args.iter().map(|t| generalize(rng, t)).collect())
}

/// An atom that is Δ[τ]-more general than `a`: distinguished arguments are
/// replaced by instances of their associated terms, the others generalized.
pub fn delta_generalize(rng: &mut Rng8, a: &Atom, tau: &PosTermMap) -> Atom {
    let p = a.pred();
    let args = a
        .args
        .iter()
        .enumerate()
        .map(|(k, t)| match tau.term(&p, k + 1) {
            Some(u) => instance(rng, u, 2),
            None => generalize(rng, t),
        })
        .collect();
    Atom::new(&a.name, args)
}

/// Term for whole programs: mostly variables, so that heads and bodies unify often.
pub fn loose_term(rng: &mut Rng8, vars: &[Var], depth: usize) -> Term {
    if depth == 0 || rng.gen_bool(0.6) {
        return if rng.gen_bool(0.8) {
            Term::Var(vars.choose(rng).unwrap().clone())
        } else {
            Term::constant(["a", "[]"].choose(rng).unwrap())
        };
    }
    if rng.gen_bool(0.5) {
        Term::app("f", vec![loose_term(rng, vars, depth - 1)])
    } else {
        Term::cons(loose_term(rng, vars, depth - 1), loose_term(rng, vars, depth - 1))
    }
}

/// Up to five definite clauses over `p/1..2` and `q/1..2`, with at most two
/// body atoms each.
pub fn program(rng: &mut Rng8, depth: usize) -> Program {
    let ar: Vec<(&str, usize)> = vec![("p", rng.gen_range(1..=2)), ("q", rng.gen_range(1..=2))];
    let n = rng.gen_range(1..=5);
    let clauses = (0..n)
        .map(|_| {
            let vars = var_pool(3);
            let atom = |rng: &mut Rng8| {
                let (name, k) = *ar.choose(rng).unwrap();
                Atom::new(name, (0..k).map(|_| loose_term(rng, &vars, depth)).collect())
            };
            let head = atom(rng);
            let k = rng.gen_range(0..=2);
            let body = (0..k).map(|_| atom(rng)).collect();
            Clause::new(head, body)
        })
        .collect();
    Program::new(clauses).unwrap()
}
