//! Unification, one-way matching and the generality order.

use std::collections::BTreeMap;

use crate::subst::Substitution;
use crate::term::{Atom, Subst, Term, Var};

/// Extends the idempotent `s` so that it unifies every pair, with occur check.
/// On failure `s` is left in an unspecified state.
fn unify_into(s: &mut Substitution, pairs: Vec<(Term, Term)>) -> bool {
    let mut stack = pairs;
    while let Some((a, b)) = stack.pop() {
        let a = a.apply(s);
        let b = b.apply(s);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.occurs(&x) {
                    return false;
                }
                s.bind_eliminating(x, t);
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return false;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
        }
    }
    true
}

pub fn mgu_terms(a: &Term, b: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    unify_into(&mut s, vec![(a.clone(), b.clone())]).then_some(s)
}

/// Most general unifier of two atoms, or `None` if they do not unify.
pub fn mgu(a: &Atom, b: &Atom) -> Option<Substitution> {
    if !a.same_pred(b) {
        return None;
    }
    mgu_tuple(&a.args, &b.args)
}

/// Simultaneous mgu of two equally long term tuples.
///
/// # Panics
/// If the tuples differ in length.
pub fn mgu_tuple(a: &[Term], b: &[Term]) -> Option<Substitution> {
    assert_eq!(a.len(), b.len(), "mgu_tuple called on tuples of different length");
    let mut s = Substitution::new();
    let pairs = a.iter().cloned().zip(b.iter().cloned()).collect();
    unify_into(&mut s, pairs).then_some(s)
}

/// Extends `s` with the unifier of `a` and `b`, returning `false` on clash.
pub fn unify_with(s: &mut Substitution, a: &Atom, b: &Atom) -> bool {
    a.same_pred(b) && unify_into(s, a.args.iter().cloned().zip(b.args.iter().cloned()).collect())
}

/// Raw variable bindings built up by one-way matching. Unlike
/// [`Substitution`], identity bindings are kept so that a variable matched
/// against itself stays fixed.
pub type Bindings = BTreeMap<Var, Term>;

/// Extends `b` so that `general·b = specific`, never instantiating `specific`.
pub fn match_term_into(b: &mut Bindings, general: &Term, specific: &Term) -> bool {
    match general {
        Term::Var(v) => match b.get(v) {
            Some(t) => t == specific,
            None => {
                b.insert(v.clone(), specific.clone());
                true
            }
        },
        Term::App(f, xs) => match specific {
            Term::App(g, ys) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys.iter()).all(|(x, y)| match_term_into(b, x, y))
            }
            _ => false,
        },
    }
}

pub fn match_tuple_into(b: &mut Bindings, general: &[Term], specific: &[Term]) -> bool {
    general.len() == specific.len()
        && general
            .iter()
            .zip(specific)
            .all(|(g, t)| match_term_into(b, g, t))
}

pub fn to_substitution(b: Bindings) -> Substitution {
    b.into_iter().collect()
}

pub fn match_terms(general: &Term, specific: &Term) -> Option<Substitution> {
    let mut b = Bindings::new();
    match_term_into(&mut b, general, specific).then(|| to_substitution(b))
}

/// A substitution `θ` with `general·θ = specific`, if one exists.
pub fn match_atoms(general: &Atom, specific: &Atom) -> Option<Substitution> {
    if !general.same_pred(specific) {
        return None;
    }
    let mut b = Bindings::new();
    match_tuple_into(&mut b, &general.args, &specific.args).then(|| to_substitution(b))
}

pub fn term_more_general(general: &Term, specific: &Term) -> bool {
    match_terms(general, specific).is_some()
}

pub fn atom_more_general(general: &Atom, specific: &Atom) -> bool {
    match_atoms(general, specific).is_some()
}

pub fn is_variant_terms(a: &Term, b: &Term) -> bool {
    term_more_general(a, b) && term_more_general(b, a)
}

pub fn is_variant_atoms(a: &Atom, b: &Atom) -> bool {
    atom_more_general(a, b) && atom_more_general(b, a)
}

/// The less general of two comparable terms, or `None` if neither is an instance
/// of the other. Returns `a` when they are variants.
pub fn less_general<'a>(a: &'a Term, b: &'a Term) -> Option<&'a Term> {
    if term_more_general(b, a) {
        Some(a)
    } else if term_more_general(a, b) {
        Some(b)
    } else {
        None
    }
}
