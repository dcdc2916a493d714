//! Canonical variants: variables renumbered `X1, X2, ...` by first occurrence.
//!
//! Two values are variants exactly when their canonical forms are equal, so the
//! rendered canonical form doubles as a dedup key.

use crate::subst::Substitution;
use crate::term::{Subst, Term, Var};

pub fn canonicalize<T: Subst>(x: &T) -> T {
    let ren: Substitution = x
        .vars()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, Term::Var(Var::canonical(i as u64 + 1))))
        .collect();
    x.apply(&ren)
}

/// Canonical rendering of `x`; equal for variants and only for variants.
pub fn canonical_form<T: Subst + std::fmt::Display>(x: &T) -> String {
    canonicalize(x).to_string()
}
