//! Sets of positions with associated terms, the Δ-more-general relation they
//! induce, the DN1-DN4 checks and the `dna` refinement algorithm.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::canon::canonical_form;
use crate::term::{rename, Atom, BinClause, Pred, Subst, Term};
use crate::unify::{is_variant_terms, less_general, match_tuple_into, term_more_general, Bindings};

/// Per relation symbol, a partial map from 1-based argument positions to terms.
/// Symbols that are absent map to the empty partial function.
#[derive(Clone, Debug, Default)]
pub struct PosTermMap {
    map: BTreeMap<Pred, BTreeMap<usize, Term>>,
}

impl PosTermMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every position of every symbol in `sig`, each mapped to a distinct fresh variable.
    pub fn tau_max<'a, I: IntoIterator<Item = &'a Pred>>(sig: I) -> Self {
        let mut t = PosTermMap::new();
        for p in sig {
            let inner = (1..=p.arity).map(|i| (i, Term::fresh_var())).collect();
            t.map.insert(p.clone(), inner);
        }
        t
    }

    /// Positions only, each with a fresh variable as its term.
    pub fn from_positions(pred: &Pred, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut t = PosTermMap::new();
        for i in positions {
            t.insert(pred, i, &Term::fresh_var());
        }
        t
    }

    pub fn get(&self, p: &Pred) -> Option<&BTreeMap<usize, Term>> {
        self.map.get(p)
    }

    pub fn term(&self, p: &Pred, i: usize) -> Option<&Term> {
        self.map.get(p)?.get(&i)
    }

    pub fn contains(&self, p: &Pred, i: usize) -> bool {
        self.term(p, i).is_some()
    }

    pub fn domain(&self, p: &Pred) -> BTreeSet<usize> {
        self.map
            .get(p)
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default()
    }

    /// Maps position `i` of `p` to a fresh variant of `t`.
    ///
    /// # Panics
    /// If `i` is not in `1..=arity(p)`.
    pub fn insert(&mut self, p: &Pred, i: usize, t: &Term) {
        assert!(i >= 1 && i <= p.arity, "position {i} out of range for {p}");
        let (t, _) = rename(t);
        self.map.entry(p.clone()).or_default().insert(i, t);
    }

    pub fn remove(&mut self, p: &Pred, i: usize) {
        if let Some(m) = self.map.get_mut(p) {
            m.remove(&i);
        }
    }

    pub fn retain(&mut self, p: &Pred, mut keep: impl FnMut(usize) -> bool) {
        if let Some(m) = self.map.get_mut(p) {
            m.retain(|&i, _| keep(i));
        }
    }

    pub fn preds(&self) -> impl Iterator<Item = &Pred> {
        self.map.keys()
    }

    /// Equality up to renaming of each associated term, with absent symbols
    /// and empty partial maps identified.
    pub fn same_as(&self, other: &PosTermMap) -> bool {
        let preds: BTreeSet<&Pred> = self.map.keys().chain(other.map.keys()).collect();
        preds.into_iter().all(|p| {
            let empty = BTreeMap::new();
            let a = self.map.get(p).unwrap_or(&empty);
            let b = other.map.get(p).unwrap_or(&empty);
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|((i, s), (j, t))| i == j && is_variant_terms(s, t))
        })
    }

    /// `p: {2 -> [X1|X2], 3 -> _}`; a lone variable is shown as `_`.
    pub fn render_pred(&self, p: &Pred) -> String {
        let mut s = format!("{p}: {{");
        if let Some(m) = self.map.get(p) {
            for (k, (i, t)) in m.iter().enumerate() {
                if k > 0 {
                    s.push_str(", ");
                }
                s.push_str(&format!("{i} -> {}", render_assoc(t)));
            }
        }
        s.push('}');
        s
    }
}

/// Associated-term text: `_` for a variable, canonical text otherwise.
pub fn render_assoc(t: &Term) -> String {
    if t.is_var() {
        "_".to_string()
    } else {
        canonical_form(t)
    }
}

impl fmt::Display for PosTermMap {
    /// Symbols with a non-empty domain, separated by `; `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, m) in &self.map {
            if m.is_empty() {
                continue;
            }
            if !first {
                f.write_str("; ")?;
            }
            first = false;
            f.write_str(&self.render_pred(p))?;
        }
        if first {
            f.write_str("{}")?;
        }
        Ok(())
    }
}

/// Whether `a` is Δ[τ]-more general than `b`: one substitution maps the
/// non-distinguished arguments of `a` onto those of `b`, and each distinguished
/// argument of `a` is an instance of its associated term.
pub fn delta_more_general(a: &Atom, b: &Atom, tau: &PosTermMap) -> bool {
    if !a.same_pred(b) {
        return false;
    }
    let pred = a.pred();
    let dist = tau.get(&pred);
    let mut gen = Vec::new();
    let mut spec = Vec::new();
    for (k, (s, t)) in a.args.iter().zip(&b.args).enumerate() {
        match dist.and_then(|m| m.get(&(k + 1))) {
            Some(u) => {
                if !term_more_general(u, s) {
                    return false;
                }
            }
            None => {
                gen.push(s.clone());
                spec.push(t.clone());
            }
        }
    }
    match_tuple_into(&mut Bindings::new(), &gen, &spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DnCondition {
    Dn1,
    Dn2,
    Dn3,
    Dn4,
}

impl fmt::Display for DnCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            DnCondition::Dn1 => 1,
            DnCondition::Dn2 => 2,
            DnCondition::Dn3 => 3,
            DnCondition::Dn4 => 4,
        };
        write!(f, "DN{n}")
    }
}

/// The first failing condition found by [`check_dn`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{condition} fails for clause {clause} at position {position}")]
pub struct DnViolation {
    pub condition: DnCondition,
    /// 0-based index into the checked clause list.
    pub clause: usize,
    pub position: usize,
}

fn shares_var(a: &Term, b: &Term) -> bool {
    let va = a.var_set();
    let mut hit = false;
    b.visit_vars(&mut |v| hit |= va.contains(v));
    hit
}

/// Checks DN1 to DN4 on every clause, reporting the first violation.
pub fn check_dn(prog: &[BinClause], tau: &PosTermMap) -> Result<(), DnViolation> {
    for (ci, c) in prog.iter().enumerate() {
        let p = c.head.pred();
        let s = &c.head.args;
        let fail = |condition, position| DnViolation {
            condition,
            clause: ci,
            position,
        };
        let head_dom = tau.get(&p).cloned().unwrap_or_default();
        for &i in head_dom.keys() {
            if (0..s.len()).any(|j| j != i - 1 && shares_var(&s[i - 1], &s[j])) {
                return Err(fail(DnCondition::Dn1, i));
            }
        }
        for (&i, u) in &head_dom {
            if !term_more_general(&s[i - 1], u) {
                return Err(fail(DnCondition::Dn2, i));
            }
        }
        let Some(body) = &c.body else { continue };
        let q = body.pred();
        let t = &body.args;
        let body_dom = tau.get(&q).cloned().unwrap_or_default();
        for (&j, u) in &body_dom {
            if !term_more_general(u, &t[j - 1]) {
                return Err(fail(DnCondition::Dn3, j));
            }
        }
        for &i in head_dom.keys() {
            let leaks = (1..=t.len())
                .filter(|j| !body_dom.contains_key(j))
                .any(|j| shares_var(&s[i - 1], &t[j - 1]));
            if leaks {
                return Err(fail(DnCondition::Dn4, i));
            }
        }
    }
    Ok(())
}

pub fn is_dn(prog: &[BinClause], tau: &PosTermMap) -> bool {
    check_dn(prog, tau).is_ok()
}

/// `t1 ⪯ t2`: every domain of `t1` is included in that of `t2`, whose terms are
/// more general than those of `t1`.
pub fn preceq(t1: &PosTermMap, t2: &PosTermMap) -> bool {
    t1.map.iter().all(|(p, m1)| {
        m1.iter()
            .all(|(i, u1)| t2.term(p, *i).is_some_and(|u2| term_more_general(u2, u1)))
    })
}

/// Drops head positions whose argument shares a variable with another argument.
/// Restrictions accumulate across clauses with the same head symbol.
pub fn satisfy_dn1(prog: &[BinClause], tau: &PosTermMap) -> PosTermMap {
    let mut out = tau.clone();
    for c in prog {
        let s = &c.head.args;
        let e: BTreeSet<usize> = (1..=s.len())
            .filter(|&i| (0..s.len()).all(|j| j == i - 1 || !shares_var(&s[i - 1], &s[j])))
            .collect();
        out.retain(&c.head.pred(), |i| e.contains(&i));
    }
    out
}

/// Replaces each head association by the less general of it and the head
/// argument, dropping positions where the two are incomparable.
pub fn satisfy_dn2(prog: &[BinClause], tau: &PosTermMap) -> PosTermMap {
    let mut out = tau.clone();
    for c in prog {
        let p = c.head.pred();
        let mut dropped = BTreeSet::new();
        for i in out.domain(&p) {
            let s_i = &c.head.args[i - 1];
            let u_i = out.term(&p, i).expect("position in domain").clone();
            match less_general(s_i, &u_i) {
                Some(t) => {
                    let t = t.clone();
                    out.insert(&p, i, &t);
                }
                None => {
                    dropped.insert(i);
                }
            }
        }
        out.retain(&p, |i| !dropped.contains(&i));
    }
    out
}

/// Drops body positions whose argument is not an instance of the association.
pub fn satisfy_dn3(prog: &[BinClause], tau: &PosTermMap) -> PosTermMap {
    let mut out = tau.clone();
    for c in prog {
        let Some(body) = &c.body else { continue };
        let q = body.pred();
        let dropped: BTreeSet<usize> = out
            .get(&q)
            .into_iter()
            .flatten()
            .filter(|(j, u)| !term_more_general(u, &body.args[*j - 1]))
            .map(|(j, _)| *j)
            .collect();
        out.retain(&q, |j| !dropped.contains(&j));
    }
    out
}

/// Drops head positions sharing a variable with a non-distinguished body argument.
pub fn satisfy_dn4(prog: &[BinClause], tau: &PosTermMap) -> PosTermMap {
    let mut out = tau.clone();
    for c in prog {
        let Some(body) = &c.body else { continue };
        let p = c.head.pred();
        let q = body.pred();
        let body_dom = out.domain(&q);
        let dropped: BTreeSet<usize> = out
            .domain(&p)
            .into_iter()
            .filter(|&i| {
                let s_i = &c.head.args[i - 1];
                (1..=body.args.len())
                    .filter(|j| !body_dom.contains(j))
                    .any(|j| shares_var(s_i, &body.args[j - 1]))
            })
            .collect();
        out.retain(&p, |i| !dropped.contains(&i));
    }
    out
}

/// Refines `tau` into a set of positions with associated terms that is DN for `prog`.
pub fn dna(prog: &[BinClause], tau: &PosTermMap) -> PosTermMap {
    let mut t = satisfy_dn1(prog, tau);
    t = satisfy_dn2(prog, &t);
    t = satisfy_dn3(prog, &t);
    loop {
        let next = satisfy_dn4(prog, &t);
        if next.same_as(&t) {
            return t;
        }
        t = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};

    fn bins(src: &str) -> Vec<BinClause> {
        parse_program(src)
            .unwrap()
            .clauses()
            .iter()
            .map(|c| BinClause::try_from(c).unwrap())
            .collect()
    }

    fn sig(prog: &[BinClause]) -> BTreeSet<Pred> {
        prog.iter()
            .flat_map(|c| std::iter::once(c.head.pred()).chain(c.body.iter().map(Atom::pred)))
            .collect()
    }

    #[test]
    fn append_recursive_clause() {
        let prog = bins("append([X|Xs],Ys,[X|Zs]) :- append(Xs,Ys,Zs).");
        let tau = dna(&prog, &PosTermMap::tau_max(&sig(&prog)));
        let app = Pred::new("append", 3);
        assert_eq!(tau.domain(&app), BTreeSet::from([2]));
        assert!(tau.term(&app, 2).unwrap().is_var());
        assert!(is_dn(&prog, &tau));
        let c = &prog[0];
        assert!(delta_more_general(c.body.as_ref().unwrap(), &c.head, &tau));
    }

    #[test]
    fn merge_clause_keeps_list_pattern() {
        let prog = bins("merge([X|Xs],[Y|Ys],[X|Zs]) :- merge(Xs,[Y|Ys],Zs).");
        let tau = dna(&prog, &PosTermMap::tau_max(&sig(&prog)));
        let m = Pred::new("merge", 3);
        assert_eq!(tau.render_pred(&m), "merge/3: {2 -> [X1|X2]}");
    }

    #[test]
    fn shared_head_variables_block_positions() {
        let prog = bins("p(X,X) :- p(f(X),f(X)).");
        let tau = dna(&prog, &PosTermMap::tau_max(&sig(&prog)));
        assert!(tau.domain(&Pred::new("p", 2)).is_empty());
    }

    #[test]
    fn delta_more_general_example() {
        // positions 1 -> any term, 2 -> instances of [X|Y]
        let p = Pred::new("p", 3);
        let mut tau = PosTermMap::new();
        tau.insert(&p, 1, &Term::fresh_var());
        tau.insert(
            &p,
            2,
            &Term::list(vec![Term::fresh_var()], Some(Term::fresh_var())),
        );
        let a = parse_query("p(b, X, h(a, X))").unwrap();
        let b = parse_query("p(a, [a|b], X)").unwrap();
        let c = parse_query("p(a, [a|b], h(Y, b))").unwrap();
        assert!(!delta_more_general(&a, &b, &tau));
        assert!(!delta_more_general(&a, &c, &tau));
        assert!(delta_more_general(&b, &a, &tau));
        assert!(delta_more_general(&b, &c, &tau));
        assert!(!delta_more_general(&c, &a, &tau));
        assert!(!delta_more_general(&c, &b, &tau));
    }

    #[test]
    fn violation_report_names_condition() {
        let prog = bins("p(X,Y) :- q(X).");
        let p = Pred::new("p", 2);
        let tau = PosTermMap::from_positions(&p, [1]);
        let v = check_dn(&prog, &tau).unwrap_err();
        assert_eq!((v.condition, v.clause, v.position), (DnCondition::Dn4, 0, 1));
    }

    #[test]
    fn preceq_is_reflexive_and_dna_refines() {
        let prog = bins("p(f(X),Y) :- p(X,g(Y)).\np(a,b).");
        let top = PosTermMap::tau_max(&sig(&prog));
        let t = dna(&prog, &top);
        assert!(preceq(&top, &top));
        assert!(preceq(&t, &top));
        assert!(is_dn(&prog, &t));
    }

    #[test]
    fn display_skips_empty_domains() {
        let p = Pred::new("p", 2);
        let mut t = PosTermMap::tau_max([&p]);
        assert_eq!(t.to_string(), "p/2: {1 -> _, 2 -> _}");
        t.retain(&p, |_| false);
        assert_eq!(t.to_string(), "{}");
    }
}
