//! Acceptance criteria. Runs without the libtest harness so that each
//! criterion's PASS/FAIL line, running time and limit always reach stdout.
//! Exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use loopfinder::canon::canonical_form;
use loopfinder::confirm::{confirm, ConfirmConfig};
use loopfinder::dn::{delta_more_general, dna, is_dn, preceq, PosTermMap};
use loopfinder::error::ResourceError;
use loopfinder::loops::{infer_loop_cond, membership, InferenceConfig, LoopingCondition};
use loopfinder::modes::{looping_modes, optimal_tc, parse_modes, MultiMode, OptimalReport};
use loopfinder::oracle::{left_loops, left_step, DEFAULT_NODE_BUDGET};
use loopfinder::parser::{parse_program, parse_query};
use loopfinder::term::{Atom, BinClause, Clause, Pred, Program};
use loopfinder::unfold::{tp_beta_upto, UnfoldConfig};
use loopfinder::unify::{atom_more_general, is_variant_atoms, is_variant_terms};

use common::Rng8;

const LIMIT_GOLDEN: Duration = Duration::from_millis(100);
const LIMIT_APPEND: Duration = Duration::from_millis(100);
const LIMIT_SMALL: Duration = Duration::from_millis(500);
const LIMIT_MULT: Duration = Duration::from_secs(2);
const LIMIT_ORACLE: Duration = Duration::from_secs(10);
const LIMIT_DNA: Duration = Duration::from_secs(10);
const LIMIT_DELTA_LIFT: Duration = Duration::from_secs(10);
const LIMIT_LIFT: Duration = Duration::from_secs(5);
const LIMIT_POOL_CAP: Duration = Duration::from_secs(2);

const ORACLE_DEPTH: usize = 1000;
const ORACLE_SAMPLES: usize = 20;
const PROPERTY_CASES: usize = 500;
const PROPERTY_ATTEMPTS: usize = 200_000;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn load(name: &str) -> Program {
    let src = std::fs::read_to_string(fixture(&format!("{name}.pl"))).unwrap();
    parse_program(&src).unwrap()
}

fn modes_of(name: &str, program: &Program) -> std::collections::BTreeMap<Pred, MultiMode> {
    let text = std::fs::read_to_string(fixture(&format!("{name}_modes.json"))).unwrap();
    parse_modes(&text, program).unwrap()
}

fn mm(modes: &[&[usize]]) -> MultiMode {
    modes.iter().map(|m| m.iter().copied().collect()).collect()
}

fn dom(ps: &[usize]) -> BTreeSet<usize> {
    ps.iter().copied().collect()
}

fn atom(s: &str) -> Atom {
    parse_query(s).unwrap()
}

fn find<'a>(conds: &'a [LoopingCondition], a: &str, domain: &[usize]) -> Option<&'a LoopingCondition> {
    let a = atom(a);
    conds
        .iter()
        .find(|c| is_variant_atoms(&c.atom, &a) && c.neutral_positions() == dom(domain))
}

fn listing(conds: &[LoopingCondition]) -> String {
    conds.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; ")
}

fn report(program: &Program, max: usize, tm: &std::collections::BTreeMap<Pred, MultiMode>) -> OptimalReport {
    optimal_tc(program, max, tm, &InferenceConfig::default()).unwrap()
}

struct Outcome {
    id: &'static str,
    name: &'static str,
    limit: Duration,
    elapsed: Duration,
    result: Check,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.result.is_ok() && self.elapsed <= self.limit
    }

    fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let detail = match &self.result {
            Ok(d) if self.elapsed > self.limit => format!("too slow; {d}"),
            Ok(d) => d.clone(),
            Err(e) => e.clone(),
        };
        format!(
            "{status} {:>2} {:<34} {:>8.3}s (limit {:.1}s)  {detail}",
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs_f64()
        )
    }
}

fn run(id: &'static str, name: &'static str, limit: Duration, f: fn() -> Check) -> Outcome {
    let start = Instant::now();
    let result = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    };
    Outcome {
        id,
        name,
        limit,
        elapsed: start.elapsed(),
        result,
    }
}

/// Clauses first derived at each unfolding level of the left-recursive path program.
const PATH_LEFT_LEVELS: [&[&str]; 4] = [
    &["p(X,Z) :- p(Y,Z).", "p(X,X).", "q(a,b)."],
    &["p(a,b).", "p(X,Y) :- q(X,Y)."],
    &["p(X,b) :- q(X,a).", "p(X,Z) :- q(Y,Z)."],
    &["p(X,b) :- q(Y,a)."],
];

fn c1_golden() -> Check {
    let program = load("path_left");
    let pool = tp_beta_upto(&program, 10, &UnfoldConfig::default()).map_err(|e| e.to_string())?;
    for (k, level) in PATH_LEFT_LEVELS.iter().enumerate() {
        let stamp = k + 1;
        let expected: BTreeSet<String> = level
            .iter()
            .map(|src| {
                let parsed = parse_program(src).unwrap();
                canonical_form(&BinClause::try_from(&parsed.clauses()[0]).unwrap())
            })
            .collect();
        let got: BTreeSet<String> = pool
            .entries()
            .iter()
            .filter(|e| e.stamp == stamp)
            .map(|e| e.key.clone())
            .collect();
        ensure(got == expected, || {
            format!("level {stamp}: got {got:?}, expected {expected:?}")
        })?;
    }
    ensure(pool.len() == 8, || format!("pool has {} clauses", pool.len()))?;
    ensure(pool.fixpoint() == Some(4), || {
        format!("fixpoint {:?}", pool.fixpoint())
    })?;
    Ok("4 levels, 8 clauses, fixpoint at 4".into())
}

fn c2_append() -> Check {
    let program = load("append");
    let r = report(&program, 1, &modes_of("append", &program));
    let conds = &r.inference.conditions;
    find(conds, "append([X1|X2],X3,[X1|X4])", &[2])
        .ok_or_else(|| format!("no append condition with {{2}}: {}", listing(conds)))?;
    let s = &r.per_pred[&Pred::new("append", 3)];
    ensure(s.looping == mm(&[&[2]]), || {
        format!("LM_append = {:?}", s.looping)
    })?;
    ensure(s.undecided.is_empty(), || format!("M_append = {:?}", s.undecided))?;
    Ok("LM {{2}}, M empty".into())
}

fn c3_append3() -> Check {
    let program = load("append3");
    let r = report(&program, 2, &modes_of("append3", &program));
    let conds = &r.inference.conditions;
    let listed = [
        ("append([X1|X2],X3,[X1|X4])", &[2][..]),
        ("append3(X1,X2,X3,X4)", &[2, 3, 4][..]),
        ("append3([],X1,X2,X3)", &[3][..]),
    ];
    let mut listed_conds = Vec::new();
    for (a, d) in listed {
        let c = find(conds, a, d).ok_or_else(|| format!("missing {a} {d:?}: {}", listing(conds)))?;
        listed_conds.push(c);
    }
    for c in conds {
        ensure(listed_conds.iter().any(|p| membership(&p.atom, c)), || {
            format!("{c} contains none of the three listed classes")
        })?;
    }
    let a = &r.per_pred[&Pred::new("append", 3)];
    let a3 = &r.per_pred[&Pred::new("append3", 4)];
    ensure(a.looping == mm(&[&[2]]), || {
        format!("LM_append = {:?}", a.looping)
    })?;
    ensure(a3.looping == mm(&[&[2, 3, 4], &[1, 3]]), || {
        format!("LM_append3 = {:?}", a3.looping)
    })?;
    ensure(a3.undecided.is_empty(), || {
        format!("M_append3 = {:?}", a3.undecided)
    })?;
    ensure(a.undecided.is_empty(), || format!("M_append = {:?}", a.undecided))?;
    Ok(format!(
        "3 listed conditions present, {} emitted, each containing a listed class",
        conds.len()
    ))
}

fn c4_permute() -> Check {
    let program = load("permute");
    let r = report(&program, 1, &modes_of("permute", &program));
    let conds = &r.inference.conditions;
    find(conds, "delete(X1,[X2|X3],[X2|X4])", &[1])
        .ok_or_else(|| format!("no delete condition with {{1}}: {}", listing(conds)))?;
    let p = find(conds, "permute([X1|X2],[X3|X4])", &[2])
        .ok_or_else(|| format!("no permute condition with {{2}}: {}", listing(conds)))?;
    let u = p.tau.term(&Pred::new("permute", 2), 2).unwrap();
    let expected = atom("t([X3|X4])").args[0].clone();
    ensure(is_variant_terms(u, &expected), || format!("associated term {u}"))?;
    let s = &r.per_pred[&Pred::new("permute", 2)];
    ensure(s.undecided.is_empty(), || {
        format!("M_permute = {:?}", s.undecided)
    })?;
    Ok("delete {1}, permute {2 -> [X3|X4]}, M empty".into())
}

fn accepted_by(program: &Program, max: usize, queries: &[&str]) -> Check {
    let inf = infer_loop_cond(program, max, &InferenceConfig::default()).map_err(|e| e.to_string())?;
    let mut witnesses = Vec::new();
    for q in queries {
        let q = atom(q);
        let c = inf
            .conditions
            .iter()
            .find(|c| membership(&q, c))
            .ok_or_else(|| format!("{q} in no class: {}", listing(&inf.conditions)))?;
        witnesses.push(format!("{q} in {}", canonical_form(&c.atom)));
    }
    Ok(witnesses.join(", "))
}

fn c5_reverse() -> Check {
    accepted_by(&load("reverse"), 2, &["reverse(As,[])"])
}

fn c6_merge() -> Check {
    accepted_by(&load("merge"), 2, &["merge(As,[0],Bs)", "merge([0],As,Bs)"])
}

fn c7_mult() -> Check {
    accepted_by(&load("mult"), 4, &["mult(s(s(0)),A,B)"])
}

fn c8_negative() -> Check {
    let fold = load("fold_ground");
    let inf = infer_loop_cond(&fold, 2, &InferenceConfig::default()).map_err(|e| e.to_string())?;
    for p in fold.signature() {
        let lm = looping_modes(&inf.conditions, p);
        ensure(lm.is_empty(), || format!("looping modes for {p}: {lm:?}"))?;
    }
    let right = load("path_right");
    let inf = infer_loop_cond(&right, 5, &InferenceConfig::default()).map_err(|e| e.to_string())?;
    let fix = inf.pool.fixpoint();
    ensure(fix.is_some(), || {
        "path_right has no fixpoint within 5 iterations".into()
    })?;
    ensure(inf.conditions.is_empty(), || {
        format!("path_right conditions: {}", listing(&inf.conditions))
    })?;
    Ok(format!(
        "fold: no looping mode; path_right: fixpoint at {}, no condition",
        fix.unwrap()
    ))
}

const FIXTURES: [(&str, usize); 10] = [
    ("path_left", 2),
    ("append", 1),
    ("append3", 2),
    ("permute", 1),
    ("reverse", 2),
    ("merge", 2),
    ("mult", 4),
    ("fold_ground", 2),
    ("fold_var", 2),
    ("path_right", 5),
];

const NAMED_QUERIES: [(&str, &str); 4] = [
    ("reverse", "reverse(As,[])"),
    ("merge", "merge(As,[0],Bs)"),
    ("merge", "merge([0],As,Bs)"),
    ("mult", "mult(s(s(0)),A,B)"),
];

fn c9_oracle() -> Check {
    let config = ConfirmConfig {
        depth: ORACLE_DEPTH,
        samples: ORACLE_SAMPLES,
        ..ConfirmConfig::default()
    };
    let mut total = 0;
    let mut members = 0;
    for (name, max) in FIXTURES {
        let inf =
            infer_loop_cond(&load(name), max, &InferenceConfig::default()).map_err(|e| e.to_string())?;
        for (k, c) in inf.conditions.iter().enumerate() {
            let r = confirm(c, &config, k as u64);
            ensure(r.confirmed(), || format!("{name}: {c} not confirmed: {r:?}"))?;
            ensure(r.members_total == ORACLE_SAMPLES, || {
                format!("{name}: {c} sampled {r:?}")
            })?;
            total += 1;
            members += r.members_confirmed;
        }
    }
    ensure(total > 0, || "no condition to confirm".into())?;
    for (name, q) in NAMED_QUERIES {
        let q = atom(q);
        let run = left_loops(load(name).clauses(), &q, ORACLE_DEPTH, DEFAULT_NODE_BUDGET);
        ensure(run.loops, || {
            format!("{name}: {q} does not reach depth {ORACLE_DEPTH}")
        })?;
    }
    Ok(format!(
        "{total} conditions, {members} sampled members, {} named queries, all loop",
        NAMED_QUERIES.len()
    ))
}

fn c10_dna() -> Check {
    let mut rng = common::rng(10);
    for case in 0..PROPERTY_CASES {
        let prog = common::bin_program(&mut rng, 3);
        let sig = common::signature(&prog);
        let tau = if case % 2 == 0 {
            PosTermMap::tau_max(&sig)
        } else {
            common::pos_term_map(&mut rng, &sig, 2)
        };
        let out = dna(&prog, &tau);
        let shown = || prog.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        ensure(is_dn(&prog, &out), || {
            format!("case {case}: {out} not DN for {}", shown())
        })?;
        ensure(preceq(&out, &tau), || {
            format!("case {case}: {out} not below {tau}")
        })?;
    }
    Ok(format!("{PROPERTY_CASES} programs"))
}

/// A clause, a query that resolves with it, and that query's step.
fn random_step(rng: &mut Rng8) -> Option<(BinClause, Clause, Atom, Vec<Atom>)> {
    use rand::Rng;
    let ar = common::arities(rng);
    let c = common::bin_clause(rng, &ar, 3);
    let q = if rng.gen_bool(0.7) {
        common::instance(rng, &c.head, 2)
    } else {
        let vars = common::var_pool(3);
        Atom::new(
            &c.head.name,
            (0..c.head.arity()).map(|_| common::term(rng, &vars, 3)).collect(),
        )
    };
    let clause = c.to_clause();
    let step = left_step(std::slice::from_ref(&q), &clause)?;
    Some((c, clause, q, step.resolvent))
}

fn c11_delta_lifting() -> Check {
    use rand::Rng;
    let mut rng = common::rng(11);
    let mut done = 0;
    let mut distinguished = 0;
    for _ in 0..PROPERTY_ATTEMPTS {
        if done == PROPERTY_CASES {
            break;
        }
        let Some((c, clause, q, b)) = random_step(&mut rng) else {
            continue;
        };
        let sig = common::signature(std::slice::from_ref(&c));
        let seed = if rng.gen_bool(0.5) {
            PosTermMap::tau_max(&sig)
        } else {
            common::pos_term_map(&mut rng, &sig, 2)
        };
        let tau = if rng.gen_bool(0.8) {
            dna(std::slice::from_ref(&c), &seed)
        } else {
            seed
        };
        if !is_dn(std::slice::from_ref(&c), &tau) {
            continue;
        }
        let q2 = common::delta_generalize(&mut rng, &q, &tau);
        ensure(delta_more_general(&q2, &q, &tau), || {
            format!("generator: {q2} vs {q} under {tau}")
        })?;
        let step = left_step(std::slice::from_ref(&q2), &clause)
            .ok_or_else(|| format!("{q2} has no step with {c} though {q} does, tau {tau}"))?;
        let b2 = step.resolvent;
        let lifted = match (b2.as_slice(), b.as_slice()) {
            ([], []) => true,
            ([x], [y]) => delta_more_general(x, y, &tau),
            _ => false,
        };
        ensure(lifted, || {
            format!("{c}: {q2} gives {b2:?}, {q} gives {b:?}, tau {tau}")
        })?;
        if !tau.domain(&q.pred()).is_empty() {
            distinguished += 1;
        }
        done += 1;
    }
    ensure(done == PROPERTY_CASES, || format!("only {done} cases generated"))?;
    ensure(distinguished * 4 >= done, || {
        format!("only {distinguished} cases distinguish a position")
    })?;
    Ok(format!(
        "{done} lifted steps, {distinguished} with distinguished positions"
    ))
}

fn c12_lifting() -> Check {
    let mut rng = common::rng(12);
    let mut done = 0;
    for _ in 0..PROPERTY_ATTEMPTS {
        if done == PROPERTY_CASES {
            break;
        }
        let Some((c, clause, q, b)) = random_step(&mut rng) else {
            continue;
        };
        let q2 = common::generalize_atom(&mut rng, &q);
        ensure(atom_more_general(&q2, &q), || format!("generator: {q2} vs {q}"))?;
        let step = left_step(std::slice::from_ref(&q2), &clause)
            .ok_or_else(|| format!("{q2} has no step with {c} though {q} does"))?;
        let b2 = step.resolvent;
        let lifted = match (b2.as_slice(), b.as_slice()) {
            ([], []) => true,
            ([x], [y]) => atom_more_general(x, y),
            _ => false,
        };
        ensure(lifted, || format!("{c}: {q2} gives {b2:?}, {q} gives {b:?}"))?;
        done += 1;
    }
    ensure(done == PROPERTY_CASES, || format!("only {done} cases generated"))?;
    Ok(format!("{done} lifted steps"))
}

fn pool_cap() -> Check {
    let cap = 2000;
    match tp_beta_upto(&load("explode"), 20, &UnfoldConfig { pool_cap: cap }) {
        Err(ResourceError::PoolCap { cap: c, iteration }) if c == cap => {
            Ok(format!("cap {cap} exceeded at iteration {iteration}"))
        }
        Err(e) => Err(format!("unexpected error {e}")),
        Ok(pool) => Err(format!("no error; {} clauses", pool.len())),
    }
}

fn main() {
    let outcomes = [
        run("1", "binary unfoldings golden", LIMIT_GOLDEN, c1_golden),
        run("2", "append pipeline", LIMIT_APPEND, c2_append),
        run("3", "append3", LIMIT_SMALL, c3_append3),
        run("4", "permute", LIMIT_SMALL, c4_permute),
        run("5", "reverse", LIMIT_SMALL, c5_reverse),
        run("6", "merge", LIMIT_SMALL, c6_merge),
        run("7", "mult", LIMIT_MULT, c7_mult),
        run("8", "negative controls", LIMIT_SMALL, c8_negative),
        run("9", "oracle confirmation", LIMIT_ORACLE, c9_oracle),
        run("10", "dna contract", LIMIT_DNA, c10_dna),
        run("11", "delta lifting", LIMIT_DELTA_LIFT, c11_delta_lifting),
        run("12", "one step lifting", LIMIT_LIFT, c12_lifting),
        run("R", "pool cap on exploding program", LIMIT_POOL_CAP, pool_cap),
    ];
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("acceptance: {} of {} passed", outcomes.len(), outcomes.len());
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
