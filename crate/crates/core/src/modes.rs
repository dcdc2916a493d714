//! Modes, looping modes and the optimality check for terminating multi-modes.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, ModesError, ResourceError};
use crate::loops::{infer_loop_cond, Inference, InferenceConfig, LoopingCondition};
use crate::term::{Pred, Program};

/// Argument positions (1-based) required to be ground.
pub type Mode = BTreeSet<usize>;
pub type MultiMode = BTreeSet<Mode>;

/// Largest arity for which `modes(p)` is enumerated.
pub const MAX_MODE_ARITY: usize = 16;

/// All `2^arity` modes of `p`.
pub fn all_modes(p: &Pred) -> Result<MultiMode, ResourceError> {
    if p.arity > MAX_MODE_ARITY {
        return Err(ResourceError::ModeArity {
            pred: p.to_string(),
            arity: p.arity,
            limit: MAX_MODE_ARITY,
        });
    }
    Ok((0u32..1 << p.arity)
        .map(|bits| (1..=p.arity).filter(|i| bits & (1 << (i - 1)) != 0).collect())
        .collect())
}

/// Modes that include some mode of `mm`: their queries are all queries of that mode.
pub fn less_general(mm: &MultiMode, p: &Pred) -> Result<MultiMode, ResourceError> {
    Ok(all_modes(p)?
        .into_iter()
        .filter(|m| mm.iter().any(|m2| m2.is_subset(m)))
        .collect())
}

/// Modes included in some mode of `mm`.
pub fn more_general(mm: &MultiMode, p: &Pred) -> Result<MultiMode, ResourceError> {
    Ok(all_modes(p)?
        .into_iter()
        .filter(|m| mm.iter().any(|m2| m.is_subset(m2)))
        .collect())
}

/// One mode per condition on `p`: its neutral positions plus its ground arguments.
pub fn looping_modes(conds: &[LoopingCondition], p: &Pred) -> MultiMode {
    conds
        .iter()
        .filter(|c| &c.pred() == p)
        .map(|c| {
            let mut m = c.neutral_positions();
            m.extend(
                c.atom
                    .args
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.is_ground())
                    .map(|(i, _)| i + 1),
            );
            m
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModeSummary {
    pub terminating: MultiMode,
    pub looping: MultiMode,
    /// Modes neither covered by a terminating mode nor by a looping one.
    pub undecided: MultiMode,
}

#[derive(Debug, Clone)]
pub struct OptimalReport {
    pub inference: Inference,
    pub per_pred: BTreeMap<Pred, ModeSummary>,
}

impl OptimalReport {
    /// True when every undecided set is empty, which proves the terminating
    /// multi-modes optimal.
    pub fn is_optimal(&self) -> bool {
        self.per_pred.values().all(|s| s.undecided.is_empty())
    }
}

pub fn summarize(
    program: &Program,
    conds: &[LoopingCondition],
    tm: &BTreeMap<Pred, MultiMode>,
) -> Result<BTreeMap<Pred, ModeSummary>, ResourceError> {
    let mut out = BTreeMap::new();
    for p in program.signature() {
        let terminating = tm.get(p).cloned().unwrap_or_default();
        let looping = looping_modes(conds, p);
        let covered: MultiMode = less_general(&terminating, p)?
            .into_iter()
            .chain(more_general(&looping, p)?)
            .collect();
        let undecided = all_modes(p)?
            .into_iter()
            .filter(|m| !covered.contains(m))
            .collect();
        out.insert(
            p.clone(),
            ModeSummary {
                terminating,
                looping,
                undecided,
            },
        );
    }
    Ok(out)
}

pub fn optimal_tc(
    program: &Program,
    max: usize,
    tm: &BTreeMap<Pred, MultiMode>,
    config: &InferenceConfig,
) -> Result<OptimalReport, Error> {
    let inference = infer_loop_cond(program, max, config)?;
    let per_pred = summarize(program, &inference.conditions, tm)?;
    Ok(OptimalReport { inference, per_pred })
}

/// Reads `{"name/arity": [[positions], ...], ...}` against the program's symbols.
pub fn parse_modes(text: &str, program: &Program) -> Result<BTreeMap<Pred, MultiMode>, ModesError> {
    let raw: BTreeMap<String, Vec<Vec<usize>>> =
        serde_json::from_str(text).map_err(|e| ModesError::Malformed(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (key, modes) in raw {
        let pred = Pred::parse_indicator(&key).ok_or_else(|| ModesError::BadIndicator(key.clone()))?;
        if !program.signature().contains(&pred) {
            return Err(ModesError::UnknownPred(key));
        }
        let mut mm = MultiMode::new();
        for m in modes {
            for &i in &m {
                if i == 0 || i > pred.arity {
                    return Err(ModesError::Position {
                        pred: key.clone(),
                        position: i,
                    });
                }
            }
            mm.insert(m.into_iter().collect());
        }
        out.insert(pred, mm);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn mm(v: &[&[usize]]) -> MultiMode {
        v.iter().map(|m| m.iter().copied().collect()).collect()
    }

    #[test]
    fn append_closures_match_example() {
        let app = Pred::new("append", 3);
        let lg = less_general(&mm(&[&[1], &[3]]), &app).unwrap();
        assert_eq!(lg, mm(&[&[1], &[3], &[1, 2], &[1, 3], &[2, 3], &[1, 2, 3]]));
        let mg = more_general(&mm(&[&[2]]), &app).unwrap();
        assert_eq!(mg, mm(&[&[], &[2]]));
    }

    #[test]
    fn closure_of_empty_multimode_is_empty() {
        let p = Pred::new("p", 2);
        assert!(less_general(&MultiMode::new(), &p).unwrap().is_empty());
        assert!(more_general(&MultiMode::new(), &p).unwrap().is_empty());
    }

    #[test]
    fn arity_bound_is_enforced() {
        let p = Pred::new("wide", 17);
        assert!(matches!(all_modes(&p), Err(ResourceError::ModeArity { .. })));
        assert_eq!(all_modes(&Pred::new("z", 0)).unwrap(), mm(&[&[]]));
    }

    #[test]
    fn modes_file_validation() {
        let prog = parse_program("p(X, Y) :- q(X).\nq(a).").unwrap();
        let ok = parse_modes(r#"{"p/2": [[1], [1, 2]], "q/1": []}"#, &prog).unwrap();
        assert_eq!(ok[&Pred::new("p", 2)], mm(&[&[1], &[1, 2]]));
        assert!(matches!(
            parse_modes(r#"{"r/1": []}"#, &prog),
            Err(ModesError::UnknownPred(_))
        ));
        assert!(matches!(
            parse_modes(r#"{"p/2": [[3]]}"#, &prog),
            Err(ModesError::Position { position: 3, .. })
        ));
        assert!(matches!(
            parse_modes(r#"{"p": []}"#, &prog),
            Err(ModesError::BadIndicator(_))
        ));
        assert!(matches!(parse_modes("[1]", &prog), Err(ModesError::Malformed(_))));
    }

    #[test]
    fn append_is_optimal() {
        let prog = parse_program("append([],Ys,Ys).\nappend([X|Xs],Ys,[X|Zs]) :- append(Xs,Ys,Zs).").unwrap();
        let tm = parse_modes(r#"{"append/3": [[1], [3]]}"#, &prog).unwrap();
        let report = optimal_tc(&prog, 1, &tm, &InferenceConfig::default()).unwrap();
        let s = &report.per_pred[&Pred::new("append", 3)];
        assert_eq!(s.looping, mm(&[&[2]]));
        assert!(report.is_optimal());
    }
}
