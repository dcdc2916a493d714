//! End-to-end analysis and its JSON / text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::canon::canonical_form;
use crate::confirm::{confirm, ConfirmConfig, Confirmation};
use crate::dn::render_assoc;
use crate::error::Error;
use crate::loops::{InferenceConfig, LoopingCondition};
use crate::modes::{optimal_tc, ModeSummary, MultiMode, OptimalReport};
use crate::term::{Pred, Program};

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub max: usize,
    pub inference: InferenceConfig,
    /// Oracle settings; `None` skips confirmation.
    pub oracle: Option<ConfirmConfig>,
    pub terminating: BTreeMap<Pred, MultiMode>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub max: usize,
    pub result: OptimalReport,
    /// Parallel to `result.inference.conditions`.
    pub confirmations: Vec<Option<Confirmation>>,
}

impl Analysis {
    pub fn conditions(&self) -> &[LoopingCondition] {
        &self.result.inference.conditions
    }

    /// False when some condition was checked and not confirmed.
    pub fn all_confirmed(&self) -> bool {
        self.confirmations.iter().all(|c| c.is_none_or(|c| c.confirmed()))
    }
}

fn confirm_all(conds: &[LoopingCondition], config: &ConfirmConfig) -> Vec<Confirmation> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = conds.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = conds
            .chunks(chunk)
            .enumerate()
            .map(|(ci, part)| {
                s.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(k, c)| confirm(c, config, (ci * chunk + k) as u64))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("confirmation worker panicked"))
            .collect()
    })
}

pub fn analyze(program: &Program, opts: &AnalyzeOptions) -> Result<Analysis, Error> {
    let result = optimal_tc(program, opts.max, &opts.terminating, &opts.inference)?;
    let conds = &result.inference.conditions;
    let confirmations = match &opts.oracle {
        Some(config) => confirm_all(conds, config).into_iter().map(Some).collect(),
        None => vec![None; conds.len()],
    };
    Ok(Analysis {
        max: opts.max,
        result,
        confirmations,
    })
}

/// `false` when no fixpoint was observed, otherwise the iteration index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixpoint(pub Option<usize>);

impl Serialize for Fixpoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(k) => s.serialize_u64(k as u64),
            None => s.serialize_bool(false),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NeutralJson {
    pub position: usize,
    pub term: String,
}

#[derive(Debug, Serialize)]
pub struct ProvenanceJson {
    pub clause: String,
    pub stamp: usize,
}

#[derive(Debug, Serialize)]
pub struct SamplesJson {
    pub confirmed: usize,
    pub total: usize,
}

#[derive(Debug, Serialize)]
pub struct ConditionJson {
    pub predicate: String,
    pub atom: String,
    pub neutral: Vec<NeutralJson>,
    pub provenance: Vec<ProvenanceJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confirmed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<SamplesJson>,
}

#[derive(Debug, Serialize)]
pub struct ModesJson {
    pub looping: Vec<Vec<usize>>,
    pub terminating: Vec<Vec<usize>>,
    pub undecided: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisJson {
    pub program: String,
    pub max: usize,
    pub conditions: Vec<ConditionJson>,
    pub modes: BTreeMap<String, ModesJson>,
    pub fixpoint: Fixpoint,
}

fn mm_vec(mm: &MultiMode) -> Vec<Vec<usize>> {
    mm.iter().map(|m| m.iter().copied().collect()).collect()
}

fn condition_json(c: &LoopingCondition, conf: Option<Confirmation>) -> ConditionJson {
    let pred = c.pred();
    ConditionJson {
        predicate: pred.to_string(),
        atom: canonical_form(&c.atom),
        neutral: c
            .tau
            .get(&pred)
            .into_iter()
            .flatten()
            .map(|(i, t)| NeutralJson {
                position: *i,
                term: render_assoc(t),
            })
            .collect(),
        provenance: c
            .provenance
            .clauses()
            .iter()
            .map(|s| ProvenanceJson {
                clause: s.key.clone(),
                stamp: s.stamp,
            })
            .collect(),
        confirmed: conf.map(|c| c.confirmed()),
        samples: conf.map(|c| SamplesJson {
            confirmed: c.members_confirmed,
            total: c.members_total,
        }),
    }
}

fn modes_json(s: &ModeSummary) -> ModesJson {
    ModesJson {
        looping: mm_vec(&s.looping),
        terminating: mm_vec(&s.terminating),
        undecided: mm_vec(&s.undecided),
    }
}

impl Analysis {
    pub fn to_json(&self, program_name: &str) -> AnalysisJson {
        AnalysisJson {
            program: program_name.to_string(),
            max: self.max,
            conditions: self
                .conditions()
                .iter()
                .zip(&self.confirmations)
                .map(|(c, conf)| condition_json(c, *conf))
                .collect(),
            modes: self
                .result
                .per_pred
                .iter()
                .map(|(p, s)| (p.to_string(), modes_json(s)))
                .collect(),
            fixpoint: Fixpoint(self.result.inference.pool.fixpoint()),
        }
    }

    pub fn render_json(&self, program_name: &str) -> String {
        serde_json::to_string_pretty(&self.to_json(program_name)).expect("report serializes") + "\n"
    }

    pub fn render_text(&self, program_name: &str) -> String {
        let mut out = String::new();
        let pool = &self.result.inference.pool;
        let _ = writeln!(out, "program: {program_name}");
        let _ = writeln!(out, "max: {}", self.max);
        match pool.fixpoint() {
            Some(k) => {
                let _ = writeln!(out, "fixpoint: {k}");
            }
            None => {
                let _ = writeln!(out, "fixpoint: not reached");
            }
        }
        let _ = writeln!(out, "binary clauses: {}", pool.len());
        let _ = writeln!(out, "looping conditions: {}", self.conditions().len());
        for (c, conf) in self.conditions().iter().zip(&self.confirmations) {
            let status = match conf {
                Some(k) if k.confirmed() => format!(
                    "  confirmed ({}/{} samples)",
                    k.members_confirmed, k.members_total
                ),
                Some(k) => format!(
                    "  UNCONFIRMED (witness {}, {}/{} samples)",
                    if k.witness { "loops" } else { "does not loop" },
                    k.members_confirmed,
                    k.members_total
                ),
                None => String::new(),
            };
            let _ = writeln!(out, "  {c}{status}");
            for s in c.provenance.clauses() {
                let _ = writeln!(out, "      [{}] {}", s.stamp, s.key);
            }
        }
        let _ = writeln!(out, "modes:");
        for (p, s) in &self.result.per_pred {
            let _ = writeln!(
                out,
                "  {p}  looping {}  terminating {}  undecided {}",
                fmt_mm(&s.looping),
                fmt_mm(&s.terminating),
                fmt_mm(&s.undecided)
            );
        }
        out
    }
}

/// `{{1,3},{2,3,4}}`.
pub fn fmt_mm(mm: &MultiMode) -> String {
    let inner: Vec<String> = mm
        .iter()
        .map(|m| {
            let ps: Vec<String> = m.iter().map(usize::to_string).collect();
            format!("{{{}}}", ps.join(","))
        })
        .collect();
    format!("{{{}}}", inner.join(","))
}
