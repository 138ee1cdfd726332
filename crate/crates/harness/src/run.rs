//! Replays a workload against a structure and verifies it.

use std::collections::{BTreeMap, BTreeSet};

use cfcolor::oracle::{check_interval_points, check_rect_points, check_rects, RangeSampling, Rule, Witness};
use cfcolor::{GlobalColor, ObjectId, Pt};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::report::{RunConfig, RunReport, StepReport, Summary, Verified, Violation};
use crate::structure::{as_rect, build, validate, Structure, StructureKind, StructureParams};
use crate::workload::{ObjectSpec, Op, WorkloadEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    None,
    /// Structure invariants after every step.
    Invariants,
    /// Oracle on every step while n <= 256, then every 32nd step, and
    /// always on the final state.
    OracleSampled,
    OracleEveryStep,
}

impl std::fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

const SAMPLE_ALL_BELOW: usize = 256;
const SAMPLE_EVERY: usize = 32;

fn due(mode: VerifyMode, step: usize, n: usize, last: bool) -> bool {
    match mode {
        VerifyMode::None => false,
        VerifyMode::Invariants | VerifyMode::OracleEveryStep => true,
        VerifyMode::OracleSampled => n <= SAMPLE_ALL_BELOW || (step + 1).is_multiple_of(SAMPLE_EVERY) || last,
    }
}

/// Checks the coloring reported by a structure against the live objects
/// with the brute-force oracle.
pub fn oracle_check(
    live: &BTreeMap<u64, ObjectSpec>,
    colors: &[(ObjectId, GlobalColor)],
    step: usize,
) -> std::result::Result<(), (String, Option<Witness>)> {
    let color: BTreeMap<ObjectId, GlobalColor> = colors.iter().copied().collect();
    if color.len() != live.len() || live.keys().any(|&id| !color.contains_key(&ObjectId(id))) {
        return Err((
            format!("structure colors {} objects but {} are live", color.len(), live.len()),
            None,
        ));
    }
    let Some(first) = live.values().next() else {
        return Ok(());
    };
    let outcome = match first {
        ObjectSpec::Point1d { .. } => {
            let pts: Vec<_> = live
                .iter()
                .filter_map(|(&id, o)| match *o {
                    ObjectSpec::Point1d { x } => Some((ObjectId(id), x, color[&ObjectId(id)])),
                    _ => None,
                })
                .collect();
            check_interval_points(&pts, Rule::ConflictFree)
        }
        ObjectSpec::Point2d { .. } => {
            let pts: Vec<_> = live
                .iter()
                .filter_map(|(&id, o)| match *o {
                    ObjectSpec::Point2d { x, y } => Some((ObjectId(id), Pt::new(x, y), color[&ObjectId(id)])),
                    _ => None,
                })
                .collect();
            let sampling = RangeSampling {
                seed: step as u64,
                ..RangeSampling::default()
            };
            check_rect_points(&pts, Rule::ConflictFree, &sampling)
        }
        _ => {
            let rects: Vec<_> = live
                .iter()
                .filter_map(|(&id, o)| as_rect(ObjectId(id), o).map(|r| (r, color[&ObjectId(id)])))
                .collect();
            check_rects(&rects, Rule::ConflictFree)
        }
    };
    outcome.map_err(|w| (format!("not conflict-free: {w}"), Some(w)))
}

/// Validates the workload, builds the structure and replays.
pub fn run(
    kind: StructureKind,
    events: &[WorkloadEvent],
    verify: VerifyMode,
    params: StructureParams,
    workload_label: &str,
) -> Result<RunReport> {
    validate(kind, events)?;
    let params = params.resolve(kind, events);
    let structure = build(kind, &params)?;
    run_with(structure, kind, events, verify, params, workload_label)
}

/// Replays against a caller-supplied structure. Stops at the first
/// violation.
pub fn run_with(
    mut s: Box<dyn Structure>,
    kind: StructureKind,
    events: &[WorkloadEvent],
    verify: VerifyMode,
    params: StructureParams,
    workload_label: &str,
) -> Result<RunReport> {
    let mut live: BTreeMap<u64, ObjectSpec> = BTreeMap::new();
    let mut steps = Vec::with_capacity(events.len());
    let mut summary = Summary::default();
    for (step, ev) in events.iter().enumerate() {
        let at = |e: HarnessError| match e {
            HarnessError::Structure { source, .. } => HarnessError::Structure { step, source },
            other => other,
        };
        let diff = match (ev.op, &ev.object) {
            (Op::Insert, Some(o)) => {
                let d = s.insert(ObjectId(ev.id), o).map_err(at)?;
                live.insert(ev.id, *o);
                d
            }
            (Op::Insert, None) => {
                return Err(HarnessError::Parse {
                    line: step + 1,
                    message: "insert without an object".into(),
                })
            }
            (Op::Delete, _) => {
                let d = s.delete(ObjectId(ev.id)).map_err(at)?;
                live.remove(&ev.id);
                d
            }
        };
        let colors = s.colors();
        let n = s.len();
        let distinct = colors.iter().map(|&(_, c)| c).collect::<BTreeSet<_>>().len();
        let recolorings = diff.recolorings();

        let mut verified = Verified::Skipped;
        if due(verify, step, n, step + 1 == events.len()) {
            let outcome = match verify {
                VerifyMode::Invariants => s.check_invariants().map_err(|m| ("invariants", m, None)),
                _ => oracle_check(&live, &colors, step).map_err(|(m, w)| ("oracle", m, w)),
            };
            verified = match outcome {
                Ok(()) => Verified::Passed,
                Err((check, message, witness)) => {
                    summary.violations.push(Violation {
                        step,
                        check: check.into(),
                        message,
                        witness,
                    });
                    Verified::Failed
                }
            };
        }

        let (ell, levels) = match s.levels() {
            Some((ell, lv)) => (Some(ell), Some(lv)),
            None => (None, None),
        };
        summary.max_recolorings = summary.max_recolorings.max(recolorings);
        summary.max_distinct_colors = summary.max_distinct_colors.max(distinct);
        summary.total_recolorings += recolorings as u64;
        steps.push(StepReport {
            step,
            op: ev.op,
            id: ev.id,
            n,
            recolorings,
            distinct_colors: distinct,
            verified,
            ell,
            levels,
        });
        if verified == Verified::Failed {
            break;
        }
    }
    summary.steps = steps.len();
    summary.final_n = s.len();
    summary.structure_total_recolorings = s.total_recolorings();
    if summary.total_recolorings != summary.structure_total_recolorings {
        summary.violations.push(Violation {
            step: steps.len().saturating_sub(1),
            check: "totals".into(),
            message: format!(
                "per-step recolorings sum to {} but the structure counted {}",
                summary.total_recolorings, summary.structure_total_recolorings
            ),
            witness: None,
        });
    }
    Ok(RunReport {
        config: RunConfig {
            structure: kind.to_string(),
            workload: workload_label.to_string(),
            verify: verify.to_string(),
            events: events.len(),
            params,
        },
        steps,
        summary,
    })
}
