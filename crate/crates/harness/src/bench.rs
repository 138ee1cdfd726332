//! Batch trials over sizes and seeds.

use rayon::prelude::*;

use crate::error::Result;
use crate::report::{BenchConfig, BenchReport, BenchRow};
use crate::run::{run, VerifyMode};
use crate::structure::{StructureKind, StructureParams};
use crate::workload::{generate, GenParams};

pub const DEFAULT_C: f64 = 3.0;
pub const DEFAULT_UNIVERSE: u64 = 64;

/// Runs one unverified trial per `(size, seed)` pair, in parallel. Rows
/// come back ordered by size, then seed. Insertion-only structures get
/// no deletions.
pub fn bench(
    kind: StructureKind,
    sizes: &[usize],
    seeds: &[u64],
    delete_ratio: f64,
    params: StructureParams,
) -> Result<BenchReport> {
    let delete_ratio = if kind.supports_delete() { delete_ratio } else { 0.0 };
    let params = StructureParams {
        c: params.c.or(Some(DEFAULT_C)).filter(|_| kind == StructureKind::Bounded),
        universe: params
            .universe
            .or(Some(DEFAULT_UNIVERSE))
            .filter(|_| kind == StructureKind::Universe),
    };
    let trials: Vec<(usize, u64)> = sizes.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let rows = trials
        .par_iter()
        .map(|&(size, seed)| {
            let gen = GenParams {
                c: params.c,
                universe: params.universe,
                ..GenParams::new(kind.object_kind(), size, delete_ratio, seed)
            };
            let events = generate(&gen)?;
            let report = run(kind, &events, VerifyMode::None, params, "generated")?;
            let s = &report.summary;
            Ok(BenchRow {
                size,
                seed,
                events: events.len(),
                final_n: s.final_n,
                max_recolorings: s.max_recolorings,
                mean_recolorings: if events.is_empty() {
                    0.0
                } else {
                    s.total_recolorings as f64 / events.len() as f64
                },
                total_recolorings: s.total_recolorings,
                max_distinct_colors: s.max_distinct_colors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        config: BenchConfig {
            structure: kind.to_string(),
            sizes: sizes.to_vec(),
            seeds: seeds.to_vec(),
            delete_ratio,
            params,
        },
        rows,
    })
}
