//! Multi-seed benchmark harness and result tables.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Instance;
use crate::io::{parse_instance, Format};
use crate::kernel::{run, KsParams, RunStatus};

/// Environment variable overriding the global time limit, in seconds.
pub const GLOBAL_LIMIT_ENV: &str = "MSTC_GLOBAL_TL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Zkp,
    Ccpr,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zkp" => Ok(Family::Zkp),
            "ccpr" => Ok(Family::Ccpr),
            other => Err(Error::InvalidInput(format!("unknown family '{other}'"))),
        }
    }
}

/// Tuned parameters per instance family.
pub fn default_params(family: Family) -> KsParams {
    let base = KsParams::default();
    match family {
        Family::Zkp => KsParams {
            outer_iterations: 4,
            alpha: 1.1,
            beta: 0.2,
            delta: 0.6,
            inner_time_limit: 420.0,
            ..base
        },
        Family::Ccpr => KsParams {
            outer_iterations: 4,
            alpha: 1.2,
            beta: 0.2,
            delta: 0.4,
            inner_time_limit: 180.0,
            ..base
        },
    }
}

/// Applies [`GLOBAL_LIMIT_ENV`] when set.
pub fn apply_env_overrides(params: &mut KsParams) -> Result<()> {
    if let Ok(v) = std::env::var(GLOBAL_LIMIT_ENV) {
        let secs: f64 = v.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("{GLOBAL_LIMIT_ENV}='{v}' is not a number"))
        })?;
        if !(secs > 0.0) {
            return Err(Error::InvalidInput(format!(
                "{GLOBAL_LIMIT_ENV} must be positive"
            )));
        }
        params.global_time_limit = secs;
        params.inner_time_limit = params.inner_time_limit.min(secs);
    }
    Ok(())
}

/// An instance to benchmark; load failures are carried along and reported.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub id: String,
    pub instance: std::result::Result<Instance, String>,
}

/// Loads every regular file of `dir`, sorted by name. The id is the file
/// stem.
pub fn load_dir(dir: &Path, format: Format) -> Result<Vec<BenchInstance>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| BenchInstance {
            id: p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            instance: parse_instance(&p, format).map_err(|e| e.to_string()),
        })
        .collect())
}

/// Reads `id,ub` reference values (header required).
pub fn read_reference(path: &Path) -> Result<HashMap<String, f64>> {
    #[derive(Deserialize)]
    struct Row {
        id: String,
        ub: f64,
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = HashMap::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        out.insert(row.id, row.ub);
    }
    Ok(out)
}

/// `100 (ub - reference) / reference`.
pub fn gap_pct(ub: f64, reference: f64) -> Option<f64> {
    if reference == 0.0 {
        return (ub == 0.0).then_some(0.0);
    }
    Some(100.0 * (ub - reference) / reference)
}

/// One instance-seed run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub id: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub seed: u64,
    pub ub: Option<f64>,
    pub ub_time_s: f64,
    pub total_time_s: f64,
    pub gap_pct: Option<f64>,
    pub status: String,
}

/// Runs every instance with every seed in parallel. Records come back in
/// instance order, then seed order; failures become records, never errors.
pub fn run_benchmark(
    instances: &[BenchInstance],
    params: &KsParams,
    seeds: &[u64],
    reference: &HashMap<String, f64>,
) -> Vec<RunRecord> {
    let jobs: Vec<(&BenchInstance, u64)> = instances
        .iter()
        .flat_map(|b| seeds.iter().map(move |&s| (b, s)))
        .collect();
    jobs.par_iter()
        .map(|&(b, seed)| run_one(b, seed, params, reference))
        .collect()
}

fn run_one(
    b: &BenchInstance,
    seed: u64,
    params: &KsParams,
    reference: &HashMap<String, f64>,
) -> RunRecord {
    let mut rec = RunRecord {
        id: b.id.clone(),
        n: 0,
        m: 0,
        c: 0,
        seed,
        ub: None,
        ub_time_s: 0.0,
        total_time_s: 0.0,
        gap_pct: None,
        status: String::new(),
    };
    let inst = match &b.instance {
        Ok(i) => i,
        Err(e) => {
            rec.status = format!("error: {e}");
            return rec;
        }
    };
    rec.n = inst.n();
    rec.m = inst.m();
    rec.c = inst.conflicts().len();
    let p = KsParams {
        rng_seed: seed,
        ..params.clone()
    };
    match run(inst, &p) {
        Ok(out) => {
            rec.ub = out.weight();
            rec.ub_time_s = out.time_to_best;
            rec.total_time_s = out.total_time;
            rec.status = match out.status {
                RunStatus::Feasible => "feasible",
                RunStatus::NoSolution => "no_solution",
                RunStatus::Infeasible => "infeasible",
            }
            .into();
            if let (Some(ub), Some(&r)) = (rec.ub, reference.get(&b.id)) {
                rec.gap_pct = gap_pct(ub, r);
            }
        }
        Err(e) => rec.status = format!("error: {e}"),
    }
    log::info!("{} seed {}: {:?} ({})", rec.id, seed, rec.ub, rec.status);
    rec
}

fn fmt_opt(v: Option<f64>, decimals: usize) -> String {
    v.map(|x| format!("{x:.decimals$}")).unwrap_or_default()
}

/// Writes records as CSV with columns
/// `id,n,m,C,seed,ub,ub_time_s,total_time_s,gap_pct,status`.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "id",
        "n",
        "m",
        "C",
        "seed",
        "ub",
        "ub_time_s",
        "total_time_s",
        "gap_pct",
        "status",
    ])?;
    for r in records {
        w.write_record([
            r.id.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.c.to_string(),
            r.seed.to_string(),
            r.ub.map(|u| u.to_string()).unwrap_or_default(),
            format!("{:.3}", r.ub_time_s),
            format!("{:.3}", r.total_time_s),
            fmt_opt(r.gap_pct, 2),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Best run over seeds for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub c: usize,
    pub reference: Option<f64>,
    pub best_ub: Option<f64>,
    /// Time to best of the run that achieved `best_ub` (earliest on ties).
    pub ub_time_s: f64,
    pub avg_total_time_s: f64,
    pub gap_pct: Option<f64>,
}

/// Groups records by id, in first-appearance order.
pub fn summarize(records: &[RunRecord], reference: &HashMap<String, f64>) -> Vec<InstanceSummary> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&RunRecord>> = HashMap::new();
    for r in records {
        groups
            .entry(&r.id)
            .or_insert_with(|| {
                order.push(&r.id);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|id| {
            let runs = &groups[id];
            let best = runs.iter().filter(|r| r.ub.is_some()).min_by(|a, b| {
                a.ub.unwrap()
                    .total_cmp(&b.ub.unwrap())
                    .then(a.ub_time_s.total_cmp(&b.ub_time_s))
            });
            let reference = reference.get(id).copied();
            let best_ub = best.and_then(|r| r.ub);
            InstanceSummary {
                id: id.to_string(),
                n: runs[0].n,
                m: runs[0].m,
                c: runs[0].c,
                reference,
                best_ub,
                ub_time_s: best.map_or(0.0, |r| r.ub_time_s),
                avg_total_time_s: runs.iter().map(|r| r.total_time_s).sum::<f64>()
                    / runs.len() as f64,
                gap_pct: best_ub.zip(reference).and_then(|(u, r)| gap_pct(u, r)),
            }
        })
        .collect()
}

/// Aligned text table with an `Average` row and a `%best` row (share of
/// instances whose best value matches or beats the reference).
pub fn format_table(rows: &[InstanceSummary]) -> String {
    let mut body: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                r.id.clone(),
                r.n.to_string(),
                r.m.to_string(),
                r.c.to_string(),
                r.reference
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "-".into()),
                r.best_ub
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "-".into()),
                format!("{:.2}", r.ub_time_s),
                r.gap_pct
                    .map(|g| format!("{g:.2}"))
                    .unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    if !rows.is_empty() {
        let mean = |xs: Vec<f64>| {
            if xs.is_empty() {
                "-".to_string()
            } else {
                format!("{:.2}", xs.iter().sum::<f64>() / xs.len() as f64)
            }
        };
        let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap_pct).collect();
        body.push([
            "Average".into(),
            String::new(),
            String::new(),
            String::new(),
            mean(rows.iter().filter_map(|r| r.reference).collect()),
            mean(rows.iter().filter_map(|r| r.best_ub).collect()),
            mean(rows.iter().map(|r| r.ub_time_s).collect()),
            mean(gaps.clone()),
        ]);
        let hits = gaps.iter().filter(|&&g| g <= 1e-9).count();
        let pct = if gaps.is_empty() {
            "-".to_string()
        } else {
            format!("{:.2}", 100.0 * hits as f64 / gaps.len() as f64)
        };
        body.push([
            "%best".into(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            pct,
        ]);
    }
    let header = ["id", "n", "m", "|C|", "UB_best", "UB", "UB_time", "gap"];
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(k, (c, w))| {
                if k == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&header.map(String::from), &mut out);
    for row in &body {
        line(row, &mut out);
    }
    out
}
