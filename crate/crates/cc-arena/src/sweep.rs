//! Parameter sweeps over (variant, buffer, profile) with a deterministic
//! merge order, the comparison-table CSV, and the rendered per-buffer panels.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::cc::{CcParams, VariantKind};
use crate::metrics::{build_report, MetricsReport, TraceCadence};
use crate::scenario::{RttProfile, Scenario, ScenarioConfig};
use crate::sim::{EngineStats, RunOutput};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("summary csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variants: Vec<VariantKind>,
    pub buffers: Vec<usize>,
    pub profiles: Vec<RttProfile>,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub params: CcParams,
    pub cadence: TraceCadence,
}

impl SweepSpec {
    /// The comparison-table sweep: all eleven variants over the six buffer
    /// sizes, homogeneous profile.
    pub fn paper_defaults() -> Self {
        Self {
            variants: VariantKind::ALL.to_vec(),
            buffers: vec![100, 250, 500, 1000, 2500, 5000],
            profiles: vec![RttProfile::Homogeneous],
            seed: 1,
            config: ScenarioConfig::default(),
            params: CcParams::default(),
            cadence: TraceCadence::Interval(std::time::Duration::from_millis(10)),
        }
    }

    pub fn run_count(&self) -> usize {
        self.variants.len() * self.buffers.len() * self.profiles.len()
    }

    /// Cells in deterministic (variant, buffer, profile) order.
    pub fn cells(&self) -> Vec<(VariantKind, usize, RttProfile)> {
        let mut variants = self.variants.clone();
        variants.sort();
        variants.dedup();
        let mut out = Vec::with_capacity(self.run_count());
        for &v in &variants {
            for &b in &self.buffers {
                for &p in &self.profiles {
                    out.push((v, b, p));
                }
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct SweepCell {
    pub variant: VariantKind,
    pub buffer_pkts: usize,
    pub profile: RttProfile,
    pub seed: u64,
    pub outcome: Result<CellResult, String>,
}

#[derive(Debug)]
pub struct CellResult {
    pub report: MetricsReport,
    pub stats: EngineStats,
    pub run: RunOutput,
}

fn run_cell(
    spec: &SweepSpec,
    variant: VariantKind,
    buffer: usize,
    profile: RttProfile,
) -> Result<CellResult, String> {
    let mut scenario = Scenario::exp2(variant, buffer, profile, spec.seed, &spec.config)
        .map_err(|e| e.to_string())?;
    scenario.params = spec.params.clone();
    scenario.cadence = spec.cadence;
    let sim = scenario.build().map_err(|e| e.to_string())?;
    let run = catch_unwind(AssertUnwindSafe(|| sim.run())).map_err(|p| {
        p.downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "engine panic".to_string())
    })?;
    let report = build_report(&run.collector).map_err(|e| e.to_string())?;
    Ok(CellResult { report, stats: run.stats.clone(), run })
}

/// One run per cell; independent runs execute concurrently on `jobs`
/// threads; results merge back in cell order. Individual failures are
/// recorded and the sweep continues.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Vec<SweepCell> {
    let cells = spec.cells();
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<SweepCell>>> =
        cells.iter().map(|_| Mutex::new(None)).collect();
    let workers = jobs.max(1).min(cells.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= cells.len() {
                    break;
                }
                let (variant, buffer, profile) = cells[idx];
                let outcome = run_cell(spec, variant, buffer, profile);
                *results[idx].lock().unwrap() = Some(SweepCell {
                    variant,
                    buffer_pkts: buffer,
                    profile,
                    seed: spec.seed,
                    outcome,
                });
            });
        }
    });
    results.into_iter().map(|m| m.into_inner().unwrap().expect("cell completed")).collect()
}

/// One comparison-table row: homogeneous runs fill throughput, loss, and
/// intra-fairness; heterogeneous runs fill RTT-fairness.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryRow {
    pub variant: String,
    pub buffer_pkts: usize,
    pub throughput_mbps: Option<f64>,
    pub loss_ratio: Option<f64>,
    pub intra_fair: Option<f64>,
    pub rtt_fair: Option<f64>,
    pub mean_flow_mbps: Option<f64>,
}

pub fn merge_rows(cells: &[SweepCell]) -> Vec<SummaryRow> {
    let mut map: BTreeMap<(String, usize), SummaryRow> = BTreeMap::new();
    for cell in cells {
        let key = (cell.variant.name().to_string(), cell.buffer_pkts);
        let row = map.entry(key).or_insert_with(|| SummaryRow {
            variant: cell.variant.name().to_string(),
            buffer_pkts: cell.buffer_pkts,
            ..SummaryRow::default()
        });
        if let Ok(result) = &cell.outcome {
            match cell.profile {
                RttProfile::Homogeneous => {
                    row.throughput_mbps = Some(result.report.aggregate_throughput_mbps);
                    row.loss_ratio = Some(result.report.loss_ratio);
                    row.intra_fair = Some(result.report.fairness);
                    row.mean_flow_mbps = Some(result.report.mean_flow_throughput_mbps);
                }
                RttProfile::Heterogeneous => {
                    row.rtt_fair = Some(result.report.fairness);
                }
            }
        }
    }
    map.into_values().collect()
}

pub const SUMMARY_HEADER: &str =
    "variant,buffer_pkts,throughput_mbps,loss_ratio,intra_fair,rtt_fair,mean_flow_mbps";

fn csv_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

pub fn write_summary_csv<W: Write>(w: &mut W, rows: &[SummaryRow]) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.variant,
            r.buffer_pkts,
            csv_cell(r.throughput_mbps),
            csv_cell(r.loss_ratio),
            csv_cell(r.intra_fair),
            csv_cell(r.rtt_fair),
            csv_cell(r.mean_flow_mbps),
        )?;
    }
    Ok(())
}

pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>, SweepError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if idx == 0 {
            if !line.trim_end().starts_with("variant,buffer_pkts") {
                return Err(SweepError::Csv { line: lineno, msg: "missing header".into() });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() < 6 {
            return Err(SweepError::Csv { line: lineno, msg: "too few columns".into() });
        }
        let opt = |s: &str| -> Result<Option<f64>, SweepError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| SweepError::Csv { line: lineno, msg: format!("bad number `{s}`") })
            }
        };
        rows.push(SummaryRow {
            variant: parts[0].to_string(),
            buffer_pkts: parts[1]
                .parse()
                .map_err(|_| SweepError::Csv { line: lineno, msg: "bad buffer".into() })?,
            throughput_mbps: opt(parts[2])?,
            loss_ratio: opt(parts[3])?,
            intra_fair: opt(parts[4])?,
            rtt_fair: opt(parts[5])?,
            mean_flow_mbps: if parts.len() > 6 { opt(parts[6])? } else { None },
        });
    }
    Ok(rows)
}

fn panel_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "\u{2014}".to_string())
}

/// Per-buffer panels with rows ordered by variant name, two-decimal cells,
/// missing cells rendered as an em dash. Duplicate (variant, buffer) rows:
/// the latest wins, with a warning returned.
pub fn render_panels(rows: &[SummaryRow]) -> (String, Vec<String>) {
    let mut warnings = Vec::new();
    let mut dedup: BTreeMap<(usize, String), SummaryRow> = BTreeMap::new();
    for r in rows {
        let key = (r.buffer_pkts, r.variant.clone());
        if dedup.insert(key, r.clone()).is_some() {
            warnings.push(format!(
                "duplicate cell for variant `{}` at buffer {}; keeping the latest",
                r.variant, r.buffer_pkts
            ));
        }
    }
    let mut out = String::new();
    let mut current_buffer = None;
    for ((buffer, _), row) in &dedup {
        if current_buffer != Some(*buffer) {
            if current_buffer.is_some() {
                out.push('\n');
            }
            current_buffer = Some(*buffer);
            out.push_str(&format!("=== {buffer} pckts buffer ===\n"));
            out.push_str(&format!(
                "{:<12} {:>12} {:>10} {:>11} {:>9}\n",
                "variant", "Throughput", "LossRatio", "Intra-fair", "RTT-fair"
            ));
        }
        out.push_str(&format!(
            "{:<12} {:>12} {:>10} {:>11} {:>9}\n",
            row.variant,
            panel_cell(row.throughput_mbps),
            panel_cell(row.loss_ratio),
            panel_cell(row.intra_fair),
            panel_cell(row.rtt_fair),
        ));
    }
    (out, warnings)
}
