//! Command-line front end: single runs, sweeps, scenario dumps, and the
//! comparison-table summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cc_arena::metrics::{build_report, write_trace, CongestionSignal, MetricsReport, TraceCadence};
use cc_arena::scenario::{RttProfile, Scenario, ScenarioConfig};
use cc_arena::sim::RunOutput;
use cc_arena::sweep::{
    merge_rows, parse_summary_csv, render_panels, run_sweep, write_summary_csv, SummaryRow,
    SweepSpec,
};
use cc_arena::{CcParams, VariantKind};

#[derive(Parser)]
#[command(name = "cc-arena", version, about = "Packet-level TCP congestion-control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write per-flow metrics and cwnd traces.
    Run(RunArgs),
    /// Run a variant x buffer sweep and write the comparison summary.csv.
    Sweep(SweepArgs),
    /// Print a built-in scenario as a rerunnable scenario file.
    DumpScenario(DumpArgs),
    /// Render per-buffer comparison panels from summary CSVs.
    Summarize(SummarizeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Homogeneous,
    Heterogeneous,
    /// Sweep only: run both profiles and merge their fairness columns.
    Both,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario name (exp1, exp2) or a scenario file path.
    #[arg(long, default_value = "exp1")]
    scenario: String,

    /// TCP variant: bic, compound, cubic, highspeed, htcp, illinois,
    /// scalable, fusion, yeah, africa, newreno.
    #[arg(long, default_value = "cubic")]
    variant: String,

    /// Bottleneck buffer in packets. exp2 defaults to 100; exp1 defaults to
    /// one bandwidth-delay product on every queue.
    #[arg(long)]
    buffer: Option<usize>,

    /// Simulation length in seconds (default 100).
    #[arg(long)]
    duration: Option<f64>,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Access-delay profile for exp2.
    #[arg(long, value_enum, default_value_t = ProfileArg::Homogeneous)]
    profile: ProfileArg,

    /// Link bandwidth in Mbps; 1000 reproduces the paper setup, 100 is the
    /// scaled configuration.
    #[arg(long, default_value_t = 1000)]
    bandwidth_mbps: u64,

    /// Variant parameter override, repeatable: --set cubic.beta=0.3
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Trace cadence: per-ack, or interval:<ms>.
    #[arg(long, default_value = "interval:10")]
    trace_cadence: String,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory (or env CC_ARENA_OUT, default ./cc-arena-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated variant list; defaults to all eleven.
    #[arg(long, value_delimiter = ',')]
    variants: Vec<String>,

    /// Comma-separated buffer list in packets; defaults to
    /// 100,250,500,1000,2500,5000.
    #[arg(long, value_delimiter = ',')]
    buffers: Vec<usize>,

    #[arg(long, value_enum, default_value_t = ProfileArg::Homogeneous)]
    profile: ProfileArg,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long)]
    duration: Option<f64>,

    #[arg(long, default_value_t = 1000)]
    bandwidth_mbps: u64,

    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long, default_value = "interval:10")]
    trace_cadence: String,

    /// Worker threads for independent runs.
    #[arg(long)]
    jobs: Option<usize>,

    /// Skip writing per-run trace files (summary.csv and metrics only).
    #[arg(long)]
    no_traces: bool,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Summary CSV files; defaults to <out>/summary.csv.
    files: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::DumpScenario(args) => cmd_dump(args),
        Command::Summarize(args) => cmd_summarize(args),
    }
}

fn out_dir(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os("CC_ARENA_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cc-arena-out"))
}

fn parse_cadence(s: &str) -> Result<TraceCadence> {
    if s == "per-ack" {
        return Ok(TraceCadence::PerAck);
    }
    if let Some(ms) = s.strip_prefix("interval:") {
        let ms: f64 = ms.parse().context("trace interval must be milliseconds")?;
        if ms <= 0.0 {
            bail!("trace interval must be positive");
        }
        return Ok(TraceCadence::Interval(Duration::from_secs_f64(ms / 1e3)));
    }
    bail!("--trace-cadence takes `per-ack` or `interval:<ms>`")
}

fn parse_overrides(pairs: &[String]) -> Result<CcParams> {
    let mut params = CcParams::default();
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("--set `{pair}` is not KEY=VALUE"))?;
        params.set(key.trim(), value.trim())?;
    }
    Ok(params)
}

fn profile_of(arg: ProfileArg) -> RttProfile {
    match arg {
        ProfileArg::Heterogeneous => RttProfile::Heterogeneous,
        _ => RttProfile::Homogeneous,
    }
}

fn build_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let cadence = parse_cadence(&args.trace_cadence)?;
    let params = parse_overrides(&args.set)?;
    let mut config = ScenarioConfig {
        bandwidth_bps: args.bandwidth_mbps * 1_000_000,
        ..Default::default()
    };
    if let Some(secs) = args.duration {
        if secs <= 0.0 {
            bail!("--duration must be positive");
        }
        config.duration = Duration::from_secs_f64(secs);
    }
    let mut scenario = match args.scenario.as_str() {
        "exp1" => {
            let variant: VariantKind = args.variant.parse()?;
            Scenario::exp1(variant, &config, args.buffer)?
        }
        "exp2" => {
            let variant: VariantKind = args.variant.parse()?;
            Scenario::exp2(
                variant,
                args.buffer.unwrap_or(100),
                profile_of(args.profile),
                args.seed,
                &config,
            )?
        }
        path => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading scenario file `{path}`"))?;
            let mut sc = Scenario::parse(&text)?;
            if let Some(secs) = args.duration {
                sc.duration = Duration::from_secs_f64(secs);
            }
            sc.cadence = cadence;
            for pair in &args.set {
                let (key, value) = pair.split_once('=').unwrap();
                sc.params.set(key.trim(), value.trim())?;
            }
            return Ok(sc);
        }
    };
    scenario.seed = args.seed;
    scenario.cadence = cadence;
    scenario.params = params;
    Ok(scenario)
}

fn write_run_outputs(dir: &Path, out: &RunOutput, report: &MetricsReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv = String::from(
        "flow_id,throughput_mbps,loss_ratio,pkts_sent,pkts_lost,pkts_retransmitted,bytes_delivered\n",
    );
    for (f, c) in report.per_flow.iter().zip(&out.collector.flows) {
        csv.push_str(&format!(
            "{},{:.4},{:.6},{},{},{},{}\n",
            f.flow,
            f.throughput_mbps,
            f.loss_ratio,
            f.pkts_sent,
            f.pkts_lost,
            c.pkts_retransmitted,
            f.bytes_delivered
        ));
    }
    csv.push_str(&format!(
        "all,{:.4},{:.6},{},{},{},{}\n",
        report.aggregate_throughput_mbps,
        report.loss_ratio,
        out.collector.flows.iter().map(|c| c.pkts_sent).sum::<u64>(),
        out.collector.flows.iter().map(|c| c.pkts_lost).sum::<u64>(),
        out.collector.flows.iter().map(|c| c.pkts_retransmitted).sum::<u64>(),
        out.collector.flows.iter().map(|c| c.bytes_delivered).sum::<u64>(),
    ));
    fs::write(dir.join("metrics.csv"), csv)?;
    let mut events = String::from("time_s,flow_id,signal,cwnd_before,cwnd_after,in_slow_start\n");
    for ev in &out.collector.congestion_events {
        events.push_str(&format!(
            "{},{},{},{:.3},{:.3},{}\n",
            ev.time,
            ev.flow,
            match ev.signal {
                CongestionSignal::DupAck => "dupack",
                CongestionSignal::Rto => "rto",
            },
            ev.cwnd_before,
            ev.cwnd_after,
            ev.in_slow_start
        ));
    }
    fs::write(dir.join("events.csv"), events)?;
    for flow in 0..out.collector.flows.len() {
        let points: Vec<_> = out.collector.flow_trace(flow).copied().collect();
        let mut buf = Vec::new();
        write_trace(&mut buf, &points)?;
        fs::write(dir.join(format!("flow{flow}_cwnd.tsv")), buf)?;
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let scenario = build_scenario(&args.scenario)?;
    let name = scenario.name.clone();
    let out = scenario.build()?.run();
    let report = build_report(&out.collector)?;
    let dir = out_dir(args.out).join(&name);
    write_run_outputs(&dir, &out, &report)?;
    println!(
        "{name}: aggregate {:.2} Mbps, mean-flow {:.2} Mbps, loss ratio {:.4}, fairness {:.4}",
        report.aggregate_throughput_mbps,
        report.mean_flow_throughput_mbps,
        report.loss_ratio,
        report.fairness
    );
    println!(
        "events {}, drops {}, deliveries {}{}",
        out.stats.events_dispatched,
        out.stats.drops,
        out.stats.deliveries,
        if out.stats.stalled { " (stalled: a flow made no progress)" } else { "" }
    );
    println!("outputs in {}", dir.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut spec = SweepSpec::paper_defaults();
    if !args.variants.is_empty() {
        spec.variants = args
            .variants
            .iter()
            .map(|v| v.parse::<VariantKind>())
            .collect::<Result<_, _>>()?;
    }
    if !args.buffers.is_empty() {
        spec.buffers = args.buffers.clone();
    }
    spec.profiles = match args.profile {
        ProfileArg::Homogeneous => vec![RttProfile::Homogeneous],
        ProfileArg::Heterogeneous => vec![RttProfile::Heterogeneous],
        ProfileArg::Both => vec![RttProfile::Homogeneous, RttProfile::Heterogeneous],
    };
    spec.seed = args.seed;
    spec.config.bandwidth_bps = args.bandwidth_mbps * 1_000_000;
    if let Some(secs) = args.duration {
        spec.config.duration = Duration::from_secs_f64(secs);
    }
    spec.params = parse_overrides(&args.set)?;
    spec.cadence = parse_cadence(&args.trace_cadence)?;
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));

    eprintln!("running {} cells on {jobs} threads", spec.run_count());
    let cells = run_sweep(&spec, jobs);

    let dir = out_dir(args.out);
    fs::create_dir_all(&dir)?;
    let mut failures = 0usize;
    for cell in &cells {
        let label = format!("{}-b{}-{}", cell.variant, cell.buffer_pkts, cell.profile);
        match &cell.outcome {
            Ok(result) => {
                eprintln!(
                    "{label}: {:.2} Mbps aggregate, loss {:.4}, fairness {:.4}",
                    result.report.aggregate_throughput_mbps,
                    result.report.loss_ratio,
                    result.report.fairness
                );
                if !args.no_traces {
                    write_run_outputs(&dir.join(&label), &result.run, &result.report)?;
                }
            }
            Err(e) => {
                failures += 1;
                eprintln!("{label}: FAILED: {e}");
            }
        }
    }
    let rows = merge_rows(&cells);
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, &rows)?;
    let summary_path = dir.join("summary.csv");
    fs::write(&summary_path, buf)?;
    println!("summary written to {}", summary_path.display());
    if failures > 0 {
        bail!("{failures} of {} runs failed", cells.len());
    }
    Ok(())
}

fn cmd_dump(args: DumpArgs) -> Result<()> {
    let scenario = build_scenario(&args.scenario)?;
    let text = scenario.dump();
    match args.out {
        Some(path) => fs::write(&path, text)
            .with_context(|| format!("writing scenario to {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<()> {
    let files = if args.files.is_empty() {
        vec![out_dir(args.out).join("summary.csv")]
    } else {
        args.files
    };
    let mut rows: Vec<SummaryRow> = Vec::new();
    for file in &files {
        let text = fs::read_to_string(file)
            .with_context(|| format!("reading summary csv {}", file.display()))?;
        rows.extend(parse_summary_csv(&text)?);
    }
    if rows.is_empty() {
        bail!("no summary rows found");
    }
    let (panels, warnings) = render_panels(&rows);
    for w in warnings {
        eprintln!("warning: {w}");
    }
    print!("{panels}");
    Ok(())
}
