mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use crmcast_core::experiment::{
    aggregate_csv, parse_aggregate_csv, run_scenario, trials_csv, SweepOutput,
};
use crmcast_core::plot::{render_svg, Metric};
use crmcast_core::worked_example::{check_result, WorkedExample};
use crmcast_core::{run_sweep, Scheme, SweepSpec, SweepVariable, TreeKind};
use serde_json::json;

use crate::config::Config;

/// Multicast routing and channel assignment simulator for multi-hop
/// cognitive radio networks.
#[derive(Debug, Parser)]
#[command(name = "crmcast", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay the 15-node reference scenario and check its figures.
    Example {
        /// Read the scenario from a JSON fixture instead of the built-in one.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Print the built-in fixture as JSON and exit.
        #[arg(long)]
        dump_fixture: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run one random scenario under every requested tree and scheme.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        json: bool,
    },
    /// Sweep one scenario parameter and write per-trial and aggregate CSVs.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Swept parameter: bw, packet_bits, M, pt, p_idle, n_dest, n_nodes.
        #[arg(long)]
        variable: Option<String>,
        /// Comma-separated values of the swept parameter.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Render an aggregate CSV to one SVG chart per (metric, tree).
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// pos, masa, mdr or rs; repeatable.
    #[arg(long = "scheme", num_args = 1.., value_delimiter = ',')]
    schemes: Vec<String>,
    /// spt or mst; repeatable.
    #[arg(long = "tree", num_args = 1.., value_delimiter = ',')]
    trees: Vec<String>,
}

impl CommonArgs {
    /// Config file first, then flags on top.
    fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                Config::parse(&text).with_context(|| format!("config {}", path.display()))?
            }
            None => Config::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if !self.schemes.is_empty() {
            cfg.schemes = self
                .schemes
                .iter()
                .map(|s| s.parse::<Scheme>())
                .collect::<Result<_, _>>()?;
        }
        if !self.trees.is_empty() {
            cfg.trees = self
                .trees
                .iter()
                .map(|s| s.parse::<TreeKind>())
                .collect::<Result<_, _>>()?;
        }
        Ok(cfg)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn cmd_example(fixture: Option<&Path>, dump: bool, as_json: bool) -> Result<ExitCode> {
    let example = match fixture {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading fixture {}", path.display()))?;
            serde_json::from_str::<WorkedExample>(&text)
                .with_context(|| format!("parsing fixture {}", path.display()))?
        }
        None => WorkedExample::builtin(),
    };
    if dump {
        println!("{}", serde_json::to_string_pretty(&example)?);
        return Ok(ExitCode::SUCCESS);
    }
    let result = example.replay(Scheme::Pos)?;
    let checks = check_result(&result);
    let pass = checks.iter().all(|c| c.pass);

    if as_json {
        let layers: Vec<_> = result
            .hops
            .iter()
            .map(|h| {
                json!({
                    "transmitter": h.transmitter,
                    "receivers": h.receivers,
                    "channel": h.chosen_channel.map(|j| j + 1),
                    "min_pos": h.min_pos_at_choice,
                    "success": h.success,
                })
            })
            .collect();
        let report = json!({
            "layers": layers,
            "throughput_bps": result.throughput,
            "total_throughput_bps": result.total_throughput,
            "avg_throughput_bps": result.avg_throughput,
            "pdr": result.pdr,
            "checks": checks,
            "pass": pass,
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("Reference scenario, POS channel assignment");
        for h in &result.hops {
            let receivers: Vec<String> = h.receivers.iter().map(|r| r.to_string()).collect();
            match h.chosen_channel {
                Some(j) => println!(
                    "  layer {} -> [{}]: CH{} (min POS {})",
                    h.transmitter,
                    receivers.join(", "),
                    j + 1,
                    h.min_pos_at_choice
                ),
                None => println!(
                    "  layer {} -> [{}]: no idle channel",
                    h.transmitter,
                    receivers.join(", ")
                ),
            }
        }
        for (dest, v) in &result.throughput {
            println!("  V_{dest} = {:.4} Mbps", v / 1e6);
        }
        println!(
            "  total {:.4} Mbps, average {:.4} Mbps, PDR {}/{} = {:.0}%",
            result.total_throughput / 1e6,
            result.avg_throughput / 1e6,
            result.delivered_count(),
            result.delivered.len(),
            result.pdr * 100.0
        );
        for c in &checks {
            println!(
                "  [{}] {}: expected {}, got {}",
                if c.pass { "ok" } else { "MISMATCH" },
                c.name,
                c.expected,
                c.actual
            );
        }
    }
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_run(common: &CommonArgs, as_json: bool) -> Result<ExitCode> {
    let cfg = common.resolve()?;
    cfg.params.validate()?;
    let model = cfg.params.channel_model()?;
    let run = run_scenario(&cfg.params, &model, &cfg.schemes, &cfg.trees, cfg.seed)?;

    write_file(&cfg.out, "topology.txt", &run.topology.to_text())?;
    for s in &run.sessions {
        write_file(
            &cfg.out,
            &format!("session_{}_{}.csv", s.tree, s.scheme),
            &s.result.to_csv(),
        )?;
    }

    if as_json {
        let report = json!({
            "seed": cfg.seed,
            "destinations": run.destinations,
            "sessions": run.sessions,
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        let dests: Vec<String> = run.destinations.iter().map(|d| d.to_string()).collect();
        println!(
            "seed {}: {} nodes, {} edges, destinations [{}]",
            cfg.seed,
            run.topology.node_count(),
            run.topology.edges().len(),
            dests.join(", ")
        );
        for s in &run.sessions {
            println!(
                "{} {}: PDR {:.4}, total {:.4} Mbps, average {:.4} Mbps",
                s.tree,
                s.scheme,
                s.result.pdr,
                s.result.total_throughput / 1e6,
                s.result.avg_throughput / 1e6
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(common: &CommonArgs, variable: Option<&str>, values: &[f64]) -> Result<ExitCode> {
    let mut cfg = common.resolve()?;
    if let Some(v) = variable {
        cfg.variable = Some(v.parse::<SweepVariable>()?);
    }
    if !values.is_empty() {
        cfg.values = values.to_vec();
    }
    let Some(variable) = cfg.variable else {
        bail!("missing key `variable` (config) or --variable");
    };
    if cfg.values.is_empty() {
        bail!("missing key `values` (config) or --values");
    }
    let spec = SweepSpec {
        base: cfg.params.clone(),
        variable,
        values: cfg.values.clone(),
        trials: cfg.trials,
        seed: cfg.seed,
        schemes: cfg.schemes.clone(),
        trees: cfg.trees.clone(),
    };
    let SweepOutput { rows, aggregate } = run_sweep(&spec)?;
    let trials_path = write_file(&cfg.out, "trials.csv", &trials_csv(&rows))?;
    let agg_path = write_file(&cfg.out, "aggregate.csv", &aggregate_csv(&aggregate))?;
    for a in &aggregate {
        println!(
            "{} {} {}={}: throughput {:.4} +/- {:.4} Mbps, PDR {:.4} +/- {:.4} ({} trials)",
            a.tree,
            a.scheme,
            a.variable,
            a.value,
            a.mean_throughput / 1e6,
            a.ci95_throughput / 1e6,
            a.mean_pdr,
            a.ci95_pdr,
            a.trials
        );
    }
    println!("wrote {} and {}", trials_path.display(), agg_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_plot(csv: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let text = fs::read_to_string(csv).with_context(|| format!("reading {}", csv.display()))?;
    let rows = parse_aggregate_csv(&text).with_context(|| format!("parsing {}", csv.display()))?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out"));
    let mut written = 0;
    for tree in TreeKind::ALL {
        for metric in Metric::ALL {
            if let Some(svg) = render_svg(&rows, metric, tree) {
                let path = write_file(&out, &format!("{}_{}.svg", metric.as_str(), tree), &svg)?;
                println!("wrote {}", path.display());
                written += 1;
            }
        }
    }
    if written == 0 {
        bail!("{} holds no aggregate rows", csv.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Example {
            fixture,
            dump_fixture,
            json,
        } => cmd_example(fixture.as_deref(), *dump_fixture, *json),
        Command::Run { common, json } => cmd_run(common, *json),
        Command::Sweep {
            common,
            variable,
            values,
        } => cmd_sweep(common, variable.as_deref(), values),
        Command::Plot { csv, out } => cmd_plot(csv, out.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
