//! Monte Carlo harness: paired trials over schemes and tree kinds, parameter
//! sweeps and aggregation.
//!
//! Trial `i` of a sweep uses seed `seed + i`. Within a trial every scheme is
//! replayed against the same topology, destinations, channel states and
//! gains (common random numbers); only the channel decisions differ.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::Scheme;
use crate::channel::{make_channels, ChannelModel};
use crate::error::{Error, Result};
use crate::phy::{wavelength_for, PhyParams, BITS_PER_KB};
use crate::session::{draw_events, run_session_with_draws, SessionConfig, SessionResult, TreeKind};
use crate::topology::{
    build_mst, build_spt, choose_destinations, generate_topology, layerize, prune_tree, NodeId,
    Topology,
};

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

pub const DEFAULT_TRIALS: usize = 1000;

const TOPOLOGY_STREAM: u64 = 0;
const DRAW_STREAM: u64 = 1;
const SELECTION_STREAM: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Total node count, source included.
    pub n_nodes: usize,
    pub n_dest: usize,
    pub channels: usize,
    pub bandwidth: f64,
    pub packet_bits: f64,
    pub pt: f64,
    pub p_idle: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub area_side: f64,
    pub comm_range: f64,
    pub carrier_hz: f64,
    pub path_loss_exp: f64,
    pub noise_psd: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            n_nodes: 40,
            n_dest: 16,
            channels: 20,
            bandwidth: 1e6,
            packet_bits: 4.0 * BITS_PER_KB,
            pt: 0.1,
            p_idle: 0.9,
            mu_min: 0.002,
            mu_max: 0.070,
            area_side: 200.0,
            comm_range: 60.0,
            carrier_hz: 600e6,
            path_loss_exp: 4.0,
            noise_psd: 1e-18,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::param("n_nodes", "at least two nodes are required"));
        }
        if self.n_dest == 0 || self.n_dest >= self.n_nodes {
            return Err(Error::param(
                "n_dest",
                format!("need 1 <= n_dest < n_nodes ({})", self.n_nodes),
            ));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::param("carrier_hz", "must be positive"));
        }
        self.phy()?;
        self.channel_model()?;
        Ok(())
    }

    pub fn phy(&self) -> Result<PhyParams> {
        PhyParams::new(
            self.pt,
            self.path_loss_exp,
            wavelength_for(self.carrier_hz),
            self.noise_psd,
            self.bandwidth,
            self.packet_bits,
        )
    }

    pub fn channel_model(&self) -> Result<ChannelModel> {
        make_channels(self.channels, self.mu_min, self.mu_max, self.p_idle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub tree: TreeKind,
    pub scheme: Scheme,
    pub avg_throughput: f64,
    pub pdr: f64,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn tree_offset(tree: TreeKind) -> u64 {
    match tree {
        TreeKind::Spt => 0,
        TreeKind::Mst => 1,
    }
}

/// One paired trial with the channel model derived from `params`.
pub fn run_trial(
    params: &ScenarioParams,
    schemes: &[Scheme],
    trees: &[TreeKind],
    seed: u64,
) -> Result<Vec<TrialMetrics>> {
    params.validate()?;
    run_trial_with_model(params, &params.channel_model()?, schemes, trees, seed)
}

/// One paired trial against an explicit channel model (used for boundary
/// overrides such as always-idle spectrum). Output is ordered tree-major,
/// then scheme, following the argument order.
pub fn run_trial_with_model(
    params: &ScenarioParams,
    model: &ChannelModel,
    schemes: &[Scheme],
    trees: &[TreeKind],
    seed: u64,
) -> Result<Vec<TrialMetrics>> {
    Ok(run_scenario(params, model, schemes, trees, seed)?
        .sessions
        .into_iter()
        .map(|s| TrialMetrics {
            tree: s.tree,
            scheme: s.scheme,
            avg_throughput: s.result.avg_throughput,
            pdr: s.result.pdr,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSession {
    pub tree: TreeKind,
    pub scheme: Scheme,
    pub result: SessionResult,
}

/// Everything one paired trial produced.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub topology: Topology,
    pub destinations: BTreeSet<NodeId>,
    pub sessions: Vec<ScenarioSession>,
}

/// Generates the topology and destinations for `seed`, builds each tree
/// once, draws its events once and replays them under every scheme.
pub fn run_scenario(
    params: &ScenarioParams,
    model: &ChannelModel,
    schemes: &[Scheme],
    trees: &[TreeKind],
    seed: u64,
) -> Result<ScenarioRun> {
    let root = NodeId(0);
    let phy = params.phy()?;
    let mut topo_rng = stream_rng(seed, TOPOLOGY_STREAM);
    let topology = generate_topology(
        params.n_nodes,
        params.area_side,
        params.comm_range,
        &mut topo_rng,
    )?;
    let destinations = choose_destinations(params.n_nodes, root, params.n_dest, &mut topo_rng)?;

    let mut sessions = Vec::with_capacity(schemes.len() * trees.len());
    for &tree_kind in trees {
        let full = match tree_kind {
            TreeKind::Spt => build_spt(&topology, root)?,
            TreeKind::Mst => build_mst(&topology, root)?,
        };
        let tree = prune_tree(&full, &destinations)?;
        let schedule = layerize(&tree);
        let draws = draw_events(
            &schedule,
            model,
            &mut stream_rng(seed, DRAW_STREAM + tree_offset(tree_kind)),
        );
        for &scheme in schemes {
            let cfg = SessionConfig {
                phy,
                scheme,
                tree_kind,
                destinations: destinations.clone(),
            };
            let mut select_rng = stream_rng(seed, SELECTION_STREAM + tree_offset(tree_kind));
            let result = run_session_with_draws(
                &topology,
                &tree,
                &schedule,
                &cfg,
                model,
                &draws,
                &mut select_rng,
            )?;
            sessions.push(ScenarioSession {
                tree: tree_kind,
                scheme,
                result,
            });
        }
    }
    Ok(ScenarioRun {
        topology,
        destinations,
        sessions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    Bandwidth,
    PacketBits,
    Channels,
    Pt,
    PIdle,
    NDest,
    NNodes,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Bandwidth => "bw",
            SweepVariable::PacketBits => "packet_bits",
            SweepVariable::Channels => "M",
            SweepVariable::Pt => "pt",
            SweepVariable::PIdle => "p_idle",
            SweepVariable::NDest => "n_dest",
            SweepVariable::NNodes => "n_nodes",
        }
    }

    fn count(value: f64, name: &'static str) -> Result<usize> {
        if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
            Ok(value as usize)
        } else {
            Err(Error::param(name, format!("{value} is not a whole count")))
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(self, base: &ScenarioParams, value: f64) -> Result<ScenarioParams> {
        let mut p = base.clone();
        match self {
            SweepVariable::Bandwidth => p.bandwidth = value,
            SweepVariable::PacketBits => p.packet_bits = value,
            SweepVariable::Channels => p.channels = Self::count(value, "channels")?,
            SweepVariable::Pt => p.pt = value,
            SweepVariable::PIdle => p.p_idle = value,
            SweepVariable::NDest => p.n_dest = Self::count(value, "n_dest")?,
            SweepVariable::NNodes => p.n_nodes = Self::count(value, "n_nodes")?,
        }
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bw" => Ok(SweepVariable::Bandwidth),
            "packet_bits" => Ok(SweepVariable::PacketBits),
            "M" | "m" => Ok(SweepVariable::Channels),
            "pt" => Ok(SweepVariable::Pt),
            "p_idle" => Ok(SweepVariable::PIdle),
            "n_dest" => Ok(SweepVariable::NDest),
            "n_nodes" => Ok(SweepVariable::NNodes),
            other => Err(Error::UnknownVariable(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ScenarioParams,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub trees: Vec<TreeKind>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::param("values", "at least one value is required"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "at least one trial is required"));
        }
        if self.schemes.is_empty() {
            return Err(Error::param("schemes", "at least one scheme is required"));
        }
        if self.trees.is_empty() {
            return Err(Error::param("trees", "at least one tree kind is required"));
        }
        for &v in &self.values {
            self.variable.apply(&self.base, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub tree: TreeKind,
    pub scheme: Scheme,
    pub variable: SweepVariable,
    pub value: f64,
    pub trial: usize,
    pub avg_throughput: f64,
    pub pdr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub tree: TreeKind,
    pub scheme: Scheme,
    pub variable: SweepVariable,
    pub value: f64,
    pub mean_throughput: f64,
    pub ci95_throughput: f64,
    pub mean_pdr: f64,
    pub ci95_pdr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub rows: Vec<TrialRow>,
    pub aggregate: Vec<AggregateRow>,
}

/// Sample mean and 95% normal-approximation half-width. A single sample
/// has a zero half-width.
pub fn mean_ci95(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Z95 * (var / n as f64).sqrt())
}

/// Groups per-trial rows by `(tree, scheme, value)` in first-seen order.
pub fn aggregate(rows: &[TrialRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(TreeKind, Scheme, SweepVariable, u64)> = Vec::new();
    for r in rows {
        let k = (r.tree, r.scheme, r.variable, r.value.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(tree, scheme, variable, bits)| {
            let group: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| {
                    r.tree == tree
                        && r.scheme == scheme
                        && r.variable == variable
                        && r.value.to_bits() == bits
                })
                .collect();
            let thr: Vec<f64> = group.iter().map(|r| r.avg_throughput).collect();
            let pdr: Vec<f64> = group.iter().map(|r| r.pdr).collect();
            let (mean_throughput, ci95_throughput) = mean_ci95(&thr);
            let (mean_pdr, ci95_pdr) = mean_ci95(&pdr);
            AggregateRow {
                tree,
                scheme,
                variable,
                value: f64::from_bits(bits),
                mean_throughput,
                ci95_throughput,
                mean_pdr,
                ci95_pdr,
                trials: group.len(),
            }
        })
        .collect()
}

/// Runs `trials` paired trials per value, in parallel, and orders the rows
/// by value, tree, scheme and trial index.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &value in &spec.values {
        let params = spec.variable.apply(&spec.base, value)?;
        let model = params.channel_model()?;
        let per_trial: Vec<Vec<TrialMetrics>> = (0..spec.trials)
            .into_par_iter()
            .map(|i| {
                run_trial_with_model(
                    &params,
                    &model,
                    &spec.schemes,
                    &spec.trees,
                    spec.seed.wrapping_add(i as u64),
                )
            })
            .collect::<Result<_>>()?;
        for &tree in &spec.trees {
            for &scheme in &spec.schemes {
                for (trial, metrics) in per_trial.iter().enumerate() {
                    let m = metrics
                        .iter()
                        .find(|m| m.tree == tree && m.scheme == scheme)
                        .expect("every trial covers every (tree, scheme)");
                    rows.push(TrialRow {
                        tree,
                        scheme,
                        variable: spec.variable,
                        value,
                        trial,
                        avg_throughput: m.avg_throughput,
                        pdr: m.pdr,
                    });
                }
            }
        }
    }
    let aggregate = aggregate(&rows);
    Ok(SweepOutput { rows, aggregate })
}

pub const TRIALS_HEADER: &str = "tree,scheme,variable,value,trial,avg_throughput_bps,pdr";
pub const AGGREGATE_HEADER: &str =
    "tree,scheme,variable,value,mean_throughput_bps,ci95_throughput,mean_pdr,ci95_pdr,trials";

pub fn trials_csv(rows: &[TrialRow]) -> String {
    let mut out = format!("{TRIALS_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.tree, r.scheme, r.variable, r.value, r.trial, r.avg_throughput, r.pdr
        ));
    }
    out
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.tree,
            r.scheme,
            r.variable,
            r.value,
            r.mean_throughput,
            r.ci95_throughput,
            r.mean_pdr,
            r.ci95_pdr,
            r.trials
        ));
    }
    out
}

fn csv_fields<'a>(
    text: &'a str,
    header: &str,
    width: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("unexpected header `{h}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                reason: "empty file".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("expected {width} fields, got {}", fields.len()),
            });
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

fn field<T: FromStr>(line: usize, name: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        line,
        reason: format!("bad {name} `{raw}`"),
    })
}

fn typed_field<T: FromStr<Err = Error>>(line: usize, raw: &str) -> Result<T> {
    raw.parse().map_err(|e: Error| Error::Parse {
        line,
        reason: e.to_string(),
    })
}

pub fn parse_trials_csv(text: &str) -> Result<Vec<TrialRow>> {
    csv_fields(text, TRIALS_HEADER, 7)?
        .into_iter()
        .map(|(line, f)| {
            Ok(TrialRow {
                tree: typed_field(line, f[0])?,
                scheme: typed_field(line, f[1])?,
                variable: typed_field(line, f[2])?,
                value: field(line, "value", f[3])?,
                trial: field(line, "trial", f[4])?,
                avg_throughput: field(line, "avg_throughput_bps", f[5])?,
                pdr: field(line, "pdr", f[6])?,
            })
        })
        .collect()
}

pub fn parse_aggregate_csv(text: &str) -> Result<Vec<AggregateRow>> {
    csv_fields(text, AGGREGATE_HEADER, 9)?
        .into_iter()
        .map(|(line, f)| {
            Ok(AggregateRow {
                tree: typed_field(line, f[0])?,
                scheme: typed_field(line, f[1])?,
                variable: typed_field(line, f[2])?,
                value: field(line, "value", f[3])?,
                mean_throughput: field(line, "mean_throughput_bps", f[4])?,
                ci95_throughput: field(line, "ci95_throughput", f[5])?,
                mean_pdr: field(line, "mean_pdr", f[6])?,
                ci95_pdr: field(line, "ci95_pdr", f[7])?,
                trials: field(line, "trials", f[8])?,
            })
        })
        .collect()
}
