//! One multicast session over a pruned, layered tree.
//!
//! Every layer entry is a single transmitter event. Channel state and fading
//! gains for all events are drawn up front in schedule order, so two
//! sessions that share the same draws differ only in the channels their
//! schemes pick.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::{select_channel, Decision, LinkMetrics, Scheme};
use crate::channel::{sample_event_state, sample_gain, ChannelModel, EventState};
use crate::error::{Error, Result};
use crate::phy::{evaluate_link, PhyParams};
use crate::topology::{layerize, LayerSchedule, NodeId, Topology, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TreeKind {
    Spt,
    Mst,
}

impl TreeKind {
    pub const ALL: [TreeKind; 2] = [TreeKind::Spt, TreeKind::Mst];

    pub fn as_str(self) -> &'static str {
        match self {
            TreeKind::Spt => "spt",
            TreeKind::Mst => "mst",
        }
    }
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TreeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spt" => Ok(TreeKind::Spt),
            "mst" => Ok(TreeKind::Mst),
            other => Err(Error::param("tree", format!("unknown tree kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub phy: PhyParams,
    pub scheme: Scheme,
    pub tree_kind: TreeKind,
    pub destinations: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MsgKind {
    /// Message announcement from the transmitter.
    Ma,
    Ack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlMessage {
    pub kind: MsgKind,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopRecord {
    pub transmitter: NodeId,
    pub receivers: Vec<NodeId>,
    pub chosen_channel: Option<usize>,
    pub min_pos_at_choice: f64,
    /// Airtime to each receiver on the chosen channel (`inf` without one).
    pub tx_time: Vec<f64>,
    pub success: Vec<bool>,
    /// Sampled residual idle time of the chosen channel. Absent when no
    /// channel was chosen or when outcomes were injected.
    pub available_time: Option<f64>,
    /// False when the transmitter never received the packet itself.
    pub transmitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub delivered: BTreeMap<NodeId, bool>,
    pub throughput: BTreeMap<NodeId, f64>,
    pub total_throughput: f64,
    pub avg_throughput: f64,
    pub pdr: f64,
    pub hops: Vec<HopRecord>,
    pub control_trace: Vec<ControlMessage>,
}

impl SessionResult {
    pub fn delivered_count(&self) -> usize {
        self.delivered.values().filter(|&&d| d).count()
    }

    /// `dest,delivered,throughput_bps` rows followed by a
    /// `summary,<pdr>,<total_throughput_bps>` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dest,delivered,throughput_bps\n");
        for (dest, &ok) in &self.delivered {
            out.push_str(&format!("{dest},{ok},{}\n", self.throughput[dest]));
        }
        out.push_str(&format!("summary,{},{}\n", self.pdr, self.total_throughput));
        out
    }
}

/// Channel snapshot plus fading gains (`[receiver][channel]`) for one event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventDraws {
    pub state: EventState,
    pub gains: Vec<Vec<f64>>,
}

/// Draws one [`EventDraws`] per schedule entry, in schedule order. The
/// number of values consumed depends only on the schedule shape and the
/// channel count.
pub fn draw_events<R: Rng + ?Sized>(
    schedule: &LayerSchedule,
    model: &ChannelModel,
    rng: &mut R,
) -> Vec<EventDraws> {
    schedule
        .entries
        .iter()
        .map(|entry| {
            let state = sample_event_state(model, rng);
            let gains = entry
                .receivers
                .iter()
                .map(|_| (0..model.len()).map(|_| sample_gain(rng)).collect())
                .collect();
            EventDraws { state, gains }
        })
        .collect()
}

/// Evaluates every (receiver, channel) link of one event. Busy channels get
/// zero rate, infinite airtime and zero POS.
pub fn event_metrics(
    topology: &Topology,
    phy: &PhyParams,
    model: &ChannelModel,
    transmitter: NodeId,
    receivers: &[NodeId],
    draws: &EventDraws,
) -> Result<LinkMetrics> {
    let m = model.len();
    let mu = model.mu_idle();
    let idle = draws.state.idle_mask();
    let mut pos = Vec::with_capacity(receivers.len());
    let mut rate = Vec::with_capacity(receivers.len());
    let mut tx = Vec::with_capacity(receivers.len());
    for (ri, &r) in receivers.iter().enumerate() {
        let d = topology.distance(transmitter, r);
        if d == 0.0 {
            return Err(Error::CoLocated(transmitter, r));
        }
        let (mut prow, mut rrow, mut trow) = (vec![0.0; m], vec![0.0; m], vec![f64::INFINITY; m]);
        for j in 0..m {
            if idle[j] {
                let link = evaluate_link(phy, d, draws.gains[ri][j], mu[j])?;
                prow[j] = link.pos;
                rrow[j] = link.rate;
                trow[j] = link.tx_time;
            }
        }
        pos.push(prow);
        rate.push(rrow);
        tx.push(trow);
    }
    LinkMetrics::new(receivers.to_vec(), pos, rate, tx, mu, idle)
}

/// Per-event result before upstream failures are applied.
#[derive(Debug, Clone, PartialEq)]
struct EventOutcome {
    decision: Decision,
    tx_time: Vec<f64>,
    success: Vec<bool>,
    available_time: Option<f64>,
}

fn judge(metrics: &LinkMetrics, decision: Decision, state: &EventState) -> EventOutcome {
    match decision.channel {
        Some(j) => {
            let available = state.available[j];
            let tx_time: Vec<f64> = metrics.tx_time.iter().map(|row| row[j]).collect();
            let success = tx_time
                .iter()
                .map(|&t| available.is_some_and(|a| t <= a))
                .collect();
            EventOutcome {
                decision,
                tx_time,
                success,
                available_time: available,
            }
        }
        None => EventOutcome {
            decision,
            tx_time: vec![f64::INFINITY; metrics.receivers.len()],
            success: vec![false; metrics.receivers.len()],
            available_time: None,
        },
    }
}

/// Applies upstream failures, accumulates path airtime and computes the
/// per-destination figures.
fn assemble(
    schedule: &LayerSchedule,
    root: NodeId,
    destinations: &BTreeSet<NodeId>,
    packet_bits: f64,
    outcomes: Vec<EventOutcome>,
) -> SessionResult {
    // Airtime accumulated from the root, present only for nodes that hold
    // the packet.
    let mut path_time: BTreeMap<NodeId, f64> = BTreeMap::from([(root, 0.0)]);
    let mut hops = Vec::with_capacity(schedule.len());
    let mut control_trace = Vec::new();
    for (entry, outcome) in schedule.entries.iter().zip(outcomes) {
        for &r in &entry.receivers {
            control_trace.push(ControlMessage {
                kind: MsgKind::Ma,
                from: entry.transmitter,
                to: r,
            });
        }
        for &r in &entry.receivers {
            control_trace.push(ControlMessage {
                kind: MsgKind::Ack,
                from: r,
                to: entry.transmitter,
            });
        }
        let upstream = path_time.get(&entry.transmitter).copied();
        let transmitted = upstream.is_some();
        let mut success = outcome.success;
        for (i, &r) in entry.receivers.iter().enumerate() {
            success[i] &= transmitted;
            if success[i] {
                path_time.insert(r, upstream.unwrap_or(0.0) + outcome.tx_time[i]);
            }
        }
        hops.push(HopRecord {
            transmitter: entry.transmitter,
            receivers: entry.receivers.clone(),
            chosen_channel: outcome.decision.channel,
            min_pos_at_choice: outcome.decision.min_pos_at_choice,
            tx_time: outcome.tx_time,
            success,
            available_time: outcome.available_time,
            transmitted,
        });
    }

    let mut delivered = BTreeMap::new();
    let mut throughput = BTreeMap::new();
    for &d in destinations {
        match path_time.get(&d) {
            Some(&t) if t > 0.0 && t.is_finite() => {
                delivered.insert(d, true);
                throughput.insert(d, packet_bits / t);
            }
            _ => {
                delivered.insert(d, false);
                throughput.insert(d, 0.0);
            }
        }
    }
    let total_throughput: f64 = throughput.values().sum();
    let n = destinations.len() as f64;
    let delivered_count = delivered.values().filter(|&&x| x).count();
    SessionResult {
        delivered,
        throughput,
        total_throughput,
        avg_throughput: total_throughput / n,
        pdr: delivered_count as f64 / n,
        hops,
        control_trace,
    }
}

/// Checks that `tree` is exactly the union of root-to-destination paths.
pub fn check_pruned(tree: &Tree, destinations: &BTreeSet<NodeId>) -> Result<()> {
    if destinations.is_empty() {
        return Err(Error::EmptyDestinations);
    }
    if destinations.contains(&tree.root()) {
        return Err(Error::RootIsDestination(tree.root()));
    }
    for &d in destinations {
        if !tree.contains(d) {
            return Err(Error::UnknownNode(d));
        }
    }
    match tree.leaves().into_iter().find(|l| !destinations.contains(l)) {
        Some(leaf) => Err(Error::NotPruned(leaf)),
        None => Ok(()),
    }
}

/// Replays a session against pre-drawn channel states and gains. `rng` is
/// only consumed by random channel selection.
pub fn run_session_with_draws<R: Rng + ?Sized>(
    topology: &Topology,
    tree: &Tree,
    schedule: &LayerSchedule,
    cfg: &SessionConfig,
    model: &ChannelModel,
    draws: &[EventDraws],
    rng: &mut R,
) -> Result<SessionResult> {
    check_pruned(tree, &cfg.destinations)?;
    if draws.len() != schedule.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} event draws for {} schedule entries",
            draws.len(),
            schedule.len()
        )));
    }
    let mut outcomes = Vec::with_capacity(schedule.len());
    for (entry, ev) in schedule.entries.iter().zip(draws) {
        let metrics = event_metrics(
            topology,
            &cfg.phy,
            model,
            entry.transmitter,
            &entry.receivers,
            ev,
        )?;
        let decision = select_channel(cfg.scheme, &metrics, rng);
        outcomes.push(judge(&metrics, decision, &ev.state));
    }
    Ok(assemble(
        schedule,
        tree.root(),
        &cfg.destinations,
        cfg.phy.packet_bits,
        outcomes,
    ))
}

/// Runs one session: layers the pruned tree, draws every event and replays
/// it under `cfg.scheme`.
pub fn run_session<R: Rng + ?Sized>(
    topology: &Topology,
    tree: &Tree,
    cfg: &SessionConfig,
    model: &ChannelModel,
    rng: &mut R,
) -> Result<SessionResult> {
    check_pruned(tree, &cfg.destinations)?;
    let schedule = layerize(tree);
    let draws = draw_events(&schedule, model, rng);
    run_session_with_draws(topology, tree, &schedule, cfg, model, &draws, rng)
}

/// Hand-specified figures for one transmitter event, bypassing sampling.
/// Matrices are `[receiver][channel]` with rows in `receivers` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedLayer {
    pub transmitter: NodeId,
    pub receivers: Vec<NodeId>,
    pub idle: Vec<bool>,
    pub pos: Vec<Vec<f64>>,
    pub tx_time: Vec<Vec<f64>>,
    /// Whether each receiver's airtime fits the chosen channel's actual
    /// idle time.
    pub available: Vec<bool>,
}

/// Replays a session from injected POS tables, airtimes and availability
/// outcomes. Selection, upstream-failure propagation and throughput
/// accounting are the same as in [`run_session`].
pub fn inject_metrics_session<R: Rng + ?Sized>(
    tree: &Tree,
    destinations: &BTreeSet<NodeId>,
    layers: &[InjectedLayer],
    mu_idle: &[f64],
    packet_bits: f64,
    scheme: Scheme,
    rng: &mut R,
) -> Result<SessionResult> {
    if layers.is_empty() {
        return Err(Error::DimensionMismatch("no injected layers".into()));
    }
    check_pruned(tree, destinations)?;
    let schedule = layerize(tree);
    if layers.len() != schedule.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} injected layers for {} schedule entries",
            layers.len(),
            schedule.len()
        )));
    }
    let mut outcomes = Vec::with_capacity(schedule.len());
    for entry in &schedule.entries {
        let layer = layers
            .iter()
            .find(|l| l.transmitter == entry.transmitter)
            .ok_or_else(|| {
                Error::DimensionMismatch(format!("no injected layer for {}", entry.transmitter))
            })?;
        if layer.available.len() != layer.receivers.len() {
            return Err(Error::DimensionMismatch(format!(
                "layer {}: {} availability outcomes for {} receivers",
                layer.transmitter,
                layer.available.len(),
                layer.receivers.len()
            )));
        }
        let mut rows = Vec::with_capacity(entry.receivers.len());
        for r in &entry.receivers {
            let row = layer.receivers.iter().position(|x| x == r).ok_or_else(|| {
                Error::DimensionMismatch(format!(
                    "layer {}: receiver {r} missing from injected table",
                    layer.transmitter
                ))
            })?;
            rows.push(row);
        }
        if layer.receivers.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "layer {}: table lists {} receivers, schedule has {}",
                layer.transmitter,
                layer.receivers.len(),
                rows.len()
            )));
        }
        let pick = |mat: &Vec<Vec<f64>>| -> Result<Vec<Vec<f64>>> {
            rows.iter()
                .map(|&i| {
                    mat.get(i).cloned().ok_or_else(|| {
                        Error::DimensionMismatch(format!("layer {}: short table", layer.transmitter))
                    })
                })
                .collect()
        };
        let pos = pick(&layer.pos)?;
        let tx_time = pick(&layer.tx_time)?;
        let rate = tx_time
            .iter()
            .map(|row| row.iter().map(|&t| if t > 0.0 { packet_bits / t } else { 0.0 }).collect())
            .collect();
        let metrics = LinkMetrics::new(
            entry.receivers.clone(),
            pos,
            rate,
            tx_time,
            mu_idle.to_vec(),
            layer.idle.clone(),
        )?;
        let decision = select_channel(scheme, &metrics, rng);
        let (tx_time, success) = match decision.channel {
            Some(j) => (
                metrics.tx_time.iter().map(|row| row[j]).collect(),
                rows.iter().map(|&i| layer.available[i]).collect(),
            ),
            None => (
                vec![f64::INFINITY; rows.len()],
                vec![false; rows.len()],
            ),
        };
        outcomes.push(EventOutcome {
            decision,
            tx_time,
            success,
            available_time: None,
        });
    }
    Ok(assemble(
        &schedule,
        tree.root(),
        destinations,
        packet_bits,
        outcomes,
    ))
}
