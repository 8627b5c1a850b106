//! Multicast routing over multi-hop cognitive radio networks.
//!
//! A source reaches a set of destinations through a shortest path tree or a
//! minimum spanning tree. Each transmitter picks one unified channel for all
//! of its children, choosing among the channels primary users leave idle.
//! Four channel-assignment schemes are available: max-min probability of
//! success (POS), max mean availability (MASA), max-min data rate (MDR) and
//! random selection (RS).
//!
//! Module map:
//! - [`topology`]: random placement, SPT/MST construction, pruning, layering
//! - [`channel`]: idle/busy primary-user channels and Rayleigh gains
//! - [`phy`]: received power, Shannon rate, airtime, probability of success
//! - [`assignment`]: unified channel selection per scheme
//! - [`session`]: one multicast session, per-hop outcomes, throughput, PDR
//! - [`experiment`]: paired Monte Carlo trials, sweeps, CSV output
//! - [`plot`]: SVG charts of sweep aggregates
//! - [`worked_example`]: fixed 15-node reference scenario

pub mod assignment;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod phy;
pub mod plot;
pub mod session;
pub mod topology;
pub mod worked_example;

pub use assignment::{select_channel, Decision, LinkMetrics, Scheme};
pub use channel::{make_channels, ChannelModel, ChannelParams, EventState};
pub use error::{Error, Result};
pub use experiment::{run_scenario, run_sweep, run_trial, ScenarioParams, SweepSpec, SweepVariable};
pub use phy::PhyParams;
pub use session::{run_session, SessionConfig, SessionResult, TreeKind};
pub use topology::{NodeId, Point, Topology, Tree};
