//! Unified channel selection for one transmitter and its receiver group.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Max over channels of the minimum probability of success.
    Pos,
    /// Max mean spectrum availability time.
    Masa,
    /// Max over channels of the minimum data rate.
    Mdr,
    /// Uniform random idle channel.
    Rs,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Pos, Scheme::Masa, Scheme::Mdr, Scheme::Rs];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Pos => "pos",
            Scheme::Masa => "masa",
            Scheme::Mdr => "mdr",
            Scheme::Rs => "rs",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pos" => Ok(Scheme::Pos),
            "masa" => Ok(Scheme::Masa),
            "mdr" => Ok(Scheme::Mdr),
            "rs" => Ok(Scheme::Rs),
            other => Err(Error::param("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Per-receiver, per-channel link figures for one transmitter event.
///
/// Matrices are indexed `[receiver][channel]`. Busy channels always carry a
/// POS of zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub receivers: Vec<NodeId>,
    pub pos: Vec<Vec<f64>>,
    pub rate: Vec<Vec<f64>>,
    pub tx_time: Vec<Vec<f64>>,
    pub mu_idle: Vec<f64>,
    pub idle: Vec<bool>,
}

impl LinkMetrics {
    /// Checks dimensions and zeroes the POS entries of busy channels.
    pub fn new(
        receivers: Vec<NodeId>,
        mut pos: Vec<Vec<f64>>,
        rate: Vec<Vec<f64>>,
        tx_time: Vec<Vec<f64>>,
        mu_idle: Vec<f64>,
        idle: Vec<bool>,
    ) -> Result<Self> {
        let m = idle.len();
        if m == 0 {
            return Err(Error::DimensionMismatch("no channels".into()));
        }
        if receivers.is_empty() {
            return Err(Error::DimensionMismatch("no receivers".into()));
        }
        if mu_idle.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} mean idle times for {m} channels",
                mu_idle.len()
            )));
        }
        for (name, mat) in [("pos", &pos), ("rate", &rate), ("tx_time", &tx_time)] {
            if mat.len() != receivers.len() || mat.iter().any(|row| row.len() != m) {
                return Err(Error::DimensionMismatch(format!(
                    "{name} matrix is not {} x {m}",
                    receivers.len()
                )));
            }
        }
        for row in &mut pos {
            for (j, v) in row.iter_mut().enumerate() {
                if !idle[j] {
                    *v = 0.0;
                }
            }
        }
        Ok(LinkMetrics {
            receivers,
            pos,
            rate,
            tx_time,
            mu_idle,
            idle,
        })
    }

    pub fn channel_count(&self) -> usize {
        self.idle.len()
    }

    pub fn idle_channels(&self) -> Vec<usize> {
        (0..self.idle.len()).filter(|&j| self.idle[j]).collect()
    }

    /// Worst receiver's POS on `channel`.
    pub fn min_pos(&self, channel: usize) -> f64 {
        self.pos
            .iter()
            .map(|row| row[channel])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_rate(&self, channel: usize) -> f64 {
        self.rate
            .iter()
            .map(|row| row[channel])
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub channel: Option<usize>,
    pub min_pos_at_choice: f64,
}

impl Decision {
    fn none() -> Self {
        Decision {
            channel: None,
            min_pos_at_choice: 0.0,
        }
    }
}

/// Index of the first maximum of `score` over `candidates`.
fn first_argmax(candidates: &[usize], score: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in candidates {
        let s = score(j);
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((j, s)),
        }
    }
    best.map(|(j, _)| j)
}

/// Picks one channel for the whole receiver group. Ties go to the lowest
/// channel index; no idle channel yields a decision without a channel.
pub fn select_channel<R: Rng + ?Sized>(
    scheme: Scheme,
    metrics: &LinkMetrics,
    rng: &mut R,
) -> Decision {
    let idle = metrics.idle_channels();
    if idle.is_empty() {
        return Decision::none();
    }
    let channel = match scheme {
        Scheme::Pos => first_argmax(&idle, |j| metrics.min_pos(j)),
        Scheme::Masa => first_argmax(&idle, |j| metrics.mu_idle[j]),
        Scheme::Mdr => first_argmax(&idle, |j| metrics.min_rate(j)),
        Scheme::Rs => Some(idle[rng.random_range(0..idle.len())]),
    };
    Decision {
        channel,
        min_pos_at_choice: channel.map_or(0.0, |j| metrics.min_pos(j)),
    }
}

/// Single-receiver selection. With one receiver the group minimum is that
/// receiver's own figure, so this is [`select_channel`] restricted to
/// unicast metrics.
pub fn select_unicast<R: Rng + ?Sized>(
    scheme: Scheme,
    metrics: &LinkMetrics,
    rng: &mut R,
) -> Result<Decision> {
    if metrics.receivers.len() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "unicast selection needs one receiver, got {}",
            metrics.receivers.len()
        )));
    }
    Ok(select_channel(scheme, metrics, rng))
}
