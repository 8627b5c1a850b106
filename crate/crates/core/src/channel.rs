//! Primary-user channel occupancy. Each channel alternates between idle and
//! busy periods; a transmitter event sees one snapshot of that process.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Mean idle (available) period, seconds.
    pub mu_idle: f64,
    /// Long-run fraction of time the channel is idle.
    pub p_idle: f64,
}

impl ChannelParams {
    pub fn new(mu_idle: f64, p_idle: f64) -> Result<Self> {
        if !(mu_idle > 0.0 && mu_idle.is_finite()) {
            return Err(Error::param("mu_idle", format!("{mu_idle} is not positive")));
        }
        if !(p_idle > 0.0 && p_idle < 1.0) {
            return Err(Error::param("p_idle", format!("{p_idle} is outside (0, 1)")));
        }
        Ok(ChannelParams { mu_idle, p_idle })
    }

    /// Mean busy period implied by `p_idle = mu / (mu + lambda)`.
    pub fn mean_busy(&self) -> f64 {
        self.mu_idle * (1.0 - self.p_idle) / self.p_idle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    channels: Vec<ChannelParams>,
}

impl ChannelModel {
    pub fn new(channels: Vec<ChannelParams>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::param("channels", "at least one channel is required"));
        }
        Ok(ChannelModel { channels })
    }

    pub fn channels(&self) -> &[ChannelParams] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn mu_idle(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.mu_idle).collect()
    }

    /// Overrides the idle probability of every channel. Accepts the closed
    /// interval so tests can force always-idle or always-busy spectrum.
    pub fn with_p_idle_override(mut self, p_idle: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_idle) {
            return Err(Error::param("p_idle", format!("{p_idle} is outside [0, 1]")));
        }
        for c in &mut self.channels {
            c.p_idle = p_idle;
        }
        Ok(self)
    }
}

/// `m` channels with mean idle times evenly spaced over
/// `[mu_min, mu_max]`, all sharing `p_idle`.
pub fn make_channels(m: usize, mu_min: f64, mu_max: f64, p_idle: f64) -> Result<ChannelModel> {
    if m == 0 {
        return Err(Error::param("channels", "at least one channel is required"));
    }
    if !(mu_min > 0.0 && mu_min <= mu_max && mu_max.is_finite()) {
        return Err(Error::param(
            "mu_range",
            format!("need 0 < mu_min <= mu_max, got [{mu_min}, {mu_max}]"),
        ));
    }
    let channels = (0..m)
        .map(|j| {
            let mu = if m == 1 {
                mu_min
            } else if j == m - 1 {
                mu_max
            } else {
                mu_min + (mu_max - mu_min) * j as f64 / (m - 1) as f64
            };
            ChannelParams::new(mu, p_idle)
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelModel::new(channels)
}

/// Channel snapshot seen by one transmitter event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventState {
    /// Remaining idle time per channel; `None` when the channel is busy.
    pub available: Vec<Option<f64>>,
}

impl EventState {
    pub fn is_idle(&self, channel: usize) -> bool {
        self.available[channel].is_some()
    }

    pub fn idle_mask(&self) -> Vec<bool> {
        self.available.iter().map(Option::is_some).collect()
    }

    pub fn idle_channels(&self) -> Vec<usize> {
        (0..self.available.len()).filter(|&j| self.is_idle(j)).collect()
    }
}

/// Draws the idle mask and, for idle channels, the residual idle time.
///
/// Idle periods are exponential with mean `mu_idle`, so the residual is too.
pub fn sample_event_state<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R) -> EventState {
    let available = model
        .channels
        .iter()
        .map(|c| {
            let idle = rng.random::<f64>() < c.p_idle;
            let residual: f64 = Exp1.sample(rng);
            // Always consume the residual draw so the stream layout does not
            // depend on the idle mask.
            idle.then(|| (residual * c.mu_idle).max(f64::MIN_POSITIVE))
        })
        .collect();
    EventState { available }
}

/// Rayleigh power gain: exponential with unit mean.
pub fn sample_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let g: f64 = Exp1.sample(rng);
    g.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn six_channels_ten_to_sixty_ms() {
        let m = make_channels(6, 0.010, 0.060, 0.7).unwrap();
        let mus = m.mu_idle();
        let expected = [0.010, 0.020, 0.030, 0.040, 0.050, 0.060];
        for (a, b) in mus.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn single_channel_uses_mu_min() {
        let m = make_channels(1, 0.005, 0.070, 0.5).unwrap();
        assert_eq!(m.mu_idle(), vec![0.005]);
    }

    #[test]
    fn twenty_channels_arithmetic_with_exact_endpoints() {
        let m = make_channels(20, 0.002, 0.070, 0.9).unwrap();
        let mus = m.mu_idle();
        assert_eq!(mus[0], 0.002);
        assert_eq!(mus[19], 0.070);
        let step = (0.070 - 0.002) / 19.0;
        for w in mus.windows(2) {
            assert!((w[1] - w[0] - step).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        assert!(make_channels(0, 0.01, 0.02, 0.5).is_err());
        assert!(make_channels(3, 0.0, 0.02, 0.5).is_err());
        assert!(make_channels(3, 0.03, 0.02, 0.5).is_err());
        assert!(make_channels(3, 0.01, 0.02, 0.0).is_err());
        assert!(make_channels(3, 0.01, 0.02, 1.0).is_err());
    }

    #[test]
    fn mean_busy_follows_idle_probability() {
        let c = ChannelParams::new(0.050, 0.5).unwrap();
        assert!((c.mean_busy() - 0.050).abs() < 1e-15);
        let c = ChannelParams::new(0.090, 0.9).unwrap();
        assert!((c.mean_busy() - 0.010).abs() < 1e-15);
    }

    #[test]
    fn always_idle_override() {
        let m = make_channels(5, 0.01, 0.05, 0.5)
            .unwrap()
            .with_p_idle_override(1.0)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let s = sample_event_state(&m, &mut rng);
            assert!(s.available.iter().all(|a| a.is_some_and(|t| t > 0.0)));
        }
    }

    #[test]
    fn always_busy_override() {
        let m = make_channels(5, 0.01, 0.05, 0.5)
            .unwrap()
            .with_p_idle_override(0.0)
            .unwrap();
        let s = sample_event_state(&m, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(s.idle_channels().is_empty());
    }

    #[test]
    fn gains_are_positive_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let ga = sample_gain(&mut a);
            assert!(ga > 0.0);
            assert_eq!(ga, sample_gain(&mut b));
        }
    }

    #[test]
    fn idle_indicators_are_uncorrelated() {
        let m = make_channels(4, 0.01, 0.04, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 100_000;
        let states: Vec<Vec<bool>> = (0..n)
            .map(|_| sample_event_state(&m, &mut rng).idle_mask())
            .collect();
        for a in 0..4 {
            for b in a + 1..4 {
                let xa: Vec<f64> = states.iter().map(|s| s[a] as u8 as f64).collect();
                let xb: Vec<f64> = states.iter().map(|s| s[b] as u8 as f64).collect();
                let ma = xa.iter().sum::<f64>() / n as f64;
                let mb = xb.iter().sum::<f64>() / n as f64;
                let cov: f64 =
                    xa.iter().zip(&xb).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n as f64;
                let va = xa.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n as f64;
                let vb = xb.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n as f64;
                let rho = cov / (va * vb).sqrt();
                assert!(rho.abs() < 0.02, "channels {a},{b}: rho = {rho}");
            }
        }
    }

    #[test]
    fn residual_availability_passes_ks_against_exponential() {
        let mu = 0.050;
        let m = ChannelModel::new(vec![ChannelParams::new(mu, 0.5).unwrap()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut samples = Vec::new();
        while samples.len() < 10_000 {
            if let Some(t) = sample_event_state(&m, &mut rng).available[0] {
                samples.push(t);
            }
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let d = samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = 1.0 - (-x / mu).exp();
                (cdf - i as f64 / n).abs().max((i as f64 + 1.0) / n - cdf)
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic.
        let critical = 1.628 / n.sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }
}
