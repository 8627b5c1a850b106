//! Link budget: received power under path loss and fading, Shannon rate,
//! packet airtime and probability that the airtime fits inside the
//! channel's idle period.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Bits in one kilobyte (1 KB = 1024 bytes).
pub const BITS_PER_KB: f64 = 8.0 * 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhyParams {
    /// Transmit power, watts.
    pub pt: f64,
    pub path_loss_exp: f64,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
    /// Thermal noise power spectral density, W/Hz.
    pub noise_psd: f64,
    /// Channel bandwidth, Hz.
    pub bandwidth: f64,
    /// Packet size, bits.
    pub packet_bits: f64,
}

impl PhyParams {
    pub fn new(
        pt: f64,
        path_loss_exp: f64,
        wavelength: f64,
        noise_psd: f64,
        bandwidth: f64,
        packet_bits: f64,
    ) -> Result<Self> {
        let fields = [
            ("pt", pt),
            ("path_loss_exp", path_loss_exp),
            ("wavelength", wavelength),
            ("noise_psd", noise_psd),
            ("bandwidth", bandwidth),
            ("packet_bits", packet_bits),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} is not strictly positive")));
            }
        }
        Ok(PhyParams {
            pt,
            path_loss_exp,
            wavelength,
            noise_psd,
            bandwidth,
            packet_bits,
        })
    }
}

pub fn wavelength_for(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// `pt / d^n * (lambda / 4 pi)^2 * gain`.
pub fn received_power(phy: &PhyParams, d: f64, gain: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::param("distance", format!("{d} m: nodes are co-located")));
    }
    if gain < 0.0 {
        return Err(Error::param("gain", format!("{gain} is negative")));
    }
    let aperture = phy.wavelength / (4.0 * PI);
    Ok(phy.pt / d.powf(phy.path_loss_exp) * aperture * aperture * gain)
}

/// Shannon rate in bits/second for received power `pr`.
pub fn data_rate(phy: &PhyParams, pr: f64) -> f64 {
    let noise = phy.bandwidth * phy.noise_psd;
    phy.bandwidth * (1.0 + pr / noise).log2()
}

/// Airtime of one packet; a zero rate yields `+inf`.
pub fn tx_time(phy: &PhyParams, rate: f64) -> f64 {
    if rate <= 0.0 {
        f64::INFINITY
    } else {
        phy.packet_bits / rate
    }
}

/// Probability that an exponential idle period of mean `mu_idle` outlasts
/// a transmission of length `tx_time`.
pub fn pos(tx_time: f64, mu_idle: f64) -> f64 {
    if tx_time.is_infinite() {
        return 0.0;
    }
    (-tx_time / mu_idle).exp()
}

/// Rate, airtime and success probability of one link on one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkEval {
    pub rate: f64,
    pub tx_time: f64,
    pub pos: f64,
}

pub fn evaluate_link(phy: &PhyParams, d: f64, gain: f64, mu_idle: f64) -> Result<LinkEval> {
    let pr = received_power(phy, d, gain)?;
    let rate = data_rate(phy, pr);
    let tx = tx_time(phy, rate);
    Ok(LinkEval {
        rate,
        tx_time: tx,
        pos: pos(tx, mu_idle),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base() -> PhyParams {
        PhyParams::new(0.1, 4.0, 0.5, 1e-18, 1e6, 4.0 * BITS_PER_KB).unwrap()
    }

    #[test]
    fn received_power_hand_check() {
        // 0.1 / 10^4 * (0.5 / 4pi)^2
        let pr = received_power(&base(), 10.0, 1.0).unwrap();
        assert!(((pr - 1.58314e-8) / 1.58314e-8).abs() < 1e-4, "{pr}");
        assert_eq!(received_power(&base(), 10.0, 0.0).unwrap(), 0.0);
        let near = received_power(&base(), 20.0, 1.0).unwrap();
        assert!((pr / near - 16.0).abs() < 1e-9);
    }

    #[test]
    fn received_power_rejects_zero_distance() {
        assert!(received_power(&base(), 0.0, 1.0).is_err());
        assert!(received_power(&base(), 1.0, -1.0).is_err());
    }

    #[test]
    fn data_rate_cases() {
        let phy = base();
        let noise = phy.bandwidth * phy.noise_psd;
        assert_eq!(data_rate(&phy, 3.0 * noise), 2_000_000.0);
        assert_eq!(data_rate(&phy, 0.0), 0.0);
        let r = data_rate(&phy, 1e-9);
        let expected = 1e6 * 1001f64.log2();
        assert!((r - expected).abs() / expected < 1e-12);
        assert!((r - 9.9672e6).abs() / 9.9672e6 < 1e-4);
    }

    #[test]
    fn tx_time_cases() {
        let phy = base();
        assert_eq!(phy.packet_bits, 32768.0);
        let t = tx_time(&phy, 32768.0 / 0.0059);
        assert!((t - 0.0059).abs() < 1e-15);
        assert_eq!(tx_time(&phy, f64::INFINITY), 0.0);
        assert_eq!(tx_time(&phy, 0.0), f64::INFINITY);
    }

    #[test]
    fn pos_cases() {
        assert_eq!(pos(0.0, 0.02), 1.0);
        assert!((pos(0.03, 0.03) - (-1f64).exp()).abs() < 1e-12);
        assert_eq!(pos(f64::INFINITY, 0.05), 0.0);
        let p = pos(0.0059, 0.050);
        assert!((p - (-0.118f64).exp()).abs() < 1e-12);
        assert!((0.88..0.89).contains(&p));
    }

    #[test]
    fn wavelength_from_carrier() {
        assert!((wavelength_for(600e6) - 0.4997).abs() < 1e-4);
    }

    #[test]
    fn params_must_be_positive() {
        assert!(PhyParams::new(0.0, 4.0, 0.5, 1e-18, 1e6, 1.0).is_err());
        assert!(PhyParams::new(0.1, 4.0, 0.5, 1e-18, -1.0, 1.0).is_err());
        assert!(PhyParams::new(0.1, 4.0, 0.5, f64::NAN, 1e6, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn pos_monotone(t in 0.0f64..1.0, dt in 1e-6f64..1.0, mu in 1e-4f64..1.0, dmu in 1e-6f64..1.0) {
            prop_assert!(pos(t + dt, mu) <= pos(t, mu));
            prop_assert!(pos(t, mu + dmu) >= pos(t, mu));
            let p = pos(t, mu);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn rate_monotone_and_linear_in_bandwidth(pr in 1e-15f64..1e-6, dpr in 1e-15f64..1e-6, snr in 1e-3f64..1e4, k in 0.1f64..10.0) {
            let phy = base();
            prop_assert!(data_rate(&phy, pr + dpr) >= data_rate(&phy, pr));
            let wide = PhyParams { bandwidth: phy.bandwidth * k, ..phy };
            let r1 = data_rate(&phy, snr * phy.bandwidth * phy.noise_psd);
            let r2 = data_rate(&wide, snr * wide.bandwidth * wide.noise_psd);
            prop_assert!((r2 / r1 - k).abs() < 1e-9 * k);
        }

        #[test]
        fn received_power_linear(d in 0.5f64..300.0, g in 0.01f64..10.0, k in 0.1f64..10.0) {
            let phy = base();
            let p = received_power(&phy, d, g).unwrap();
            let scaled = received_power(&PhyParams { pt: phy.pt * k, ..phy }, d, g).unwrap();
            prop_assert!((scaled / p - k).abs() < 1e-9 * k);
            let pg = received_power(&phy, d, g * k).unwrap();
            prop_assert!((pg / p - k).abs() < 1e-9 * k);
            let link = evaluate_link(&phy, d, g, 0.05).unwrap();
            prop_assert!(link.tx_time.is_finite() && link.pos > 0.0);
        }
    }
}
