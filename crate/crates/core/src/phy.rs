//! Radio link model: free-space path loss, thermal noise, SNR and the
//! per-MCS frame success curve for HT20 long-GI MCS 0-7.

use serde::Serialize;

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise density at 290 K (dBm/Hz).
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Distances below this are clamped to keep Friis out of the near field.
pub const MIN_DISTANCE_M: f64 = 0.1;

pub const NUM_MCS: usize = 8;

/// HT20 long guard interval PHY rates for MCS 0-7 (Mbit/s).
pub const HT20_LGI_RATES_MBPS: [f64; NUM_MCS] = [6.5, 13.0, 19.5, 26.0, 39.0, 52.0, 58.5, 65.0];

pub const DEFAULT_MIDPOINTS_DB: [f64; NUM_MCS] = [5.0, 8.0, 11.0, 14.0, 18.0, 21.0, 24.0, 26.0];

pub const DEFAULT_SLOPE_PER_DB: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub frequency_hz: f64,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for ChannelParams {
    /// 5180 MHz, 20 MHz, 20 dBm, 7 dB noise figure.
    fn default() -> Self {
        ChannelParams {
            frequency_hz: 5180e6,
            tx_power_dbm: 20.0,
            bandwidth_hz: 20e6,
            noise_figure_db: 7.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(Error::invalid(format!(
                "frequency must be positive, got {} Hz",
                self.frequency_hz
            )));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::invalid(format!(
                "bandwidth must be positive, got {} Hz",
                self.bandwidth_hz
            )));
        }
        if !(self.noise_figure_db.is_finite() && self.noise_figure_db >= 0.0) {
            return Err(Error::invalid(format!(
                "noise figure must be >= 0 dB, got {}",
                self.noise_figure_db
            )));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::invalid("transmit power must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McsEntry {
    pub index: usize,
    pub phy_rate_mbps: f64,
    pub midpoint_snr_db: f64,
    pub slope_per_db: f64,
}

/// Exactly eight entries, rate and midpoint both strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: [McsEntry; NUM_MCS],
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        let entries: [McsEntry; NUM_MCS] = entries.try_into().map_err(|v: Vec<McsEntry>| {
            Error::invalid(format!(
                "MCS table needs exactly {NUM_MCS} entries, got {}",
                v.len()
            ))
        })?;
        for (i, e) in entries.iter().enumerate() {
            if e.index != i {
                return Err(Error::invalid(format!(
                    "MCS entry {i} has index {}",
                    e.index
                )));
            }
            if !(e.phy_rate_mbps.is_finite() && e.phy_rate_mbps > 0.0) {
                return Err(Error::invalid(format!(
                    "MCS {i}: PHY rate must be positive"
                )));
            }
            if !e.midpoint_snr_db.is_finite() {
                return Err(Error::invalid(format!("MCS {i}: midpoint must be finite")));
            }
            if !(e.slope_per_db.is_finite() && e.slope_per_db > 0.0) {
                return Err(Error::invalid(format!("MCS {i}: slope must be positive")));
            }
        }
        for pair in entries.windows(2) {
            if pair[1].phy_rate_mbps <= pair[0].phy_rate_mbps {
                return Err(Error::invalid(format!(
                    "PHY rate must strictly increase with MCS index (MCS {} -> {})",
                    pair[0].index, pair[1].index
                )));
            }
            if pair[1].midpoint_snr_db <= pair[0].midpoint_snr_db {
                return Err(Error::invalid(format!(
                    "midpoint SNR must strictly increase with MCS index (MCS {} -> {})",
                    pair[0].index, pair[1].index
                )));
            }
        }
        Ok(McsTable { entries })
    }

    pub fn from_columns(rates: &[f64], midpoints: &[f64], slopes: &[f64]) -> Result<Self> {
        if rates.len() != midpoints.len() || rates.len() != slopes.len() {
            return Err(Error::invalid("MCS table columns differ in length"));
        }
        let entries = (0..rates.len())
            .map(|i| McsEntry {
                index: i,
                phy_rate_mbps: rates[i],
                midpoint_snr_db: midpoints[i],
                slope_per_db: slopes[i],
            })
            .collect();
        McsTable::new(entries)
    }

    pub fn entries(&self) -> &[McsEntry; NUM_MCS] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&McsEntry> {
        self.entries.get(index)
    }

    pub fn highest(&self) -> &McsEntry {
        &self.entries[NUM_MCS - 1]
    }
}

impl Default for McsTable {
    fn default() -> Self {
        McsTable::from_columns(
            &HT20_LGI_RATES_MBPS,
            &DEFAULT_MIDPOINTS_DB,
            &[DEFAULT_SLOPE_PER_DB; NUM_MCS],
        )
        .expect("built-in MCS table is valid")
    }
}

fn check_distance(distance_m: f64) -> Result<f64> {
    if !distance_m.is_finite() || distance_m <= 0.0 {
        return Err(Error::invalid(format!(
            "distance must be finite and positive, got {distance_m}"
        )));
    }
    if distance_m < MIN_DISTANCE_M {
        log::warn!("distance {distance_m} m clamped to {MIN_DISTANCE_M} m");
        return Ok(MIN_DISTANCE_M);
    }
    Ok(distance_m)
}

/// Free-space path loss 20·log10(4π·d·f/c) in dB.
pub fn friis_path_loss(distance_m: f64, params: &ChannelParams) -> Result<f64> {
    params.validate()?;
    let d = check_distance(distance_m)?;
    Ok(20.0 * (4.0 * std::f64::consts::PI * d * params.frequency_hz / SPEED_OF_LIGHT).log10())
}

pub fn noise_power_dbm(params: &ChannelParams) -> Result<f64> {
    params.validate()?;
    Ok(THERMAL_NOISE_DBM_PER_HZ + 10.0 * params.bandwidth_hz.log10() + params.noise_figure_db)
}

/// Received SNR at `distance_m`. The channel is symmetric, so this is also
/// the SNR the transmitter measures on returning ACKs.
pub fn snr_db(distance_m: f64, params: &ChannelParams) -> Result<f64> {
    Ok(params.tx_power_dbm - friis_path_loss(distance_m, params)? - noise_power_dbm(params)?)
}

/// Logistic frame success probability around the entry's midpoint.
pub fn frame_success_prob(snr_db: f64, mcs: &McsEntry) -> f64 {
    let x = -mcs.slope_per_db * (snr_db - mcs.midpoint_snr_db);
    // exp overflows to inf for very negative SNR, which correctly yields 0.
    1.0 / (1.0 + x.exp())
}

/// Maps an SNR into the [0, 1] observation space.
pub fn scale_snr(snr_db: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::config(format!(
            "SNR scaling bounds need lo < hi, got lo={lo} hi={hi}"
        )));
    }
    Ok(((snr_db - lo) / (hi - lo)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn friis_reference_points() {
        let p = ChannelParams::default();
        assert!(close(friis_path_loss(1.0, &p).unwrap(), 46.73, 0.01));
        assert!(close(friis_path_loss(10.0, &p).unwrap(), 66.73, 0.01));
        let d = 37.5;
        let diff = friis_path_loss(2.0 * d, &p).unwrap() - friis_path_loss(d, &p).unwrap();
        assert!(close(diff, 6.0206, 1e-4));
    }

    #[test]
    fn friis_rejects_bad_distance() {
        let p = ChannelParams::default();
        for d in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                friis_path_loss(d, &p),
                Err(Error::InvalidInput(_))
            ));
        }
    }

    #[test]
    fn near_field_distances_are_clamped() {
        let p = ChannelParams::default();
        assert_eq!(
            friis_path_loss(0.01, &p).unwrap(),
            friis_path_loss(MIN_DISTANCE_M, &p).unwrap()
        );
    }

    #[test]
    fn noise_floor() {
        let mut p = ChannelParams::default();
        assert!(close(noise_power_dbm(&p).unwrap(), -93.99, 0.01));
        p.noise_figure_db = 0.0;
        assert!(close(noise_power_dbm(&p).unwrap(), -100.99, 0.01));
        let base = noise_power_dbm(&p).unwrap();
        p.bandwidth_hz *= 2.0;
        assert!(close(noise_power_dbm(&p).unwrap() - base, 3.0103, 1e-4));
    }

    #[test]
    fn snr_reference_points() {
        let p = ChannelParams::default();
        assert!(close(snr_db(100.0, &p).unwrap(), 27.26, 0.05));
        assert!(close(snr_db(1.0, &p).unwrap(), 67.26, 0.05));
    }

    #[test]
    fn invalid_channel_params() {
        let mut p = ChannelParams::default();
        p.bandwidth_hz = 0.0;
        assert!(noise_power_dbm(&p).is_err());
        let mut p = ChannelParams::default();
        p.noise_figure_db = -1.0;
        assert!(snr_db(10.0, &p).is_err());
    }

    #[test]
    fn logistic_points() {
        let t = McsTable::default();
        for e in t.entries() {
            assert_eq!(frame_success_prob(e.midpoint_snr_db, e), 0.5);
            let p90 = e.midpoint_snr_db + 9f64.ln() / e.slope_per_db;
            assert!(close(frame_success_prob(p90, e), 0.9, 1e-9));
            assert_eq!(frame_success_prob(f64::INFINITY, e), 1.0);
            assert_eq!(frame_success_prob(f64::NEG_INFINITY, e), 0.0);
            assert_eq!(frame_success_prob(1e6, e), 1.0);
            assert_eq!(frame_success_prob(-1e6, e), 0.0);
        }
    }

    #[test]
    fn scaling() {
        assert_eq!(scale_snr(20.0, 0.0, 40.0).unwrap(), 0.5);
        assert_eq!(scale_snr(-5.0, 0.0, 40.0).unwrap(), 0.0);
        assert_eq!(scale_snr(47.0, 0.0, 40.0).unwrap(), 1.0);
        assert!(matches!(scale_snr(1.0, 40.0, 40.0), Err(Error::Config(_))));
    }

    #[test]
    fn table_validation() {
        assert_eq!(McsTable::default().highest().phy_rate_mbps, 65.0);
        let mut rates = HT20_LGI_RATES_MBPS;
        rates.swap(2, 3);
        assert!(McsTable::from_columns(&rates, &DEFAULT_MIDPOINTS_DB, &[1.0; 8]).is_err());
        let mut mids = DEFAULT_MIDPOINTS_DB;
        mids[7] = mids[6];
        assert!(McsTable::from_columns(&HT20_LGI_RATES_MBPS, &mids, &[1.0; 8]).is_err());
        assert!(McsTable::from_columns(&HT20_LGI_RATES_MBPS[..7], &mids[..7], &[1.0; 7]).is_err());
        let mut slopes = [1.0; 8];
        slopes[0] = 0.0;
        assert!(
            McsTable::from_columns(&HT20_LGI_RATES_MBPS, &DEFAULT_MIDPOINTS_DB, &slopes).is_err()
        );
    }
}
