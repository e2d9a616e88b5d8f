//! Air-to-ground channel: LoS probability, log-normal shadowed pathloss,
//! SINR and per-link rates.
//!
//! The pathloss model is the altitude-parameterized urban-macro aerial model:
//! both the LoS probability and the pathloss slopes depend on the transmitter
//! altitude `h`, valid for 22.5 m <= h <= 300 m. The LoS/NLoS branch and the
//! shadowing offset of every link are drawn once per (candidate location,
//! receiver) pair and stay frozen while the optimizers run, so one
//! replication sees one fixed channel.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::scenario::{dist3, Scenario};

/// Validity bounds of the altitude-parameterized model.
pub const MIN_UAV_ALTITUDE_M: f64 = 22.5;
pub const MAX_UAV_ALTITUDE_M: f64 = 300.0;

/// Whether links carry a random shadowing offset on top of the mean pathloss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShadowingMode {
    /// Shadowing forced to zero; links are the branch means.
    Off,
    /// Zero-mean normal shadowing with the branch-specific deviation.
    Random,
}

/// Radio parameters; the `[channel]` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    pub uav_power_dbm: f64,
    pub mbs_power_dbm: f64,
    pub noise_dbm_per_hz: f64,
    pub access_bandwidth_hz: f64,
    pub backhaul_bandwidth_hz: f64,
    pub shadowing: ShadowingMode,
    /// Co-channel interference seen on the backhaul, linear mW. Zero in the
    /// single-macro-site scenario; exposed for multi-site extensions.
    pub mbs_interference_mw: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            carrier_ghz: 2.0,
            uav_power_dbm: 23.0,
            mbs_power_dbm: 46.0,
            noise_dbm_per_hz: -174.0,
            access_bandwidth_hz: 20e6,
            backhaul_bandwidth_hz: 10e6,
            shadowing: ShadowingMode::Off,
            mbs_interference_mw: 0.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_ghz > 0.0) {
            return Err(Error::Config("carrier frequency must be positive".into()));
        }
        if !(self.access_bandwidth_hz > 0.0) || !(self.backhaul_bandwidth_hz > 0.0) {
            return Err(Error::Config("bandwidths must be positive".into()));
        }
        if !self.uav_power_dbm.is_finite()
            || !self.mbs_power_dbm.is_finite()
            || !self.noise_dbm_per_hz.is_finite()
        {
            return Err(Error::Config("powers must be finite".into()));
        }
        if !(self.mbs_interference_mw >= 0.0) {
            return Err(Error::Config("backhaul interference must be >= 0".into()));
        }
        Ok(())
    }

    /// Noise power over `bandwidth_hz`, linear mW.
    pub fn noise_mw(&self, bandwidth_hz: f64) -> f64 {
        db_to_linear(self.noise_dbm_per_hz + 10.0 * bandwidth_hz.log10())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn check_geometry(d3: f64, h: f64) -> Result<()> {
    if !(MIN_UAV_ALTITUDE_M..=MAX_UAV_ALTITUDE_M).contains(&h) {
        return Err(Error::Domain(format!(
            "altitude {h} m outside model validity [{MIN_UAV_ALTITUDE_M}, {MAX_UAV_ALTITUDE_M}]"
        )));
    }
    if d3 < h {
        return Err(Error::Domain(format!(
            "link distance {d3} m shorter than altitude {h} m"
        )));
    }
    Ok(())
}

/// Breakpoint: horizontal distances up to `d0` are LoS with certainty.
fn los_breakpoint_m(h: f64) -> f64 {
    (295.05 * h.log10() - 432.94).max(18.0)
}

/// Probability that the link of 3D length `d3` from altitude `h` is LoS.
///
/// Certain within the altitude-dependent breakpoint; beyond it the
/// probability decays as a convex mix of the breakpoint fraction and an
/// exponential in the horizontal distance, so it is continuous at the
/// breakpoint and non-increasing in distance.
pub fn los_probability(d3: f64, h: f64) -> Result<f64> {
    check_geometry(d3, h)?;
    let horiz = (d3 * d3 - h * h).max(0.0).sqrt();
    let d0 = los_breakpoint_m(h);
    if horiz <= d0 {
        return Ok(1.0);
    }
    let p1 = 233.98 * h.log10() - 0.95;
    let frac = d0 / horiz;
    Ok(frac + (-horiz / p1).exp() * (1.0 - frac))
}

/// Mean pathloss in dB for a forced LoS/NLoS branch (no shadowing).
/// The NLoS value is clamped from below by the LoS mean.
pub fn pathloss_mean_db(d3: f64, h: f64, carrier_ghz: f64, los: bool) -> f64 {
    let los_db = 30.9 + (22.25 - 0.5 * h.log10()) * d3.log10() + 20.0 * carrier_ghz.log10();
    if los {
        los_db
    } else {
        los_db.max(32.4 + (43.2 - 7.6 * h.log10()) * d3.log10() + 20.0 * carrier_ghz.log10())
    }
}

/// Shadowing standard deviation in dB for a branch at altitude `h`.
pub fn shadow_std_db(h: f64, los: bool) -> f64 {
    if los {
        4.64 * (-0.0066 * h).exp()
    } else {
        6.0
    }
}

/// One frozen link: branch draw, total pathloss, and the shadowing part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization {
    pub los: bool,
    pub pathloss_db: f64,
    pub shadow_db: f64,
}

/// Draw a link realization. The branch is Bernoulli in the LoS probability;
/// the shadowing offset is zero-mean normal when enabled and zero otherwise.
pub fn sample_link(
    d3: f64,
    h: f64,
    params: &ChannelParams,
    rng: &mut ChaCha8Rng,
) -> Result<LinkRealization> {
    let p_los = los_probability(d3, h)?;
    let los = rng.random::<f64>() < p_los;
    let shadow_db = match params.shadowing {
        ShadowingMode::Off => 0.0,
        ShadowingMode::Random => {
            let std = shadow_std_db(h, los);
            Normal::new(0.0, std)
                .map_err(|e| Error::Domain(format!("shadowing deviation: {e}")))?
                .sample(rng)
        }
    };
    Ok(LinkRealization {
        los,
        pathloss_db: pathloss_mean_db(d3, h, params.carrier_ghz, los) + shadow_db,
        shadow_db,
    })
}

/// All frozen link realizations of one replication plus the derived linear
/// quantities the evaluators need. Indexing is by candidate location: UAVs
/// inherit the link of whatever location they currently occupy.
#[derive(Debug, Clone)]
pub struct Links {
    /// `access[n][k]`: candidate location n to user k.
    pub access: Vec<Vec<LinkRealization>>,
    /// `backhaul[n]`: macro site to candidate location n.
    pub backhaul: Vec<LinkRealization>,
    rx_access_mw: Vec<Vec<f64>>,
    rx_backhaul_mw: Vec<f64>,
    pub noise_access_mw: f64,
    pub noise_backhaul_mw: f64,
    pub access_bandwidth_hz: f64,
    pub backhaul_bandwidth_hz: f64,
    pub mbs_interference_mw: f64,
}

/// Realize every link of the scenario from the seed's link stream.
/// Draw order is fixed: access links user-major per candidate, then the
/// backhaul links in candidate order.
pub fn realize_links(scenario: &Scenario, params: &ChannelParams, seed: u64) -> Result<Links> {
    params.validate()?;
    let mut rng = stream_rng(seed, Stream::Links);
    let mut access = Vec::with_capacity(scenario.candidates.len());
    let mut rx_access_mw = Vec::with_capacity(scenario.candidates.len());
    let uav_mw = db_to_linear(params.uav_power_dbm);
    let mbs_mw = db_to_linear(params.mbs_power_dbm);
    for c in &scenario.candidates {
        let h = c[2];
        let mut row = Vec::with_capacity(scenario.users.len());
        let mut rx_row = Vec::with_capacity(scenario.users.len());
        for u in &scenario.users {
            let link = sample_link(dist3(*c, *u).max(h), h, params, &mut rng)?;
            rx_row.push(uav_mw * db_to_linear(-link.pathloss_db));
            row.push(link);
        }
        access.push(row);
        rx_access_mw.push(rx_row);
    }
    let mut backhaul = Vec::with_capacity(scenario.candidates.len());
    let mut rx_backhaul_mw = Vec::with_capacity(scenario.candidates.len());
    for c in &scenario.candidates {
        let link = sample_link(dist3(*c, scenario.mbs_position), c[2], params, &mut rng)?;
        rx_backhaul_mw.push(mbs_mw * db_to_linear(-link.pathloss_db));
        backhaul.push(link);
    }
    Ok(Links {
        access,
        backhaul,
        rx_access_mw,
        rx_backhaul_mw,
        noise_access_mw: params.noise_mw(params.access_bandwidth_hz),
        noise_backhaul_mw: params.noise_mw(params.backhaul_bandwidth_hz),
        access_bandwidth_hz: params.access_bandwidth_hz,
        backhaul_bandwidth_hz: params.backhaul_bandwidth_hz,
        mbs_interference_mw: params.mbs_interference_mw,
    })
}

impl Links {
    pub fn rx_access_mw(&self, candidate: usize, user: usize) -> f64 {
        self.rx_access_mw[candidate][user]
    }

    pub fn rx_backhaul_mw(&self, candidate: usize) -> f64 {
        self.rx_backhaul_mw[candidate]
    }
}

/// SINR of user `k` served by UAV `m`: received power from m's location over
/// the summed received power from every other occupied location plus noise.
/// Linear ratio.
pub fn sinr_user(links: &Links, locations: &[usize], m: usize, k: usize) -> Result<f64> {
    if m >= locations.len() {
        return Err(Error::State(format!("UAV {m} is not deployed")));
    }
    Ok(sinr_user_inner(links, locations, m, k, true))
}

/// Interference-free variant used by the bootstrap matching.
pub fn snr_user(links: &Links, locations: &[usize], m: usize, k: usize) -> f64 {
    sinr_user_inner(links, locations, m, k, false)
}

pub(crate) fn sinr_user_inner(
    links: &Links,
    locations: &[usize],
    m: usize,
    k: usize,
    interference: bool,
) -> f64 {
    let signal = links.rx_access_mw[locations[m]][k];
    let mut denom = links.noise_access_mw;
    if interference {
        for (m2, &n2) in locations.iter().enumerate() {
            if m2 != m {
                denom += links.rx_access_mw[n2][k];
            }
        }
    }
    signal / denom
}

/// Backhaul SINR at candidate location `n`.
pub fn sinr_backhaul(links: &Links, n: usize) -> f64 {
    links.rx_backhaul_mw[n] / (links.mbs_interference_mw + links.noise_backhaul_mw)
}

/// Access rate in bit/s for user `k` on UAV `m`. The access band is split
/// evenly among the UAV's associated users, so the load must be >= 1.
pub fn rate_user(
    links: &Links,
    locations: &[usize],
    load: &[u32],
    m: usize,
    k: usize,
) -> Result<f64> {
    let w = load[m];
    if w == 0 {
        return Err(Error::Evaluation(format!(
            "rate requested on UAV {m} with no associated users"
        )));
    }
    let sinr = sinr_user(links, locations, m, k)?;
    Ok(links.access_bandwidth_hz / w as f64 * (1.0 + sinr).log2())
}

/// Backhaul rate in bit/s toward UAV `m`, split the same way.
pub fn rate_backhaul(links: &Links, locations: &[usize], load: &[u32], m: usize) -> Result<f64> {
    let w = load[m];
    if w == 0 {
        return Err(Error::Evaluation(format!(
            "backhaul rate requested on UAV {m} with no associated users"
        )));
    }
    let sinr = sinr_backhaul(links, locations[m]);
    Ok(links.backhaul_bandwidth_hz / w as f64 * (1.0 + sinr).log2())
}
