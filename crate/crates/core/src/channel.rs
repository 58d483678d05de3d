//! Scenario generation: ULA steering vectors, Rician channels and pathloss.
//!
//! Every user draws from its own ChaCha stream keyed by
//! `(master_seed, trial, class, index)`, so a trial is reproducible on its own
//! and independent of how trials are scheduled.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, C64};

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// A value given either once for every user or per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerUser {
    All(f64),
    Each(Vec<f64>),
}

impl PerUser {
    pub fn get(&self, index: usize) -> f64 {
        match self {
            PerUser::All(v) => *v,
            PerUser::Each(vs) => vs[index],
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            PerUser::All(v) => vec![*v],
            PerUser::Each(vs) => vs.clone(),
        }
    }

    fn check_len(&self, n: usize, name: &str) -> Result<()> {
        match self {
            PerUser::Each(vs) if vs.len() != n => Err(Error::Config(format!(
                "{name} lists {} values for {n} users",
                vs.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Variance of each NLoS entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlosNormalization {
    /// `1/M` per entry, so the scattered part has the same mean energy as the
    /// unit-norm LoS part.
    #[default]
    PerAntenna,
    /// Unit variance per entry.
    UnitEntry,
}

/// Missing JSON fields take their default values; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "M")]
    pub num_antennas: usize,
    #[serde(rename = "K_I")]
    pub num_iu: usize,
    #[serde(rename = "K_E")]
    pub num_eu: usize,
    /// Transmit power budget in watts.
    #[serde(rename = "P_max")]
    pub p_max: f64,
    /// Rate targets in bits/s/Hz.
    #[serde(rename = "T_i")]
    pub rate_targets: PerUser,
    /// Receiver noise power in watts.
    pub noise_power: f64,
    #[serde(rename = "kappa_I")]
    pub kappa_iu: PerUser,
    #[serde(rename = "kappa_E")]
    pub kappa_eu: PerUser,
    #[serde(rename = "dist_I")]
    pub dist_iu: f64,
    #[serde(rename = "dist_E")]
    pub dist_eu: f64,
    #[serde(rename = "alpha_I")]
    pub alpha_iu: f64,
    #[serde(rename = "alpha_E")]
    pub alpha_eu: f64,
    pub ref_loss_db: f64,
    /// Fixed angles of departure; drawn per trial when absent.
    #[serde(rename = "aod_I", default, skip_serializing_if = "Option::is_none")]
    pub aod_iu: Option<Vec<f64>>,
    #[serde(rename = "aod_E", default, skip_serializing_if = "Option::is_none")]
    pub aod_eu: Option<Vec<f64>>,
    pub mc_trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub nlos_normalization: NlosNormalization,
    /// Interpret Rician factors in dB instead of linear units.
    #[serde(default)]
    pub kappa_in_db: bool,
    /// Interval for randomly drawn angles of departure, radians.
    #[serde(default = "default_aod_range")]
    pub aod_range: [f64; 2],
}

fn default_aod_range() -> [f64; 2] {
    [-FRAC_PI_2, FRAC_PI_2]
}

impl Default for SystemConfig {
    /// Two IUs at 50 m, two EUs at 5 m, four antennas, 8 bits/s/Hz targets,
    /// 1 W budget, −84 dBm noise and Rician factor 5.
    fn default() -> Self {
        Self {
            num_antennas: 4,
            num_iu: 2,
            num_eu: 2,
            p_max: 1.0,
            rate_targets: PerUser::All(8.0),
            noise_power: dbm_to_watts(-84.0),
            kappa_iu: PerUser::All(5.0),
            kappa_eu: PerUser::All(5.0),
            dist_iu: 50.0,
            dist_eu: 5.0,
            alpha_iu: 3.2,
            alpha_eu: 2.2,
            ref_loss_db: 30.0,
            aod_iu: None,
            aod_eu: None,
            mc_trials: 500,
            master_seed: 2024,
            nlos_normalization: NlosNormalization::PerAntenna,
            kappa_in_db: false,
            aod_range: default_aod_range(),
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let m = self.num_antennas;
        if self.num_iu < 1 {
            return Err(Error::Config("at least one IU is required".into()));
        }
        if self.num_eu < 1 {
            return Err(Error::Config("at least one EU is required".into()));
        }
        if m < self.num_iu {
            return Err(Error::Config(format!(
                "M = {m} antennas cannot null {} IUs (need M >= K_I)",
                self.num_iu
            )));
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return Err(Error::Config("P_max must be positive".into()));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::Config("noise_power must be positive".into()));
        }
        self.rate_targets.check_len(self.num_iu, "T_i")?;
        self.kappa_iu.check_len(self.num_iu, "kappa_I")?;
        self.kappa_eu.check_len(self.num_eu, "kappa_E")?;
        if self.rate_targets.values().iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Config("rate targets must be positive".into()));
        }
        if !self.kappa_in_db
            && self
                .kappa_iu
                .values()
                .iter()
                .chain(&self.kappa_eu.values())
                .any(|&k| k.is_nan() || k < 0.0)
        {
            return Err(Error::Config("Rician factors must be nonnegative".into()));
        }
        for (d, name) in [(self.dist_iu, "dist_I"), (self.dist_eu, "dist_E")] {
            if !(d >= 1.0 && d.is_finite()) {
                return Err(Error::Config(format!("{name} must be at least 1 m")));
            }
        }
        for (a, name) in [(self.alpha_iu, "alpha_I"), (self.alpha_eu, "alpha_E")] {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if let Some(a) = &self.aod_iu {
            if a.len() != self.num_iu {
                return Err(Error::Config("aod_I must list one angle per IU".into()));
            }
        }
        if let Some(a) = &self.aod_eu {
            if a.len() != self.num_eu {
                return Err(Error::Config("aod_E must list one angle per EU".into()));
            }
        }
        if self.aod_range.iter().any(|a| a.is_nan()) || self.aod_range[0] > self.aod_range[1] {
            return Err(Error::Config("aod_range must be ordered".into()));
        }
        Ok(())
    }

    pub fn rate_target(&self, iu: usize) -> f64 {
        self.rate_targets.get(iu)
    }

    fn linear_kappa(&self, raw: f64) -> f64 {
        if self.kappa_in_db {
            10f64.powf(raw / 10.0)
        } else {
            raw
        }
    }

    fn nlos_variance(&self) -> f64 {
        match self.nlos_normalization {
            NlosNormalization::PerAntenna => 1.0 / self.num_antennas as f64,
            NlosNormalization::UnitEntry => 1.0,
        }
    }
}

/// One channel realization for every IU and EU.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h_iu: Vec<ComplexVector>,
    pub h_eu: Vec<ComplexVector>,
    /// Linear pathloss gains.
    pub rho_iu: Vec<f64>,
    pub rho_eu: Vec<f64>,
    pub aod_iu: Vec<f64>,
    pub aod_eu: Vec<f64>,
    pub seed: u64,
}

impl ChannelSet {
    pub fn num_antennas(&self) -> usize {
        self.h_iu[0].len()
    }

    pub fn num_iu(&self) -> usize {
        self.h_iu.len()
    }

    pub fn num_eu(&self) -> usize {
        self.h_eu.len()
    }
}

/// ULA steering vector with half-wavelength spacing:
/// entry `m` is `exp(i m π sin θ) / √M` for `m = 0..M`.
pub fn steering_vector(m: usize, theta: f64) -> ComplexVector {
    let phase = PI * theta.sin();
    let amp = 1.0 / (m as f64).sqrt();
    ComplexVector::from_fn(m, |k, _| C64::from_polar(amp, k as f64 * phase))
}

/// Rician draw with `1/M` per-entry NLoS variance.
pub fn sample_rician<R: Rng + ?Sized>(h_bar: &ComplexVector, kappa: f64, rng: &mut R) -> Result<ComplexVector> {
    sample_rician_with(h_bar, kappa, 1.0 / h_bar.len() as f64, rng)
}

/// `√(κ/(1+κ)) h̄ + √(1/(1+κ)) ĥ` with `ĥ` i.i.d. circularly-symmetric complex
/// Gaussian of the given per-entry variance. An infinite κ returns `h̄`.
pub fn sample_rician_with<R: Rng + ?Sized>(
    h_bar: &ComplexVector,
    kappa: f64,
    nlos_variance: f64,
    rng: &mut R,
) -> Result<ComplexVector> {
    if kappa.is_nan() || kappa < 0.0 {
        return Err(Error::InvalidInput(format!("Rician factor must be nonnegative, got {kappa}")));
    }
    let (los, nlos) = if kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        ((kappa / (1.0 + kappa)).sqrt(), (1.0 / (1.0 + kappa)).sqrt())
    };
    let sd = (nlos_variance / 2.0).sqrt();
    Ok(ComplexVector::from_fn(h_bar.len(), |k, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        h_bar[k] * los + C64::new(re, im) * (sd * nlos)
    }))
}

/// Linear gain `10^(−ref_loss_db/10) · dist^(−alpha)`; valid for `dist ≥ 1` m.
pub fn pathloss(dist: f64, alpha: f64, ref_loss_db: f64) -> Result<f64> {
    if dist.is_nan() || dist < 1.0 {
        return Err(Error::InvalidInput(format!(
            "pathloss model needs dist >= 1 m, got {dist}"
        )));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidInput(format!("pathloss exponent must be positive, got {alpha}")));
    }
    Ok(10f64.powf(-ref_loss_db / 10.0) * dist.powf(-alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UserClass {
    Information = 1,
    Energy = 2,
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under `master_seed`.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    mix64(mix64(master_seed) ^ trial)
}

fn user_rng(trial_seed: u64, class: UserClass, index: usize) -> ChaCha8Rng {
    let key = mix64(mix64(trial_seed ^ class as u64) ^ index as u64);
    ChaCha8Rng::seed_from_u64(key)
}

/// Draws the channels of trial `trial_index`.
///
/// Each user's stream first yields its angle of departure (drawn even when
/// the angle is fixed, so fixed and random angles see the same NLoS draws)
/// and then its NLoS entries.
pub fn generate_scenario(config: &SystemConfig, trial_index: u64) -> Result<ChannelSet> {
    config.validate()?;
    let m = config.num_antennas;
    let seed = trial_seed(config.master_seed, trial_index);
    let variance = config.nlos_variance();
    let [lo, hi] = config.aod_range;

    let draw = |class: UserClass, count: usize, fixed: Option<&Vec<f64>>, kappa: &PerUser| {
        let mut hs = Vec::with_capacity(count);
        let mut angles = Vec::with_capacity(count);
        for idx in 0..count {
            let mut rng = user_rng(seed, class, idx);
            let u: f64 = rng.random();
            let theta = fixed.map_or(lo + (hi - lo) * u, |a| a[idx]);
            let h_bar = steering_vector(m, theta);
            hs.push(sample_rician_with(&h_bar, config.linear_kappa(kappa.get(idx)), variance, &mut rng)?);
            angles.push(theta);
        }
        Ok::<_, Error>((hs, angles))
    };

    let (h_iu, aod_iu) = draw(UserClass::Information, config.num_iu, config.aod_iu.as_ref(), &config.kappa_iu)?;
    let (h_eu, aod_eu) = draw(UserClass::Energy, config.num_eu, config.aod_eu.as_ref(), &config.kappa_eu)?;
    let rho_i = pathloss(config.dist_iu, config.alpha_iu, config.ref_loss_db)?;
    let rho_e = pathloss(config.dist_eu, config.alpha_eu, config.ref_loss_db)?;

    Ok(ChannelSet {
        h_iu,
        h_eu,
        rho_iu: vec![rho_i; config.num_iu],
        rho_eu: vec![rho_e; config.num_eu],
        aod_iu,
        aod_eu,
        seed,
    })
}
