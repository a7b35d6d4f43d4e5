use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Spatial correlation of the RIS→user channel across elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// A few specular paths shared by every element.
    Deterministic,
    /// Deterministic paths plus an i.i.d. scattering component.
    DeterministicPlusIid,
    /// i.i.d. complex Gaussian gains per element.
    Iid,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::Deterministic => "det",
            Regime::DeterministicPlusIid => "det-iid",
            Regime::Iid => "iid",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" | "deterministic" => Ok(Regime::Deterministic),
            "det-iid" | "deterministic_plus_iid" => Ok(Regime::DeterministicPlusIid),
            "iid" => Ok(Regime::Iid),
            other => Err(Error::config(format!("unknown regime {other:?}"))),
        }
    }
}

/// Physical layout and powers of one deployment.
///
/// All powers are linear and normalized: deterministic RIS→user rows carry
/// unit average power per element and the noise power defaults to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Base-station antennas (uniform linear array).
    pub bs_antennas: usize,
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub users: usize,
    /// Transmit power budget `E_Tr`.
    pub tx_power: f64,
    /// Receiver noise power `σ²`.
    pub noise_power: f64,
    pub regime: Regime,
    /// Power of the i.i.d. part relative to the deterministic part in the
    /// mixed regime.
    pub mix_power_ratio: f64,
    /// Power of the strongest BS→RIS path per (element, antenna) pair.
    pub ris_link_gain: f64,
    /// Seed of the scenario geometry (the fixed BS→RIS channel).
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            bs_antennas: 8,
            ris_rows: 36,
            ris_cols: 36,
            users: 4,
            tx_power: 100.0,
            noise_power: 1.0,
            regime: Regime::Deterministic,
            mix_power_ratio: 0.25,
            ris_link_gain: DEFAULT_RIS_LINK_GAIN,
            rng_seed: 0,
        }
    }
}

/// Default BS→RIS path power.
pub const DEFAULT_RIS_LINK_GAIN: f64 = 1e-5;

impl ScenarioConfig {
    pub fn ris_elements(&self) -> usize {
        self.ris_rows * self.ris_cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.bs_antennas == 0 || self.ris_rows == 0 || self.ris_cols == 0 || self.users == 0 {
            return Err(Error::config("antenna, element and user counts must be at least 1"));
        }
        if !(self.tx_power > 0.0) || !(self.noise_power > 0.0) {
            return Err(Error::config("tx_power and noise_power must be positive"));
        }
        if !(self.mix_power_ratio >= 0.0) || !(self.ris_link_gain > 0.0) {
            return Err(Error::config(
                "mix_power_ratio must be non-negative and ris_link_gain positive",
            ));
        }
        if self.ris_elements() < self.bs_antennas {
            return Err(Error::config(
                "need at least as many RIS elements as BS antennas for the pseudo-inverse",
            ));
        }
        Ok(())
    }

    /// Additional requirement of the anchor-expanding network.
    pub fn validate_partial(&self) -> Result<()> {
        self.validate()?;
        if self.ris_rows % 9 != 0 || self.ris_cols % 9 != 0 {
            return Err(Error::config(format!(
                "partial CSI needs grid dims divisible by 9, got {}x{}",
                self.ris_rows, self.ris_cols
            )));
        }
        Ok(())
    }
}
