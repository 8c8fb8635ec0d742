use serde::{Deserialize, Serialize};

use crate::angular::Transition;
use crate::error::{Error, Result};

/// Classical pump drive and medium parameters, all rates in units of Γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Reduced Rabi frequency of the fine-structure transition.
    pub omega_f: f64,
    /// Pump detuning `ω_L - ω_ref` from the reference transition.
    pub detuning: f64,
    /// Reference transition; the scheme's default when absent.
    #[serde(default)]
    pub reference: Option<Transition>,
    /// Ground-state decoherence / transit rate.
    pub gamma0: f64,
    /// Cooperativity of the medium.
    pub cooperativity: f64,
    /// How decay into the unmodeled ground manifold is handled.
    #[serde(default)]
    pub loss_channel: LossChannel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossChannel {
    /// Lost population is re-injected uniformly into the modeled ground sublevels.
    #[default]
    Recycle,
    /// Lost population goes to a dark reservoir that only returns through transit at γ₀.
    Open,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            omega_f: 1.0,
            detuning: 0.0,
            reference: None,
            gamma0: 0.01,
            cooperativity: 1.0,
            loss_channel: LossChannel::Recycle,
        }
    }
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_f, self.detuning, self.gamma0, self.cooperativity]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidDrive("parameters must be finite".into()));
        }
        if self.omega_f < 0.0 {
            return Err(Error::InvalidDrive(format!(
                "Omega_f = {} must be >= 0",
                self.omega_f
            )));
        }
        if self.gamma0 <= 0.0 {
            return Err(Error::InvalidDrive(format!(
                "gamma0 = {} must be > 0 for a unique steady state",
                self.gamma0
            )));
        }
        if self.cooperativity < 0.0 {
            return Err(Error::InvalidDrive(format!(
                "C = {} must be >= 0",
                self.cooperativity
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_parameters() {
        let ok = DriveConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            DriveConfig {
                omega_f: -1.0,
                ..ok.clone()
            },
            DriveConfig {
                gamma0: 0.0,
                ..ok.clone()
            },
            DriveConfig {
                cooperativity: -0.1,
                ..ok.clone()
            },
            DriveConfig {
                detuning: f64::NAN,
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
