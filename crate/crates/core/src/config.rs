//! TOML device/network configuration.
//!
//! Every section and key is optional; missing values take the library
//! defaults. Example:
//!
//! ```toml
//! [memristor]
//! r_on = 5e3
//! r_off = 5e6
//!
//! [calibration]
//! switching_time = 100e-9
//!
//! [clock]
//! t_reset = 2e-9
//! t_write = 2e-9
//! t_read = 1e-9
//!
//! [network]
//! v_read = 0.5
//! activation = "sigmoid"
//! programming = "ideal"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crossbar::Fidelity;
use crate::error::{Error, Result};
use crate::interface::{validate_schedule, ClockSchedule, IMParams};
use crate::memristor::{calibrate_switching, MemristorParams, WriteController};
use crate::network::{ActivationKind, GainScaling, HardwareSettings};
use crate::power::ComponentPowerTable;
use crate::spintronic::DWParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterfaceSection {
    pub s_in: f64,
    pub g_out: f64,
    pub k: f64,
}

impl Default for InterfaceSection {
    fn default() -> Self {
        let im = IMParams::default();
        Self {
            s_in: im.s_in,
            g_out: im.g_out,
            k: im.k,
        }
    }
}

/// When enabled, `k_on`/`k_off` and the wall mobility are solved from the
/// target switching figures instead of being taken literally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub enabled: bool,
    pub switching_time: f64,
    pub switching_voltage: f64,
    pub dw_traversal_time: f64,
    pub dw_traversal_current: f64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            enabled: true,
            switching_time: 100e-9,
            switching_voltage: 1.0,
            dw_traversal_time: 2e-9,
            dw_traversal_current: 35e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgrammingKind {
    #[default]
    Ideal,
    Device,
}

impl std::str::FromStr for ProgrammingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "device" => Ok(Self::Device),
            other => Err(Error::Argument(format!(
                "unknown programming mode `{other}` (expected ideal or device)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub v_read: f64,
    pub i_half: f64,
    pub bias: bool,
    pub scaling: GainScaling,
    pub activation: ActivationKind,
    pub programming: ProgrammingKind,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let hw = HardwareSettings::default();
        Self {
            v_read: hw.v_read,
            i_half: hw.i_half,
            bias: hw.bias,
            scaling: hw.scaling,
            activation: hw.activation,
            programming: ProgrammingKind::Ideal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub memristor: MemristorParams,
    pub write_controller: WriteController,
    pub domain_wall: DWParams,
    pub interface: InterfaceSection,
    pub clock: ClockSchedule,
    pub calibration: CalibrationSection,
    pub network: NetworkSection,
    /// Per-component power in watts.
    pub power: ComponentPowerTable,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            memristor: MemristorParams::uncalibrated(),
            write_controller: WriteController::default(),
            domain_wall: DWParams::uncalibrated(),
            interface: InterfaceSection::default(),
            clock: ClockSchedule::default(),
            calibration: CalibrationSection::default(),
            network: NetworkSection::default(),
            power: ComponentPowerTable::default(),
        }
    }
}

impl DeviceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: DeviceConfig =
            toml::from_str(text).map_err(|e| Error::parse("config", e.to_string()))?;
        // Surface bad values at load time rather than on first use.
        cfg.hardware_settings()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::parse("config", e.to_string()))
    }

    pub fn memristor_params(&self) -> Result<MemristorParams> {
        self.memristor.validate()?;
        if !self.calibration.enabled {
            return Ok(self.memristor);
        }
        calibrate_switching(
            &self.memristor,
            self.calibration.switching_time,
            self.calibration.switching_voltage,
        )
    }

    pub fn dw_params(&self) -> Result<DWParams> {
        if !self.calibration.enabled {
            self.domain_wall.validate()?;
            return Ok(self.domain_wall);
        }
        self.domain_wall.calibrate_mobility(
            self.calibration.dw_traversal_time,
            self.calibration.dw_traversal_current,
        )
    }

    pub fn im_params(&self) -> Result<IMParams> {
        validate_schedule(&self.clock)?;
        let im = IMParams {
            s_in: self.interface.s_in,
            g_out: self.interface.g_out,
            k: self.interface.k,
            schedule: self.clock,
            dw: self.dw_params()?,
        };
        im.validate()?;
        Ok(im)
    }

    pub fn fidelity(&self) -> Fidelity {
        match self.network.programming {
            ProgrammingKind::Ideal => Fidelity::Ideal,
            ProgrammingKind::Device => Fidelity::Device(self.write_controller),
        }
    }

    pub fn hardware_settings(&self) -> Result<HardwareSettings> {
        let memristor = self.memristor_params()?;
        self.write_controller.validate(&memristor)?;
        let net = &self.network;
        if !(net.i_half > 0.0) {
            return Err(Error::Argument(format!(
                "i_half must be positive, got {}",
                net.i_half
            )));
        }
        if !(net.v_read > 0.0) || net.v_read >= memristor.read_limit() {
            return Err(Error::ReadDisturb {
                v_read: net.v_read,
                threshold: memristor.read_limit(),
            });
        }
        Ok(HardwareSettings {
            memristor,
            im: self.im_params()?,
            v_read: net.v_read,
            i_half: net.i_half,
            activation: net.activation,
            scaling: net.scaling,
            fidelity: self.fidelity(),
            bias: net.bias,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_matches_library_defaults() {
        let cfg = DeviceConfig::from_toml("").unwrap();
        let hw = cfg.hardware_settings().unwrap();
        let defaults = HardwareSettings::default();
        assert_eq!(hw.memristor, defaults.memristor);
        assert_eq!(hw.im, defaults.im);
        assert_eq!(hw.v_read, defaults.v_read);
        assert_eq!(hw.fidelity, Fidelity::Ideal);
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = DeviceConfig::from_toml(
            r#"
            [memristor]
            r_off = 1e6
            [clock]
            t_write = 3e-9
            [network]
            activation = "step"
            programming = "device"
            scaling = "fixed"
            "#,
        )
        .unwrap();
        let hw = cfg.hardware_settings().unwrap();
        assert_eq!(hw.memristor.r_off, 1e6);
        assert_eq!(hw.im.schedule.t_write, 3e-9);
        assert_eq!(hw.activation, ActivationKind::Step);
        assert_eq!(hw.scaling, GainScaling::Fixed);
        assert!(matches!(hw.fidelity, Fidelity::Device(_)));
    }

    #[test]
    fn calibration_can_be_disabled() {
        let cfg = DeviceConfig::from_toml(
            "[calibration]\nenabled = false\n[memristor]\nk_off = 2.0\nk_on = -3.0\n",
        )
        .unwrap();
        let p = cfg.memristor_params().unwrap();
        assert_eq!((p.k_on, p.k_off), (-3.0, 2.0));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = DeviceConfig::default();
        let back = DeviceConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            DeviceConfig::from_toml("[memristor]\nbogus = 1\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            DeviceConfig::from_toml("[network]\nv_read = 0.9\n"),
            Err(Error::ReadDisturb { .. })
        ));
        assert!(matches!(
            DeviceConfig::from_toml("[clock]\nt_write = 0.0\n"),
            Err(Error::Schedule(_))
        ));
        assert!(DeviceConfig::from_toml("[memristor]\nr_on = 1e7\n").is_err());
    }
}
