//! Three-terminal domain-wall MTJ: current-driven wall motion along the free
//! layer and a position-dependent read conductance.
//!
//! Position `x = 0` is the high-resistance end (`r_high`), `x = L` the
//! low-resistance end. The read path is two MTJ sections in parallel, so the
//! conductance is linear in `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DWParams {
    pub strip_length: f64,
    pub strip_width: f64,
    pub strip_thickness: f64,
    /// Wall width; informational, the wall travels the full strip.
    pub dw_width: f64,
    pub mgo_thickness: f64,
    /// Saturation magnetization (A/m).
    pub m_sat: f64,
    pub r_low: f64,
    pub r_high: f64,
    /// Read bias across the MTJ (the control voltage V).
    pub v_bias: f64,
    /// Wall velocity per unit current, m/(s·A).
    pub mobility: f64,
}

impl DWParams {
    pub fn uncalibrated() -> Self {
        Self {
            strip_length: 100e-9,
            strip_width: 20e-9,
            strip_thickness: 2e-9,
            dw_width: 15e-9,
            mgo_thickness: 1.1e-9,
            m_sat: 6.8e5,
            r_low: 10e3,
            r_high: 20e3,
            v_bias: 0.1,
            mobility: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strip_length > 0.0) {
            return Err(Error::Argument("strip_length must be positive".into()));
        }
        if !(self.r_low > 0.0 && self.r_low < self.r_high) {
            return Err(Error::Argument(format!(
                "need 0 < r_low < r_high, got {} / {}",
                self.r_low, self.r_high
            )));
        }
        if !(self.mobility > 0.0) || !self.mobility.is_finite() {
            return Err(Error::Argument("mobility must be positive".into()));
        }
        if !self.v_bias.is_finite() {
            return Err(Error::Argument("v_bias must be finite".into()));
        }
        Ok(())
    }

    /// Set the mobility so that `current` moves the wall edge to edge in
    /// `traversal_time`.
    pub fn calibrate_mobility(&self, traversal_time: f64, current: f64) -> Result<Self> {
        if !(traversal_time > 0.0) || current == 0.0 || !current.is_finite() {
            return Err(Error::Calibration(format!(
                "cannot calibrate mobility from t = {traversal_time} s, I = {current} A"
            )));
        }
        let mut out = *self;
        out.mobility = self.strip_length / (traversal_time * current.abs());
        out.validate()?;
        Ok(out)
    }

    /// Read current with the device at `r_high` (wall at x = 0).
    pub fn i_high(&self) -> f64 {
        self.v_bias / self.r_high
    }

    /// Read current with the device at `r_low` (wall at x = L).
    pub fn i_low(&self) -> f64 {
        self.v_bias / self.r_low
    }

    /// Current with the wall centred, `(I_H + I_L) / 2`. Evaluated through
    /// the read path so a centred wall cancels it bit for bit.
    pub fn center_current(&self) -> f64 {
        read_dw_current(&DWState::centered(self), self)
    }
}

impl Default for DWParams {
    /// Calibrated to an edge-to-edge move in 2 ns at 35 µA.
    fn default() -> Self {
        Self::uncalibrated()
            .calibrate_mobility(2e-9, 35e-6)
            .expect("default wall calibration is well posed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DWState {
    x: f64,
}

impl DWState {
    pub fn new(x: f64, params: &DWParams) -> Result<Self> {
        if !(0.0..=params.strip_length).contains(&x) {
            return Err(Error::Range(format!(
                "wall position {x} outside [0, {}]",
                params.strip_length
            )));
        }
        Ok(Self { x })
    }

    pub fn centered(params: &DWParams) -> Self {
        Self {
            x: 0.5 * params.strip_length,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

/// Reset phase: the wall returns to the strip centre.
pub fn reset(_state: &DWState, params: &DWParams) -> DWState {
    DWState::centered(params)
}

pub fn drive(state: &DWState, current: f64, dt: f64, params: &DWParams) -> Result<DWState> {
    if !(dt >= 0.0) {
        return Err(Error::Argument(format!("negative duration {dt}")));
    }
    let x = (state.x + params.mobility * current * dt).clamp(0.0, params.strip_length);
    Ok(DWState { x })
}

pub fn conductance(state: &DWState, params: &DWParams) -> f64 {
    let frac = state.x / params.strip_length;
    let g_high = 1.0 / params.r_high;
    g_high + frac * (1.0 / params.r_low - g_high)
}

pub fn read_dw_current(state: &DWState, params: &DWParams) -> f64 {
    params.v_bias * conductance(state, params)
}
