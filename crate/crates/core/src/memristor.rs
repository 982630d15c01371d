//! Voltage-controlled (VTEAM) memristor with a rectangular window, ohmic
//! read-out and a closed-loop multi-level-cell write controller.
//!
//! The internal state `w` lives in `[w_on, w_off]`; `w_on` is the fully
//! conducting end (`r_on`) and `w_off` the insulating end (`r_off`). Positive
//! voltages above `v_off` push the state toward `w_off`, negative voltages
//! below `v_on` push it toward `w_on`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of non-zero conductance levels of the multi-level cell.
pub const LEVELS: u8 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemristorParams {
    pub r_on: f64,
    pub r_off: f64,
    /// Negative switching threshold (V).
    pub v_on: f64,
    /// Positive switching threshold (V).
    pub v_off: f64,
    /// State velocity coefficient below `v_on` (m/s, negative).
    pub k_on: f64,
    /// State velocity coefficient above `v_off` (m/s, positive).
    pub k_off: f64,
    pub alpha_on: f64,
    pub alpha_off: f64,
    pub w_on: f64,
    pub w_off: f64,
    pub length: f64,
    /// Largest explicit integration step (s).
    pub max_step: f64,
}

impl MemristorParams {
    /// Uncalibrated TiO2-like defaults: 5 nm device between 5 kΩ and 5 MΩ.
    pub fn uncalibrated() -> Self {
        Self {
            r_on: 5e3,
            r_off: 5e6,
            v_on: -0.7,
            v_off: 0.7,
            k_on: -1.0,
            k_off: 1.0,
            alpha_on: 3.0,
            alpha_off: 3.0,
            w_on: 0.0,
            w_off: 5e-9,
            length: 5e-9,
            max_step: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.r_on,
            self.r_off,
            self.v_on,
            self.v_off,
            self.k_on,
            self.k_off,
            self.alpha_on,
            self.alpha_off,
            self.w_on,
            self.w_off,
            self.length,
            self.max_step,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Argument(
                "memristor parameters must be finite".into(),
            ));
        }
        if !(self.r_on > 0.0 && self.r_on < self.r_off) {
            return Err(Error::Argument(format!(
                "need 0 < r_on < r_off, got r_on = {}, r_off = {}",
                self.r_on, self.r_off
            )));
        }
        if self.w_on >= self.w_off {
            return Err(Error::Argument("need w_on < w_off".into()));
        }
        if !(self.v_on < 0.0 && self.v_off > 0.0) {
            return Err(Error::Argument("need v_on < 0 < v_off".into()));
        }
        if self.k_on > 0.0 || self.k_off < 0.0 {
            return Err(Error::Argument("need k_on <= 0 <= k_off".into()));
        }
        if self.alpha_on <= 0.0 || self.alpha_off <= 0.0 || self.length <= 0.0 {
            return Err(Error::Argument(
                "alpha_on, alpha_off and length must be positive".into(),
            ));
        }
        if self.max_step <= 0.0 {
            return Err(Error::Argument("max_step must be positive".into()));
        }
        Ok(())
    }

    pub fn g_on(&self) -> f64 {
        1.0 / self.r_on
    }

    pub fn g_off(&self) -> f64 {
        1.0 / self.r_off
    }

    /// Largest read voltage magnitude that leaves the state untouched.
    pub fn read_limit(&self) -> f64 {
        self.v_off.min(-self.v_on)
    }

    /// State velocity dw/dt (m/s) under a constant applied voltage.
    pub fn velocity(&self, v: f64) -> f64 {
        if v > self.v_off {
            self.k_off * (v / self.v_off - 1.0).powf(self.alpha_off)
        } else if v < self.v_on {
            self.k_on * (v / self.v_on - 1.0).powf(self.alpha_on)
        } else {
            0.0
        }
    }

    /// Closed-form time to cross the whole state range at constant `v`, or
    /// `None` inside the dead zone.
    pub fn traversal_time(&self, v: f64) -> Option<f64> {
        let speed = self.velocity(v).abs();
        (speed > 0.0).then(|| (self.w_off - self.w_on) / speed)
    }

    /// Target conductance of MLC level `magnitude` (0 = off-state, 31 = on).
    /// Levels are equally spaced in conductance.
    pub fn level_conductance(&self, magnitude: u8) -> Result<f64> {
        if magnitude > LEVELS {
            return Err(Error::Argument(format!(
                "level {magnitude} outside 0..={LEVELS}"
            )));
        }
        let (g_off, g_on) = (self.g_off(), self.g_on());
        Ok(g_off + f64::from(magnitude) / f64::from(LEVELS) * (g_on - g_off))
    }

    pub fn level_spacing(&self) -> f64 {
        (self.g_on() - self.g_off()) / f64::from(LEVELS)
    }

    /// Nearest MLC level to a measured conductance, saturating at the rails.
    pub fn nearest_level(&self, g: f64) -> u8 {
        let level = ((g - self.g_off()) / self.level_spacing()).round();
        level.clamp(0.0, f64::from(LEVELS)) as u8
    }
}

impl Default for MemristorParams {
    /// Defaults calibrated to a 100 ns full switch at ±1 V.
    fn default() -> Self {
        calibrate_switching(&Self::uncalibrated(), 100e-9, 1.0)
            .expect("default memristor calibration is well posed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorState {
    w: f64,
}

impl MemristorState {
    pub fn new(w: f64, params: &MemristorParams) -> Result<Self> {
        if !(params.w_on..=params.w_off).contains(&w) {
            return Err(Error::Range(format!(
                "state {w} outside [{}, {}]",
                params.w_on, params.w_off
            )));
        }
        Ok(Self { w })
    }

    /// Fully conducting state (`r_on`).
    pub fn on(params: &MemristorParams) -> Self {
        Self { w: params.w_on }
    }

    /// Off-state (`r_off`).
    pub fn off(params: &MemristorParams) -> Self {
        Self { w: params.w_off }
    }

    pub fn w(&self) -> f64 {
        self.w
    }
}

pub fn memristance(state: &MemristorState, params: &MemristorParams) -> f64 {
    let frac = (state.w - params.w_on) / (params.w_off - params.w_on);
    params.r_on + frac * (params.r_off - params.r_on)
}

pub fn conductance(state: &MemristorState, params: &MemristorParams) -> f64 {
    1.0 / memristance(state, params)
}

/// Apply voltage `v` for `dt` seconds using fixed-step explicit Euler with a
/// hard clamp at the state bounds.
pub fn step_state(
    state: &MemristorState,
    v: f64,
    dt: f64,
    params: &MemristorParams,
) -> Result<MemristorState> {
    if !(dt >= 0.0) {
        return Err(Error::Argument(format!("negative duration {dt}")));
    }
    let rate = params.velocity(v);
    if dt == 0.0 || rate == 0.0 {
        return Ok(*state);
    }
    let steps = (dt / params.max_step).ceil().max(1.0) as u64;
    let h = dt / steps as f64;
    let mut w = state.w;
    for _ in 0..steps {
        w = (w + h * params.velocity(v)).clamp(params.w_on, params.w_off);
    }
    Ok(MemristorState { w })
}

/// Solve for `k_on`/`k_off` such that a constant `±v_prog` sweeps the full
/// state range in `t_switch`.
pub fn calibrate_switching(
    params: &MemristorParams,
    t_switch: f64,
    v_prog: f64,
) -> Result<MemristorParams> {
    if !(t_switch > 0.0) {
        return Err(Error::Calibration(format!(
            "switching time must be positive, got {t_switch}"
        )));
    }
    let v = v_prog.abs();
    if v <= params.v_off || -v >= params.v_on {
        return Err(Error::Calibration(format!(
            "programming voltage ±{v} V lies inside the dead zone [{}, {}] V",
            params.v_on, params.v_off
        )));
    }
    let span = params.w_off - params.w_on;
    let mut out = *params;
    out.k_off = span / (t_switch * (v / params.v_off - 1.0).powf(params.alpha_off));
    out.k_on = -span / (t_switch * (-v / params.v_on - 1.0).powf(params.alpha_on));
    out.validate()?;
    Ok(out)
}

/// Ohmic read at a non-disturbing voltage.
pub fn read_current(state: &MemristorState, v_read: f64, params: &MemristorParams) -> Result<f64> {
    let limit = params.read_limit();
    if v_read.abs() >= limit {
        return Err(Error::ReadDisturb {
            v_read,
            threshold: limit,
        });
    }
    Ok(v_read / memristance(state, params))
}

/// Program-and-verify write controller settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WriteController {
    /// Initial pulse amplitude magnitude (V).
    pub pulse_voltage: f64,
    pub pulse_width: f64,
    pub verify_voltage: f64,
    /// Acceptance window, as a fraction of one level spacing.
    pub tolerance: f64,
    pub max_pulses: usize,
}

impl Default for WriteController {
    fn default() -> Self {
        Self {
            pulse_voltage: 1.0,
            pulse_width: 2e-9,
            verify_voltage: 0.2,
            tolerance: 0.5,
            max_pulses: 100,
        }
    }
}

impl WriteController {
    pub fn validate(&self, params: &MemristorParams) -> Result<()> {
        if self.verify_voltage == 0.0 || self.verify_voltage.abs() >= params.read_limit() {
            return Err(Error::Argument(format!(
                "verify voltage {} V must be non-zero and below the {} V read limit",
                self.verify_voltage,
                params.read_limit()
            )));
        }
        if self.pulse_voltage <= params.v_off || -self.pulse_voltage >= params.v_on {
            return Err(Error::Argument(format!(
                "pulse voltage {} V does not exceed the switching thresholds",
                self.pulse_voltage
            )));
        }
        if !(self.pulse_width > 0.0) || !(self.tolerance > 0.0) || self.max_pulses == 0 {
            return Err(Error::Argument(
                "pulse_width and tolerance must be positive and max_pulses >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Closed-loop program-and-verify toward MLC level `target_level`.
///
/// Each iteration reads the cell, stops if the measured conductance is within
/// the tolerance window, otherwise fires one pulse toward the target. Every
/// change of pulse polarity halves the over-threshold drive, so the step size
/// shrinks geometrically around the target.
pub fn program_to_level(
    state: &MemristorState,
    target_level: u8,
    ctrl: &WriteController,
    params: &MemristorParams,
) -> Result<(MemristorState, usize)> {
    let target = params.level_conductance(target_level)?;
    ctrl.validate(params)?;
    let window = ctrl.tolerance * params.level_spacing();

    let mut cell = *state;
    let mut pulses = 0;
    let mut overdrive = 1.0_f64;
    let mut last_polarity: Option<bool> = None;
    loop {
        let g = read_current(&cell, ctrl.verify_voltage, params)? / ctrl.verify_voltage;
        let error = g - target;
        if error.abs() < window {
            return Ok((cell, pulses));
        }
        if pulses >= ctrl.max_pulses {
            return Err(Error::Programming {
                level: target_level,
                pulses,
            });
        }
        // Too conductive -> positive (RESET-direction) pulse.
        let positive = error > 0.0;
        if last_polarity.is_some_and(|p| p != positive) {
            overdrive *= 0.5;
        }
        last_polarity = Some(positive);
        let amplitude = if positive {
            params.v_off + overdrive * (ctrl.pulse_voltage - params.v_off)
        } else {
            -(-params.v_on + overdrive * (ctrl.pulse_voltage + params.v_on))
        };
        cell = step_state(&cell, amplitude, ctrl.pulse_width, params)?;
        pulses += 1;
    }
}
