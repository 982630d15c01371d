//! Per-neuron interface module (IM): the domain-wall device clocked through
//! reset / write / read phases, wrapped by ideal current mirrors.
//!
//! One clock period:
//! 1. `Clk1` (reset): wall returns to the strip centre.
//! 2. `Clk2` (write): the mirrored column difference `s_in · (I⁺ − I⁻)`
//!    drives the wall for `t_write`.
//! 3. `Clk3` (read): the MTJ current minus the centre bias `I_0` is scaled by
//!    `g_out` into the activation circuit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spintronic::{self, DWParams, DWState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClockSchedule {
    pub t_reset: f64,
    pub t_write: f64,
    pub t_read: f64,
}

impl Default for ClockSchedule {
    fn default() -> Self {
        Self {
            t_reset: 2e-9,
            t_write: 2e-9,
            t_read: 1e-9,
        }
    }
}

impl ClockSchedule {
    pub fn period(&self) -> f64 {
        self.t_reset + self.t_write + self.t_read
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub period: f64,
    pub warnings: Vec<String>,
}

pub fn validate_schedule(schedule: &ClockSchedule) -> Result<ScheduleReport> {
    for (name, t) in [
        ("t_reset", schedule.t_reset),
        ("t_write", schedule.t_write),
        ("t_read", schedule.t_read),
    ] {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Schedule(format!("{name} must be positive, got {t}")));
        }
    }
    let mut warnings = Vec::new();
    if schedule.t_reset == schedule.t_write && schedule.t_write == schedule.t_read {
        let msg = "all three clock phases have equal duty cycles".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(ScheduleReport {
        period: schedule.period(),
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IMParams {
    /// Input mirror attenuation applied to `I⁺ − I⁻`.
    pub s_in: f64,
    /// Output mirror gain.
    pub g_out: f64,
    /// Output at saturation, in units of the activation half-scale current.
    pub k: f64,
    pub schedule: ClockSchedule,
    pub dw: DWParams,
}

impl Default for IMParams {
    fn default() -> Self {
        Self {
            s_in: 1.0,
            g_out: 1.0,
            k: 4.0,
            schedule: ClockSchedule::default(),
            dw: DWParams::default(),
        }
    }
}

impl IMParams {
    /// Externally supplied bias current `I_0 = (I_H + I_L) / 2`.
    pub fn i_0(&self) -> f64 {
        self.dw.center_current()
    }

    pub fn validate(&self) -> Result<()> {
        validate_schedule(&self.schedule)?;
        self.dw.validate()?;
        if !(self.s_in > 0.0 && self.g_out > 0.0 && self.k > 0.0) {
            return Err(Error::Argument("s_in, g_out and k must be positive".into()));
        }
        Ok(())
    }

    /// Small-signal transconductance from `I⁺ − I⁻` to output current.
    pub fn linear_gain(&self) -> f64 {
        let dw = &self.dw;
        self.g_out
            * self.s_in
            * dw.mobility
            * self.schedule.t_write
            * dw.v_bias
            * (1.0 / dw.r_low - 1.0 / dw.r_high)
            / dw.strip_length
    }

    /// Output magnitude once the wall is pinned at an edge.
    pub fn saturated_output(&self) -> f64 {
        self.g_out * (self.dw.i_low() - self.i_0())
    }

    /// Closed-form IM transfer: linear gain with the edge clamp applied.
    pub fn transfer(&self, delta_i: f64) -> f64 {
        let sat = saturation_current(self);
        self.linear_gain() * delta_i.clamp(-sat, sat)
    }
}

fn check_inputs(i_plus: f64, i_minus: f64) -> Result<()> {
    if !(i_plus >= 0.0) || !(i_minus >= 0.0) {
        return Err(Error::Argument(format!(
            "column currents must be non-negative, got I+ = {i_plus}, I- = {i_minus}"
        )));
    }
    Ok(())
}

/// Simulate one full clock period and return the current delivered to the
/// activation circuit.
pub fn evaluate(i_plus: f64, i_minus: f64, im: &IMParams) -> Result<f64> {
    check_inputs(i_plus, i_minus)?;
    let dw = &im.dw;
    let wall = DWState::centered(dw);
    let wall = spintronic::drive(&wall, im.s_in * (i_plus - i_minus), im.schedule.t_write, dw)?;
    Ok(im.g_out * (spintronic::read_dw_current(&wall, dw) - im.i_0()))
}

/// Smallest `|I⁺ − I⁻|` that drives the wall from the centre to an edge.
pub fn saturation_current(im: &IMParams) -> f64 {
    let dw = &im.dw;
    0.5 * dw.strip_length / (dw.mobility * im.schedule.t_write) / im.s_in
}

/// Fit the mirrors so that `max_delta_current` just saturates the wall and the
/// saturated output equals `k · activation_halfscale`.
pub fn calibrate(
    max_delta_current: f64,
    activation_halfscale: f64,
    im: &IMParams,
) -> Result<IMParams> {
    if !(max_delta_current > 0.0) || !max_delta_current.is_finite() {
        return Err(Error::Argument(format!(
            "max_delta_current must be positive, got {max_delta_current}"
        )));
    }
    if !(activation_halfscale > 0.0) || !activation_halfscale.is_finite() {
        return Err(Error::Argument(format!(
            "activation_halfscale must be positive, got {activation_halfscale}"
        )));
    }
    let mut out = *im;
    out.s_in = 1.0;
    out.s_in = saturation_current(&out) / max_delta_current;
    out.g_out = 1.0;
    out.g_out = im.k * activation_halfscale / out.saturated_output();
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Reset,
    Write,
    Read,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Reset => "reset",
            Phase::Write => "write",
            Phase::Read => "read",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub phase: Phase,
    pub position: f64,
    pub dw_current: f64,
    /// Current into the activation circuit; only driven while `Clk3` is high.
    pub output: f64,
}

/// Step through one clock period at resolution `dt`, recording the wall
/// position, MTJ current and IM output after each step.
pub fn trace_cycle(i_plus: f64, i_minus: f64, im: &IMParams, dt: f64) -> Result<Vec<TraceRow>> {
    check_inputs(i_plus, i_minus)?;
    if !(dt > 0.0) {
        return Err(Error::Argument(format!(
            "trace step must be positive, got {dt}"
        )));
    }
    validate_schedule(&im.schedule)?;
    let dw = &im.dw;
    let drive_current = im.s_in * (i_plus - i_minus);
    let mut rows = Vec::new();
    let mut wall = DWState::centered(dw);
    let mut t = 0.0;
    let phases = [
        (Phase::Reset, im.schedule.t_reset),
        (Phase::Write, im.schedule.t_write),
        (Phase::Read, im.schedule.t_read),
    ];
    for (phase, duration) in phases {
        let steps = (duration / dt).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        for _ in 0..steps {
            match phase {
                Phase::Reset => wall = spintronic::reset(&wall, dw),
                Phase::Write => wall = spintronic::drive(&wall, drive_current, h, dw)?,
                Phase::Read => {}
            }
            t += h;
            let dw_current = spintronic::read_dw_current(&wall, dw);
            let output = match phase {
                Phase::Read => im.g_out * (dw_current - im.i_0()),
                _ => 0.0,
            };
            rows.push(TraceRow {
                time: t,
                phase,
                position: wall.x(),
                dw_current,
                output,
            });
        }
    }
    Ok(rows)
}
