//! Dual-column crossbar layer: each signed weight occupies a (M⁺, M⁻) cell
//! pair in adjacent columns; the sign picks which cell is programmed and the
//! partner stays in the off-state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memristor::{self, MemristorParams, MemristorState, WriteController, LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

/// Sign-magnitude weight level. Magnitude 0 is always stored as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightLevel {
    sign: Sign,
    magnitude: u8,
}

impl WeightLevel {
    pub const ZERO: WeightLevel = WeightLevel {
        sign: Sign::Positive,
        magnitude: 0,
    };

    pub fn new(sign: Sign, magnitude: u8) -> Result<Self> {
        if magnitude > LEVELS {
            return Err(Error::Argument(format!(
                "weight magnitude {magnitude} outside 0..={LEVELS}"
            )));
        }
        let sign = if magnitude == 0 { Sign::Positive } else { sign };
        Ok(Self { sign, magnitude })
    }

    /// From a signed level in `-31..=31`.
    pub fn from_signed(level: i8) -> Result<Self> {
        let sign = if level < 0 {
            Sign::Negative
        } else {
            Sign::Positive
        };
        Self::new(sign, level.unsigned_abs())
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn magnitude(&self) -> u8 {
        self.magnitude
    }

    pub fn signed(&self) -> i8 {
        match self.sign {
            Sign::Positive => self.magnitude as i8,
            Sign::Negative => -(self.magnitude as i8),
        }
    }

    pub fn dequantize(&self, w_max: f64) -> f64 {
        f64::from(self.signed()) / f64::from(LEVELS) * w_max
    }
}

pub fn quantize_weight(w: f64, w_max: f64) -> Result<WeightLevel> {
    if !(w_max > 0.0) || !w_max.is_finite() {
        return Err(Error::Argument(format!(
            "w_max must be positive, got {w_max}"
        )));
    }
    if !(w.abs() <= w_max) {
        return Err(Error::Range(format!("|{w}| exceeds w_max = {w_max}")));
    }
    // f64::round rounds half away from zero.
    let magnitude = (f64::from(LEVELS) * w.abs() / w_max).round() as u8;
    let sign = if w < 0.0 {
        Sign::Negative
    } else {
        Sign::Positive
    };
    WeightLevel::new(sign, magnitude.min(LEVELS))
}

pub fn level_conductance(level: WeightLevel, params: &MemristorParams) -> f64 {
    params
        .level_conductance(level.magnitude)
        .expect("WeightLevel magnitude is always in range")
}

/// `(g_plus, g_minus)` for one weight.
pub fn encode_cell(level: WeightLevel, params: &MemristorParams) -> (f64, f64) {
    let g = level_conductance(level, params);
    let off = params.g_off();
    match level.sign {
        _ if level.magnitude == 0 => (off, off),
        Sign::Positive => (g, off),
        Sign::Negative => (off, g),
    }
}

/// Nearest-level decoding of a cell pair.
pub fn decode_cell(g_plus: f64, g_minus: f64, params: &MemristorParams) -> WeightLevel {
    let plus = params.nearest_level(g_plus);
    let minus = params.nearest_level(g_minus);
    if plus >= minus {
        WeightLevel::new(Sign::Positive, plus).unwrap()
    } else {
        WeightLevel::new(Sign::Negative, minus).unwrap()
    }
}

/// Row-major `rows × cols` matrix of real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGrid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl WeightGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{} values do not fill a {rows}×{cols} grid",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Fidelity {
    /// Cells take their exact target conductances.
    #[default]
    Ideal,
    /// Every cell goes through program-and-verify from the off-state.
    Device(WriteController),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualColumnLayer {
    rows: usize,
    cols: usize,
    levels: Vec<WeightLevel>,
    g_plus: Vec<f64>,
    g_minus: Vec<f64>,
    v_read: f64,
    w_max: f64,
    params: MemristorParams,
}

impl DualColumnLayer {
    /// Number of inputs (`n`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of neurons (`m`); the physical array has `2m` columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn physical_columns(&self) -> usize {
        2 * self.cols
    }

    pub fn level(&self, row: usize, col: usize) -> WeightLevel {
        self.levels[row * self.cols + col]
    }

    pub fn levels(&self) -> &[WeightLevel] {
        &self.levels
    }

    pub fn g_plus(&self) -> &[f64] {
        &self.g_plus
    }

    pub fn g_minus(&self) -> &[f64] {
        &self.g_minus
    }

    pub fn v_read(&self) -> f64 {
        self.v_read
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn params(&self) -> &MemristorParams {
        &self.params
    }

    /// Program a layer from already quantized levels.
    pub fn from_levels(
        rows: usize,
        cols: usize,
        levels: Vec<WeightLevel>,
        w_max: f64,
        v_read: f64,
        fidelity: Fidelity,
        params: &MemristorParams,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || levels.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{} levels do not fill a {rows}×{cols} layer",
                levels.len()
            )));
        }
        if !(w_max > 0.0) {
            return Err(Error::Argument(format!(
                "w_max must be positive, got {w_max}"
            )));
        }
        params.validate()?;
        if !(v_read > 0.0) || v_read >= params.read_limit() {
            return Err(Error::ReadDisturb {
                v_read,
                threshold: params.read_limit(),
            });
        }
        // Program-and-verify from the off-state is deterministic, so each
        // level's achieved conductance only needs to be simulated once.
        let table = match fidelity {
            Fidelity::Ideal => None,
            Fidelity::Device(ctrl) => {
                let fresh = MemristorState::off(params);
                let mut table = [0.0; LEVELS as usize + 1];
                for (level, g) in table.iter_mut().enumerate() {
                    let (cell, _) =
                        memristor::program_to_level(&fresh, level as u8, &ctrl, params)?;
                    *g = memristor::conductance(&cell, params);
                }
                Some(table)
            }
        };
        let mut g_plus = Vec::with_capacity(levels.len());
        let mut g_minus = Vec::with_capacity(levels.len());
        for &level in &levels {
            let (gp, gm) = match &table {
                None => encode_cell(level, params),
                Some(table) => {
                    let g = table[level.magnitude as usize];
                    match level.sign {
                        Sign::Positive => (g, table[0]),
                        Sign::Negative => (table[0], g),
                    }
                }
            };
            g_plus.push(gp);
            g_minus.push(gm);
        }
        Ok(Self {
            rows,
            cols,
            levels,
            g_plus,
            g_minus,
            v_read,
            w_max,
            params: *params,
        })
    }

    /// Conductance difference `G⁺ − G⁻` per cell, row-major.
    pub fn differential(&self) -> Vec<f64> {
        self.g_plus
            .iter()
            .zip(&self.g_minus)
            .map(|(p, m)| p - m)
            .collect()
    }

    /// Largest `|I⁺ − I⁻|` any column can produce for inputs in `[0, 1]`.
    pub fn max_delta_current(&self) -> f64 {
        let mut pos = vec![0.0; self.cols];
        let mut neg = vec![0.0; self.cols];
        for (idx, d) in self.differential().into_iter().enumerate() {
            let col = idx % self.cols;
            if d > 0.0 {
                pos[col] += d;
            } else {
                neg[col] -= d;
            }
        }
        let worst = pos.iter().chain(&neg).fold(0.0_f64, |m, &v| m.max(v));
        self.v_read * worst
    }

    /// Ideal crossbar read: row `i` driven at `x_i · v_read`, columns at
    /// virtual ground. Returns `(I⁺, I⁻)` per neuron.
    pub fn column_currents(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.rows {
            return Err(Error::Argument(format!(
                "input has {} entries, layer has {} rows",
                x.len(),
                self.rows
            )));
        }
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Range(format!("input {bad} outside [0, 1]")));
        }
        let mut plus = vec![0.0; self.cols];
        let mut minus = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let v = xi * self.v_read;
            let row = i * self.cols..(i + 1) * self.cols;
            for ((p, m), (gp, gm)) in plus
                .iter_mut()
                .zip(minus.iter_mut())
                .zip(self.g_plus[row.clone()].iter().zip(&self.g_minus[row]))
            {
                *p += v * gp;
                *m += v * gm;
            }
        }
        Ok((plus, minus))
    }
}

/// Quantize a real weight grid against `w_max` (default: its largest
/// magnitude) and program it.
pub fn program_layer(
    weights: &WeightGrid,
    w_max: Option<f64>,
    v_read: f64,
    fidelity: Fidelity,
    params: &MemristorParams,
) -> Result<DualColumnLayer> {
    let w_max = match w_max {
        Some(w) => w,
        None => {
            let m = weights.max_abs();
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    };
    let levels = weights
        .values
        .iter()
        .map(|&w| quantize_weight(w, w_max))
        .collect::<Result<Vec<_>>>()?;
    DualColumnLayer::from_levels(
        weights.rows,
        weights.cols,
        levels,
        w_max,
        v_read,
        fidelity,
        params,
    )
}
