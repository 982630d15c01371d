//! Component-count power accounting for the proposed architecture and the two
//! reference MCA architectures (dual-row with voltage converters, dual-column
//! with op-amp neurons). Crossbar array power is excluded throughout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Topology;

pub const IM: &str = "im";
pub const SIGMOID_NEURON: &str = "sigmoid_neuron";
pub const VOLTAGE_CONVERTER: &str = "voltage_converter";
pub const OPAMP_NEURON: &str = "opamp_neuron";

/// Average power per component, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComponentPowerTable {
    pub im: f64,
    pub sigmoid_neuron: f64,
    pub voltage_converter: f64,
    pub opamp_neuron: f64,
}

impl Default for ComponentPowerTable {
    fn default() -> Self {
        Self {
            im: 37e-6,
            sigmoid_neuron: 8e-6,
            voltage_converter: 24e-6,
            opamp_neuron: 104e-6,
        }
    }
}

impl ComponentPowerTable {
    pub fn get(&self, component: &str) -> Result<f64> {
        match component {
            IM => Ok(self.im),
            SIGMOID_NEURON => Ok(self.sigmoid_neuron),
            VOLTAGE_CONVERTER => Ok(self.voltage_converter),
            OPAMP_NEURON => Ok(self.opamp_neuron),
            other => Err(Error::UnknownComponent(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArchitectureKind {
    /// Dual-column crossbar with one domain-wall IM per neuron.
    Proposed,
    /// Dual-row crossbar with a voltage converter per layer input.
    DualRowConverter,
    /// Dual-column crossbar with an op-amp based sigmoid neuron.
    DualColumnOpamp,
}

impl ArchitectureKind {
    pub const ALL: [ArchitectureKind; 3] = [
        ArchitectureKind::Proposed,
        ArchitectureKind::DualRowConverter,
        ArchitectureKind::DualColumnOpamp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArchitectureKind::Proposed => "proposed",
            ArchitectureKind::DualRowConverter => "dual-row-converter",
            ArchitectureKind::DualColumnOpamp => "dual-column-opamp",
        }
    }
}

pub type ComponentCounts = BTreeMap<String, u64>;

pub fn component_counts(arch: ArchitectureKind, topo: &Topology) -> ComponentCounts {
    let neurons = topo.neurons() as u64;
    let mut counts = ComponentCounts::new();
    match arch {
        ArchitectureKind::Proposed => {
            counts.insert(IM.into(), neurons);
            counts.insert(SIGMOID_NEURON.into(), neurons);
        }
        ArchitectureKind::DualColumnOpamp => {
            counts.insert(OPAMP_NEURON.into(), neurons);
        }
        ArchitectureKind::DualRowConverter => {
            let inputs: usize = topo.layer_shapes().map(|(n, _)| n).sum();
            counts.insert(VOLTAGE_CONVERTER.into(), inputs as u64);
            counts.insert(SIGMOID_NEURON.into(), neurons);
        }
    }
    counts
}

/// Total power in watts.
pub fn total_power(counts: &ComponentCounts, table: &ComponentPowerTable) -> Result<f64> {
    counts
        .iter()
        .map(|(name, &n)| Ok(n as f64 * table.get(name)?))
        .sum()
}

/// Percentage saved by `proposed` relative to `reference`.
pub fn reduction_percent(proposed: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::Argument(format!(
            "reference power must be positive, got {reference}"
        )));
    }
    Ok(100.0 * (reference - proposed) / reference)
}

/// Published totals for one dataset, in mW, with published reductions in %.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedTotals {
    pub proposed_mw: f64,
    pub dual_row_mw: f64,
    pub dual_row_reduction: f64,
    pub opamp_mw: f64,
    pub opamp_reduction: f64,
}

impl PublishedTotals {
    pub fn power_mw(&self, arch: ArchitectureKind) -> f64 {
        match arch {
            ArchitectureKind::Proposed => self.proposed_mw,
            ArchitectureKind::DualRowConverter => self.dual_row_mw,
            ArchitectureKind::DualColumnOpamp => self.opamp_mw,
        }
    }

    pub fn reduction(&self, arch: ArchitectureKind) -> Option<f64> {
        match arch {
            ArchitectureKind::Proposed => None,
            ArchitectureKind::DualRowConverter => Some(self.dual_row_reduction),
            ArchitectureKind::DualColumnOpamp => Some(self.opamp_reduction),
        }
    }
}

/// Memristor-bridge synapse network (10 inputs, 4 outputs): reported total
/// and per-sigmoid power in mW. Never simulated.
pub const BRIDGE_NETWORK_TOTAL_MW: f64 = 230.0;
pub const BRIDGE_SIGMOID_NEURON_MW: f64 = 2.06;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Mnist,
    Asl,
    Cifar10,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Mnist, Preset::Asl, Preset::Cifar10];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Mnist => "mnist",
            Preset::Asl => "asl",
            Preset::Cifar10 => "cifar10",
        }
    }

    pub fn topology(self) -> Topology {
        match self {
            Preset::Mnist => Topology::mnist(),
            Preset::Asl => Topology::asl(),
            Preset::Cifar10 => Topology::cifar10(),
        }
    }

    pub fn published(self) -> PublishedTotals {
        match self {
            Preset::Mnist => PublishedTotals {
                proposed_mw: 42.10,
                dual_row_mw: 52.4,
                dual_row_reduction: 19.0,
                opamp_mw: 97.52,
                opamp_reduction: 56.0,
            },
            Preset::Asl => PublishedTotals {
                proposed_mw: 74.5,
                dual_row_mw: 126.2,
                dual_row_reduction: 41.0,
                opamp_mw: 172.01,
                opamp_reduction: 56.0,
            },
            Preset::Cifar10 => PublishedTotals {
                proposed_mw: 37.35,
                dual_row_mw: 51.93,
                dual_row_reduction: 28.0,
                opamp_mw: 86.32,
                opamp_reduction: 56.7,
            },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown preset `{s}` (available: mnist, asl, cifar10)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub label: String,
    pub topology: Topology,
    pub architecture: ArchitectureKind,
    pub computed_mw: f64,
    pub published_mw: Option<f64>,
    /// Saving of the proposed architecture over this row (computed).
    pub reduction: Option<f64>,
    pub published_reduction: Option<f64>,
}

impl PowerRow {
    /// Relative deviation of the computed value from the published one.
    pub fn deviation(&self) -> Option<f64> {
        self.published_mw.map(|p| (self.computed_mw - p) / p)
    }
}

/// Rows for all three architectures on one topology.
pub fn power_rows(
    label: &str,
    topo: &Topology,
    published: Option<PublishedTotals>,
    table: &ComponentPowerTable,
) -> Result<Vec<PowerRow>> {
    let watts = |arch| total_power(&component_counts(arch, topo), table);
    let proposed = watts(ArchitectureKind::Proposed)?;
    ArchitectureKind::ALL
        .into_iter()
        .map(|arch| {
            let total = watts(arch)?;
            let reduction = match arch {
                ArchitectureKind::Proposed => None,
                _ => Some(reduction_percent(proposed, total)?),
            };
            Ok(PowerRow {
                label: label.to_string(),
                topology: topo.clone(),
                architecture: arch,
                computed_mw: total * 1e3,
                published_mw: published.map(|p| p.power_mw(arch)),
                reduction,
                published_reduction: published.and_then(|p| p.reduction(arch)),
            })
        })
        .collect()
}

/// Deviations beyond this fraction are flagged in reports.
pub const FLAG_THRESHOLD: f64 = 0.01;

fn fmt_opt(v: Option<f64>, precision: usize) -> String {
    v.map(|v| {
        // Keep values that round to zero from printing as "-0.0000".
        let text = format!("{v:.precision$}");
        match text.strip_prefix('-') {
            Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
            _ => text,
        }
    })
    .unwrap_or_else(|| "n/a".into())
}

fn flag(row: &PowerRow) -> &'static str {
    match row.deviation() {
        Some(d) if d.abs() > FLAG_THRESHOLD => "MISMATCH",
        Some(_) => "ok",
        None => "",
    }
}

pub fn render_csv(rows: &[PowerRow]) -> String {
    let mut out = String::from(
        "dataset,topology,architecture,computed_mw,published_mw,deviation_pct,reduction_pct,published_reduction_pct,flag\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},\"{}\",{},{:.4},{},{},{},{},{}",
            r.label,
            r.topology,
            r.architecture.name(),
            r.computed_mw,
            fmt_opt(r.published_mw, 4),
            fmt_opt(r.deviation().map(|d| d * 100.0), 4),
            fmt_opt(r.reduction, 4),
            fmt_opt(r.published_reduction, 4),
            flag(r),
        );
    }
    out
}

pub fn render_table(rows: &[PowerRow]) -> String {
    let mut out = format!(
        "{:<10} {:<20} {:>14} {:>14} {:>10} {:>14} {:>14}  {}\n",
        "dataset",
        "architecture",
        "computed mW",
        "published mW",
        "dev %",
        "reduction %",
        "published %",
        "flag"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<10} {:<20} {:>14.4} {:>14} {:>10} {:>14} {:>14}  {}",
            r.label,
            r.architecture.name(),
            r.computed_mw,
            fmt_opt(r.published_mw, 4),
            fmt_opt(r.deviation().map(|d| d * 100.0), 4),
            fmt_opt(r.reduction, 4),
            fmt_opt(r.published_reduction, 4),
            flag(r),
        );
    }
    let _ = writeln!(
        out,
        "memristor-bridge network (10x4, not simulated): {BRIDGE_NETWORK_TOTAL_MW} mW total, {BRIDGE_SIGMOID_NEURON_MW} mW per sigmoid neuron"
    );
    out
}
