//! Scenario configuration files (TOML, one section per module, unknown keys rejected).
//!
//! ```toml
//! name = "barrier"          # barrier | crossing | double_slit | phase_pair | box | custom
//!
//! [grid]                    # y_* only for the two-dimensional ADI mode
//! min = -40.0
//! max = 20.0
//! points = 2048
//!
//! [constants]               # ħ, m, ω; all default to 1
//!
//! [[packets]]               # free Gaussians: center, sigma, wavenumber, weight, phase
//! center = -15.0
//! sigma = 2.0
//! wavenumber = 2.0
//!
//! [potential]               # free | square_barrier | infinite_well
//! kind = "square_barrier"
//! height = 4.0
//! left = 0.0
//! right = 0.5
//!
//! [evolution]               # crank_nicolson | analytic | adi | stationary
//! mode = "crank_nicolson"
//! dt = 5e-3
//! n_steps = 3000
//! stride = 30
//!
//! [trajectories]
//! count = 15
//!
//! [analysis]
//! stripe_prominence = 0.05
//! ```

use serde::{Deserialize, Serialize};

use super::manifest::sha256_hex;
use crate::bohmian::{Interpolation, SeedMethod};
use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::qpotential::{HeatDirection, DEFAULT_NODE_EPSILON};
use crate::schrodinger::{PhysicalConstants, PotentialSpec, WavePacketSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Barrier,
    Crossing,
    DoubleSlit,
    PhasePair,
    Box,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Barrier => "barrier",
            ScenarioKind::Crossing => "crossing",
            ScenarioKind::DoubleSlit => "double_slit",
            ScenarioKind::PhasePair => "phase_pair",
            ScenarioKind::Box => "box",
            ScenarioKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_points: Option<usize>,
}

impl GridSpec {
    pub fn is_2d(&self) -> bool {
        self.y_min.is_some() || self.y_max.is_some() || self.y_points.is_some()
    }

    pub fn build(&self) -> Result<Grid> {
        if !self.is_2d() {
            return Grid::new_1d(self.min, self.max, self.points);
        }
        match (self.y_min, self.y_max, self.y_points) {
            (Some(a), Some(b), Some(n)) => Grid::new_2d((self.min, self.max, self.points), (a, b, n)),
            _ => Err(Error::Config("grid: y_min, y_max and y_points must be given together".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    /// Crank–Nicolson in the configured potential.
    #[default]
    CrankNicolson,
    /// Closed-form free packets (potential must be free).
    Analytic,
    /// Two-dimensional ADI; needs a 2D grid and a `[longitudinal]` packet.
    Adi,
    /// Stationary box mode; needs `[box]`.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    #[serde(default)]
    pub mode: EvolutionMode,
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

impl EvolutionSpec {
    pub fn frames(&self) -> usize {
        self.n_steps / self.stride + 1
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.n_steps - self.n_steps % self.stride) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub seeding: SeedMethod,
    #[serde(default)]
    pub interpolation: Interpolation,
    #[serde(default = "one")]
    pub substeps: usize,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec { count: 0, seeding: SeedMethod::Quantile, interpolation: Interpolation::Linear, substeps: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HeatReferenceKind {
    /// P(x, t0) pointwise.
    #[default]
    Initial,
    /// max P(x, t0).
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default = "yes")]
    pub quantum_potential: bool,
    #[serde(default = "yes")]
    pub heat: bool,
    #[serde(default)]
    pub heat_direction: HeatDirection,
    #[serde(default)]
    pub heat_reference: HeatReferenceKind,
    #[serde(default = "yes")]
    pub stripes: bool,
    #[serde(default = "default_prominence")]
    pub stripe_prominence: f64,
    /// Time at which stripes are scored; scenario-specific default otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stripe_time: Option<f64>,
    /// Axis interval in which stripes are scored; scenario-specific default otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stripe_region: Option<[f64; 2]>,
    #[serde(default = "yes")]
    pub audits: bool,
    /// Node threshold as a fraction of max P.
    #[serde(default = "default_eps")]
    pub node_epsilon: f64,
}

fn yes() -> bool {
    true
}

fn default_prominence() -> f64 {
    0.05
}

fn default_eps() -> f64 {
    DEFAULT_NODE_EPSILON
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            quantum_potential: true,
            heat: true,
            heat_direction: HeatDirection::Forward,
            heat_reference: HeatReferenceKind::Initial,
            stripes: true,
            stripe_prominence: default_prominence(),
            stripe_time: None,
            stripe_region: None,
            audits: true,
            node_epsilon: DEFAULT_NODE_EPSILON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub length: f64,
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasePairSpec {
    /// Extra phase ΔΦ carried by the last packet.
    pub phase_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: ScenarioKind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub constants: PhysicalConstants,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub packets: Vec<WavePacketSpec>,
    #[serde(default)]
    pub potential: PotentialSpec,
    pub evolution: EvolutionSpec,
    #[serde(default)]
    pub trajectories: TrajectorySpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_mode: Option<BoxSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_pair: Option<PhasePairSpec>,
    /// Packet along the second axis for the ADI mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub longitudinal: Option<WavePacketSpec>,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse, apply `key.path=value` overrides, then validate.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: ScenarioConfig =
            toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML rendering (the form that is hashed and stored with results).
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn sha256(&self) -> Result<String> {
        Ok(sha256_hex(self.to_toml()?.as_bytes()))
    }

    /// Packets as evolved, with the phase-pair offset folded into the last one.
    pub fn effective_packets(&self) -> Vec<WavePacketSpec> {
        let mut packets = self.packets.clone();
        if let (Some(pp), Some(last)) = (self.phase_pair, packets.last_mut()) {
            last.phase += pp.phase_difference;
        }
        packets
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        let ev = &self.evolution;
        if !(ev.dt > 0.0 && ev.dt.is_finite()) {
            return Err(cfg_err(format!("evolution.dt must be positive, got {}", ev.dt)));
        }
        if ev.n_steps == 0 || ev.stride == 0 || ev.stride > ev.n_steps {
            return Err(cfg_err("evolution needs n_steps ≥ 1 and 1 ≤ stride ≤ n_steps"));
        }
        let x = grid.axis(0);
        for (i, p) in self.packets.iter().enumerate() {
            p.validate().map_err(|e| cfg_err(format!("packets[{i}]: {e}")))?;
            if !x.contains(p.center) {
                return Err(cfg_err(format!("packets[{i}] center {} lies outside the grid", p.center)));
            }
        }
        self.potential.validate().map_err(|e| cfg_err(format!("potential: {e}")))?;
        match self.potential {
            PotentialSpec::SquareBarrier { left, right, .. } | PotentialSpec::InfiniteWell { left, right } => {
                if !(x.contains(left) || x.contains(right)) {
                    return Err(cfg_err("potential lies entirely outside the grid"));
                }
            }
            PotentialSpec::Free => {}
        }
        let a = &self.analysis;
        if !(a.stripe_prominence > 0.0 && a.stripe_prominence < 1.0) {
            return Err(cfg_err("analysis.stripe_prominence must lie in (0, 1)"));
        }
        if !(a.node_epsilon > 0.0 && a.node_epsilon < 1.0) {
            return Err(cfg_err("analysis.node_epsilon must lie in (0, 1)"));
        }
        if let Some([lo, hi]) = a.stripe_region {
            if !(lo < hi) {
                return Err(cfg_err("analysis.stripe_region must be [lo, hi] with lo < hi"));
            }
        }

        match ev.mode {
            EvolutionMode::Stationary => {
                let b = self.box_mode.ok_or_else(|| cfg_err("stationary evolution needs a [box] section"))?;
                if !(b.length > 0.0) || b.n == 0 {
                    return Err(cfg_err("box needs length > 0 and n ≥ 1"));
                }
                if x.min < -1e-12 || x.max > b.length + 1e-12 {
                    return Err(cfg_err("box grid must lie within [0, length]"));
                }
            }
            EvolutionMode::Adi => {
                if grid.dim() != 2 {
                    return Err(cfg_err("adi evolution needs y_min, y_max and y_points"));
                }
                let l = self.longitudinal.ok_or_else(|| cfg_err("adi evolution needs a [longitudinal] packet"))?;
                l.validate().map_err(|e| cfg_err(format!("longitudinal: {e}")))?;
            }
            EvolutionMode::Analytic => {
                if self.potential != PotentialSpec::Free {
                    return Err(cfg_err("analytic evolution is only valid for a free potential"));
                }
            }
            EvolutionMode::CrankNicolson => {}
        }
        if grid.dim() == 2 && ev.mode != EvolutionMode::Adi {
            return Err(cfg_err("two-dimensional grids are only supported by the adi mode"));
        }
        if ev.mode != EvolutionMode::Stationary && self.packets.is_empty() {
            return Err(cfg_err("at least one [[packets]] entry is required"));
        }
        if self.trajectories.count > 0 && grid.dim() != 1 {
            return Err(cfg_err("trajectories are integrated on one-dimensional grids only"));
        }
        if self.trajectories.substeps == 0 {
            return Err(cfg_err("trajectories.substeps must be ≥ 1"));
        }

        match self.name {
            ScenarioKind::Box if self.box_mode.is_none() => Err(cfg_err("box scenario needs a [box] section")),
            ScenarioKind::PhasePair if self.phase_pair.is_none() => {
                Err(cfg_err("phase_pair scenario needs [phase_pair] phase_difference"))
            }
            ScenarioKind::PhasePair | ScenarioKind::Crossing | ScenarioKind::DoubleSlit if self.packets.len() < 2 => {
                Err(cfg_err(format!("{} scenario needs at least two packets", self.name.name())))
            }
            ScenarioKind::Barrier if !matches!(self.potential, PotentialSpec::SquareBarrier { .. }) => {
                Err(cfg_err("barrier scenario needs a square_barrier potential"))
            }
            _ => Ok(()),
        }
    }
}

/// Set `a.b.0.c = value` in a TOML table. The value is parsed as a TOML
/// literal, falling back to a bare string.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) =
        assignment.split_once('=').ok_or_else(|| cfg_err(format!("override `{assignment}` is not key=value")))?;
    let (path, raw) = (path.trim(), raw.trim());
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(cfg_err(format!("bad override key `{path}`")));
    }
    let mut cur = doc;
    for (depth, key) in keys[..keys.len() - 1].iter().enumerate() {
        let next = keys[depth + 1];
        let slot = cur.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match slot {
            toml::Value::Table(t) => t,
            toml::Value::Array(items) => {
                let i: usize = next.parse().map_err(|_| cfg_err(format!("`{key}` is a list; expected an index")))?;
                let len = items.len();
                let item =
                    items.get_mut(i).ok_or_else(|| cfg_err(format!("`{key}` has {len} entries, no index {i}")))?;
                if depth + 2 == keys.len() {
                    *item = value;
                    return Ok(());
                }
                match item {
                    toml::Value::Table(t) => {
                        // Skip the index segment on the next iteration.
                        return apply_override(t, &format!("{}={raw}", keys[depth + 2..].join(".")));
                    }
                    _ => return Err(cfg_err(format!("`{key}.{i}` is not a table"))),
                }
            }
            _ => return Err(cfg_err(format!("`{key}` is not a table"))),
        };
    }
    cur.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "crossing"
[grid]
min = -10.0
max = 10.0
points = 256
[[packets]]
center = -4.0
sigma = 1.0
wavenumber = 2.0
[[packets]]
center = 4.0
sigma = 1.0
wavenumber = -2.0
[evolution]
mode = "analytic"
dt = 0.01
n_steps = 100
stride = 10
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.name, ScenarioKind::Crossing);
        assert_eq!(c.evolution.frames(), 11);
        assert!((c.evolution.duration() - 1.0).abs() < 1e-12);
        assert_eq!(c.analysis.stripe_prominence, 0.05);
        assert_eq!(c.constants, PhysicalConstants::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("stride = 10", "stride = 10\nstrid = 3");
        assert!(matches!(ScenarioConfig::from_toml(&bad), Err(Error::Config(_))));
        let bad = MINIMAL.replace("sigma = 1.0\nwavenumber = 2.0", "sigma = 1.0\nwavenumbr = 2.0");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
        let bad = format!("{MINIMAL}\n[analysis]\nstripes_prominence = 0.1\n");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn invariants_enforced() {
        assert!(ScenarioConfig::from_toml(&MINIMAL.replace("dt = 0.01", "dt = 0.0")).is_err());
        assert!(ScenarioConfig::from_toml(&MINIMAL.replace("center = 4.0", "center = 40.0")).is_err());
        let pp = MINIMAL.replace("name = \"crossing\"", "name = \"phase_pair\"");
        assert!(ScenarioConfig::from_toml(&pp).is_err());
        let ok = format!("{pp}\n[phase_pair]\nphase_difference = 1.5707963267948966\n");
        let cfg = ScenarioConfig::from_toml(&ok).unwrap();
        assert!((cfg.effective_packets()[1].phase - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let bx = MINIMAL.replace("name = \"crossing\"", "name = \"box\"");
        assert!(ScenarioConfig::from_toml(&bx).is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        let text = c.to_toml().unwrap();
        let back = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.sha256().unwrap(), c.sha256().unwrap());
    }

    #[test]
    fn overrides() {
        let ov = vec![
            "evolution.dt=0.02".to_string(),
            "packets.1.wavenumber=-3".to_string(),
            "trajectories.count=7".to_string(),
            "analysis.heat_direction=osmotic".to_string(),
        ];
        let c = ScenarioConfig::from_toml_with_overrides(MINIMAL, &ov).unwrap();
        assert_eq!(c.evolution.dt, 0.02);
        assert_eq!(c.packets[1].wavenumber, -3.0);
        assert_eq!(c.trajectories.count, 7);
        assert_eq!(c.analysis.heat_direction, HeatDirection::Osmotic);
        assert!(ScenarioConfig::from_toml_with_overrides(MINIMAL, &["packets.5.sigma=1".into()]).is_err());
        assert!(ScenarioConfig::from_toml_with_overrides(MINIMAL, &["nonsense".into()]).is_err());
        assert!(ScenarioConfig::from_toml_with_overrides(MINIMAL, &["evolution.typo=1".into()]).is_err());
    }
}
