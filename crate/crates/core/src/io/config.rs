//! JSON run configuration.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{Alignment, Surface, DEFAULT_THRESHOLD};
use crate::cell::{CellSpec, LayeredPlate, Ply};
use crate::error::{Error, Result};
use crate::material::{iso_to_tensor, IsotropicMaterial};
use crate::mode::{MacroMode, ModeKey};
use crate::pcp::{MaterialTable, SolverOptions};

use super::export::Format;

/// Value of the `schema` field this version reads and writes.
pub const SCHEMA: &str = "platecell/1";

/// Cell geometry, either generated from layer parameters or given in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CellConfig {
    /// Equally spaced fiber or channel layers in a matrix.
    Layered(LayeredPlate),
    Laminate(LaminateCell),
    Homogeneous(HomogeneousCell),
    /// A cell spelled out inclusion by inclusion.
    Custom(CellSpec),
}

/// Homogeneous plies listed bottom to top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminateCell {
    pub h1: f64,
    pub h2: f64,
    pub plies: Vec<Ply>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousCell {
    pub h1: f64,
    pub h2: f64,
    pub thickness: f64,
    pub material: String,
}

impl CellConfig {
    pub fn build(&self) -> Result<CellSpec> {
        let spec = match self {
            CellConfig::Layered(p) => p.build()?,
            CellConfig::Laminate(c) => CellSpec::laminate(c.h1, c.h2, c.plies.clone()),
            CellConfig::Homogeneous(c) => CellSpec::homogeneous(c.h1, c.h2, c.thickness, &c.material),
            CellConfig::Custom(spec) => spec.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A requested macroscopic mode: `"11:0"` or `{"mode": "11:0", "magnitude": 2.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ModeRepr")]
pub struct ModeEntry {
    pub mode: ModeKey,
    pub magnitude: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModeRepr {
    Short(ModeKey),
    Full {
        mode: ModeKey,
        #[serde(default = "one")]
        magnitude: f64,
    },
}

impl From<ModeRepr> for ModeEntry {
    fn from(r: ModeRepr) -> Self {
        match r {
            ModeRepr::Short(mode) => ModeEntry { mode, magnitude: 1.0 },
            ModeRepr::Full { mode, magnitude } => ModeEntry { mode, magnitude },
        }
    }
}

impl ModeEntry {
    pub fn macro_mode(&self) -> MacroMode {
        self.mode.unit().with_magnitude(self.magnitude)
    }
}

fn one() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    SolverOptions::default().tolerance
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Periodicity-deviation threshold for boundary layers.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Relative L2 distance below which a representative layer is informative.
    #[serde(default = "default_threshold")]
    pub informative_threshold: f64,
    /// Slab pairing pitch; defaults to the repeat pitch of the layering.
    #[serde(default)]
    pub pitch: Option<f64>,
    #[serde(default = "default_alignments")]
    pub alignments: Vec<Alignment>,
    #[serde(default = "default_surfaces")]
    pub surfaces: Vec<Surface>,
    /// In-plane copies of the cell used by `wrinkle`.
    #[serde(default = "default_tile")]
    pub tile: [usize; 2],
}

fn default_alignments() -> Vec<Alignment> {
    vec![Alignment::Symmetric]
}

fn default_surfaces() -> Vec<Surface> {
    vec![Surface::Top, Surface::Bottom]
}

fn default_tile() -> [usize; 2] {
    [1, 1]
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            informative_threshold: DEFAULT_THRESHOLD,
            pitch: None,
            alignments: default_alignments(),
            surfaces: default_surfaces(),
            tile: default_tile(),
        }
    }
}

fn default_directory() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            format: Format::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub cell: CellConfig,
    pub materials: Vec<IsotropicMaterial>,
    /// Element counts `(n1, n2, n3)`; `n3` sets the target through-thickness spacing.
    pub resolution: [usize; 3],
    pub modes: Vec<ModeEntry>,
    /// Ratio of the cell size to the plate's in-plane length scale.
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Every problem found, joined; the first failing material or cell check
    /// is reported with its own error type.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.schema != SCHEMA {
            problems.push(format!("schema `{}` is not `{SCHEMA}`", self.schema));
        }
        let mut names = BTreeSet::new();
        for m in &self.materials {
            if !names.insert(m.name.as_str()) {
                problems.push(format!("material `{}` defined twice", m.name));
            }
        }
        if self.modes.is_empty() {
            problems.push("at least one mode is required".into());
        }
        let mut seen = BTreeSet::new();
        for m in &self.modes {
            if !seen.insert(m.mode.to_string()) {
                problems.push(format!("mode {} requested twice", m.mode));
            }
            if !m.magnitude.is_finite() {
                problems.push(format!("mode {}: magnitude must be finite", m.mode));
            }
        }
        if self.resolution[0] < 2 || self.resolution[1] < 2 || self.resolution[2] < 2 {
            problems.push("resolution entries must be at least 2".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            problems.push("epsilon must be positive".into());
        }
        if !(self.solver.tolerance > 0.0 && self.solver.tolerance < 1.0) {
            problems.push("solver.tolerance must lie in (0, 1)".into());
        }
        let a = &self.analysis;
        for (name, v) in [("threshold", a.threshold), ("informative_threshold", a.informative_threshold)] {
            if !(v > 0.0 && v.is_finite()) {
                problems.push(format!("analysis.{name} must be positive"));
            }
        }
        if let Some(p) = a.pitch {
            if !(p > 0.0 && p.is_finite()) {
                problems.push("analysis.pitch must be positive".into());
            }
        }
        if a.tile.contains(&0) {
            problems.push("analysis.tile entries must be at least 1".into());
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems.join("; ")));
        }
        for m in &self.materials {
            iso_to_tensor(m)?;
        }
        let spec = self.cell.build()?;
        for id in spec.material_ids() {
            if !names.contains(id.as_str()) {
                return Err(Error::Config(format!("material `{id}` is used by the cell but not defined")));
            }
        }
        Ok(())
    }

    pub fn cell_spec(&self) -> Result<CellSpec> {
        self.cell.build()
    }

    pub fn material_table(&self) -> Result<MaterialTable> {
        self.materials
            .iter()
            .map(|m| Ok((m.name.clone(), iso_to_tensor(m)?)))
            .collect()
    }

    pub fn macro_modes(&self) -> Vec<MacroMode> {
        self.modes.iter().map(ModeEntry::macro_mode).collect()
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
        }
    }

    /// The configuration with every default spelled out.
    pub fn normalized(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIBER: &str = r#"{
        "schema": "platecell/1",
        "cell": {"type": "layered", "h1": 1.1, "h2": 3.0, "layers": 3, "radius": 0.45,
                 "gap": 0.1, "cover": 0.1, "kind": "fiber",
                 "matrix_material": "matrix", "inclusion_material": "fiber"},
        "materials": [
            {"name": "matrix", "youngs_modulus": 2.0, "poisson_ratio": 0.36},
            {"name": "fiber", "youngs_modulus": 170.0, "poisson_ratio": 0.3}
        ],
        "resolution": [8, 22, 16],
        "modes": ["11:0", {"mode": "12:1", "magnitude": 2.0}]
    }"#;

    #[test]
    fn defaults_are_filled_and_round_trip() {
        let cfg = parse_config(FIBER).unwrap();
        assert_eq!(cfg.epsilon, 1.0);
        assert_eq!(cfg.analysis.threshold, 0.05);
        assert_eq!(cfg.output.format, Format::Csv);
        assert_eq!(cfg.modes[1].magnitude, 2.0);
        let dump = cfg.normalized();
        let again = parse_config(&dump).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.normalized(), dump);
        assert_eq!(cfg.cell_spec().unwrap().inclusions.len(), 3);
    }

    #[test]
    fn missing_modes_is_rejected() {
        let text = FIBER.replace(r#""modes": ["11:0", {"mode": "12:1", "magnitude": 2.0}]"#, r#""modes": []"#);
        assert!(matches!(parse_config(&text), Err(Error::Config(_))));
        let v: serde_json::Value = serde_json::from_str(FIBER).unwrap();
        let mut obj = v.as_object().unwrap().clone();
        obj.remove("modes");
        let err = parse_config(&serde_json::to_string(&obj).unwrap()).unwrap_err();
        assert!(err.to_string().contains("modes"), "{err}");
    }

    #[test]
    fn incompressible_material_is_rejected() {
        let text = FIBER.replace("0.36", "0.5");
        assert!(matches!(parse_config(&text), Err(Error::InvalidMaterial { .. })));
    }

    #[test]
    fn unknown_fields_and_bad_schema() {
        let text = FIBER.replace(r#""resolution""#, r#""resolutoin": [1, 1, 1], "resolution""#);
        assert!(parse_config(&text).is_err());
        let text = FIBER.replace("platecell/1", "platecell/0");
        assert!(parse_config(&text).unwrap_err().to_string().contains("schema"));
        let text = FIBER.replace(r#""inclusion_material": "fiber""#, r#""inclusion_material": "glass""#);
        assert!(parse_config(&text).unwrap_err().to_string().contains("glass"));
    }

    #[test]
    fn parse_errors_carry_a_position() {
        let err = parse_config("{\n  \"schema\": \"platecell/1\",\n  \"cell\": 3\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
