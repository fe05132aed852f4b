//! Experiment configuration: TOML document, flag overrides, validation.
//!
//! All defaults are explicit here and echoed into the metadata record of
//! every run:
//!
//! | field             | default                         |
//! |-------------------|---------------------------------|
//! | `k`               | 1.0                             |
//! | `N`               | 60 (direction count)            |
//! | `M`               | 128 (nodes per component)       |
//! | `grid`            | [-4,4]² with step 0.1           |
//! | `noise`           | off (`seed` defaults to 0)      |
//! | `aperture`        | off (full circle)               |
//! | `epsilon_list`    | decades 1e-2 … 1e-12            |
//! | `density_points`  | none                            |
//! | `output_dir`      | `out`                           |
//! | `variant`         | `both`                          |
//! | `spectral_cutoff` | off                             |

use lsm2d_core::farfield::{ApertureSpec, NoiseSpec};
use lsm2d_core::geometry::{BoundaryCurve, SamplingGrid, Scatterer};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

fn bad(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), reason: reason.into() }
}

/// One boundary component as it appears in the config document.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Circle { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], a: f64, b: f64 },
    Kite {
        center: [f64; 2],
        #[serde(default = "default_kite_a")]
        a: f64,
        #[serde(default = "default_kite_b")]
        b: f64,
    },
}

fn default_kite_a() -> f64 {
    0.65
}

fn default_kite_b() -> f64 {
    1.5
}

impl CurveSpec {
    fn build(&self, field: &str) -> Result<BoundaryCurve, ConfigError> {
        let curve = match *self {
            CurveSpec::Circle { center, radius } => {
                BoundaryCurve::circle(Vector2::new(center[0], center[1]), radius)
            }
            CurveSpec::Ellipse { center, a, b } => {
                BoundaryCurve::ellipse(Vector2::new(center[0], center[1]), a, b)
            }
            CurveSpec::Kite { center, a, b } => {
                BoundaryCurve::kite_with(Vector2::new(center[0], center[1]), a, b)
            }
        };
        curve.map_err(|e| bad(field, e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_grid_min")]
    pub x_min: f64,
    #[serde(default = "default_grid_max")]
    pub x_max: f64,
    #[serde(default = "default_grid_min")]
    pub y_min: f64,
    #[serde(default = "default_grid_max")]
    pub y_max: f64,
    #[serde(default = "default_grid_step")]
    pub step: f64,
}

fn default_grid_min() -> f64 {
    -4.0
}

fn default_grid_max() -> f64 {
    4.0
}

fn default_grid_step() -> f64 {
    0.1
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: default_grid_min(),
            x_max: default_grid_max(),
            y_min: default_grid_min(),
            y_max: default_grid_max(),
            step: default_grid_step(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureConfig {
    pub theta_lo: f64,
    pub theta_hi: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
#[clap(rename_all = "lower")]
pub enum VariantChoice {
    Ck,
    Kirsch,
    #[default]
    Both,
}

impl VariantChoice {
    pub fn includes_ck(self) -> bool {
        matches!(self, VariantChoice::Ck | VariantChoice::Both)
    }

    pub fn includes_kirsch(self) -> bool {
        matches!(self, VariantChoice::Kirsch | VariantChoice::Both)
    }
}

/// The raw configuration document; every field optional so flags can fill
/// the gaps.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub k: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(default)]
    pub scatterer: Vec<CurveSpec>,
    /// Load this matrix file instead of synthesizing one.
    pub matrix: Option<PathBuf>,
    pub grid: Option<GridSpec>,
    pub noise: Option<NoiseConfig>,
    pub aperture: Option<ApertureConfig>,
    pub epsilon_list: Option<Vec<f64>>,
    #[serde(default)]
    pub density_points: Vec<[f64; 2]>,
    pub output_dir: Option<PathBuf>,
    pub variant: Option<VariantChoice>,
    pub spectral_cutoff: Option<f64>,
}

impl ConfigDocument {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad("config", format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| bad("config", e.to_string()))
    }
}

/// Command-line overrides mirroring the config fields.
#[derive(clap::Args, Clone, Debug, Default)]
pub struct Overrides {
    /// Wavenumber
    #[arg(long)]
    pub k: Option<f64>,
    /// Number of incidence/observation directions (even)
    #[arg(long)]
    pub n: Option<usize>,
    /// Quadrature nodes per boundary component (even, >= 16)
    #[arg(long)]
    pub m: Option<usize>,
    /// Circle component "cx,cy,radius"; repeatable, replaces the config scatterer
    #[arg(long, value_name = "CX,CY,R", allow_hyphen_values = true)]
    pub circle: Vec<String>,
    /// Ellipse component "cx,cy,a,b"; repeatable
    #[arg(long, value_name = "CX,CY,A,B", allow_hyphen_values = true)]
    pub ellipse: Vec<String>,
    /// Kite component "cx,cy" or "cx,cy,a,b"; repeatable
    #[arg(long, value_name = "CX,CY[,A,B]", allow_hyphen_values = true)]
    pub kite: Vec<String>,
    /// Load this far-field matrix file instead of synthesizing
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Sampling rectangle and step "xmin,xmax,ymin,ymax,step"
    #[arg(long, value_name = "XMIN,XMAX,YMIN,YMAX,STEP", allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Relative noise level
    #[arg(long)]
    pub noise_level: Option<f64>,
    /// Noise seed (default 0)
    #[arg(long)]
    pub noise_seed: Option<u64>,
    /// Aperture arc "lo,hi" in radians, half-open
    #[arg(long, value_name = "LO,HI")]
    pub aperture: Option<String>,
    /// Strictly decreasing regularization parameters "1e-2,1e-3,..."
    #[arg(long, value_name = "E1,E2,...")]
    pub epsilons: Option<String>,
    /// Density-experiment sampling point "x,y"; repeatable
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true)]
    pub density_point: Vec<String>,
    /// Output directory
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Indicator variant(s) to report minima for
    #[arg(long, value_enum)]
    pub variant: Option<VariantChoice>,
    /// Relative spectral cutoff (drops singular values below cutoff * s1)
    #[arg(long)]
    pub spectral_cutoff: Option<f64>,
}

fn parse_floats(field: &str, text: &str, expected: &[usize]) -> Result<Vec<f64>, ConfigError> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let parts = parts.map_err(|e| bad(field, format!("expected comma-separated numbers: {e}")))?;
    if !expected.contains(&parts.len()) {
        return Err(bad(field, format!("expected {expected:?} numbers, got {}", parts.len())));
    }
    Ok(parts)
}

impl Overrides {
    pub fn apply(&self, mut doc: ConfigDocument) -> Result<ConfigDocument, ConfigError> {
        if let Some(k) = self.k {
            doc.k = Some(k);
        }
        if let Some(n) = self.n {
            doc.n = Some(n);
        }
        if let Some(m) = self.m {
            doc.m = Some(m);
        }
        if !self.circle.is_empty() || !self.ellipse.is_empty() || !self.kite.is_empty() {
            let mut scatterer = Vec::new();
            for text in &self.circle {
                let v = parse_floats("circle", text, &[3])?;
                scatterer.push(CurveSpec::Circle { center: [v[0], v[1]], radius: v[2] });
            }
            for text in &self.ellipse {
                let v = parse_floats("ellipse", text, &[4])?;
                scatterer.push(CurveSpec::Ellipse { center: [v[0], v[1]], a: v[2], b: v[3] });
            }
            for text in &self.kite {
                let v = parse_floats("kite", text, &[2, 4])?;
                let (a, b) = if v.len() == 4 { (v[2], v[3]) } else { (default_kite_a(), default_kite_b()) };
                scatterer.push(CurveSpec::Kite { center: [v[0], v[1]], a, b });
            }
            doc.scatterer = scatterer;
        }
        if let Some(path) = &self.matrix {
            doc.matrix = Some(path.clone());
        }
        if let Some(text) = &self.grid {
            let v = parse_floats("grid", text, &[5])?;
            doc.grid = Some(GridSpec { x_min: v[0], x_max: v[1], y_min: v[2], y_max: v[3], step: v[4] });
        }
        if let Some(level) = self.noise_level {
            let seed = self.noise_seed.or(doc.noise.map(|n| n.seed)).unwrap_or(0);
            doc.noise = Some(NoiseConfig { level, seed });
        } else if let Some(seed) = self.noise_seed {
            if let Some(noise) = &mut doc.noise {
                noise.seed = seed;
            } else {
                return Err(bad("noise.seed", "set together with a noise level"));
            }
        }
        if let Some(text) = &self.aperture {
            let v = parse_floats("aperture", text, &[2])?;
            doc.aperture = Some(ApertureConfig { theta_lo: v[0], theta_hi: v[1] });
        }
        if let Some(text) = &self.epsilons {
            let parts: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
            doc.epsilon_list =
                Some(parts.map_err(|e| bad("epsilon_list", format!("expected comma-separated numbers: {e}")))?);
        }
        if !self.density_point.is_empty() {
            let mut points = Vec::new();
            for text in &self.density_point {
                let v = parse_floats("density_points", text, &[2])?;
                points.push([v[0], v[1]]);
            }
            doc.density_points = points;
        }
        if let Some(dir) = &self.output_dir {
            doc.output_dir = Some(dir.clone());
        }
        if let Some(variant) = self.variant {
            doc.variant = Some(variant);
        }
        if let Some(cutoff) = self.spectral_cutoff {
            doc.spectral_cutoff = Some(cutoff);
        }
        Ok(doc)
    }
}

/// Fully resolved configuration, echoed verbatim into the metadata record
/// so no default stays hidden.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub k: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub scatterer: Vec<CurveSpec>,
    pub matrix: Option<String>,
    pub grid: GridSpec,
    pub noise: Option<NoiseConfig>,
    pub aperture: Option<ApertureConfig>,
    pub epsilon_list: Vec<f64>,
    pub density_points: Vec<[f64; 2]>,
    pub output_dir: String,
    pub variant: VariantChoice,
    pub spectral_cutoff: Option<f64>,
    pub log_base: u32,
}

/// Validated experiment ready to execute.
#[derive(Debug)]
pub struct Experiment {
    pub scatterer: Option<Scatterer>,
    pub matrix_path: Option<PathBuf>,
    pub k: f64,
    pub n: usize,
    pub m: usize,
    pub explicit_k: bool,
    pub explicit_n: bool,
    pub grid: SamplingGrid,
    pub noise: Option<NoiseSpec>,
    pub aperture: Option<ApertureSpec>,
    pub epsilon_list: Vec<f64>,
    pub density_points: Vec<Vector2<f64>>,
    pub output_dir: PathBuf,
    pub variant: VariantChoice,
    pub spectral_cutoff: Option<f64>,
    pub resolved: ResolvedConfig,
}

pub fn validate(doc: &ConfigDocument) -> Result<Experiment, ConfigError> {
    let k = doc.k.unwrap_or(1.0);
    if !(k > 0.0 && k.is_finite()) {
        return Err(bad("k", format!("must be positive and finite, got {k}")));
    }
    let n = doc.n.unwrap_or(60);
    if n < 2 || !n.is_multiple_of(2) {
        return Err(bad("N", format!("must be even and >= 2 so the direction grid is closed under negation, got {n}")));
    }
    let m = doc.m.unwrap_or(128);
    if m < 16 || !m.is_multiple_of(2) {
        return Err(bad("M", format!("must be even and >= 16, got {m}")));
    }

    let matrix_path = doc.matrix.clone();
    let scatterer = if doc.scatterer.is_empty() {
        if matrix_path.is_none() {
            return Err(bad("scatterer", "at least one component is required unless `matrix` points at a saved far field"));
        }
        None
    } else {
        let mut curves = Vec::with_capacity(doc.scatterer.len());
        for (i, spec) in doc.scatterer.iter().enumerate() {
            curves.push(spec.build(&format!("scatterer[{i}]"))?);
        }
        Some(Scatterer::new(curves).map_err(|e| bad("scatterer", e.to_string()))?)
    };

    let grid_spec = doc.grid.unwrap_or_default();
    let grid = SamplingGrid::new(grid_spec.x_min, grid_spec.x_max, grid_spec.y_min, grid_spec.y_max, grid_spec.step)
        .map_err(|e| bad("grid", e.to_string()))?;

    let noise = match doc.noise {
        Some(cfg) => Some(NoiseSpec::new(cfg.level, cfg.seed).map_err(|e| bad("noise.level", e.to_string()))?),
        None => None,
    };
    let aperture = match doc.aperture {
        Some(cfg) => Some(
            ApertureSpec::new(cfg.theta_lo, cfg.theta_hi).map_err(|e| bad("aperture", e.to_string()))?,
        ),
        None => None,
    };

    let epsilon_list = doc
        .epsilon_list
        .clone()
        .unwrap_or_else(lsm2d_core::sampling::default_epsilon_ladder);
    if epsilon_list.is_empty()
        || epsilon_list.iter().any(|&e| !(e > 0.0 && e.is_finite()))
        || epsilon_list.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(bad("epsilon_list", "must be nonempty, positive, and strictly decreasing"));
    }

    for (i, p) in doc.density_points.iter().enumerate() {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(bad(format!("density_points[{i}]"), "coordinates must be finite"));
        }
    }

    if let Some(cutoff) = doc.spectral_cutoff {
        if !(cutoff > 0.0 && cutoff < 1.0) {
            return Err(bad("spectral_cutoff", format!("must lie in (0, 1), got {cutoff}")));
        }
    }

    let output_dir = doc.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let variant = doc.variant.unwrap_or_default();

    let resolved = ResolvedConfig {
        k,
        n,
        m,
        scatterer: doc.scatterer.clone(),
        matrix: matrix_path.as_ref().map(|p| p.display().to_string()),
        grid: grid_spec,
        noise: doc.noise,
        aperture: doc.aperture,
        epsilon_list: epsilon_list.clone(),
        density_points: doc.density_points.clone(),
        output_dir: output_dir.display().to_string(),
        variant,
        spectral_cutoff: doc.spectral_cutoff,
        log_base: 10,
    };

    Ok(Experiment {
        scatterer,
        matrix_path,
        k,
        n,
        m,
        explicit_k: doc.k.is_some(),
        explicit_n: doc.n.is_some(),
        grid,
        noise,
        aperture,
        epsilon_list,
        density_points: doc.density_points.iter().map(|p| Vector2::new(p[0], p[1])).collect(),
        output_dir,
        variant,
        spectral_cutoff: doc.spectral_cutoff,
        resolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_doc() -> ConfigDocument {
        toml::from_str(
            r#"
            k = 1.0
            N = 60

            [[scatterer]]
            kind = "circle"
            center = [-2.0, 0.0]
            radius = 1.0

            [[scatterer]]
            kind = "circle"
            center = [2.0, 0.0]
            radius = 1.0
            "#,
        )
        .unwrap()
    }

    #[test]
    fn minimal_config_resolves_defaults() {
        let exp = validate(&minimal_doc()).unwrap();
        assert_eq!(exp.m, 128);
        assert_eq!(exp.grid.nx(), 81);
        assert_eq!(exp.epsilon_list.len(), 11);
        assert_eq!(exp.variant, VariantChoice::Both);
        assert_eq!(exp.resolved.log_base, 10);
    }

    #[test]
    fn odd_n_rejected_naming_the_field() {
        let mut doc = minimal_doc();
        doc.n = Some(61);
        let err = validate(&doc).unwrap_err();
        assert_eq!(err.field, "N");
        assert!(err.to_string().contains('N'));
    }

    #[test]
    fn scatterer_errors_carry_component_index() {
        let mut doc = minimal_doc();
        doc.scatterer.push(CurveSpec::Circle { center: [0.0, 0.0], radius: -1.0 });
        let err = validate(&doc).unwrap_err();
        assert_eq!(err.field, "scatterer[2]");
    }

    #[test]
    fn epsilon_list_must_decrease() {
        let mut doc = minimal_doc();
        doc.epsilon_list = Some(vec![1e-3, 1e-2]);
        assert_eq!(validate(&doc).unwrap_err().field, "epsilon_list");
    }

    #[test]
    fn overrides_replace_scatterer_and_fields() {
        let overrides = Overrides {
            k: Some(2.0),
            circle: vec!["0,0,1".into()],
            grid: Some("-1,1,-1,1,0.5".into()),
            noise_level: Some(0.05),
            noise_seed: Some(9),
            ..Default::default()
        };
        let doc = overrides.apply(minimal_doc()).unwrap();
        let exp = validate(&doc).unwrap();
        assert_eq!(exp.k, 2.0);
        assert_eq!(exp.resolved.scatterer.len(), 1);
        assert_eq!(exp.grid.nx(), 5);
        assert_eq!(exp.noise.unwrap().seed, 9);
    }

    #[test]
    fn unknown_fields_rejected() {
        let doc: Result<ConfigDocument, _> = toml::from_str("k = 1.0\nunknown_knob = 3\n");
        assert!(doc.is_err());
    }
}
