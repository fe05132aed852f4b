//! Pipeline execution: geometry -> far-field data -> degradations -> SVD ->
//! sweeps / density experiments -> plot-ready CSV plus a metadata record.
//!
//! All file writes are atomic (write to a temp file, then rename) and every
//! output byte is a pure function of the resolved configuration and seeds.

use crate::config::Experiment;
use anyhow::{bail, Context, Result};
use lsm2d_core::farfield::{self, FarFieldMatrix, FarFieldSvd};
use lsm2d_core::geometry::DirectionGrid;
use lsm2d_core::linalg::svd_residuals;
use lsm2d_core::sampling::{self, IndicatorOptions, Variant};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Which stages a subcommand wants.
#[derive(Clone, Copy, Debug)]
pub struct Stages {
    pub sweep: bool,
    pub density: bool,
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Checks {
    reciprocity: Option<f64>,
    unitarity: Option<f64>,
    svd_orthonormality_u: f64,
    svd_orthonormality_v: f64,
    svd_reconstruction: f64,
    singular_value_max: f64,
    singular_value_min: f64,
}

#[derive(Serialize)]
struct MinimumRecord {
    x: f64,
    y: f64,
    value: f64,
}

#[derive(Serialize)]
struct MinimaRecord {
    minima: Vec<MinimumRecord>,
    contrast: Option<f64>,
}

#[derive(Serialize)]
struct SweepRecord {
    field_csv: String,
    rows: usize,
    clamped_terms_ck: usize,
    clamped_terms_kirsch: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    minima_ck: Option<MinimaRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    minima_kirsch: Option<MinimaRecord>,
}

#[derive(Serialize)]
struct DensityRecordOut {
    z: [f64; 2],
    csv: String,
    rhs_norm: f64,
    final_residual: f64,
    final_norm: f64,
    norm_growth: f64,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: ToolInfo,
    config: &'a crate::config::ResolvedConfig,
    /// Effective data parameters (they differ from `config` when a matrix
    /// file was loaded).
    data: DataInfo,
    checks: Checks,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    density: Vec<DensityRecordOut>,
}

#[derive(Serialize)]
struct DataInfo {
    source: String,
    k: f64,
    directions: usize,
    provenance: String,
}

/// Runs the selected stages and writes the artifact files; returns the
/// metadata path.
pub fn execute(exp: &Experiment, stages: Stages) -> Result<PathBuf> {
    let matrix = obtain_matrix(exp)?;
    let degraded = degrade(exp, &matrix)?;

    let svd = farfield::svd(&degraded).context("stage svd")?;
    let res = svd_residuals(degraded.entries(), &svd);
    let checks = Checks {
        reciprocity: farfield::check_reciprocity(&degraded).ok(),
        unitarity: farfield::scattering_matrix_unitarity(&degraded).ok(),
        svd_orthonormality_u: res.orthonormality_u,
        svd_orthonormality_v: res.orthonormality_v,
        svd_reconstruction: res.reconstruction,
        singular_value_max: svd.s[0],
        singular_value_min: svd.s[svd.s.len() - 1],
    };

    fs::create_dir_all(&exp.output_dir)
        .with_context(|| format!("creating output directory {}", exp.output_dir.display()))?;

    let sweep = if stages.sweep {
        Some(run_sweep(exp, &degraded, &svd).context("stage sweep")?)
    } else {
        None
    };

    let mut density = Vec::new();
    if stages.density {
        for (i, &z) in exp.density_points.iter().enumerate() {
            density.push(run_density(exp, &degraded, &svd, i, z).context("stage density")?);
        }
    }

    let metadata = Metadata {
        tool: ToolInfo { name: "lsm2d", version: env!("CARGO_PKG_VERSION") },
        config: &exp.resolved,
        data: DataInfo {
            source: exp
                .matrix_path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "synthesized".to_string()),
            k: degraded.k(),
            directions: degraded.n(),
            provenance: degraded.provenance().to_string(),
        },
        checks,
        sweep,
        density,
    };
    let path = exp.output_dir.join("metadata.json");
    let mut text = serde_json::to_string_pretty(&metadata).context("serializing metadata")?;
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Assembles from geometry or loads a saved matrix.
pub fn obtain_matrix(exp: &Experiment) -> Result<FarFieldMatrix> {
    match (&exp.matrix_path, &exp.scatterer) {
        (Some(path), _) => {
            let matrix = farfield::load_matrix(path)
                .with_context(|| format!("stage load: {}", path.display()))?;
            if exp.explicit_k && matrix.k() != exp.k {
                bail!("stage load: config k = {} but {} holds k = {}", exp.k, path.display(), matrix.k());
            }
            if exp.explicit_n && matrix.directions().grid().len() != exp.n {
                bail!(
                    "stage load: config N = {} but {} holds N = {}",
                    exp.n,
                    path.display(),
                    matrix.directions().grid().len()
                );
            }
            Ok(matrix)
        }
        (None, Some(scatterer)) => {
            let grid = DirectionGrid::new(exp.n).expect("validated");
            lsm2d_core::forward::assemble_far_field_matrix(scatterer, exp.k, &grid, exp.m)
                .context("stage forward-assembly")
        }
        (None, None) => bail!("no scatterer and no matrix file; nothing to run"),
    }
}

fn degrade(exp: &Experiment, matrix: &FarFieldMatrix) -> Result<FarFieldMatrix> {
    let mut current = matrix.clone();
    if let Some(noise) = &exp.noise {
        current = farfield::add_noise(&current, noise);
    }
    if let Some(arc) = &exp.aperture {
        current = farfield::restrict_aperture(&current, arc).context("stage aperture")?;
    }
    Ok(current)
}

fn indicator_options(exp: &Experiment) -> IndicatorOptions {
    IndicatorOptions { cutoff_rel: exp.spectral_cutoff, ..IndicatorOptions::default() }
}

fn run_sweep(exp: &Experiment, matrix: &FarFieldMatrix, svd: &FarFieldSvd) -> Result<SweepRecord> {
    let field = sampling::sweep_with(
        svd,
        &exp.grid,
        matrix.k(),
        matrix.directions(),
        &indicator_options(exp),
    )?;

    let mut csv = String::from("x,y,log_gnck,log_gnk\n");
    let ck = field.values(Variant::ColtonKirsch);
    let ki = field.values(Variant::Kirsch);
    let mut row = 0usize;
    for iy in 0..exp.grid.ny() {
        for ix in 0..exp.grid.nx() {
            let p = exp.grid.point(ix, iy);
            csv.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", p.x, p.y, ck[row], ki[row]));
            row += 1;
        }
    }
    let field_path = exp.output_dir.join("field.csv");
    write_atomic(&field_path, csv.as_bytes())?;

    let report = |variant: Variant| {
        let r = sampling::locate_minima(&field, variant);
        MinimaRecord {
            minima: r
                .minima
                .iter()
                .map(|m| MinimumRecord { x: m.point.x, y: m.point.y, value: m.value })
                .collect(),
            contrast: r.contrast,
        }
    };
    let minima_ck = exp.variant.includes_ck().then(|| report(Variant::ColtonKirsch));
    let minima_kirsch = exp.variant.includes_kirsch().then(|| report(Variant::Kirsch));

    let minima_path = exp.output_dir.join("minima.json");
    #[derive(Serialize)]
    struct MinimaFile<'a> {
        #[serde(skip_serializing_if = "Option::is_none")]
        ck: &'a Option<MinimaRecord>,
        #[serde(skip_serializing_if = "Option::is_none")]
        kirsch: &'a Option<MinimaRecord>,
    }
    let mut text = serde_json::to_string_pretty(&MinimaFile { ck: &minima_ck, kirsch: &minima_kirsch })?;
    text.push('\n');
    write_atomic(&minima_path, text.as_bytes())?;

    Ok(SweepRecord {
        field_csv: field_path.display().to_string(),
        rows: row,
        clamped_terms_ck: field.clamped(Variant::ColtonKirsch),
        clamped_terms_kirsch: field.clamped(Variant::Kirsch),
        minima_ck,
        minima_kirsch,
    })
}

fn run_density(
    exp: &Experiment,
    matrix: &FarFieldMatrix,
    svd: &FarFieldSvd,
    index: usize,
    z: nalgebra::Vector2<f64>,
) -> Result<DensityRecordOut> {
    let sweep = sampling::density_experiment(svd, z, matrix.k(), matrix.directions(), &exp.epsilon_list)?;
    let mut csv = String::from("epsilon,residual,norm\n");
    for r in &sweep.records {
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", r.epsilon, r.residual, r.norm));
    }
    let path = exp.output_dir.join(format!("density_{index}.csv"));
    write_atomic(&path, csv.as_bytes())?;

    let first = &sweep.records[0];
    let last = sweep.records.last().expect("validated nonempty");
    Ok(DensityRecordOut {
        z: [z.x, z.y],
        csv: path.display().to_string(),
        rhs_norm: sampling::rhs_vector(z, matrix.k(), matrix.directions()).norm(),
        final_residual: last.residual,
        final_norm: last.norm,
        norm_growth: last.norm / first.norm,
    })
}

/// Write-temp-then-rename so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
