//! Far-field matrices: factorization, consistency checks, degradations, I/O.
//!
//! The matrix stores raw scattering-amplitude samples `A(α_i, β_j)` in the
//! convention `u_s ~ A e^{ikr}/√r`; row = observation, column = incidence.

use crate::geometry::{DirectionGrid, Point};
use crate::linalg::{self, SvdError};
use crate::stream;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

pub use crate::linalg::ComplexSvd as FarFieldSvd;

/// How the matrix was produced. Degradations are cumulative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub noisy: bool,
    pub restricted: bool,
}

impl Provenance {
    pub const SYNTHETIC: Self = Self { noisy: false, restricted: false };

    fn tag(&self) -> &'static str {
        match (self.noisy, self.restricted) {
            (false, false) => "synthetic",
            (true, false) => "noisy",
            (false, true) => "aperture-restricted",
            (true, true) => "noisy+aperture-restricted",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "synthetic" => Some(Self { noisy: false, restricted: false }),
            "noisy" => Some(Self { noisy: true, restricted: false }),
            "aperture-restricted" => Some(Self { noisy: false, restricted: true }),
            "noisy+aperture-restricted" => Some(Self { noisy: true, restricted: true }),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The directions a matrix is sampled on: the full equispaced grid or a
/// retained subset of it (after aperture restriction). Retained entries keep
/// their original grid indices so noise keying and angle bookkeeping survive
/// restriction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Directions {
    grid: DirectionGrid,
    kept: Option<Vec<usize>>,
}

impl Directions {
    pub fn full(grid: DirectionGrid) -> Self {
        Self { grid, kept: None }
    }

    pub fn count(&self) -> usize {
        match &self.kept {
            Some(k) => k.len(),
            None => self.grid.len(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.kept.is_none()
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    /// Original full-grid index of the `i`-th retained direction.
    pub fn original_index(&self, i: usize) -> usize {
        match &self.kept {
            Some(k) => k[i],
            None => i,
        }
    }

    pub fn angle(&self, i: usize) -> f64 {
        self.grid.angle(self.original_index(i))
    }

    pub fn unit(&self, i: usize) -> Point {
        self.grid.unit(self.original_index(i))
    }

    pub fn kept_indices(&self) -> Option<&[usize]> {
        self.kept.as_deref()
    }
}

impl From<DirectionGrid> for Directions {
    fn from(grid: DirectionGrid) -> Self {
        Self::full(grid)
    }
}

impl From<&DirectionGrid> for Directions {
    fn from(grid: &DirectionGrid) -> Self {
        Self::full(*grid)
    }
}

#[derive(Debug, Error)]
pub enum FarFieldError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix dimension {0} does not match direction count {1}")]
    DimensionMismatch(usize, usize),
    #[error("entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("{0} requires a full-aperture matrix")]
    NeedsFullAperture(&'static str),
    #[error("noise level must be nonnegative and finite, got {0}")]
    BadNoiseLevel(f64),
    #[error("aperture arc must satisfy 0 <= lo < hi <= 2pi, got [{0}, {1}]")]
    BadArc(f64, f64),
    #[error("aperture arc [{lo}, {hi}] retains {kept} direction(s); need at least 2")]
    ArcTooNarrow { lo: f64, hi: f64, kept: usize },
}

/// N x N scattering-amplitude samples with their direction set.
#[derive(Clone, Debug)]
pub struct FarFieldMatrix {
    entries: DMatrix<Complex64>,
    k: f64,
    directions: Directions,
    provenance: Provenance,
}

impl FarFieldMatrix {
    /// Wraps freshly synthesized samples on a full direction grid.
    pub fn synthetic(
        entries: DMatrix<Complex64>,
        k: f64,
        grid: DirectionGrid,
    ) -> Result<Self, FarFieldError> {
        Self::from_parts(entries, k, Directions::full(grid), Provenance::SYNTHETIC)
    }

    pub fn from_parts(
        entries: DMatrix<Complex64>,
        k: f64,
        directions: Directions,
        provenance: Provenance,
    ) -> Result<Self, FarFieldError> {
        if entries.nrows() != entries.ncols() {
            return Err(FarFieldError::NotSquare(entries.nrows(), entries.ncols()));
        }
        if entries.nrows() != directions.count() {
            return Err(FarFieldError::DimensionMismatch(entries.nrows(), directions.count()));
        }
        for j in 0..entries.ncols() {
            for i in 0..entries.nrows() {
                let z = entries[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(FarFieldError::NonFinite(i, j));
                }
            }
        }
        Ok(Self { entries, k, directions, provenance })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn directions(&self) -> &Directions {
        &self.directions
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Singular value decomposition of the far-field matrix.
pub fn svd(f: &FarFieldMatrix) -> Result<FarFieldSvd, SvdError> {
    linalg::jacobi_svd(f.entries())
}

/// Discrete reciprocity residual: max over (i, j) of
/// `|F[i,j] - F[(j+N/2) mod N, (i+N/2) mod N]|`, the sampled form of
/// `A(α, β) = A(-β, -α)`.
pub fn check_reciprocity(f: &FarFieldMatrix) -> Result<f64, FarFieldError> {
    if !f.directions.is_full() {
        return Err(FarFieldError::NeedsFullAperture("check_reciprocity"));
    }
    let n = f.n();
    let half = n / 2;
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let partner = f.entries[((j + half) % n, (i + half) % n)];
            worst = worst.max((f.entries[(i, j)] - partner).norm());
        }
    }
    Ok(worst)
}

/// Energy-conservation residual `max |S^H S - I|` of the discrete scattering
/// matrix `S = I + c (2π/N) F`. In the `u_s ~ A e^{ikr}/√r` convention the
/// partial-wave scattering coefficients are `1 + 2 R_n` while the far-field
/// operator has eigenvalues `2π sqrt(2/(πk)) e^{-iπ/4} R_n`, which fixes
/// `c = e^{iπ/4} sqrt(k/(2π))`.
pub fn scattering_matrix_unitarity(f: &FarFieldMatrix) -> Result<f64, FarFieldError> {
    if !f.directions.is_full() {
        return Err(FarFieldError::NeedsFullAperture("scattering_matrix_unitarity"));
    }
    let n = f.n();
    let c = Complex64::from_polar(
        (f.k / core::f64::consts::TAU).sqrt(),
        core::f64::consts::FRAC_PI_4,
    );
    let weight = c * Complex64::new(core::f64::consts::TAU / n as f64, 0.0);
    let mut s = f.entries.clone() * weight;
    for i in 0..n {
        s[(i, i)] += Complex64::ONE;
    }
    let shs = s.adjoint() * &s;
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let id = if i == j { Complex64::ONE } else { Complex64::ZERO };
            worst = worst.max((shs[(i, j)] - id).norm());
        }
    }
    Ok(worst)
}

/// Relative complex Gaussian noise, reproducible and order-independent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(level: f64, seed: u64) -> Result<Self, FarFieldError> {
        if !(level >= 0.0 && level.is_finite()) {
            return Err(FarFieldError::BadNoiseLevel(level));
        }
        Ok(Self { level, seed })
    }
}

/// Perturbs every entry as `F[i,j] (1 + level (ξ1 + i ξ2)/√2)` with the
/// normal pair keyed by `(seed, i, j)` in original grid indices.
pub fn add_noise(f: &FarFieldMatrix, spec: &NoiseSpec) -> FarFieldMatrix {
    if spec.level == 0.0 {
        return f.clone();
    }
    let n = f.n();
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    let mut entries = f.entries.clone();
    for j in 0..n {
        let oj = f.directions.original_index(j) as u64;
        for i in 0..n {
            let oi = f.directions.original_index(i) as u64;
            let (xi1, xi2) = stream::normal_pair(spec.seed, oi, oj);
            let factor = Complex64::new(1.0 + spec.level * xi1 * inv_sqrt2, spec.level * xi2 * inv_sqrt2);
            entries[(i, j)] *= factor;
        }
    }
    FarFieldMatrix {
        entries,
        k: f.k,
        directions: f.directions.clone(),
        provenance: Provenance { noisy: true, ..f.provenance },
    }
}

/// Angular arc `[theta_lo, theta_hi)` applied to both incidence and
/// observation directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApertureSpec {
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl ApertureSpec {
    pub fn new(theta_lo: f64, theta_hi: f64) -> Result<Self, FarFieldError> {
        let ok = theta_lo.is_finite()
            && theta_hi.is_finite()
            && theta_lo >= 0.0
            && theta_lo < theta_hi
            && theta_hi <= core::f64::consts::TAU;
        if !ok {
            return Err(FarFieldError::BadArc(theta_lo, theta_hi));
        }
        Ok(Self { theta_lo, theta_hi })
    }

    /// Membership test in index space with an index snap of 1e-9, so arc
    /// endpoints that coincide with grid angles are resolved half-open
    /// regardless of rounding in `2πn/N`.
    fn keeps(&self, grid: &DirectionGrid, index: usize) -> bool {
        let delta = core::f64::consts::TAU / grid.len() as f64;
        let x = index as f64;
        x >= self.theta_lo / delta - 1e-9 && x < self.theta_hi / delta - 1e-9
    }
}

/// Keeps the rows and columns whose directions fall inside the arc. Returns
/// the input unchanged when the arc keeps everything.
pub fn restrict_aperture(f: &FarFieldMatrix, spec: &ApertureSpec) -> Result<FarFieldMatrix, FarFieldError> {
    let keep: Vec<usize> = (0..f.n())
        .filter(|&i| spec.keeps(f.directions.grid(), f.directions.original_index(i)))
        .collect();
    if keep.len() == f.n() {
        return Ok(f.clone());
    }
    if keep.len() < 2 {
        return Err(FarFieldError::ArcTooNarrow {
            lo: spec.theta_lo,
            hi: spec.theta_hi,
            kept: keep.len(),
        });
    }
    let m = keep.len();
    let entries = DMatrix::from_fn(m, m, |i, j| f.entries[(keep[i], keep[j])]);
    let kept_original: Vec<usize> = keep.iter().map(|&i| f.directions.original_index(i)).collect();
    Ok(FarFieldMatrix {
        entries,
        k: f.k,
        directions: Directions { grid: *f.directions.grid(), kept: Some(kept_original) },
        provenance: Provenance { restricted: true, ..f.provenance },
    })
}

#[derive(Debug, Error)]
pub enum MatrixIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("header: {0}")]
    Header(String),
    #[error("expected {expected} entry lines for N={n}, found {got}")]
    Dimension { expected: usize, got: usize, n: usize },
    #[error("loaded matrix invalid: {0}")]
    Invalid(#[from] FarFieldError),
}

/// Writes the self-describing text format: one header line
/// (`lsm2d-farfield N=.. k=.. provenance=..`, plus `base_n`/`kept` for
/// restricted matrices), then N*N `re im` lines in row-major order at 17
/// significant digits.
pub fn save_matrix(f: &FarFieldMatrix, path: &Path) -> Result<(), MatrixIoError> {
    let mut text = String::new();
    text.push_str(&format!(
        "lsm2d-farfield N={} k={:.16e} provenance={}",
        f.n(),
        f.k(),
        f.provenance
    ));
    if let Some(kept) = f.directions.kept_indices() {
        let list: Vec<String> = kept.iter().map(|i| i.to_string()).collect();
        text.push_str(&format!(" base_n={} kept={}", f.directions.grid().len(), list.join(",")));
    }
    text.push('\n');
    for i in 0..f.n() {
        for j in 0..f.n() {
            let z = f.entries[(i, j)];
            text.push_str(&format!("{:.16e} {:.16e}\n", z.re, z.im));
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(text.as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_matrix(path: &Path) -> Result<FarFieldMatrix, MatrixIoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| MatrixIoError::Header("empty file".into()))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("lsm2d-farfield") {
        return Err(MatrixIoError::Header("missing 'lsm2d-farfield' magic".into()));
    }
    let mut n: Option<usize> = None;
    let mut k: Option<f64> = None;
    let mut provenance: Option<Provenance> = None;
    let mut base_n: Option<usize> = None;
    let mut kept: Option<Vec<usize>> = None;
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| MatrixIoError::Header(format!("malformed token '{tok}'")))?;
        match key {
            "N" => n = Some(value.parse().map_err(|e| MatrixIoError::Header(format!("N: {e}")))?),
            "k" => k = Some(value.parse().map_err(|e| MatrixIoError::Header(format!("k: {e}")))?),
            "provenance" => {
                provenance = Some(
                    Provenance::from_tag(value)
                        .ok_or_else(|| MatrixIoError::Header(format!("unknown provenance '{value}'")))?,
                )
            }
            "base_n" => base_n = Some(value.parse().map_err(|e| MatrixIoError::Header(format!("base_n: {e}")))?),
            "kept" => {
                let parsed: Result<Vec<usize>, _> = value.split(',').map(|s| s.parse()).collect();
                kept = Some(parsed.map_err(|e| MatrixIoError::Header(format!("kept: {e}")))?);
            }
            other => return Err(MatrixIoError::Header(format!("unknown key '{other}'"))),
        }
    }
    let n = n.ok_or_else(|| MatrixIoError::Header("missing N".into()))?;
    let k = k.ok_or_else(|| MatrixIoError::Header("missing k".into()))?;
    let provenance = provenance.ok_or_else(|| MatrixIoError::Header("missing provenance".into()))?;

    let mut entries = DMatrix::from_element(n, n, Complex64::ZERO);
    let mut count = 0usize;
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 2;
        if line.trim().is_empty() {
            continue;
        }
        if count >= n * n {
            return Err(MatrixIoError::Dimension { expected: n * n, got: count + 1, n });
        }
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .ok_or_else(|| MatrixIoError::Parse { line: line_no, reason: "missing real part".into() })?
            .parse()
            .map_err(|e| MatrixIoError::Parse { line: line_no, reason: format!("real part: {e}") })?;
        let im: f64 = parts
            .next()
            .ok_or_else(|| MatrixIoError::Parse { line: line_no, reason: "missing imaginary part".into() })?
            .parse()
            .map_err(|e| MatrixIoError::Parse { line: line_no, reason: format!("imaginary part: {e}") })?;
        if parts.next().is_some() {
            return Err(MatrixIoError::Parse { line: line_no, reason: "trailing tokens".into() });
        }
        entries[(count / n, count % n)] = Complex64::new(re, im);
        count += 1;
    }
    if count != n * n {
        return Err(MatrixIoError::Dimension { expected: n * n, got: count, n });
    }

    let grid_n = base_n.unwrap_or(n);
    let grid = DirectionGrid::new(grid_n)
        .map_err(|e| MatrixIoError::Header(format!("direction grid: {e}")))?;
    let directions = match kept {
        Some(list) => {
            if list.len() != n {
                return Err(MatrixIoError::Header(format!(
                    "kept list has {} entries, expected N={n}",
                    list.len()
                )));
            }
            if list.iter().any(|&i| i >= grid_n) || list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(MatrixIoError::Header("kept indices must be strictly increasing and < base_n".into()));
            }
            Directions { grid, kept: Some(list) }
        }
        None => {
            if provenance.restricted {
                return Err(MatrixIoError::Header("aperture-restricted matrix needs base_n/kept".into()));
            }
            Directions::full(grid)
        }
    };
    Ok(FarFieldMatrix::from_parts(entries, k, directions, provenance)?)
}
