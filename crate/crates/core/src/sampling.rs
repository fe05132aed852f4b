//! Linear-sampling indicator functions and Tikhonov sweeps.
//!
//! For a sampling point `z` the right-hand side is the far-field pattern of
//! a point source at `z`, `f_n = e^{iπ/4}/√(8πk) e^{-ik α_n·z}`. With
//! `F = U diag(s) V^H`, `ρ = U^H f`, `μ = V^H f`, the two indicator values
//! are
//!
//! * Colton–Kirsch: `‖g‖² = Σ |ρ_n|²/s_n²` (solves `F g = f`),
//! * Kirsch: `‖g‖² = Σ |μ_n|²/s_n` (solves `(F^*F)^{1/4} g = f`).
//!
//! Neither sum truncates: exposing their blow-up is the point. Only an
//! overflow guard clamps singular values below `s_1 · 1e-140` (never reached
//! by 60x60 double-precision data), and an optional spectral cutoff is
//! available for experiments.

use crate::farfield::{Directions, FarFieldSvd};
use crate::geometry::{Point, SamplingGrid};
use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

use core::f64::consts::{FRAC_PI_4, PI};

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("dimension mismatch: factorization has {0} modes, right-hand side {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero singular value at index {0} with clamping disabled")]
    ZeroSingularValue(usize),
    #[error("spectral cutoff must lie in (0, 1) relative to s_1, got {0}")]
    BadCutoff(f64),
    #[error("regularization parameter must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("epsilon list must be nonempty, positive, and strictly decreasing")]
    BadEpsilonList,
    #[error("at sampling point ({x}, {y}): {source}")]
    AtPoint { x: f64, y: f64, source: Box<SamplingError> },
}

/// Right-hand side of the far-field equation at sampling point `z`.
#[derive(Clone, Debug)]
pub struct RhsVector {
    z: Point,
    k: f64,
    entries: DVector<Complex64>,
}

impl RhsVector {
    pub fn z(&self) -> Point {
        self.z
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn entries(&self) -> &DVector<Complex64> {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// `f_n = e^{iπ/4}/√(8πk) · e^{-ik α_n·z}` over the retained directions.
pub fn rhs_vector(z: Point, k: f64, directions: &Directions) -> RhsVector {
    let kappa = Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), FRAC_PI_4);
    let entries = DVector::from_fn(directions.count(), |n, _| {
        kappa * Complex64::from_polar(1.0, -k * directions.unit(n).dot(&z))
    });
    RhsVector { z, k, entries }
}

/// Guard and experiment knobs for the indicator sums.
#[derive(Clone, Copy, Debug)]
pub struct IndicatorOptions {
    /// Clamp singular values below `floor_rel * s_1` to that floor (guards
    /// `|ρ|²/s²` against overflow). `None` disables clamping, making an
    /// exactly zero singular value an error.
    pub floor_rel: Option<f64>,
    /// Drop terms with `s_n < cutoff_rel * s_1` entirely (off by default;
    /// the indicator formulas have no cutoff).
    pub cutoff_rel: Option<f64>,
}

impl Default for IndicatorOptions {
    fn default() -> Self {
        Self { floor_rel: Some(1e-140), cutoff_rel: None }
    }
}

/// Indicator value `‖g‖²` plus how many terms hit the underflow clamp or the
/// optional cutoff.
#[derive(Clone, Copy, Debug)]
pub struct IndicatorValue {
    pub norm_sq: f64,
    pub clamped: usize,
    pub dropped: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    ColtonKirsch,
    Kirsch,
}

fn indicator_sum(
    svd: &FarFieldSvd,
    f: &RhsVector,
    options: &IndicatorOptions,
    variant: Variant,
) -> Result<IndicatorValue, SamplingError> {
    let n = svd.s.len();
    if f.entries.len() != n {
        return Err(SamplingError::DimensionMismatch(n, f.entries.len()));
    }
    if let Some(c) = options.cutoff_rel {
        // a cutoff of 1 or more would drop even the leading term
        if !(c > 0.0 && c < 1.0) {
            return Err(SamplingError::BadCutoff(c));
        }
    }
    let coeffs = match variant {
        Variant::ColtonKirsch => svd.u.ad_mul(&f.entries),
        Variant::Kirsch => svd.v.ad_mul(&f.entries),
    };
    let s1 = svd.s[0];
    let floor = options.floor_rel.map(|rel| rel * s1);
    let cutoff = options.cutoff_rel.map(|rel| rel * s1);
    let mut sum = 0.0f64;
    let mut clamped = 0usize;
    let mut dropped = 0usize;
    for i in 0..n {
        let s = svd.s[i];
        if let Some(c) = cutoff {
            if s < c {
                dropped += 1;
                continue;
            }
        }
        let s_eff = match floor {
            Some(fl) if s < fl => {
                clamped += 1;
                fl
            }
            _ => s,
        };
        if s_eff <= 0.0 {
            return Err(SamplingError::ZeroSingularValue(i));
        }
        let weight = match variant {
            Variant::ColtonKirsch => s_eff * s_eff,
            Variant::Kirsch => s_eff,
        };
        sum += coeffs[i].norm_sqr() / weight;
    }
    Ok(IndicatorValue { norm_sq: sum, clamped, dropped })
}

/// Colton–Kirsch indicator `Σ |ρ_n|²/s_n²` with `ρ = U^H f`.
pub fn indicator_ck(svd: &FarFieldSvd, f: &RhsVector) -> Result<IndicatorValue, SamplingError> {
    indicator_sum(svd, f, &IndicatorOptions::default(), Variant::ColtonKirsch)
}

pub fn indicator_ck_with(
    svd: &FarFieldSvd,
    f: &RhsVector,
    options: &IndicatorOptions,
) -> Result<IndicatorValue, SamplingError> {
    indicator_sum(svd, f, options, Variant::ColtonKirsch)
}

/// Kirsch indicator `Σ |μ_n|²/s_n` with `μ = V^H f`.
pub fn indicator_kirsch(svd: &FarFieldSvd, f: &RhsVector) -> Result<IndicatorValue, SamplingError> {
    indicator_sum(svd, f, &IndicatorOptions::default(), Variant::Kirsch)
}

pub fn indicator_kirsch_with(
    svd: &FarFieldSvd,
    f: &RhsVector,
    options: &IndicatorOptions,
) -> Result<IndicatorValue, SamplingError> {
    indicator_sum(svd, f, options, Variant::Kirsch)
}

/// Log-indicator fields over a sampling grid: per point, `0.5 log10 ‖g‖²`
/// for both variants, stored row-major (y outer, x inner).
#[derive(Clone, Debug)]
pub struct IndicatorField {
    grid: SamplingGrid,
    values_ck: Vec<f64>,
    values_k: Vec<f64>,
    clamped_ck: usize,
    clamped_k: usize,
}

impl IndicatorField {
    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn values(&self, variant: Variant) -> &[f64] {
        match variant {
            Variant::ColtonKirsch => &self.values_ck,
            Variant::Kirsch => &self.values_k,
        }
    }

    pub fn value_at(&self, ix: usize, iy: usize, variant: Variant) -> f64 {
        self.values(variant)[iy * self.grid.nx() + ix]
    }

    pub fn clamped(&self, variant: Variant) -> usize {
        match variant {
            Variant::ColtonKirsch => self.clamped_ck,
            Variant::Kirsch => self.clamped_k,
        }
    }
}

/// Evaluates both indicators at every grid point.
pub fn sweep(
    svd: &FarFieldSvd,
    grid: &SamplingGrid,
    k: f64,
    directions: &Directions,
) -> Result<IndicatorField, SamplingError> {
    sweep_with(svd, grid, k, directions, &IndicatorOptions::default())
}

pub fn sweep_with(
    svd: &FarFieldSvd,
    grid: &SamplingGrid,
    k: f64,
    directions: &Directions,
    options: &IndicatorOptions,
) -> Result<IndicatorField, SamplingError> {
    let mut values_ck = Vec::with_capacity(grid.len());
    let mut values_k = Vec::with_capacity(grid.len());
    let mut clamped_ck = 0usize;
    let mut clamped_k = 0usize;
    let at = |z: Point, source: SamplingError| SamplingError::AtPoint {
        x: z.x,
        y: z.y,
        source: Box::new(source),
    };
    for z in grid.points() {
        let f = rhs_vector(z, k, directions);
        let ck = indicator_sum(svd, &f, options, Variant::ColtonKirsch).map_err(|e| at(z, e))?;
        let ki = indicator_sum(svd, &f, options, Variant::Kirsch).map_err(|e| at(z, e))?;
        values_ck.push(0.5 * ck.norm_sq.log10());
        values_k.push(0.5 * ki.norm_sq.log10());
        clamped_ck += ck.clamped;
        clamped_k += ki.clamped;
    }
    Ok(IndicatorField { grid: *grid, values_ck, values_k, clamped_ck, clamped_k })
}

/// A strict local minimum of an indicator field.
#[derive(Clone, Copy, Debug)]
pub struct Minimum {
    pub point: Point,
    pub value: f64,
}

/// Minima of one indicator variant, sorted ascending by value, plus the
/// localization contrast `median(all values) - smallest minimum`.
#[derive(Clone, Debug)]
pub struct MinimaReport {
    pub minima: Vec<Minimum>,
    pub contrast: Option<f64>,
}

/// Strict local minima over 8-neighborhoods of interior grid nodes.
pub fn locate_minima(field: &IndicatorField, variant: Variant) -> MinimaReport {
    let grid = field.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let values = field.values(variant);
    let mut minima = Vec::new();
    for iy in 1..ny.saturating_sub(1) {
        for ix in 1..nx.saturating_sub(1) {
            let v = values[iy * nx + ix];
            let mut strict = true;
            'neighbors: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let jx = (ix as i64 + dx) as usize;
                    let jy = (iy as i64 + dy) as usize;
                    if v >= values[jy * nx + jx] {
                        strict = false;
                        break 'neighbors;
                    }
                }
            }
            if strict {
                minima.push(Minimum { point: grid.point(ix, iy), value: v });
            }
        }
    }
    minima.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    let contrast = minima.first().map(|m| median(values) - m.value);
    MinimaReport { minima, contrast }
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Tikhonov-regularized solution of `F g = f` in the SVD basis.
#[derive(Clone, Debug)]
pub struct TikhonovSolution {
    pub g: DVector<Complex64>,
    /// `‖F g - f‖`.
    pub residual: f64,
    /// `‖g‖`.
    pub norm: f64,
}

/// `g = Σ s_n/(s_n²+ε) ρ_n v_n`; residual and norm evaluated in the SVD
/// basis, no matrix-vector products needed.
pub fn tikhonov_solve(
    svd: &FarFieldSvd,
    f: &RhsVector,
    epsilon: f64,
) -> Result<TikhonovSolution, SamplingError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SamplingError::BadEpsilon(epsilon));
    }
    let n = svd.s.len();
    if f.entries.len() != n {
        return Err(SamplingError::DimensionMismatch(n, f.entries.len()));
    }
    let rho = svd.u.ad_mul(&f.entries);
    let mut filtered = DVector::from_element(n, Complex64::ZERO);
    let mut residual_sq = 0.0f64;
    let mut norm_sq = 0.0f64;
    for i in 0..n {
        let s = svd.s[i];
        let denom = s * s + epsilon;
        let filter = s / denom;
        let leak = epsilon / denom;
        filtered[i] = rho[i] * filter;
        norm_sq += (filter * filter) * rho[i].norm_sqr();
        residual_sq += (leak * leak) * rho[i].norm_sqr();
    }
    let g = &svd.v * filtered;
    Ok(TikhonovSolution { g, residual: residual_sq.sqrt(), norm: norm_sq.sqrt() })
}

#[derive(Clone, Copy, Debug)]
pub struct DensityRecord {
    pub epsilon: f64,
    pub residual: f64,
    pub norm: f64,
}

/// Per-ε records of a Tikhonov sweep at a fixed sampling point.
#[derive(Clone, Debug)]
pub struct TikhonovSweep {
    pub z: Point,
    pub records: Vec<DensityRecord>,
}

/// Runs `tikhonov_solve` along a strictly decreasing ε list. The residual is
/// non-increasing and the norm non-decreasing along the sweep; for points
/// outside the obstacle the norm grows without apparent bound while the
/// residual still decays, which is what makes a range test unstable.
pub fn density_experiment(
    svd: &FarFieldSvd,
    z: Point,
    k: f64,
    directions: &Directions,
    epsilons: &[f64],
) -> Result<TikhonovSweep, SamplingError> {
    if epsilons.is_empty()
        || epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite()))
        || epsilons.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(SamplingError::BadEpsilonList);
    }
    let f = rhs_vector(z, k, directions);
    let mut records = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let sol = tikhonov_solve(svd, &f, eps)?;
        records.push(DensityRecord { epsilon: eps, residual: sol.residual, norm: sol.norm });
    }
    Ok(TikhonovSweep { z, records })
}

/// Default ε ladder for the density experiment: decades 1e-2 … 1e-12.
pub fn default_epsilon_ladder() -> Vec<f64> {
    (2..=12).map(|p| 10f64.powi(-p)).collect()
}
