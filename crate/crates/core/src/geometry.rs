//! Scatterer boundaries and the direction/sampling grids.
//!
//! Curves are smooth closed counterclockwise parametrizations over
//! `t ∈ [0, 2π)`; the outward normal is `(x₂', -x₁')`. Direction grids are
//! index-based so that negating a direction is an exact index shift.

use nalgebra::Vector2;
use thiserror::Error;

pub type Point = Vector2<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("circle radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("ellipse semi-axes must be positive and finite, got ({0}, {1})")]
    BadSemiAxes(f64, f64),
    #[error("kite vertical coefficient must be positive and finite, got {0}")]
    BadKite(f64),
    #[error("scatterer must have at least one component")]
    EmptyScatterer,
    #[error("components {0} and {1} are not disjoint (sampled distance {2:.3e})")]
    Overlapping(usize, usize, f64),
    #[error("direction count {0}: grid must be closed under negation (N even, N >= 2)")]
    BadDirectionCount(usize),
    #[error("sampling grid needs x_min < x_max and y_min < y_max")]
    EmptyRectangle,
    #[error("sampling step must be positive and finite, got {0}")]
    BadStep(f64),
}

/// Shape of a single boundary component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `center + (cos t + a cos 2t - a, b sin t)`; `a = 0.65`, `b = 1.5` is
    /// the usual non-convex benchmark kite.
    Kite { a: f64, b: f64 },
}

/// A smooth closed curve, counterclockwise, with non-vanishing derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryCurve {
    center: Point,
    shape: Shape,
}

impl BoundaryCurve {
    pub fn circle(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(Self { center, shape: Shape::Circle { radius } })
    }

    pub fn ellipse(center: Point, a: f64, b: f64) -> Result<Self, GeometryError> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(GeometryError::BadSemiAxes(a, b));
        }
        Ok(Self { center, shape: Shape::Ellipse { a, b } })
    }

    /// Standard benchmark kite (`a = 0.65`, `b = 1.5`).
    pub fn kite(center: Point) -> Self {
        Self { center, shape: Shape::Kite { a: 0.65, b: 1.5 } }
    }

    /// Kite with custom coefficients. The curve stays regular for any `a`
    /// as long as `b > 0`; large `a` can self-intersect, so stay near the
    /// benchmark values.
    pub fn kite_with(center: Point, a: f64, b: f64) -> Result<Self, GeometryError> {
        if !(b > 0.0 && b.is_finite() && a.is_finite()) {
            return Err(GeometryError::BadKite(b));
        }
        Ok(Self { center, shape: Shape::Kite { a, b } })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Point `x(t)` and derivative `x'(t)` of the parametrization.
    pub fn point(&self, t: f64) -> (Point, Point) {
        let (s, c) = t.sin_cos();
        match self.shape {
            Shape::Circle { radius } => (
                self.center + radius * Vector2::new(c, s),
                radius * Vector2::new(-s, c),
            ),
            Shape::Ellipse { a, b } => (
                self.center + Vector2::new(a * c, b * s),
                Vector2::new(-a * s, b * c),
            ),
            Shape::Kite { a, b } => {
                let (s2, c2) = (2.0 * t).sin_cos();
                (
                    self.center + Vector2::new(c + a * c2 - a, b * s),
                    Vector2::new(-s - 2.0 * a * s2, b * c),
                )
            }
        }
    }

    /// Second derivative `x''(t)`; needed for the diagonal of the
    /// double-layer kernel.
    pub(crate) fn second_derivative(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        match self.shape {
            Shape::Circle { radius } => -radius * Vector2::new(c, s),
            Shape::Ellipse { a, b } => Vector2::new(-a * c, -b * s),
            Shape::Kite { a, b } => {
                let c2 = (2.0 * t).cos();
                Vector2::new(-c - 4.0 * a * c2, -b * s)
            }
        }
    }
}

/// Sound-soft obstacle: one or more pairwise disjoint boundary curves.
#[derive(Clone, Debug)]
pub struct Scatterer {
    components: Vec<BoundaryCurve>,
}

impl Scatterer {
    /// Validates pairwise disjointness by the minimum distance over 256
    /// sampled points per curve (threshold 1e-6).
    pub fn new(components: Vec<BoundaryCurve>) -> Result<Self, GeometryError> {
        if components.is_empty() {
            return Err(GeometryError::EmptyScatterer);
        }
        const SAMPLES: usize = 256;
        let sampled: Vec<Vec<Point>> = components
            .iter()
            .map(|c| {
                (0..SAMPLES)
                    .map(|i| c.point(core::f64::consts::TAU * i as f64 / SAMPLES as f64).0)
                    .collect()
            })
            .collect();
        for i in 0..components.len() {
            for j in (i + 1)..components.len() {
                let mut min_d = f64::INFINITY;
                for p in &sampled[i] {
                    for q in &sampled[j] {
                        min_d = min_d.min((p - q).norm());
                    }
                }
                if min_d <= 1e-6 {
                    return Err(GeometryError::Overlapping(i, j, min_d));
                }
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[BoundaryCurve] {
        &self.components
    }
}

/// `N` equispaced unit directions, `θ_n = 2πn/N`. `N` must be even so the
/// grid is closed under negation: `-α_n = α_{(n+N/2) mod N}` exactly in
/// index space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectionGrid {
    n: usize,
}

impl DirectionGrid {
    pub fn new(n: usize) -> Result<Self, GeometryError> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(GeometryError::BadDirectionCount(n));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, i: usize) -> f64 {
        core::f64::consts::TAU * i as f64 / self.n as f64
    }

    pub fn unit(&self, i: usize) -> Point {
        let (s, c) = self.angle(i).sin_cos();
        Vector2::new(c, s)
    }

    /// Index of `-α_i`.
    pub fn opposite(&self, i: usize) -> usize {
        (i + self.n / 2) % self.n
    }
}

/// Rectangular sampling grid with spacing `step`, points
/// `z = (x_min + i·step, y_min + j·step)` stored row-major (x fastest).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
    nx: usize,
    ny: usize,
}

impl SamplingGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, step: f64) -> Result<Self, GeometryError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(GeometryError::BadStep(step));
        }
        if !(x_min < x_max && y_min < y_max) || !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(GeometryError::EmptyRectangle);
        }
        // Snap so that an extent that is an exact multiple of the step keeps
        // its endpoint despite rounding (8.0/0.1 = 79.999...).
        let count = |span: f64| ((span / step) + 1.0 + 1e-9).floor() as usize;
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            step,
            nx: count(x_max - x_min),
            ny: count(y_max - y_min),
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point {
        Vector2::new(
            self.x_min + ix as f64 * self.step,
            self.y_min + iy as f64 * self.step,
        )
    }

    /// Row-major iteration: y outer, x inner.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.ny).flat_map(move |iy| (0..self.nx).map(move |ix| self.point(ix, iy)))
    }
}
