//! Closed-form coefficient fields: exponents p(x,y), q(x) and the Robin weight β(x).

use serde::{Deserialize, Serialize};

/// A point of ℝ¹ or ℝ². One-dimensional points keep the second coordinate at 0.
pub type Point = [f64; 2];

pub fn distance(x: &Point, y: &Point) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
}

/// A field over pairs of points that is symmetric by construction.
/// The single-point value `at(x)` is the diagonal `eval(x, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricField {
    Constant(f64),
    /// `base + slope * (Σx + Σy) / 2`
    Affine { base: f64, slope: f64 },
    /// `base + amplitude * exp(-(|x-c|² + |y-c|²) / width²)`
    Bump {
        base: f64,
        amplitude: f64,
        center: Point,
        width: f64,
    },
}

impl SymmetricField {
    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        match *self {
            SymmetricField::Constant(v) => v,
            SymmetricField::Affine { base, slope } => {
                base + slope * 0.5 * ((x[0] + y[0]) + (x[1] + y[1]))
            }
            SymmetricField::Bump {
                base,
                amplitude,
                center,
                width,
            } => {
                let rx = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                let ry = (y[0] - center[0]).powi(2) + (y[1] - center[1]).powi(2);
                let r2 = rx + ry;
                base + amplitude * (-r2 / (width * width)).exp()
            }
        }
    }

    pub fn at(&self, x: &Point) -> f64 {
        self.eval(x, x)
    }

    pub fn constant_value(&self) -> Option<f64> {
        match *self {
            SymmetricField::Constant(v) => Some(v),
            _ => None,
        }
    }

    /// (min, max) over all pairs drawn from `points`.
    pub fn range_over(&self, points: &[Point]) -> (f64, f64) {
        if let Some(v) = self.constant_value() {
            return (v, v);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in points {
            for y in points {
                let v = self.eval(x, y);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// (min, max) of the diagonal `at(x)` over `points`.
    pub fn diagonal_range(&self, points: &[Point]) -> (f64, f64) {
        points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            let v = self.at(x);
            (lo.min(v), hi.max(v))
        })
    }
}
