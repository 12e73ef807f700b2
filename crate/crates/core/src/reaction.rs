//! Reaction terms f(x, t) with primitives F(x, t) = ∫₀ᵗ f(x, τ) dτ.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::family::log_grid;
use crate::field::{Point, SymmetricField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionKind {
    /// F = |t|^q
    PurePower,
    /// F = |t|^q + log(1+t²)|t|^{q-2}
    PowerPlusLog,
    /// F = |t|^q + sin(sin t)|t|^{q-1}
    PowerPlusSinSin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionFamily {
    pub kind: ReactionKind,
    /// q(x) is the diagonal of this field.
    pub exponent: SymmetricField,
    pub c1: f64,
    pub c2: f64,
}

/// Where the growth bounds are sampled: ±t for t on this grid.
fn validation_grid() -> Vec<f64> {
    let mut g = log_grid(1e-4, 1e4, 81);
    let neg: Vec<f64> = g.iter().map(|t| -t).collect();
    g.extend(neg);
    g
}

impl ReactionFamily {
    /// Builds the family and checks |f| ≤ c₁|t|^{q-1} and F ≥ c₂|t|^q on a
    /// sampled grid at every point of `points`.
    pub fn new(
        kind: ReactionKind,
        exponent: SymmetricField,
        c1: f64,
        c2: f64,
        points: &[Point],
    ) -> Result<Self> {
        let rf = Self::new_unchecked(kind, exponent, c1, c2)?;
        rf.check_growth(points)?;
        Ok(rf)
    }

    pub fn new_unchecked(
        kind: ReactionKind,
        exponent: SymmetricField,
        c1: f64,
        c2: f64,
    ) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(invalid(format!("growth constants must be positive, got c1={c1}, c2={c2}")));
        }
        Ok(Self {
            kind,
            exponent,
            c1,
            c2,
        })
    }

    pub fn pure_power(q: f64) -> Self {
        Self::new_unchecked(ReactionKind::PurePower, SymmetricField::Constant(q), q, 1.0)
            .expect("positive constants")
    }

    pub fn q_at(&self, x: &Point) -> f64 {
        self.exponent.at(x)
    }

    pub fn check_growth(&self, points: &[Point]) -> Result<()> {
        let grid = validation_grid();
        for x in points {
            let q = self.q_at(x);
            if !(q > 1.0) {
                return Err(Error::Validation(format!("q(x) must exceed 1, got {q} at {x:?}")));
            }
            for &t in &grid {
                let (f, big_f) = self.eval_with_q(q, t);
                let at = t.abs();
                let upper = self.c1 * at.powf(q - 1.0);
                if f.abs() > upper * (1.0 + 1e-12) {
                    return Err(Error::Validation(format!(
                        "(f1) violated: |f({x:?}, {t})| = {} > c1|t|^(q-1) = {upper}",
                        f.abs()
                    )));
                }
                let lower = self.c2 * at.powf(q);
                if big_f < lower * (1.0 - 1e-12) {
                    return Err(Error::Validation(format!(
                        "(f2) violated: F({x:?}, {t}) = {big_f} < c2|t|^q = {lower}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// (f, F) at exponent value q.
    pub fn eval_with_q(&self, q: f64, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (0.0, 0.0);
        }
        let at = t.abs();
        let pow_q = at.powf(q);
        let base_f = q * at.powf(q - 1.0).copysign(t);
        match self.kind {
            ReactionKind::PurePower => (base_f, pow_q),
            ReactionKind::PowerPlusLog => {
                let l = (t * t).ln_1p();
                let pq2 = at.powf(q - 2.0);
                let f = base_f + 2.0 * t / (1.0 + t * t) * pq2 + l * (q - 2.0) * (pq2 / at).copysign(t);
                (f, pow_q + l * pq2)
            }
            ReactionKind::PowerPlusSinSin => {
                let ss = t.sin().sin();
                let pq1 = at.powf(q - 1.0);
                let f = base_f + t.sin().cos() * t.cos() * pq1 + ss * (q - 1.0) * (pq1 / at).copysign(t);
                (f, pow_q + ss * pq1)
            }
        }
    }

    pub fn eval(&self, x: &Point, t: f64) -> (f64, f64) {
        self.eval_with_q(self.q_at(x), t)
    }
}

pub fn eval_reaction(rf: &ReactionFamily, x: &Point, t: f64) -> Result<(f64, f64)> {
    if !t.is_finite() {
        return Err(invalid(format!("t must be finite, got {t}")));
    }
    Ok(rf.eval(x, t))
}
