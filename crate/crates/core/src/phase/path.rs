use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MIN_SEGMENTS: usize = 16;

type Sampler = dyn Fn(f64) -> Vec<Complex64> + Send + Sync;

/// Closed contour `s ∈ [0, 1] ↦ λ(s)` in a (complex) parameter space.
///
/// `sample(1.0)` returns exactly `sample(0.0)`; the constructor checks that
/// the supplied map closes to within `1e-9` relative so that roundoff in,
/// e.g., `cos(2π)` does not leave a gap.
#[derive(Clone)]
pub struct LoopPath {
    dimension: usize,
    n_segments: usize,
    sampler: Arc<Sampler>,
}

impl fmt::Debug for LoopPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoopPath")
            .field("dimension", &self.dimension)
            .field("n_segments", &self.n_segments)
            .finish_non_exhaustive()
    }
}

impl LoopPath {
    pub fn new<F>(dimension: usize, n_segments: usize, sampler: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<Complex64> + Send + Sync + 'static,
    {
        if n_segments < MIN_SEGMENTS {
            return Err(Error::InvalidInput(format!(
                "a loop needs at least {MIN_SEGMENTS} segments, got {n_segments}"
            )));
        }
        let start = sampler(0.0);
        let end = sampler(1.0);
        if start.len() != dimension || end.len() != dimension {
            return Err(Error::InvalidInput(format!(
                "sampler returned {} coordinates, expected {dimension}",
                start.len()
            )));
        }
        let scale = start.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let gap = start.iter().zip(&end).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if gap > 1e-9 * scale {
            return Err(Error::InvalidInput(format!("loop is not closed (gap {gap:e})")));
        }
        Ok(Self {
            dimension,
            n_segments,
            sampler: Arc::new(sampler),
        })
    }

    /// `center + cos(2πs)·e1 + sin(2πs)·e2`.
    pub fn circle(center: Vec<Complex64>, e1: Vec<Complex64>, e2: Vec<Complex64>, n_segments: usize) -> Result<Self> {
        let dim = center.len();
        if e1.len() != dim || e2.len() != dim {
            return Err(Error::InvalidInput("circle axes must match the center".into()));
        }
        Self::new(dim, n_segments, move |s| {
            let (sn, cs) = (TAU * s).sin_cos();
            (0..dim).map(|k| center[k] + e1[k] * cs + e2[k] * sn).collect()
        })
    }

    /// Loop `R(s) = (r cos 2πs, r sin 2πs, z − iε)` in field space; a
    /// `θ = const` contour of the two-level monopole.
    pub fn azimuthal(r: f64, z: f64, eps: f64, n_segments: usize) -> Result<Self> {
        Self::new(3, n_segments, move |s| {
            let (sn, cs) = (TAU * s).sin_cos();
            vec![
                Complex64::new(r * cs, 0.0),
                Complex64::new(r * sn, 0.0),
                Complex64::new(z, -eps),
            ]
        })
    }

    /// Degenerate loop that stays at one point.
    pub fn constant(point: Vec<Complex64>, n_segments: usize) -> Result<Self> {
        let dim = point.len();
        Self::new(dim, n_segments, move |_| point.clone())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn is_closed(&self) -> bool {
        true
    }

    pub fn with_segments(&self, n_segments: usize) -> Result<Self> {
        if n_segments < MIN_SEGMENTS {
            return Err(Error::InvalidInput(format!(
                "a loop needs at least {MIN_SEGMENTS} segments, got {n_segments}"
            )));
        }
        Ok(Self {
            n_segments,
            ..self.clone()
        })
    }

    pub fn sample(&self, s: f64) -> Vec<Complex64> {
        if s >= 1.0 {
            (self.sampler)(0.0)
        } else {
            (self.sampler)(s)
        }
    }

    /// `n_segments + 1` points; the last repeats the first.
    pub fn points(&self) -> Vec<Vec<Complex64>> {
        self.points_at(self.n_segments)
    }

    pub(crate) fn points_at(&self, n: usize) -> Vec<Vec<Complex64>> {
        (0..=n).map(|j| self.sample(j as f64 / n as f64)).collect()
    }
}
