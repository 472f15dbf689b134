//! Deterministic sample sets used to compare forms and fields pointwise.

use crate::expr::Chart;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Default size of a sample set.
pub const DEFAULT_SAMPLES: usize = 100;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        SampleSet { points }
    }

    /// The documented default: `n` Halton points in the chart's sample box.
    pub fn halton(chart: &Chart, n: usize) -> Self {
        let boxes = chart.sample_box();
        let points = (1..=n)
            .map(|k| {
                boxes
                    .iter()
                    .enumerate()
                    .map(|(d, (lo, hi))| lo + (hi - lo) * radical_inverse(k as u64, PRIMES[d % PRIMES.len()]))
                    .collect()
            })
            .collect();
        SampleSet { points }
    }

    pub fn default_for(chart: &Chart) -> Self {
        Self::halton(chart, DEFAULT_SAMPLES)
    }

    /// Uniform points in the chart's sample box from a named seed.
    pub fn uniform(chart: &Chart, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let boxes = chart.sample_box();
        let points = (0..n)
            .map(|_| boxes.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect())
            .collect();
        SampleSet { points }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn take(&self, n: usize) -> Self {
        SampleSet {
            points: self.points.iter().take(n).cloned().collect(),
        }
    }

    /// Each point extended by every value in `extra` (Cartesian product).
    pub fn product(&self, extra: &[f64]) -> Self {
        let points = self
            .points
            .iter()
            .flat_map(|p| {
                extra.iter().map(move |e| {
                    let mut q = p.clone();
                    q.push(*e);
                    q
                })
            })
            .collect();
        SampleSet { points }
    }
}

impl<'a> IntoIterator for &'a SampleSet {
    type Item = &'a Vec<f64>;
    type IntoIter = std::slice::Iter<'a, Vec<f64>>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

fn radical_inverse(mut k: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % b) as f64 * inv;
        k /= b;
        inv /= base as f64;
    }
    out
}

/// Seeded random number generator used for every random start and tangent
/// vector in the crate (ChaCha8 seeded through `seed_from_u64`).
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points on the unit sphere `S^{dim-1}` in `R^dim`.
pub fn sphere_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| random_unit(&mut rng, dim)).collect()
}

pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}
