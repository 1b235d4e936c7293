#![allow(dead_code)]

use monocal_core::{normalize, square_samples, BinarySample, Problem, SquareLoss};
use rand::rngs::StdRng;
use rand::Rng;

pub const EXAMPLE: [f64; 15] = [
    44.0, 52.0, 18.0, 14.0, 93.0, 37.0, 96.0, 8.0, 1.0, 95.0, 21.0, 77.0, 46.0, 36.0, 69.0,
];

/// Weight drawn from (0, hi].
pub fn positive_weight(rng: &mut StdRng, hi: f64) -> f64 {
    hi - rng.gen_range(0.0..hi)
}

#[derive(Debug, Clone)]
pub struct SquareInstance {
    pub targets: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SquareInstance {
    pub fn random(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> Self {
        let targets = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        let weights = (0..n).map(|_| positive_weight(rng, 3.0)).collect();
        SquareInstance { targets, weights }
    }

    pub fn scores(&self) -> Vec<f64> {
        (1..=self.targets.len()).map(|i| i as f64).collect()
    }

    pub fn problem(&self) -> Problem<SquareLoss> {
        normalize(square_samples(
            &self.scores(),
            &self.targets,
            Some(&self.weights),
        ))
        .unwrap()
    }

    pub fn prefix(&self, k: usize) -> Problem<SquareLoss> {
        let scores = self.scores();
        normalize(square_samples(
            &scores[..k],
            &self.targets[..k],
            Some(&self.weights[..k]),
        ))
        .unwrap()
    }
}

pub fn random_binary(rng: &mut StdRng, n: usize) -> Vec<BinarySample> {
    let mut probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    probs.sort_by(f64::total_cmp);
    probs
        .into_iter()
        .map(|prob| BinarySample {
            prob,
            label: if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
            weight: positive_weight(rng, 3.0),
        })
        .collect()
}

pub fn ranges<T>(items: &[T], bounds: impl Fn(&T) -> (usize, usize)) -> Vec<(usize, usize)> {
    items.iter().map(bounds).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
