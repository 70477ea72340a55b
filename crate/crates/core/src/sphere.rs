//! Sphere function `Σ x²` over real vectors, used to sanity-check the engine
//! and for benchmarking independent of any dataset.

use rand::Rng;

use crate::cro::Problem;
use crate::operators::{self, OperatorParams};

#[derive(Debug, Clone, Copy)]
pub struct SphereProblem {
    pub dim: usize,
    pub operators: OperatorParams,
}

impl SphereProblem {
    pub fn new(dim: usize, operators: OperatorParams) -> Self {
        assert!(dim > 0);
        SphereProblem { dim, operators }
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl Problem for SphereProblem {
    type Solution = Vec<f64>;

    /// Uniform point in the box `[-1, 1]^dim`.
    fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect()
    }

    fn neighbour<R: Rng + ?Sized>(&self, s: &Vec<f64>, rng: &mut R) -> Vec<f64> {
        operators::neighbour(s, &self.operators, rng)
    }

    fn decompose<R: Rng + ?Sized>(&self, s: &Vec<f64>, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        operators::decomposition(s, &self.operators, rng)
    }

    fn synthesize<R: Rng + ?Sized>(&self, a: &Vec<f64>, b: &Vec<f64>, rng: &mut R) -> Vec<f64> {
        operators::synthesis(a, b, rng)
    }

    fn objective(&self, s: &Vec<f64>) -> f64 {
        sphere(s)
    }
}
