//! Forward pass and fitness of a single-hidden-layer feedforward network.
//!
//! Both layers use the logistic sigmoid. Fitness is the weighted sum
//! `alpha * nmse + beta * percent_error` and is minimised.

use crate::data::Portion;
use crate::structure::SolutionStructure;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    /// Input neurons (attribute count).
    pub n0: usize,
    /// Hidden neurons.
    pub n1: usize,
    /// Output neurons (class count).
    pub n2: usize,
    /// Weight of the NMSE term.
    pub alpha: f64,
    /// Weight of the misclassification term.
    pub beta: f64,
}

impl NetworkConfig {
    pub const DEFAULT_HIDDEN: usize = 5;
    pub const DEFAULT_ALPHA: f64 = 1.0;
    pub const DEFAULT_BETA: f64 = 0.7;

    pub fn new(n0: usize, n1: usize, n2: usize) -> Self {
        NetworkConfig {
            n0,
            n1,
            n2,
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.n1 == 0 || self.n2 == 0 {
            return Err(Error::config("network layer sizes must be positive"));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!(
                    "network.{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn matches(&self, s: &SolutionStructure) -> bool {
        s.dims() == (self.n0, self.n1, self.n2)
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Computes the network output for one input pattern.
///
/// # Panics
///
/// If `pattern.len()` differs from the structure's input width.
pub fn forward(s: &SolutionStructure, pattern: &[f64]) -> Vec<f64> {
    let (_, n1, n2) = s.dims();
    let mut hidden = vec![0.0; n1];
    let mut out = vec![0.0; n2];
    forward_into(s, pattern, &mut hidden, &mut out);
    out
}

/// Allocation-free forward pass; `hidden` and `out` are scratch/output
/// buffers of length n1 and n2.
pub fn forward_into(s: &SolutionStructure, pattern: &[f64], hidden: &mut [f64], out: &mut [f64]) {
    let (n0, n1, n2) = s.dims();
    assert_eq!(
        pattern.len(),
        n0,
        "pattern width does not match the network input layer"
    );
    debug_assert_eq!(hidden.len(), n1);
    debug_assert_eq!(out.len(), n2);

    hidden.copy_from_slice(s.b1());
    let w1 = s.w1();
    for (m, &x) in pattern.iter().enumerate() {
        let row = &w1[m * n1..(m + 1) * n1];
        for (h, &w) in hidden.iter_mut().zip(row) {
            *h += w * x;
        }
    }
    for h in hidden.iter_mut() {
        *h = sigmoid(*h);
    }

    out.copy_from_slice(s.b2());
    let w2 = s.w2();
    for (p, &h) in hidden.iter().enumerate() {
        let row = &w2[p * n2..(p + 1) * n2];
        for (o, &w) in out.iter_mut().zip(row) {
            *o += w * h;
        }
    }
    for o in out.iter_mut() {
        *o = sigmoid(*o);
    }
}

/// Normalised mean squared error, scaled by `100 / (n2 * |S|)`.
///
/// Both slices are row-major `|S| × n2`.
pub fn nmse(outputs: &[f64], targets: &[f64], n2: usize) -> f64 {
    assert!(n2 > 0, "n2 must be positive");
    assert_eq!(
        outputs.len(),
        targets.len(),
        "outputs and targets differ in shape"
    );
    assert!(!outputs.is_empty(), "nmse of an empty sample set");
    assert_eq!(outputs.len() % n2, 0, "ragged output matrix");
    let samples = outputs.len() / n2;
    let sum: f64 = outputs
        .iter()
        .zip(targets)
        .map(|(c, r)| (r - c) * (r - c))
        .sum();
    100.0 / (n2 * samples) as f64 * sum
}

/// Index of the largest output; ties go to the lowest index.
pub fn classify(output: &[f64]) -> usize {
    assert!(!output.is_empty(), "cannot classify an empty output vector");
    let mut best = 0;
    for (i, &v) in output.iter().enumerate().skip(1) {
        if v > output[best] {
            best = i;
        }
    }
    best
}

pub fn percent_error(predictions: &[usize], labels: &[usize]) -> f64 {
    assert_eq!(
        predictions.len(),
        labels.len(),
        "prediction and label counts differ"
    );
    assert!(!labels.is_empty(), "percent error of an empty sample set");
    let correct = predictions
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    100.0 * (1.0 - correct as f64 / labels.len() as f64)
}

/// Both fitness components of a network on one data portion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub nmse: f64,
    pub percent_error: f64,
}

impl Evaluation {
    pub fn fitness(&self, cfg: &NetworkConfig) -> f64 {
        cfg.alpha * self.nmse + cfg.beta * self.percent_error
    }
}

/// Evaluates `s` on every sample of `portion` in a single pass.
pub fn evaluate(s: &SolutionStructure, portion: &Portion) -> Evaluation {
    let (n0, n1, n2) = s.dims();
    assert_eq!(
        portion.n_attributes(),
        n0,
        "portion width does not match the network"
    );
    assert_eq!(
        portion.n_classes(),
        n2,
        "portion class count does not match the network"
    );
    assert!(!portion.is_empty(), "cannot evaluate on an empty portion");

    let mut hidden = vec![0.0; n1];
    let mut out = vec![0.0; n2];
    let mut squared = 0.0;
    let mut correct = 0usize;
    for i in 0..portion.len() {
        forward_into(s, portion.input(i), &mut hidden, &mut out);
        squared += out
            .iter()
            .zip(portion.target(i))
            .map(|(c, r)| (r - c) * (r - c))
            .sum::<f64>();
        if classify(&out) == portion.label(i) {
            correct += 1;
        }
    }
    let samples = portion.len();
    Evaluation {
        nmse: 100.0 / (n2 * samples) as f64 * squared,
        percent_error: 100.0 * (1.0 - correct as f64 / samples as f64),
    }
}

/// Composite fitness `alpha * nmse + beta * percent_error`.
pub fn fitness(s: &SolutionStructure, portion: &Portion, cfg: &NetworkConfig) -> f64 {
    evaluate(s, portion).fitness(cfg)
}

/// Class predicted for every sample of `portion`.
pub fn predict(s: &SolutionStructure, portion: &Portion) -> Vec<usize> {
    let (_, n1, n2) = s.dims();
    let mut hidden = vec![0.0; n1];
    let mut out = vec![0.0; n2];
    (0..portion.len())
        .map(|i| {
            forward_into(s, portion.input(i), &mut hidden, &mut out);
            classify(&out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn portion(inputs: &[&[f64]], labels: &[usize], n2: usize) -> Portion {
        Portion::from_rows(
            inputs
                .iter()
                .map(|r| r.to_vec())
                .zip(labels.iter().copied()),
            n2,
        )
    }

    #[test]
    fn zero_network_outputs_half() {
        let s = SolutionStructure::zeros(3, 4, 2);
        assert_eq!(forward(&s, &[0.3, -2.0, 7.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn scalar_network() {
        let s = SolutionStructure::from_parts(&[vec![1.0]], &[vec![1.0]], &[0.0], &[0.0]).unwrap();
        let out = forward(&s, &[0.0]);
        // sigma(sigma(0)) = sigma(0.5)
        assert_relative_eq!(out[0], 1.0 / (1.0 + (-0.5f64).exp()), max_relative = 1e-15);
        assert_relative_eq!(out[0], 0.622_459_331_201_854_6, max_relative = 1e-15);
    }

    #[test]
    #[should_panic(expected = "pattern width")]
    fn forward_rejects_wrong_width() {
        let s = SolutionStructure::zeros(2, 2, 2);
        forward(&s, &[1.0]);
    }

    #[test]
    fn nmse_examples() {
        assert_eq!(nmse(&[0.2, 0.8], &[0.2, 0.8], 2), 0.0);
        assert_eq!(nmse(&[0.0], &[1.0], 1), 100.0);
        assert_eq!(nmse(&[0.5, 0.5, 0.5, 0.5], &[1.0, 0.0, 0.0, 1.0], 2), 25.0);
    }

    #[test]
    #[should_panic(expected = "empty")]
    fn nmse_rejects_empty() {
        nmse(&[], &[], 1);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&[0.1, 0.9, 0.3]), 1);
        assert_eq!(classify(&[0.5, 0.5]), 0);
        for hot in 0..4 {
            let mut row = vec![0.0; 4];
            row[hot] = 1.0;
            assert_eq!(classify(&row), hot);
        }
    }

    #[test]
    fn percent_error_examples() {
        assert_eq!(percent_error(&[0, 1, 2], &[0, 1, 2]), 0.0);
        assert_eq!(percent_error(&[0, 1, 2, 0], &[0, 1, 2, 2]), 25.0);
        assert_eq!(percent_error(&[1, 1], &[0, 0]), 100.0);
    }

    #[test]
    fn fitness_weighting() {
        let e = Evaluation {
            nmse: 2.0,
            percent_error: 10.0,
        };
        let cfg = NetworkConfig::new(1, 1, 1);
        assert_relative_eq!(e.fitness(&cfg), 9.0, max_relative = 1e-15);
        let pure = NetworkConfig {
            alpha: 0.0,
            beta: 1.0,
            ..cfg
        };
        assert_eq!(e.fitness(&pure), 10.0);
    }

    #[test]
    fn evaluate_matches_components() {
        let s = SolutionStructure::from_parts(
            &[vec![2.0, -1.0], vec![-3.0, 0.5]],
            &[vec![1.0, -1.0], vec![-2.0, 2.0]],
            &[0.1, -0.2],
            &[0.0, 0.3],
        )
        .unwrap();
        let p = portion(&[&[0.0, 1.0], &[1.0, 0.0], &[0.5, 0.5]], &[0, 1, 1], 2);
        let outputs: Vec<f64> = (0..3).flat_map(|i| forward(&s, p.input(i))).collect();
        let targets: Vec<f64> = (0..3).flat_map(|i| p.target(i).to_vec()).collect();
        let preds: Vec<usize> = outputs.chunks(2).map(classify).collect();
        let e = evaluate(&s, &p);
        assert_relative_eq!(e.nmse, nmse(&outputs, &targets, 2), max_relative = 1e-12);
        assert_eq!(e.percent_error, percent_error(&preds, &[0, 1, 1]));
        assert_eq!(predict(&s, &p), preds);
    }

    #[test]
    fn config_validation() {
        assert!(NetworkConfig::new(4, 5, 3).validate().is_ok());
        assert!(NetworkConfig {
            alpha: 1.5,
            ..NetworkConfig::new(4, 5, 3)
        }
        .validate()
        .is_err());
        assert!(NetworkConfig::new(4, 0, 3).validate().is_err());
    }
}
