//! Solution-space operators: random initial solutions, single-element
//! neighbours, two-child decomposition and uniform synthesis.
//!
//! Perturbation adds zero-mean Gaussian noise whose *variance* is
//! [`OperatorParams::gaussian_variance`]. Perturbed values are not clamped.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::slfn::NetworkConfig;
use crate::structure::{Encoding, SolutionStructure};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    pub gaussian_variance: f64,
    /// Per-element perturbation probability during decomposition.
    pub decomp_perturb_prob: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams {
            gaussian_variance: 0.1,
            decomp_perturb_prob: 0.5,
        }
    }
}

impl OperatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_variance > 0.0 && self.gaussian_variance.is_finite()) {
            return Err(Error::config(format!(
                "operators.gaussian_variance must be positive, got {}",
                self.gaussian_variance
            )));
        }
        if !(0.0..=1.0).contains(&self.decomp_perturb_prob) {
            return Err(Error::config(format!(
                "operators.decomp_perturb_prob must lie in [0, 1], got {}",
                self.decomp_perturb_prob
            )));
        }
        Ok(())
    }

    fn noise(&self) -> Normal<f64> {
        Normal::new(0.0, self.gaussian_variance.sqrt()).expect("validated variance")
    }
}

/// Linearly maps a container onto `[-1, 1]` (min to -1, max to +1). A
/// container whose elements are all equal becomes all zeros.
pub fn scale_to_unit_range(container: &mut [f64]) {
    let (lo, hi) = container
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if container.is_empty() {
        return;
    }
    if hi > lo {
        for e in container.iter_mut() {
            *e = 2.0 * (*e - lo) / (hi - lo) - 1.0;
        }
    } else {
        container.fill(0.0);
    }
}

/// Overwrites every element with a uniform draw on `[0, 1)` and rescales
/// each container independently onto `[-1, 1]`.
pub fn randomize<E: Encoding, R: Rng + ?Sized>(e: &mut E, rng: &mut R) {
    let containers = e.containers();
    let values = e.values_mut();
    for r in containers {
        let c = &mut values[r];
        for v in c.iter_mut() {
            *v = rng.random::<f64>();
        }
        scale_to_unit_range(c);
    }
}

/// Fresh random network for `cfg`.
pub fn initial_gen<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> SolutionStructure {
    let mut s = SolutionStructure::zeros(cfg.n0, cfg.n1, cfg.n2);
    randomize(&mut s, rng);
    s
}

/// Copy of `s` with one uniformly chosen element perturbed.
pub fn neighbour<E: Encoding, R: Rng + ?Sized>(s: &E, params: &OperatorParams, rng: &mut R) -> E {
    let mut out = s.clone();
    perturb_one(&mut out, params, rng);
    out
}

fn perturb_one<E: Encoding, R: Rng + ?Sized>(e: &mut E, params: &OperatorParams, rng: &mut R) {
    let values = e.values_mut();
    let i = rng.random_range(0..values.len());
    values[i] += params.noise().sample(rng);
}

/// Two independently perturbed copies of `s`. Each element of each child is
/// perturbed with probability `decomp_perturb_prob`; a child left untouched
/// gets one neighbour perturbation instead.
pub fn decomposition<E: Encoding, R: Rng + ?Sized>(
    s: &E,
    params: &OperatorParams,
    rng: &mut R,
) -> (E, E) {
    let first = decompose_child(s, params, rng);
    let second = decompose_child(s, params, rng);
    (first, second)
}

fn decompose_child<E: Encoding, R: Rng + ?Sized>(s: &E, params: &OperatorParams, rng: &mut R) -> E {
    let noise = params.noise();
    let mut child = s.clone();
    let mut changed = false;
    for v in child.values_mut() {
        if rng.random_bool(params.decomp_perturb_prob) {
            *v += noise.sample(rng);
            changed = true;
        }
    }
    if !changed {
        perturb_one(&mut child, params, rng);
    }
    child
}

/// Child taking each element from `a` or `b` with equal probability.
///
/// # Panics
///
/// If the parents differ in length or container layout.
pub fn synthesis<E: Encoding, R: Rng + ?Sized>(a: &E, b: &E, rng: &mut R) -> E {
    assert_eq!(
        a.containers(),
        b.containers(),
        "synthesis parents differ in shape"
    );
    let mut child = a.clone();
    for (c, &other) in child.values_mut().iter_mut().zip(b.values()) {
        if rng.random_bool(0.5) {
            *c = other;
        }
    }
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    fn changed(a: &[f64], b: &[f64]) -> usize {
        a.iter()
            .zip(b)
            .filter(|(x, y)| x.to_bits() != y.to_bits())
            .count()
    }

    #[test]
    fn scaling_examples() {
        let mut c = vec![2.0, 4.0, 6.0];
        scale_to_unit_range(&mut c);
        assert_eq!(c, vec![-1.0, 0.0, 1.0]);
        let mut single = vec![0.37];
        scale_to_unit_range(&mut single);
        assert_eq!(single, vec![0.0]);
        let mut flat = vec![3.0, 3.0];
        scale_to_unit_range(&mut flat);
        assert_eq!(flat, vec![0.0, 0.0]);
    }

    #[test]
    fn initial_gen_hits_both_ends() {
        let cfg = NetworkConfig::new(4, 5, 3);
        let s = initial_gen(&cfg, &mut rng());
        for r in s.containers() {
            let c = &s.values()[r];
            assert!(c.iter().all(|v| (-1.0..=1.0).contains(v)));
            assert!(c.contains(&-1.0));
            assert!(c.contains(&1.0));
        }
    }

    #[test]
    fn initial_gen_single_output_bias_is_zero() {
        let cfg = NetworkConfig::new(2, 3, 1);
        let s = initial_gen(&cfg, &mut rng());
        assert_eq!(s.b2(), &[0.0]);
    }

    #[test]
    fn neighbour_changes_one_element() {
        let mut r = rng();
        let s = initial_gen(&NetworkConfig::new(4, 5, 3), &mut r);
        for _ in 0..100 {
            let n = neighbour(&s, &OperatorParams::default(), &mut r);
            assert_eq!(changed(s.values(), n.values()), 1);
        }
    }

    #[test]
    fn neighbour_with_vanishing_variance_is_identity() {
        let params = OperatorParams {
            gaussian_variance: 1e-300,
            ..Default::default()
        };
        let s = vec![0.5, -0.25, 1.0];
        let n = neighbour(&s, &params, &mut rng());
        assert_eq!(n, s);
    }

    #[test]
    fn decomposition_fallback_fires_when_probability_is_zero() {
        let params = OperatorParams {
            decomp_perturb_prob: 0.0,
            ..Default::default()
        };
        let s = vec![0.0; 8];
        let (a, b) = decomposition(&s, &params, &mut rng());
        assert_eq!(changed(&s, &a), 1);
        assert_eq!(changed(&s, &b), 1);
    }

    #[test]
    fn decomposition_with_certain_perturbation_changes_all() {
        let params = OperatorParams {
            decomp_perturb_prob: 1.0,
            ..Default::default()
        };
        let s = vec![0.0; 8];
        let (a, b) = decomposition(&s, &params, &mut rng());
        assert_eq!(changed(&s, &a), 8);
        assert_eq!(changed(&s, &b), 8);
    }

    #[test]
    fn synthesis_of_identical_parents() {
        let s = initial_gen(&NetworkConfig::new(3, 2, 2), &mut rng());
        assert_eq!(synthesis(&s, &s, &mut rng()), s);
    }

    #[test]
    #[should_panic(expected = "differ in shape")]
    fn synthesis_rejects_mismatched_parents() {
        synthesis(&vec![1.0, 2.0], &vec![1.0], &mut rng());
    }

    #[test]
    fn validation() {
        assert!(OperatorParams::default().validate().is_ok());
        assert!(OperatorParams {
            gaussian_variance: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(OperatorParams {
            decomp_perturb_prob: 1.1,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
