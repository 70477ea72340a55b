//! The "solution structure": every weight and bias of a single-hidden-layer
//! network, stored as one flat buffer split into four containers.

use std::ops::Range;

use crate::{Error, Result};

/// Real-valued encodings made of one or more independent containers.
///
/// Operators treat the encoding as the flat concatenation of all containers;
/// the initial generator additionally rescales each container on its own.
pub trait Encoding: Clone {
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];
    /// Index ranges of the containers, in order, covering `values()`.
    fn containers(&self) -> Vec<Range<usize>>;
}

impl Encoding for Vec<f64> {
    fn values(&self) -> &[f64] {
        self
    }

    fn values_mut(&mut self) -> &mut [f64] {
        self
    }

    fn containers(&self) -> Vec<Range<usize>> {
        std::iter::once(0..self.len()).collect()
    }
}

/// Weights and biases of an `n0 -> n1 -> n2` network.
///
/// Layout of the flat buffer: `w1` (n0×n1, row-major by input neuron), then
/// `w2` (n1×n2, row-major by hidden neuron), then `b1` (n1), then `b2` (n2).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionStructure {
    n0: usize,
    n1: usize,
    n2: usize,
    params: Vec<f64>,
}

impl SolutionStructure {
    pub fn zeros(n0: usize, n1: usize, n2: usize) -> Self {
        assert!(n0 > 0 && n1 > 0 && n2 > 0, "layer sizes must be positive");
        SolutionStructure {
            n0,
            n1,
            n2,
            params: vec![0.0; n0 * n1 + n1 * n2 + n1 + n2],
        }
    }

    /// Builds a structure from its four parts. `w1[m][p]` connects input `m`
    /// to hidden `p`; `w2[p][q]` connects hidden `p` to output `q`.
    pub fn from_parts(w1: &[Vec<f64>], w2: &[Vec<f64>], b1: &[f64], b2: &[f64]) -> Result<Self> {
        let n0 = w1.len();
        let n1 = b1.len();
        let n2 = b2.len();
        if n0 == 0 || n1 == 0 || n2 == 0 {
            return Err(Error::config("every layer needs at least one neuron"));
        }
        if w2.len() != n1 {
            return Err(Error::Dimension {
                expected: n1,
                actual: w2.len(),
            });
        }
        let mut s = Self::zeros(n0, n1, n2);
        for (m, row) in w1.iter().enumerate() {
            if row.len() != n1 {
                return Err(Error::Dimension {
                    expected: n1,
                    actual: row.len(),
                });
            }
            s.w1_mut()[m * n1..(m + 1) * n1].copy_from_slice(row);
        }
        for (p, row) in w2.iter().enumerate() {
            if row.len() != n2 {
                return Err(Error::Dimension {
                    expected: n2,
                    actual: row.len(),
                });
            }
            s.w2_mut()[p * n2..(p + 1) * n2].copy_from_slice(row);
        }
        s.b1_mut().copy_from_slice(b1);
        s.b2_mut().copy_from_slice(b2);
        Ok(s)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n0, self.n1, self.n2)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    fn ranges(&self) -> [Range<usize>; 4] {
        let w1 = self.n0 * self.n1;
        let w2 = w1 + self.n1 * self.n2;
        let b1 = w2 + self.n1;
        [0..w1, w1..w2, w2..b1, b1..self.params.len()]
    }

    pub fn w1(&self) -> &[f64] {
        &self.params[self.ranges()[0].clone()]
    }

    pub fn w2(&self) -> &[f64] {
        &self.params[self.ranges()[1].clone()]
    }

    pub fn b1(&self) -> &[f64] {
        &self.params[self.ranges()[2].clone()]
    }

    pub fn b2(&self) -> &[f64] {
        &self.params[self.ranges()[3].clone()]
    }

    pub fn w1_mut(&mut self) -> &mut [f64] {
        let r = self.ranges()[0].clone();
        &mut self.params[r]
    }

    pub fn w2_mut(&mut self) -> &mut [f64] {
        let r = self.ranges()[1].clone();
        &mut self.params[r]
    }

    pub fn b1_mut(&mut self) -> &mut [f64] {
        let r = self.ranges()[2].clone();
        &mut self.params[r]
    }

    pub fn b2_mut(&mut self) -> &mut [f64] {
        let r = self.ranges()[3].clone();
        &mut self.params[r]
    }

    /// Weight from input `m` to hidden `p`.
    pub fn w1_at(&self, m: usize, p: usize) -> f64 {
        self.w1()[m * self.n1 + p]
    }

    /// Weight from hidden `p` to output `q`.
    pub fn w2_at(&self, p: usize, q: usize) -> f64 {
        self.w2()[p * self.n2 + q]
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }
}

impl Encoding for SolutionStructure {
    fn values(&self) -> &[f64] {
        &self.params
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn containers(&self) -> Vec<Range<usize>> {
        self.ranges().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn containers_partition_buffer() {
        let s = SolutionStructure::zeros(4, 5, 3);
        let ranges = s.containers();
        assert_eq!(ranges.len(), 4);
        assert_eq!(ranges[0].len(), 20);
        assert_eq!(ranges[1].len(), 15);
        assert_eq!(ranges[2].len(), 5);
        assert_eq!(ranges[3].len(), 3);
        assert_eq!(ranges[3].end, s.len());
        for w in ranges.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
    }

    #[test]
    fn from_parts_indexing() {
        let s = SolutionStructure::from_parts(
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            &[vec![7.0], vec![8.0]],
            &[9.0, 10.0],
            &[11.0],
        )
        .unwrap();
        assert_eq!(s.dims(), (3, 2, 1));
        assert_eq!(s.w1_at(2, 0), 5.0);
        assert_eq!(s.w1_at(0, 1), 2.0);
        assert_eq!(s.w2_at(1, 0), 8.0);
        assert_eq!(s.b1(), &[9.0, 10.0]);
        assert_eq!(s.b2(), &[11.0]);
    }

    #[test]
    fn from_parts_rejects_ragged() {
        let err = SolutionStructure::from_parts(
            &[vec![1.0, 2.0], vec![3.0]],
            &[vec![1.0], vec![1.0]],
            &[0.0, 0.0],
            &[0.0],
        );
        assert!(matches!(
            err,
            Err(Error::Dimension {
                expected: 2,
                actual: 1
            })
        ));
    }
}
