use alloc::vec::Vec;

use crate::math;
use crate::metric::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Jet,
    FiniteDifference,
}

/// A tensor value at one point, stored densely in row-major order with
/// upper indices first (e.g. `B^i_jkl` at `[i, j, k, l]`).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSample {
    pub name: &'static str,
    pub upper: usize,
    pub lower: usize,
    pub dim: usize,
    pub point: Point,
    pub components: Vec<f64>,
    pub provenance: Provenance,
    /// Per-component error estimates; empty for jet values.
    pub error_estimates: Vec<f64>,
}

impl TensorSample {
    pub fn from_jet(name: &'static str, upper: usize, lower: usize, dim: usize, point: Point, components: Vec<f64>) -> Self {
        debug_assert_eq!(components.len(), dim.pow((upper + lower) as u32));
        Self { name, upper, lower, dim, point, components, provenance: Provenance::Jet, error_estimates: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    pub fn shape(&self) -> Vec<usize> {
        alloc::vec![self.dim; self.rank()]
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    pub fn sup_norm(&self) -> f64 {
        math::max_abs(&self.components)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|v| v.is_finite())
    }

    /// Largest deviation from symmetry under swapping any two lower indices.
    pub fn lower_asymmetry(&self) -> f64 {
        let r = self.rank();
        let mut worst = 0.0_f64;
        let mut idx = alloc::vec![0usize; r];
        for flat in 0..self.components.len() {
            let mut rem = flat;
            for k in (0..r).rev() {
                idx[k] = rem % self.dim;
                rem /= self.dim;
            }
            for a in self.upper..r {
                for b in a + 1..r {
                    let mut sw = idx.clone();
                    sw.swap(a, b);
                    worst = worst.max((self.components[flat] - self.get(&sw)).abs());
                }
            }
        }
        worst
    }
}
