//! Dense truncated multivariate polynomials.
//!
//! Monomials are enumerated by total degree (graded), so the truncation of a
//! polynomial to a lower order is a prefix of its coefficient vector.
//! Coefficients are Taylor coefficients: the coefficient of `t^β` is
//! `∂^β p / β!`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::factorial;

#[derive(Debug, Clone)]
pub struct PolySpace {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    /// `degree_start[d]` is the rank of the first monomial of degree `d`;
    /// `degree_start[order + 1] == len`.
    degree_start: Vec<usize>,
    ranks: BTreeMap<Vec<u8>, usize>,
    /// Product table grouped by left factor: `rows[i]..rows[i+1]` indexes
    /// `pairs`, each `(j, k)` meaning `m_i * m_j = m_k`.
    rows: Vec<usize>,
    pairs: Vec<(u32, u32)>,
    /// Per variable: `(src, dst, exponent)` for `∂/∂t_v`.
    diff: Vec<Vec<(u32, u32, f64)>>,
    multiplicity: Vec<f64>,
}

fn compositions(nvars: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, left: usize, slots: usize, out: &mut Vec<Vec<u8>>) {
        if slots == 1 {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=left).rev() {
            prefix.push(first as u8);
            rec(prefix, left - first, slots - 1, out);
            prefix.pop();
        }
    }
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(&mut Vec::with_capacity(nvars), degree, nvars, out);
}

impl PolySpace {
    pub fn new(nvars: usize, order: usize) -> Self {
        let mut monomials = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(monomials.len());
            compositions(nvars, d, &mut monomials);
        }
        degree_start.push(monomials.len());
        let ranks: BTreeMap<Vec<u8>, usize> =
            monomials.iter().enumerate().map(|(k, m)| (m.clone(), k)).collect();
        let degree = |m: &[u8]| m.iter().map(|&e| e as usize).sum::<usize>();

        let mut rows = Vec::with_capacity(monomials.len() + 1);
        let mut pairs = Vec::new();
        let mut sum = vec![0u8; nvars];
        for mi in &monomials {
            rows.push(pairs.len());
            let di = degree(mi);
            for (j, mj) in monomials.iter().enumerate() {
                if di + degree(mj) > order {
                    // graded order: all later monomials have degree >= this one
                    break;
                }
                for v in 0..nvars {
                    sum[v] = mi[v] + mj[v];
                }
                pairs.push((j as u32, ranks[&sum] as u32));
            }
        }
        rows.push(pairs.len());

        let mut diff = vec![Vec::new(); nvars];
        for (k, m) in monomials.iter().enumerate() {
            for v in 0..nvars {
                if m[v] > 0 {
                    let mut lower = m.clone();
                    lower[v] -= 1;
                    diff[v].push((k as u32, ranks[&lower] as u32, m[v] as f64));
                }
            }
        }
        let multiplicity = monomials
            .iter()
            .map(|m| m.iter().map(|&e| factorial(e as usize)).product())
            .collect();

        Self { nvars, order, monomials, degree_start, ranks, rows, pairs, diff, multiplicity }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Number of monomials of degree at most `d`.
    pub fn len_up_to(&self, d: usize) -> usize {
        self.degree_start[d.min(self.order) + 1]
    }

    pub fn monomial(&self, rank: usize) -> &[u8] {
        &self.monomials[rank]
    }

    pub fn rank(&self, exponents: &[u8]) -> Option<usize> {
        self.ranks.get(exponents).copied()
    }

    /// Rank of the monomial obtained by differentiating once per listed
    /// variable (a multiset of variable indices, any order).
    pub fn rank_of_indices(&self, vars: &[usize]) -> Option<usize> {
        let mut e = vec![0u8; self.nvars];
        for &v in vars {
            *e.get_mut(v)? += 1;
        }
        self.rank(&e)
    }

    /// `β!` for the monomial at `rank`: converts Taylor coefficients to
    /// derivative values.
    pub fn multiplicity(&self, rank: usize) -> f64 {
        self.multiplicity[rank]
    }

    pub fn zero(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }

    pub fn constant(&self, c: f64) -> Vec<f64> {
        let mut p = self.zero();
        p[0] = c;
        p
    }

    /// `c + t_v`.
    pub fn variable(&self, v: usize, c: f64) -> Vec<f64> {
        let mut p = self.constant(c);
        if self.order >= 1 {
            p[1 + v] = 1.0;
        }
        p
    }

    /// `out += a * b` (truncated).
    pub fn mul_acc(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for &(j, k) in &self.pairs[self.rows[i]..self.rows[i + 1]] {
                out[k as usize] += ai * b[j as usize];
            }
        }
    }

    pub fn mul(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = self.zero();
        self.mul_acc(a, b, &mut out);
        out
    }

    /// `∂p/∂t_v`. The top-degree coefficients of the result are zero and
    /// carry no information.
    pub fn derivative(&self, p: &[f64], v: usize) -> Vec<f64> {
        let mut out = self.zero();
        for &(src, dst, e) in &self.diff[v] {
            out[dst as usize] += e * p[src as usize];
        }
        out
    }

    /// Plain derivative value `∂^β p(0)` for the multiset of variables.
    pub fn derivative_at_origin(&self, p: &[f64], vars: &[usize]) -> f64 {
        match self.rank_of_indices(vars) {
            Some(r) => p[r] * self.multiplicity[r],
            None => 0.0,
        }
    }

    /// Truncated composition `Σ_k t_k h^k`, where `h` has zero constant term.
    pub fn compose(&self, taylor: &[f64], h: &[f64]) -> Vec<f64> {
        let mut acc = self.constant(*taylor.last().unwrap_or(&0.0));
        for &t in taylor.iter().rev().skip(1) {
            let mut next = self.mul(&acc, h);
            next[0] += t;
            acc = next;
        }
        acc
    }
}
