//! Minimum-norm point of a convex hull (Wolfe's algorithm).

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{dot, norm_sq};

const WEIGHT_EPS: f64 = 1e-12;

/// Incremental minimum-norm point over a growing list of points.
///
/// The state keeps the current corral, so adding a point and calling
/// [`MinNormPoint::solve`] again warm-starts from the previous optimum.
#[derive(Debug, Clone)]
pub(crate) struct MinNormPoint {
    points: Vec<Vec<f64>>,
    corral: Vec<usize>,
    weights: Vec<f64>,
    x: Vec<f64>,
}

impl MinNormPoint {
    pub fn new() -> Self {
        Self { points: Vec::new(), corral: Vec::new(), weights: Vec::new(), x: Vec::new() }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.points.iter().any(|q| q.as_slice() == p)
    }

    pub fn push(&mut self, p: Vec<f64>) {
        self.points.push(p);
    }

    pub fn point(&self) -> &[f64] {
        &self.x
    }

    /// Convex weights of the current point, in insertion order.
    #[cfg(test)]
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.points.len()];
        for (&i, &l) in self.corral.iter().zip(&self.weights) {
            w[i] = l;
        }
        w
    }

    /// Runs major cycles until no point improves the current one. Each
    /// affine solve costs one unit of `budget`.
    pub fn solve(&mut self, budget: &mut usize) {
        if self.points.is_empty() {
            return;
        }
        if self.corral.is_empty() {
            let j = (0..self.points.len())
                .min_by(|&a, &b| norm_sq(&self.points[a]).total_cmp(&norm_sq(&self.points[b])))
                .expect("nonempty");
            self.corral = vec![j];
            self.weights = vec![1.0];
            self.x = self.points[j].clone();
        }
        let scale = self.points.iter().map(|p| norm_sq(p)).fold(0.0, f64::max);
        while *budget > 0 {
            let xx = norm_sq(&self.x);
            let (j, best) = (0..self.points.len())
                .map(|j| (j, dot(&self.points[j], &self.x)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            if xx - best <= 1e-12 * scale || self.corral.contains(&j) {
                return;
            }
            self.corral.push(j);
            self.weights.push(0.0);
            if !self.minor_cycles(budget) {
                return;
            }
        }
    }

    /// Moves to the affine minimizer of the corral, dropping points until it
    /// lies inside the hull. False when the corral became affinely
    /// dependent.
    fn minor_cycles(&mut self, budget: &mut usize) -> bool {
        loop {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            let Some(alpha) = self.affine_minimizer() else {
                self.corral.pop();
                self.weights.pop();
                return false;
            };
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                self.weights = alpha;
                self.update_point();
                return true;
            }
            // walk from the current weights towards alpha until one hits 0
            let mut theta = 1.0;
            let mut leaving = 0;
            for (i, (&l, &a)) in self.weights.iter().zip(&alpha).enumerate() {
                if a <= WEIGHT_EPS && l - a > 0.0 {
                    let t = l / (l - a);
                    if t < theta {
                        theta = t;
                        leaving = i;
                    }
                }
            }
            for (l, a) in self.weights.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            self.weights[leaving] = 0.0;
            let mut i = 0;
            while i < self.corral.len() {
                if self.weights[i] <= WEIGHT_EPS {
                    self.corral.remove(i);
                    self.weights.remove(i);
                } else {
                    i += 1;
                }
            }
            let total: f64 = self.weights.iter().sum();
            for l in &mut self.weights {
                *l /= total;
            }
            self.update_point();
        }
    }

    fn update_point(&mut self) {
        let mut x = vec![0.0; self.points[self.corral[0]].len()];
        for (&i, &l) in self.corral.iter().zip(&self.weights) {
            for (xv, pv) in x.iter_mut().zip(&self.points[i]) {
                *xv += l * pv;
            }
        }
        self.x = x;
    }

    /// Solves `min ‖Σ α_i p_i‖` subject to `Σ α_i = 1` over the corral via
    /// the bordered Gram system.
    fn affine_minimizer(&self) -> Option<Vec<f64>> {
        let m = self.corral.len();
        let size = m + 1;
        let mut a = vec![0.0; size * (size + 1)];
        let scale = self.corral.iter().map(|&i| norm_sq(&self.points[i])).fold(0.0, f64::max).max(1e-300);
        for (r, &i) in self.corral.iter().enumerate() {
            for (c, &j) in self.corral.iter().enumerate() {
                a[r * (size + 1) + c] = dot(&self.points[i], &self.points[j]) / scale;
            }
            a[r * (size + 1) + m] = 1.0;
            a[m * (size + 1) + r] = 1.0;
        }
        a[m * (size + 1) + size] = 1.0;
        let sol = solve_augmented(&mut a, size)?;
        Some(sol[..m].to_vec())
    }
}

/// Gaussian elimination with partial pivoting on a row-major `size × (size+1)`
/// augmented matrix.
fn solve_augmented(a: &mut [f64], size: usize) -> Option<Vec<f64>> {
    let w = size + 1;
    for col in 0..size {
        let pivot = (col..size).max_by(|&x, &y| a[x * w + col].abs().total_cmp(&a[y * w + col].abs()))?;
        if a[pivot * w + col].abs() < 1e-13 {
            return None;
        }
        if pivot != col {
            for c in 0..w {
                a.swap(pivot * w + c, col * w + c);
            }
        }
        for row in 0..size {
            if row != col {
                let f = a[row * w + col] / a[col * w + col];
                if f != 0.0 {
                    for c in col..w {
                        a[row * w + c] -= f * a[col * w + c];
                    }
                }
            }
        }
    }
    Some((0..size).map(|i| a[i * w + size] / a[i * w + i]).collect())
}
