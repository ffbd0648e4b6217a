//! Binary RBF support vector machine trained by sequential minimal
//! optimization.
//!
//! The dual problem solved is
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each iteration picks the maximal violating pair (i in I_up maximizing
//! -y G, j in I_low minimizing it) and solves the two-variable
//! subproblem analytically. Iteration stops once the violation
//! `m(a) - M(a)` is below the tolerance.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseVector;

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_GAMMA: f64 = 0.01;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub gamma: f64,
    pub c: f64,
    pub tolerance: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            gamma: DEFAULT_GAMMA,
            c: DEFAULT_C,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("C", self.c), ("tolerance", self.tolerance)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `exp(-gamma * |u - v|^2)` from precomputed squared norms.
pub fn rbf(u: &SparseVector, u_sq: f64, v: &SparseVector, v_sq: f64, gamma: f64) -> f64 {
    let dist = (u_sq + v_sq - 2.0 * u.dot(v)).max(0.0);
    (-gamma * dist).exp()
}

pub fn kernel(u: &SparseVector, v: &SparseVector, gamma: f64) -> f64 {
    rbf(u, u.norm_sq(), v, v.norm_sq(), gamma)
}

/// Row-major dense kernel matrix over the training set.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn rbf(xs: &[&SparseVector], gamma: f64) -> Self {
        let n = xs.len();
        let norms: Vec<f64> = xs.iter().map(|x| x.norm_sq()).collect();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
            for j in 0..i {
                let k = rbf(xs[i], norms[i], xs[j], norms[j], gamma);
                values[i * n + j] = k;
                values[j * n + i] = k;
            }
        }
        KernelMatrix { n, values }
    }

    pub fn from_dense(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * n);
        KernelMatrix { n, values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Result of the dual optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision values are `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Final maximal KKT violation `m(a) - M(a)`.
    pub kkt_gap: f64,
}

/// Dual objective `1/2 a'Qa - e'a`.
pub fn dual_objective(k: &KernelMatrix, y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k.get(i, j);
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

/// Maximal KKT violation of `alpha`, recomputed from scratch.
pub fn kkt_violation(k: &KernelMatrix, y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let n = alpha.len();
    let grad: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * k.get(i, j) * alpha[j]).sum::<f64>() - 1.0)
        .collect();
    let mut m = f64::NEG_INFINITY;
    let mut big_m = f64::INFINITY;
    for t in 0..n {
        let v = -y[t] * grad[t];
        if in_up(y[t], alpha[t], c) {
            m = m.max(v);
        }
        if in_low(y[t], alpha[t], c) {
            big_m = big_m.min(v);
        }
    }
    (m - big_m).max(0.0)
}

#[inline]
fn in_up(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

#[inline]
fn in_low(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// Solve the SVM dual for labels `y` in {-1, +1}.
pub fn solve_dual(k: &KernelMatrix, y: &[f64], c: f64, tolerance: f64) -> DualSolution {
    let n = y.len();
    assert_eq!(k.len(), n);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let mut iterations = 0;
    let mut gap;

    loop {
        let mut i = usize::MAX;
        let mut m = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut big_m = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(y[t], alpha[t], c) && v > m {
                m = v;
                i = t;
            }
            if in_low(y[t], alpha[t], c) && v < big_m {
                big_m = v;
                j = t;
            }
        }
        gap = m - big_m;
        if i == usize::MAX || j == usize::MAX || gap < tolerance || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let (kii, kjj, kij) = (k.get(i, i), k.get(j, j), k.get(i, j));
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (kii + kjj - 2.0 * kij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (kii + kjj - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        if di == 0.0 && dj == 0.0 {
            // no progress possible on the most violating pair
            break;
        }
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k.get(t, i) * di + y[j] * k.get(t, j) * dj);
        }
    }
    if iterations >= max_iter {
        log::warn!("SMO stopped at the iteration limit ({max_iter}) with gap {gap:e}");
    }

    let rho = compute_rho(y, &alpha, &grad, c);
    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
    DualSolution {
        alpha,
        rho,
        objective,
        iterations,
        kkt_gap: gap.max(0.0),
    }
}

fn compute_rho(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    pub vector: SparseVector,
    /// `alpha_i * y_i`.
    pub coef: f64,
    norm_sq: f64,
}

impl SupportVector {
    pub fn new(vector: SparseVector, coef: f64) -> Self {
        let norm_sq = vector.norm_sq();
        SupportVector {
            vector,
            coef,
            norm_sq,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverStats {
    pub iterations: usize,
    pub objective: f64,
    pub kkt_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    pub support_vectors: Vec<SupportVector>,
    pub bias: f64,
    pub params: KernelParams,
    pub stats: SolverStats,
}

fn cmp_vectors(a: &SparseVector, b: &SparseVector) -> Ordering {
    for (x, y) in a.entries.iter().zip(&b.entries) {
        let o = x.0.cmp(&y.0).then_with(|| x.1.total_cmp(&y.1));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.entries.len().cmp(&b.entries.len())
}

/// Train on `(vector, is_positive)` examples.
///
/// Examples are put in a canonical order first, so the model does not
/// depend on the order they are given in.
pub fn train_binary(examples: &[(&SparseVector, bool)], params: KernelParams) -> Result<BinaryModel> {
    params.validate()?;
    let pos = examples.iter().filter(|e| e.1).count();
    if pos == 0 || pos == examples.len() {
        return Err(Error::DegenerateTraining(format!(
            "binary training needs both classes ({pos} positive of {})",
            examples.len()
        )));
    }
    let mut ordered: Vec<(&SparseVector, bool)> = examples.to_vec();
    ordered.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| cmp_vectors(a.0, b.0)));

    let xs: Vec<&SparseVector> = ordered.iter().map(|e| e.0).collect();
    let y: Vec<f64> = ordered.iter().map(|e| if e.1 { 1.0 } else { -1.0 }).collect();
    let k = KernelMatrix::rbf(&xs, params.gamma);
    let sol = solve_dual(&k, &y, params.c, params.tolerance);

    let support_vectors = sol
        .alpha
        .iter()
        .zip(&ordered)
        .zip(&y)
        .filter(|((a, _), _)| **a > 0.0)
        .map(|((a, e), yi)| SupportVector::new(e.0.clone(), a * yi))
        .collect();
    Ok(BinaryModel {
        support_vectors,
        bias: -sol.rho,
        params,
        stats: SolverStats {
            iterations: sol.iterations,
            objective: sol.objective,
            kkt_gap: sol.kkt_gap,
        },
    })
}

impl BinaryModel {
    /// `sum_i alpha_i y_i K(s_i, x) + bias`.
    pub fn decision_value(&self, x: &SparseVector) -> f64 {
        let x_sq = x.norm_sq();
        let sum: f64 = self
            .support_vectors
            .iter()
            .map(|sv| sv.coef * rbf(&sv.vector, sv.norm_sq, x, x_sq, self.params.gamma))
            .sum();
        sum + self.bias
    }
}
