//! Sigmoid calibration of decision values.
//!
//! Fits `P(positive | d) = 1 / (1 + exp(A d + B))` by Newton's method with
//! backtracking on the cross-entropy against smoothed targets
//! `(N+ + 1) / (N+ + 2)` and `1 / (N- + 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITER: usize = 100;
const MIN_STEP: f64 = 1e-10;
const SIGMA: f64 = 1e-12;
const GRAD_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub a: f64,
    pub b: f64,
    /// Set when the fit did not converge and the fixed sigmoid
    /// `A = -1, B = 0` is used instead.
    pub fallback: bool,
}

impl Calibration {
    pub const FALLBACK: Calibration = Calibration {
        a: -1.0,
        b: 0.0,
        fallback: true,
    };

    pub fn probability(&self, decision: f64) -> f64 {
        let f = decision * self.a + self.b;
        if f >= 0.0 {
            let e = (-f).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + f.exp())
        }
    }
}

/// Fit a sigmoid to decision values and binary labels.
pub fn fit_sigmoid(decisions: &[f64], positive: &[bool]) -> Result<Calibration> {
    assert_eq!(decisions.len(), positive.len());
    let prior1 = positive.iter().filter(|&&p| p).count() as f64;
    let prior0 = positive.len() as f64 - prior1;
    if prior1 == 0.0 || prior0 == 0.0 {
        return Err(Error::DegenerateTraining(
            "calibration needs both classes".into(),
        ));
    }
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();

    let objective = |a: f64, b: f64| -> f64 {
        decisions
            .iter()
            .zip(&t)
            .map(|(&d, &ti)| {
                let f = d * a + b;
                if f >= 0.0 {
                    ti * f + (1.0 + (-f).exp()).ln()
                } else {
                    (ti - 1.0) * f + (1.0 + f.exp()).ln()
                }
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let mut fval = objective(a, b);
    let mut converged = false;

    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
        for (&d, &ti) in decisions.iter().zip(&t) {
            let f = d * a + b;
            let (p, q) = if f >= 0.0 {
                let e = (-f).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += d * d * d2;
            h22 += d2;
            h21 += d * d2;
            let d1 = ti - p;
            g1 += d * d1;
            g2 += d1;
        }
        if g1.abs() < GRAD_EPS && g2.abs() < GRAD_EPS {
            converged = true;
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < MIN_STEP {
            // no descent left at machine precision; the current point is the optimum
            converged = true;
            break;
        }
    }

    if !converged {
        log::warn!("sigmoid calibration did not converge in {MAX_ITER} iterations; using A=-1, B=0");
        return Ok(Calibration::FALLBACK);
    }
    Ok(Calibration {
        a,
        b,
        fallback: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separated_values() {
        let d = [2.0, 1.5, 1.0, -1.0, -1.2, -3.0];
        let y = [true, true, true, false, false, false];
        let cal = fit_sigmoid(&d, &y).unwrap();
        assert!(!cal.fallback);
        assert!(cal.a < 0.0);
        for (&di, &yi) in d.iter().zip(&y) {
            let p = cal.probability(di);
            if yi {
                assert!(p >= 0.5);
            } else {
                assert!(p <= 0.5);
            }
        }
        assert!(cal.probability(0.5) < cal.probability(0.6));
    }

    #[test]
    fn two_point_fit_hits_smoothed_targets() {
        let cal = fit_sigmoid(&[0.01, -0.01], &[true, false]).unwrap();
        assert!((cal.probability(0.01) - 2.0 / 3.0).abs() < 1e-4);
        assert!((cal.probability(-0.01) - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn constant_decisions_give_smoothed_prior() {
        let d = [0.3; 10];
        let y = [true, true, true, false, false, false, false, false, false, false];
        let cal = fit_sigmoid(&d, &y).unwrap();
        let (np, nn) = (3.0, 7.0);
        let prior = (np * (np + 1.0) / (np + 2.0) + nn / (nn + 2.0)) / (np + nn);
        // only A*0.3 + B is identified
        assert!((cal.probability(0.3) - prior).abs() < 1e-4, "{}", cal.probability(0.3));
    }

    #[test]
    fn random_labels_concentrate_near_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 2000;
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        let prior = y.iter().filter(|&&p| p).count() as f64 / n as f64;
        let cal = fit_sigmoid(&d, &y).unwrap();
        let mean = d.iter().map(|&x| cal.probability(x)).sum::<f64>() / n as f64;
        assert!((mean - prior).abs() < 0.1);
    }

    #[test]
    fn probability_is_stable_in_tails() {
        let cal = Calibration { a: -50.0, b: 0.0, fallback: false };
        assert!(cal.probability(100.0) > 0.0 && cal.probability(100.0) <= 1.0);
        assert!(cal.probability(-100.0) >= 0.0);
        assert!(cal.probability(-100.0).is_finite());
    }

    #[test]
    fn one_class_rejected() {
        assert!(fit_sigmoid(&[1.0, 2.0], &[true, true]).is_err());
    }
}
