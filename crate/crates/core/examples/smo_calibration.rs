//! Train one RBF support vector machine with SMO, then calibrate its
//! decision values into probabilities.

use pairclass::learner::calibrate;
use pairclass::learner::smo::{train_binary, KernelParams};
use pairclass::SparseVector;

fn main() -> pairclass::Result<()> {
    let points = [
        ([0.9, 0.1], true),
        ([1.0, 0.2], true),
        ([0.8, 0.0], true),
        ([0.1, 0.9], false),
        ([0.2, 1.0], false),
        ([0.0, 0.7], false),
    ];
    let vectors: Vec<(SparseVector, bool)> = points.iter().map(|(v, l)| (SparseVector::from_dense(v), *l)).collect();
    let examples: Vec<(&SparseVector, bool)> = vectors.iter().map(|(v, l)| (v, *l)).collect();

    let params = KernelParams { gamma: 1.0, ..Default::default() };
    let model = train_binary(&examples, params)?;
    println!(
        "{} support vectors, bias {:.4}, {} iterations, objective {:.6}, kkt gap {:.2e}",
        model.support_vectors.len(),
        model.bias,
        model.stats.iterations,
        model.stats.objective,
        model.stats.kkt_gap
    );
    let cal = calibrate(&model, &examples)?;
    println!("sigmoid A={:.4} B={:.4} fallback={}", cal.a, cal.b, cal.fallback);
    for probe in [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]] {
        let d = model.decision_value(&SparseVector::from_dense(&probe));
        println!("{probe:?}: decision {d:+.4}, P(positive) {:.4}", cal.probability(d));
    }
    Ok(())
}
