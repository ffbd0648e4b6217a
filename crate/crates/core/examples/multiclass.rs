//! One-vs-one training over three classes, with coupled probabilities.

use pairclass::learner::smo::KernelParams;
use pairclass::learner::{train, LearnerConfig};
use pairclass::SparseVector;

fn main() -> pairclass::Result<()> {
    let mut data = Vec::new();
    for (label, center) in [("red", [1.0, 0.0, 0.0]), ("green", [0.0, 1.0, 0.0]), ("blue", [0.0, 0.0, 1.0])] {
        for jitter in [0.0, 0.05, -0.05] {
            let v: Vec<f64> = center.iter().map(|c| c + jitter).collect();
            data.push((SparseVector::from_dense(&v), label));
        }
    }
    let examples: Vec<(&SparseVector, &str)> = data.iter().map(|(v, l)| (v, *l)).collect();
    let config = LearnerConfig {
        kernel: KernelParams { gamma: 1.0, ..Default::default() },
        ..Default::default()
    };
    let model = train(&examples, config)?;
    println!("classes {:?}, {} binary models", model.classes, model.binary.len());
    for probe in [[0.9, 0.1, 0.0], [0.1, 0.1, 0.8], [0.5, 0.5, 0.5]] {
        let p = model.predict_proba(&SparseVector::from_dense(&probe));
        let cells: Vec<String> = p.iter().map(|x| format!("{x:.3}")).collect();
        println!("{probe:?} -> {} [{}]", model.classes[model.predict(&SparseVector::from_dense(&probe))], cells.join(", "));
    }
    Ok(())
}
