//! Solve planted analogy questions end to end on a generated corpus.
//!
//! ```text
//! cargo run --release --example synthetic_sat [seed]
//! ```

use pairclass::tasks::synthetic::{generate, SyntheticConfig};
use pairclass::tasks::{evaluate_analogies, Pipeline, RunConfig};
use pairclass::{Morphology, SvmLearner};

fn main() -> pairclass::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let task = generate(&SyntheticConfig { seed, ..Default::default() });
    let index = task.index();
    println!("corpus: {} documents, {} tokens", index.num_documents(), index.total_tokens());

    let morph = Morphology::default();
    let learner = SvmLearner::default();
    let pipeline = Pipeline::new(&index, &morph, &learner);
    let config = RunConfig { seed, ..Default::default() };
    let result = evaluate_analogies(task.questions(), &pipeline, &config)?;

    for (q, item) in task.questions().iter().zip(&result.items) {
        let mark = if item.correct { "ok " } else { "MISS" };
        println!("{mark} {:<22} gold={} predicted={}", q.stem.to_string(), item.gold, item.predicted);
    }
    println!("accuracy {:.3} (random {:.3})", result.accuracy, result.baseline);
    Ok(())
}
