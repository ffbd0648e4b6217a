//! Ten-fold cross-validation over the forty planted relation pairs.

use pairclass::tasks::synthetic::{family_names, generate, SyntheticConfig};
use pairclass::tasks::{crossval_evaluate, Pipeline};
use pairclass::{Morphology, SvmLearner};

fn main() -> pairclass::Result<()> {
    let task = generate(&SyntheticConfig::default());
    let index = task.index();
    let morph = Morphology::default();
    let learner = SvmLearner::default();
    let pipeline = Pipeline::new(&index, &morph, &learner);
    let result = crossval_evaluate(&task.relations, &family_names(), 10, 0, &pipeline, None)?;
    for item in result.items.iter().filter(|i| !i.correct) {
        println!("miss {} gold={} predicted={}", item.id, item.gold, item.predicted);
    }
    for f in &result.flags {
        println!("flag: {f}");
    }
    println!("accuracy {:.3} (majority {:.3})", result.accuracy, result.baseline);
    Ok(())
}
