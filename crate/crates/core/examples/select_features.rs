//! Expand phrases into wildcard patterns, select the top k*N and build
//! log-frequency vectors.

use pairclass::features::{patterns_of, select_features, vectorize};
use pairclass::{harvest, CorpusIndex, Morphology, WordPair};

fn main() -> pairclass::Result<()> {
    let index = CorpusIndex::from_documents(&[
        "the mason cut the stone",
        "the carpenter cut the wood",
        "the carpenter cut the wood again",
        "a potter shapes the clay",
    ]);
    let morph = Morphology::default();
    let pairs: Vec<WordPair> = ["mason:stone", "carpenter:wood", "potter:clay"]
        .iter()
        .map(|s| s.parse())
        .collect::<pairclass::Result<_>>()?;
    let mut harvested = Vec::new();
    for p in &pairs {
        harvested.push((p.clone(), harvest(&index, &morph, p, 5000)?.phrases));
    }
    if let Some(first) = harvested[0].1.first() {
        println!("{} -> {} patterns", first.tokens.join(" "), patterns_of(first).len());
    }

    let spec = select_features(&harvested, 2);
    println!("selected {} features (k={}, N={})", spec.len(), spec.k, spec.n);
    for (p, s) in spec.patterns.iter().zip(&spec.scores) {
        println!("  {s}  {p}");
    }
    for (pair, phrases) in &harvested {
        let v = vectorize(pair, phrases, &spec);
        println!("{pair}: {:?}", v.weights.entries);
    }
    Ok(())
}
