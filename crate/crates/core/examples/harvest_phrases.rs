//! Harvest the normalized phrases for a word pair, across inflections.

use pairclass::{harvest, CorpusIndex, Morphology, WordPair};

fn main() -> pairclass::Result<()> {
    let index = CorpusIndex::from_documents(&[
        "the mason cut the stone",
        "masons cut stones all day",
        "a stone for the mason",
    ]);
    let morph = Morphology::default();
    let pair = WordPair::new("mason", "stone")?;
    let h = harvest(&index, &morph, &pair, 5000)?;
    println!(
        "{}: {} phrases from {} variant combinations, truncated={}",
        h.report.pair, h.report.phrase_count, h.report.variant_combinations_queried, h.report.truncated
    );
    for p in &h.phrases {
        println!("  {}  (X at {}, Y at {})", p.tokens.join(" "), p.x_pos, p.y_pos);
    }
    Ok(())
}
