//! Lemmas and inflected variants, with and without a vocabulary filter.

use pairclass::{CorpusIndex, Morphology};

fn main() {
    let morph = Morphology::default();
    for w in ["stones", "carried", "geese", "running", "levied"] {
        println!("{w:<9} -> {}", morph.lemmatize(w));
    }
    let vocab = CorpusIndex::from_documents(&["she carves wood and carved stone while carving"]);
    for w in ["carve", "mason", "goose"] {
        println!("{w:<6} all: {:?}", morph.variants(w, None).forms);
        println!("{w:<6} attested: {:?}", morph.variants(w, Some(&vocab)).forms);
    }
}
