//! Shared inputs for the benchmarks.

use emopair::pairfeat::{build_design_matrix, DesignMatrix, PairVocabulary};
use emopair::simulate::{generate_corpus, PlantedModel};
use emopair::{AnnotatedPost, EmotionPolicy};

pub struct Workload {
    pub posts: Vec<AnnotatedPost>,
    pub vocabulary: PairVocabulary,
    pub matrix: DesignMatrix,
}

/// Corpus of `n` posts drawn from the example planted model.
pub fn workload(n: usize) -> Workload {
    let model = PlantedModel::example(42);
    let posts = generate_corpus(&model, n).expect("example model is valid");
    let vocabulary = model.vocabulary(&posts);
    let matrix = build_design_matrix(&posts, &vocabulary, &EmotionPolicy::default())
        .expect("vocabulary fits corpus");
    Workload {
        posts,
        vocabulary,
        matrix,
    }
}
