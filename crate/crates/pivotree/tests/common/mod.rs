//! The standard generated corpus shared by the integration tests.
#![allow(dead_code)]

use std::sync::OnceLock;

use pivotree::{generate_file, CorpusFile, GenParams};
use pivotree_core::{Corpus, SparseVector};

pub const CORPUS_SEED: u64 = 7;
pub const QUERY_SEED: u64 = 1007;

pub struct Standard {
    pub corpus_file: CorpusFile,
    pub query_file: CorpusFile,
    pub corpus: Corpus,
    pub query_ids: Vec<String>,
    pub queries: Vec<SparseVector>,
}

/// 2000 documents over a 5000-term vocabulary, mean length 60, plus 100
/// queries drawn from the same distribution with their own seed.
pub fn standard() -> &'static Standard {
    static CELL: OnceLock<Standard> = OnceLock::new();
    CELL.get_or_init(|| {
        let corpus_file = generate_file(&GenParams::new(2000, 5000, 60.0, CORPUS_SEED)).unwrap();
        let mut qp = GenParams::new(100, 5000, 60.0, QUERY_SEED);
        qp.id_prefix = "q".into();
        let query_file = generate_file(&qp).unwrap();
        let corpus = corpus_file.to_corpus().unwrap();
        let (query_ids, queries) =
            query_file.to_queries(corpus.dim(), corpus.vocabulary()).unwrap().into_iter().unzip();
        Standard { corpus_file, query_file, corpus, query_ids, queries }
    })
}
