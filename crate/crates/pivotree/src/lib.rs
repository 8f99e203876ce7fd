//! File formats, index persistence, synthetic corpora and evaluation output
//! for [`pivotree_core`].

pub mod corpus_file;
pub mod error;
pub mod index_file;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use corpus_file::{parse_corpus, CorpusFile, CorpusFormat, Records};
pub use error::{Error, Result};
pub use index_file::{corpus_fingerprint, IndexBody, IndexFile};
pub use pipeline::{build_index, resolve_query, run_eval, search_index, write_eval_outputs, EvalOutputs, IndexType};
pub use synth::{generate, generate_file, GenParams};
