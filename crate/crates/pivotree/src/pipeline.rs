//! The build, search and eval flows behind the command-line tool.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pivotree_core::{
    build_ball_tree, build_tree, mip_search, run_sweep, search_tree, BoundKind, BoundVariant, BuildConfig, Corpus,
    EvalReport, SearchOutcome, SparseVector, SweepConfig,
};

use crate::corpus_file::CorpusFile;
use crate::error::{Error, Result};
use crate::index_file::{IndexBody, IndexFile};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexType {
    Mta,
    Mip,
}

/// Builds an index over `corpus`. `default_bound` is stored in the header
/// and used by `search` when no bound is requested; ball trees ignore it.
pub fn build_index(
    corpus: &Corpus,
    index_type: IndexType,
    cfg: &BuildConfig,
    default_bound: BoundKind,
) -> Result<IndexFile> {
    Ok(match index_type {
        IndexType::Mta => IndexFile::mta(build_tree(corpus, cfg)?, corpus, default_bound),
        IndexType::Mip => {
            cfg.validate()?;
            IndexFile::mip(build_ball_tree(corpus, cfg.leaf_capacity, cfg.rng_seed)?, corpus)
        }
    })
}

/// Turns a query string into a unit vector in the corpus space.
///
/// A string equal to a document id selects that document's vector. A string
/// made only of `index:weight` tokens is read as a weighted vector. Anything
/// else is text: each token counts once (or `term:count` counts `count` times)
/// and is weighted with `vocabulary`, unknown terms dropped.
pub fn resolve_query(
    query: &str,
    corpus: &Corpus,
    vocabulary: Option<&pivotree_core::Vocabulary>,
) -> Result<SparseVector> {
    let query = query.trim();
    if let Some(pos) = corpus.position(query) {
        return Ok(corpus.vector(pos).clone());
    }
    let tokens: Vec<&str> = query.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(Error::Usage("query is empty".into()));
    }
    let weighted: Option<Vec<(u32, f64)>> = tokens
        .iter()
        .map(|t| {
            let (i, w) = t.split_once(':')?;
            Some((i.parse().ok()?, w.parse().ok().filter(|w: &f64| w.is_finite())?))
        })
        .collect();
    if let Some(entries) = weighted {
        if let Some(&(i, _)) = entries.iter().find(|&&(i, _)| i as usize >= corpus.dim()) {
            return Err(Error::Usage(format!("query index {i} is outside dimension {}", corpus.dim())));
        }
        return Ok(SparseVector::from_unsorted(corpus.dim(), entries)?.normalize()?);
    }
    let vocab = vocabulary.or(corpus.vocabulary()).ok_or(pivotree_core::Error::NoVocabulary)?;
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for tok in tokens {
        let (term, n) = match tok.rsplit_once(':') {
            Some((term, n)) if !term.is_empty() => match n.parse::<u32>() {
                Ok(n) if n > 0 => (term, n),
                _ => (tok, 1),
            },
            _ => (tok, 1),
        };
        *counts.entry(term).or_insert(0) += n;
    }
    let counts: Vec<(&str, u32)> = counts.into_iter().collect();
    Ok(vocab.weigh(corpus.dim(), &counts)?)
}

/// Searches a loaded index after checking it belongs to `corpus`.
pub fn search_index(
    index: &IndexFile,
    corpus: &Corpus,
    q: &SparseVector,
    k: usize,
    variant: BoundVariant,
) -> Result<SearchOutcome> {
    index.check_corpus(corpus)?;
    match &index.body {
        IndexBody::Mta(tree) => Ok(search_tree(tree, corpus, q, k, variant)?),
        IndexBody::Mip(tree) => {
            if variant.kind == BoundKind::Heuristic {
                return Err(Error::Usage("ball-tree indexes only support the safe bound".into()));
            }
            Ok(mip_search(tree, corpus, q, k, variant)?)
        }
    }
}

/// Rendered outputs of one evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutputs {
    pub report: EvalReport,
    pub rows_csv: String,
    pub summary_csv: String,
    pub meta: String,
}

/// Runs the sweep for a corpus file and a query file.
pub fn run_eval(corpus_file: &CorpusFile, query_file: &CorpusFile, cfg: &SweepConfig) -> Result<EvalOutputs> {
    let corpus = corpus_file.to_corpus()?;
    let queries = query_file.to_queries(corpus.dim(), corpus.vocabulary())?;
    let (ids, vectors): (Vec<String>, Vec<SparseVector>) = queries.into_iter().unzip();
    let report = run_sweep(&corpus, &vectors, cfg)?;

    let mut extra: Vec<(String, String)> = vec![
        ("queries".into(), vectors.len().to_string()),
        ("methods".into(), cfg.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
        ("gammas".into(), cfg.gammas.iter().map(|&g| report::sig6(g)).collect::<Vec<_>>().join(",")),
        ("leaf_capacity".into(), cfg.build.leaf_capacity.to_string()),
        ("ball_leaf_capacity".into(), cfg.ball_leaf_capacity.to_string()),
        ("candidate_count".into(), cfg.build.candidate_count.to_string()),
        ("max_depth".into(), cfg.build.max_depth.to_string()),
        ("pivot_score".into(), format!("{:?}", cfg.build.score)),
        ("seed".into(), cfg.build.rng_seed.to_string()),
    ];
    extra.extend(corpus_file.meta.iter().map(|m| ("corpus".to_string(), m.clone())));
    extra.extend(query_file.meta.iter().map(|m| ("queries_source".to_string(), m.clone())));

    Ok(EvalOutputs {
        rows_csv: report::rows_csv(&report, &ids),
        summary_csv: report::summary_csv(&report),
        meta: report::meta_text(&report, &extra),
        report,
    })
}

/// Paths of the summary and metadata files written next to `out`:
/// `report.csv` gives `report.summary.csv` and `report.meta.txt`.
pub fn sidecar_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    let dir = out.parent().unwrap_or_else(|| Path::new(""));
    (dir.join(format!("{stem}.summary.csv")), dir.join(format!("{stem}.meta.txt")))
}

/// Writes the per-query CSV to `out` plus its two sidecars; returns all three paths.
pub fn write_eval_outputs(outputs: &EvalOutputs, out: &Path) -> Result<[PathBuf; 3]> {
    let (summary, meta) = sidecar_paths(out);
    for (path, text) in [(out, &outputs.rows_csv), (&summary, &outputs.summary_csv), (&meta, &outputs.meta)] {
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok([out.to_path_buf(), summary, meta])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Corpus {
        CorpusFile::parse("#format raw\nd1\tapple:2 pear:1\nd2\tpear:3\nd3\tfig:1 apple:1\n")
            .unwrap()
            .to_corpus()
            .unwrap()
    }

    #[test]
    fn doc_id_query_selects_document() {
        let c = corpus();
        assert_eq!(&resolve_query("d2", &c, None).unwrap(), c.vector(1));
    }

    #[test]
    fn weighted_query_is_normalized() {
        let c = corpus();
        let q = resolve_query("0:3 1:4", &c, None).unwrap();
        assert_eq!(q.values(), &[0.6, 0.8]);
        assert!(resolve_query("0:1 9:1", &c, None).is_err());
    }

    #[test]
    fn text_query_drops_unknown_terms() {
        let c = corpus();
        let a = resolve_query("pear apple apple kiwi", &c, None).unwrap();
        let b = c.weigh_query(&[("apple", 2), ("pear", 1)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(resolve_query("apple:2 pear", &c, None).unwrap(), b);
        assert!(resolve_query("kiwi", &c, None).is_err());
    }

    #[test]
    fn sidecars_share_the_stem() {
        let (s, m) = sidecar_paths(Path::new("out/report.csv"));
        assert_eq!(s, Path::new("out/report.summary.csv"));
        assert_eq!(m, Path::new("out/report.meta.txt"));
    }
}
