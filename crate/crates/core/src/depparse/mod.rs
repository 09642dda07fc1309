//! Dependency parsing with single-edge relative feedback.
//!
//! Trees are decoded with Chu–Liu–Edmonds over edge scores `w·φ(i, j)`;
//! the learner then asks about the one edge whose alternative head it is
//! least sure about and updates on the aggregated tree features.

mod learner;
mod sentence;
mod tree;
mod treebank;

pub use learner::{
    dp_step, edge_confusion_eps, gold_annotator, linear_annotator, select_edge_query, write_dp_trace, CnqrDp,
    DpOutcome, DpRecord, EdgeQuery, DP_TRACE_HEADER,
};
pub use sentence::{
    aggregate_features, read_conll, ConllSentence, EdgeTemplates, Sentence, Token, ROOT_FORM, ROOT_TAG,
};
pub use tree::{cle_max_arborescence, tree_score, ParseTree};
pub use treebank::{SyntheticTreebank, TreebankSpec};
