//! Grammar specialization by cutting a treebank at high-entropy nodes.
//!
//! Training parse trees are indexed into an and-or tree whose or-nodes get
//! an entropy from the phrase entropies of the rules around them. Nodes above
//! a threshold become cutnodes, closed under structural equivalence, and the
//! training trees cut at them yield specialized rules: chunks of the original
//! grammar that flatten to one long rule each. The threshold is searched for
//! so that the specialized rules still derive a given share of a test set.
//!
//! ```
//! use treecut::{toy, index_treebank, build_phrase_table, select, extract_training, coverage, SelectionConfig};
//!
//! let inv = toy::inventory();
//! let tb = toy::treebank();
//! let aot = index_treebank(&tb.training, &inv);
//! let table = build_phrase_table(&tb.training, &inv);
//! let cut = select(1.0, &aot, &table, &SelectionConfig::default()).unwrap();
//! let rules = extract_training(&tb.training, &cut, &aot).unwrap();
//! assert_eq!(rules.len(), 5);
//! assert_eq!(coverage(&rules, &tb.test), 1.0);
//! ```

pub mod coverage;
pub mod cut;
pub mod error;
pub mod extract;
pub mod grammar;
pub mod index;
pub mod node_entropy;
pub mod phrase;
pub mod pipeline;
pub mod sexp;
pub mod threshold;
pub mod toy;

pub use coverage::{
    coverage, coverage_report, covers, reduction_stats, CoverageReport, ReductionStats, Tiling,
};
pub use cut::{
    closure, select, select_by_threshold, select_iterative, CutnodeSet, SelectionConfig,
};
pub use error::{Error, Result};
pub use extract::{
    cut_tree, extract, extract_andor, extract_training, flatten, parse_rules, ChunkTree,
    ExtractionMode, RuleSet, SpecializedRule,
};
pub use grammar::{
    parse_rule_inventory, parse_treebank, Category, GrammarRule, ParseTree, RuleId, RuleInventory,
    Treebank,
};
pub use index::{index_treebank, AndOrTree, OrNode, OrNodeId};
pub use node_entropy::{EntropyScheme, NodeEntropyMap};
pub use phrase::{build_phrase_table, PhraseEntropyTable, Slot};
pub use pipeline::{run_pipeline, PipelineConfig, ThresholdChoice};
pub use threshold::{
    bisect, search_unimodal, BisectionConfig, CoverageProbe, SearchMode, ThresholdResult,
};
