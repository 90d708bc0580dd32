//! Bisect for the highest threshold whose rules still cover the test tree.

use treecut::threshold::{bisect, BisectionConfig};
use treecut::{
    build_phrase_table, index_treebank, toy, CoverageProbe, ExtractionMode, SelectionConfig,
};

fn main() {
    let inv = toy::inventory();
    let tb = toy::treebank();
    let aot = index_treebank(&tb.training, &inv);
    let table = build_phrase_table(&tb.training, &inv);
    let probe = CoverageProbe {
        aot: &aot,
        table: &table,
        training: &tb.training,
        test: &tb.test,
        selection: SelectionConfig::default(),
        extraction: ExtractionMode::TrainingCut,
    };

    for c0 in [1.0, 0.0] {
        let r = bisect(&probe, &BisectionConfig::targeting(c0)).unwrap();
        println!(
            "target {c0:.1}: threshold {:.4}, coverage {:.2}, {} cut classes, {} steps, upper end {:?}",
            r.threshold,
            r.achieved_coverage,
            r.cutnodes.class_count(),
            r.steps,
            r.upper
        );
    }
}
