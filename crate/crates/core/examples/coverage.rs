//! Tile the test tree with the specialized rules and report reduction
//! lengths.

use treecut::coverage::{coverage_report, reduction_stats};
use treecut::{build_phrase_table, extract_training, index_treebank, select, toy, SelectionConfig};

fn main() {
    let inv = toy::inventory();
    let tb = toy::treebank();
    let aot = index_treebank(&tb.training, &inv);
    let table = build_phrase_table(&tb.training, &inv);
    let cut = select(1.0, &aot, &table, &SelectionConfig::default()).unwrap();
    let rules = extract_training(&tb.training, &cut, &aot).unwrap();

    let report = coverage_report(&rules, &tb.test);
    print!("{}", report.render(&tb.test));
    if let Some(Some(tiling)) = report.tilings.first() {
        for app in &tiling.applications {
            let rule = rules.by_name(&app.rule).unwrap();
            println!("  node {:>2}: {}", app.node, rule.flat_form());
        }
    }
    print!("{}", reduction_stats(&rules, &tb.test, false).render());
    print!("{}", reduction_stats(&rules, &tb.test, true).render());
}
