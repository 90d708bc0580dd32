//! Cut the training trees at the cutnodes for threshold 1 and compare with
//! the rules the and-or tree licenses.

use treecut::extract::DEFAULT_CHUNK_CAP;
use treecut::{
    build_phrase_table, extract_andor, extract_training, index_treebank, select, toy,
    SelectionConfig,
};

fn main() {
    let inv = toy::inventory();
    let tb = toy::treebank();
    let aot = index_treebank(&tb.training, &inv);
    let table = build_phrase_table(&tb.training, &inv);
    let cut = select(1.0, &aot, &table, &SelectionConfig::default()).unwrap();

    let cut_rules = extract_training(&tb.training, &cut, &aot).unwrap();
    print!(
        "{}",
        cut_rules.render(&["cut from the training trees".into()])
    );

    let all = extract_andor(&aot, &cut, DEFAULT_CHUNK_CAP).unwrap();
    println!("\nand-or tree adds:");
    for r in all.rules().iter().filter(|r| !cut_rules.contains(&r.chunk)) {
        println!("  {}", r.flat_form());
    }
}
