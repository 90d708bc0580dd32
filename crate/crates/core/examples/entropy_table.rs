//! Phrase entropies of the bundled toy treebank, plus the entropy of a
//! unified node and its local perplexity.

use treecut::node_entropy::{local_perplexity, unified_node_entropy};
use treecut::phrase::Slot;
use treecut::{build_phrase_table, toy};

fn main() {
    let inv = toy::inventory();
    let tb = toy::treebank();
    let table = build_phrase_table(&tb.training, &inv);
    print!("{}", table.render_tsv(&inv));

    let slot = Slot::rhs("pp_prep_np", 2);
    let s = unified_node_entropy(&slot, &"np_det_n".into(), &table, &inv).unwrap();
    println!(
        "\n{slot} unified with np_det_n: {s:.2} (perplexity {:.2})",
        local_perplexity(s)
    );
}
