//! Or-node entropies under the three schemes, with the term-by-term
//! breakdown of one node under the mixed scheme.

use treecut::node_entropy::{mixed_breakdown, EntropyScheme, NodeEntropyMap};
use treecut::{build_phrase_table, index_treebank, toy};

fn main() {
    let inv = toy::inventory();
    let tb = toy::treebank();
    let aot = index_treebank(&tb.training, &inv);
    let table = build_phrase_table(&tb.training, &inv);

    for scheme in [
        EntropyScheme::RhsLocal,
        EntropyScheme::Mixed,
        EntropyScheme::ArcFrequency,
    ] {
        let map = NodeEntropyMap::compute(&aot, &table, scheme, None);
        let row: Vec<String> = (1..=9)
            .map(|k| {
                let id = aot.by_label(&format!("n{k}")).unwrap();
                format!("n{k}={:.2}", map.get(id))
            })
            .collect();
        println!("{:<10} {}", scheme.name(), row.join(" "));
    }

    let n3 = aot.node(aot.by_label("n3").unwrap());
    let b = mixed_breakdown(n3, &table).unwrap();
    print!("\nn3 = {:.4}", b.slot_entropy);
    for t in &b.terms {
        print!(" + {:.4} * {:.4} ({})", t.weight, t.lhs_entropy, t.rule);
    }
    println!(" = {:.4}", b.total());
}
