//! Cutnodes at a few thresholds, with and without neighbor restrictions,
//! and the iterative selection of the arc-frequency scheme.

use treecut::cut::{select_iterative, SelectionConfig};
use treecut::node_entropy::EntropyScheme;
use treecut::{build_phrase_table, index_treebank, select, toy};

fn main() {
    let inv = toy::inventory();
    let tb = toy::treebank();
    let aot = index_treebank(&tb.training, &inv);
    let table = build_phrase_table(&tb.training, &inv);

    for restricted in [false, true] {
        let cfg = SelectionConfig {
            neighbor_restrictions: restricted,
            ..Default::default()
        };
        for s in [0.5, 1.0, 1.2, 1.8] {
            let cut = select(s, &aot, &table, &cfg).unwrap();
            let nodes: Vec<&str> = cut.cut_nodes().into_iter().map(|n| aot.label(n)).collect();
            println!(
                "restricted={restricted:<5} s={s:.1}  {{{}}}",
                nodes.join(", ")
            );
        }
    }

    let cfg = SelectionConfig::with_scheme(EntropyScheme::ArcFrequency);
    let out = select_iterative(0.6, &aot, &table, &cfg).unwrap();
    let nodes: Vec<&str> = out
        .cutnodes
        .cut_nodes()
        .into_iter()
        .map(|n| aot.label(n))
        .collect();
    println!(
        "arc-freq s=0.6  {{{}}} after {} iterations ({:?})",
        nodes.join(", "),
        out.iterations,
        out.stop
    );
}
