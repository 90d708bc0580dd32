//! Index a treebank into an and-or tree and walk a few paths through it.

use treecut::{index_treebank, toy};

fn main() {
    let inv = toy::inventory();
    let tb = toy::treebank();
    let aot = index_treebank(&tb.training, &inv);

    print!("{}", aot.dump());
    let lex_only = aot.nodes().iter().filter(|n| n.is_lex_only()).count();
    println!(
        "\n{} or-nodes, {lex_only} of them only ever lexical",
        aot.len()
    );

    // the object NP of "He booked a ticket" and its first daughter in tree 2
    let object = aot.descend(&[("s_np_vp", 2), ("vp_v_np", 2)]).unwrap();
    println!("object NP of s_np_vp/vp_v_np is {}", aot.label(object));
    match aot.match_path(&tb.training[1], &[1, 1]) {
        Some(id) => println!("training tree 2 at [1, 1] sits on {}", aot.label(id)),
        None => println!("training tree 2 at [1, 1] is not indexed"),
    }
    let deeper = aot.match_path(&tb.test[0], &[1, 1, 1, 1]);
    println!("test tree at [1, 1, 1, 1] indexed: {}", deeper.is_some());
}
