//! The bundled nine-rule toy grammar with four training trees and one test
//! tree. Every worked value in the test suite is computed over this corpus.

use crate::grammar::{parse_rule_inventory, parse_treebank, Category, RuleInventory, Treebank};

pub const GRAMMAR: &str = include_str!("../data/toy/grammar.txt");
pub const TRAINING: &str = include_str!("../data/toy/train.trees");
pub const TEST: &str = include_str!("../data/toy/test.trees");
pub const TOP: &str = "s";

pub fn inventory() -> RuleInventory {
    parse_rule_inventory(GRAMMAR, Category::from(TOP)).expect("bundled grammar parses")
}

pub fn treebank() -> Treebank {
    let inv = inventory();
    Treebank {
        training: parse_treebank(TRAINING, &inv).expect("bundled training set parses"),
        test: parse_treebank(TEST, &inv).expect("bundled test set parses"),
    }
}
