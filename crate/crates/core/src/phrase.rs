//! Phrase entropies: for every rule, the entropy of how its LHS phrase is
//! attached in the training trees and of how each RHS phrase is expanded.

use std::collections::BTreeMap;
use std::fmt;

use crate::grammar::{ParseTree, RuleId, RuleInventory};

/// Which phrase of a rule a [`Slot`] refers to. RHS positions are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    Lhs,
    Rhs(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub rule: RuleId,
    pub position: Position,
}

impl Slot {
    pub fn lhs(rule: impl Into<RuleId>) -> Self {
        Slot {
            rule: rule.into(),
            position: Position::Lhs,
        }
    }

    /// `k` is 1-based.
    pub fn rhs(rule: impl Into<RuleId>, k: usize) -> Self {
        assert!(k >= 1, "RHS slots are numbered from 1");
        Slot {
            rule: rule.into(),
            position: Position::Rhs(k),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Position::Lhs => write!(f, "{}:LHS", self.rule),
            Position::Rhs(k) => write!(f, "{}:RHS{}", self.rule, k),
        }
    }
}

/// What was observed at a slot: for an LHS slot, the context the phrase was
/// attached to; for an RHS slot, the rule (or `lex`) that expanded it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Root,
    Attached { parent: RuleId, position: usize },
    Expanded(RuleId),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Root => f.write_str("ROOT"),
            Outcome::Attached { parent, position } => write!(f, "{parent}:RHS{position}"),
            Outcome::Expanded(rule) => write!(f, "{rule}"),
        }
    }
}

/// Observed outcome counts; every stored count is at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountDistribution<K: Ord = Outcome> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for CountDistribution<K> {
    fn default() -> Self {
        CountDistribution {
            counts: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<K: Ord> CountDistribution<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += n;
        self.total += n;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<K, u64> {
        &self.counts
    }

    pub fn outcomes(&self) -> usize {
        self.counts.len()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_counts(self.counts.values().copied())
    }
}

impl<K: Ord> FromIterator<(K, u64)> for CountDistribution<K> {
    fn from_iter<I: IntoIterator<Item = (K, u64)>>(iter: I) -> Self {
        let mut d = CountDistribution::new();
        for (k, n) in iter {
            d.add(k, n);
        }
        d
    }
}

/// Natural-log entropy of the relative-frequency distribution of `counts`.
/// Zero counts are ignored; an all-zero input has entropy 0.
pub fn entropy_of_counts(counts: impl IntoIterator<Item = u64> + Clone) -> f64 {
    let total: u64 = counts.clone().into_iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let s: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    // a single outcome gives -1 * ln 1, which is -0.0
    s.max(0.0)
}

/// Entropy of a count distribution.
pub fn entropy<K: Ord>(dist: &CountDistribution<K>) -> f64 {
    dist.entropy()
}

/// A table lookup. Slots never seen in training read as 0 with `seen = false`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhraseEntropy {
    pub value: f64,
    pub seen: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseEntropyTable {
    distributions: BTreeMap<Slot, CountDistribution>,
    entropies: BTreeMap<Slot, f64>,
}

impl PhraseEntropyTable {
    pub fn lookup(&self, slot: &Slot) -> PhraseEntropy {
        match self.entropies.get(slot) {
            Some(&value) => PhraseEntropy { value, seen: true },
            None => PhraseEntropy {
                value: 0.0,
                seen: false,
            },
        }
    }

    pub fn entropy(&self, slot: &Slot) -> f64 {
        self.lookup(slot).value
    }

    pub fn lhs_entropy(&self, rule: &RuleId) -> f64 {
        if rule.is_lex() {
            return 0.0;
        }
        self.entropy(&Slot::lhs(rule.clone()))
    }

    pub fn distribution(&self, slot: &Slot) -> Option<&CountDistribution> {
        self.distributions.get(slot)
    }

    pub fn slots(&self) -> impl Iterator<Item = (&Slot, f64)> {
        self.entropies.iter().map(|(s, &e)| (s, e))
    }

    pub fn is_seen(&self, rule: &RuleId) -> bool {
        self.entropies.contains_key(&Slot::lhs(rule.clone()))
    }

    /// Rules that never occurred in the training set.
    pub fn unseen_rules<'a>(&self, inv: &'a RuleInventory) -> Vec<&'a RuleId> {
        inv.rules()
            .iter()
            .map(|r| &r.id)
            .filter(|id| !self.is_seen(id))
            .collect()
    }

    /// Tab-separated table, one row per observed rule in grammar order,
    /// columns `LHS, 1st RHS, 2nd RHS, ...` rounded to two decimals. Cells
    /// past a rule's arity are `---`.
    pub fn render_tsv(&self, inv: &RuleInventory) -> String {
        let width = inv.rules().iter().map(|r| r.rhs.len()).max().unwrap_or(0);
        let mut out = String::from("rule\tLHS");
        for k in 1..=width {
            out.push_str(&format!("\t{} RHS", ordinal(k)));
        }
        out.push('\n');
        for rule in inv.rules() {
            if !self.is_seen(&rule.id) {
                continue;
            }
            out.push_str(rule.id.as_str());
            out.push_str(&format!(
                "\t{:.2}",
                self.entropy(&Slot::lhs(rule.id.clone()))
            ));
            for k in 1..=width {
                if k <= rule.rhs.len() {
                    out.push_str(&format!(
                        "\t{:.2}",
                        self.entropy(&Slot::rhs(rule.id.clone(), k))
                    ));
                } else {
                    out.push_str("\t---");
                }
            }
            out.push('\n');
        }
        let unseen = self.unseen_rules(inv);
        if !unseen.is_empty() {
            let names: Vec<&str> = unseen.iter().map(|r| r.as_str()).collect();
            out.push_str(&format!("# unseen in training: {}\n", names.join(" ")));
        }
        out
    }
}

pub(crate) fn ordinal(k: usize) -> String {
    let suffix = match (k % 10, k % 100) {
        (1, 11) | (2, 12) | (3, 13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{k}{suffix}")
}

/// Counts attachment contexts and expansions over the training trees.
pub fn build_phrase_table(training: &[ParseTree], inv: &RuleInventory) -> PhraseEntropyTable {
    let mut distributions: BTreeMap<Slot, CountDistribution> = BTreeMap::new();
    for tree in training {
        count_node(tree, Outcome::Root, inv, &mut distributions);
    }
    let entropies = distributions
        .iter()
        .map(|(slot, d)| (slot.clone(), d.entropy()))
        .collect();
    PhraseEntropyTable {
        distributions,
        entropies,
    }
}

fn count_node(
    node: &ParseTree,
    context: Outcome,
    inv: &RuleInventory,
    out: &mut BTreeMap<Slot, CountDistribution>,
) {
    let ParseTree::Internal { rule, children } = node else {
        return;
    };
    out.entry(Slot::lhs(rule.clone()))
        .or_default()
        .add(context, 1);
    debug_assert!(inv.get(rule).is_some_and(|d| d.rhs.len() == children.len()));
    for (i, child) in children.iter().enumerate() {
        let k = i + 1;
        out.entry(Slot::rhs(rule.clone(), k))
            .or_default()
            .add(Outcome::Expanded(child.rule_id()), 1);
        count_node(
            child,
            Outcome::Attached {
                parent: rule.clone(),
                position: k,
            },
            inv,
            out,
        );
    }
}
