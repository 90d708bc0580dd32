//! Entropy values for or-nodes of the and-or tree.
//!
//! Three schemes are supported. `RhsLocal` reads the phrase entropy of the
//! RHS slot the node fills. `Mixed` adds the LHS phrase entropies of the
//! rules chosen at the node, weighted by how often each arc was taken.
//! `ArcFrequency` is the entropy of the arc distribution itself, pooled over
//! the node's equivalence class under the current cutnodes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::cut::CutnodeSet;
use crate::error::{Error, Result};
use crate::grammar::{RuleId, RuleInventory};
use crate::index::{AndOrTree, OrNode, OrNodeId};
use crate::phrase::{entropy_of_counts, PhraseEntropyTable, Position, Slot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntropyScheme {
    RhsLocal,
    Mixed,
    ArcFrequency,
}

impl EntropyScheme {
    pub fn name(self) -> &'static str {
        match self {
            EntropyScheme::RhsLocal => "rhs-local",
            EntropyScheme::Mixed => "mixed",
            EntropyScheme::ArcFrequency => "arc-freq",
        }
    }

    /// Whether node entropies change with the cutnode set.
    pub fn depends_on_cutnodes(self) -> bool {
        self == EntropyScheme::ArcFrequency
    }
}

impl fmt::Display for EntropyScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntropyScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rhs-local" => Ok(EntropyScheme::RhsLocal),
            "mixed" => Ok(EntropyScheme::Mixed),
            "arc-freq" => Ok(EntropyScheme::ArcFrequency),
            other => Err(format!(
                "unknown scheme `{other}` (expected rhs-local, mixed or arc-freq)"
            )),
        }
    }
}

fn parent_slot(node: &OrNode) -> Result<Slot> {
    node.parent
        .as_ref()
        .map(|p| p.slot())
        .ok_or(Error::RootHasNoParent)
}

pub fn node_entropy_rhs_local(node: &OrNode, table: &PhraseEntropyTable) -> Result<f64> {
    Ok(table.entropy(&parent_slot(node)?))
}

/// One weighted LHS term of a mixed node entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTerm {
    pub rule: RuleId,
    pub weight: f64,
    pub lhs_entropy: f64,
}

/// A mixed node entropy split into its slot term and weighted LHS terms.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedBreakdown {
    pub slot: Slot,
    pub slot_entropy: f64,
    pub terms: Vec<MixedTerm>,
}

impl MixedBreakdown {
    pub fn total(&self) -> f64 {
        self.slot_entropy
            + self
                .terms
                .iter()
                .map(|t| t.weight * t.lhs_entropy)
                .sum::<f64>()
    }
}

pub fn mixed_breakdown(node: &OrNode, table: &PhraseEntropyTable) -> Result<MixedBreakdown> {
    let slot = parent_slot(node)?;
    let visits = node.visit_count as f64;
    let terms = node
        .arcs
        .iter()
        .map(|arc| MixedTerm {
            rule: arc.rule.clone(),
            weight: arc.count as f64 / visits,
            // lex arcs carry no LHS phrase
            lhs_entropy: table.lhs_entropy(&arc.rule),
        })
        .collect();
    Ok(MixedBreakdown {
        slot_entropy: table.entropy(&slot),
        slot,
        terms,
    })
}

pub fn node_entropy_mixed(node: &OrNode, table: &PhraseEntropyTable) -> Result<f64> {
    mixed_breakdown(node, table).map(|b| b.total())
}

/// Arc counts of `node`'s equivalence class under `cutnodes`, keyed by rule.
pub fn pooled_arc_counts(
    aot: &AndOrTree,
    node: OrNodeId,
    cutnodes: &CutnodeSet,
) -> BTreeMap<RuleId, u64> {
    let mut counts = BTreeMap::new();
    for member in cutnodes.class_members(node) {
        for arc in &aot.node(member).arcs {
            *counts.entry(arc.rule.clone()).or_insert(0) += arc.count;
        }
    }
    counts
}

pub fn node_entropy_arc_frequency(aot: &AndOrTree, node: OrNodeId, cutnodes: &CutnodeSet) -> f64 {
    entropy_of_counts(
        pooled_arc_counts(aot, node, cutnodes)
            .into_values()
            .collect::<Vec<_>>(),
    )
}

/// Sum of the RHS phrase entropy of `parent_slot` and the LHS phrase entropy
/// of `child_rule`, the two phrases unified at a node.
pub fn unified_node_entropy(
    parent_slot: &Slot,
    child_rule: &RuleId,
    table: &PhraseEntropyTable,
    inv: &RuleInventory,
) -> Result<f64> {
    let Position::Rhs(k) = parent_slot.position else {
        return Err(Error::NotAnRhsSlot(parent_slot.to_string()));
    };
    let unknown = |id: &RuleId| Error::UnknownRuleId {
        id: id.clone(),
        pos: crate::error::Pos { line: 0, column: 0 },
    };
    let parent = inv
        .get(&parent_slot.rule)
        .ok_or_else(|| unknown(&parent_slot.rule))?;
    let expected = parent
        .rhs
        .get(k - 1)
        .ok_or_else(|| Error::NotAnRhsSlot(parent_slot.to_string()))?;
    let child = inv.get(child_rule).ok_or_else(|| unknown(child_rule))?;
    if &child.lhs != expected {
        return Err(Error::SlotMismatch {
            rule: parent.id.clone(),
            slot: parent_slot.to_string(),
            child: child.id.clone(),
            expected: expected.clone(),
            found: child.lhs.clone(),
        });
    }
    Ok(table.entropy(parent_slot) + table.lhs_entropy(child_rule))
}

/// Generalized branching factor: `e^s`.
pub fn local_perplexity(s: f64) -> f64 {
    s.exp()
}

/// Entropy of every or-node under one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEntropyMap {
    scheme: EntropyScheme,
    values: Vec<f64>,
}

impl NodeEntropyMap {
    /// For `ArcFrequency`, `cutnodes` supplies the equivalence classes (an
    /// empty set if `None`). The other schemes ignore it and give the root 0.
    pub fn compute(
        aot: &AndOrTree,
        table: &PhraseEntropyTable,
        scheme: EntropyScheme,
        cutnodes: Option<&CutnodeSet>,
    ) -> Self {
        let values = match scheme {
            EntropyScheme::ArcFrequency => {
                let empty;
                let cutnodes = match cutnodes {
                    Some(c) => c,
                    None => {
                        empty = CutnodeSet::empty(aot);
                        &empty
                    }
                };
                aot.ids()
                    .map(|id| node_entropy_arc_frequency(aot, id, cutnodes))
                    .collect()
            }
            EntropyScheme::RhsLocal | EntropyScheme::Mixed => aot
                .nodes()
                .iter()
                .map(|node| {
                    let value = if scheme == EntropyScheme::Mixed {
                        node_entropy_mixed(node, table)
                    } else {
                        node_entropy_rhs_local(node, table)
                    };
                    value.unwrap_or(0.0)
                })
                .collect(),
        };
        NodeEntropyMap { scheme, values }
    }

    pub fn scheme(&self) -> EntropyScheme {
        self.scheme
    }

    pub fn get(&self, id: OrNodeId) -> f64 {
        self.values[id.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `label  category  entropy` per node, in id order.
    pub fn render_tsv(&self, aot: &AndOrTree) -> String {
        let mut out = String::from("node\tcategory\tentropy\n");
        for node in aot.nodes() {
            out.push_str(&format!(
                "{}\t{}\t{:.4}\n",
                node.label, node.category, self.values[node.id.0]
            ));
        }
        out
    }
}
