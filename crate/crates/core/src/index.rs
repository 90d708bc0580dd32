//! The and-or tree indexing a training treebank.
//!
//! Or-nodes stand for a phrase slot and branch over the rules (arcs) seen
//! expanding it; each arc leads to an and-node with one child or-node per
//! RHS phrase of that rule. `lex` arcs end the recursion. Nodes are stored in
//! an arena in depth-first preorder with arcs visited in rule-id order, so
//! ids do not depend on the order of the training trees.

use std::collections::BTreeMap;
use std::fmt;

use crate::grammar::{Category, ParseTree, RuleId, RuleInventory};
use crate::phrase::Slot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrNodeId(pub usize);

impl OrNodeId {
    pub const ROOT: OrNodeId = OrNodeId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for OrNodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// An arc out of an or-node together with the and-node it leads to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AndNode {
    pub rule: RuleId,
    /// Training subtree instances that took this arc.
    pub count: u64,
    /// Of those, how many dominated no lexical lookup.
    pub empty_count: u64,
    pub children: Vec<OrNodeId>,
}

impl AndNode {
    pub fn has_lexical_instance(&self) -> bool {
        self.count > self.empty_count
    }

    pub fn has_empty_instance(&self) -> bool {
        self.empty_count > 0
    }
}

/// Where an or-node hangs: RHS phrase `index` (0-based) of arc `rule` out of
/// or-node `node`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentLink {
    pub node: OrNodeId,
    pub rule: RuleId,
    pub index: usize,
}

impl ParentLink {
    pub fn slot(&self) -> Slot {
        Slot::rhs(self.rule.clone(), self.index + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrNode {
    pub id: OrNodeId,
    /// `root`, `n<k>` for nodes with at least one rule arc, `l<k>` for nodes
    /// that only ever saw lexical lookups.
    pub label: String,
    pub category: Category,
    pub parent: Option<ParentLink>,
    pub arcs: Vec<AndNode>,
    pub visit_count: u64,
    pub has_lexical_yield: bool,
}

impl OrNode {
    pub fn arc(&self, rule: &RuleId) -> Option<&AndNode> {
        self.arcs.iter().find(|a| &a.rule == rule)
    }

    pub fn is_lex_only(&self) -> bool {
        self.arcs.iter().all(|a| a.rule.is_lex())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AndOrTree {
    nodes: Vec<OrNode>,
}

impl AndOrTree {
    pub fn root(&self) -> &OrNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: OrNodeId) -> &OrNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[OrNode] {
        &self.nodes
    }

    pub fn ids(&self) -> impl Iterator<Item = OrNodeId> {
        (0..self.nodes.len()).map(OrNodeId)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label(&self, id: OrNodeId) -> &str {
        &self.nodes[id.0].label
    }

    pub fn by_label(&self, label: &str) -> Option<OrNodeId> {
        self.nodes.iter().find(|n| n.label == label).map(|n| n.id)
    }

    /// Follows `(rule, 1-based RHS position)` steps from the root.
    pub fn descend(&self, steps: &[(&str, usize)]) -> Option<OrNodeId> {
        steps.iter().try_fold(OrNodeId::ROOT, |id, &(rule, k)| {
            let arc = self.node(id).arc(&RuleId::from(rule))?;
            arc.children.get(k.checked_sub(1)?).copied()
        })
    }

    /// The or-node matched by the subtree of `tree` at `path` (child indices
    /// from the root), following the tree's rule ids through the index. The
    /// subtree's own rule must label an arc out of that or-node.
    pub fn match_path(&self, tree: &ParseTree, path: &[usize]) -> Option<OrNodeId> {
        let mut or = OrNodeId::ROOT;
        let mut node = tree;
        for &i in path {
            let arc = self.node(or).arc(&node.rule_id())?;
            or = *arc.children.get(i)?;
            node = node.children().get(i)?;
        }
        self.node(or).arc(&node.rule_id()).map(|_| or)
    }

    /// Or-nodes with an outgoing arc labelled `rule`.
    pub fn lhs_nodes<'a>(&'a self, rule: &'a RuleId) -> impl Iterator<Item = OrNodeId> + 'a {
        self.nodes
            .iter()
            .filter(move |n| n.arc(rule).is_some())
            .map(|n| n.id)
    }

    /// Or-nodes sitting in RHS phrase `k` (1-based) of an arc labelled `rule`.
    pub fn slot_nodes<'a>(
        &'a self,
        rule: &'a RuleId,
        k: usize,
    ) -> impl Iterator<Item = OrNodeId> + 'a {
        self.nodes
            .iter()
            .filter_map(move |n| n.arc(rule)?.children.get(k - 1).copied())
    }

    /// Indented text rendering with labels, categories, visit and arc counts.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_node(OrNodeId::ROOT, None, 0, &mut out);
        out
    }

    fn dump_node(&self, id: OrNodeId, slot: Option<usize>, depth: usize, out: &mut String) {
        let node = self.node(id);
        let indent = "  ".repeat(depth);
        let slot = slot.map(|k| format!("[{k}] ")).unwrap_or_default();
        out.push_str(&format!(
            "{indent}{slot}{} {} visits={}{}\n",
            node.label,
            node.category,
            node.visit_count,
            if node.has_lexical_yield {
                ""
            } else {
                " empty-yield"
            }
        ));
        for arc in &node.arcs {
            let empty = if arc.empty_count > 0 {
                format!(" empty={}", arc.empty_count)
            } else {
                String::new()
            };
            out.push_str(&format!("{indent}  {} x{}{empty}\n", arc.rule, arc.count));
            for (i, &child) in arc.children.iter().enumerate() {
                self.dump_node(child, Some(i + 1), depth + 2, out);
            }
        }
    }
}

#[derive(Default)]
struct PendingAnd {
    count: u64,
    empty_count: u64,
    children: Vec<PendingOr>,
}

struct PendingOr {
    category: Category,
    visits: u64,
    arcs: BTreeMap<RuleId, PendingAnd>,
}

impl PendingOr {
    fn new(category: Category) -> Self {
        PendingOr {
            category,
            visits: 0,
            arcs: BTreeMap::new(),
        }
    }

    /// Adds one subtree instance and returns its yield length.
    fn insert(&mut self, tree: &ParseTree, inv: &RuleInventory) -> usize {
        self.visits += 1;
        let rule = tree.rule_id();
        let arc = self.arcs.entry(rule.clone()).or_insert_with(|| {
            let children = match inv.get(&rule) {
                Some(def) => def.rhs.iter().cloned().map(PendingOr::new).collect(),
                None => Vec::new(),
            };
            PendingAnd {
                children,
                ..Default::default()
            }
        });
        arc.count += 1;
        let yielded = match tree {
            ParseTree::Lex { .. } => 1,
            ParseTree::Internal { children, .. } => children
                .iter()
                .zip(arc.children.iter_mut())
                .map(|(c, slot)| slot.insert(c, inv))
                .sum(),
        };
        if yielded == 0 {
            arc.empty_count += 1;
        }
        yielded
    }

    fn flatten(self, parent: Option<ParentLink>, out: &mut Vec<OrNode>) -> OrNodeId {
        let id = OrNodeId(out.len());
        out.push(OrNode {
            id,
            label: String::new(),
            category: self.category,
            parent,
            arcs: Vec::new(),
            visit_count: self.visits,
            has_lexical_yield: false,
        });
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (rule, pending) in self.arcs {
            let children = pending
                .children
                .into_iter()
                .enumerate()
                .map(|(index, child)| {
                    child.flatten(
                        Some(ParentLink {
                            node: id,
                            rule: rule.clone(),
                            index,
                        }),
                        out,
                    )
                })
                .collect();
            arcs.push(AndNode {
                rule,
                count: pending.count,
                empty_count: pending.empty_count,
                children,
            });
        }
        let node = &mut out[id.0];
        node.has_lexical_yield = arcs.iter().any(AndNode::has_lexical_instance);
        node.arcs = arcs;
        id
    }
}

/// Builds the and-or tree of the training trees. Trees are assumed valid
/// against `inv`.
pub fn index_treebank(training: &[ParseTree], inv: &RuleInventory) -> AndOrTree {
    let mut root = PendingOr::new(inv.top().clone());
    for tree in training {
        root.insert(tree, inv);
    }
    let mut nodes = Vec::new();
    root.flatten(None, &mut nodes);
    let (mut rule_nodes, mut lex_nodes) = (0, 0);
    for node in nodes.iter_mut() {
        node.label = if node.id == OrNodeId::ROOT {
            "root".to_owned()
        } else if node.is_lex_only() {
            lex_nodes += 1;
            format!("l{lex_nodes}")
        } else {
            rule_nodes += 1;
            format!("n{rule_nodes}")
        };
    }
    AndOrTree { nodes }
}
