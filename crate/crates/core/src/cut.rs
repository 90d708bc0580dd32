//! Choosing the or-nodes to cut at.
//!
//! Selected nodes are closed under structural equivalence: cutnodes of the
//! same category are equated, nodes reached from equated nodes along the same
//! arc labels and slot positions are equated, and a class containing a
//! cutnode is cut as a whole. Optional neighbor restrictions forbid cutting
//! both the LHS node of a rule and its lowest-entropy RHS phrase.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::grammar::{Category, RuleId};
use crate::index::{AndOrTree, OrNodeId};
use crate::node_entropy::{EntropyScheme, NodeEntropyMap};
use crate::phrase::{PhraseEntropyTable, Slot};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Unions by minimum id so every root is the smallest member of its
    /// class. Returns `(root, absorbed)` when two classes were merged.
    fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        let (root, child) = (ra.min(rb), ra.max(rb));
        self.parent[child] = root;
        Some((root, child))
    }
}

/// One class of equated or-nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub representative: OrNodeId,
    pub category: Category,
    pub members: Vec<OrNodeId>,
}

/// A partition of the or-nodes into equivalence classes, some of them cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutnodeSet {
    class_of: Vec<OrNodeId>,
    members: BTreeMap<OrNodeId, Vec<OrNodeId>>,
    cut: BTreeSet<OrNodeId>,
    seeds: BTreeSet<OrNodeId>,
}

impl CutnodeSet {
    /// Every node in its own class, nothing cut.
    pub fn empty(aot: &AndOrTree) -> Self {
        CutnodeSet {
            class_of: aot.ids().collect(),
            members: BTreeMap::new(),
            cut: BTreeSet::new(),
            seeds: BTreeSet::new(),
        }
    }

    /// Representative (smallest id) of `id`'s class.
    pub fn class_of(&self, id: OrNodeId) -> OrNodeId {
        self.class_of[id.0]
    }

    pub fn class_members(&self, id: OrNodeId) -> Vec<OrNodeId> {
        let rep = self.class_of(id);
        self.members.get(&rep).cloned().unwrap_or_else(|| vec![rep])
    }

    pub fn same_class(&self, a: OrNodeId, b: OrNodeId) -> bool {
        self.class_of(a) == self.class_of(b)
    }

    pub fn is_cut(&self, id: OrNodeId) -> bool {
        self.cut.contains(&self.class_of(id))
    }

    /// The nodes the closure was seeded with.
    pub fn seeds(&self) -> &BTreeSet<OrNodeId> {
        &self.seeds
    }

    /// Every member of every cut class.
    pub fn cut_nodes(&self) -> BTreeSet<OrNodeId> {
        self.cut
            .iter()
            .flat_map(|&rep| self.class_members(rep))
            .collect()
    }

    pub fn cut_classes(&self, aot: &AndOrTree) -> Vec<EquivalenceClass> {
        self.cut
            .iter()
            .map(|&rep| EquivalenceClass {
                representative: rep,
                category: aot.node(rep).category.clone(),
                members: self.class_members(rep),
            })
            .collect()
    }

    pub fn class_count(&self) -> usize {
        self.cut.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cut.is_empty()
    }

    /// One line per cut class: representative, category, then members with
    /// their entropies when given.
    pub fn render(&self, aot: &AndOrTree, entropies: Option<&NodeEntropyMap>) -> String {
        let mut out = String::new();
        for class in self.cut_classes(aot) {
            out.push_str(&format!(
                "{}\t{}\t",
                aot.label(class.representative),
                class.category
            ));
            let members: Vec<String> = class
                .members
                .iter()
                .map(|&m| match entropies {
                    Some(e) => format!("{}({:.4})", aot.label(m), e.get(m)),
                    None => aot.label(m).to_owned(),
                })
                .collect();
            out.push_str(&members.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Least set of equated cutnodes containing `seeds`. Seeds that never
/// dominate a lexical lookup are dropped, so no cut class consists only of
/// empty-yield nodes.
pub fn closure(seeds: &BTreeSet<OrNodeId>, aot: &AndOrTree) -> CutnodeSet {
    let n = aot.len();
    let mut uf = UnionFind::new(n);
    let mut cut = vec![false; n];
    let seeds: BTreeSet<OrNodeId> = seeds
        .iter()
        .copied()
        .filter(|&s| aot.node(s).has_lexical_yield)
        .collect();
    for s in &seeds {
        cut[s.0] = true;
    }
    let merge = |uf: &mut UnionFind, cut: &mut Vec<bool>, a: usize, b: usize| -> bool {
        match uf.union(a, b) {
            Some((root, child)) => {
                cut[root] |= cut[child];
                true
            }
            None => false,
        }
    };

    loop {
        let mut changed = false;

        // cutnodes of one category are equated
        let mut first_of_category: HashMap<&Category, usize> = HashMap::new();
        for id in 0..n {
            let root = uf.find(id);
            if !cut[root] {
                continue;
            }
            let category = &aot.nodes()[id].category;
            match first_of_category.get(category) {
                Some(&first) => changed |= merge(&mut uf, &mut cut, first, id),
                None => {
                    first_of_category.insert(category, id);
                }
            }
        }

        // congruence: equal labels from equated nodes lead to equated nodes
        loop {
            let mut merged = false;
            let mut seen: HashMap<(usize, &RuleId, usize), usize> = HashMap::new();
            for node in aot.nodes() {
                let root = uf.find(node.id.0);
                for arc in &node.arcs {
                    for (i, &child) in arc.children.iter().enumerate() {
                        match seen.get(&(root, &arc.rule, i)) {
                            Some(&other) => merged |= merge(&mut uf, &mut cut, other, child.0),
                            None => {
                                seen.insert((root, &arc.rule, i), child.0);
                            }
                        }
                    }
                }
            }
            if !merged {
                break;
            }
            changed = true;
        }

        if !changed {
            break;
        }
    }

    let mut class_of = Vec::with_capacity(n);
    let mut members: BTreeMap<OrNodeId, Vec<OrNodeId>> = BTreeMap::new();
    let mut cut_classes = BTreeSet::new();
    for id in 0..n {
        let root = OrNodeId(uf.find(id));
        class_of.push(root);
        members.entry(root).or_default().push(OrNodeId(id));
        if cut[root.0] {
            cut_classes.insert(root);
        }
    }
    members.retain(|_, m| m.len() > 1);
    CutnodeSet {
        class_of,
        members,
        cut: cut_classes,
        seeds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub scheme: EntropyScheme,
    pub neighbor_restrictions: bool,
    pub max_iterations: usize,
    /// Near-cycle tolerance, as a fraction of the summed sizes of two iterates.
    pub cycle_rho_delta_fraction: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            scheme: EntropyScheme::Mixed,
            neighbor_restrictions: false,
            max_iterations: 50,
            cycle_rho_delta_fraction: 0.10,
        }
    }
}

impl SelectionConfig {
    pub fn with_scheme(scheme: EntropyScheme) -> Self {
        SelectionConfig {
            scheme,
            ..Default::default()
        }
    }
}

/// A rule whose LHS node and lowest-entropy RHS phrase are both cut.
#[derive(Debug, Clone, PartialEq)]
pub struct Conflict {
    pub rule: RuleId,
    /// 1-based position of the lowest-entropy RHS phrase.
    pub slot: usize,
    pub lhs_node: OrNodeId,
    pub slot_node: OrNodeId,
    /// The side with lower entropy, which gets removed.
    pub loser: OrNodeId,
}

/// The RHS position (1-based) with the least phrase entropy, lowest index on
/// ties. `None` for an empty RHS.
pub fn min_entropy_slot(rule: &RuleId, arity: usize, table: &PhraseEntropyTable) -> Option<usize> {
    (1..=arity).min_by(|&a, &b| {
        let ea = table.entropy(&Slot::rhs(rule.clone(), a));
        let eb = table.entropy(&Slot::rhs(rule.clone(), b));
        ea.total_cmp(&eb).then(a.cmp(&b))
    })
}

fn class_entropy(set: &CutnodeSet, id: OrNodeId, entropies: &NodeEntropyMap) -> f64 {
    set.class_members(id)
        .into_iter()
        .map(|m| entropies.get(m))
        .fold(0.0, f64::max)
}

/// Every neighbor conflict in `set`, ordered by rule id, then LHS node, then
/// slot node. Nodes in different classes are compared by class entropy (the
/// maximum over members); nodes of one class by their own entropy. Ties
/// remove the RHS side.
pub fn neighbor_conflicts(
    set: &CutnodeSet,
    aot: &AndOrTree,
    table: &PhraseEntropyTable,
    entropies: &NodeEntropyMap,
) -> Vec<Conflict> {
    let mut arity: BTreeMap<&RuleId, usize> = BTreeMap::new();
    for node in aot.nodes() {
        for arc in &node.arcs {
            if !arc.rule.is_lex() {
                arity.insert(&arc.rule, arc.children.len());
            }
        }
    }
    let mut out = Vec::new();
    for (rule, arity) in arity {
        let Some(k) = min_entropy_slot(rule, arity, table) else {
            continue;
        };
        let lhs: Vec<OrNodeId> = aot.lhs_nodes(rule).filter(|&a| set.is_cut(a)).collect();
        if lhs.is_empty() {
            continue;
        }
        let mut rhs: Vec<OrNodeId> = aot.slot_nodes(rule, k).filter(|&b| set.is_cut(b)).collect();
        rhs.sort();
        for &a in &lhs {
            for &b in &rhs {
                let (ea, eb) = if set.same_class(a, b) {
                    (entropies.get(a), entropies.get(b))
                } else {
                    (
                        class_entropy(set, a, entropies),
                        class_entropy(set, b, entropies),
                    )
                };
                out.push(Conflict {
                    rule: rule.clone(),
                    slot: k,
                    lhs_node: a,
                    slot_node: b,
                    loser: if ea < eb { a } else { b },
                });
            }
        }
    }
    out
}

/// The nodes the conflicts ask to remove.
pub fn removal_set(conflicts: &[Conflict]) -> BTreeSet<OrNodeId> {
    conflicts.iter().map(|c| c.loser).collect()
}

/// Closes `seeds`, then resolves neighbor conflicts one at a time: the
/// loser is dropped from the seeds (or, if the closure induced it, the
/// lowest-entropy seed of its class is), and the closure is recomputed.
/// Seeds shrink every round, so this ends with a closed, conflict-free set.
pub fn restrict_neighbors(
    mut seeds: BTreeSet<OrNodeId>,
    aot: &AndOrTree,
    table: &PhraseEntropyTable,
    entropies: &NodeEntropyMap,
) -> CutnodeSet {
    loop {
        let set = closure(&seeds, aot);
        let conflicts = neighbor_conflicts(&set, aot, table, entropies);
        let Some(first) = conflicts.first() else {
            return set;
        };
        if !seeds.remove(&first.loser) {
            let victim = set
                .class_members(first.loser)
                .into_iter()
                .filter(|m| set.seeds().contains(m))
                .min_by(|&a, &b| {
                    entropies
                        .get(a)
                        .total_cmp(&entropies.get(b))
                        .then(b.cmp(&a))
                })
                .expect("every cut class holds a seed");
            seeds.remove(&victim);
        }
        // closure drops ineligible seeds; keep the two in step
        seeds.retain(|s| set.seeds().contains(s));
    }
}

fn threshold_seeds(s_min: f64, aot: &AndOrTree, entropies: &NodeEntropyMap) -> BTreeSet<OrNodeId> {
    aot.ids()
        .filter(|&id| entropies.get(id) > s_min && aot.node(id).has_lexical_yield)
        .collect()
}

/// Cutnodes for threshold `s_min` under a cutnode-independent scheme:
/// the closure of all nodes with entropy strictly above `s_min`.
pub fn select_by_threshold(
    s_min: f64,
    aot: &AndOrTree,
    table: &PhraseEntropyTable,
    cfg: &SelectionConfig,
) -> Result<CutnodeSet> {
    if cfg.scheme.depends_on_cutnodes() {
        return Err(Error::SchemeMismatch(cfg.scheme.name()));
    }
    let entropies = NodeEntropyMap::compute(aot, table, cfg.scheme, None);
    let seeds = threshold_seeds(s_min, aot, &entropies);
    Ok(if cfg.neighbor_restrictions {
        restrict_neighbors(seeds, aot, table, &entropies)
    } else {
        closure(&seeds, aot)
    })
}

/// Size of the symmetric difference.
pub fn set_distance(a: &BTreeSet<OrNodeId>, b: &BTreeSet<OrNodeId>) -> usize {
    a.symmetric_difference(b).count()
}

/// `fraction` of the summed sizes.
pub fn set_tolerance(a: &BTreeSet<OrNodeId>, b: &BTreeSet<OrNodeId>, fraction: f64) -> f64 {
    fraction * (a.len() + b.len()) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationStop {
    /// Iterate `at` repeated an earlier one exactly.
    Repeated { at: usize },
    /// Iterate `at` came within tolerance of the earlier iterate `earlier`,
    /// which is the one returned.
    NearCycle { earlier: usize, at: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeSelection {
    pub cutnodes: CutnodeSet,
    pub iterations: usize,
    pub stop: IterationStop,
}

/// Threshold selection under the arc-frequency scheme, where node entropies
/// depend on the cutnodes: iterate from the empty set until an iterate
/// repeats or comes close to an earlier one.
pub fn select_iterative(
    s_min: f64,
    aot: &AndOrTree,
    table: &PhraseEntropyTable,
    cfg: &SelectionConfig,
) -> Result<IterativeSelection> {
    if cfg.scheme != EntropyScheme::ArcFrequency {
        return Err(Error::SchemeMismatch(cfg.scheme.name()));
    }
    let mut history = vec![CutnodeSet::empty(aot)];
    let mut nodes: Vec<BTreeSet<OrNodeId>> = vec![BTreeSet::new()];
    for i in 1..=cfg.max_iterations {
        let previous = history.last().expect("history starts non-empty");
        let entropies = NodeEntropyMap::compute(aot, table, cfg.scheme, Some(previous));
        let seeds = threshold_seeds(s_min, aot, &entropies);
        let next = if cfg.neighbor_restrictions {
            restrict_neighbors(seeds, aot, table, &entropies)
        } else {
            closure(&seeds, aot)
        };
        let next_nodes = next.cut_nodes();
        if nodes.iter().any(|earlier| earlier == &next_nodes) {
            return Ok(IterativeSelection {
                cutnodes: next,
                iterations: i,
                stop: IterationStop::Repeated { at: i },
            });
        }
        if let Some(j) = nodes.iter().position(|earlier| {
            (set_distance(&next_nodes, earlier) as f64)
                < set_tolerance(&next_nodes, earlier, cfg.cycle_rho_delta_fraction)
        }) {
            return Ok(IterativeSelection {
                cutnodes: history.swap_remove(j),
                iterations: i,
                stop: IterationStop::NearCycle { earlier: j, at: i },
            });
        }
        history.push(next);
        nodes.push(next_nodes);
    }
    let ids = |s: &BTreeSet<OrNodeId>| s.iter().map(|n| n.0).collect::<Vec<_>>();
    let last = nodes.len() - 1;
    Err(Error::IterationLimitExceeded {
        iterations: cfg.max_iterations,
        last: ids(&nodes[last]),
        previous: ids(&nodes[last.saturating_sub(1)]),
    })
}

/// Cutnodes for `s_min` under whichever procedure the scheme needs.
pub fn select(
    s_min: f64,
    aot: &AndOrTree,
    table: &PhraseEntropyTable,
    cfg: &SelectionConfig,
) -> Result<CutnodeSet> {
    match cfg.scheme {
        EntropyScheme::ArcFrequency => select_iterative(s_min, aot, table, cfg).map(|s| s.cutnodes),
        _ => select_by_threshold(s_min, aot, table, cfg),
    }
}
