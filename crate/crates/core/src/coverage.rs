//! Whether a specialized rule set derives a test tree, and how well it does
//! over a test set.
//!
//! A tree is covered when it can be tiled by rule chunks: each chunk matches
//! the tree's rule ids and lexical lookups exactly, and each frontier of a
//! chunk is filled either by a lexical lookup or by another tiled chunk.

use std::collections::HashMap;

use crate::extract::{ChunkTree, RuleSet};
use crate::grammar::{ParseTree, RuleId};

/// The tree's nodes in preorder.
struct Flat<'t> {
    nodes: Vec<&'t ParseTree>,
    children: Vec<Vec<usize>>,
}

impl<'t> Flat<'t> {
    fn new(tree: &'t ParseTree) -> Self {
        let mut flat = Flat {
            nodes: Vec::new(),
            children: Vec::new(),
        };
        flat.push(tree);
        flat
    }

    fn push(&mut self, tree: &'t ParseTree) -> usize {
        let id = self.nodes.len();
        self.nodes.push(tree);
        self.children.push(Vec::new());
        let kids: Vec<usize> = tree.children().iter().map(|c| self.push(c)).collect();
        self.children[id] = kids;
        id
    }
}

/// One rule placed at a tree node (preorder index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub node: usize,
    pub rule: String,
    pub reduction_length: usize,
}

/// A derivation of a tree from a rule set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tiling {
    /// Rule applications in preorder of the nodes they sit on.
    pub applications: Vec<Application>,
    /// Frontiers filled directly by a lexical lookup.
    pub lexical_frontiers: Vec<usize>,
}

impl Tiling {
    /// Re-checks the tiling against the tree: every chunk matches where it is
    /// placed, the root is covered, and the chunks' internal frontiers are
    /// exactly the other applications' roots.
    pub fn validate(&self, rules: &RuleSet, tree: &ParseTree) -> bool {
        let flat = Flat::new(tree);
        let mut roots: Vec<usize> = self.applications.iter().map(|a| a.node).collect();
        roots.sort_unstable();
        if roots.first() != Some(&0) || roots.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        let mut internal = vec![0];
        let mut lexical = Vec::new();
        for app in &self.applications {
            let Some(rule) = rules.by_name(&app.rule) else {
                return false;
            };
            if rule.reduction_length() != app.reduction_length {
                return false;
            }
            let mut frontiers = Vec::new();
            if !matches(&rule.chunk, &flat, app.node, &mut frontiers) {
                return false;
            }
            for f in frontiers {
                if flat.nodes[f].is_lex() {
                    lexical.push(f);
                } else {
                    internal.push(f);
                }
            }
        }
        internal.sort_unstable();
        lexical.sort_unstable();
        let mut expected_lexical = self.lexical_frontiers.clone();
        expected_lexical.sort_unstable();
        internal == roots && lexical == expected_lexical
    }

    pub fn uses(&self, rule: &str) -> usize {
        self.applications.iter().filter(|a| a.rule == rule).count()
    }
}

/// Matches `chunk` at node `at`, collecting the nodes under its frontiers.
fn matches(chunk: &ChunkTree, flat: &Flat, at: usize, frontiers: &mut Vec<usize>) -> bool {
    match chunk {
        ChunkTree::Frontier { .. } => {
            frontiers.push(at);
            true
        }
        ChunkTree::LexSlot { .. } => flat.nodes[at].is_lex(),
        ChunkTree::Apply { rule, children } => match flat.nodes[at] {
            ParseTree::Internal { rule: r, .. }
                if r == rule && flat.children[at].len() == children.len() =>
            {
                children
                    .iter()
                    .zip(&flat.children[at])
                    .all(|(c, &k)| matches(c, flat, k, frontiers))
            }
            _ => false,
        },
    }
}

/// Per tree node: unvisited, untileable, or the chosen rule with the nodes
/// under its frontiers.
type Memo = Vec<Option<Option<(usize, Vec<usize>)>>>;

/// Rules indexed by the rule id at their chunk root, longest reduction
/// first, then by name.
pub struct Matcher<'r> {
    rules: &'r RuleSet,
    by_root: HashMap<&'r RuleId, Vec<usize>>,
}

impl<'r> Matcher<'r> {
    pub fn new(rules: &'r RuleSet) -> Self {
        let mut by_root: HashMap<&RuleId, Vec<usize>> = HashMap::new();
        for (i, r) in rules.rules().iter().enumerate() {
            if let Some(root) = r.chunk.root_rule() {
                by_root.entry(root).or_default().push(i);
            }
        }
        for list in by_root.values_mut() {
            list.sort_by(|&a, &b| {
                let (ra, rb) = (&rules.rules()[a], &rules.rules()[b]);
                rb.reduction_length()
                    .cmp(&ra.reduction_length())
                    .then_with(|| ra.name.cmp(&rb.name))
            });
        }
        Matcher { rules, by_root }
    }

    pub fn covers(&self, tree: &ParseTree) -> Option<Tiling> {
        let flat = Flat::new(tree);
        let mut memo: Memo = vec![None; flat.nodes.len()];
        if !self.tile(&flat, 0, &mut memo) {
            return None;
        }
        let mut tiling = Tiling {
            applications: Vec::new(),
            lexical_frontiers: Vec::new(),
        };
        let mut stack = vec![0];
        while let Some(node) = stack.pop() {
            let (rule, frontiers) = memo[node].clone().flatten().expect("tiled");
            let rule = &self.rules.rules()[rule];
            tiling.applications.push(Application {
                node,
                rule: rule.name.clone(),
                reduction_length: rule.reduction_length(),
            });
            for f in frontiers.into_iter().rev() {
                if flat.nodes[f].is_lex() {
                    tiling.lexical_frontiers.push(f);
                } else {
                    stack.push(f);
                }
            }
        }
        tiling.applications.sort_by_key(|a| a.node);
        tiling.lexical_frontiers.sort_unstable();
        Some(tiling)
    }

    fn tile(&self, flat: &Flat, at: usize, memo: &mut Memo) -> bool {
        if let Some(done) = &memo[at] {
            return done.is_some();
        }
        let ParseTree::Internal { rule, .. } = flat.nodes[at] else {
            return false;
        };
        let mut found = None;
        for &i in self.by_root.get(rule).map(Vec::as_slice).unwrap_or(&[]) {
            let mut frontiers = Vec::new();
            if !matches(&self.rules.rules()[i].chunk, flat, at, &mut frontiers) {
                continue;
            }
            if frontiers
                .iter()
                .all(|&f| flat.nodes[f].is_lex() || self.tile(flat, f, memo))
            {
                found = Some((i, frontiers));
                break;
            }
        }
        let ok = found.is_some();
        memo[at] = Some(found);
        ok
    }
}

/// A tiling of `tree` if the rules derive it. Among several tilings, the one
/// preferring longer reductions (then smaller names) top-down is returned.
pub fn covers(rules: &RuleSet, tree: &ParseTree) -> Option<Tiling> {
    Matcher::new(rules).covers(tree)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub tilings: Vec<Option<Tiling>>,
    pub coverage: f64,
    /// The test set was empty; coverage is then reported as 1.
    pub empty_test_set: bool,
}

impl CoverageReport {
    pub fn covered(&self) -> usize {
        self.tilings.iter().filter(|t| t.is_some()).count()
    }

    /// One line per test tree: index, verdict, and the rules used.
    pub fn render(&self, test: &[ParseTree]) -> String {
        let mut out = format!(
            "coverage\t{:.4}\t{}/{}\n",
            self.coverage,
            self.covered(),
            self.tilings.len()
        );
        if self.empty_test_set {
            out.push_str("# warning: empty test set, coverage taken as 1\n");
        }
        for (i, (tiling, tree)) in self.tilings.iter().zip(test).enumerate() {
            match tiling {
                Some(t) => {
                    let rules: Vec<&str> = t.applications.iter().map(|a| a.rule.as_str()).collect();
                    out.push_str(&format!(
                        "{}\tcovered\t{}\t{}\n",
                        i + 1,
                        rules.join(" "),
                        tree.words().join(" ")
                    ));
                }
                None => out.push_str(&format!(
                    "{}\tuncovered\t-\t{}\n",
                    i + 1,
                    tree.words().join(" ")
                )),
            }
        }
        out
    }
}

pub fn coverage_report(rules: &RuleSet, test: &[ParseTree]) -> CoverageReport {
    let matcher = Matcher::new(rules);
    let tilings: Vec<Option<Tiling>> = test.iter().map(|t| matcher.covers(t)).collect();
    let covered = tilings.iter().filter(|t| t.is_some()).count();
    let empty = test.is_empty();
    CoverageReport {
        coverage: if empty {
            1.0
        } else {
            covered as f64 / test.len() as f64
        },
        tilings,
        empty_test_set: empty,
    }
}

/// Fraction of `test` the rules derive (1 for an empty test set).
pub fn coverage(rules: &RuleSet, test: &[ParseTree]) -> f64 {
    coverage_report(rules, test).coverage
}

pub const BUCKET_LABELS: [&str; 4] = ["1", "2", "3", ">=4"];

/// Reduction lengths bucketed as 1, 2, 3 and 4 or more.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStats {
    pub weighted: bool,
    pub buckets: [u64; 4],
    /// Test trees without a tiling (weighted mode only).
    pub skipped: usize,
}

impl ReductionStats {
    pub fn total(&self) -> u64 {
        self.buckets.iter().sum()
    }

    pub fn percentages(&self) -> [f64; 4] {
        let total = self.total();
        if total == 0 {
            return [0.0; 4];
        }
        self.buckets.map(|b| 100.0 * b as f64 / total as f64)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "reduction lengths ({})\n",
            if self.weighted {
                "weighted by use"
            } else {
                "per rule"
            }
        );
        out.push_str(&BUCKET_LABELS.join("\t"));
        out.push('\n');
        let cells: Vec<String> = self
            .percentages()
            .iter()
            .map(|p| format!("{p:.1}"))
            .collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
        if self.skipped > 0 {
            out.push_str(&format!(
                "# {} untileable test trees skipped\n",
                self.skipped
            ));
        }
        out
    }
}

fn bucket(length: usize) -> usize {
    length.clamp(1, 4) - 1
}

/// Unweighted: one count per distinct rule. Weighted: one count per rule
/// application in the chosen tilings of the test trees.
pub fn reduction_stats(rules: &RuleSet, test: &[ParseTree], weighted: bool) -> ReductionStats {
    let mut stats = ReductionStats {
        weighted,
        buckets: [0; 4],
        skipped: 0,
    };
    if !weighted {
        for r in rules.rules() {
            stats.buckets[bucket(r.reduction_length())] += 1;
        }
        return stats;
    }
    let matcher = Matcher::new(rules);
    for tree in test {
        match matcher.covers(tree) {
            Some(t) => {
                for a in &t.applications {
                    stats.buckets[bucket(a.reduction_length)] += 1;
                }
            }
            None => stats.skipped += 1,
        }
    }
    stats
}
