//! Random grammars and treebanks, an exhaustive tiler, and the randomized
//! property checks shared by the property tests and the acceptance run.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treecut::cut::{closure, select_by_threshold, CutnodeSet, SelectionConfig};
use treecut::extract::{extract_andor, extract_training, ChunkTree, RuleSet, DEFAULT_CHUNK_CAP};
use treecut::grammar::{Category, GrammarRule, ParseTree, RuleId, RuleInventory};
use treecut::index::{index_treebank, AndOrTree, OrNodeId};
use treecut::node_entropy::EntropyScheme;
use treecut::phrase::build_phrase_table;
use treecut::{covers, Error};

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub nonterminals: usize,
    pub terminals: usize,
    pub max_rules_per_category: usize,
    pub max_rhs: usize,
    /// Add rules with an empty right-hand side.
    pub empty_rules: bool,
    pub max_depth: usize,
    pub max_nodes: usize,
    /// Chance that a nonterminal slot is filled by a lexical lookup.
    pub lex_prob: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            nonterminals: 4,
            terminals: 3,
            max_rules_per_category: 3,
            max_rhs: 3,
            empty_rules: false,
            max_depth: 4,
            max_nodes: 30,
            lex_prob: 0.15,
        }
    }
}

pub struct Corpus {
    pub inv: RuleInventory,
    pub training: Vec<ParseTree>,
    pub test: Vec<ParseTree>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_grammar(rng: &mut impl Rng, cfg: &GenConfig) -> RuleInventory {
    let nts: Vec<Category> = (0..cfg.nonterminals)
        .map(|i| Category::new(format!("c{i}")))
        .collect();
    let ts: Vec<Category> = (0..cfg.terminals)
        .map(|i| Category::new(format!("t{i}")))
        .collect();
    let symbols: Vec<&Category> = nts.iter().chain(&ts).collect();
    let mut rules = Vec::new();
    for lhs in &nts {
        let n = rng.gen_range(1..=cfg.max_rules_per_category);
        for _ in 0..n {
            let len = rng.gen_range(1..=cfg.max_rhs);
            let rhs = (0..len)
                .map(|_| (*symbols.choose(rng).unwrap()).clone())
                .collect();
            rules.push((lhs.clone(), rhs));
        }
        if cfg.empty_rules && rng.gen_bool(0.5) {
            rules.push((lhs.clone(), Vec::new()));
        }
    }
    let rules = rules
        .into_iter()
        .enumerate()
        .map(|(i, (lhs, rhs))| GrammarRule {
            id: RuleId::new(format!("r{i}")),
            lhs,
            rhs,
        })
        .collect();
    RuleInventory::new(nts[0].clone(), rules).expect("generated grammar is well formed")
}

fn grow(
    rng: &mut impl Rng,
    inv: &RuleInventory,
    cat: &Category,
    depth: usize,
    cfg: &GenConfig,
    budget: &mut usize,
    root: bool,
) -> Option<ParseTree> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let choices: Vec<&GrammarRule> = inv.rules().iter().filter(|r| &r.lhs == cat).collect();
    let lexical =
        choices.is_empty() || depth >= cfg.max_depth || (!root && rng.gen_bool(cfg.lex_prob));
    if lexical {
        if root {
            return None;
        }
        return Some(ParseTree::lex(&format!("w{}", rng.gen_range(0..5))));
    }
    let rule = *choices.choose(rng).unwrap();
    let mut children = Vec::with_capacity(rule.rhs.len());
    for c in &rule.rhs {
        children.push(grow(rng, inv, c, depth + 1, cfg, budget, false)?);
    }
    Some(ParseTree::internal(rule.id.as_str(), children))
}

/// A tree rooted at the top category with at least one word and at most
/// `cfg.max_nodes` nodes.
pub fn random_tree(rng: &mut impl Rng, inv: &RuleInventory, cfg: &GenConfig) -> ParseTree {
    for _ in 0..10_000 {
        let mut budget = cfg.max_nodes;
        if let Some(t) = grow(rng, inv, inv.top(), 0, cfg, &mut budget, true) {
            if t.yield_length() > 0 {
                return t;
            }
        }
    }
    panic!("no tree found within the size limit");
}

pub fn random_corpus(rng: &mut impl Rng, cfg: &GenConfig, n_train: usize, n_test: usize) -> Corpus {
    loop {
        let inv = random_grammar(rng, cfg);
        // grammars whose top category cannot reach a word within the limits are redrawn
        let mut probe = ChaCha8Rng::seed_from_u64(rng.gen());
        let ok = (0..50).any(|_| {
            let mut budget = cfg.max_nodes;
            grow(&mut probe, &inv, inv.top(), 0, cfg, &mut budget, true)
                .is_some_and(|t| t.yield_length() > 0)
        });
        if !ok {
            continue;
        }
        let training = (0..n_train).map(|_| random_tree(rng, &inv, cfg)).collect();
        let test = (0..n_test).map(|_| random_tree(rng, &inv, cfg)).collect();
        return Corpus {
            inv,
            training,
            test,
        };
    }
}

pub fn random_seeds(rng: &mut impl Rng, aot: &AndOrTree, p: f64) -> BTreeSet<OrNodeId> {
    aot.ids().filter(|_| rng.gen_bool(p)).collect()
}

/// Preorder list of `(node, category of the slot it fills)`.
fn preorder<'t>(
    tree: &'t ParseTree,
    cat: Option<Category>,
    inv: &RuleInventory,
    out: &mut Vec<(&'t ParseTree, Option<Category>)>,
) {
    out.push((tree, cat));
    if let ParseTree::Internal { rule, children } = tree {
        let def = inv.get(rule).expect("valid tree");
        for (c, slot) in children.iter().zip(&def.rhs) {
            preorder(c, Some(slot.clone()), inv, out);
        }
    }
}

/// Tries every way of marking non-root nodes as chunk boundaries and checks
/// whether all resulting chunks are rules of the set.
pub fn brute_force_covers(rules: &RuleSet, tree: &ParseTree, inv: &RuleInventory) -> bool {
    let mut nodes = Vec::new();
    preorder(tree, None, inv, &mut nodes);
    let n = nodes.len() - 1;
    assert!(n < 24, "tree too large for exhaustive tiling");
    let position_of: HashMap<*const ParseTree, usize> = nodes
        .iter()
        .skip(1)
        .enumerate()
        .map(|(i, (node, _))| (*node as *const ParseTree, i))
        .collect();
    'masks: for mask in 0u32..(1u32 << n) {
        let flags: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        let mut pending = vec![tree];
        while let Some(root) = pending.pop() {
            let mut boundaries = Vec::new();
            let chunk = chunk_with_flags(root, inv, &flags, &position_of, &mut boundaries);
            if !rules.contains(&chunk) {
                continue 'masks;
            }
            pending.extend(boundaries);
        }
        return true;
    }
    false
}

fn chunk_with_flags<'t>(
    tree: &'t ParseTree,
    inv: &RuleInventory,
    flags: &[bool],
    position_of: &HashMap<*const ParseTree, usize>,
    boundaries: &mut Vec<&'t ParseTree>,
) -> ChunkTree {
    let ParseTree::Internal { rule, children } = tree else {
        unreachable!("chunks are rooted at internal nodes")
    };
    let def = inv.get(rule).unwrap();
    let mut out = Vec::new();
    for (c, cat) in children.iter().zip(&def.rhs) {
        let boundary = flags[position_of[&(c as *const ParseTree)]];
        out.push(match (c, boundary) {
            (ParseTree::Lex { .. }, true) => ChunkTree::Frontier {
                category: cat.clone(),
            },
            (ParseTree::Lex { .. }, false) => ChunkTree::LexSlot {
                category: cat.clone(),
            },
            (_, true) => {
                boundaries.push(c);
                ChunkTree::Frontier {
                    category: cat.clone(),
                }
            }
            (_, false) => chunk_with_flags(c, inv, flags, position_of, boundaries),
        });
    }
    ChunkTree::Apply {
        rule: rule.clone(),
        children: out,
    }
}

fn corpus_for(seed: u64, cfg: &GenConfig, max_train: usize) -> (Corpus, AndOrTree) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_train);
    let corpus = random_corpus(&mut r, cfg, n, 3);
    let aot = index_treebank(&corpus.training, &corpus.inv);
    (corpus, aot)
}

/// Closure is idempotent, monotone in its seeds, and never cuts a class
/// made only of nodes without lexical yield.
pub fn check_closure(seeds: u64) -> Result<(), String> {
    for seed in 0..seeds {
        let (_, aot) = corpus_for(seed, &GenConfig::default(), 50);
        let mut r = rng(seed ^ 0xc105);
        let small = random_seeds(&mut r, &aot, 0.15);
        let mut large = small.clone();
        large.extend(random_seeds(&mut r, &aot, 0.15));
        let a = closure(&small, &aot);
        let b = closure(&large, &aot);
        if closure(&a.cut_nodes(), &aot).cut_nodes() != a.cut_nodes() {
            return Err(format!("seed {seed}: closure not idempotent"));
        }
        if !a.cut_nodes().is_subset(&b.cut_nodes()) {
            return Err(format!("seed {seed}: closure not monotone"));
        }
        for class in a.cut_classes(&aot) {
            if !class.members.iter().any(|&m| aot.node(m).has_lexical_yield) {
                return Err(format!(
                    "seed {seed}: class {} has no lexical yield",
                    class.representative
                ));
            }
        }
        for s in &small {
            if aot.node(*s).has_lexical_yield && !a.is_cut(*s) {
                return Err(format!("seed {seed}: seed {s} lost"));
            }
        }
    }
    Ok(())
}

/// Raising the threshold never adds cutnodes.
pub fn check_antitone(seeds: u64) -> Result<(), String> {
    for seed in 0..seeds {
        let (corpus, aot) = corpus_for(seed, &GenConfig::default(), 50);
        let table = build_phrase_table(&corpus.training, &corpus.inv);
        for scheme in [EntropyScheme::Mixed, EntropyScheme::RhsLocal] {
            let cfg = SelectionConfig::with_scheme(scheme);
            let mut previous: Option<BTreeSet<OrNodeId>> = None;
            for step in 0..=12 {
                let s = step as f64 * 0.25;
                let now = select_by_threshold(s, &aot, &table, &cfg)
                    .map_err(|e| e.to_string())?
                    .cut_nodes();
                if let Some(prev) = &previous {
                    if !now.is_subset(prev) {
                        return Err(format!("seed {seed}, {scheme}: cutnodes grew at s = {s}"));
                    }
                }
                previous = Some(now);
            }
        }
    }
    Ok(())
}

/// Rules cut from the training trees tile every training tree.
pub fn check_self_coverage(seeds: u64) -> Result<(), String> {
    for seed in 0..seeds {
        let cfg = GenConfig {
            empty_rules: seed % 3 == 0,
            ..Default::default()
        };
        let (corpus, aot) = corpus_for(seed, &cfg, 50);
        let mut r = rng(seed ^ 0x5e1f);
        for p in [0.0, 0.1, 0.3, 0.6] {
            let cut = closure(&random_seeds(&mut r, &aot, p), &aot);
            let rules =
                extract_training(&corpus.training, &cut, &aot).map_err(|e| e.to_string())?;
            for (i, t) in corpus.training.iter().enumerate() {
                match covers(&rules, t) {
                    Some(tiling) if tiling.validate(&rules, t) => {}
                    Some(_) => {
                        return Err(format!("seed {seed}: invalid tiling of training tree {i}"))
                    }
                    None => return Err(format!("seed {seed}: training tree {i} not covered")),
                }
            }
        }
    }
    Ok(())
}

/// The memoized tiler agrees with exhaustive search on small trees.
pub fn check_tiler(cases: u64) -> Result<(), String> {
    let cfg = GenConfig {
        nonterminals: 3,
        terminals: 2,
        max_rules_per_category: 2,
        max_rhs: 2,
        max_depth: 4,
        max_nodes: 12,
        lex_prob: 0.2,
        ..Default::default()
    };
    let (mut yes, mut no) = (0, 0);
    for case in 0..cases {
        let mut r = rng(0x711e ^ case);
        let n = r.gen_range(1..=8);
        let corpus = random_corpus(&mut r, &cfg, n, 4);
        let aot = index_treebank(&corpus.training, &corpus.inv);
        let cut = closure(&random_seeds(&mut r, &aot, 0.4), &aot);
        let mut rules = if r.gen_bool(0.5) {
            extract_training(&corpus.training, &cut, &aot)
        } else {
            extract_andor(&aot, &cut, DEFAULT_CHUNK_CAP)
        }
        .map_err(|e| e.to_string())?;
        if r.gen_bool(0.5) {
            let drop_p = r.gen_range(0.0..0.5);
            let keep: Vec<bool> = (0..rules.len()).map(|_| !r.gen_bool(drop_p)).collect();
            let mut i = 0;
            rules.retain(|_| {
                i += 1;
                keep[i - 1]
            });
        }
        for t in corpus.test.iter().chain(&corpus.training) {
            if t.node_count() > 12 {
                continue;
            }
            let fast = covers(&rules, t);
            let slow = brute_force_covers(&rules, t, &corpus.inv);
            if fast.is_some() != slow {
                return Err(format!(
                    "case {case}: tiler says {}, exhaustive search says {slow} for {t}",
                    fast.is_some()
                ));
            }
            if let Some(tiling) = fast {
                if !tiling.validate(&rules, t) {
                    return Err(format!("case {case}: tiling does not validate for {t}"));
                }
                yes += 1;
            } else {
                no += 1;
            }
        }
    }
    if yes == 0 || no == 0 {
        return Err(format!(
            "degenerate instances: {yes} covered, {no} uncovered"
        ));
    }
    Ok(())
}

/// No extracted rule has an empty right-hand side, even when the grammar
/// has empty productions, and training-cut rules are among the and-or rules.
pub fn check_extraction(seeds: u64) -> Result<(usize, usize), String> {
    let mut empty_subtrees = 0;
    let mut exploded = 0;
    for seed in 0..seeds {
        let cfg = GenConfig {
            empty_rules: true,
            max_nodes: 25,
            ..Default::default()
        };
        let (corpus, aot) = corpus_for(seed, &cfg, 20);
        empty_subtrees += corpus
            .training
            .iter()
            .map(count_empty_subtrees)
            .sum::<usize>();
        let mut r = rng(seed ^ 0xe4);
        for p in [0.0, 0.2, 0.5, 1.0] {
            let cut: CutnodeSet = closure(&random_seeds(&mut r, &aot, p), &aot);
            let cut_rules =
                extract_training(&corpus.training, &cut, &aot).map_err(|e| e.to_string())?;
            let all = match extract_andor(&aot, &cut, DEFAULT_CHUNK_CAP) {
                Ok(all) => all,
                Err(Error::ChunkExplosion { .. }) => {
                    exploded += 1;
                    continue;
                }
                Err(e) => return Err(e.to_string()),
            };
            for set in [&cut_rules, &all] {
                if let Some(rule) = set.rules().iter().find(|r| r.reduction_length() == 0) {
                    return Err(format!("seed {seed}: empty rule {}", rule.chunk));
                }
                for rule in set.rules() {
                    rule.chunk
                        .validate(&corpus.inv)
                        .map_err(|e| format!("seed {seed}: {e}"))?;
                }
            }
            if !cut_rules.is_subset_of(&all) {
                return Err(format!(
                    "seed {seed}: training-cut rules missing from the and-or rules"
                ));
            }
        }
    }
    Ok((empty_subtrees, exploded))
}

fn count_empty_subtrees(t: &ParseTree) -> usize {
    let here = usize::from(!t.is_lex() && t.yield_length() == 0);
    here + t.children().iter().map(count_empty_subtrees).sum::<usize>()
}

/// With one training tree every or-node has one arc, and both extraction
/// modes agree.
pub fn check_single_arc(seeds: u64) -> Result<(), String> {
    for seed in 0..seeds {
        let mut r = rng(seed ^ 0x1a);
        let corpus = random_corpus(&mut r, &GenConfig::default(), 1, 0);
        let aot = index_treebank(&corpus.training, &corpus.inv);
        let cut = closure(&random_seeds(&mut r, &aot, 0.3), &aot);
        let a = extract_training(&corpus.training, &cut, &aot).map_err(|e| e.to_string())?;
        let b = extract_andor(&aot, &cut, DEFAULT_CHUNK_CAP).map_err(|e| e.to_string())?;
        if !(a.is_subset_of(&b) && b.is_subset_of(&a)) {
            return Err(format!("seed {seed}: modes disagree on a single tree"));
        }
    }
    Ok(())
}

/// Shuffling the training trees leaves the rule set unchanged up to order.
pub fn check_order_independence(seeds: u64) -> Result<(), String> {
    for seed in 0..seeds {
        let (mut corpus, aot) = corpus_for(seed, &GenConfig::default(), 30);
        let mut r = rng(seed ^ 0x0de);
        let seeds = random_seeds(&mut r, &aot, 0.3);
        let a = extract_training(&corpus.training, &closure(&seeds, &aot), &aot)
            .map_err(|e| e.to_string())?;
        corpus.training.shuffle(&mut r);
        let aot2 = index_treebank(&corpus.training, &corpus.inv);
        // or-node ids follow the training order, so map the seeds by path
        let seeds2: BTreeSet<OrNodeId> = seeds.iter().map(|&s| same_node(&aot, s, &aot2)).collect();
        let b = extract_training(&corpus.training, &closure(&seeds2, &aot2), &aot2)
            .map_err(|e| e.to_string())?;
        if a.len() != b.len() || !a.is_subset_of(&b) {
            return Err(format!("seed {seed}: rule set depends on training order"));
        }
    }
    Ok(())
}

fn same_node(from: &AndOrTree, id: OrNodeId, to: &AndOrTree) -> OrNodeId {
    let mut steps = Vec::new();
    let mut cur = id;
    while let Some(link) = &from.node(cur).parent {
        steps.push((link.rule.to_string(), link.index + 1));
        cur = link.node;
    }
    steps.reverse();
    let steps: Vec<(&str, usize)> = steps.iter().map(|(r, k)| (r.as_str(), *k)).collect();
    to.descend(&steps)
        .expect("same training trees index the same paths")
}

/// Selection with neighbor restrictions ends closed and conflict-free.
pub fn check_restrictions(seeds: u64) -> Result<(), String> {
    use treecut::cut::neighbor_conflicts;
    use treecut::node_entropy::NodeEntropyMap;
    for seed in 0..seeds {
        let (corpus, aot) = corpus_for(seed, &GenConfig::default(), 30);
        let table = build_phrase_table(&corpus.training, &corpus.inv);
        let entropies = NodeEntropyMap::compute(&aot, &table, EntropyScheme::Mixed, None);
        let cfg = SelectionConfig {
            neighbor_restrictions: true,
            ..Default::default()
        };
        for step in 0..8 {
            let s = step as f64 * 0.25;
            let set = select_by_threshold(s, &aot, &table, &cfg).map_err(|e| e.to_string())?;
            if !neighbor_conflicts(&set, &aot, &table, &entropies).is_empty() {
                return Err(format!("seed {seed}: conflicts left at s = {s}"));
            }
            if closure(&set.cut_nodes(), &aot).cut_nodes() != set.cut_nodes() {
                return Err(format!("seed {seed}: restricted set not closed at s = {s}"));
            }
        }
    }
    Ok(())
}
