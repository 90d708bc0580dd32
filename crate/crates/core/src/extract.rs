//! Specialized rules: tree chunks of original rules, cut out of the training
//! trees at cutnodes or enumerated from the and-or tree.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::cut::CutnodeSet;
use crate::error::{Error, Result};
use crate::grammar::{Category, ParseTree, RuleId, RuleInventory};
use crate::index::{AndOrTree, OrNodeId};
use crate::sexp::{self, Sexp};

/// A piece of a parse tree. `LexSlot` is a lexical lookup kept inside the
/// chunk; `Frontier` is a cut point to be filled by another rule (or by a
/// lexical lookup).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChunkTree {
    Apply {
        rule: RuleId,
        children: Vec<ChunkTree>,
    },
    LexSlot {
        category: Category,
    },
    Frontier {
        category: Category,
    },
}

impl ChunkTree {
    /// Leaf categories from left to right.
    pub fn leaves(&self) -> Vec<&Category> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Category>) {
        match self {
            ChunkTree::Apply { children, .. } => {
                children.iter().for_each(|c| c.collect_leaves(out))
            }
            ChunkTree::LexSlot { category } | ChunkTree::Frontier { category } => {
                out.push(category)
            }
        }
    }

    pub fn reduction_length(&self) -> usize {
        match self {
            ChunkTree::Apply { children, .. } => {
                children.iter().map(ChunkTree::reduction_length).sum()
            }
            _ => 1,
        }
    }

    pub fn root_rule(&self) -> Option<&RuleId> {
        match self {
            ChunkTree::Apply { rule, .. } => Some(rule),
            _ => None,
        }
    }

    /// Number of rule applications inside the chunk.
    pub fn size(&self) -> usize {
        match self {
            ChunkTree::Apply { children, .. } => {
                1 + children.iter().map(ChunkTree::size).sum::<usize>()
            }
            _ => 0,
        }
    }

    /// S-expression form: `(rule child ...)`, `lex` for a lexical slot and
    /// the bare category for a frontier.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            ChunkTree::Apply { rule, children } => {
                out.push('(');
                sexp::write_atom(out, rule.as_str());
                for c in children {
                    out.push(' ');
                    c.write(out);
                }
                out.push(')');
            }
            ChunkTree::LexSlot { .. } => out.push_str(crate::grammar::LEX),
            ChunkTree::Frontier { category } => sexp::write_atom(out, category.as_str()),
        }
    }

    /// Checks arities and slot categories against the inventory.
    pub fn validate(&self, inv: &RuleInventory) -> Result<()> {
        let ChunkTree::Apply { rule, children } = self else {
            return Ok(());
        };
        let def = inv.get(rule).ok_or_else(|| Error::UnknownRuleId {
            id: rule.clone(),
            pos: crate::error::Pos { line: 0, column: 0 },
        })?;
        if def.rhs.len() != children.len() {
            return Err(Error::ArityMismatch {
                rule: rule.clone(),
                expected: def.rhs.len(),
                found: children.len(),
                pos: crate::error::Pos { line: 0, column: 0 },
            });
        }
        for (k, (expected, child)) in def.rhs.iter().zip(children).enumerate() {
            let found = match child {
                ChunkTree::Apply { rule: r, .. } => match inv.get(r) {
                    Some(d) => d.lhs.clone(),
                    None => {
                        return Err(Error::UnknownRuleId {
                            id: r.clone(),
                            pos: crate::error::Pos { line: 0, column: 0 },
                        })
                    }
                },
                ChunkTree::LexSlot { category } | ChunkTree::Frontier { category } => {
                    category.clone()
                }
            };
            if &found != expected {
                return Err(Error::SlotMismatch {
                    rule: rule.clone(),
                    slot: format!("{rule}:RHS{}", k + 1),
                    child: child.root_rule().cloned().unwrap_or_else(RuleId::lex),
                    expected: expected.clone(),
                    found,
                });
            }
            child.validate(inv)?;
        }
        Ok(())
    }
}

impl fmt::Display for ChunkTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtractionMode {
    TrainingCut,
    AndorEnum,
}

impl ExtractionMode {
    pub fn name(self) -> &'static str {
        match self {
            ExtractionMode::TrainingCut => "training-cut",
            ExtractionMode::AndorEnum => "andor",
        }
    }
}

impl fmt::Display for ExtractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExtractionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "training-cut" | "training" => Ok(ExtractionMode::TrainingCut),
            "andor" | "andor-enum" => Ok(ExtractionMode::AndorEnum),
            other => Err(format!(
                "unknown extraction mode `{other}` (expected training-cut or andor)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecializedRule {
    pub name: String,
    pub lhs: Category,
    pub flat_rhs: Vec<Category>,
    pub chunk: ChunkTree,
    /// Training occurrences (0 for rules only the and-or tree licenses).
    pub support: u64,
}

impl SpecializedRule {
    pub fn new(lhs: Category, chunk: ChunkTree, support: u64) -> Self {
        let flat_rhs = chunk.leaves().into_iter().cloned().collect();
        SpecializedRule {
            name: rule_name(&lhs, &chunk),
            lhs,
            flat_rhs,
            chunk,
            support,
        }
    }

    pub fn reduction_length(&self) -> usize {
        self.flat_rhs.len()
    }

    /// `LHS => SYMBOLS`
    pub fn flat_form(&self) -> String {
        let (lhs, rhs) = flatten(self);
        let rhs: Vec<&str> = rhs.iter().map(|c| c.as_str()).collect();
        format!("{lhs} => {}", rhs.join(" "))
    }
}

/// `<lhs>_<first 8 hex digits of the SHA-256 of the chunk S-expression>`.
pub fn rule_name(lhs: &Category, chunk: &ChunkTree) -> String {
    let digest = Sha256::digest(chunk.render().as_bytes());
    let hex: String = digest[..4].iter().map(|b| format!("{b:02x}")).collect();
    format!("{lhs}_{hex}")
}

pub fn flatten(rule: &SpecializedRule) -> (Category, Vec<Category>) {
    (rule.lhs.clone(), rule.flat_rhs.clone())
}

/// Specialized rules deduplicated by chunk, in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub origin: ExtractionMode,
    rules: Vec<SpecializedRule>,
    by_chunk: HashMap<ChunkTree, usize>,
}

impl RuleSet {
    pub fn new(origin: ExtractionMode) -> Self {
        RuleSet {
            origin,
            rules: Vec::new(),
            by_chunk: HashMap::new(),
        }
    }

    /// Adds `support` occurrences of the chunk, creating its rule on first
    /// sight. Chunks without leaves are ignored.
    pub fn add(&mut self, lhs: &Category, chunk: ChunkTree, support: u64) {
        if chunk.reduction_length() == 0 {
            return;
        }
        match self.by_chunk.get(&chunk) {
            Some(&i) => self.rules[i].support += support,
            None => {
                self.by_chunk.insert(chunk.clone(), self.rules.len());
                self.rules
                    .push(SpecializedRule::new(lhs.clone(), chunk, support));
            }
        }
    }

    pub fn push(&mut self, rule: SpecializedRule) {
        if rule.reduction_length() == 0 {
            return;
        }
        match self.by_chunk.get(&rule.chunk) {
            Some(&i) => self.rules[i].support += rule.support,
            None => {
                self.by_chunk.insert(rule.chunk.clone(), self.rules.len());
                self.rules.push(rule);
            }
        }
    }

    pub fn rules(&self) -> &[SpecializedRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, chunk: &ChunkTree) -> Option<&SpecializedRule> {
        self.by_chunk.get(chunk).map(|&i| &self.rules[i])
    }

    pub fn contains(&self, chunk: &ChunkTree) -> bool {
        self.by_chunk.contains_key(chunk)
    }

    pub fn by_name(&self, name: &str) -> Option<&SpecializedRule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn is_subset_of(&self, other: &RuleSet) -> bool {
        self.rules.iter().all(|r| other.contains(&r.chunk))
    }

    /// Keeps only the rules `keep` accepts.
    pub fn retain(&mut self, keep: impl FnMut(&SpecializedRule) -> bool) {
        let origin = self.origin;
        let rules = std::mem::take(&mut self.rules);
        *self = RuleSet::new(origin);
        for r in rules.into_iter().filter(keep) {
            self.push(r);
        }
    }

    /// Rule file text. Each rule is a `name: LHS => SYMBOLS` line followed
    /// by the indented chunk and its support count as a trailing comment.
    pub fn render(&self, header: &[String]) -> String {
        let mut out = String::new();
        for line in header {
            out.push_str(&format!("# {line}\n"));
        }
        out.push_str(&format!("# origin: {}\n", self.origin));
        for r in &self.rules {
            out.push_str(&format!("{}: {}\n", r.name, r.flat_form()));
            out.push_str(&format!(
                "    {} ; support {}\n",
                r.chunk.render(),
                r.support
            ));
        }
        out
    }
}

/// Cuts one training tree at the cutnodes. The first chunk is the one rooted
/// at the tree's root; the others follow in breadth-first order. A lexical
/// lookup at a cut position becomes a frontier without a chunk of its own,
/// and subtrees without lexical yield are never cut.
pub fn cut_tree(
    tree: &ParseTree,
    cutnodes: &CutnodeSet,
    aot: &AndOrTree,
) -> Result<Vec<ChunkTree>> {
    let mut queue = vec![(tree, OrNodeId::ROOT, 0usize)];
    let mut chunks = Vec::new();
    let mut next = 0;
    while next < queue.len() {
        let (subtree, node, depth) = queue[next];
        next += 1;
        chunks.push(cut_chunk(subtree, node, depth, cutnodes, aot, &mut queue)?);
    }
    Ok(chunks)
}

fn cut_chunk<'t>(
    tree: &'t ParseTree,
    node: OrNodeId,
    depth: usize,
    cutnodes: &CutnodeSet,
    aot: &AndOrTree,
    queue: &mut Vec<(&'t ParseTree, OrNodeId, usize)>,
) -> Result<ChunkTree> {
    let ParseTree::Internal { rule, children } = tree else {
        return Ok(ChunkTree::LexSlot {
            category: aot.node(node).category.clone(),
        });
    };
    let arc = aot
        .node(node)
        .arc(rule)
        .filter(|a| a.children.len() == children.len())
        .ok_or(Error::PathNotInIndex { depth })?;
    let mut out = Vec::with_capacity(children.len());
    for (child, &child_node) in children.iter().zip(&arc.children) {
        let category = aot.node(child_node).category.clone();
        let piece = if !cutnodes.is_cut(child_node) {
            match child {
                ParseTree::Lex { .. } => ChunkTree::LexSlot { category },
                _ => cut_chunk(child, child_node, depth + 1, cutnodes, aot, queue)?,
            }
        } else {
            match child {
                ParseTree::Lex { .. } => ChunkTree::Frontier { category },
                _ if child.yield_length() == 0 => {
                    cut_chunk(child, child_node, depth + 1, cutnodes, aot, queue)?
                }
                _ => {
                    if aot.node(child_node).arc(&child.rule_id()).is_none() {
                        return Err(Error::PathNotInIndex { depth: depth + 1 });
                    }
                    queue.push((child, child_node, depth + 1));
                    ChunkTree::Frontier { category }
                }
            }
        };
        out.push(piece);
    }
    Ok(ChunkTree::Apply {
        rule: rule.clone(),
        children: out,
    })
}

fn chunk_lhs(chunk: &ChunkTree, aot: &AndOrTree, node: OrNodeId) -> Category {
    match chunk {
        ChunkTree::LexSlot { category } | ChunkTree::Frontier { category } => category.clone(),
        ChunkTree::Apply { .. } => aot.node(node).category.clone(),
    }
}

/// All chunks cut out of the training trees, with their occurrence counts.
pub fn extract_training(
    training: &[ParseTree],
    cutnodes: &CutnodeSet,
    aot: &AndOrTree,
) -> Result<RuleSet> {
    let mut set = RuleSet::new(ExtractionMode::TrainingCut);
    for tree in training {
        let mut queue = vec![(tree, OrNodeId::ROOT, 0usize)];
        let mut next = 0;
        while next < queue.len() {
            let (subtree, node, depth) = queue[next];
            next += 1;
            let chunk = cut_chunk(subtree, node, depth, cutnodes, aot, &mut queue)?;
            let lhs = chunk_lhs(&chunk, aot, node);
            set.add(&lhs, chunk, 1);
        }
    }
    Ok(set)
}

pub const DEFAULT_CHUNK_CAP: usize = 100_000;

struct Enumerator<'a> {
    aot: &'a AndOrTree,
    cutnodes: &'a CutnodeSet,
    cap: usize,
    full: Vec<Option<Vec<ChunkTree>>>,
    empty: Vec<Option<Vec<ChunkTree>>>,
}

impl Enumerator<'_> {
    /// Every chunk rooted at `node` through any of its rule arcs.
    fn rooted(&mut self, node: OrNodeId) -> Result<Vec<ChunkTree>> {
        if let Some(done) = &self.full[node.0] {
            return Ok(done.clone());
        }
        let mut out = Vec::new();
        for arc in &self.aot.node(node).arcs {
            if arc.rule.is_lex() {
                continue;
            }
            let mut options = Vec::with_capacity(arc.children.len());
            for &child in &arc.children {
                options.push(self.at_child(child)?);
            }
            self.cross(&arc.rule, &options, &mut out)?;
        }
        self.full[node.0] = Some(out.clone());
        Ok(out)
    }

    /// Expansions of `node` through instances that dominate no lexical lookup.
    fn empty_only(&mut self, node: OrNodeId) -> Result<Vec<ChunkTree>> {
        if let Some(done) = &self.empty[node.0] {
            return Ok(done.clone());
        }
        let mut out = Vec::new();
        for arc in &self.aot.node(node).arcs {
            if arc.rule.is_lex() || !arc.has_empty_instance() {
                continue;
            }
            let mut options = Vec::with_capacity(arc.children.len());
            for &child in &arc.children {
                options.push(self.empty_only(child)?);
            }
            self.cross(&arc.rule, &options, &mut out)?;
        }
        self.empty[node.0] = Some(out.clone());
        Ok(out)
    }

    fn at_child(&mut self, child: OrNodeId) -> Result<Vec<ChunkTree>> {
        let node = self.aot.node(child);
        let category = node.category.clone();
        let mut options = Vec::new();
        if self.cutnodes.is_cut(child) {
            if node.has_lexical_yield {
                options.push(ChunkTree::Frontier { category });
            }
            options.extend(self.empty_only(child)?);
        } else {
            if node.arc(&RuleId::lex()).is_some() {
                options.push(ChunkTree::LexSlot { category });
            }
            options.extend(self.rooted(child)?);
        }
        Ok(options)
    }

    fn cross(
        &self,
        rule: &RuleId,
        options: &[Vec<ChunkTree>],
        out: &mut Vec<ChunkTree>,
    ) -> Result<()> {
        let total = options
            .iter()
            .try_fold(1usize, |acc, o| acc.checked_mul(o.len()));
        match total {
            Some(n) if out.len() + n <= self.cap => {}
            _ => return Err(Error::ChunkExplosion { cap: self.cap }),
        }
        let mut partial: Vec<Vec<ChunkTree>> = vec![Vec::new()];
        for choice in options {
            let mut grown = Vec::with_capacity(partial.len() * choice.len());
            for prefix in &partial {
                for c in choice {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    grown.push(p);
                }
            }
            partial = grown;
        }
        out.extend(partial.into_iter().map(|children| ChunkTree::Apply {
            rule: rule.clone(),
            children,
        }));
        Ok(())
    }
}

/// Every chunk the and-or tree licenses at the root and at each cut class,
/// choosing arcs independently at every or-node.
pub fn extract_andor(aot: &AndOrTree, cutnodes: &CutnodeSet, cap: usize) -> Result<RuleSet> {
    let mut e = Enumerator {
        aot,
        cutnodes,
        cap,
        full: vec![None; aot.len()],
        empty: vec![None; aot.len()],
    };
    let mut roots = vec![OrNodeId::ROOT];
    for class in cutnodes.cut_classes(aot) {
        roots.extend(
            class
                .members
                .iter()
                .copied()
                .filter(|&m| m != OrNodeId::ROOT),
        );
    }
    let mut set = RuleSet::new(ExtractionMode::AndorEnum);
    for root in roots {
        let category = aot.node(root).category.clone();
        for chunk in e.rooted(root)? {
            set.add(&category, chunk, 0);
            if set.len() > cap {
                return Err(Error::ChunkExplosion { cap });
            }
        }
    }
    Ok(set)
}

/// Runs the chosen extraction. And-or rules get the support they have in
/// the training trees.
pub fn extract(
    mode: ExtractionMode,
    training: &[ParseTree],
    cutnodes: &CutnodeSet,
    aot: &AndOrTree,
) -> Result<RuleSet> {
    match mode {
        ExtractionMode::TrainingCut => extract_training(training, cutnodes, aot),
        ExtractionMode::AndorEnum => {
            let seen = extract_training(training, cutnodes, aot)?;
            let mut set = extract_andor(aot, cutnodes, DEFAULT_CHUNK_CAP)?;
            for rule in &mut set.rules {
                rule.support = seen.get(&rule.chunk).map_or(0, |r| r.support);
            }
            Ok(set)
        }
    }
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedLine {
        line,
        message: message.into(),
    }
}

fn chunk_from_sexp(
    s: &Sexp,
    slot: Option<&Category>,
    inv: &RuleInventory,
    line: usize,
) -> Result<ChunkTree> {
    match s {
        Sexp::Atom { text, .. } => {
            let Some(category) = slot else {
                return Err(bad(line, "a chunk must be rooted at a rule application"));
            };
            if text == crate::grammar::LEX {
                Ok(ChunkTree::LexSlot {
                    category: category.clone(),
                })
            } else {
                Ok(ChunkTree::Frontier {
                    category: Category::new(text.as_str()),
                })
            }
        }
        Sexp::List { items, .. } => {
            let Some((Sexp::Atom { text, .. }, rest)) = items.split_first() else {
                return Err(bad(line, "a chunk list must start with a rule id"));
            };
            let def = inv
                .get_str(text)
                .ok_or_else(|| bad(line, format!("unknown rule id `{text}`")))?;
            if def.rhs.len() != rest.len() {
                return Err(bad(
                    line,
                    format!(
                        "rule `{text}` expects {} children, found {}",
                        def.rhs.len(),
                        rest.len()
                    ),
                ));
            }
            let children = rest
                .iter()
                .zip(&def.rhs)
                .map(|(c, cat)| chunk_from_sexp(c, Some(cat), inv, line))
                .collect::<Result<Vec<_>>>()?;
            Ok(ChunkTree::Apply {
                rule: def.id.clone(),
                children,
            })
        }
    }
}

/// Reads a rule file written by [`RuleSet::render`], checking every chunk
/// against the inventory and against its flat form.
pub fn parse_rules(text: &str, inv: &RuleInventory) -> Result<RuleSet> {
    let mut origin = ExtractionMode::TrainingCut;
    let mut set = RuleSet::new(origin);
    let mut pending: Option<(usize, String, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(name) = comment.trim().strip_prefix("origin:") {
                origin = name.trim().parse().map_err(|e: String| bad(line, e))?;
            }
            continue;
        }
        if raw.starts_with(char::is_whitespace) {
            let Some((head_line, name, flat)) = pending.take() else {
                return Err(bad(line, "chunk without a preceding rule line"));
            };
            let (expr, comment) = match trimmed.split_once(';') {
                Some((e, c)) => (e, Some(c.trim())),
                None => (trimmed, None),
            };
            let support = match comment.and_then(|c| c.strip_prefix("support")) {
                Some(n) => n
                    .trim()
                    .parse()
                    .map_err(|_| bad(line, format!("bad support count `{}`", n.trim())))?,
                None => 0,
            };
            let exprs = sexp::read_all(expr).map_err(|e| bad(line, e.to_string()))?;
            let [expr] = exprs.as_slice() else {
                return Err(bad(line, "expected exactly one chunk expression"));
            };
            let chunk = chunk_from_sexp(expr, None, inv, line)?;
            chunk.validate(inv).map_err(|e| bad(line, e.to_string()))?;
            let lhs = inv
                .get(chunk.root_rule().expect("lists parse to applications"))
                .expect("validated")
                .lhs
                .clone();
            let rule = SpecializedRule {
                name,
                lhs: lhs.clone(),
                flat_rhs: chunk.leaves().into_iter().cloned().collect(),
                chunk,
                support,
            };
            if rule
                .flat_form()
                .split_whitespace()
                .ne(flat.split_whitespace())
            {
                return Err(bad(
                    head_line,
                    format!(
                        "flat form `{flat}` does not match its chunk (`{}`)",
                        rule.flat_form()
                    ),
                ));
            }
            if rule.reduction_length() == 0 {
                return Err(bad(
                    line,
                    "rules with an empty right-hand side are not allowed",
                ));
            }
            set.push(rule);
        } else {
            if let Some((l, name, _)) = &pending {
                return Err(bad(*l, format!("rule `{name}` has no chunk")));
            }
            let (name, flat) = trimmed
                .split_once(':')
                .ok_or_else(|| bad(line, "expected `name: LHS => SYMBOLS`"))?;
            if !flat.contains("=>") {
                return Err(bad(line, "expected `name: LHS => SYMBOLS`"));
            }
            pending = Some((line, name.trim().to_owned(), flat.trim().to_owned()));
        }
    }
    if let Some((l, name, _)) = pending {
        return Err(bad(l, format!("rule `{name}` has no chunk")));
    }
    set.origin = origin;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::closure;
    use crate::index::index_treebank;
    use crate::toy;
    use std::collections::BTreeSet;

    fn toy_cut() -> (AndOrTree, CutnodeSet, Vec<ParseTree>) {
        let inv = toy::inventory();
        let tb = toy::treebank();
        let aot = index_treebank(&tb.training, &inv);
        let seeds: BTreeSet<OrNodeId> = ["n3", "n4", "n6", "n9"]
            .iter()
            .map(|l| aot.by_label(l).unwrap())
            .collect();
        let cut = closure(&seeds, &aot);
        (aot, cut, tb.training)
    }

    fn flat_forms(set: &RuleSet) -> BTreeSet<String> {
        set.rules().iter().map(|r| r.flat_form()).collect()
    }

    #[test]
    fn first_tree_gives_two_chunks() {
        let (aot, cut, training) = toy_cut();
        let chunks = cut_tree(&training[0], &cut, &aot).unwrap();
        let rendered: Vec<String> = chunks.iter().map(|c| c.render()).collect();
        assert_eq!(
            rendered,
            [
                "(s_np_vp (np_pron lex) (vp_v_np lex np))",
                "(np_det_n lex lex)"
            ]
        );
    }

    #[test]
    fn fourth_tree_gives_the_long_rule_and_num() {
        let (aot, cut, training) = toy_cut();
        let chunks = cut_tree(&training[3], &cut, &aot).unwrap();
        let inv = toy::inventory();
        let lengths: Vec<usize> = chunks.iter().map(|c| c.reduction_length()).collect();
        assert_eq!(lengths, [5, 1]);
        for c in &chunks {
            c.validate(&inv).unwrap();
        }
    }

    #[test]
    fn five_training_rules() {
        let (aot, cut, training) = toy_cut();
        let set = extract_training(&training, &cut, &aot).unwrap();
        let expected: BTreeSet<String> = [
            "s => det n v prep np",
            "s => pron v np",
            "np => det n",
            "np => np prep np",
            "np => num",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(flat_forms(&set), expected);
        let det_n = set
            .rules()
            .iter()
            .find(|r| r.flat_form() == "np => det n")
            .unwrap();
        assert_eq!(det_n.support, 4);
        let np_pp = set
            .rules()
            .iter()
            .find(|r| r.flat_form() == "np => np prep np")
            .unwrap();
        assert_eq!(np_pp.support, 2);
    }

    #[test]
    fn no_cutnodes_gives_whole_trees() {
        let (aot, _, training) = toy_cut();
        let set = extract_training(&training, &CutnodeSet::empty(&aot), &aot).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set
            .rules()
            .iter()
            .all(|r| r.chunk.size() == r.chunk.render().matches('(').count()));
    }

    #[test]
    fn andor_adds_two_rules() {
        let (aot, cut, training) = toy_cut();
        let cut_rules = extract_training(&training, &cut, &aot).unwrap();
        let all = extract_andor(&aot, &cut, DEFAULT_CHUNK_CAP).unwrap();
        assert_eq!(all.len(), 7);
        assert!(cut_rules.is_subset_of(&all));
        let extra: BTreeSet<String> = all
            .rules()
            .iter()
            .filter(|r| !cut_rules.contains(&r.chunk))
            .map(|r| r.flat_form())
            .collect();
        assert_eq!(
            extra,
            ["s => det n v np", "s => pron v prep np"]
                .iter()
                .map(|s| s.to_string())
                .collect()
        );
    }

    #[test]
    fn tiny_cap_explodes() {
        let (aot, cut, _) = toy_cut();
        assert!(matches!(
            extract_andor(&aot, &cut, 3),
            Err(Error::ChunkExplosion { cap: 3 })
        ));
    }

    #[test]
    fn flatten_examples() {
        let (aot, cut, training) = toy_cut();
        let set = extract_training(&training, &cut, &aot).unwrap();
        let lengths: BTreeSet<(String, usize)> = set
            .rules()
            .iter()
            .map(|r| (r.lhs.to_string(), r.reduction_length()))
            .collect();
        assert!(lengths.contains(&("s".into(), 5)));
        assert!(lengths.contains(&("np".into(), 1)));
        assert!(lengths.contains(&("np".into(), 3)));
    }

    #[test]
    fn names_are_stable_hashes() {
        let chunk = ChunkTree::Apply {
            rule: "np_det_n".into(),
            children: vec![
                ChunkTree::LexSlot {
                    category: "det".into(),
                },
                ChunkTree::LexSlot {
                    category: "n".into(),
                },
            ],
        };
        let name = rule_name(&"np".into(), &chunk);
        assert!(name.starts_with("np_"));
        assert_eq!(name.len(), 3 + 8);
        assert_eq!(name, rule_name(&"np".into(), &chunk.clone()));
    }

    #[test]
    fn rule_file_round_trip() {
        let (aot, cut, training) = toy_cut();
        let inv = toy::inventory();
        let set = extract(ExtractionMode::AndorEnum, &training, &cut, &aot).unwrap();
        let text = set.render(&["threshold 1.0".into()]);
        let back = parse_rules(&text, &inv).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn rule_file_errors() {
        let inv = toy::inventory();
        let e = parse_rules("x: np => det\n    (np_det_n lex lex)\n", &inv).unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = parse_rules("x: np => det n\n    (np_det_n lex)\n", &inv).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_rules("x: np => det n\n", &inv).unwrap_err();
        assert!(e.to_string().contains("no chunk"), "{e}");
        let e = parse_rules("x: np => n det\n    (np_det_n n lex)\n", &inv).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
