//! Rules, categories, implicit parse trees and their text formats.
//!
//! A grammar file holds one rule per line:
//!
//! ```text
//! # comment
//! pp_prep_np pp -> prep np
//! e_rule     x  ->
//! ```
//!
//! A treebank file holds one S-expression per tree. Internal nodes are
//! `(rule_id child ...)`; lexical lookups are `(lex word)`, with the word
//! quoted when it contains spaces.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Pos, Result};
use crate::sexp::{self, Sexp};

/// The rule identifier reserved for lexical lookups.
pub const LEX: &str = "lex";

macro_rules! symbol_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Self {
                $name(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }
    };
}

symbol_newtype!(
    /// A syntactic category such as `np` or `det`.
    Category
);
symbol_newtype!(
    /// The name of a grammar rule; `lex` denotes a lexical lookup.
    RuleId
);

impl RuleId {
    pub fn lex() -> Self {
        RuleId(LEX.to_owned())
    }

    pub fn is_lex(&self) -> bool {
        self.0 == LEX
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarRule {
    pub id: RuleId,
    pub lhs: Category,
    pub rhs: Vec<Category>,
}

impl fmt::Display for GrammarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ->", self.id, self.lhs)?;
        for c in &self.rhs {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

/// The rules of the original grammar, in file order, plus the root category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInventory {
    rules: Vec<GrammarRule>,
    by_id: BTreeMap<RuleId, usize>,
    top: Category,
}

impl RuleInventory {
    pub fn new(top: Category, rules: Vec<GrammarRule>) -> Result<Self> {
        let mut by_id = BTreeMap::new();
        for (i, rule) in rules.iter().enumerate() {
            if rule.id.is_lex() {
                return Err(Error::MalformedLine {
                    line: i + 1,
                    message: format!("`{LEX}` is reserved for lexical lookups"),
                });
            }
            if by_id.insert(rule.id.clone(), i).is_some() {
                return Err(Error::DuplicateRuleId {
                    id: rule.id.clone(),
                    line: i + 1,
                });
            }
        }
        Ok(RuleInventory { rules, by_id, top })
    }

    pub fn top(&self) -> &Category {
        &self.top
    }

    pub fn rules(&self) -> &[GrammarRule] {
        &self.rules
    }

    pub fn get(&self, id: &RuleId) -> Option<&GrammarRule> {
        self.by_id.get(id).map(|&i| &self.rules[i])
    }

    pub fn get_str(&self, id: &str) -> Option<&GrammarRule> {
        self.get(&RuleId::from(id))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rules whose id does not spell out their shape as `lhs_rhs1_rhs2...`.
    pub fn mnemonic_disagreements(&self) -> Vec<&RuleId> {
        self.rules
            .iter()
            .filter(|r| mnemonic_shape(&r.id) != Some((r.lhs.clone(), r.rhs.clone())))
            .map(|r| &r.id)
            .collect()
    }

    /// Checks one tree against the inventory: arities, slot categories and
    /// the root category.
    pub fn validate_tree(&self, tree: &ParseTree) -> Result<()> {
        let origin = Pos { line: 0, column: 0 };
        match tree {
            ParseTree::Lex { .. } => Err(Error::Syntax {
                pos: origin,
                message: "tree root must be a rule application".into(),
            }),
            ParseTree::Internal { rule, .. } => {
                let lhs = &self.lookup(rule, origin)?.lhs;
                if lhs != &self.top {
                    return Err(Error::RootCategoryMismatch {
                        expected: self.top.clone(),
                        found: lhs.clone(),
                        pos: origin,
                    });
                }
                self.validate_subtree(tree, origin)
            }
        }
    }

    fn lookup(&self, id: &RuleId, pos: Pos) -> Result<&GrammarRule> {
        self.get(id).ok_or_else(|| Error::UnknownRuleId {
            id: id.clone(),
            pos,
        })
    }

    fn validate_subtree(&self, tree: &ParseTree, pos: Pos) -> Result<()> {
        let ParseTree::Internal { rule, children } = tree else {
            return Ok(());
        };
        let def = self.lookup(rule, pos)?;
        if def.rhs.len() != children.len() {
            return Err(Error::ArityMismatch {
                rule: rule.clone(),
                expected: def.rhs.len(),
                found: children.len(),
                pos,
            });
        }
        for (slot, child) in def.rhs.iter().zip(children) {
            if let ParseTree::Internal {
                rule: child_rule, ..
            } = child
            {
                let child_lhs = &self.lookup(child_rule, pos)?.lhs;
                if child_lhs != slot {
                    return Err(Error::CategoryMismatch {
                        child: child_rule.clone(),
                        expected: slot.clone(),
                        found: child_lhs.clone(),
                        pos,
                    });
                }
            }
            self.validate_subtree(child, pos)?;
        }
        Ok(())
    }

    /// Renders the inventory in the grammar file format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push_str(&rule.to_string());
            out.push('\n');
        }
        out
    }
}

/// Reads `vp_v_np` as `vp -> v np`. Only meaningful for grammars that follow
/// the underscore naming convention.
pub fn mnemonic_shape(id: &RuleId) -> Option<(Category, Vec<Category>)> {
    let mut parts = id.as_str().split('_');
    let lhs = parts.next().filter(|s| !s.is_empty())?;
    let rhs: Vec<Category> = parts.map(Category::from).collect();
    if rhs.iter().any(|c| c.as_str().is_empty()) {
        return None;
    }
    Some((Category::from(lhs), rhs))
}

/// Builds an inventory purely from mnemonic rule names.
pub fn inventory_from_mnemonics<'a>(
    top: Category,
    ids: impl IntoIterator<Item = &'a str>,
) -> Result<RuleInventory> {
    let mut rules = Vec::new();
    for (i, id) in ids.into_iter().enumerate() {
        let id = RuleId::from(id);
        let (lhs, rhs) = mnemonic_shape(&id).ok_or_else(|| Error::MalformedLine {
            line: i + 1,
            message: format!("rule id `{id}` is not a mnemonic name"),
        })?;
        rules.push(GrammarRule { id, lhs, rhs });
    }
    RuleInventory::new(top, rules)
}

/// Parses a grammar file. Duplicate ids are always rejected.
pub fn parse_rule_inventory(text: &str, top: Category) -> Result<RuleInventory> {
    parse_rule_inventory_with(text, top, false)
}

/// Like [`parse_rule_inventory`]; with `strict` set, every right-hand-side
/// category must also occur as the left-hand side of some rule (a closed
/// nonterminal vocabulary with no preterminals).
pub fn parse_rule_inventory_with(text: &str, top: Category, strict: bool) -> Result<RuleInventory> {
    let mut rules: Vec<GrammarRule> = Vec::new();
    let mut lines: Vec<usize> = Vec::new();
    let mut seen: BTreeMap<RuleId, usize> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let malformed = |message: &str| Error::MalformedLine {
            line,
            message: message.to_owned(),
        };
        let mut tokens = content.split_whitespace();
        let id = tokens.next().ok_or_else(|| malformed("missing rule id"))?;
        let lhs = tokens
            .next()
            .ok_or_else(|| malformed("missing left-hand side"))?;
        if tokens.next() != Some("->") {
            return Err(malformed("expected `<rule_id> <lhs> -> <rhs ...>`"));
        }
        let rhs: Vec<Category> = tokens.map(Category::from).collect();
        if rhs.iter().any(|c| c.as_str() == "->") {
            return Err(malformed("more than one `->`"));
        }
        if id == LEX {
            return Err(malformed("`lex` is reserved for lexical lookups"));
        }
        let id = RuleId::from(id);
        if seen.insert(id.clone(), line).is_some() {
            return Err(Error::DuplicateRuleId { id, line });
        }
        rules.push(GrammarRule {
            id,
            lhs: Category::from(lhs),
            rhs,
        });
        lines.push(line);
    }
    if strict {
        let lhs: std::collections::BTreeSet<&Category> = rules.iter().map(|r| &r.lhs).collect();
        for (rule, &line) in rules.iter().zip(&lines) {
            if let Some(c) = rule.rhs.iter().find(|c| !lhs.contains(c)) {
                return Err(Error::UnknownCategory {
                    category: c.clone(),
                    line,
                });
            }
        }
    }
    RuleInventory::new(top, rules)
}

/// An implicit parse tree: internal nodes carry rule names, leaves are
/// lexical lookups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParseTree {
    Internal {
        rule: RuleId,
        children: Vec<ParseTree>,
    },
    Lex {
        word: String,
    },
}

impl ParseTree {
    pub fn internal(rule: &str, children: Vec<ParseTree>) -> Self {
        ParseTree::Internal {
            rule: RuleId::from(rule),
            children,
        }
    }

    pub fn lex(word: &str) -> Self {
        ParseTree::Lex {
            word: word.to_owned(),
        }
    }

    /// The rule id at this node, `lex` for a leaf.
    pub fn rule_id(&self) -> RuleId {
        match self {
            ParseTree::Internal { rule, .. } => rule.clone(),
            ParseTree::Lex { .. } => RuleId::lex(),
        }
    }

    pub fn children(&self) -> &[ParseTree] {
        match self {
            ParseTree::Internal { children, .. } => children,
            ParseTree::Lex { .. } => &[],
        }
    }

    pub fn is_lex(&self) -> bool {
        matches!(self, ParseTree::Lex { .. })
    }

    /// Number of lexical lookups dominated by this node.
    pub fn yield_length(&self) -> usize {
        match self {
            ParseTree::Lex { .. } => 1,
            ParseTree::Internal { children, .. } => children.iter().map(Self::yield_length).sum(),
        }
    }

    /// Number of nodes, leaves included.
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Self::node_count).sum::<usize>()
    }

    /// The words of the sentence, left to right.
    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ParseTree::Lex { word } => out.push(word),
            ParseTree::Internal { children, .. } => {
                children.iter().for_each(|c| c.collect_words(out))
            }
        }
    }

    /// The subtree reached by following child indices from this node.
    pub fn at_path(&self, path: &[usize]) -> Option<&ParseTree> {
        path.iter()
            .try_fold(self, |node, &i| node.children().get(i))
    }

    /// Single-line S-expression rendering, readable by [`parse_treebank`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            ParseTree::Lex { word } => {
                out.push_str("(lex ");
                sexp::write_atom(out, word);
                out.push(')');
            }
            ParseTree::Internal { rule, children } => {
                out.push('(');
                out.push_str(rule.as_str());
                for child in children {
                    out.push(' ');
                    child.render_into(out);
                }
                out.push(')');
            }
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Renders trees one per line.
pub fn render_treebank(trees: &[ParseTree]) -> String {
    let mut out = String::new();
    for t in trees {
        out.push_str(&t.render());
        out.push('\n');
    }
    out
}

/// A treebank split into the trees rules are extracted from and the trees
/// coverage is measured on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Treebank {
    pub training: Vec<ParseTree>,
    pub test: Vec<ParseTree>,
}

/// Parses and validates a treebank file against `inv`.
pub fn parse_treebank(text: &str, inv: &RuleInventory) -> Result<Vec<ParseTree>> {
    sexp::read_all(text)?
        .iter()
        .map(|expr| {
            let tree = tree_from_sexp(expr, inv)?;
            let ParseTree::Internal { rule, .. } = &tree else {
                return Err(Error::Syntax {
                    pos: expr.pos(),
                    message: "tree root must be a rule application".into(),
                });
            };
            let lhs = &inv.lookup(rule, expr.pos())?.lhs;
            if lhs != inv.top() {
                return Err(Error::RootCategoryMismatch {
                    expected: inv.top().clone(),
                    found: lhs.clone(),
                    pos: expr.pos(),
                });
            }
            Ok(tree)
        })
        .collect()
}

fn tree_from_sexp(expr: &Sexp, inv: &RuleInventory) -> Result<ParseTree> {
    let Sexp::List { items, pos } = expr else {
        return Err(Error::Syntax {
            pos: expr.pos(),
            message: "expected `(rule ...)` or `(lex word)`".into(),
        });
    };
    let pos = *pos;
    let Some(Sexp::Atom {
        text: head,
        quoted: false,
        ..
    }) = items.first()
    else {
        return Err(Error::Syntax {
            pos,
            message: "expected a rule id at the head of the list".into(),
        });
    };
    if head == LEX {
        return match &items[1..] {
            [Sexp::Atom { text, .. }] => Ok(ParseTree::Lex { word: text.clone() }),
            _ => Err(Error::Syntax {
                pos,
                message: "`lex` takes exactly one word".into(),
            }),
        };
    }
    let rule = RuleId::from(head.as_str());
    let def = inv.lookup(&rule, pos)?;
    let args = &items[1..];
    if args.len() != def.rhs.len() {
        return Err(Error::ArityMismatch {
            rule,
            expected: def.rhs.len(),
            found: args.len(),
            pos,
        });
    }
    let mut children = Vec::with_capacity(args.len());
    for (slot, arg) in def.rhs.iter().zip(args) {
        let child = tree_from_sexp(arg, inv)?;
        if let ParseTree::Internal {
            rule: child_rule, ..
        } = &child
        {
            let child_lhs = &inv.lookup(child_rule, arg.pos())?.lhs;
            if child_lhs != slot {
                return Err(Error::CategoryMismatch {
                    child: child_rule.clone(),
                    expected: slot.clone(),
                    found: child_lhs.clone(),
                    pos: arg.pos(),
                });
            }
        }
        children.push(child);
    }
    Ok(ParseTree::Internal { rule, children })
}
