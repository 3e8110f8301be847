//! Source-side pre-ordering over bracketed constituency trees.
//!
//! Trees are read in Penn-style bracketed form, `(S (NP Ram) (VP (V ate)
//! (NP mango)))`. Rules are written one per line as
//! `PARENT: L1 L2 ... -> i j ...` and permute the children of a node whose
//! label and child-label sequence match exactly.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{read_lines, Sentence};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("tree parse error at offset {offset}: {message}")]
    Tree { offset: usize, message: String },

    #[error("rule line {line}: {message}")]
    Rule { line: usize, message: String },
}

fn tree_err(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Tree {
        offset,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeContent {
    Token(String),
    Children(Vec<ParseNode>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseNode {
    pub label: String,
    pub content: NodeContent,
}

impl ParseNode {
    pub fn leaf(label: &str, token: &str) -> Self {
        ParseNode {
            label: label.to_owned(),
            content: NodeContent::Token(token.to_owned()),
        }
    }

    pub fn internal(label: &str, children: Vec<ParseNode>) -> Self {
        assert!(!children.is_empty(), "internal nodes need children");
        ParseNode {
            label: label.to_owned(),
            content: NodeContent::Children(children),
        }
    }

    pub fn children(&self) -> &[ParseNode] {
        match &self.content {
            NodeContent::Children(c) => c,
            NodeContent::Token(_) => &[],
        }
    }

    /// Leaf tokens, left to right.
    pub fn fringe(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_fringe(&mut out);
        out
    }

    fn collect_fringe<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.content {
            NodeContent::Token(t) => out.push(t),
            NodeContent::Children(children) => {
                for c in children {
                    c.collect_fringe(out);
                }
            }
        }
    }
}

/// Canonical form: single spaces, no padding inside brackets.
impl fmt::Display for ParseNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        match &self.content {
            NodeContent::Token(t) => write!(f, " {t}")?,
            NodeContent::Children(children) => {
                for c in children {
                    write!(f, " {c}")?;
                }
            }
        }
        f.write_str(")")
    }
}

struct TreeParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> TreeParser<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn atom(&mut self) -> &'a str {
        let rest = &self.text[self.pos..];
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    fn node(&mut self) -> Result<ParseNode, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => self.pos += 1,
            Some(_) => return Err(tree_err(self.pos, "expected '('")),
            None => return Err(tree_err(self.pos, "unexpected end of input")),
        }
        self.skip_ws();
        let label_at = self.pos;
        let label = self.atom();
        if label.is_empty() {
            return Err(match self.peek() {
                None => tree_err(self.pos, "unexpected end of input"),
                Some(')') => tree_err(label_at, "empty node"),
                Some(_) => tree_err(label_at, "node without a label"),
            });
        }
        self.skip_ws();
        let content = match self.peek() {
            None => return Err(tree_err(self.pos, "unexpected end of input")),
            Some(')') => return Err(tree_err(self.pos, format!("node {label} has no children"))),
            Some('(') => {
                let mut children = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some('(') => children.push(self.node()?),
                        Some(')') => break,
                        None => return Err(tree_err(self.pos, "unexpected end of input")),
                        Some(_) => return Err(tree_err(self.pos, "bare token among child nodes")),
                    }
                }
                NodeContent::Children(children)
            }
            Some(_) => {
                let token = self.atom();
                self.skip_ws();
                if self.peek() == Some('(') {
                    return Err(tree_err(self.pos, "child node after a token"));
                }
                if self.peek().is_some() && self.peek() != Some(')') {
                    return Err(tree_err(self.pos, "more than one token in a leaf"));
                }
                NodeContent::Token(token.to_owned())
            }
        };
        self.skip_ws();
        match self.peek() {
            Some(')') => self.pos += 1,
            None => return Err(tree_err(self.pos, "unexpected end of input")),
            Some(_) => return Err(tree_err(self.pos, "expected ')'")),
        }
        Ok(ParseNode {
            label: label.to_owned(),
            content,
        })
    }
}

/// Parses one bracketed tree. Offsets in errors are byte offsets into
/// `text`.
pub fn parse_bracketed(text: &str) -> Result<ParseNode, ParseError> {
    let mut p = TreeParser { text, pos: 0 };
    let tree = p.node()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(tree_err(p.pos, "trailing input after tree"));
    }
    Ok(tree)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReorderRule {
    pub parent_label: String,
    pub child_pattern: Vec<String>,
    /// 1-based: output child `k` is input child `permutation[k] - 1`.
    pub permutation: Vec<usize>,
}

impl ReorderRule {
    pub fn new(parent_label: &str, child_pattern: &[&str], permutation: &[usize]) -> Result<Self, String> {
        let n = child_pattern.len();
        if n == 0 {
            return Err("empty child pattern".into());
        }
        if permutation.len() != n {
            return Err(format!(
                "permutation has {} entries for {n} children",
                permutation.len()
            ));
        }
        let mut seen = vec![false; n];
        for &i in permutation {
            if i == 0 || i > n || std::mem::replace(&mut seen[i - 1], true) {
                return Err(format!("{permutation:?} is not a permutation of 1..={n}"));
            }
        }
        Ok(ReorderRule {
            parent_label: parent_label.to_owned(),
            child_pattern: child_pattern.iter().map(|s| s.to_string()).collect(),
            permutation: permutation.to_vec(),
        })
    }

    fn matches(&self, node: &ParseNode) -> bool {
        let children = node.children();
        node.label == self.parent_label
            && children.len() == self.child_pattern.len()
            && children.iter().zip(&self.child_pattern).all(|(c, l)| &c.label == l)
    }
}

impl fmt::Display for ReorderRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ->", self.parent_label, self.child_pattern.join(" "))?;
        for i in &self.permutation {
            write!(f, " {i}")?;
        }
        Ok(())
    }
}

/// Rules in priority order; the first match at a node wins.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<ReorderRule>,
}

impl RuleSet {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            rules.push(parse_rule(line).map_err(|message| ParseError::Rule { line: i + 1, message })?);
        }
        Ok(RuleSet { rules })
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        let lines = read_lines(path)?;
        Ok(RuleSet::parse(&lines.join("\n"))?)
    }

    /// The shipped demo grammar.
    pub fn demo() -> Self {
        RuleSet::parse(include_str!("../data/demo_rules.txt")).expect("demo rules parse")
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

fn parse_rule(line: &str) -> Result<ReorderRule, String> {
    let (parent, rest) = line
        .split_once(':')
        .ok_or_else(|| "missing ':' after parent label".to_string())?;
    let (pattern, perm) = rest.split_once("->").ok_or_else(|| "missing '->'".to_string())?;
    let parent = parent.trim();
    if parent.is_empty() || parent.contains(char::is_whitespace) {
        return Err(format!("bad parent label {parent:?}"));
    }
    let pattern: Vec<&str> = pattern.split_whitespace().collect();
    let perm = perm
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad index {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    ReorderRule::new(parent, &pattern, &perm)
}

/// Post-order rewrite: children are reordered first, then the node itself
/// by the first matching rule. At most one rule fires per node.
pub fn apply_rules(tree: &ParseNode, rules: &RuleSet) -> ParseNode {
    match &tree.content {
        NodeContent::Token(_) => tree.clone(),
        NodeContent::Children(children) => {
            let mut children: Vec<ParseNode> = children.iter().map(|c| apply_rules(c, rules)).collect();
            let probe = ParseNode {
                label: tree.label.clone(),
                content: NodeContent::Children(children),
            };
            match rules.rules.iter().find(|r| r.matches(&probe)) {
                Some(rule) => {
                    let NodeContent::Children(old) = probe.content else {
                        unreachable!()
                    };
                    let mut slots: Vec<Option<ParseNode>> = old.into_iter().map(Some).collect();
                    children = rule
                        .permutation
                        .iter()
                        .map(|&i| slots[i - 1].take().expect("bijective permutation"))
                        .collect();
                    ParseNode {
                        label: tree.label.clone(),
                        content: NodeContent::Children(children),
                    }
                }
                None => probe,
            }
        }
    }
}

pub fn linearize(tree: &ParseNode) -> Sentence {
    tree.fringe().into_iter().map(str::to_owned).collect()
}

pub fn reorder_sentence(text: &str, rules: &RuleSet) -> Result<Sentence, ParseError> {
    Ok(linearize(&apply_rules(&parse_bracketed(text)?, rules)))
}

/// Positions whose token changed between the original and reordered fringe,
/// for eyeballing rule quality on a corpus.
pub fn displacement_report(original: &Sentence, reordered: &Sentence) -> String {
    let moved = original.iter().zip(reordered.iter()).filter(|(a, b)| a != b).count();
    format!(
        "moved {moved}/{}\n  src: {original}\n  ro:  {reordered}",
        original.len()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TABLE1: &str = "(S (NP Ram) (VP (V ate) (NP mango)))";

    fn rules(text: &str) -> RuleSet {
        RuleSet::parse(text).unwrap()
    }

    #[test]
    fn minimal_tree() {
        let t = parse_bracketed("(X w)").unwrap();
        assert_eq!(t, ParseNode::leaf("X", "w"));
        assert_eq!(linearize(&t), Sentence::from(["w"]));
    }

    #[test]
    fn table1_structure() {
        let t = parse_bracketed(TABLE1).unwrap();
        assert_eq!(t.label, "S");
        assert_eq!(t.children().len(), 2);
        assert_eq!(t.children()[1].children()[0], ParseNode::leaf("V", "ate"));
        assert_eq!(t.fringe(), ["Ram", "ate", "mango"]);
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_bracketed("  ( S\n(NP  Ram )(VP (V ate)\t(NP mango) ) ) ").unwrap();
        assert_eq!(a, parse_bracketed(TABLE1).unwrap());
        assert_eq!(a.to_string(), TABLE1);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let e = parse_bracketed("(S (NP").unwrap_err();
        assert_eq!(e, tree_err(6, "unexpected end of input"));
        assert!(matches!(
            parse_bracketed("(S ())"),
            Err(ParseError::Tree { offset: 4, .. })
        ));
        assert!(matches!(
            parse_bracketed("(X)"),
            Err(ParseError::Tree { offset: 2, .. })
        ));
        assert!(matches!(
            parse_bracketed("((X w))"),
            Err(ParseError::Tree { offset: 1, .. })
        ));
        assert!(matches!(
            parse_bracketed("(X w))"),
            Err(ParseError::Tree { offset: 5, .. })
        ));
        assert!(matches!(parse_bracketed("(X a b)"), Err(ParseError::Tree { .. })));
        assert!(matches!(parse_bracketed("(X a (Y b))"), Err(ParseError::Tree { .. })));
        assert!(matches!(parse_bracketed(""), Err(ParseError::Tree { offset: 0, .. })));
    }

    #[test]
    fn rule_parsing() {
        let r = rules("# c\n\nVP: V NP -> 2 1\nPP : IN NP->2 1\n");
        assert_eq!(r.rules.len(), 2);
        assert_eq!(r.rules[1].to_string(), "PP: IN NP -> 2 1");
        for bad in [
            "VP V NP -> 2 1",
            "VP: V NP 2 1",
            "VP: V NP -> 1 1",
            "VP: V NP -> 1",
            "VP: -> ",
            "VP: V -> x",
        ] {
            assert!(
                matches!(RuleSet::parse(bad), Err(ParseError::Rule { line: 1, .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn table1_verb_object() {
        let t = parse_bracketed(TABLE1).unwrap();
        let out = apply_rules(&t, &rules("VP: V NP -> 2 1"));
        assert_eq!(linearize(&out), Sentence::from(["Ram", "mango", "ate"]));
    }

    #[test]
    fn table1_postposition() {
        let out = reorder_sentence("(PP (IN on) (NP (DT the) (NN table)))", &rules("PP: IN NP -> 2 1")).unwrap();
        assert_eq!(out, Sentence::from(["the", "table", "on"]));
    }

    #[test]
    fn empty_rules_are_a_no_op() {
        let t = parse_bracketed(TABLE1).unwrap();
        assert_eq!(apply_rules(&t, &RuleSet::default()), t);
        assert_eq!(
            reorder_sentence(TABLE1, &RuleSet::default()).unwrap(),
            Sentence::from(["Ram", "ate", "mango"])
        );
    }

    #[test]
    fn first_matching_rule_wins_once_per_node() {
        let t = parse_bracketed("(X (A a) (B b) (C c))").unwrap();
        let r = rules("X: A B C -> 3 2 1\nX: A B C -> 2 1 3\nX: C B A -> 1 3 2");
        // second rule shadowed; the third would match after the first fired
        // but only one rule fires per node
        assert_eq!(linearize(&apply_rules(&t, &r)).to_line(), "c b a");
    }

    #[test]
    fn children_before_parent() {
        // the inner rewrite produces the pattern the outer rule looks for
        let t = parse_bracketed("(S (X (A a) (B b)) (Y y))").unwrap();
        let r = rules("X: A B -> 2 1\nS: X Y -> 2 1");
        assert_eq!(linearize(&apply_rules(&t, &r)).to_line(), "y b a");
    }

    #[test]
    fn demo_rules_are_idempotent() {
        let demo = RuleSet::demo();
        // no rule's permuted pattern is itself matched by a rule
        for rule in &demo.rules {
            let permuted: Vec<&str> = rule
                .permutation
                .iter()
                .map(|&i| rule.child_pattern[i - 1].as_str())
                .collect();
            assert!(
                !demo
                    .rules
                    .iter()
                    .any(|r| r.parent_label == rule.parent_label && r.child_pattern == permuted),
                "{rule}"
            );
        }
        for line in include_str!("../data/table1_trees.txt")
            .lines()
            .chain(include_str!("../data/table6_tree.txt").lines())
        {
            let once = apply_rules(&parse_bracketed(line).unwrap(), &demo);
            assert_eq!(apply_rules(&once, &demo), once);
        }
    }

    fn arb_tree() -> impl Strategy<Value = ParseNode> {
        let leaf = ("[A-C]", "[a-z]{1,3}").prop_map(|(l, t)| ParseNode::leaf(&l, &t));
        leaf.prop_recursive(4, 24, 3, |inner| {
            ("[A-C]", prop::collection::vec(inner, 1..4)).prop_map(|(l, c)| ParseNode::internal(&l, c))
        })
    }

    fn arb_rule() -> impl Strategy<Value = ReorderRule> {
        ("[A-C]", prop::collection::vec("[A-C]", 1..4))
            .prop_flat_map(|(p, pat)| {
                let n = pat.len();
                (Just(p), Just(pat), Just((1..=n).collect::<Vec<_>>()).prop_shuffle())
            })
            .prop_map(|(p, pat, perm)| {
                let pat: Vec<&str> = pat.iter().map(String::as_str).collect();
                ReorderRule::new(&p, &pat, &perm).unwrap()
            })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(t in arb_tree()) {
            let printed = t.to_string();
            let parsed = parse_bracketed(&printed).unwrap();
            prop_assert_eq!(&parsed, &t);
            prop_assert_eq!(parsed.to_string(), printed);
        }

        #[test]
        fn leaf_multiset_preserved(t in arb_tree(), rs in prop::collection::vec(arb_rule(), 0..6)) {
            let set = RuleSet { rules: rs };
            let out = apply_rules(&t, &set);
            let mut a = t.fringe();
            let mut b = out.fringe();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
            prop_assert_eq!(apply_rules(&t, &set), out);
        }

        #[test]
        fn prepending_non_matching_rule_is_harmless(t in arb_tree(), rs in prop::collection::vec(arb_rule(), 0..5)) {
            let base = RuleSet { rules: rs.clone() };
            let mut with = vec![ReorderRule::new("ZZ", &["QQ"], &[1]).unwrap()];
            with.extend(rs);
            prop_assert_eq!(apply_rules(&t, &base), apply_rules(&t, &RuleSet { rules: with }));
        }
    }
}
