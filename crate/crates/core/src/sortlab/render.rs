//! Decision trees of non-deterministic computations.
//!
//! The tree is reduced: a choice whose label was already decided on the
//! current path is followed silently instead of being drawn again. Labels
//! are renumbered in pre-order so renderings are stable across runs.

use std::collections::HashMap;
use std::fmt::Display;

use serde::{Deserialize, Serialize};

use crate::effect::{with_budget, Eff, Node, Op};
use crate::search::{Branch, DecisionMap, SearchConfig, SearchError, SearchStats};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DecisionTree {
    Choice {
        label: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        annotation: Option<String>,
        left: Box<DecisionTree>,
        right: Box<DecisionTree>,
    },
    Value {
        value: String,
    },
    Fail,
}

struct Builder<'a, V> {
    show: &'a dyn Fn(&V) -> String,
    numbering: HashMap<u64, u64>,
    stats: SearchStats,
}

impl<V: Clone + 'static> Builder<'_, V> {
    fn walk(&mut self, e: &Eff<V>, decisions: &DecisionMap) -> DecisionTree {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || {
            let mut current = e.clone();
            loop {
                let node = current.force();
                match &*node {
                    Node::Pure(v) => {
                        self.stats.leaves += 1;
                        return DecisionTree::Value { value: (self.show)(v) };
                    }
                    Node::Impure(Op::Choice(label, l, r)) => match decisions.get(label.id()) {
                        Some(branch) => {
                            self.stats.consistent_follows += 1;
                            current = if branch == Branch::Left { l.clone() } else { r.clone() };
                        }
                        None => {
                            self.stats.choice_expansions += 1;
                            let next = self.numbering.len() as u64 + 1;
                            let shown = *self.numbering.entry(label.id()).or_insert(next);
                            let annotation = label.annotation().map(|a| a.describe());
                            let left = self.walk(l, &decisions.extend(label.id(), Branch::Left));
                            let right = self.walk(r, &decisions.extend(label.id(), Branch::Right));
                            return DecisionTree::Choice {
                                label: shown,
                                annotation,
                                left: Box::new(left),
                                right: Box::new(right),
                            };
                        }
                    },
                    Node::Impure(_) => {
                        self.stats.failures += 1;
                        return DecisionTree::Fail;
                    }
                }
            }
        })
    }
}

/// Builds the reduced decision tree of `e`, left subtree first. Annotations
/// are read when their choice is visited, so operands evaluated earlier on
/// the path are shown and the rest appear as `?`.
pub fn decision_tree<V: Clone + 'static>(
    e: &Eff<V>,
    config: &SearchConfig,
    show: &dyn Fn(&V) -> String,
) -> Result<(DecisionTree, SearchStats), SearchError> {
    let mut builder = Builder {
        show,
        numbering: HashMap::new(),
        stats: SearchStats::default(),
    };
    let outcome = with_budget(config.depth_cap, || builder.walk(e, &DecisionMap::new()));
    match outcome {
        Ok(tree) => Ok((tree, builder.stats)),
        Err(kind) => Err(SearchError {
            kind,
            stats: builder.stats,
        }),
    }
}

/// `[1,2,3]`.
pub fn show_list<V: Display>(xs: &[V]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(","))
}

impl DecisionTree {
    fn headline(&self) -> String {
        match self {
            DecisionTree::Choice {
                label, annotation, ..
            } => match annotation {
                Some(a) => format!("?{label} {a}"),
                None => format!("?{label}"),
            },
            DecisionTree::Value { value } => value.clone(),
            DecisionTree::Fail => "fail".to_string(),
        }
    }

    /// ASCII rendering, one node per line in pre-order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, "", "");
        out
    }

    fn render_into(&self, out: &mut String, first: &str, rest: &str) {
        out.push_str(first);
        out.push_str(&self.headline());
        out.push('\n');
        if let DecisionTree::Choice { left, right, .. } = self {
            left.render_into(out, &format!("{rest}+- L: "), &format!("{rest}|  "));
            right.render_into(out, &format!("{rest}`- R: "), &format!("{rest}   "));
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decision trees always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn leaves(&self) -> Vec<&DecisionTree> {
        match self {
            DecisionTree::Choice { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
            leaf => vec![leaf],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifted::{filter_nd, from_host, nf};
    use crate::sortlab::coin_choice;

    #[test]
    fn filter_tree_shows_decided_operands() {
        let pivot = Eff::pure(42i64);
        let xs = filter_nd(move |y| coin_choice(&pivot, &y), &from_host([1i64, 2]));
        let (tree, _) =
            decision_tree(&nf(&xs), &SearchConfig::default(), &|v: &Vec<i64>| show_list(v)).unwrap();
        let expected = "\
?1 42 <= 1
+- L: ?2 42 <= 2
|  +- L: [1,2]
|  `- R: [1]
`- R: ?3 42 <= 2
   +- L: [2]
   `- R: []
";
        assert_eq!(tree.render(), expected);
        let back = DecisionTree::from_json(&tree.to_json()).unwrap();
        assert_eq!(back.render(), expected);
    }

    #[test]
    fn shared_choice_drawn_once() {
        let c = Eff::choose(Eff::pure(1i64), Eff::pure(2));
        let sum = crate::effect::lift2(|a, b| a + b, &c, &c);
        let (tree, stats) = decision_tree(&sum, &SearchConfig::default(), &|v| v.to_string()).unwrap();
        assert_eq!(tree.render(), "?1\n+- L: 2\n`- R: 4\n");
        assert_eq!(stats.consistent_follows, 2);
    }
}
