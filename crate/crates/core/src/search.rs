//! Enumerating the values of an effect tree.
//!
//! The traversal carries a persistent [`DecisionMap`] from choice labels to
//! the branch taken. When a labeled choice is met again on the same path the
//! recorded branch is followed instead of branching, so every path is
//! consistent and shared choices are resolved once (call-time choice).

use std::collections::VecDeque;
use std::rc::Rc;

use archery::RcK;
use rpds::HashTrieMap;
use rustc_hash::FxBuildHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::effect::{with_budget, Eff, EvalError, Node, Op, Shape, Signature};

/// Default limit on the number of suspensions forced per enumeration.
pub const DEFAULT_DEPTH_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStrategy {
    #[default]
    Dfs,
    Bfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Left,
    Right,
}

/// Persistent map from choice label ids to decisions. Extending returns a
/// new map and leaves the original untouched.
#[derive(Clone)]
pub struct DecisionMap(HashTrieMap<u64, Branch, RcK, FxBuildHasher>);

impl Default for DecisionMap {
    fn default() -> Self {
        DecisionMap::new()
    }
}

impl DecisionMap {
    pub fn new() -> Self {
        DecisionMap(HashTrieMap::new_with_hasher_and_ptr_kind(FxBuildHasher))
    }

    pub fn get(&self, label: u64) -> Option<Branch> {
        self.0.get(&label).copied()
    }

    pub fn extend(&self, label: u64, branch: Branch) -> DecisionMap {
        DecisionMap(self.0.insert(label, branch))
    }

    pub fn len(&self) -> usize {
        self.0.size()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Branch)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    /// Choices met with an undecided label.
    pub choice_expansions: u64,
    /// Choices met with an already decided label.
    pub consistent_follows: u64,
    /// Failure leaves (any nullary operation).
    pub failures: u64,
    /// Value leaves.
    pub leaves: u64,
}

impl SearchStats {
    /// Field-wise sum, for results computed by several searches.
    pub fn merge(self, other: SearchStats) -> SearchStats {
        SearchStats {
            choice_expansions: self.choice_expansions + other.choice_expansions,
            consistent_follows: self.consistent_follows + other.consistent_follows,
            failures: self.failures + other.failures,
            leaves: self.leaves + other.leaves,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub strategy: SearchStrategy,
    /// Maximum number of suspensions forced during one enumeration.
    pub depth_cap: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            strategy: SearchStrategy::Dfs,
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }
}

impl SearchConfig {
    pub fn with_strategy(self, strategy: SearchStrategy) -> Self {
        SearchConfig { strategy, ..self }
    }

    pub fn with_depth_cap(self, depth_cap: u64) -> Self {
        SearchConfig { depth_cap, ..self }
    }
}

/// An evaluation error together with the statistics gathered before it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} (after {} values and {} failures)", .stats.leaves, .stats.failures)]
pub struct SearchError {
    pub kind: EvalError,
    pub stats: SearchStats,
}

/// Decisions taken along one path, in order, including followed ones.
pub struct Trail {
    step: (u64, Branch),
    prev: Option<Rc<Trail>>,
}

impl Trail {
    pub fn steps(trail: &Option<Rc<Trail>>) -> Vec<(u64, Branch)> {
        let mut out = Vec::new();
        let mut cur = trail.as_deref();
        while let Some(t) = cur {
            out.push(t.step);
            cur = t.prev.as_deref();
        }
        out.reverse();
        out
    }
}

/// A value leaf as seen by a traversal callback.
pub struct Leaf<'a, V> {
    pub value: V,
    pub decisions: &'a DecisionMap,
    pub trail: &'a Option<Rc<Trail>>,
}

struct Frame<V> {
    tree: Eff<V>,
    decisions: DecisionMap,
    trail: Option<Rc<Trail>>,
}

impl<V> Frame<V> {
    fn step(&self, tree: Eff<V>, decisions: DecisionMap, label: u64, branch: Branch, record: bool) -> Self {
        let trail = if record {
            Some(Rc::new(Trail {
                step: (label, branch),
                prev: self.trail.clone(),
            }))
        } else {
            None
        };
        Frame {
            tree,
            decisions,
            trail,
        }
    }
}

fn traverse<V: Clone + 'static>(
    e: Eff<V>,
    config: &SearchConfig,
    record_trail: bool,
    mut on_leaf: impl FnMut(Leaf<'_, V>),
    mut on_failure: impl FnMut(Shape),
) -> Result<SearchStats, SearchError> {
    let mut stats = SearchStats::default();
    let mut pending = VecDeque::new();
    pending.push_back(Frame {
        tree: e,
        decisions: DecisionMap::new(),
        trail: None,
    });
    let outcome = with_budget(config.depth_cap, || {
        loop {
            let frame = match config.strategy {
                SearchStrategy::Dfs => pending.pop_back(),
                SearchStrategy::Bfs => pending.pop_front(),
            };
            let Some(frame) = frame else { break };
            let node = frame.tree.force();
            match &*node {
                Node::Pure(v) => {
                    stats.leaves += 1;
                    on_leaf(Leaf {
                        value: v.clone(),
                        decisions: &frame.decisions,
                        trail: &frame.trail,
                    });
                }
                Node::Impure(Op::Choice(label, l, r)) => {
                    let id = label.id();
                    match frame.decisions.get(id) {
                        Some(branch) => {
                            stats.consistent_follows += 1;
                            let next = if branch == Branch::Left { l } else { r };
                            let f = frame.step(next.clone(), frame.decisions.clone(), id, branch, record_trail);
                            pending.push_back(f);
                        }
                        None => {
                            stats.choice_expansions += 1;
                            let left = frame.step(
                                l.clone(),
                                frame.decisions.extend(id, Branch::Left),
                                id,
                                Branch::Left,
                                record_trail,
                            );
                            let right = frame.step(
                                r.clone(),
                                frame.decisions.extend(id, Branch::Right),
                                id,
                                Branch::Right,
                                record_trail,
                            );
                            match config.strategy {
                                SearchStrategy::Dfs => {
                                    pending.push_back(right);
                                    pending.push_back(left);
                                }
                                SearchStrategy::Bfs => {
                                    pending.push_back(left);
                                    pending.push_back(right);
                                }
                            }
                        }
                    }
                }
                Node::Impure(op) => {
                    stats.failures += 1;
                    on_failure(op.shape());
                }
            }
        }
    });
    match outcome {
        Ok(()) => Ok(stats),
        Err(kind) => Err(SearchError { kind, stats }),
    }
}

/// Visits every value leaf reachable through consistent decisions.
pub fn search<V: Clone + 'static>(
    e: Eff<V>,
    config: &SearchConfig,
    mut visit: impl FnMut(V),
) -> Result<SearchStats, SearchError> {
    traverse(e, config, false, |leaf| visit(leaf.value), |_| {})
}

/// Like [`search`], but every leaf also carries its decision map and the
/// ordered list of decisions along its path.
pub fn search_traced<V: Clone + 'static>(
    e: Eff<V>,
    config: &SearchConfig,
    visit: impl FnMut(Leaf<'_, V>),
) -> Result<SearchStats, SearchError> {
    traverse(e, config, true, visit, |_| {})
}

/// The values of a tree together with traversal statistics.
#[derive(Debug, Clone)]
pub struct Enumeration<V> {
    pub values: Vec<V>,
    pub stats: SearchStats,
}

pub fn enumerate<V: Clone + 'static>(
    e: Eff<V>,
    config: &SearchConfig,
) -> Result<Enumeration<V>, SearchError> {
    let mut values = Vec::new();
    let stats = search(e, config, |v| values.push(v))?;
    Ok(Enumeration { values, stats })
}

/// All values in depth-first order under the default cap.
pub fn all_values<V: Clone + 'static>(e: &Eff<V>) -> Result<Vec<V>, SearchError> {
    enumerate(e.clone(), &SearchConfig::default()).map(|en| en.values)
}

pub fn count_values<V: Clone + 'static>(e: Eff<V>, config: &SearchConfig) -> Result<u64, SearchError> {
    search(e, config, |_| {}).map(|s| s.leaves)
}

pub fn fold_values<V, A>(values: impl IntoIterator<Item = V>, init: A, op: impl FnMut(A, V) -> A) -> A {
    values.into_iter().fold(init, op)
}

pub fn map_values<V: Clone + 'static, W: Clone + 'static>(
    f: impl Fn(V) -> W + 'static,
    e: &Eff<V>,
) -> Result<Vec<W>, SearchError> {
    all_values(&e.map(f))
}

/// Whether every operation reachable by a consistent traversal belongs to
/// `signature`.
pub fn conforms_to<V: Clone + 'static>(
    e: Eff<V>,
    signature: Signature,
    config: &SearchConfig,
) -> Result<bool, SearchError> {
    let mut ok = true;
    let stats = traverse(e, config, false, |_| {}, |shape| ok &= signature.contains(shape))?;
    let chose = stats.choice_expansions + stats.consistent_follows > 0;
    Ok(ok && (!chose || signature.contains(Shape::Choice)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin(a: i64, b: i64) -> Eff<i64> {
        Eff::choose(Eff::pure(a), Eff::pure(b))
    }

    #[test]
    fn dfs_and_bfs_orders() {
        let e = Eff::choose(coin(1, 2), Eff::pure(3));
        let dfs = enumerate(e.clone(), &SearchConfig::default()).unwrap();
        assert_eq!(dfs.values, vec![1, 2, 3]);
        let bfs = SearchConfig::default().with_strategy(SearchStrategy::Bfs);
        assert_eq!(enumerate(e, &bfs).unwrap().values, vec![3, 1, 2]);
    }

    #[test]
    fn shared_choice_is_decided_once() {
        let c = coin(1, 2);
        let e = crate::effect::lift2(|a, b| a + b, &c, &c);
        let en = enumerate(e, &SearchConfig::default()).unwrap();
        assert_eq!(en.values, vec![2, 4]);
        assert_eq!(en.stats.choice_expansions, 1);
        assert_eq!(en.stats.consistent_follows, 2);
    }

    #[test]
    fn cap_error_keeps_partial_stats() {
        fn stream(n: i64) -> Eff<i64> {
            Eff::choose(Eff::pure(n), Eff::delay(move || stream(n + 1)))
        }
        let config = SearchConfig::default().with_depth_cap(50);
        let err = enumerate(stream(0), &config).unwrap_err();
        assert_eq!(err.kind, EvalError::DepthCapExceeded { cap: 50 });
        assert!(err.stats.leaves > 0);
    }

    #[test]
    fn failures_are_counted() {
        let e = Eff::choose(Eff::fail(), Eff::choose(Eff::pure(1), Eff::undefined()));
        let en = enumerate(e, &SearchConfig::default()).unwrap();
        assert_eq!(en.values, vec![1]);
        assert_eq!(en.stats.failures, 2);
    }

    #[test]
    fn conformance() {
        let cfg = SearchConfig::default();
        assert!(conforms_to(coin(1, 2), Signature::Nd, &cfg).unwrap());
        assert!(!conforms_to(coin(1, 2), Signature::One, &cfg).unwrap());
        assert!(conforms_to(Eff::<i64>::undefined(), Signature::One, &cfg).unwrap());
        assert!(conforms_to(Eff::pure(3), Signature::Zero, &cfg).unwrap());
    }
}
