//! Sorting functions applied to non-deterministic comparators.
//!
//! Every algorithm exists in two forms. The lazy form works on lifted lists
//! and only compares what the consumer of the result demands; shared
//! intermediate results (the `let (m, l) = ...` patterns of a lazy
//! functional definition) are memoized suspensions projected twice. The
//! strict form is the monadic list version: it normalizes the input, runs
//! every comparison in sequence and only then hands out the sorted list.
//!
//! With a coin comparator the sorted lists are exactly the permutations an
//! algorithm can produce, and the search statistics show how much of the
//! comparison tree a consumer such as `head` has to explore.

use std::fmt::{self, Display};
use std::rc::Rc;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use crate::effect::StrictnessMode;
use crate::effect::{Annotation, Eff};
use crate::lifted::{self, cons, fst, nf, nil, pair, snd, LPair, LiftedList, List};
use crate::search::{search, SearchConfig, SearchError, SearchStats};

mod render;

pub use render::{decision_tree, show_list, DecisionTree};

type CompareFn<V> = Rc<dyn Fn(Eff<V>, Eff<V>) -> Eff<bool>>;

/// A two-argument predicate with effects.
pub struct Comparator<V> {
    name: Rc<str>,
    f: CompareFn<V>,
}

impl<V> Clone for Comparator<V> {
    fn clone(&self) -> Self {
        Comparator {
            name: Rc::clone(&self.name),
            f: Rc::clone(&self.f),
        }
    }
}

impl<V: Clone + 'static> Comparator<V> {
    pub fn new(name: &str, f: impl Fn(Eff<V>, Eff<V>) -> Eff<bool> + 'static) -> Self {
        Comparator {
            name: name.into(),
            f: Rc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn call(&self, a: Eff<V>, b: Eff<V>) -> Eff<bool> {
        (self.f)(a, b)
    }

    /// The lifted `<=`.
    pub fn leq() -> Self
    where
        V: PartialOrd,
    {
        Comparator::new("leq", |a, b| crate::effect::lift2(|x: V, y: V| x <= y, &a, &b))
    }
}

/// A fresh choice between `true` and `false`, annotated with both operands.
/// The operands are never forced.
pub fn coin_choice<V: Display + Clone + 'static>(a: &Eff<V>, b: &Eff<V>) -> Eff<bool> {
    let annotation = Annotation::relation(a, "<=", b);
    Eff::choose_annotated(annotation, Eff::pure(true), Eff::pure(false))
}

impl<V: Display + Clone + 'static> Comparator<V> {
    /// Answers every comparison with a fresh coin flip.
    pub fn coin() -> Self {
        Comparator::new("coin", |a, b| coin_choice(&a, &b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Insertion,
    Selection,
    Bubble,
    QuickFilter,
    QuickSplit,
    Merge,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Insertion,
        Algorithm::Selection,
        Algorithm::Bubble,
        Algorithm::QuickFilter,
        Algorithm::QuickSplit,
        Algorithm::Merge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Insertion => "insertion",
            Algorithm::Selection => "selection",
            Algorithm::Bubble => "bubble",
            Algorithm::QuickFilter => "quick-filter",
            Algorithm::QuickSplit => "quick-split",
            Algorithm::Merge => "merge",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                format!("unknown algorithm `{s}` (expected one of {})", names.join(", "))
            })
    }
}

impl Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sorts `xs` with the given algorithm and evaluation mode.
pub fn sort<V: Clone + 'static>(
    algorithm: Algorithm,
    mode: StrictnessMode,
    cmp: &Comparator<V>,
    xs: &List<V>,
) -> List<V> {
    match mode {
        StrictnessMode::Lazy => match algorithm {
            Algorithm::Insertion => insertion_sort(cmp, xs),
            Algorithm::Selection => selection_sort(cmp, xs),
            Algorithm::Bubble => bubble_sort(cmp, xs),
            Algorithm::QuickFilter => quick_sort_filter(cmp, xs),
            Algorithm::QuickSplit => quick_sort_split(cmp, xs),
            Algorithm::Merge => merge_sort(cmp, xs),
        },
        StrictnessMode::Strict => {
            let cmp = cmp.clone();
            nf(xs)
                .bind(move |v| strict::sort(algorithm, &cmp, v))
                .bind(|v| lifted::from_host(v))
        }
    }
}

/// Inserts `x` before the first element it compares below.
pub fn insert<V: Clone + 'static>(cmp: &Comparator<V>, x: &Eff<V>, xs: &List<V>) -> List<V> {
    let (cmp, x) = (cmp.clone(), x.clone());
    xs.bind(move |l| match l {
        LiftedList::Nil => cons(x.clone(), nil()),
        LiftedList::Cons(y, ys) => {
            let (cmp2, x2) = (cmp.clone(), x.clone());
            cmp.call(x.clone(), y.clone()).bind(move |before| {
                if before {
                    cons(x2.clone(), cons(y.clone(), ys.clone()))
                } else {
                    cons(y.clone(), insert(&cmp2, &x2, &ys))
                }
            })
        }
    })
}

pub fn insertion_sort<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>) -> List<V> {
    let cmp = cmp.clone();
    xs.bind(move |l| match l {
        LiftedList::Nil => nil(),
        LiftedList::Cons(x, rest) => insert(&cmp, &x, &insertion_sort(&cmp, &rest)),
    })
}

/// Splits off a minimal element. Empty lists fail.
pub fn pick_min<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>) -> Eff<LPair<V, LiftedList<V>>> {
    let cmp = cmp.clone();
    xs.bind(move |l| match l {
        LiftedList::Nil => Eff::fail(),
        LiftedList::Cons(x, rest) => {
            let cmp = cmp.clone();
            let rest2 = rest.clone();
            rest.bind(move |r| match r {
                LiftedList::Nil => pair(x.clone(), nil()),
                LiftedList::Cons(..) => {
                    let below = pick_min(&cmp, &rest2);
                    let (m, l) = (fst(&below), snd(&below));
                    let (x, rest) = (x.clone(), rest2.clone());
                    cmp.call(x.clone(), m.clone()).bind(move |first| {
                        if first {
                            pair(x.clone(), rest.clone())
                        } else {
                            pair(m.clone(), cons(x.clone(), l.clone()))
                        }
                    })
                }
            })
        }
    })
}

pub fn selection_sort<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>) -> List<V> {
    let (cmp, whole) = (cmp.clone(), xs.clone());
    xs.bind(move |l| match l {
        LiftedList::Nil => nil(),
        LiftedList::Cons(..) => {
            let picked = pick_min(&cmp, &whole);
            cons(fst(&picked), selection_sort(&cmp, &snd(&picked)))
        }
    })
}

/// One bubbling pass: moves a minimal element to the front. Empty lists
/// fail.
pub fn bubble<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>) -> List<V> {
    let cmp = cmp.clone();
    xs.bind(move |l| match l {
        LiftedList::Nil => Eff::fail(),
        LiftedList::Cons(x, rest) => {
            let cmp = cmp.clone();
            let rest2 = rest.clone();
            rest.bind(move |r| match r {
                LiftedList::Nil => cons(x.clone(), nil()),
                LiftedList::Cons(..) => {
                    let bubbled = bubble(&cmp, &rest2);
                    let (y, ys) = (lifted::head(&bubbled), lifted::tail(&bubbled));
                    let x = x.clone();
                    cmp.call(x.clone(), y.clone()).bind(move |keep| {
                        if keep {
                            cons(x.clone(), cons(y.clone(), ys.clone()))
                        } else {
                            cons(y.clone(), cons(x.clone(), ys.clone()))
                        }
                    })
                }
            })
        }
    })
}

pub fn bubble_sort<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>) -> List<V> {
    let (cmp, whole) = (cmp.clone(), xs.clone());
    xs.bind(move |l| match l {
        LiftedList::Nil => nil(),
        LiftedList::Cons(..) => {
            let bubbled = bubble(&cmp, &whole);
            cons(
                lifted::head(&bubbled),
                bubble_sort(&cmp, &lifted::tail(&bubbled)),
            )
        }
    })
}

/// Quicksort partitioning with two independent filters.
pub fn quick_sort_filter<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>) -> List<V> {
    let cmp = cmp.clone();
    xs.bind(move |l| match l {
        LiftedList::Nil => nil(),
        LiftedList::Cons(x, rest) => {
            let (c1, p1) = (cmp.clone(), x.clone());
            let smaller = lifted::filter_nd(move |y| c1.call(y, p1.clone()), &rest);
            let (c2, p2) = (cmp.clone(), x.clone());
            let larger = lifted::filter_nd(move |y| lifted::not(&c2.call(y, p2.clone())), &rest);
            lifted::append(
                &quick_sort_filter(&cmp, &smaller),
                &cons(x, quick_sort_filter(&cmp, &larger)),
            )
        }
    })
}

/// Partitions `xs` around `pivot` with one comparison per element. Elements
/// comparing at or below the pivot go to the first list.
pub fn split<V: Clone + 'static>(
    cmp: &Comparator<V>,
    pivot: &Eff<V>,
    xs: &List<V>,
) -> Eff<LPair<LiftedList<V>, LiftedList<V>>> {
    split_into(cmp, pivot, xs, pair(nil(), nil()))
}

fn split_into<V: Clone + 'static>(
    cmp: &Comparator<V>,
    pivot: &Eff<V>,
    xs: &List<V>,
    acc: Eff<LPair<LiftedList<V>, LiftedList<V>>>,
) -> Eff<LPair<LiftedList<V>, LiftedList<V>>> {
    let (cmp, pivot) = (cmp.clone(), pivot.clone());
    xs.bind(move |l| match l {
        LiftedList::Nil => acc.clone(),
        LiftedList::Cons(y, ys) => {
            let (cmp, pivot) = (cmp.clone(), pivot.clone());
            acc.bind(move |(l1, l2)| {
                let (cmp2, pivot2, y2, ys2) = (cmp.clone(), pivot.clone(), y.clone(), ys.clone());
                lifted::not(&cmp.call(y.clone(), pivot.clone())).bind(move |above| {
                    let next = if above {
                        pair(l1.clone(), cons(y2.clone(), l2.clone()))
                    } else {
                        pair(cons(y2.clone(), l1.clone()), l2.clone())
                    };
                    split_into(&cmp2, &pivot2, &ys2, next)
                })
            })
        }
    })
}

pub fn quick_sort_split<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>) -> List<V> {
    let cmp = cmp.clone();
    xs.bind(move |l| match l {
        LiftedList::Nil => nil(),
        LiftedList::Cons(x, rest) => {
            let parts = split(&cmp, &x, &rest);
            lifted::append(
                &quick_sort_split(&cmp, &fst(&parts)),
                &cons(x, quick_sort_split(&cmp, &snd(&parts))),
            )
        }
    })
}

pub fn merge<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>, ys: &List<V>) -> List<V> {
    let (cmp, xs_all, ys_all) = (cmp.clone(), xs.clone(), ys.clone());
    xs.bind(move |l| match l {
        LiftedList::Nil => ys_all.clone(),
        LiftedList::Cons(x, xs) => {
            let (cmp, xs_all, ys_all2) = (cmp.clone(), xs_all.clone(), ys_all.clone());
            ys_all.bind(move |r| match r {
                LiftedList::Nil => xs_all.clone(),
                LiftedList::Cons(y, ys) => {
                    let (cmp2, x2, xs, xs_all, ys_all) =
                        (cmp.clone(), x.clone(), xs.clone(), xs_all.clone(), ys_all2.clone());
                    cmp.call(x.clone(), y.clone()).bind(move |first| {
                        if first {
                            cons(x2.clone(), merge(&cmp2, &xs, &ys_all))
                        } else {
                            cons(y.clone(), merge(&cmp2, &xs_all, &ys))
                        }
                    })
                }
            })
        }
    })
}

/// Splits a list into its first `length / 2` elements and the rest.
pub fn divide<V: Clone + 'static>(xs: &List<V>) -> Eff<LPair<LiftedList<V>, LiftedList<V>>> {
    divide_at(xs, lifted::length(xs).map(|n| n / 2))
}

fn divide_at<V: Clone + 'static>(xs: &List<V>, n: Eff<usize>) -> Eff<LPair<LiftedList<V>, LiftedList<V>>> {
    let whole = xs.clone();
    xs.bind(move |l| match l {
        LiftedList::Nil => pair(nil(), nil()),
        LiftedList::Cons(y, ys) => {
            let whole = whole.clone();
            n.bind(move |k| {
                if k == 0 {
                    pair(nil(), whole.clone())
                } else {
                    let below = divide_at(&ys, Eff::pure(k - 1));
                    pair(cons(y.clone(), fst(&below)), snd(&below))
                }
            })
        }
    })
}

pub fn merge_sort<V: Clone + 'static>(cmp: &Comparator<V>, xs: &List<V>) -> List<V> {
    let (cmp, whole) = (cmp.clone(), xs.clone());
    xs.bind(move |l| match l {
        LiftedList::Nil => nil(),
        LiftedList::Cons(x, rest) => {
            let (cmp, whole) = (cmp.clone(), whole.clone());
            rest.bind(move |r| match r {
                LiftedList::Nil => cons(x.clone(), nil()),
                LiftedList::Cons(..) => {
                    let halves = divide(&whole);
                    merge(
                        &cmp,
                        &merge_sort(&cmp, &fst(&halves)),
                        &merge_sort(&cmp, &snd(&halves)),
                    )
                }
            })
        }
    })
}

/// `pick_min` in either evaluation mode.
pub fn pick_min_in<V: Clone + 'static>(
    mode: StrictnessMode,
    cmp: &Comparator<V>,
    xs: &List<V>,
) -> Eff<LPair<V, LiftedList<V>>> {
    match mode {
        StrictnessMode::Lazy => pick_min(cmp, xs),
        StrictnessMode::Strict => {
            let cmp = cmp.clone();
            nf(xs)
                .bind(move |v| strict::pick_min(&cmp, v))
                .map(|(m, rest)| (Eff::pure(m), lifted::from_host(rest)))
        }
    }
}

/// The list `1..=n` sorted with the coin comparator.
pub fn coin_sorted(algorithm: Algorithm, mode: StrictnessMode, n: i64) -> List<i64> {
    sort(algorithm, mode, &Comparator::coin(), &lifted::from_host(1..=n))
}

/// Statistics of demanding only the first element of a coin-sorted `1..=n`.
pub fn head_demand_stats(
    algorithm: Algorithm,
    mode: StrictnessMode,
    n: i64,
    config: &SearchConfig,
) -> Result<SearchStats, SearchError> {
    // The sorted list must not outlive this binding, or every explored node
    // stays reachable from it.
    let demanded = lifted::head(&coin_sorted(algorithm, mode, n));
    search(demanded, config, |_| {})
}

/// Statistics of normalizing a coin-sorted `1..=n`.
pub fn full_demand_stats(
    algorithm: Algorithm,
    mode: StrictnessMode,
    n: i64,
    config: &SearchConfig,
) -> Result<SearchStats, SearchError> {
    let demanded = nf(&coin_sorted(algorithm, mode, n));
    search(demanded, config, |_| {})
}

pub mod strict {
    //! Monadic sorting on fully evaluated lists: every comparison runs
    //! before any part of the result exists.

    use super::{Algorithm, Comparator};
    use crate::effect::Eff;

    fn compare<V: Clone + 'static>(cmp: &Comparator<V>, a: &V, b: &V) -> Eff<bool> {
        cmp.call(Eff::pure(a.clone()), Eff::pure(b.clone()))
    }

    fn prepend<V: Clone>(x: V, mut xs: Vec<V>) -> Vec<V> {
        xs.insert(0, x);
        xs
    }

    pub fn sort<V: Clone + 'static>(algorithm: Algorithm, cmp: &Comparator<V>, xs: Vec<V>) -> Eff<Vec<V>> {
        match algorithm {
            Algorithm::Insertion => insertion_sort(cmp, xs),
            Algorithm::Selection => selection_sort(cmp, xs),
            Algorithm::Bubble => bubble_sort(cmp, xs),
            Algorithm::QuickFilter => quick_sort_filter(cmp, xs),
            Algorithm::QuickSplit => quick_sort_split(cmp, xs),
            Algorithm::Merge => merge_sort(cmp, xs),
        }
    }

    pub fn insert<V: Clone + 'static>(cmp: &Comparator<V>, x: V, ys: Vec<V>) -> Eff<Vec<V>> {
        let Some(y) = ys.first().cloned() else {
            return Eff::pure(vec![x]);
        };
        let cmp2 = cmp.clone();
        compare(cmp, &x, &y).bind(move |before| {
            if before {
                Eff::pure(prepend(x.clone(), ys.clone()))
            } else {
                let y = y.clone();
                insert(&cmp2, x.clone(), ys[1..].to_vec()).map(move |zs| prepend(y.clone(), zs))
            }
        })
    }

    pub fn insertion_sort<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>) -> Eff<Vec<V>> {
        let Some(x) = xs.first().cloned() else {
            return Eff::pure(Vec::new());
        };
        let cmp2 = cmp.clone();
        insertion_sort(cmp, xs[1..].to_vec()).bind(move |ys| insert(&cmp2, x.clone(), ys))
    }

    pub fn pick_min<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>) -> Eff<(V, Vec<V>)> {
        match xs.len() {
            0 => Eff::fail(),
            1 => Eff::pure((xs[0].clone(), Vec::new())),
            _ => {
                let cmp2 = cmp.clone();
                pick_min(cmp, xs[1..].to_vec()).bind(move |(m, l)| {
                    let (xs, x) = (xs.clone(), xs[0].clone());
                    compare(&cmp2, &x, &m).map(move |first| {
                        if first {
                            (x.clone(), xs[1..].to_vec())
                        } else {
                            (m.clone(), prepend(x.clone(), l.clone()))
                        }
                    })
                })
            }
        }
    }

    pub fn selection_sort<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>) -> Eff<Vec<V>> {
        if xs.is_empty() {
            return Eff::pure(Vec::new());
        }
        let cmp2 = cmp.clone();
        pick_min(cmp, xs).bind(move |(m, rest)| selection_sort(&cmp2, rest).map(move |s| prepend(m.clone(), s)))
    }

    pub fn bubble<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>) -> Eff<Vec<V>> {
        match xs.len() {
            0 => Eff::fail(),
            1 => Eff::pure(xs),
            _ => {
                let (cmp2, x) = (cmp.clone(), xs[0].clone());
                bubble(cmp, xs[1..].to_vec()).bind(move |ys| {
                    let (x, y, rest) = (x.clone(), ys[0].clone(), ys[1..].to_vec());
                    compare(&cmp2, &x, &y).map(move |keep| {
                        let (a, b) = if keep { (&x, &y) } else { (&y, &x) };
                        prepend(a.clone(), prepend(b.clone(), rest.clone()))
                    })
                })
            }
        }
    }

    pub fn bubble_sort<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>) -> Eff<Vec<V>> {
        if xs.is_empty() {
            return Eff::pure(Vec::new());
        }
        let cmp2 = cmp.clone();
        bubble(cmp, xs).bind(move |ys| {
            let y = ys[0].clone();
            bubble_sort(&cmp2, ys[1..].to_vec()).map(move |s| prepend(y.clone(), s))
        })
    }

    /// Keeps the elements for which `p` holds, deciding front to back.
    pub fn filter<V: Clone + 'static>(p: &dyn Fn(&V) -> Eff<bool>, xs: &[V]) -> Eff<Vec<V>> {
        let Some((x, rest)) = xs.split_first() else {
            return Eff::pure(Vec::new());
        };
        let tail = filter(p, rest);
        let x = x.clone();
        p(&x).bind(move |keep| {
            let x = x.clone();
            tail.map(move |ys| if keep { prepend(x.clone(), ys) } else { ys })
        })
    }

    pub fn quick_sort_filter<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>) -> Eff<Vec<V>> {
        let Some(x) = xs.first().cloned() else {
            return Eff::pure(Vec::new());
        };
        let rest = &xs[1..];
        let smaller = filter(&|y: &V| compare(cmp, y, &x), rest);
        let larger = filter(&|y: &V| compare(cmp, y, &x).map(|b| !b), rest);
        let cmp = cmp.clone();
        smaller.bind(move |l1| {
            let (cmp, x, larger) = (cmp.clone(), x.clone(), larger.clone());
            larger.bind(move |l2| {
                let (cmp2, x, l2) = (cmp.clone(), x.clone(), l2);
                quick_sort_filter(&cmp, l1.clone()).bind(move |s1| {
                    let x = x.clone();
                    quick_sort_filter(&cmp2, l2.clone()).map(move |s2| {
                        let mut out = s1.clone();
                        out.push(x.clone());
                        out.extend(s2);
                        out
                    })
                })
            })
        })
    }

    pub fn split<V: Clone + 'static>(cmp: &Comparator<V>, pivot: V, xs: Vec<V>) -> Eff<(Vec<V>, Vec<V>)> {
        split_into(cmp, pivot, xs, Vec::new(), Vec::new())
    }

    fn split_into<V: Clone + 'static>(
        cmp: &Comparator<V>,
        pivot: V,
        xs: Vec<V>,
        l1: Vec<V>,
        l2: Vec<V>,
    ) -> Eff<(Vec<V>, Vec<V>)> {
        let Some(y) = xs.first().cloned() else {
            return Eff::pure((l1, l2));
        };
        let cmp2 = cmp.clone();
        compare(cmp, &y, &pivot).bind(move |at_most| {
            let rest = xs[1..].to_vec();
            if at_most {
                split_into(&cmp2, pivot.clone(), rest, prepend(y.clone(), l1.clone()), l2.clone())
            } else {
                split_into(&cmp2, pivot.clone(), rest, l1.clone(), prepend(y.clone(), l2.clone()))
            }
        })
    }

    pub fn quick_sort_split<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>) -> Eff<Vec<V>> {
        let Some(x) = xs.first().cloned() else {
            return Eff::pure(Vec::new());
        };
        let cmp = cmp.clone();
        split(&cmp, x.clone(), xs[1..].to_vec()).bind(move |(l1, l2)| {
            let (cmp2, x) = (cmp.clone(), x.clone());
            quick_sort_split(&cmp, l1).bind(move |s1| {
                let x = x.clone();
                quick_sort_split(&cmp2, l2.clone()).map(move |s2| {
                    let mut out = s1.clone();
                    out.push(x.clone());
                    out.extend(s2);
                    out
                })
            })
        })
    }

    pub fn merge<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>, ys: Vec<V>) -> Eff<Vec<V>> {
        if xs.is_empty() {
            return Eff::pure(ys);
        }
        if ys.is_empty() {
            return Eff::pure(xs);
        }
        let (x, y) = (xs[0].clone(), ys[0].clone());
        let cmp2 = cmp.clone();
        compare(cmp, &x, &y).bind(move |first| {
            if first {
                let x = x.clone();
                merge(&cmp2, xs[1..].to_vec(), ys.clone()).map(move |zs| prepend(x.clone(), zs))
            } else {
                let y = y.clone();
                merge(&cmp2, xs.clone(), ys[1..].to_vec()).map(move |zs| prepend(y.clone(), zs))
            }
        })
    }

    pub fn merge_sort<V: Clone + 'static>(cmp: &Comparator<V>, xs: Vec<V>) -> Eff<Vec<V>> {
        if xs.len() <= 1 {
            return Eff::pure(xs);
        }
        let (l, r) = xs.split_at(xs.len() / 2);
        let (cmp2, r) = (cmp.clone(), r.to_vec());
        merge_sort(cmp, l.to_vec()).bind(move |s1| {
            let cmp3 = cmp2.clone();
            merge_sort(&cmp2, r.clone()).bind(move |s2| merge(&cmp3, s1.clone(), s2))
        })
    }
}
