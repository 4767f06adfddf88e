//! Finite probability distributions as non-deterministic computations.
//!
//! A distribution is a non-deterministic choice between event/probability
//! pairs. Both components of a pair are suspended, and the lazy bind
//! combines distributions without looking at either, so a query only
//! explores the events its predicate inspects. Events that fail the
//! predicate are pruned before the rest of the distribution is built.

use std::rc::Rc;

use thiserror::Error;

use crate::effect::{lift2, Eff, StrictnessMode};
use crate::lifted::{cons, nil, LiftedList};
use crate::search::{search, SearchConfig, SearchError, SearchStats};

pub mod studies;

pub type Probability = f64;

/// Tolerance when checking that probabilities sum to one.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("a distribution needs at least one event")]
    Empty,
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("probabilities sum to {0}, not 1")]
    BadTotal(f64),
    #[error("conditioning on an event of probability zero")]
    ZeroDenominator,
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// One event with its probability, both suspended.
pub struct DistPair<V> {
    pub event: Eff<V>,
    pub prob: Eff<Probability>,
}

impl<V> Clone for DistPair<V> {
    fn clone(&self) -> Self {
        DistPair {
            event: self.event.clone(),
            prob: self.prob.clone(),
        }
    }
}

/// A distribution over events of type `V`.
pub struct Dist<V>(Eff<DistPair<V>>);

impl<V> Clone for Dist<V> {
    fn clone(&self) -> Self {
        Dist(self.0.clone())
    }
}

/// Produces a distribution with fresh choices on every call.
pub struct DistGenerator<V>(Rc<dyn Fn() -> Dist<V>>);

impl<V> Clone for DistGenerator<V> {
    fn clone(&self) -> Self {
        DistGenerator(Rc::clone(&self.0))
    }
}

impl<V: Clone + 'static> DistGenerator<V> {
    pub fn new(f: impl Fn() -> Dist<V> + 'static) -> Self {
        DistGenerator(Rc::new(f))
    }

    pub fn generate(&self) -> Dist<V> {
        (self.0)()
    }
}

impl<V: Clone + 'static> Dist<V> {
    pub fn from_eff(e: Eff<DistPair<V>>) -> Self {
        Dist(e)
    }

    /// The underlying choice tree of pairs.
    pub fn as_eff(&self) -> &Eff<DistPair<V>> {
        &self.0
    }

    pub fn into_eff(self) -> Eff<DistPair<V>> {
        self.0
    }

    /// The event `v` with probability one.
    pub fn certainly(v: V) -> Self {
        Dist::certainly_lazy(Eff::pure(v))
    }

    /// A suspended event with probability one.
    pub fn certainly_lazy(event: Eff<V>) -> Self {
        Dist(Eff::pure(DistPair {
            event,
            prob: Eff::pure(1.0),
        }))
    }

    /// The empty sub-distribution.
    pub fn fail() -> Self {
        Dist(Eff::fail())
    }

    pub fn delay(f: impl FnOnce() -> Dist<V> + 'static) -> Self {
        Dist(Eff::delay(move || f().0))
    }

    /// Lazy bind. Neither this distribution nor `f`'s result is evaluated
    /// until the event or the probability of the result is demanded; the
    /// continuation receives the suspended event.
    pub fn bind<W: Clone + 'static>(&self, f: impl Fn(Eff<V>) -> Dist<W> + 'static) -> Dist<W> {
        let event = self.0.bind(|pr| pr.event);
        let prob = self.0.bind(|pr| pr.prob);
        let next = Eff::delay(move || f(event).0);
        Dist(Eff::pure(DistPair {
            event: next.bind(|pr| pr.event),
            prob: lift2(|p, q| p * q, &prob, &next.bind(|pr| pr.prob)),
        }))
    }

    /// Bind that evaluates this distribution and `f`'s result to their
    /// pairs before anything else.
    pub fn bind_strict<W: Clone + 'static>(&self, f: impl Fn(Eff<V>) -> Dist<W> + 'static) -> Dist<W> {
        let f = Rc::new(f);
        Dist(self.0.bind(move |pr| {
            let p = pr.prob.clone();
            f(pr.event).0.bind(move |pr2| {
                Eff::pure(DistPair {
                    event: pr2.event,
                    prob: lift2(|p, q| p * q, &p, &pr2.prob),
                })
            })
        }))
    }

    pub fn bind_in<W: Clone + 'static>(
        &self,
        mode: StrictnessMode,
        f: impl Fn(Eff<V>) -> Dist<W> + 'static,
    ) -> Dist<W> {
        match mode {
            StrictnessMode::Lazy => self.bind(f),
            StrictnessMode::Strict => self.bind_strict(f),
        }
    }

    /// Applies `f` to every event, keeping probabilities.
    pub fn map<W: Clone + 'static>(&self, f: impl Fn(Eff<V>) -> Eff<W> + 'static) -> Dist<W> {
        self.bind(move |x| Dist::certainly_lazy(f(x)))
    }

    /// Union of two sub-distributions.
    pub fn choose(a: &Dist<V>, b: &Dist<V>) -> Self {
        Dist(Eff::choose(a.0.clone(), b.0.clone()))
    }
}

/// Pattern matches on a suspended event; `f` runs once it is evaluated.
pub fn dist_case<V: Clone + 'static, W: Clone + 'static>(
    event: &Eff<V>,
    f: impl Fn(V) -> Dist<W> + 'static,
) -> Dist<W> {
    Dist(event.bind(move |v| f(v).0))
}

/// Pairs events with probabilities up to the shorter list.
pub fn enum_dist<V: Clone + 'static>(
    events: impl IntoIterator<Item = V>,
    probs: impl IntoIterator<Item = Probability>,
) -> Result<Dist<V>, DistError> {
    let pairs: Vec<(V, Probability)> = events.into_iter().zip(probs).collect();
    if pairs.is_empty() {
        return Err(DistError::Empty);
    }
    if let Some(&(_, p)) = pairs.iter().find(|(_, p)| *p < 0.0 || p.is_nan()) {
        return Err(DistError::NegativeProbability(p));
    }
    let total: f64 = pairs.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(DistError::BadTotal(total));
    }
    Ok(enum_unchecked(pairs))
}

fn enum_unchecked<V: Clone + 'static>(pairs: Vec<(V, Probability)>) -> Dist<V> {
    let tree = pairs.into_iter().rev().fold(Eff::fail(), |rest, (v, p)| {
        let pair = Eff::pure(DistPair {
            event: Eff::pure(v),
            prob: Eff::pure(p),
        });
        Eff::choose(pair, rest)
    });
    Dist(tree)
}

pub fn uniform<V: Clone + 'static>(events: impl IntoIterator<Item = V>) -> Result<Dist<V>, DistError> {
    let events: Vec<V> = events.into_iter().collect();
    if events.is_empty() {
        return Err(DistError::Empty);
    }
    let p = 1.0 / events.len() as f64;
    Ok(enum_unchecked(events.into_iter().map(|v| (v, p)).collect()))
}

/// `true` with probability `p`.
pub fn flip(p: Probability) -> Result<Dist<bool>, DistError> {
    enum_dist([true, false], [p, 1.0 - p])
}

/// Combines two independent distributions event-wise.
pub fn join_with<A, B, C>(
    mode: StrictnessMode,
    g: impl Fn(Eff<A>, Eff<B>) -> Eff<C> + 'static,
    d1: &Dist<A>,
    d2: &Dist<B>,
) -> Dist<C>
where
    A: Clone + 'static,
    B: Clone + 'static,
    C: Clone + 'static,
{
    let g = Rc::new(g);
    let d2 = d2.clone();
    d1.bind_in(mode, move |x| {
        let g = Rc::clone(&g);
        d2.bind_in(mode, move |y| Dist::certainly_lazy(g(x.clone(), y)))
    })
}

/// `n` independent draws, each from a fresh `gen()`.
pub fn replicate_dist<V: Clone + 'static>(
    mode: StrictnessMode,
    n: usize,
    gen: &DistGenerator<V>,
) -> Dist<LiftedList<V>> {
    if n == 0 {
        return Dist::certainly_lazy(nil());
    }
    let rest = {
        let gen = gen.clone();
        Dist::delay(move || replicate_dist(mode, n - 1, &gen))
    };
    join_with(mode, |x, xs| cons(x, xs), &gen.generate(), &rest)
}

/// `n` copies of the same distribution. Its choices are shared, so all
/// elements of an outcome agree.
pub fn replicate_shared<V: Clone + 'static>(n: usize, d: &Dist<V>) -> Dist<LiftedList<V>> {
    if n == 0 {
        return Dist::certainly_lazy(nil());
    }
    let rest = {
        let d = d.clone();
        Dist::delay(move || replicate_shared(n - 1, &d))
    };
    join_with(StrictnessMode::Lazy, |x, xs| cons(x, xs), d, &rest)
}

/// The pairs whose event satisfies `p`. Probabilities are not evaluated.
pub fn filter_dist<V: Clone + 'static>(p: impl Fn(Eff<V>) -> Eff<bool> + 'static, d: &Dist<V>) -> Dist<V> {
    Dist(d.0.bind(move |pr| {
        p(pr.event.clone()).bind(move |keep| if keep { Eff::pure(pr.clone()) } else { Eff::fail() })
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOutcome {
    pub probability: Probability,
    pub stats: SearchStats,
}

/// Total probability of the events satisfying `p`, with search statistics.
pub fn query_with<V: Clone + 'static>(
    p: impl Fn(Eff<V>) -> Eff<bool> + 'static,
    d: Dist<V>,
    config: &SearchConfig,
) -> Result<QueryOutcome, SearchError> {
    let probs = filter_dist(p, &d).0.bind(|pr| pr.prob);
    drop(d);
    let mut total = 0.0;
    let stats = search(probs, config, |x| total += x)?;
    Ok(QueryOutcome {
        probability: total,
        stats,
    })
}

pub fn query<V: Clone + 'static>(
    p: impl Fn(Eff<V>) -> Eff<bool> + 'static,
    d: Dist<V>,
) -> Result<Probability, SearchError> {
    query_with(p, d, &SearchConfig::default()).map(|o| o.probability)
}

pub type Predicate<V> = Rc<dyn Fn(Eff<V>) -> Eff<bool>>;

/// Conjunction of predicates, evaluated left to right and lazily.
pub fn all_of<V: Clone + 'static>(ps: Vec<Predicate<V>>) -> impl Fn(Eff<V>) -> Eff<bool> {
    move |x| {
        ps.iter().rev().fold(Eff::pure(true), |acc, p| {
            crate::lifted::and(&p(x.clone()), &acc)
        })
    }
}

/// Probability that all predicates hold; true for an empty list.
pub fn all_prob<V: Clone + 'static>(ps: Vec<Predicate<V>>, d: Dist<V>, config: &SearchConfig) -> Result<Probability, DistError> {
    Ok(query_with(all_of(ps), d, config)?.probability)
}

/// `P(a | b)`.
pub fn cond_prob<V: Clone + 'static>(
    a: Predicate<V>,
    b: Predicate<V>,
    d: Dist<V>,
    config: &SearchConfig,
) -> Result<Probability, DistError> {
    let joint = all_prob(vec![Rc::clone(&a), Rc::clone(&b)], d.clone(), config)?;
    let evidence = query_with(move |x| b(x), d, config)?.probability;
    if evidence == 0.0 {
        return Err(DistError::ZeroDenominator);
    }
    Ok(joint / evidence)
}

/// Every surviving event in normal form together with its probability.
pub fn outcomes<V: Clone + 'static, W: Clone + 'static>(
    d: Dist<V>,
    normalize: impl Fn(Eff<V>) -> Eff<W> + 'static,
    config: &SearchConfig,
) -> Result<Vec<(W, Probability)>, SearchError> {
    let pairs = d.0.bind(move |pr| {
        let prob = pr.prob.clone();
        normalize(pr.event).bind(move |w| prob.map(move |p| (w.clone(), p)))
    });
    drop(d);
    let mut out = Vec::new();
    search(pairs, config, |x| out.push(x))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifted;

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    #[test]
    fn validation() {
        assert_eq!(enum_dist(Vec::<i32>::new(), vec![]).err(), Some(DistError::Empty));
        assert!(matches!(enum_dist([1, 2], [0.5, 0.6]), Err(DistError::BadTotal(_))));
        assert!(matches!(enum_dist([1, 2], [1.5, -0.5]), Err(DistError::NegativeProbability(_))));
        assert!(uniform(Vec::<i32>::new()).is_err());
        assert!(flip(1.2).is_err());
        // Extra probabilities beyond the events are ignored.
        assert!(enum_dist([1], [1.0, 0.3]).is_ok());
    }

    #[test]
    fn certainly_has_one_outcome() {
        let out = outcomes(Dist::certainly(5), |e| e, &cfg()).unwrap();
        assert_eq!(out, vec![(5, 1.0)]);
    }

    #[test]
    fn bind_does_not_force_the_distribution() {
        let d: Dist<bool> = Dist::delay(|| panic!("forced"));
        let bound = d.bind(|_| Dist::certainly(1));
        assert!(bound.as_eff().peek_pure().is_some());
    }

    #[test]
    fn map_over_coin() {
        let coin = flip(0.5).unwrap();
        let negated = coin.map(|b| lifted::not(&b));
        let out = outcomes(negated, |e| e, &cfg()).unwrap();
        assert_eq!(out, vec![(false, 0.5), (true, 0.5)]);
    }

    #[test]
    fn conditional_needs_evidence() {
        let d = flip(1.0).unwrap();
        let yes: Predicate<bool> = Rc::new(|b| b);
        let no: Predicate<bool> = Rc::new(|b| lifted::not(&b));
        assert_eq!(cond_prob(yes, no, d, &cfg()).err(), Some(DistError::ZeroDenominator));
    }
}
