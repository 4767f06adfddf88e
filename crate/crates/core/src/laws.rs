//! Executable algebraic laws, checked observationally on seeded random
//! inputs.
//!
//! Two computations are observationally equal when their multisets of
//! values coincide (no values at all is the distinguished failure
//! observation).

use std::fmt::{self, Debug};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::effect::{Eff, Signature, StrictnessMode};
use crate::lifted::{self, cons, from_host, insert_nd, nf, nil, List};
use crate::pflp::{enum_dist, query_with, Dist};
use crate::search::{enumerate, SearchConfig, SearchError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation<V> {
    /// Sorted values.
    Values(Vec<V>),
    Failure,
}

impl<V: Debug> fmt::Display for Observation<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Values(vs) => write!(f, "{vs:?}"),
            Observation::Failure => f.write_str("failure"),
        }
    }
}

pub fn observe<V: Ord + Clone + 'static>(e: Eff<V>, config: &SearchConfig) -> Result<Observation<V>, SearchError> {
    let mut values = enumerate(e, config)?.values;
    if values.is_empty() {
        return Ok(Observation::Failure);
    }
    values.sort();
    Ok(Observation::Values(values))
}

pub fn obs_equal<V: Ord + Clone + 'static>(a: Eff<V>, b: Eff<V>, config: &SearchConfig) -> Result<bool, SearchError> {
    Ok(observe(a, config)? == observe(b, config)?)
}

/// Whether `p` holds for every value of `e`.
pub fn check_for_all<V: Clone + 'static>(
    p: impl Fn(&V) -> bool,
    e: Eff<V>,
    config: &SearchConfig,
) -> Result<bool, SearchError> {
    let mut ok = true;
    crate::search::search(e, config, |v| ok &= p(&v))?;
    Ok(ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawConfig {
    pub seed: u64,
    /// Random cases per law.
    pub cases: usize,
    /// Absolute tolerance for probabilities.
    pub tolerance: f64,
    pub search: SearchConfig,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            seed: 0x5eed,
            cases: 200,
            tolerance: 1e-12,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub name: String,
    pub cases: usize,
    /// The function under test broke a precondition, so the law was not
    /// checked.
    pub rejected: bool,
    pub failures: Vec<String>,
}

impl LawReport {
    fn new(name: &str) -> Self {
        LawReport {
            name: name.to_string(),
            cases: 0,
            rejected: false,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.rejected && self.failures.is_empty()
    }

    fn record<V: Debug + Ord + Clone + 'static>(
        &mut self,
        what: &str,
        lhs: Eff<V>,
        rhs: Eff<V>,
        config: &SearchConfig,
    ) {
        self.cases += 1;
        match (observe(lhs, config), observe(rhs, config)) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(a), Ok(b)) => self.failures.push(format!("{what}: {a} vs {b}")),
            (Err(e), _) | (_, Err(e)) => self.failures.push(format!("{what}: {e}")),
        }
    }

    fn record_close(&mut self, what: &str, a: Result<f64, SearchError>, b: Result<f64, SearchError>, tol: f64) {
        self.cases += 1;
        match (a, b) {
            (Ok(a), Ok(b)) if (a - b).abs() <= tol => {}
            (Ok(a), Ok(b)) => self.failures.push(format!("{what}: {a} vs {b}")),
            (Err(e), _) | (_, Err(e)) => self.failures.push(format!("{what}: {e}")),
        }
    }
}

/// Random integer trees over a signature.
pub fn random_tree(rng: &mut ChaCha8Rng, signature: Signature, depth: u32) -> Eff<i64> {
    let leaf = Eff::pure(rng.gen_range(-5..=5));
    if depth == 0 {
        return leaf;
    }
    let roll: f64 = rng.gen();
    match signature {
        Signature::Zero => leaf,
        Signature::One if roll < 0.2 => Eff::undefined(),
        Signature::Const if roll < 0.2 => Eff::raise("boom"),
        Signature::Nd if roll < 0.15 => Eff::fail(),
        Signature::Nd if roll < 0.55 => Eff::choose(
            random_tree(rng, signature, depth - 1),
            random_tree(rng, signature, depth - 1),
        ),
        _ => leaf,
    }
}

/// Random lifted lists whose elements and spine may carry effects.
pub fn random_list(rng: &mut ChaCha8Rng, signature: Signature, depth: u32) -> List<i64> {
    let len = rng.gen_range(0..=3);
    let mut list = nil();
    for _ in 0..len {
        let head = random_tree(rng, signature, 2);
        list = cons(head, list);
    }
    if depth == 0 {
        return list;
    }
    let roll: f64 = rng.gen();
    match signature {
        Signature::One if roll < 0.15 => cons(Eff::pure(0), Eff::undefined()),
        Signature::Nd if roll < 0.1 => Eff::fail(),
        Signature::Nd if roll < 0.4 => Eff::choose(list, random_list(rng, signature, depth - 1)),
        _ => list,
    }
}

/// A random effectful function on integers.
#[derive(Debug, Clone, Copy)]
struct RandomFn {
    kind: u8,
    a: i64,
    b: i64,
}

impl RandomFn {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        RandomFn {
            kind: rng.gen_range(0..4),
            a: rng.gen_range(-3..=3),
            b: rng.gen_range(2..=4),
        }
    }

    fn apply(self, x: i64) -> Eff<i64> {
        match self.kind {
            0 => Eff::pure(x + self.a),
            1 => Eff::choose(Eff::pure(x * self.b), Eff::pure(x - self.a)),
            2 if x.rem_euclid(self.b) == 0 => Eff::fail(),
            2 => Eff::pure(x * self.a),
            _ => Eff::choose(Eff::pure(x), Eff::choose(Eff::pure(x + self.b), Eff::fail())),
        }
    }

    fn apply_dist(self, x: i64) -> Dist<i64> {
        let (a, b) = (self.a, self.b);
        match self.kind {
            0 => Dist::certainly(x + a),
            1 => enum_dist([x * b, x - a], [0.25, 0.75]).expect("valid"),
            2 => enum_dist([x, x + 1, x + b], [0.5, 0.3, 0.2]).expect("valid"),
            _ => enum_dist([x * a, -x], [0.6, 0.4]).expect("valid"),
        }
    }
}

/// Monad laws for effect trees (all signatures) and for distributions
/// under every query of a random predicate.
pub fn check_monad_laws(config: &LawConfig) -> Vec<LawReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let search = &config.search;
    let mut trees = LawReport::new("monad laws (effect trees)");
    for _ in 0..config.cases {
        let sig = [Signature::Zero, Signature::One, Signature::Const, Signature::Nd][rng.gen_range(0..4)];
        let m = random_tree(&mut rng, sig, 4);
        let (f, g) = (RandomFn::new(&mut rng), RandomFn::new(&mut rng));
        let a = rng.gen_range(-5..=5);
        trees.record("left identity", Eff::pure(a).bind(move |x| f.apply(x)), f.apply(a), search);
        trees.record("right identity", m.bind(Eff::pure), m.clone(), search);
        trees.record(
            "associativity",
            m.bind(move |x| f.apply(x)).bind(move |y| g.apply(y)),
            m.bind(move |x| f.apply(x).bind(move |y| g.apply(y))),
            search,
        );
    }

    let mut dists = LawReport::new("monad laws (distributions under queries)");
    for _ in 0..config.cases {
        let d = random_dist(&mut rng);
        let (f, g) = (RandomFn::new(&mut rng), RandomFn::new(&mut rng));
        let a = rng.gen_range(-5..=5);
        let (modulus, rest) = (rng.gen_range(2..=3), rng.gen_range(0..2));
        let pred = move |e: Eff<i64>| e.map(move |x| x.rem_euclid(modulus) == rest);
        let q = |d: Dist<i64>| query_with(pred, d, search).map(|o| o.probability);
        for mode in [StrictnessMode::Lazy, StrictnessMode::Strict] {
            let fd = move |e: Eff<i64>| dist_case_i64(&e, move |x| f.apply_dist(x));
            let gd = move |e: Eff<i64>| dist_case_i64(&e, move |x| g.apply_dist(x));
            dists.record_close(
                "left identity",
                q(Dist::certainly(a).bind_in(mode, fd)),
                q(f.apply_dist(a)),
                config.tolerance,
            );
            dists.record_close(
                "right identity",
                q(d.bind_in(mode, Dist::certainly_lazy)),
                q(d.clone()),
                config.tolerance,
            );
            dists.record_close(
                "associativity",
                q(d.bind_in(mode, fd).bind_in(mode, gd)),
                q(d.bind_in(mode, move |x| fd(x).bind_in(mode, gd))),
                config.tolerance,
            );
        }
    }
    vec![trees, dists]
}

fn dist_case_i64(e: &Eff<i64>, f: impl Fn(i64) -> Dist<i64> + 'static) -> Dist<i64> {
    crate::pflp::dist_case(e, f)
}

fn random_dist(rng: &mut ChaCha8Rng) -> Dist<i64> {
    let n = rng.gen_range(1..=4);
    let events: Vec<i64> = (0..n).map(|_| rng.gen_range(-6..=6)).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    enum_dist(events, weights.into_iter().map(|w| w / total)).expect("normalized")
}

/// The pull-tab law `f(l ? r) = f(l) ? f(r)` for a function `f` that is
/// strict and defined through its argument's values. That precondition is
/// checked first, on the same inputs; if it fails the report is marked
/// rejected.
pub fn check_pulltab<A, B>(
    name: &str,
    f: impl Fn(Eff<A>) -> Eff<B> + 'static,
    mut gen: impl FnMut(&mut ChaCha8Rng) -> Eff<A>,
    config: &LawConfig,
) -> LawReport
where
    A: Clone + 'static,
    B: Ord + Clone + Debug + 'static,
{
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let f = Rc::new(f);
    let mut premise = LawReport::new(name);
    let mut report = LawReport::new(name);
    for _ in 0..config.cases {
        let (e, l, r) = (gen(&mut rng), gen(&mut rng), gen(&mut rng));
        let f2 = Rc::clone(&f);
        let through_values = e.bind(move |z| f2(Eff::pure(z)));
        premise.record("premise", f(e), through_values, &config.search);
        report.record(
            "pull-tab",
            f(Eff::choose(l.clone(), r.clone())),
            Eff::choose(f(l), f(r)),
            &config.search,
        );
    }
    if !premise.failures.is_empty() {
        report.rejected = true;
        report.failures = premise.failures;
    }
    report
}

/// `(xs ++ ys) ++ zs = xs ++ (ys ++ zs)` on random lists of `signature`.
pub fn check_append_assoc(signature: Signature, config: &LawConfig) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ signature as u64);
    let mut report = LawReport::new(&format!("append associativity ({signature})"));
    for _ in 0..config.cases {
        let xs = random_list(&mut rng, signature, 2);
        let ys = random_list(&mut rng, signature, 2);
        let zs = random_list(&mut rng, signature, 2);
        let lhs = nf(&lifted::append(&lifted::append(&xs, &ys), &zs));
        let rhs = nf(&lifted::append(&xs, &lifted::append(&ys, &zs)));
        report.record("append", lhs, rhs, &config.search);
    }
    report
}

fn one_or_two() -> Eff<i64> {
    Eff::choose(Eff::pure(1), Eff::pure(2))
}

fn double_plus(x: &Eff<i64>) -> Eff<i64> {
    crate::effect::lift2(|a, b| a + b, x, x)
}

fn double_mult(x: &Eff<i64>) -> Eff<i64> {
    x.map(|a| 2 * a)
}

fn even(x: &Eff<i64>) -> Eff<bool> {
    x.map(|a| a % 2 == 0)
}

/// The standard call-time choice examples.
pub fn check_sharing_examples(config: &LawConfig) -> LawReport {
    let search = &config.search;
    let mut report = LawReport::new("sharing examples");
    let expect = |report: &mut LawReport, what: &str, e: Eff<bool>, want: Observation<bool>| {
        report.cases += 1;
        match observe(e, search) {
            Ok(got) if got == want => {}
            Ok(got) => report.failures.push(format!("{what}: got {got}, expected {want}")),
            Err(err) => report.failures.push(format!("{what}: {err}")),
        }
    };
    expect(
        &mut report,
        "even (doubleMult coin)",
        even(&double_mult(&one_or_two())),
        Observation::Values(vec![true, true]),
    );
    expect(
        &mut report,
        "even (doublePlus coin), shared",
        even(&double_plus(&one_or_two().share())),
        Observation::Values(vec![true, true]),
    );
    let independent = crate::effect::lift2(|a, b| a + b, &one_or_two(), &one_or_two());
    expect(
        &mut report,
        "even (coin + coin), independent",
        even(&independent),
        Observation::Values(vec![false, false, true, true]),
    );
    report.cases += 1;
    match observe(double_plus(&Eff::fail()), search) {
        Ok(Observation::Failure) => {}
        Ok(got) => report.failures.push(format!("doublePlus failed: got {got}")),
        Err(err) => report.failures.push(format!("doublePlus failed: {err}")),
    }
    report
}

/// `nf` applied to an already normalized list changes nothing, and every
/// permutation of three elements has length three.
pub fn check_normal_forms(config: &LawConfig) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(7));
    let mut report = LawReport::new("normal forms");
    for _ in 0..config.cases {
        let xs = random_list(&mut rng, Signature::Nd, 2);
        let again = nf(&xs).bind(|v| nf(&from_host(v)));
        report.record("nf idempotence", nf(&xs), again, &config.search);
    }
    report.cases += 1;
    match check_for_all(|v: &Vec<i64>| v.len() == 3, nf(&permutations(&from_host([1, 2, 3]))), &config.search) {
        Ok(true) => {}
        Ok(false) => report.failures.push("a permutation of [1,2,3] has the wrong length".into()),
        Err(err) => report.failures.push(err.to_string()),
    }
    report
}

/// All permutations via repeated non-deterministic insertion.
pub fn permutations<V: Clone + 'static>(xs: &List<V>) -> List<V> {
    xs.bind(|l| match l {
        lifted::LiftedList::Nil => nil(),
        lifted::LiftedList::Cons(x, rest) => insert_nd(&x, &permutations(&rest)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawSuite {
    Monad,
    Pulltab,
    Append,
    Sharing,
    All,
}

impl std::str::FromStr for LawSuite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monad" => Ok(LawSuite::Monad),
            "pulltab" => Ok(LawSuite::Pulltab),
            "append" => Ok(LawSuite::Append),
            "sharing" => Ok(LawSuite::Sharing),
            "all" => Ok(LawSuite::All),
            other => Err(format!("unknown law suite `{other}`")),
        }
    }
}

/// Pull-tab checks for `inc` and `length . nf` (which must hold) and for a
/// constant function (which must be rejected).
pub fn pulltab_reports(config: &LawConfig) -> Vec<LawReport> {
    let inc = check_pulltab(
        "pull-tab (inc)",
        |e: Eff<i64>| e.map(|x| x + 1),
        |rng| random_tree(rng, Signature::Nd, 3),
        config,
    );
    let length = check_pulltab(
        "pull-tab (length . nf)",
        |e: List<i64>| nf(&e).map(|v| v.len()),
        |rng| random_list(rng, Signature::Nd, 2),
        config,
    );
    let constant = check_pulltab(
        "pull-tab (const 0)",
        |_e: Eff<i64>| Eff::pure(0),
        |rng| random_tree(rng, Signature::Nd, 3),
        config,
    );
    vec![inc, length, constant]
}

/// Runs a suite. For pull-tab, the constant function is expected to be
/// rejected, so its report counts as passing when `rejected` is set.
pub fn run_suite(suite: LawSuite, config: &LawConfig) -> Vec<(LawReport, bool)> {
    let expect_pass = |r: LawReport| {
        let ok = r.passed();
        (r, ok)
    };
    let mut out = Vec::new();
    if matches!(suite, LawSuite::Monad | LawSuite::All) {
        out.extend(check_monad_laws(config).into_iter().map(expect_pass));
    }
    if matches!(suite, LawSuite::Pulltab | LawSuite::All) {
        for r in pulltab_reports(config) {
            let ok = if r.name.contains("const") { r.rejected } else { r.passed() };
            out.push((r, ok));
        }
    }
    if matches!(suite, LawSuite::Append | LawSuite::All) {
        for sig in [Signature::Zero, Signature::One, Signature::Nd] {
            out.push(expect_pass(check_append_assoc(sig, config)));
        }
    }
    if matches!(suite, LawSuite::Sharing | LawSuite::All) {
        out.push(expect_pass(check_sharing_examples(config)));
        out.push(expect_pass(check_normal_forms(config)));
    }
    out
}
