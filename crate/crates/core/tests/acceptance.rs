//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use lazynd::effect::{lift2, Eff, StrictnessMode};
use lazynd::laws::{run_suite, LawConfig, LawSuite};
use lazynd::lifted::{self, from_host, insert_nd, nf};
use lazynd::pflp::studies::{
    all_six, consecutive_bs_probability, grass_query, palindrome_probability, santa_failure, GrassQuery,
    SantaVariant,
};
use lazynd::pflp::{flip, join_with, outcomes, query, replicate_dist, replicate_shared, uniform};
use lazynd::pflp::{Dist, DistGenerator};
use lazynd::search::{enumerate, search, SearchConfig};
use lazynd::sortlab::{coin_sorted, full_demand_stats, head_demand_stats, pick_min_in, Algorithm, Comparator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

const EXACT: f64 = 0.0;
const TOL_PROB: f64 = 1e-9;
const TOL_PRINTED: f64 = 1e-5;
const TOL_TIGHT: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, format!("{what}: got {got}, want {want} (tol {tol:e})"))
}

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

fn values<V: Clone + 'static>(e: Eff<V>) -> Result<Vec<V>, String> {
    enumerate(e, &cfg()).map(|en| en.values).map_err(|e| e.to_string())
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn sharing() -> Outcome {
    let coin = || Eff::choose(Eff::pure(42), Eff::pure(43));
    let unshared = values(lift2(|a, b| a + b, &coin(), &coin()))?;
    ensure(unshared == [84, 85, 85, 86], format!("unshared {unshared:?}"))?;
    let x = coin();
    let shared = values(lift2(|a, b| a + b, &x, &x))?;
    ensure(shared == [84, 86], format!("shared {shared:?}"))?;
    Ok("[84,85,85,86] and [84,86]".into())
}

fn insert_laziness() -> Outcome {
    let inserted = insert_nd(&Eff::pure(1), &from_host(2..=5));
    let lists = values(nf(&inserted))?;
    let want: Vec<Vec<i64>> = vec![
        vec![1, 2, 3, 4, 5],
        vec![2, 1, 3, 4, 5],
        vec![2, 3, 1, 4, 5],
        vec![2, 3, 4, 1, 5],
        vec![2, 3, 4, 5, 1],
    ];
    ensure(lists == want, format!("insert lists {lists:?}"))?;
    let head = lifted::head(&insert_nd(&Eff::pure(1), &from_host(2..=5)));
    let en = enumerate(head, &cfg()).map_err(|e| e.to_string())?;
    ensure(en.values == [1, 2], format!("head values {:?}", en.values))?;
    ensure(en.stats.choice_expansions == 1, format!("expansions {}", en.stats.choice_expansions))?;
    Ok("5 lists, head {1,2} with 1 expansion".into())
}

fn permutation_counts() -> Outcome {
    let lists = |algo, n| values(nf(&coin_sorted(algo, StrictnessMode::Lazy, n)));
    for algo in [Algorithm::Insertion, Algorithm::Selection, Algorithm::QuickSplit, Algorithm::Merge] {
        for n in 3..=5 {
            let vs = lists(algo, n)?;
            let distinct: std::collections::BTreeSet<_> = vs.iter().cloned().collect();
            let want = factorial(n as u64) as usize;
            ensure(
                vs.len() == want && distinct.len() == want,
                format!("{} n={n}: {} results, {} distinct", algo.name(), vs.len(), distinct.len()),
            )?;
        }
    }
    let bubble = lists(Algorithm::Bubble, 3)?;
    let mut counts: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for v in &bubble {
        *counts.entry(v.clone()).or_default() += 1;
    }
    let doubled: Vec<_> = counts.iter().filter(|(_, c)| **c == 2).map(|(k, _)| k.clone()).collect();
    ensure(
        bubble.len() == 8 && doubled == [vec![1, 2, 3], vec![1, 3, 2]] && counts.values().all(|c| *c <= 2),
        format!("bubble {bubble:?}"),
    )?;
    let qf2 = lists(Algorithm::QuickFilter, 2)?;
    ensure(
        qf2 == [vec![2, 1], vec![2, 1, 2], vec![1], vec![1, 2]],
        format!("quick-filter [1,2] {qf2:?}"),
    )?;
    let qf3 = lists(Algorithm::QuickFilter, 3)?.len();
    let qf4 = lists(Algorithm::QuickFilter, 4)?.len();
    ensure(qf3 == 49 && qf4 == 4225, format!("quick-filter {qf3}, {qf4}"))?;
    Ok("n! for 4 algorithms, bubble 8, quick-filter 4/49/4225".into())
}

fn strictness_gap() -> Outcome {
    let unbounded = cfg().with_depth_cap(u64::MAX);
    let head_counts = |mode, range: std::ops::RangeInclusive<i64>| -> Result<Vec<u64>, String> {
        range
            .map(|n| {
                head_demand_stats(Algorithm::Insertion, mode, n, &unbounded)
                    .map(|s| s.leaves)
                    .map_err(|e| e.to_string())
            })
            .collect()
    };
    let lazy = head_counts(StrictnessMode::Lazy, 5..=10)?;
    ensure(lazy == [16, 32, 64, 128, 256, 512], format!("lazy insertion {lazy:?}"))?;
    let strict = head_counts(StrictnessMode::Strict, 5..=10)?;
    ensure(
        strict == [120, 720, 5040, 40320, 362880, 3628800],
        format!("strict insertion {strict:?}"),
    )?;
    for n in 1..=5i64 {
        let leaves = full_demand_stats(Algorithm::Selection, StrictnessMode::Strict, n, &cfg())
            .map_err(|e| e.to_string())?
            .leaves;
        ensure(leaves == 1 << (n * (n - 1) / 2), format!("strict selection n={n}: {leaves}"))?;
    }
    let mut pick = Vec::new();
    for n in 1..=12i64 {
        let demanded = lifted::fst(&pick_min_in(StrictnessMode::Strict, &Comparator::coin(), &from_host(1..=n)));
        pick.push(search(demanded, &cfg(), |_| {}).map_err(|e| e.to_string())?.leaves);
    }
    let want: Vec<u64> = (0..12).map(|k| 1 << k).collect();
    ensure(pick == want, format!("strict pick-min {pick:?}"))?;
    Ok("lazy 2^(n-1), strict n!, selection 2^(n(n-1)/2), pick-min 2^(n-1)".into())
}

fn coin() -> Dist<bool> {
    flip(0.5).expect("valid")
}

fn bool_lists(d: Dist<lifted::LiftedList<bool>>) -> Result<Vec<(Vec<bool>, f64)>, String> {
    outcomes(d, |e| nf(&e), &cfg()).map_err(|e| e.to_string())
}

/// A random distribution built only from the combinators.
fn random_combinator_dist(rng: &mut ChaCha8Rng, depth: u32) -> Dist<i64> {
    let roll = rng.gen_range(0..if depth == 0 { 3 } else { 6 });
    match roll {
        0 => Dist::certainly(rng.gen_range(0..5)),
        1 => uniform(0..rng.gen_range(1..5)).expect("valid"),
        2 => {
            let p = rng.gen_range(0.0..1.0);
            flip(p).expect("valid").map(|b| b.map(|b| b as i64))
        }
        3 => {
            let inner = random_combinator_dist(rng, depth - 1);
            let k = rng.gen_range(1..4);
            inner.bind(move |x| {
                lazynd::pflp::dist_case(&x, move |v| uniform([v, v + k]).expect("valid"))
            })
        }
        4 => {
            let a = random_combinator_dist(rng, depth - 1);
            let b = random_combinator_dist(rng, depth - 1);
            join_with(StrictnessMode::Lazy, |x, y| lift2(|a, b| a + b, &x, &y), &a, &b)
        }
        _ => {
            let n = rng.gen_range(0..3);
            let gen = DistGenerator::new(coin);
            replicate_dist(StrictnessMode::Lazy, n, &gen).map(|xs| lifted::length(&xs).map(|l| l as i64))
        }
    }
}

fn pflp_basics() -> Outcome {
    let flips = bool_lists(replicate_dist(StrictnessMode::Lazy, 2, &DistGenerator::new(coin)))?;
    ensure(
        flips.len() == 4 && flips.iter().all(|(_, p)| *p == 0.25),
        format!("flipCoin 2 {flips:?}"),
    )?;
    let two_heads = query(
        |e| nf(&e).map(|v| v.iter().filter(|b| **b).count() >= 2),
        replicate_dist(StrictnessMode::Lazy, 4, &DistGenerator::new(coin)),
    )
    .map_err(|e| e.to_string())?;
    close("at least 2 heads in 4", two_heads, 0.6875, EXACT)?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..100 {
        let d = random_combinator_dist(&mut rng, 3);
        let total = query(|_| Eff::pure(true), d).map_err(|e| e.to_string())?;
        close(&format!("normalization case {i}"), total, 1.0, TOL_PROB)?;
    }
    Ok("four 1/4 events, 0.6875, 100 normalized dists".into())
}

fn pruning() -> Outcome {
    for n in 1..=8 {
        let p = all_six(StrictnessMode::Lazy, n, &cfg()).map_err(|e| e.to_string())?.probability;
        let want = (1.0f64 / 6.0).powi(n as i32);
        ensure(
            ((p - want) / want).abs() <= TOL_TIGHT,
            format!("all_six({n}) = {p}, want {want}"),
        )?;
    }
    let mut slowest = Duration::ZERO;
    for n in [10usize, 50, 100, 300] {
        let start = Instant::now();
        let out = all_six(StrictnessMode::Lazy, n, &cfg()).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        let bound = 12 * n as u64 + 12;
        ensure(
            out.stats.choice_expansions <= bound,
            format!("all_six({n}) expansions {} > {bound}", out.stats.choice_expansions),
        )?;
        if n == 300 {
            ensure(start.elapsed() < Duration::from_secs(5), format!("n=300 took {:?}", start.elapsed()))?;
        }
    }
    for n in 1..=5 {
        let stats = all_six(StrictnessMode::Strict, n, &cfg()).map_err(|e| e.to_string())?.stats;
        let visits = stats.leaves + stats.failures;
        ensure(visits >= 6u64.pow(n as u32), format!("strict all_six({n}) visits {visits}"))?;
    }
    Ok(format!("relative error <= 1e-12, expansions <= 12n+12, n=300 in {slowest:.2?}, strict >= 6^n"))
}

fn call_time_vs_run_time() -> Outcome {
    let shared = bool_lists(replicate_shared(2, &coin()))?;
    ensure(
        shared == [(vec![true, true], 0.25), (vec![false, false], 0.25)],
        format!("shared {shared:?}"),
    )?;
    let fresh = bool_lists(replicate_dist(StrictnessMode::Lazy, 2, &DistGenerator::new(coin)))?;
    let mut lists: Vec<_> = fresh.iter().map(|(l, _)| l.clone()).collect();
    lists.sort();
    lists.dedup();
    ensure(
        fresh.len() == 4 && lists.len() == 4 && fresh.iter().all(|(_, p)| *p == 0.25),
        format!("generator {fresh:?}"),
    )?;
    Ok("{TT:1/4, FF:1/4} vs four 1/4 events".into())
}

fn and_example(mode: StrictnessMode) -> Dist<bool> {
    coin().bind_in(mode, move |x| {
        coin().bind_in(mode, move |y| Dist::certainly_lazy(lifted::and(&x, &y)))
    })
}

fn events_only(d: Dist<bool>) -> Result<Vec<bool>, String> {
    let events = d.into_eff().bind(|pr| pr.event);
    values(events)
}

fn lost_events() -> Outcome {
    let events = events_only(and_example(StrictnessMode::Lazy))?;
    let mut sorted = events.clone();
    sorted.sort();
    ensure(sorted == [false, false, true], format!("events {events:?}"))?;
    ensure(events.len() == 3, "three event leaves")?;
    let strict_events = events_only(and_example(StrictnessMode::Strict))?;
    ensure(strict_events.len() == 4, format!("strict events {}", strict_events.len()))?;
    let p = query(|e| lifted::not(&e), and_example(StrictnessMode::Lazy)).map_err(|e| e.to_string())?;
    close("query not", p, 0.75, EXACT)?;
    Ok(format!("events {events:?}, strict 4, query(not) = 0.75"))
}

fn bayes() -> Outcome {
    let q = |g| grass_query(g, &cfg()).map_err(|e| e.to_string());
    let joint = q(GrassQuery::RainAndWet)?;
    close("rain and wet", joint, 0.2 * 0.8019, TOL_PROB)?;
    close("rain and wet (printed)", joint, 0.16038, TOL_PROB)?;
    let wet = q(GrassQuery::Wet)?;
    let cond = q(GrassQuery::RainGivenWet)?;
    close("rain given wet", cond, 0.16038 / 0.44838, TOL_PROB)?;
    close("rain given wet (printed)", cond, 0.35768768, TOL_PRINTED)?;
    close("wet", wet, 0.44838, TOL_PROB)?;
    Ok(format!("joint {joint:.12}, conditional {cond:.12}"))
}

fn strings() -> Outcome {
    let pal = palindrome_probability(5, &cfg()).map_err(|e| e.to_string())?.probability;
    close("palindrome 5", pal, 0.25, EXACT)?;
    let bs = consecutive_bs_probability(10, &cfg()).map_err(|e| e.to_string())?.probability;
    close("consecutive b 10", bs, 0.859375, EXACT)?;
    let fib = |k: u32| (1..k).fold((0u64, 1u64), |(a, b), _| (b, a + b)).1;
    close("consecutive b oracle", bs, 1.0 - fib(12) as f64 / 1024.0, EXACT)?;
    let start = Instant::now();
    let pal30 = palindrome_probability(30, &cfg().with_depth_cap(u64::MAX))
        .map_err(|e| e.to_string())?
        .probability;
    let took = start.elapsed();
    close("palindrome 30", pal30, 2f64.powi(-15), TOL_TIGHT)?;
    ensure(took < Duration::from_secs(10), format!("palindrome 30 took {took:?}"))?;
    Ok(format!("0.25, 0.859375, length 30 in {took:.2?}"))
}

fn santa() -> Outcome {
    let p = |v, n| santa_failure(v, n, &cfg()).map(|o| o.probability).map_err(|e| e.to_string());
    close("naive", p(SantaVariant::Naive, 3)?, 2.0 / 3.0, TOL_TIGHT)?;
    close("no self pick", p(SantaVariant::NoSelfPick, 3)?, 0.25, TOL_TIGHT)?;
    close("pick and check", p(SantaVariant::PickAndCheck, 3)?, 0.25, TOL_TIGHT)?;
    for (limit, want) in [
        (1, 2.0 / 3.0),
        (5, 0.2802211934156378),
        (10, 0.2509723287280479),
        (20, 0.2500009536026171),
    ] {
        close(&format!("repeat {limit}"), p(SantaVariant::Repeat { limit }, 3)?, want, TOL_PROB)?;
    }
    for n in 2..=6u32 {
        let fact = factorial(n as u64) as f64;
        let derangements = (0..=n).fold(0.0, |acc, k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc + sign * fact / factorial(k as u64) as f64
        });
        close(&format!("naive n={n}"), p(SantaVariant::Naive, n)?, 1.0 - derangements / fact, TOL_TIGHT)?;
    }
    Ok("n=3 variants and derangement oracle n=2..6".into())
}

fn law_suite() -> Outcome {
    let config = LawConfig::default();
    let reports = run_suite(LawSuite::All, &config);
    let failed: Vec<_> = reports.iter().filter(|(_, ok)| !ok).map(|(r, _)| format!("{r:?}")).collect();
    ensure(failed.is_empty(), failed.join("; "))?;
    Ok(format!("{} law groups, seed {:#x}, {} cases each", reports.len(), config.seed, config.cases))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("sharing semantics", sharing),
        ("insert/head laziness", insert_laziness),
        ("permutation counts", permutation_counts),
        ("strictness gap", strictness_gap),
        ("distribution basics", pflp_basics),
        ("pruning", pruning),
        ("call-time vs run-time choice", call_time_vs_run_time),
        ("lost events, preserved probability", lost_events),
        ("bayesian network", bayes),
        ("strings", strings),
        ("secret santa", santa),
        ("law suite", law_suite),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({took:.2?})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} ({took:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
