//! Example models: dice, a Bayesian network, random strings and a
//! Secret Santa drawing.

use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::{
    all_of, dist_case, flip, query_with, replicate_dist, uniform, Dist, DistError, DistGenerator, Predicate,
    Probability, QueryOutcome,
};
use crate::effect::{Eff, StrictnessMode};
use crate::lifted::{self, LiftedList, List};
use crate::search::{SearchConfig, SearchError};

// `flip` and `uniform` only reject invalid constants, which the models
// below never pass.
fn coin(p: Probability) -> Dist<bool> {
    flip(p).expect("model probabilities lie in [0, 1]")
}

fn draw<V: Clone + 'static>(values: Vec<V>) -> Dist<V> {
    uniform(values).expect("draws are from non-empty collections")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
    Three,
    Four,
    Five,
    Six,
}

impl Side {
    pub const ALL: [Side; 6] = [Side::One, Side::Two, Side::Three, Side::Four, Side::Five, Side::Six];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8 + 1)
    }
}

/// A fair six-sided die.
pub fn die() -> Dist<Side> {
    draw(Side::ALL.to_vec())
}

/// `n` independent dice.
pub fn dice(mode: StrictnessMode, n: usize) -> Dist<LiftedList<Side>> {
    replicate_dist(mode, n, &DistGenerator::new(die))
}

pub fn all_sides(p: impl Fn(Side) -> bool + 'static) -> impl Fn(Eff<LiftedList<Side>>) -> Eff<bool> {
    let p = Rc::new(p);
    move |xs| {
        let p = Rc::clone(&p);
        lifted::all(move |s| {
            let p = Rc::clone(&p);
            s.map(move |v| p(v))
        }, &xs)
    }
}

/// Probability that `n` dice all show six.
pub fn all_six(mode: StrictnessMode, n: usize, config: &SearchConfig) -> Result<QueryOutcome, SearchError> {
    query_with(all_sides(|s| s == Side::Six), dice(mode, n), config)
}

/// Probability that `n` dice all show five or six.
pub fn all_five_or_six(mode: StrictnessMode, n: usize, config: &SearchConfig) -> Result<QueryOutcome, SearchError> {
    query_with(
        all_sides(|s| matches!(s, Side::Five | Side::Six)),
        dice(mode, n),
        config,
    )
}

/// Joint outcome of the rain/sprinkler/wet-grass network.
#[derive(Clone)]
pub struct GrassModel {
    pub rain: Eff<bool>,
    pub sprinkler: Eff<bool>,
    pub grass_wet: Eff<bool>,
}

pub fn raining() -> Dist<bool> {
    coin(0.2)
}

pub fn sprinkler(rain: &Eff<bool>) -> Dist<bool> {
    dist_case(rain, |r| if r { coin(0.01) } else { coin(0.4) })
}

pub fn grass_wet(sprinkler: &Eff<bool>, rain: &Eff<bool>) -> Dist<bool> {
    let rain = rain.clone();
    dist_case(sprinkler, move |s| {
        dist_case(&rain, move |r| match (s, r) {
            (false, false) => coin(0.0),
            (false, true) => coin(0.8),
            (true, false) => coin(0.9),
            (true, true) => coin(0.99),
        })
    })
}

pub fn grass_model() -> Dist<GrassModel> {
    raining().bind(|r| {
        sprinkler(&r).bind(move |s| {
            let r = r.clone();
            grass_wet(&s, &r).bind(move |g| {
                Dist::certainly(GrassModel {
                    rain: r.clone(),
                    sprinkler: s.clone(),
                    grass_wet: g,
                })
            })
        })
    })
}

pub fn is_raining() -> Predicate<GrassModel> {
    Rc::new(|m: Eff<GrassModel>| m.bind(|m| m.rain))
}

pub fn is_sprinkler_on() -> Predicate<GrassModel> {
    Rc::new(|m: Eff<GrassModel>| m.bind(|m| m.sprinkler))
}

pub fn is_grass_wet() -> Predicate<GrassModel> {
    Rc::new(|m: Eff<GrassModel>| m.bind(|m| m.grass_wet))
}

/// Queries on the grass model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrassQuery {
    Rain,
    Wet,
    RainAndWet,
    RainGivenWet,
}

impl GrassQuery {
    pub const ALL: [GrassQuery; 4] = [
        GrassQuery::Rain,
        GrassQuery::Wet,
        GrassQuery::RainAndWet,
        GrassQuery::RainGivenWet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GrassQuery::Rain => "rain",
            GrassQuery::Wet => "wet",
            GrassQuery::RainAndWet => "rain-and-wet",
            GrassQuery::RainGivenWet => "rain-given-wet",
        }
    }
}

impl std::str::FromStr for GrassQuery {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GrassQuery::ALL
            .into_iter()
            .find(|q| q.name() == s || (s == "cond-rain-given-wet" && *q == GrassQuery::RainGivenWet))
            .ok_or_else(|| format!("unknown grass query `{s}`"))
    }
}

pub fn grass_query(q: GrassQuery, config: &SearchConfig) -> Result<Probability, DistError> {
    grass_outcome(q, config).map(|o| o.probability)
}

/// Like [`grass_query`], with the statistics of every search involved.
pub fn grass_outcome(q: GrassQuery, config: &SearchConfig) -> Result<QueryOutcome, DistError> {
    match q {
        GrassQuery::Rain => Ok(query_with(move |m| is_raining()(m), grass_model(), config)?),
        GrassQuery::Wet => Ok(query_with(move |m| is_grass_wet()(m), grass_model(), config)?),
        GrassQuery::RainAndWet => Ok(query_with(all_of(vec![is_grass_wet(), is_raining()]), grass_model(), config)?),
        GrassQuery::RainGivenWet => {
            let joint = query_with(all_of(vec![is_raining(), is_grass_wet()]), grass_model(), config)?;
            let evidence = query_with(move |m| is_grass_wet()(m), grass_model(), config)?;
            if evidence.probability == 0.0 {
                return Err(DistError::ZeroDenominator);
            }
            Ok(QueryOutcome {
                probability: joint.probability / evidence.probability,
                stats: joint.stats.merge(evidence.stats),
            })
        }
    }
}

pub fn pick_char() -> Dist<char> {
    draw(vec!['a', 'b'])
}

/// A string of `n` independently drawn characters.
pub fn random_string(n: usize) -> Dist<LiftedList<char>> {
    replicate_dist(StrictnessMode::Lazy, n, &DistGenerator::new(pick_char))
}

pub fn is_palindrome(s: Eff<LiftedList<char>>) -> Eff<bool> {
    lifted::eq_list(&s, &lifted::reverse(&s))
}

/// Whether two `b`s follow each other somewhere in the string.
pub fn has_consecutive_bs(s: List<char>) -> Eff<bool> {
    s.bind(|l| match l {
        LiftedList::Nil => Eff::pure(false),
        LiftedList::Cons(c, rest) => c.bind(move |c| {
            if c != 'b' {
                return has_consecutive_bs(rest.clone());
            }
            let rest2 = rest.clone();
            rest.bind(move |r| match r {
                LiftedList::Nil => Eff::pure(false),
                LiftedList::Cons(c2, _) => {
                    let rest = rest2.clone();
                    c2.bind(move |c2| if c2 == 'b' { Eff::pure(true) } else { has_consecutive_bs(rest.clone()) })
                }
            })
        }),
    })
}

pub fn palindrome_probability(n: usize, config: &SearchConfig) -> Result<QueryOutcome, SearchError> {
    query_with(is_palindrome, random_string(n), config)
}

pub fn consecutive_bs_probability(n: usize, config: &SearchConfig) -> Result<QueryOutcome, SearchError> {
    query_with(has_consecutive_bs, random_string(n), config)
}

pub type Person = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub santa: Person,
    pub receiver: Person,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Game {
    Failed,
    Success(Vec<Assignment>),
}

/// How players who draw their own name are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SantaVariant {
    /// Draw blindly; the game fails if anyone drew themselves.
    Naive,
    /// Players never draw themselves; the game fails if a player is left
    /// with only their own name.
    NoSelfPick,
    /// A player who draws themselves draws once more and puts their own
    /// name back afterwards.
    PickAndCheck,
    /// A player who draws themselves puts the name back and redraws, at
    /// most `limit` redraws in total.
    Repeat { limit: u32 },
}

fn without(hat: &[Person], p: Person) -> Vec<Person> {
    let mut out = hat.to_vec();
    if let Some(i) = out.iter().position(|&q| q == p) {
        out.remove(i);
    }
    out
}

type Pick = Option<(Assignment, Vec<Person>)>;

/// `p` draws a name from `hat`; `None` if the hat is empty.
fn pick(p: Person, hat: Vec<Person>) -> Dist<Pick> {
    if hat.is_empty() {
        return Dist::certainly(None);
    }
    let hat = Rc::new(hat);
    draw(hat.to_vec()).map(move |q| {
        let hat = Rc::clone(&hat);
        q.map(move |q| {
            Some((
                Assignment {
                    santa: p,
                    receiver: q,
                },
                without(&hat, q),
            ))
        })
    })
}

fn extended(arrs: &[Assignment], a: Assignment) -> Vec<Assignment> {
    let mut out = arrs.to_vec();
    out.push(a);
    out
}

fn naive_round(players: Rc<[Person]>, i: usize, hat: Vec<Person>, arrs: Vec<Assignment>) -> Dist<Game> {
    let Some(&p) = players.get(i) else {
        return Dist::certainly(Game::Success(arrs));
    };
    pick(p, hat).bind(move |m| {
        let (players, arrs) = (Rc::clone(&players), arrs.clone());
        dist_case(&m, move |m| match m {
            Some((a, rest)) => naive_round(Rc::clone(&players), i + 1, rest, extended(&arrs, a)),
            None => Dist::fail(),
        })
    })
}

fn no_self_round(players: Rc<[Person]>, i: usize, hat: Vec<Person>, arrs: Vec<Assignment>) -> Dist<Game> {
    let Some(&p) = players.get(i) else {
        return Dist::certainly(Game::Success(arrs));
    };
    pick(p, without(&hat, p)).bind(move |m| {
        let (players, hat, arrs) = (Rc::clone(&players), hat.clone(), arrs.clone());
        dist_case(&m, move |m| match m {
            None => Dist::certainly(Game::Failed),
            Some((a, _)) => no_self_round(
                Rc::clone(&players),
                i + 1,
                without(&hat, a.receiver),
                extended(&arrs, a),
            ),
        })
    })
}

fn check_round(players: Rc<[Person]>, i: usize, hat: Vec<Person>, arrs: Vec<Assignment>) -> Dist<Game> {
    let Some(&p) = players.get(i) else {
        return Dist::certainly(Game::Success(arrs));
    };
    pick(p, hat).bind(move |m| {
        let (players, arrs) = (Rc::clone(&players), arrs.clone());
        dist_case(&m, move |m| match m {
            None => Dist::certainly(Game::Failed),
            Some((a, rest)) if a.receiver == p => {
                let (players, arrs) = (Rc::clone(&players), arrs.clone());
                pick(p, rest).bind(move |m2| {
                    let (players, arrs) = (Rc::clone(&players), arrs.clone());
                    dist_case(&m2, move |m2| match m2 {
                        None => Dist::certainly(Game::Failed),
                        Some((a2, rest2)) => {
                            let mut hat = vec![p];
                            hat.extend(rest2);
                            check_round(Rc::clone(&players), i + 1, hat, extended(&arrs, a2))
                        }
                    })
                })
            }
            Some((a, rest)) => check_round(Rc::clone(&players), i + 1, rest, extended(&arrs, a)),
        })
    })
}

fn repeat_round(
    limit: u32,
    players: Rc<[Person]>,
    i: usize,
    hat: Vec<Person>,
    arrs: Vec<Assignment>,
) -> Dist<Game> {
    let Some(&p) = players.get(i) else {
        return Dist::certainly(Game::Success(arrs));
    };
    if limit == 0 {
        return Dist::certainly(Game::Failed);
    }
    let hat_before = hat.clone();
    pick(p, hat).bind(move |m| {
        let (players, hat_before, arrs) = (Rc::clone(&players), hat_before.clone(), arrs.clone());
        dist_case(&m, move |m| match m {
            None => Dist::certainly(Game::Failed),
            Some((a, _)) if a.receiver == p => {
                repeat_round(limit - 1, Rc::clone(&players), i, hat_before.clone(), arrs.clone())
            }
            Some((a, rest)) => repeat_round(limit, Rc::clone(&players), i + 1, rest, extended(&arrs, a)),
        })
    })
}

fn has_self_assignment(g: &Game) -> bool {
    match g {
        Game::Failed => false,
        Game::Success(arrs) => arrs.iter().any(|a| a.santa == a.receiver),
    }
}

/// One Secret Santa drawing among players `1..=n`.
pub fn santa_game(variant: SantaVariant, n: u32) -> Dist<Game> {
    let players: Rc<[Person]> = (1..=n).collect();
    let hat = players.to_vec();
    match variant {
        SantaVariant::Naive => naive_round(players, 0, hat, Vec::new()).map(|g| {
            g.map(|g| if has_self_assignment(&g) { Game::Failed } else { g })
        }),
        SantaVariant::NoSelfPick => no_self_round(players, 0, hat, Vec::new()),
        SantaVariant::PickAndCheck => check_round(players, 0, hat, Vec::new()),
        SantaVariant::Repeat { limit } => repeat_round(limit, players, 0, hat, Vec::new()),
    }
}

pub fn is_failed_game(g: Eff<Game>) -> Eff<bool> {
    g.map(|g| g == Game::Failed)
}

/// Probability that the drawing fails.
pub fn santa_failure(variant: SantaVariant, n: u32, config: &SearchConfig) -> Result<QueryOutcome, SearchError> {
    query_with(is_failed_game, santa_game(variant, n), config)
}
