//! Data structures whose components are effect trees.
//!
//! A [`LiftedList`] holds a suspended head and a suspended tail, so list
//! operations only evaluate as much of a list as their result demands.

use std::rc::Rc;

use crate::effect::{Eff, Signature};

pub enum LiftedList<V> {
    Nil,
    Cons(Eff<V>, Eff<LiftedList<V>>),
}

impl<V> Clone for LiftedList<V> {
    fn clone(&self) -> Self {
        match self {
            LiftedList::Nil => LiftedList::Nil,
            LiftedList::Cons(h, t) => LiftedList::Cons(h.clone(), t.clone()),
        }
    }
}

/// An effectful lifted list.
pub type List<V> = Eff<LiftedList<V>>;

/// A pair whose components are evaluated independently.
pub type LPair<A, B> = (Eff<A>, Eff<B>);

pub fn nil<V: Clone + 'static>() -> List<V> {
    Eff::pure(LiftedList::Nil)
}

pub fn cons<V: Clone + 'static>(head: Eff<V>, tail: List<V>) -> List<V> {
    Eff::pure(LiftedList::Cons(head, tail))
}

pub fn from_host<V: Clone + 'static>(xs: impl IntoIterator<Item = V>) -> List<V> {
    let xs: Vec<V> = xs.into_iter().collect();
    xs.into_iter()
        .rev()
        .fold(nil(), |acc, x| cons(Eff::pure(x), acc))
}

/// Head of a list; an empty list yields the failure of `signature`.
pub fn head_in<V: Clone + 'static>(signature: Signature, xs: &List<V>) -> Eff<V> {
    xs.bind(move |l| match l {
        LiftedList::Nil => Eff::failure(signature, "head of an empty list"),
        LiftedList::Cons(h, _) => h,
    })
}

pub fn head<V: Clone + 'static>(xs: &List<V>) -> Eff<V> {
    head_in(Signature::Nd, xs)
}

pub fn tail_in<V: Clone + 'static>(signature: Signature, xs: &List<V>) -> List<V> {
    xs.bind(move |l| match l {
        LiftedList::Nil => Eff::failure(signature, "tail of an empty list"),
        LiftedList::Cons(_, t) => t,
    })
}

pub fn tail<V: Clone + 'static>(xs: &List<V>) -> List<V> {
    tail_in(Signature::Nd, xs)
}

pub fn null<V: Clone + 'static>(xs: &List<V>) -> Eff<bool> {
    xs.map(|l| matches!(l, LiftedList::Nil))
}

pub fn append<V: Clone + 'static>(xs: &List<V>, ys: &List<V>) -> List<V> {
    let ys = ys.clone();
    xs.bind(move |l| match l {
        LiftedList::Nil => ys.clone(),
        LiftedList::Cons(h, t) => cons(h, append(&t, &ys)),
    })
}

/// Forces the spine only.
pub fn length<V: Clone + 'static>(xs: &List<V>) -> Eff<usize> {
    xs.bind(|l| match l {
        LiftedList::Nil => Eff::pure(0),
        LiftedList::Cons(_, t) => length(&t).map(|n| n + 1),
    })
}

/// Normal form: forces every element and the spine, head first.
pub fn nf<V: Clone + 'static>(xs: &List<V>) -> Eff<Vec<V>> {
    xs.bind(|l| match l {
        LiftedList::Nil => Eff::pure(Vec::new()),
        LiftedList::Cons(h, t) => h.bind(move |x| {
            nf(&t).map(move |rest| {
                let mut out = Vec::with_capacity(rest.len() + 1);
                out.push(x.clone());
                out.extend(rest);
                out
            })
        }),
    })
}

pub fn nf_pair<A: Clone + 'static, B: Clone + 'static>(p: &Eff<LPair<A, B>>) -> Eff<(A, B)> {
    p.bind(|(a, b)| {
        let b = b.clone();
        a.bind(move |x| b.map(move |y| (x.clone(), y)))
    })
}

pub fn pair<A: Clone + 'static, B: Clone + 'static>(a: Eff<A>, b: Eff<B>) -> Eff<LPair<A, B>> {
    Eff::pure((a, b))
}

pub fn fst<A: Clone + 'static, B: Clone + 'static>(p: &Eff<LPair<A, B>>) -> Eff<A> {
    p.bind(|(a, _)| a)
}

pub fn snd<A: Clone + 'static, B: Clone + 'static>(p: &Eff<LPair<A, B>>) -> Eff<B> {
    p.bind(|(_, b)| b)
}

/// Inserts `x` at every position of the list, one choice per position.
pub fn insert_nd<V: Clone + 'static>(x: &Eff<V>, xs: &List<V>) -> List<V> {
    let x = x.clone();
    xs.bind(move |l| match l {
        LiftedList::Nil => cons(x.clone(), nil()),
        LiftedList::Cons(y, ys) => {
            let here = cons(x.clone(), cons(y.clone(), ys.clone()));
            let later = cons(y, insert_nd(&x, &ys));
            Eff::choose(here, later)
        }
    })
}

/// Keeps the elements satisfying `p`; the rest of the list is filtered
/// only on demand.
pub fn filter_nd<V: Clone + 'static>(p: impl Fn(Eff<V>) -> Eff<bool> + 'static, xs: &List<V>) -> List<V> {
    filter_rc(Rc::new(p), xs)
}

fn filter_rc<V: Clone + 'static>(p: Rc<dyn Fn(Eff<V>) -> Eff<bool>>, xs: &List<V>) -> List<V> {
    xs.bind(move |l| match l {
        LiftedList::Nil => nil(),
        LiftedList::Cons(y, ys) => {
            let p2 = Rc::clone(&p);
            let y2 = y.clone();
            p(y).bind(move |keep| {
                let rest = filter_rc(Rc::clone(&p2), &ys);
                if keep {
                    cons(y2.clone(), rest)
                } else {
                    rest
                }
            })
        }
    })
}

/// Reverses the spine without forcing any element.
pub fn reverse<V: Clone + 'static>(xs: &List<V>) -> List<V> {
    reverse_onto(xs, nil())
}

fn reverse_onto<V: Clone + 'static>(xs: &List<V>, acc: List<V>) -> List<V> {
    xs.bind(move |l| match l {
        LiftedList::Nil => acc.clone(),
        LiftedList::Cons(h, t) => reverse_onto(&t, cons(h, acc.clone())),
    })
}

pub fn not(b: &Eff<bool>) -> Eff<bool> {
    b.map(|v| !v)
}

/// Lazy conjunction: `b` is forced only when `a` is true.
pub fn and(a: &Eff<bool>, b: &Eff<bool>) -> Eff<bool> {
    let b = b.clone();
    a.bind(move |v| if v { b.clone() } else { Eff::pure(false) })
}

/// Lazy disjunction: `b` is forced only when `a` is false.
pub fn or(a: &Eff<bool>, b: &Eff<bool>) -> Eff<bool> {
    let b = b.clone();
    a.bind(move |v| if v { Eff::pure(true) } else { b.clone() })
}

/// Whether every element satisfies `p`, stopping at the first that does not.
pub fn all<V: Clone + 'static>(p: impl Fn(Eff<V>) -> Eff<bool> + 'static, xs: &List<V>) -> Eff<bool> {
    all_rc(Rc::new(p), xs)
}

fn all_rc<V: Clone + 'static>(p: Rc<dyn Fn(Eff<V>) -> Eff<bool>>, xs: &List<V>) -> Eff<bool> {
    xs.bind(move |l| match l {
        LiftedList::Nil => Eff::pure(true),
        LiftedList::Cons(h, t) => {
            let rest = {
                let p = Rc::clone(&p);
                Eff::delay(move || all_rc(p, &t))
            };
            and(&p(h), &rest)
        }
    })
}

pub fn any<V: Clone + 'static>(p: impl Fn(Eff<V>) -> Eff<bool> + 'static, xs: &List<V>) -> Eff<bool> {
    let p = Rc::new(p);
    not(&all(move |x| not(&p(x)), xs))
}

/// Element-wise equality, comparing front to back and stopping at the
/// first mismatch.
pub fn eq_list<V: Clone + PartialEq + 'static>(xs: &List<V>, ys: &List<V>) -> Eff<bool> {
    let ys = ys.clone();
    xs.bind(move |l| {
        let l = l.clone();
        ys.bind(move |r| match (&l, r) {
            (LiftedList::Nil, LiftedList::Nil) => Eff::pure(true),
            (LiftedList::Cons(x, xs), LiftedList::Cons(y, ys)) => {
                let same = crate::effect::lift2(|a: V, b: V| a == b, x, &y);
                let xs = xs.clone();
                and(&same, &Eff::delay(move || eq_list(&xs, &ys)))
            }
            _ => Eff::pure(false),
        })
    })
}

#[cfg(test)]
mod tests {
    use std::cell::Cell;

    use super::*;
    use crate::search::all_values;

    fn probe<V: Clone + 'static>(value: Eff<V>, hit: &Rc<Cell<bool>>) -> Eff<V> {
        let hit = Rc::clone(hit);
        Eff::delay(move || {
            hit.set(true);
            value
        })
    }

    #[test]
    fn lifted_list_with_choices() {
        let h = Eff::choose(Eff::pure(1), Eff::pure(2));
        let t = Eff::choose(nil(), from_host([3]));
        let xs = cons(h, t);
        assert_eq!(
            all_values(&nf(&xs)).unwrap(),
            vec![vec![1], vec![1, 3], vec![2], vec![2, 3]]
        );
    }

    #[test]
    fn head_of_append_ignores_the_rest() {
        let hit = Rc::new(Cell::new(false));
        let rest: List<i64> = probe(Eff::raise("undefined"), &hit);
        let xs = append(&from_host([1]), &rest);
        assert_eq!(all_values(&head(&xs)).unwrap(), vec![1]);
        assert!(!hit.get());
    }

    #[test]
    fn insert_everywhere() {
        let xs = insert_nd(&Eff::pure(1), &from_host([2, 3, 4, 5]));
        assert_eq!(
            all_values(&nf(&xs)).unwrap(),
            vec![
                vec![1, 2, 3, 4, 5],
                vec![2, 1, 3, 4, 5],
                vec![2, 3, 1, 4, 5],
                vec![2, 3, 4, 1, 5],
                vec![2, 3, 4, 5, 1],
            ]
        );
    }

    #[test]
    fn length_does_not_force_elements() {
        let hit = Rc::new(Cell::new(false));
        let xs = cons(probe(Eff::pure(1), &hit), from_host([2, 3]));
        assert_eq!(all_values(&length(&xs)).unwrap(), vec![3]);
        assert!(!hit.get());
    }

    #[test]
    fn reverse_and_equality() {
        let xs = from_host([1, 2, 3]);
        assert_eq!(all_values(&nf(&reverse(&xs))).unwrap(), vec![vec![3, 2, 1]]);
        assert_eq!(all_values(&eq_list(&xs, &reverse(&xs))).unwrap(), vec![false]);
        let p = from_host([1, 2, 1]);
        assert_eq!(all_values(&eq_list(&p, &reverse(&p))).unwrap(), vec![true]);
    }

    #[test]
    fn conjunction_is_lazy() {
        let hit = Rc::new(Cell::new(false));
        let b = and(&Eff::pure(false), &probe(Eff::pure(true), &hit));
        assert_eq!(all_values(&b).unwrap(), vec![false]);
        assert!(!hit.get());
    }

    #[test]
    fn tail_of_empty_list_per_signature() {
        let e: List<i64> = nil();
        assert!(all_values(&nf(&tail_in(Signature::Nd, &e))).unwrap().is_empty());
        assert!(all_values(&nf(&tail_in(Signature::One, &e))).unwrap().is_empty());
        assert!(all_values(&nf(&tail_in(Signature::Zero, &e))).is_err());
    }
}
