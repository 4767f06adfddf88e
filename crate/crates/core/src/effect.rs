//! Lazily evaluated effect trees.
//!
//! An [`Eff`] is a memoized suspension of a tree node. A node is either a
//! pure value or an effect operation ([`Op`]) whose children are again
//! suspensions. Nothing below a node is evaluated until a consumer forces
//! it, and every suspension is evaluated at most once, so a handle that is
//! cloned and used in several places is shared.
//!
//! Choice nodes carry a [`ChoiceLabel`] drawn when the node is created.
//! Reusing a handle reuses its labels, which is what gives call-time choice
//! once the traversal in [`crate::search`] keeps its decisions consistent.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::panic::{self, AssertUnwindSafe};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

const RED_ZONE: usize = 128 * 1024;
const STACK_GROWTH: usize = 4 * 1024 * 1024;

/// Errors raised while forcing suspensions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("evaluation budget of {cap} forced nodes exhausted")]
    DepthCapExceeded { cap: u64 },
    #[error("{context}: the effect signature has no failure shape")]
    NoFailureShape { context: String },
    #[error("suspension demanded its own value while being evaluated")]
    CyclicSuspension,
    #[error("suspension was abandoned by an earlier aborted evaluation")]
    SpentSuspension,
}

pub(crate) fn raise(err: EvalError) -> ! {
    panic::resume_unwind(Box::new(err))
}

#[derive(Clone, Copy)]
struct Budget {
    active: bool,
    cap: u64,
    remaining: u64,
}

thread_local! {
    static BUDGET: Cell<Budget> = const {
        Cell::new(Budget { active: false, cap: 0, remaining: 0 })
    };
}

fn charge() {
    BUDGET.with(|b| {
        let mut cur = b.get();
        if !cur.active {
            return;
        }
        if cur.remaining == 0 {
            raise(EvalError::DepthCapExceeded { cap: cur.cap });
        }
        cur.remaining -= 1;
        b.set(cur);
    })
}

/// Runs `f` with at most `cap` suspension evaluations on this thread.
///
/// Evaluation errors raised inside `f` are returned as `Err`; any other
/// panic is propagated unchanged. Suspensions that were mid-evaluation when
/// an error surfaced become spent and report [`EvalError::SpentSuspension`]
/// if forced again.
pub fn with_budget<R>(cap: u64, f: impl FnOnce() -> R) -> Result<R, EvalError> {
    let saved = BUDGET.with(|b| {
        b.replace(Budget {
            active: true,
            cap,
            remaining: cap,
        })
    });
    let outcome = panic::catch_unwind(AssertUnwindSafe(f));
    BUDGET.with(|b| b.set(saved));
    match outcome {
        Ok(r) => Ok(r),
        Err(payload) => match payload.downcast::<EvalError>() {
            Ok(err) => Err(*err),
            Err(other) => panic::resume_unwind(other),
        },
    }
}

enum Slot<T> {
    Delayed(Box<dyn FnOnce() -> T>),
    Forcing,
    Forced(T),
    Spent,
}

/// A memoized lazy cell: the producer runs at most once.
pub struct Suspension<T>(Rc<RefCell<Slot<T>>>);

impl<T> Clone for Suspension<T> {
    fn clone(&self) -> Self {
        Suspension(Rc::clone(&self.0))
    }
}

struct SpendOnUnwind<'a, T>(&'a RefCell<Slot<T>>);

impl<T> Drop for SpendOnUnwind<'_, T> {
    fn drop(&mut self) {
        let mut slot = self.0.borrow_mut();
        if matches!(*slot, Slot::Forcing) {
            *slot = Slot::Spent;
        }
    }
}

impl<T: Clone + 'static> Suspension<T> {
    pub fn new(producer: impl FnOnce() -> T + 'static) -> Self {
        Suspension(Rc::new(RefCell::new(Slot::Delayed(Box::new(producer)))))
    }

    pub fn ready(value: T) -> Self {
        Suspension(Rc::new(RefCell::new(Slot::Forced(value))))
    }

    pub fn is_forced(&self) -> bool {
        matches!(*self.0.borrow(), Slot::Forced(_))
    }

    /// The value if it has already been computed, without forcing.
    pub fn peek(&self) -> Option<T> {
        match &*self.0.borrow() {
            Slot::Forced(v) => Some(v.clone()),
            _ => None,
        }
    }

    pub fn force(&self) -> T {
        match &*self.0.borrow() {
            Slot::Forced(v) => return v.clone(),
            Slot::Forcing => raise(EvalError::CyclicSuspension),
            Slot::Spent => raise(EvalError::SpentSuspension),
            Slot::Delayed(_) => {}
        }
        charge();
        let producer = match std::mem::replace(&mut *self.0.borrow_mut(), Slot::Forcing) {
            Slot::Delayed(p) => p,
            _ => unreachable!("slot state changed between checks"),
        };
        let guard = SpendOnUnwind(&self.0);
        let value = stacker::maybe_grow(RED_ZONE, STACK_GROWTH, producer);
        *self.0.borrow_mut() = Slot::Forced(value.clone());
        drop(guard);
        value
    }

    pub fn same(a: &Self, b: &Self) -> bool {
        Rc::ptr_eq(&a.0, &b.0)
    }
}

/// Whether a computation only evaluates what its consumer demands or
/// first runs every effect in sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrictnessMode {
    #[default]
    Lazy,
    Strict,
}

impl std::str::FromStr for StrictnessMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lazy" => Ok(StrictnessMode::Lazy),
            "strict" => Ok(StrictnessMode::Strict),
            other => Err(format!("unknown mode `{other}` (expected lazy or strict)")),
        }
    }
}

impl fmt::Display for StrictnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrictnessMode::Lazy => "lazy",
            StrictnessMode::Strict => "strict",
        })
    }
}

/// Effect signatures: which operations a tree may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    /// No operations; trees are plain values.
    Zero,
    /// One nullary operation (partiality).
    One,
    /// Nullary operations carrying an error payload.
    Const,
    /// Nullary failure and binary labeled choice.
    Nd,
}

/// Operation shapes across all supported signatures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Fail,
    Choice,
    Undefined,
    Raise,
}

impl Shape {
    pub fn arity(self) -> usize {
        match self {
            Shape::Choice => 2,
            Shape::Fail | Shape::Undefined | Shape::Raise => 0,
        }
    }

    pub fn signature(self) -> Signature {
        match self {
            Shape::Fail | Shape::Choice => Signature::Nd,
            Shape::Undefined => Signature::One,
            Shape::Raise => Signature::Const,
        }
    }
}

impl Signature {
    pub fn shapes(self) -> &'static [Shape] {
        match self {
            Signature::Zero => &[],
            Signature::One => &[Shape::Undefined],
            Signature::Const => &[Shape::Raise],
            Signature::Nd => &[Shape::Fail, Shape::Choice],
        }
    }

    pub fn contains(self, shape: Shape) -> bool {
        self.shapes().contains(&shape)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Signature::Zero => "zero",
            Signature::One => "one",
            Signature::Const => "const",
            Signature::Nd => "nd",
        };
        f.write_str(name)
    }
}

static NEXT_LABEL: AtomicU64 = AtomicU64::new(1);

/// Display-only description of what a choice decides, e.g. `3 <= 1`.
/// It is rendered on request, so operands evaluated in the meantime show
/// their values.
#[derive(Clone)]
pub struct Annotation(Rc<dyn Fn() -> String>);

impl Annotation {
    pub fn text(s: impl Into<String>) -> Self {
        let s = s.into();
        Annotation(Rc::new(move || s.clone()))
    }

    /// `left relation right`; an operand not yet evaluated to a pure value
    /// shows as `?`.
    pub fn relation<A, B>(left: &Eff<A>, relation: &'static str, right: &Eff<B>) -> Self
    where
        A: fmt::Display + Clone + 'static,
        B: fmt::Display + Clone + 'static,
    {
        let (l, r) = (left.clone(), right.clone());
        Annotation(Rc::new(move || {
            format!("{} {relation} {}", describe(&l), describe(&r))
        }))
    }

    pub fn describe(&self) -> String {
        (self.0)()
    }
}

fn describe<V: fmt::Display + Clone + 'static>(e: &Eff<V>) -> String {
    e.peek_pure().map_or_else(|| "?".to_string(), |v| v.to_string())
}

/// Identity of a choice. Equality and hashing use only the id.
#[derive(Clone)]
pub struct ChoiceLabel {
    id: u64,
    annotation: Option<Annotation>,
}

impl ChoiceLabel {
    pub fn fresh() -> Self {
        ChoiceLabel {
            id: NEXT_LABEL.fetch_add(1, Ordering::Relaxed),
            annotation: None,
        }
    }

    pub fn annotated(annotation: Annotation) -> Self {
        ChoiceLabel {
            annotation: Some(annotation),
            ..ChoiceLabel::fresh()
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn annotation(&self) -> Option<&Annotation> {
        self.annotation.as_ref()
    }
}

impl PartialEq for ChoiceLabel {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for ChoiceLabel {}

impl Hash for ChoiceLabel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl fmt::Debug for ChoiceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.id)
    }
}

/// An effect operation together with its (suspended) children.
pub enum Op<V> {
    Fail,
    Choice(ChoiceLabel, Eff<V>, Eff<V>),
    Undefined,
    Raise(Rc<str>),
}

impl<V: Clone + 'static> Op<V> {
    pub fn shape(&self) -> Shape {
        match self {
            Op::Fail => Shape::Fail,
            Op::Choice(..) => Shape::Choice,
            Op::Undefined => Shape::Undefined,
            Op::Raise(_) => Shape::Raise,
        }
    }

    pub fn children(&self) -> Vec<&Eff<V>> {
        match self {
            Op::Choice(_, l, r) => vec![l, r],
            _ => Vec::new(),
        }
    }

    /// Same operation and label, children replaced by `f(child)`.
    pub fn map_children<W>(&self, mut f: impl FnMut(&Eff<V>) -> Eff<W>) -> Op<W> {
        match self {
            Op::Fail => Op::Fail,
            Op::Choice(label, l, r) => Op::Choice(label.clone(), f(l), f(r)),
            Op::Undefined => Op::Undefined,
            Op::Raise(msg) => Op::Raise(Rc::clone(msg)),
        }
    }
}

/// A forced tree node.
pub enum Node<V> {
    Pure(V),
    Impure(Op<V>),
}

/// A lazily evaluated, memoized effect tree producing values of type `V`.
pub struct Eff<V>(Suspension<Rc<Node<V>>>);

impl<V> Clone for Eff<V> {
    fn clone(&self) -> Self {
        Eff(self.0.clone())
    }
}

impl<V: Clone + 'static> Eff<V> {
    pub fn pure(v: V) -> Self {
        Eff(Suspension::ready(Rc::new(Node::Pure(v))))
    }

    pub fn from_op(op: Op<V>) -> Self {
        Eff(Suspension::ready(Rc::new(Node::Impure(op))))
    }

    /// Defers building a tree until it is demanded.
    pub fn delay(f: impl FnOnce() -> Eff<V> + 'static) -> Self {
        Eff(Suspension::new(move || f().force()))
    }

    pub fn fail() -> Self {
        Eff::from_op(Op::Fail)
    }

    pub fn undefined() -> Self {
        Eff::from_op(Op::Undefined)
    }

    pub fn raise(msg: impl Into<Rc<str>>) -> Self {
        Eff::from_op(Op::Raise(msg.into()))
    }

    /// Binary choice with a fresh label.
    pub fn choose(l: Eff<V>, r: Eff<V>) -> Self {
        Eff::choose_labeled(ChoiceLabel::fresh(), l, r)
    }

    pub fn choose_labeled(label: ChoiceLabel, l: Eff<V>, r: Eff<V>) -> Self {
        Eff::from_op(Op::Choice(label, l, r))
    }

    pub fn choose_annotated(annotation: Annotation, l: Eff<V>, r: Eff<V>) -> Self {
        Eff::choose_labeled(ChoiceLabel::annotated(annotation), l, r)
    }

    /// Right-nested choice over all values, ending in failure.
    pub fn any_of(values: impl IntoIterator<Item = V>) -> Self {
        let values: Vec<V> = values.into_iter().collect();
        values
            .into_iter()
            .rev()
            .fold(Eff::fail(), |acc, v| Eff::choose(Eff::pure(v), acc))
    }

    /// The failure of `signature`, used when a partial function has no
    /// answer. Forcing it under [`Signature::Zero`] raises
    /// [`EvalError::NoFailureShape`].
    pub fn failure(signature: Signature, context: &str) -> Self {
        match signature {
            Signature::Nd => Eff::fail(),
            Signature::One => Eff::undefined(),
            Signature::Const => Eff::raise(context),
            Signature::Zero => {
                let context = context.to_string();
                Eff::delay(move || raise(EvalError::NoFailureShape { context }))
            }
        }
    }

    /// Evaluates to head normal form.
    pub fn force(&self) -> Rc<Node<V>> {
        self.0.force()
    }

    pub fn is_evaluated(&self) -> bool {
        self.0.is_forced()
    }

    /// The value, if this tree is already evaluated to a pure node.
    pub fn peek_pure(&self) -> Option<V> {
        match &*self.0.peek()? {
            Node::Pure(v) => Some(v.clone()),
            Node::Impure(_) => None,
        }
    }

    /// Monadic bind. Operations are kept in place and `f` is pushed into
    /// every child lazily, so no child is forced by binding.
    pub fn bind<W: Clone + 'static>(&self, f: impl Fn(V) -> Eff<W> + 'static) -> Eff<W> {
        bind_rc(self.clone(), Rc::new(f))
    }

    pub fn map<W: Clone + 'static>(&self, f: impl Fn(V) -> W + 'static) -> Eff<W> {
        self.bind(move |v| Eff::pure(f(v)))
    }

    /// Memoizing wrapper; all uses of the result see the same evaluation.
    pub fn share(&self) -> Eff<V> {
        let inner = self.clone();
        Eff::delay(move || inner)
    }

    pub fn same_handle(a: &Eff<V>, b: &Eff<V>) -> bool {
        Suspension::same(&a.0, &b.0)
    }
}

fn bind_rc<V: Clone + 'static, W: Clone + 'static>(
    e: Eff<V>,
    f: Rc<dyn Fn(V) -> Eff<W>>,
) -> Eff<W> {
    Eff(Suspension::new(move || match &*e.force() {
        Node::Pure(v) => f(v.clone()).force(),
        Node::Impure(op) => Rc::new(Node::Impure(
            op.map_children(|c| bind_rc(c.clone(), Rc::clone(&f))),
        )),
    }))
}

/// Applies a pure function under the effect.
pub fn lift1<A: Clone + 'static, B: Clone + 'static>(
    f: impl Fn(A) -> B + 'static,
    e: &Eff<A>,
) -> Eff<B> {
    e.map(f)
}

/// Applies a pure binary function; `e1` is forced before `e2`.
pub fn lift2<A, B, C>(f: impl Fn(A, B) -> C + 'static, e1: &Eff<A>, e2: &Eff<B>) -> Eff<C>
where
    A: Clone + 'static,
    B: Clone + 'static,
    C: Clone + 'static,
{
    let f = Rc::new(f);
    let e2 = e2.clone();
    e1.bind(move |a| {
        let f = Rc::clone(&f);
        e2.map(move |b| f(a.clone(), b))
    })
}
