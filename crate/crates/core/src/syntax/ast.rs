use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::meadow::Rational;

/// Name of the distinguished action `ι` that pre-abstraction renames to.
pub const IOTA: &str = "iota";

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(String);

impl Action {
    /// Panics when `name` is not a valid identifier; use [`Action::try_new`]
    /// for untrusted input.
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(is_identifier(&name), "invalid action name `{name}`");
        Action(name)
    }

    pub fn try_new(name: impl Into<String>) -> Option<Self> {
        let name = name.into();
        is_identifier(&name).then_some(Action(name))
    }

    pub fn iota() -> Self {
        Action(IOTA.to_string())
    }

    pub fn is_iota(&self) -> bool {
        self.0 == IOTA
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

pub type ActionSet = BTreeSet<Action>;

/// The finite set of actions an analysis ranges over. Always contains `iota`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionUniverse(ActionSet);

impl ActionUniverse {
    pub fn new(actions: impl IntoIterator<Item = Action>) -> Self {
        let mut set: ActionSet = actions.into_iter().collect();
        set.insert(Action::iota());
        ActionUniverse(set)
    }

    pub fn of(term: &Tuplix) -> Self {
        ActionUniverse(actions_of(term))
    }

    pub fn extend(&mut self, actions: impl IntoIterator<Item = Action>) {
        self.0.extend(actions);
    }

    pub fn contains(&self, a: &Action) -> bool {
        self.0.contains(a)
    }

    pub fn actions(&self) -> &ActionSet {
        &self.0
    }
}

/// Terms of sort Quantity.
///
/// Subtraction, division, natural powers, `max` and `min` have no node of
/// their own; the parser expands them into the meadow signature and the
/// printer folds the expansions back.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Quantity {
    Zero,
    One,
    /// Numeral `n >= 2`. `0` and `1` are always [`Quantity::Zero`] and [`Quantity::One`].
    Num(BigUint),
    Var(String),
    Add(Box<Quantity>, Box<Quantity>),
    Mul(Box<Quantity>, Box<Quantity>),
    Neg(Box<Quantity>),
    Inv(Box<Quantity>),
    Sign(Box<Quantity>),
    ICap(Box<Quantity>, Box<Tuplix>),
}

/// Terms of sort Tuplix. There are no tuplix variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Tuplix {
    Empty,
    Block,
    Transfer(Action, Quantity),
    ZeroTest(Quantity),
    Conj(Box<Tuplix>, Box<Tuplix>),
    Delay(Box<Tuplix>),
    PreAbstr(ActionSet, Box<Tuplix>),
    IntEncap(ActionSet, Quantity, Box<Tuplix>),
}

// Smart constructors named after the node they build, not operator methods.
#[allow(clippy::should_implement_trait)]
impl Quantity {
    pub fn var(name: impl Into<String>) -> Self {
        Quantity::Var(name.into())
    }

    /// A natural numeral in normal form.
    pub fn nat(n: impl Into<BigUint>) -> Self {
        let n = n.into();
        if n.is_zero() {
            Quantity::Zero
        } else if n.is_one() {
            Quantity::One
        } else {
            Quantity::Num(n)
        }
    }

    /// The term denoting the rational `r`: `n`, `n/d`, `-n` or `-(n/d)`.
    pub fn literal(r: &Rational) -> Self {
        let magnitude = r.abs();
        let numer = Quantity::nat(magnitude.numer().magnitude().clone());
        let body = if magnitude.is_integer() {
            numer
        } else {
            Quantity::div(numer, Quantity::nat(magnitude.denom().magnitude().clone()))
        };
        if r.is_negative() {
            Quantity::neg(body)
        } else {
            body
        }
    }

    pub fn add(a: Quantity, b: Quantity) -> Self {
        Quantity::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Quantity, b: Quantity) -> Self {
        Quantity::Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Quantity) -> Self {
        Quantity::Neg(Box::new(a))
    }

    pub fn inv(a: Quantity) -> Self {
        Quantity::Inv(Box::new(a))
    }

    pub fn sign(a: Quantity) -> Self {
        Quantity::Sign(Box::new(a))
    }

    /// `a - b`, i.e. `a + (-b)`.
    pub fn sub(a: Quantity, b: Quantity) -> Self {
        Quantity::add(a, Quantity::neg(b))
    }

    /// `a / b`, i.e. `a * inv(b)`.
    pub fn div(a: Quantity, b: Quantity) -> Self {
        Quantity::mul(a, Quantity::inv(b))
    }

    /// `p^0 = 1`, `p^(n+1) = p^n * p`, with `p^1` written as `p` itself.
    pub fn pow(base: Quantity, n: u32) -> Self {
        match n {
            0 => Quantity::One,
            _ => {
                let mut acc = base.clone();
                for _ in 1..n {
                    acc = Quantity::mul(acc, base.clone());
                }
                acc
            }
        }
    }

    /// `max(u, v) = (sign(u - v) + 1)/2 * (u - v) + v`.
    pub fn max(u: Quantity, v: Quantity) -> Self {
        let diff = Quantity::sub(u, v.clone());
        let weight = Quantity::div(
            Quantity::add(Quantity::sign(diff.clone()), Quantity::One),
            Quantity::nat(2u32),
        );
        Quantity::add(Quantity::mul(weight, diff), v)
    }

    /// `min(u, v) = -max(-u, -v)`.
    pub fn min(u: Quantity, v: Quantity) -> Self {
        Quantity::neg(Quantity::max(Quantity::neg(u), Quantity::neg(v)))
    }

    pub fn icap(rate: Quantity, body: Tuplix) -> Self {
        Quantity::ICap(Box::new(rate), Box::new(body))
    }

    /// Free quantity variables, including those inside implicit-capital bodies.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Quantity::Zero | Quantity::One | Quantity::Num(_) => {}
            Quantity::Var(v) => {
                out.insert(v.clone());
            }
            Quantity::Add(a, b) | Quantity::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Quantity::Neg(a) | Quantity::Inv(a) | Quantity::Sign(a) => a.collect_vars(out),
            Quantity::ICap(r, t) => {
                r.collect_vars(out);
                t.collect_vars(out);
            }
        }
    }

    pub(crate) fn collect_actions(&self, out: &mut ActionSet) {
        match self {
            Quantity::Zero | Quantity::One | Quantity::Num(_) | Quantity::Var(_) => {}
            Quantity::Add(a, b) | Quantity::Mul(a, b) => {
                a.collect_actions(out);
                b.collect_actions(out);
            }
            Quantity::Neg(a) | Quantity::Inv(a) | Quantity::Sign(a) => a.collect_actions(out),
            Quantity::ICap(r, t) => {
                r.collect_actions(out);
                t.collect_actions(out);
            }
        }
    }
}

impl Tuplix {
    pub fn transfer(a: Action, q: Quantity) -> Self {
        Tuplix::Transfer(a, q)
    }

    pub fn test(q: Quantity) -> Self {
        Tuplix::ZeroTest(q)
    }

    pub fn conj(a: Tuplix, b: Tuplix) -> Self {
        Tuplix::Conj(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction of all parts; `eps` when there are none.
    pub fn conj_all(parts: impl IntoIterator<Item = Tuplix>) -> Self {
        parts
            .into_iter()
            .reduce(Tuplix::conj)
            .unwrap_or(Tuplix::Empty)
    }

    pub fn delay(t: Tuplix) -> Self {
        Tuplix::Delay(Box::new(t))
    }

    pub fn delay_n(t: Tuplix, n: u32) -> Self {
        (0..n).fold(t, |acc, _| Tuplix::delay(acc))
    }

    pub fn pabstr(i: impl IntoIterator<Item = Action>, t: Tuplix) -> Self {
        Tuplix::PreAbstr(i.into_iter().collect(), Box::new(t))
    }

    pub fn iencap(h: impl IntoIterator<Item = Action>, rate: Quantity, t: Tuplix) -> Self {
        Tuplix::IntEncap(h.into_iter().collect(), rate, Box::new(t))
    }

    /// Plain encapsulation: interest-counting encapsulation at rate 0.
    pub fn encap(h: impl IntoIterator<Item = Action>, t: Tuplix) -> Self {
        Tuplix::iencap(h, Quantity::Zero, t)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Tuplix::Empty | Tuplix::Block => {}
            Tuplix::Transfer(_, q) | Tuplix::ZeroTest(q) => q.collect_vars(out),
            Tuplix::Conj(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Tuplix::Delay(t) | Tuplix::PreAbstr(_, t) => t.collect_vars(out),
            Tuplix::IntEncap(_, r, t) => {
                r.collect_vars(out);
                t.collect_vars(out);
            }
        }
    }

    fn collect_actions(&self, out: &mut ActionSet) {
        match self {
            Tuplix::Empty | Tuplix::Block => {}
            Tuplix::Transfer(a, q) => {
                out.insert(a.clone());
                q.collect_actions(out);
            }
            Tuplix::ZeroTest(q) => q.collect_actions(out),
            Tuplix::Conj(a, b) => {
                a.collect_actions(out);
                b.collect_actions(out);
            }
            Tuplix::Delay(t) => t.collect_actions(out),
            Tuplix::PreAbstr(i, t) => {
                out.extend(i.iter().cloned());
                t.collect_actions(out);
            }
            Tuplix::IntEncap(h, r, t) => {
                out.extend(h.iter().cloned());
                r.collect_actions(out);
                t.collect_actions(out);
            }
        }
    }
}

/// Every action named in `t` (transfers and action sets, including those
/// inside implicit-capital bodies), plus `iota`.
pub fn actions_of(t: &Tuplix) -> ActionSet {
    let mut out = ActionSet::new();
    out.insert(Action::iota());
    t.collect_actions(&mut out);
    out
}

/// Greatest nesting depth of `delay` in `t`.
pub fn delay_depth(t: &Tuplix) -> usize {
    match t {
        Tuplix::Empty | Tuplix::Block | Tuplix::Transfer(..) | Tuplix::ZeroTest(_) => 0,
        Tuplix::Conj(a, b) => delay_depth(a).max(delay_depth(b)),
        Tuplix::Delay(t) => 1 + delay_depth(t),
        Tuplix::PreAbstr(_, t) | Tuplix::IntEncap(_, _, t) => delay_depth(t),
    }
}

impl fmt::Debug for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", super::print_quantity(self))
    }
}

impl fmt::Debug for Tuplix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", super::print_tuplix(self))
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print_quantity(self))
    }
}

impl fmt::Display for Tuplix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print_tuplix(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(name: &str) -> Action {
        Action::new(name)
    }

    fn example_one() -> Tuplix {
        Tuplix::conj_all([
            Tuplix::transfer(a("a"), Quantity::var("u")),
            Tuplix::delay(Tuplix::transfer(a("a"), Quantity::nat(5u32))),
            Tuplix::delay_n(
                Tuplix::transfer(
                    a("b"),
                    Quantity::sub(Quantity::var("u"), Quantity::nat(7u32)),
                ),
                2,
            ),
        ])
    }

    #[test]
    fn actions_of_examples() {
        let expected: ActionSet = [a("a"), a("b"), Action::iota()].into_iter().collect();
        assert_eq!(actions_of(&example_one()), expected);
        assert_eq!(
            actions_of(&Tuplix::Empty),
            [Action::iota()].into_iter().collect()
        );
        assert_eq!(
            actions_of(&Tuplix::transfer(Action::iota(), Quantity::nat(5u32))),
            [Action::iota()].into_iter().collect()
        );
    }

    #[test]
    fn delay_depth_examples() {
        let t = Tuplix::conj(
            Tuplix::transfer(a("a"), Quantity::nat(7u32)),
            Tuplix::delay(Tuplix::transfer(
                a("a'"),
                Quantity::literal(&Rational::from(-8)),
            )),
        );
        assert_eq!(delay_depth(&t), 1);
        assert_eq!(delay_depth(&Tuplix::Empty), 0);
        assert_eq!(
            delay_depth(&Tuplix::delay_n(
                Tuplix::transfer(a("b"), Quantity::nat(5u32)),
                2
            )),
            2
        );
        assert_eq!(delay_depth(&example_one()), 2);
    }

    #[test]
    fn literal_shapes() {
        assert_eq!(Quantity::literal(&Rational::zero()), Quantity::Zero);
        assert_eq!(Quantity::literal(&Rational::one()), Quantity::One);
        assert_eq!(
            Quantity::literal(&Rational::new(-707, 100)),
            Quantity::neg(Quantity::div(Quantity::nat(707u32), Quantity::nat(100u32)))
        );
    }

    #[test]
    fn identifiers() {
        assert!(Action::try_new("a'").is_some());
        assert!(Action::try_new("_x1").is_some());
        assert!(Action::try_new("1a").is_none());
        assert!(Action::try_new("").is_none());
        assert!(Action::try_new("a-b").is_none());
    }
}
