//! The standard model: closed tuplix terms denote timed tuplices.
//!
//! A timed tuplix is either blocked or a finite schedule of transfer maps,
//! one per time slice, followed by an implicit infinite tail of empty maps.
//! Schedules are kept trimmed, so two values are equal in the model exactly
//! when they are structurally equal.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::meadow::Rational;
use crate::rewrite::{eval_quantity, Assignment, EvalError};
use crate::syntax::{Action, ActionSet, Tuplix};

/// Transfers performed in one time slice. An entry `a ↦ 0` is not the same as
/// no entry for `a`.
pub type TransferMap = BTreeMap<Action, Rational>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TimedTuplix {
    Blocked,
    Schedule(Schedule),
}

/// Trimmed slice sequence: never ends in an empty map.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Schedule(Vec<TransferMap>);

impl Schedule {
    pub fn new(mut slices: Vec<TransferMap>) -> Self {
        while slices.last().is_some_and(|m| m.is_empty()) {
            slices.pop();
        }
        Schedule(slices)
    }

    pub fn slices(&self) -> &[TransferMap] {
        &self.0
    }

    /// Number of stored slices; every later slice is the empty map.
    pub fn horizon(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ICapResult {
    Defined(Rational),
    Undefined,
}

impl ICapResult {
    /// The value an implicit-capital subterm takes inside a quantity: the
    /// amount, or `-1` for undefined.
    pub fn encoded(&self) -> Rational {
        match self {
            ICapResult::Defined(c) => c.clone(),
            ICapResult::Undefined => Rational::one().neg(),
        }
    }

    pub fn amount(&self) -> Option<&Rational> {
        match self {
            ICapResult::Defined(c) => Some(c),
            ICapResult::Undefined => None,
        }
    }
}

impl fmt::Display for ICapResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ICapResult::Defined(c) => write!(f, "{c}"),
            ICapResult::Undefined => f.write_str("undefined"),
        }
    }
}

/// An exact-rational string, or `null` when undefined.
impl Serialize for ICapResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.amount().serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("atotal is undefined on the blocked tuplix")]
pub struct BlockedError;

impl TimedTuplix {
    /// The denotation of `eps`.
    pub fn empty() -> Self {
        TimedTuplix::Schedule(Schedule::default())
    }

    pub fn from_slices(slices: Vec<TransferMap>) -> Self {
        TimedTuplix::Schedule(Schedule::new(slices))
    }

    pub fn is_blocked(&self) -> bool {
        matches!(self, TimedTuplix::Blocked)
    }

    pub fn slices(&self) -> Option<&[TransferMap]> {
        match self {
            TimedTuplix::Blocked => None,
            TimedTuplix::Schedule(s) => Some(s.slices()),
        }
    }

    /// Actions occurring in any slice.
    pub fn actions(&self) -> ActionSet {
        self.slices()
            .into_iter()
            .flatten()
            .flat_map(|m| m.keys().cloned())
            .collect()
    }
}

pub fn eval_model(t: &Tuplix) -> Result<TimedTuplix, EvalError> {
    eval_model_in(t, &Assignment::default())
}

/// Evaluates `t` with its free quantity variables read from `env`.
pub fn eval_model_in(t: &Tuplix, env: &Assignment) -> Result<TimedTuplix, EvalError> {
    Ok(match t {
        Tuplix::Empty => TimedTuplix::empty(),
        Tuplix::Block => TimedTuplix::Blocked,
        Tuplix::Transfer(a, q) => {
            let v = eval_quantity(q, env)?;
            TimedTuplix::from_slices(vec![TransferMap::from([(a.clone(), v)])])
        }
        Tuplix::ZeroTest(q) => {
            if eval_quantity(q, env)?.is_zero() {
                TimedTuplix::empty()
            } else {
                TimedTuplix::Blocked
            }
        }
        Tuplix::Conj(a, b) => conj_model(&eval_model_in(a, env)?, &eval_model_in(b, env)?),
        Tuplix::Delay(t) => delay_model(&eval_model_in(t, env)?),
        Tuplix::PreAbstr(i, t) => pabstr_model(i, &eval_model_in(t, env)?),
        Tuplix::IntEncap(h, rate, t) => {
            let d = eval_quantity(rate, env)?;
            iencap_model(h, &d, &eval_model_in(t, env)?)
        }
    })
}

/// Slice-wise union of transfer maps, adding values of shared actions.
pub fn conj_model(t1: &TimedTuplix, t2: &TimedTuplix) -> TimedTuplix {
    let (TimedTuplix::Schedule(s1), TimedTuplix::Schedule(s2)) = (t1, t2) else {
        return TimedTuplix::Blocked;
    };
    let len = s1.horizon().max(s2.horizon());
    let slices = (0..len)
        .map(|i| {
            let mut f = s1.0.get(i).cloned().unwrap_or_default();
            for (a, v) in s2.0.get(i).into_iter().flatten() {
                f.entry(a.clone())
                    .and_modify(|x| *x = x.add(v))
                    .or_insert_with(|| v.clone());
            }
            f
        })
        .collect();
    TimedTuplix::from_slices(slices)
}

pub fn delay_model(t: &TimedTuplix) -> TimedTuplix {
    match t {
        TimedTuplix::Blocked => TimedTuplix::Blocked,
        TimedTuplix::Schedule(s) if s.0.is_empty() => t.clone(),
        TimedTuplix::Schedule(s) => {
            let mut slices = Vec::with_capacity(s.0.len() + 1);
            slices.push(TransferMap::new());
            slices.extend(s.0.iter().cloned());
            TimedTuplix::from_slices(slices)
        }
    }
}

/// Renames the actions in `i` to `iota`, summing their values per slice.
/// A pre-existing `iota` entry outside `i` is added into the sum.
pub fn pabstr_model(i: &ActionSet, t: &TimedTuplix) -> TimedTuplix {
    let TimedTuplix::Schedule(s) = t else {
        return TimedTuplix::Blocked;
    };
    let slices =
        s.0.iter()
            .map(|f| {
                let (hidden, mut kept): (TransferMap, TransferMap) = f
                    .iter()
                    .map(|(a, v)| (a.clone(), v.clone()))
                    .partition(|(a, _)| i.contains(a));
                if !hidden.is_empty() {
                    let sum: Rational = hidden.values().sum();
                    kept.entry(Action::iota())
                        .and_modify(|x| *x = x.add(&sum))
                        .or_insert(sum);
                }
                kept
            })
            .collect();
    TimedTuplix::from_slices(slices)
}

/// Sum of the transfers on `a`, each discounted to slice 0 at rate `d`:
/// slice `i` is weighted by `(1 + d)^-i`.
pub fn atotal(a: &Action, d: &Rational, t: &TimedTuplix) -> Result<Rational, BlockedError> {
    let TimedTuplix::Schedule(s) = t else {
        return Err(BlockedError);
    };
    let growth = Rational::one().add(d);
    Ok(s.0
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.get(a).map(|v| growth.pow(-(i as i64)).mul(v)))
        .fold(Rational::zero(), |acc, x| acc.add(&x)))
}

/// Removes the actions in `h` when each of them has a zero discounted total
/// at rate `d`; blocks otherwise.
pub fn iencap_model(h: &ActionSet, d: &Rational, t: &TimedTuplix) -> TimedTuplix {
    let TimedTuplix::Schedule(s) = t else {
        return TimedTuplix::Blocked;
    };
    let balanced = h
        .iter()
        .all(|a| atotal(a, d, t).map(|x| x.is_zero()).unwrap_or(false));
    if !balanced {
        return TimedTuplix::Blocked;
    }
    let slices =
        s.0.iter()
            .map(|f| {
                f.iter()
                    .filter(|(a, _)| !h.contains(*a))
                    .map(|(a, v)| (a.clone(), v.clone()))
                    .collect()
            })
            .collect();
    TimedTuplix::from_slices(slices)
}

/// Slice-0 total of a transfer map.
fn q0(f: &TransferMap) -> Rational {
    f.values().sum()
}

/// Least amount needed up front to exhibit `t` when idle money grows at rate
/// `d` per slice. Works backwards from the last slice:
/// `c = max(q0 + c_next / (1 + d), 0)`.
pub fn icap_model(d: &Rational, t: &TimedTuplix) -> ICapResult {
    let TimedTuplix::Schedule(s) = t else {
        return ICapResult::Undefined;
    };
    let discount = Rational::one().add(d).inv();
    let zero = Rational::zero();
    let mut slices = s.0.iter().rev();
    let Some(last) = slices.next() else {
        return ICapResult::Defined(zero);
    };
    let mut c = q0(last).max2(&zero);
    for f in slices {
        c = q0(f).add(&discount.mul(&c)).max2(&zero);
    }
    ICapResult::Defined(c)
}

pub fn equal_model(t1: &TimedTuplix, t2: &TimedTuplix) -> bool {
    t1 == t2
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Wire {
    Blocked {
        blocked: bool,
    },
    Slices {
        slices: Vec<BTreeMap<String, Rational>>,
    },
}

impl Serialize for TimedTuplix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match self {
            TimedTuplix::Blocked => Wire::Blocked { blocked: true },
            TimedTuplix::Schedule(s) => Wire::Slices {
                slices: s
                    .0
                    .iter()
                    .map(|f| {
                        f.iter()
                            .map(|(a, v)| (a.name().to_string(), v.clone()))
                            .collect()
                    })
                    .collect(),
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimedTuplix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match Wire::deserialize(deserializer)? {
            Wire::Blocked { blocked: true } => Ok(TimedTuplix::Blocked),
            Wire::Blocked { blocked: false } => Err(D::Error::custom("`blocked` must be true")),
            Wire::Slices { slices } => {
                let slices = slices
                    .into_iter()
                    .map(|m| {
                        m.into_iter()
                            .map(|(name, v)| {
                                Action::try_new(name.clone())
                                    .map(|a| (a, v))
                                    .ok_or_else(|| {
                                        D::Error::custom(format!("invalid action `{name}`"))
                                    })
                            })
                            .collect::<Result<TransferMap, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(TimedTuplix::from_slices(slices))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_tuplix;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn act(s: &str) -> Action {
        Action::new(s)
    }

    fn map(entries: &[(&str, &str)]) -> TransferMap {
        entries.iter().map(|(a, v)| (act(a), r(v))).collect()
    }

    fn sched(slices: &[&[(&str, &str)]]) -> TimedTuplix {
        TimedTuplix::from_slices(slices.iter().map(|s| map(s)).collect())
    }

    fn eval(src: &str) -> TimedTuplix {
        eval_model(&parse_tuplix(src).unwrap()).unwrap()
    }

    fn set(names: &[&str]) -> ActionSet {
        names.iter().map(|n| act(n)).collect()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval("test(0)"), TimedTuplix::empty());
        assert_eq!(eval("test(1)"), TimedTuplix::Blocked);
        assert_eq!(
            eval("a(7) & delay(a'(-8))"),
            sched(&[&[("a", "7")], &[("a'", "-8")]])
        );
    }

    #[test]
    fn unbound_variable_is_reported() {
        let err = eval_model(&parse_tuplix("a(u)").unwrap()).unwrap_err();
        assert_eq!(err, EvalError::UnboundVariable("u".into()));
    }

    #[test]
    fn conj_examples() {
        let t = sched(&[&[("a", "7")]]);
        assert_eq!(
            conj_model(&t, &sched(&[&[("a", "-7")]])),
            sched(&[&[("a", "0")]])
        );
        assert_eq!(conj_model(&t, &TimedTuplix::Blocked), TimedTuplix::Blocked);
        assert_eq!(conj_model(&t, &TimedTuplix::empty()), t);
    }

    #[test]
    fn delay_examples() {
        assert_eq!(delay_model(&TimedTuplix::Blocked), TimedTuplix::Blocked);
        assert_eq!(
            delay_model(&sched(&[&[("a", "5")]])),
            sched(&[&[], &[("a", "5")]])
        );
        assert_eq!(delay_model(&TimedTuplix::empty()), TimedTuplix::empty());
    }

    #[test]
    fn pabstr_examples() {
        let t = sched(&[&[("a", "7")], &[("a'", "-8")]]);
        assert_eq!(
            pabstr_model(&set(&["a", "a'"]), &t),
            sched(&[&[("iota", "7")], &[("iota", "-8")]])
        );
        assert_eq!(pabstr_model(&ActionSet::new(), &t), t);
        assert_eq!(
            pabstr_model(&set(&["a"]), &sched(&[&[("a", "2"), ("b", "3")]])),
            sched(&[&[("iota", "2"), ("b", "3")]])
        );
        // iota outside the abstracted set joins the collapsed entry
        assert_eq!(
            pabstr_model(&set(&["a"]), &sched(&[&[("a", "2"), ("iota", "3")]])),
            sched(&[&[("iota", "5")]])
        );
        // a slice without abstracted actions keeps its iota untouched
        assert_eq!(
            pabstr_model(&set(&["a"]), &sched(&[&[("iota", "3")]])),
            sched(&[&[("iota", "3")]])
        );
    }

    #[test]
    fn atotal_examples() {
        let a = act("a");
        let t = sched(&[&[("a", "-5")], &[], &[("a", "5")]]);
        assert_eq!(atotal(&a, &Rational::zero(), &t).unwrap(), Rational::zero());
        // u' + 5/(1+p) at u' = 3, p = 1/4
        let t = sched(&[&[("a", "3")], &[("a", "5")]]);
        assert_eq!(
            atotal(&a, &r("1/4"), &t).unwrap(),
            r("3").add(&r("5").div(&r("5/4")))
        );
        let t = sched(&[&[("a", "1")], &[("a", "-2")]]);
        assert_eq!(atotal(&a, &Rational::one(), &t).unwrap(), Rational::zero());
        assert!(atotal(&a, &Rational::one(), &TimedTuplix::Blocked).is_err());
    }

    #[test]
    fn atotal_at_rate_minus_one_keeps_slice_zero_only() {
        let t = sched(&[&[("a", "3")], &[("a", "5")], &[("a", "9")]]);
        assert_eq!(atotal(&act("a"), &r("-1"), &t).unwrap(), r("3"));
    }

    #[test]
    fn delay_commutes_with_iencap_except_at_rate_minus_one() {
        assert_eq!(eval("enc{a}@2(delay(a(1)))"), TimedTuplix::Blocked);
        assert_eq!(eval("delay(enc{a}@2(a(1)))"), TimedTuplix::Blocked);
        // every later slice is weighted by 0, so nothing is left to balance
        assert_eq!(eval("enc{a}@(-1)(delay(a(1)))"), TimedTuplix::empty());
        assert_eq!(eval("delay(enc{a}@(-1)(a(1)))"), TimedTuplix::Blocked);
    }

    #[test]
    fn iencap_examples() {
        let h = set(&["a"]);
        let t = sched(&[&[("a", "-5")], &[], &[("a", "5"), ("b", "2")]]);
        assert_eq!(
            iencap_model(&h, &Rational::zero(), &t),
            sched(&[&[], &[], &[("b", "2")]])
        );
        assert_eq!(
            iencap_model(&h, &Rational::zero(), &sched(&[&[("a", "1")]])),
            TimedTuplix::Blocked
        );
        assert_eq!(iencap_model(&ActionSet::new(), &Rational::zero(), &t), t);
    }

    #[test]
    fn printed_table_weight_would_block_a_derivable_epsilon() {
        // With (1+d)^i the same schedule totals 1 + 2·(-2) = -3.
        let t = eval("a(1) & delay(a(-2))");
        let d = Rational::one();
        let printed: Rational = t
            .slices()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, f)| Rational::one().add(&d).pow(i as i64).mul(&f[&act("a")]))
            .sum::<Rational>();
        assert_eq!(printed, r("-3"));
        assert_eq!(eval("enc{a}@1(a(1) & delay(a(-2)))"), TimedTuplix::empty());
    }

    #[test]
    fn icap_examples() {
        assert_eq!(
            icap_model(&Rational::zero(), &TimedTuplix::Blocked),
            ICapResult::Undefined
        );
        assert_eq!(
            icap_model(&Rational::zero(), &sched(&[&[("iota", "-3")]])),
            ICapResult::Defined(Rational::zero())
        );
        assert_eq!(
            icap_model(&Rational::zero(), &sched(&[&[("iota", "4")]])),
            ICapResult::Defined(r("4"))
        );
        let t = eval("a(7) & delay(a'(-8)) & b(-5) & delay^2(b'((1+1/10)^2*5))");
        assert_eq!(icap_model(&r("1/100"), &t), ICapResult::Defined(r("2")));
        assert_eq!(
            icap_model(&r("1/3"), &TimedTuplix::empty()),
            ICapResult::Defined(Rational::zero())
        );
        assert_eq!(ICapResult::Undefined.encoded(), r("-1"));
    }

    #[test]
    fn equality_is_domain_sensitive() {
        assert!(equal_model(&TimedTuplix::Blocked, &TimedTuplix::Blocked));
        assert!(!equal_model(
            &sched(&[&[("a", "0")]]),
            &TimedTuplix::empty()
        ));
        assert!(equal_model(&sched(&[&[], &[]]), &TimedTuplix::empty()));
    }

    #[test]
    fn json_wire_format() {
        let t = sched(&[&[("a", "7")], &[("a'", "-8")]]);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"slices":[{"a":"7"},{"a'":"-8"}]}"#);
        assert_eq!(serde_json::from_str::<TimedTuplix>(&json).unwrap(), t);
        assert_eq!(
            serde_json::to_string(&TimedTuplix::Blocked).unwrap(),
            r#"{"blocked":true}"#
        );
        assert_eq!(
            serde_json::from_str::<TimedTuplix>(r#"{"blocked":true}"#).unwrap(),
            TimedTuplix::Blocked
        );
        assert_eq!(
            serde_json::from_str::<TimedTuplix>(r#"{"slices":[{"a":"1/2"},{}]}"#).unwrap(),
            sched(&[&[("a", "1/2")]])
        );
        assert!(serde_json::from_str::<TimedTuplix>(r#"{"blocked":false}"#).is_err());
        assert!(serde_json::from_str::<TimedTuplix>(r#"{"slices":[{"1x":"1"}]}"#).is_err());
        assert!(serde_json::from_str::<TimedTuplix>(r#"{"slices":[{"a":"1/0"}]}"#).is_err());
    }
}
