use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::meadow::Rational;
use crate::model::{eval_model_in, icap_model};
use crate::syntax::{Quantity, Tuplix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound quantity variable `{0}`")]
    UnboundVariable(String),
}

/// Values for quantity variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<String, Rational>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: Rational) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Rational) {
        self.0.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        self.0.get(name)
    }

    pub fn covers(&self, vars: &BTreeSet<String>) -> bool {
        vars.iter().all(|v| self.0.contains_key(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

impl FromIterator<(String, Rational)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (String, Rational)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Evaluates `q` in the zero-totalized rationals. An implicit-capital subterm
/// takes the value of its body's implicit capital, or `-1` when the body is
/// blocked.
pub fn eval_quantity(q: &Quantity, env: &Assignment) -> Result<Rational, EvalError> {
    Ok(match q {
        Quantity::Zero => Rational::zero(),
        Quantity::One => Rational::one(),
        Quantity::Num(n) => Rational::from_integer(BigInt::from(n.clone())),
        Quantity::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?,
        Quantity::Add(a, b) => eval_quantity(a, env)?.add(&eval_quantity(b, env)?),
        Quantity::Mul(a, b) => eval_quantity(a, env)?.mul(&eval_quantity(b, env)?),
        Quantity::Neg(a) => eval_quantity(a, env)?.neg(),
        Quantity::Inv(a) => eval_quantity(a, env)?.inv(),
        Quantity::Sign(a) => eval_quantity(a, env)?.sign(),
        Quantity::ICap(rate, body) => {
            let d = eval_quantity(rate, env)?;
            icap_model(&d, &eval_model_in(body, env)?).encoded()
        }
    })
}

pub fn substitute_quantity(q: &Quantity, env: &Assignment) -> Quantity {
    let sub = |x: &Quantity| Box::new(substitute_quantity(x, env));
    match q {
        Quantity::Var(v) => match env.get(v) {
            Some(r) => Quantity::literal(r),
            None => q.clone(),
        },
        Quantity::Zero | Quantity::One | Quantity::Num(_) => q.clone(),
        Quantity::Add(a, b) => Quantity::Add(sub(a), sub(b)),
        Quantity::Mul(a, b) => Quantity::Mul(sub(a), sub(b)),
        Quantity::Neg(a) => Quantity::Neg(sub(a)),
        Quantity::Inv(a) => Quantity::Inv(sub(a)),
        Quantity::Sign(a) => Quantity::Sign(sub(a)),
        Quantity::ICap(r, t) => Quantity::ICap(sub(r), Box::new(substitute(t, env))),
    }
}

/// Replaces every variable bound in `env` by its literal.
pub fn substitute(t: &Tuplix, env: &Assignment) -> Tuplix {
    let sub = |x: &Tuplix| Box::new(substitute(x, env));
    match t {
        Tuplix::Empty | Tuplix::Block => t.clone(),
        Tuplix::Transfer(a, q) => Tuplix::Transfer(a.clone(), substitute_quantity(q, env)),
        Tuplix::ZeroTest(q) => Tuplix::ZeroTest(substitute_quantity(q, env)),
        Tuplix::Conj(a, b) => Tuplix::Conj(sub(a), sub(b)),
        Tuplix::Delay(x) => Tuplix::Delay(sub(x)),
        Tuplix::PreAbstr(i, x) => Tuplix::PreAbstr(i.clone(), sub(x)),
        Tuplix::IntEncap(h, r, x) => {
            Tuplix::IntEncap(h.clone(), substitute_quantity(r, env), sub(x))
        }
    }
}

/// Draws a value for a quantity variable. Zero and `±1` are heavily
/// weighted so that the `inv(0) = 0` branches get exercised.
pub fn sample_value<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    match rng.gen_range(0..100) {
        0..=19 => Rational::zero(),
        20..=29 => Rational::one(),
        30..=39 => Rational::one().neg(),
        40..=59 => Rational::from(rng.gen_range(-5i64..=5)),
        _ => Rational::new(rng.gen_range(-60i64..=60), rng.gen_range(1i64..=30)),
    }
}

pub fn sample_assignment<R: Rng + ?Sized>(vars: &BTreeSet<String>, rng: &mut R) -> Assignment {
    vars.iter()
        .map(|v| (v.clone(), sample_value(rng)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// No counterexample in `trials` sampled assignments.
    ProbablyEqual { trials: usize },
    /// Definitive: the two sides differ under `witness`.
    Unequal { witness: Assignment },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::ProbablyEqual { .. })
    }
}

fn randomized<F>(vars: BTreeSet<String>, trials: usize, seed: u64, mut differs: F) -> Verdict
where
    F: FnMut(&Assignment) -> bool,
{
    let trials = if vars.is_empty() { 1 } else { trials.max(1) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let env = sample_assignment(&vars, &mut rng);
        if differs(&env) {
            return Verdict::Unequal { witness: env };
        }
    }
    Verdict::ProbablyEqual { trials }
}

/// Compares two quantity terms on random assignments of their free variables.
pub fn check_equal_random(q1: &Quantity, q2: &Quantity, trials: usize, seed: u64) -> Verdict {
    let mut vars = q1.free_vars();
    vars.extend(q2.free_vars());
    randomized(vars, trials, seed, |env| {
        eval_quantity(q1, env).ok() != eval_quantity(q2, env).ok()
    })
}

/// Compares two tuplix terms in the model on random assignments of their free
/// quantity variables. With no free variables the verdict is exact.
pub fn check_equal_random_tuplix(t1: &Tuplix, t2: &Tuplix, trials: usize, seed: u64) -> Verdict {
    let mut vars = t1.free_vars();
    vars.extend(t2.free_vars());
    randomized(vars, trials, seed, |env| {
        eval_model_in(t1, env).ok() != eval_model_in(t2, env).ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_quantity, parse_tuplix, Action};

    fn q(s: &str) -> Quantity {
        parse_quantity(s).unwrap()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        let env = Assignment::new();
        assert_eq!(
            eval_quantity(&q("(1+1/10)^2 * 5"), &env).unwrap(),
            r("121/20")
        );
        assert_eq!(eval_quantity(&q("inv(0)"), &env).unwrap(), Rational::zero());
        assert_eq!(
            eval_quantity(&q("icap@(1/100)(bot)"), &env).unwrap(),
            r("-1")
        );
        assert_eq!(
            eval_quantity(&q("icap@(1/100)(a(7) & delay(a'(-8)))"), &env).unwrap(),
            r("7")
        );
        assert_eq!(
            eval_quantity(&q("max(3, 5) - min(3, 5)"), &env).unwrap(),
            r("2")
        );
        assert_eq!(
            eval_quantity(&q("0.25 * 4"), &env).unwrap(),
            Rational::one()
        );
    }

    #[test]
    fn unbound_variable() {
        assert_eq!(
            eval_quantity(&q("u + 1"), &Assignment::new()),
            Err(EvalError::UnboundVariable("u".into()))
        );
        let env = Assignment::new().with("u", r("2"));
        assert_eq!(
            eval_quantity(&q("icap@0(a(u + w))"), &env),
            Err(EvalError::UnboundVariable("w".into()))
        );
    }

    #[test]
    fn randomized_equality_examples() {
        match check_equal_random(&q("u/u"), &q("1"), 200, 7) {
            Verdict::Unequal { witness } => assert_eq!(witness.get("u"), Some(&Rational::zero())),
            other => panic!("expected a witness, got {other:?}"),
        }
        assert!(check_equal_random(&q("u + 0"), &q("u"), 200, 7).is_equal());
        assert!(check_equal_random(&q("-5/(1+p) + 5/(1+p)"), &q("0"), 200, 7).is_equal());
        assert_eq!(
            check_equal_random(&q("2 + 3"), &q("5"), 200, 7),
            Verdict::ProbablyEqual { trials: 1 }
        );
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = check_equal_random(&q("u*v"), &q("v*u + w - w*w/w"), 100, 99);
        let b = check_equal_random(&q("u*v"), &q("v*u + w - w*w/w"), 100, 99);
        assert_eq!(a, b);
    }

    #[test]
    fn substitute_examples() {
        let t = parse_tuplix("enc{a}@p(a(u) & delay(a(5)) & delay^2(b(u-7)))").unwrap();
        let env = Assignment::new()
            .with("u", r("-5"))
            .with("p", Rational::zero());
        let closed = substitute(&t, &env);
        assert!(closed.is_closed());
        assert_eq!(substitute(&Tuplix::Empty, &env), Tuplix::Empty);
        let env = Assignment::new().with("u", r("3"));
        assert_eq!(
            substitute(&Tuplix::transfer(Action::new("a"), q("u")), &env),
            Tuplix::transfer(Action::new("a"), q("3"))
        );
        // unbound variables are left in place
        assert_eq!(substitute_quantity(&q("u + w"), &env), q("3 + w"));
    }

    #[test]
    fn sampler_hits_zero_often() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zeros = (0..1000)
            .filter(|_| sample_value(&mut rng).is_zero())
            .count();
        assert!(zeros > 150, "{zeros}");
    }
}
