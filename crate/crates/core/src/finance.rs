//! Purity, implicit capital, profit comparison and credit synthesis for
//! closed terms.
//!
//! A product is pure at rate `r` when, after every action is renamed to
//! `iota`, the transfers discounted to slice 0 at `r` sum to zero.

use serde::Serialize;
use thiserror::Error;

use crate::meadow::Rational;
use crate::model::{
    atotal, conj_model, eval_model, icap_model, iencap_model, pabstr_model, ICapResult, TimedTuplix,
};
use crate::rewrite::EvalError;
use crate::syntax::{actions_of, delay_depth, Action, ActionSet, ActionUniverse, Quantity, Tuplix};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PurityReport {
    pub pure: bool,
    pub rate: Rational,
    /// Discounted `iota` total after full pre-abstraction; zero when blocked.
    pub residual: Rational,
    pub blocked: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfitReport {
    pub savings_rate: Rational,
    pub icap_behaviour: ICapResult,
    pub icap_combined: ICapResult,
    pub profits: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the behaviour is blocked")]
    BlockedBehaviour,
    #[error("action `{0}` already occurs in the behaviour")]
    ActionClash(Action),
    #[error("rate -1 has no compounding factor")]
    DegenerateRate,
}

pub fn is_pure(t: &Tuplix, rate: &Rational) -> Result<PurityReport, EvalError> {
    is_pure_in(t, rate, &ActionUniverse::of(t))
}

/// Purity with pre-abstraction over `universe` together with the actions
/// of `t`.
pub fn is_pure_in(
    t: &Tuplix,
    rate: &Rational,
    universe: &ActionUniverse,
) -> Result<PurityReport, EvalError> {
    let mut all = universe.clone();
    all.extend(actions_of(t));
    Ok(purity_of(&eval_model(t)?, rate, all.actions()))
}

fn purity_of(m: &TimedTuplix, rate: &Rational, all: &ActionSet) -> PurityReport {
    let abstracted = pabstr_model(all, m);
    let Ok(residual) = atotal(&Action::iota(), rate, &abstracted) else {
        return PurityReport {
            pure: false,
            rate: rate.clone(),
            residual: Rational::zero(),
            blocked: true,
        };
    };
    let iota: ActionSet = [Action::iota()].into();
    let pure = iencap_model(&iota, rate, &abstracted) == TimedTuplix::empty();
    PurityReport {
        pure,
        rate: rate.clone(),
        residual,
        blocked: false,
    }
}

pub fn implicit_capital(t: &Tuplix, rate: &Rational) -> Result<ICapResult, EvalError> {
    Ok(icap_model(rate, &eval_model(t)?))
}

pub fn profits_from(
    product: &Tuplix,
    behaviour: &Tuplix,
    savings_rate: &Rational,
) -> Result<ProfitReport, EvalError> {
    let b = eval_model(behaviour)?;
    let combined = conj_model(&eval_model(product)?, &b);
    let icap_behaviour = icap_model(savings_rate, &b);
    let icap_combined = icap_model(savings_rate, &combined);
    let profits = match (&icap_combined, &icap_behaviour) {
        (ICapResult::Defined(c), ICapResult::Defined(b)) => c < b,
        _ => false,
    };
    Ok(ProfitReport {
        savings_rate: savings_rate.clone(),
        icap_behaviour,
        icap_combined,
        profits,
    })
}

/// `borrow(-IC) & delay^n(repay((1+rate)^n * IC))`, where `IC` is the
/// behaviour's implicit capital at `rate` and `n` its delay depth; `eps`
/// when no capital is needed.
pub fn synthesize_pure_credit(
    behaviour: &Tuplix,
    rate: &Rational,
    borrow: &Action,
    repay: &Action,
) -> Result<Tuplix, SynthError> {
    let growth = Rational::one().add(rate);
    if growth.is_zero() {
        return Err(SynthError::DegenerateRate);
    }
    let used = actions_of(behaviour);
    for a in [borrow, repay] {
        if used.contains(a) {
            return Err(SynthError::ActionClash(a.clone()));
        }
    }
    let capital = match implicit_capital(behaviour, rate)? {
        ICapResult::Undefined => return Err(SynthError::BlockedBehaviour),
        ICapResult::Defined(c) if c.is_zero() => return Ok(Tuplix::Empty),
        ICapResult::Defined(c) => c,
    };
    let n = delay_depth(behaviour);
    let repayment = growth.pow(n as i64).mul(&capital);
    Ok(Tuplix::conj(
        Tuplix::transfer(borrow.clone(), Quantity::literal(&capital.neg())),
        Tuplix::delay_n(
            Tuplix::transfer(repay.clone(), Quantity::literal(&repayment)),
            n as u32,
        ),
    ))
}
