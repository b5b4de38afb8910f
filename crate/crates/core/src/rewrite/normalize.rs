//! Symbolic normalization of tuplix terms to canonical form
//! `test(g) & s0 & delay(s1 & delay(s2 & ...))`, where each `si` is a
//! conjunction of transfers on distinct actions.

use std::collections::BTreeMap;

use thiserror::Error;

use super::eval::{eval_quantity, Assignment};
use crate::syntax::{Action, ActionSet, Quantity, Tuplix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("cannot decide whether `{guard}` blocks: it depends on open variables")]
    UnresolvableGuard { guard: String },
}

pub type SymbolicSlice = BTreeMap<Action, Quantity>;

/// Guard plus per-slice symbolic transfers.
///
/// The guard is kept as a list of conjuncts, each standing for a zero test.
/// Side conditions are the interest guards `1 - (1+r)/(1+r)` under which
/// transfers were moved between slices at an open rate `r`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CanonicalTuplix {
    blocked: bool,
    conjuncts: Vec<Quantity>,
    side_conditions: Vec<Quantity>,
    slices: Vec<SymbolicSlice>,
}

impl CanonicalTuplix {
    fn blocked() -> Self {
        CanonicalTuplix {
            blocked: true,
            ..Default::default()
        }
    }

    pub fn is_blocked(&self) -> bool {
        self.blocked
    }

    /// Open zero-test arguments, in order of first occurrence.
    pub fn conjuncts(&self) -> &[Quantity] {
        &self.conjuncts
    }

    pub fn side_conditions(&self) -> &[Quantity] {
        &self.side_conditions
    }

    /// Trimmed: the last slice, if any, is non-empty.
    pub fn slices(&self) -> &[SymbolicSlice] {
        &self.slices
    }

    /// The single zero-test argument equivalent to all conjuncts and side
    /// conditions: `1` when blocked, `0` when there is nothing to test, the
    /// conjunct itself when there is one, otherwise `q1/q1 + q2/q2 + ...`.
    pub fn guard(&self) -> Quantity {
        if self.blocked {
            return Quantity::One;
        }
        combine_guards(self.conjuncts.iter().chain(&self.side_conditions))
    }

    fn push_unique(list: &mut Vec<Quantity>, q: Quantity) {
        if !list.contains(&q) {
            list.push(q);
        }
    }

    /// Adds a zero test: closed arguments are decided on the spot.
    fn add_guard(&mut self, q: Quantity) {
        if self.blocked {
            return;
        }
        if q.is_closed() {
            let zero = eval_quantity(&q, &Assignment::default())
                .map(|v| v.is_zero())
                .unwrap_or(false);
            if !zero {
                *self = CanonicalTuplix::blocked();
            }
            return;
        }
        Self::push_unique(&mut self.conjuncts, q);
    }

    fn add_side_condition(&mut self, q: Quantity) {
        if !self.blocked {
            Self::push_unique(&mut self.side_conditions, q);
        }
    }

    fn trim(&mut self) {
        while self.slices.last().is_some_and(|s| s.is_empty()) {
            self.slices.pop();
        }
    }

    fn conj(mut self, other: CanonicalTuplix) -> CanonicalTuplix {
        if self.blocked || other.blocked {
            return CanonicalTuplix::blocked();
        }
        for q in other.conjuncts {
            Self::push_unique(&mut self.conjuncts, q);
        }
        for q in other.side_conditions {
            Self::push_unique(&mut self.side_conditions, q);
        }
        if self.slices.len() < other.slices.len() {
            self.slices
                .resize_with(other.slices.len(), SymbolicSlice::new);
        }
        for (mine, theirs) in self.slices.iter_mut().zip(other.slices) {
            for (a, v) in theirs {
                let merged = match mine.remove(&a) {
                    Some(u) => Quantity::add(u, v),
                    None => v,
                };
                mine.insert(a, merged);
            }
        }
        self
    }

    fn delay(mut self) -> CanonicalTuplix {
        if !self.blocked && !self.slices.is_empty() {
            self.slices.insert(0, SymbolicSlice::new());
        }
        self
    }

    fn pabstr(mut self, i: &ActionSet) -> CanonicalTuplix {
        for slice in &mut self.slices {
            let hidden: Vec<Action> = slice.keys().filter(|a| i.contains(*a)).cloned().collect();
            let Some(sum) = hidden
                .iter()
                .map(|a| slice.remove(a).expect("key listed above"))
                .reduce(Quantity::add)
            else {
                continue;
            };
            let iota = Action::iota();
            let merged = match slice.remove(&iota) {
                Some(existing) => Quantity::add(existing, sum),
                None => sum,
            };
            slice.insert(iota, merged);
        }
        self
    }

    fn iencap(mut self, h: &ActionSet, rate: &Quantity) -> CanonicalTuplix {
        if self.blocked {
            return self;
        }
        let growth = Quantity::add(Quantity::One, rate.clone());
        let mut moved_across_slices = false;
        for a in h {
            let mut total: Option<Quantity> = None;
            for (i, slice) in self.slices.iter_mut().enumerate() {
                let Some(v) = slice.remove(a) else { continue };
                let term = if i == 0 {
                    v
                } else {
                    moved_across_slices = true;
                    Quantity::div(v, Quantity::pow(growth.clone(), i as u32))
                };
                total = Some(match total {
                    Some(acc) => Quantity::add(acc, term),
                    None => term,
                });
            }
            if let Some(total) = total {
                self.add_guard(total);
            }
        }
        if moved_across_slices && !rate.is_closed() {
            self.add_side_condition(Quantity::sub(
                Quantity::One,
                Quantity::div(growth.clone(), growth),
            ));
        }
        self.trim();
        self
    }

    /// Implicit capital of this canonical term at `rate`, folded backwards
    /// from the last slice. Requires the guard to be decided.
    fn icap(&self, rate: &Quantity) -> Result<Quantity, NormalizeError> {
        if self.blocked {
            return Ok(Quantity::neg(Quantity::One));
        }
        if !self.conjuncts.is_empty() {
            return Err(NormalizeError::UnresolvableGuard {
                guard: combine_guards(self.conjuncts.iter()).to_string(),
            });
        }
        let growth = Quantity::add(Quantity::One, rate.clone());
        let slice_total = |s: &SymbolicSlice| s.values().cloned().reduce(Quantity::add);
        let mut slices = self.slices.iter().rev();
        let Some(last) = slices.next() else {
            return Ok(Quantity::Zero);
        };
        let mut capital =
            Quantity::max(slice_total(last).unwrap_or(Quantity::Zero), Quantity::Zero);
        for s in slices {
            let carried = Quantity::div(capital, growth.clone());
            let need = match slice_total(s) {
                Some(total) => Quantity::add(total, carried),
                None => carried,
            };
            capital = Quantity::max(need, Quantity::Zero);
        }
        Ok(capital)
    }
}

fn combine_guards<'a>(qs: impl Iterator<Item = &'a Quantity>) -> Quantity {
    let qs: Vec<&Quantity> = qs.collect();
    match qs.as_slice() {
        [] => Quantity::Zero,
        [only] => (*only).clone(),
        many => many
            .iter()
            .map(|q| Quantity::div((*q).clone(), (*q).clone()))
            .reduce(Quantity::add)
            .expect("at least two conjuncts"),
    }
}

/// Replaces implicit-capital subterms by their symbolic values.
fn resolve(q: &Quantity) -> Result<Quantity, NormalizeError> {
    let r = |x: &Quantity| resolve(x).map(Box::new);
    Ok(match q {
        Quantity::Zero | Quantity::One | Quantity::Num(_) | Quantity::Var(_) => q.clone(),
        Quantity::Add(a, b) => Quantity::Add(r(a)?, r(b)?),
        Quantity::Mul(a, b) => Quantity::Mul(r(a)?, r(b)?),
        Quantity::Neg(a) => Quantity::Neg(r(a)?),
        Quantity::Inv(a) => Quantity::Inv(r(a)?),
        Quantity::Sign(a) => Quantity::Sign(r(a)?),
        Quantity::ICap(rate, body) => normalize(body)?.icap(&resolve(rate)?)?,
    })
}

/// Normalizes a tuplix term to canonical form.
pub fn normalize(t: &Tuplix) -> Result<CanonicalTuplix, NormalizeError> {
    Ok(match t {
        Tuplix::Empty => CanonicalTuplix::default(),
        Tuplix::Block => CanonicalTuplix::blocked(),
        Tuplix::Transfer(a, q) => CanonicalTuplix {
            slices: vec![SymbolicSlice::from([(a.clone(), resolve(q)?)])],
            ..Default::default()
        },
        Tuplix::ZeroTest(q) => {
            let mut c = CanonicalTuplix::default();
            c.add_guard(resolve(q)?);
            c
        }
        Tuplix::Conj(a, b) => normalize(a)?.conj(normalize(b)?),
        Tuplix::Delay(x) => normalize(x)?.delay(),
        Tuplix::PreAbstr(i, x) => normalize(x)?.pabstr(i),
        Tuplix::IntEncap(h, rate, x) => {
            let rate = resolve(rate)?;
            normalize(x)?.iencap(h, &rate)
        }
    })
}

/// Rebuilds a term from canonical form.
pub fn reify(c: &CanonicalTuplix) -> Tuplix {
    reify_with(c, true)
}

/// Like [`reify`], but without the interest side conditions. The result
/// agrees with the original term in the model under every assignment,
/// including those where a side condition fails.
pub fn reify_unconditional(c: &CanonicalTuplix) -> Tuplix {
    reify_with(c, false)
}

fn reify_with(c: &CanonicalTuplix, side_conditions: bool) -> Tuplix {
    if c.blocked {
        return Tuplix::Block;
    }
    let guard = if side_conditions {
        c.guard()
    } else {
        combine_guards(c.conjuncts.iter())
    };
    let mut parts: Vec<Tuplix> = Vec::new();
    if guard != Quantity::Zero {
        parts.push(Tuplix::test(guard));
    }
    parts.extend(slice_parts(&c.slices));
    Tuplix::conj_all(parts)
}

/// `s0 & delay(s1 & delay(...))` as a list of left-nested conjuncts.
fn slice_parts(slices: &[SymbolicSlice]) -> Vec<Tuplix> {
    let Some((first, rest)) = slices.split_first() else {
        return Vec::new();
    };
    let mut parts: Vec<Tuplix> = first
        .iter()
        .map(|(a, q)| Tuplix::transfer(a.clone(), q.clone()))
        .collect();
    if !rest.is_empty() {
        parts.push(Tuplix::delay(Tuplix::conj_all(slice_parts(rest))));
    }
    parts
}
