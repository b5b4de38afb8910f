//! Seeded random generators for terms, rates and assignments.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ttc::model::eval_model;
use ttc::rewrite::{sample_value, Assignment};
use ttc::syntax::ActionSet;
use ttc::{Action, Quantity, Rational, Tuplix};

pub const ACTIONS: [&str; 4] = ["a", "b", "c", "iota"];
/// Delays nest at most this deep, so schedules have at most four slices.
pub const MAX_DELAYS: u32 = 3;
pub const MAX_DEPTH: u32 = 6;

pub struct Gen {
    pub rng: ChaCha8Rng,
    vars: Vec<String>,
}

impl Gen {
    /// Closed terms only.
    pub fn closed(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            vars: Vec::new(),
        }
    }

    /// Terms over the given quantity variables.
    pub fn open(seed: u64, vars: &[&str]) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            vars: vars.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn rational(&mut self) -> Rational {
        sample_value(&mut self.rng)
    }

    pub fn nonzero(&mut self) -> Rational {
        loop {
            let r = self.rational();
            if !r.is_zero() {
                return r;
            }
        }
    }

    /// A rate strictly above `-1`.
    pub fn rate(&mut self) -> Rational {
        let minus_one = Rational::one().neg();
        loop {
            let r = self.rational();
            if minus_one < r {
                return r;
            }
        }
    }

    pub fn action(&mut self) -> Action {
        Action::new(*ACTIONS.choose(&mut self.rng).expect("non-empty"))
    }

    pub fn action_set(&mut self) -> ActionSet {
        ACTIONS
            .iter()
            .filter(|_| self.rng.gen_bool(0.4))
            .map(|a| Action::new(*a))
            .collect()
    }

    pub fn assignment(&mut self, vars: &BTreeSet<String>) -> Assignment {
        vars.iter().map(|v| (v.clone(), self.rational())).collect()
    }

    fn leaf_quantity(&mut self) -> Quantity {
        if !self.vars.is_empty() && self.coin(0.4) {
            Quantity::var(self.vars.choose(&mut self.rng).expect("non-empty").clone())
        } else {
            Quantity::literal(&self.rational())
        }
    }

    pub fn quantity(&mut self, depth: u32) -> Quantity {
        if depth == 0 || self.coin(0.35) {
            return self.leaf_quantity();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..100) {
            0..=24 => Quantity::add(self.quantity(d), self.quantity(d)),
            25..=39 => Quantity::sub(self.quantity(d), self.quantity(d)),
            40..=54 => Quantity::mul(self.quantity(d), self.quantity(d)),
            55..=62 => Quantity::neg(self.quantity(d)),
            63..=72 => Quantity::div(self.quantity(d), self.quantity(d)),
            73..=78 => Quantity::sign(self.quantity(d)),
            79..=84 => Quantity::max(self.quantity(d), self.quantity(d)),
            85..=88 => Quantity::min(self.quantity(d), self.quantity(d)),
            89..=93 => Quantity::pow(self.quantity(d), self.rng.gen_range(0..=3)),
            _ => {
                let rate = self.leaf_quantity();
                Quantity::icap(rate, self.closed_body(d.min(2)))
            }
        }
    }

    /// Implicit-capital bodies are always closed.
    fn closed_body(&mut self, depth: u32) -> Tuplix {
        let vars = std::mem::take(&mut self.vars);
        let t = self.tuplix_within(depth, 1);
        self.vars = vars;
        t
    }

    fn test_argument(&mut self) -> Quantity {
        match self.rng.gen_range(0..4) {
            0 => Quantity::Zero,
            1 => {
                let q = self.quantity(1);
                Quantity::sub(q.clone(), q)
            }
            _ => self.quantity(1),
        }
    }

    pub fn leaf_tuplix(&mut self) -> Tuplix {
        match self.rng.gen_range(0..100) {
            0..=69 => {
                let a = self.action();
                Tuplix::transfer(a, self.quantity(2))
            }
            70..=79 => Tuplix::Empty,
            80..=95 => Tuplix::test(self.test_argument()),
            _ => Tuplix::Block,
        }
    }

    /// A random term of depth at most [`MAX_DEPTH`].
    pub fn tuplix(&mut self) -> Tuplix {
        self.tuplix_within(MAX_DEPTH, MAX_DELAYS)
    }

    pub fn tuplix_within(&mut self, depth: u32, delays: u32) -> Tuplix {
        if depth == 0 {
            return self.leaf_tuplix();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..100) {
            0..=34 => Tuplix::conj(self.tuplix_within(d, delays), self.tuplix_within(d, delays)),
            35..=54 if delays > 0 => Tuplix::delay(self.tuplix_within(d, delays - 1)),
            55..=64 => {
                let i = self.action_set();
                Tuplix::pabstr(i, self.tuplix_within(d, delays))
            }
            65..=79 => {
                let h = self.action_set();
                let rate = if self.coin(0.3) {
                    Quantity::Zero
                } else {
                    self.leaf_quantity()
                };
                Tuplix::iencap(h, rate, self.tuplix_within(d, delays))
            }
            _ => self.leaf_tuplix(),
        }
    }

    /// A closed term whose denotation is not blocked.
    pub fn behaviour(&mut self) -> Tuplix {
        loop {
            let t = self.tuplix();
            if t.is_closed() && !eval_model(&t).expect("closed").is_blocked() {
                return t;
            }
        }
    }
}
