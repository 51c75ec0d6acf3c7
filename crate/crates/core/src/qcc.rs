//! The quantum coupon collector learner.
//!
//! When `3m ln(em) > n` the learner measures every quantum sample in the
//! computational basis and keeps the distinct outcomes. Otherwise it learns the
//! complement of `S`: it keeps a guess `G` for the complement and, per sample,
//!
//! 1. measures `psi_S` with `(Pi_G, I - Pi_G)`; on outcome 0 it measures the
//!    residual in the computational basis and removes the result from `G`;
//! 2. on outcome 1 it measures the residual with `(|psi_U><psi_U|, I - ...)`
//!    for `U = [n] \ G`; on a second outcome 1 it measures in the computational
//!    basis and adds the result to `G`.
//!
//! The complement loop runs on either of two engines: the exact state-vector
//! simulation, or direct sampling from the one-step distribution derived in
//! [`crate::markov`], which is what the state-vector engine realizes.

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::{transition_distribution, TransitionDistribution};
use crate::statevec::exact::ExactVector;
use crate::statevec::{measure, measure_computational, uniform_state, Projector};
use crate::subset::Subset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QccParams {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub m: usize,
}

impl QccParams {
    pub fn new(n: usize, k: usize, delta: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParams(format!("n must be at least 3, got {n}")));
        }
        if !(1 < k && k < n) {
            return Err(Error::InvalidParams(format!("need 1 < k < n, got k={k}, n={n}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParams(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(QccParams { n, k, delta, m: n - k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// Measure every sample in the computational basis.
    Classical,
    /// Learn the complement of `S`.
    Complement,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Classical => "classical",
            Branch::Complement => "complement",
        }
    }
}

/// Branch selection and sample count:
/// `ceil(k ln k + k ln(1/delta))` when `3m ln(em) > n`,
/// `ceil(k ln m + k ln(e/delta))` otherwise.
pub fn sample_budget(params: &QccParams) -> (Branch, usize) {
    let (k, m, delta) = (params.k as f64, params.m as f64, params.delta);
    if crate::markov::in_complement_regime(params.n, params.k) {
        let ell = k * m.ln() + k * (std::f64::consts::E / delta).ln();
        (Branch::Complement, (ell.ceil() as usize).max(1))
    } else {
        let ell = k * k.ln() + k * (1.0 / delta).ln();
        (Branch::Classical, (ell.ceil() as usize).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Event {
    RogueRemoved,
    RogueAdded,
    CouponCollected,
    NoOp,
}

impl Event {
    pub const ALL: [Event; 4] = [Event::RogueRemoved, Event::RogueAdded, Event::CouponCollected, Event::NoOp];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Guess `G` for the complement of `S` and its complement `U = [n] \ G`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    guess: Subset,
    candidates: Subset,
}

impl LearnerState {
    pub fn initial(n: usize) -> Self {
        LearnerState { guess: Subset::empty(n), candidates: Subset::full(n) }
    }

    pub fn with_guess(guess: Subset) -> Self {
        let candidates = guess.complement();
        LearnerState { guess, candidates }
    }

    pub fn guess(&self) -> &Subset {
        &self.guess
    }

    pub fn candidates(&self) -> &Subset {
        &self.candidates
    }

    /// `(J, L) = (|G ∩ S|, |[n] \ S \ G|)`.
    pub fn walk_state(&self, s: &Subset) -> (usize, usize) {
        let j = self.guess.intersection(s).len();
        let collected = self.guess.len() - j;
        let m = self.guess.ground_size() - s.len();
        (j, m - collected)
    }

    fn check(&self) -> Result<()> {
        let n = self.guess.ground_size();
        if self.guess.len() + self.candidates.len() != n
            || !self.guess.intersection(&self.candidates).is_empty()
        {
            return Err(Error::InvariantViolation(format!(
                "G = {} and U = {} do not partition [{n}]",
                self.guess, self.candidates
            )));
        }
        Ok(())
    }

    fn remove(&mut self, x: usize) -> Result<()> {
        if !self.guess.remove(x) {
            return Err(Error::InvariantViolation(format!("{x} is not in the guess")));
        }
        self.candidates.insert(x)?;
        Ok(())
    }

    fn add(&mut self, x: usize) -> Result<()> {
        if !self.candidates.remove(x) {
            return Err(Error::InvariantViolation(format!("{x} is already in the guess")));
        }
        self.guess.insert(x)?;
        Ok(())
    }
}

/// Outcome of one learner run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub success: bool,
    pub output_set: Subset,
    pub events: Vec<Event>,
    /// `(J_t, L_t)` for `t = 0..=iterations`.
    pub walk: Vec<(usize, usize)>,
}

impl TrialRecord {
    /// `success`, `J + L = 0` at the end and `output_set == S` must agree.
    pub fn check(&self, s: &Subset) -> Result<()> {
        let (j, l) = *self.walk.last().unwrap_or(&(0, 0));
        let by_walk = j + l == 0;
        let by_set = &self.output_set == s;
        if self.success != by_walk || self.success != by_set {
            return Err(Error::InvariantViolation(format!(
                "success={} but J+L={} and output==S is {by_set}",
                self.success,
                j + l
            )));
        }
        if self.walk.len() != self.events.len() + 1 {
            return Err(Error::InvariantViolation("walk length must be events + 1".into()));
        }
        Ok(())
    }

    pub fn iterations(&self) -> usize {
        self.events.len()
    }
}

/// Which simulation backs the complement loop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum Engine {
    /// Samples the event from the derived one-step distribution, then the
    /// affected element uniformly from the matching set.
    #[default]
    Categorical,
    /// Runs the projective measurements on the state-vector engine.
    StateVector,
}

fn check_hidden(params: &QccParams, s: &Subset) -> Result<()> {
    if s.len() != params.k || s.ground_size() != params.n {
        return Err(Error::InvalidParams(format!(
            "hidden set must have {} elements out of {}, got {} out of {}",
            params.k,
            params.n,
            s.len(),
            s.ground_size()
        )));
    }
    Ok(())
}

/// Measures `ell` copies of `psi_S` in the computational basis. The walk
/// records `(0, number of unseen elements of S)` after each sample.
pub fn run_classical_branch<R: Rng + ?Sized>(
    params: &QccParams,
    s: &Subset,
    ell: usize,
    rng: &mut R,
) -> Result<TrialRecord> {
    check_hidden(params, s)?;
    run_classical_measurements(s, ell, rng)
}

pub(crate) fn run_classical_measurements<R: Rng + ?Sized>(
    s: &Subset,
    ell: usize,
    rng: &mut R,
) -> Result<TrialRecord> {
    let k = s.len();
    let mut seen = vec![false; k];
    let mut missing = k;
    let mut events = Vec::with_capacity(ell);
    let mut walk = Vec::with_capacity(ell + 1);
    walk.push((0, missing));
    for _ in 0..ell {
        // A computational-basis measurement of psi_S is a uniform draw from S.
        let pos = rng.random_range(0..k);
        if seen[pos] {
            events.push(Event::NoOp);
        } else {
            seen[pos] = true;
            missing -= 1;
            events.push(Event::CouponCollected);
        }
        walk.push((0, missing));
    }
    let output_set = Subset::new(
        s.ground_size(),
        s.elements().iter().zip(&seen).filter(|(_, &v)| v).map(|(&e, _)| e),
    )?;
    Ok(TrialRecord { success: missing == 0, output_set, events, walk })
}

/// One iteration of the complement loop on the state-vector engine.
pub fn step<R: Rng + ?Sized>(state: &LearnerState, s: &Subset, rng: &mut R) -> Result<(Event, LearnerState)> {
    state.check()?;
    let n = s.ground_size();
    let psi = uniform_state(s, n)?;
    let mut next = state.clone();
    let (a, xi) = measure(&psi, &Projector::subset(state.guess.clone()), rng)?;
    let event = if a == 0 {
        if state.guess.intersection(s).is_empty() {
            return Err(Error::InvariantViolation("outcome 0 with no rogue coupons".into()));
        }
        let x = measure_computational(&xi, rng)?;
        if !s.contains(x) {
            return Err(Error::InvariantViolation(format!("removed {x} is not a rogue coupon")));
        }
        next.remove(x)?;
        Event::RogueRemoved
    } else {
        let psi_u = uniform_state(&state.candidates, n)?;
        let (b, phi) = measure(&xi, &Projector::rank1(psi_u)?, rng)?;
        if b == 1 {
            let x = measure_computational(&phi, rng)?;
            next.add(x)?;
            if s.contains(x) {
                Event::RogueAdded
            } else {
                Event::CouponCollected
            }
        } else {
            Event::NoOp
        }
    };
    next.check()?;
    Ok((event, next))
}

/// One iteration sampled from the derived one-step distribution.
pub fn step_categorical<R: Rng + ?Sized>(
    state: &LearnerState,
    s: &Subset,
    rng: &mut R,
) -> Result<(Event, LearnerState)> {
    state.check()?;
    let (j, l) = state.walk_state(s);
    let event = sample_event(&transition_distribution(s.len(), j, l)?, rng);
    let mut next = state.clone();
    let pick = |pool: Vec<usize>, rng: &mut R| pool[rng.random_range(0..pool.len())];
    match event {
        Event::RogueRemoved => next.remove(pick(state.guess.intersection(s).elements().to_vec(), rng))?,
        Event::RogueAdded => next.add(pick(state.candidates.intersection(s).elements().to_vec(), rng))?,
        Event::CouponCollected => next.add(pick(state.candidates.difference(s).elements().to_vec(), rng))?,
        Event::NoOp => {}
    }
    Ok((event, next))
}

fn sample_event<R: Rng + ?Sized>(d: &TransitionDistribution, rng: &mut R) -> Event {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (event, p) in Event::ALL.into_iter().zip(d.as_array()) {
        acc += p;
        if u < acc && p > 0.0 {
            return event;
        }
    }
    // u landed in the rounding gap above the last partial sum.
    Event::ALL
        .into_iter()
        .zip(d.as_array())
        .rev()
        .find(|(_, p)| *p > 0.0)
        .map(|(e, _)| e)
        .unwrap_or(Event::NoOp)
}

/// Runs `ell` iterations of the complement loop from `G = ∅`.
pub fn run_complement_branch<R: Rng + ?Sized>(
    params: &QccParams,
    s: &Subset,
    ell: usize,
    engine: Engine,
    rng: &mut R,
) -> Result<TrialRecord> {
    check_hidden(params, s)?;
    run_complement_from(LearnerState::initial(params.n), s, ell, engine, rng)
}

/// Runs `ell` iterations of the complement loop from an arbitrary guess.
pub fn run_complement_from<R: Rng + ?Sized>(
    start: LearnerState,
    s: &Subset,
    ell: usize,
    engine: Engine,
    rng: &mut R,
) -> Result<TrialRecord> {
    start.check()?;
    match engine {
        Engine::StateVector => {
            let mut state = start;
            let mut events = Vec::with_capacity(ell);
            let mut walk = Vec::with_capacity(ell + 1);
            walk.push(state.walk_state(s));
            for _ in 0..ell {
                let (event, next) = step(&state, s, rng)?;
                events.push(event);
                walk.push(next.walk_state(s));
                state = next;
            }
            let output_set = state.candidates;
            Ok(TrialRecord { success: &output_set == s, output_set, events, walk })
        }
        Engine::Categorical => run_categorical(start, s, ell, rng),
    }
}

/// Pool-based categorical engine: the four sets `G ∩ S`, `U ∩ S`, `G \ S`,
/// `U \ S` are kept as vectors so each step is O(1).
fn run_categorical<R: Rng + ?Sized>(
    start: LearnerState,
    s: &Subset,
    ell: usize,
    rng: &mut R,
) -> Result<TrialRecord> {
    let n = s.ground_size();
    let k = s.len();
    let in_s = s.mask();
    let in_g = start.guess.mask();
    let mut rogue = Vec::new();
    let mut free = Vec::new();
    let mut collected = Vec::new();
    let mut uncollected = Vec::new();
    for x in 0..n {
        match (in_s[x], in_g[x]) {
            (true, true) => rogue.push(x),
            (true, false) => free.push(x),
            (false, true) => collected.push(x),
            (false, false) => uncollected.push(x),
        }
    }
    let mut events = Vec::with_capacity(ell);
    let mut walk = Vec::with_capacity(ell + 1);
    walk.push((rogue.len(), uncollected.len()));
    for _ in 0..ell {
        let d = transition_distribution(k, rogue.len(), uncollected.len())?;
        let event = sample_event(&d, rng);
        let mover = |from: &mut Vec<usize>, to: &mut Vec<usize>, rng: &mut R| -> Result<()> {
            if from.is_empty() {
                return Err(Error::InvariantViolation(format!("sampled {event:?} from an empty pool")));
            }
            let idx = rng.random_range(0..from.len());
            to.push(from.swap_remove(idx));
            Ok(())
        };
        match event {
            Event::RogueRemoved => mover(&mut rogue, &mut free, rng)?,
            Event::RogueAdded => mover(&mut free, &mut rogue, rng)?,
            Event::CouponCollected => mover(&mut uncollected, &mut collected, rng)?,
            Event::NoOp => {}
        }
        events.push(event);
        walk.push((rogue.len(), uncollected.len()));
    }
    let output_set = Subset::new(n, free.iter().chain(&uncollected).copied())?;
    Ok(TrialRecord { success: &output_set == s, output_set, events, walk })
}

/// Runs the full learner: picks the branch and sample count, then simulates.
/// `samples` overrides the budget.
pub fn run_trial<R: Rng + ?Sized>(
    params: &QccParams,
    s: &Subset,
    samples: Option<usize>,
    engine: Engine,
    rng: &mut R,
) -> Result<(Branch, TrialRecord)> {
    let (branch, budget) = sample_budget(params);
    let ell = samples.unwrap_or(budget);
    let record = match branch {
        Branch::Classical => run_classical_branch(params, s, ell, rng)?,
        Branch::Complement => run_complement_branch(params, s, ell, engine, rng)?,
    };
    record.check(s)?;
    Ok((branch, record))
}

/// Canonical configuration with `|S| = k`, `m` complement elements, `j` rogue
/// coupons and `l` uncollected complement elements: `S = {0..k-1}`, the rogue
/// coupons are the first `j` elements of `S`, and the guess holds all but the
/// last `l` complement elements.
pub fn canonical_configuration(k: usize, m: usize, j: usize, l: usize) -> Result<(Subset, LearnerState)> {
    if j > k || l > m || k == 0 {
        return Err(Error::InvalidState { k, j, l });
    }
    let n = k + m;
    let s = Subset::new(n, 0..k)?;
    let guess = Subset::new(n, (0..j).chain(k..n - l))?;
    Ok((s, LearnerState::with_guess(guess)))
}

/// One-step event probabilities computed by walking the measurement tree on
/// the floating-point state-vector engine.
pub fn event_distribution_statevec(k: usize, m: usize, j: usize, l: usize) -> Result<TransitionDistribution> {
    let (s, state) = canonical_configuration(k, m, j, l)?;
    let n = k + m;
    let psi = uniform_state(&s, n)?;
    let first = Projector::subset(state.guess.clone());
    let p_first_zero = first.probability_zero(&psi)?;
    let mut d = TransitionDistribution { rogue_removed: p_first_zero, rogue_added: 0.0, coupon_collected: 0.0, no_op: 0.0 };
    let p_first_one = 1.0 - p_first_zero;
    if p_first_one <= crate::statevec::DEGENERATE_BRANCH {
        return Ok(d);
    }
    let xi = first.apply(&psi, 1)?.normalize()?;
    let second = Projector::rank1(uniform_state(&state.candidates, n)?)?;
    let residual = second.apply(&xi, 1)?;
    let p_second_one = residual.norm_sqr();
    d.no_op = p_first_one * (1.0 - p_second_one);
    if p_second_one > crate::statevec::DEGENERATE_BRANCH {
        let phi = residual.normalize()?;
        for (x, p) in phi.probabilities().into_iter().enumerate() {
            let w = p_first_one * p_second_one * p;
            if s.contains(x) {
                d.rogue_added += w;
            } else {
                d.coupon_collected += w;
            }
        }
    }
    Ok(d)
}

/// Exact counterpart of [`event_distribution_statevec`] on rational vectors.
pub fn event_distribution_exact(k: usize, m: usize, j: usize, l: usize) -> Result<TransitionDistribution<BigRational>> {
    let (s, state) = canonical_configuration(k, m, j, l)?;
    let psi = ExactVector::indicator(&s);
    let total = psi.norm_sqr();
    let zero = BigRational::zero();
    let p_first_zero = psi.project_subset(&state.guess, true)?.norm_sqr() / &total;
    let outside = psi.project_subset(&state.guess, false)?;
    let p_first_one = outside.norm_sqr() / &total;
    let mut d = TransitionDistribution {
        rogue_removed: p_first_zero,
        rogue_added: zero.clone(),
        coupon_collected: zero.clone(),
        no_op: zero.clone(),
    };
    if outside.is_zero() {
        return Ok(d);
    }
    let residual = outside.reflect_off(&ExactVector::indicator(&state.candidates))?;
    let p_second_one = residual.norm_sqr() / outside.norm_sqr();
    d.no_op = &p_first_one * (BigRational::from_integer(1.into()) - &p_second_one);
    if !residual.is_zero() {
        for (x, p) in residual.basis_distribution()?.into_iter().enumerate() {
            let w = &p_first_one * &p_second_one * p;
            if s.contains(x) {
                d.rogue_added += w;
            } else {
                d.coupon_collected += w;
            }
        }
    }
    Ok(d)
}
