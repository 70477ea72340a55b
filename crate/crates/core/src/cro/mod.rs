//! Generic Chemical Reaction Optimization engine.
//!
//! A population of [`Molecule`]s explores the search space of a [`Problem`].
//! Each step picks one of four elementary reactions:
//!
//! | kind            | molecules | objective evaluations | population change |
//! |-----------------|-----------|-----------------------|-------------------|
//! | on-wall         | 1         | 1                     | 0                 |
//! | decomposition   | 1         | 2                     | +1                |
//! | inter-molecular | 2         | 2                     | 0                 |
//! | synthesis       | 2         | 1                     | -1                |
//!
//! Potential energy is the objective value (minimised) and kinetic energy is
//! the allowance for accepting worse structures. Energy released by on-wall
//! collisions accumulates in a central buffer that decompositions may borrow
//! from, so `Σ(pe + ke) + buffer` stays constant for the whole run.

pub mod energy;

use std::ops::ControlFlow;

use rand::Rng;

use crate::{Error, Result};

/// Search space and objective plugged into the engine.
pub trait Problem {
    type Solution: Clone;

    fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Solution;
    fn neighbour<R: Rng + ?Sized>(&self, s: &Self::Solution, rng: &mut R) -> Self::Solution;
    fn decompose<R: Rng + ?Sized>(
        &self,
        s: &Self::Solution,
        rng: &mut R,
    ) -> (Self::Solution, Self::Solution);
    fn synthesize<R: Rng + ?Sized>(
        &self,
        a: &Self::Solution,
        b: &Self::Solution,
        rng: &mut R,
    ) -> Self::Solution;
    /// Potential energy of a solution; lower is better.
    fn objective(&self, s: &Self::Solution) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CroParams {
    pub pop_size: usize,
    pub initial_ke: f64,
    pub buffer_init: f64,
    /// Probability threshold for choosing an inter-molecular reaction.
    pub mole_coll: f64,
    /// Lower bound of the KE fraction retained after an on-wall collision.
    pub ke_loss_rate: f64,
    /// Hits without personal-best improvement before decomposition (α).
    pub decomp_threshold: u64,
    /// KE at or below which two colliding molecules synthesise (β).
    pub synth_threshold: f64,
    /// Objective evaluation budget.
    pub fe_limit: u64,
}

impl Default for CroParams {
    fn default() -> Self {
        CroParams {
            pop_size: 20,
            initial_ke: 100.0,
            buffer_init: 0.0,
            mole_coll: 0.1,
            ke_loss_rate: 0.1,
            decomp_threshold: 300,
            synth_threshold: 500.0,
            fe_limit: 50_000,
        }
    }
}

impl CroParams {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size == 0 {
            return Err(Error::config("cro.pop_size must be at least 1"));
        }
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!(
                    "cro.{name} must be a finite non-negative number, got {v}"
                )))
            }
        };
        non_negative("initial_ke", self.initial_ke)?;
        non_negative("buffer_init", self.buffer_init)?;
        for (name, v) in [
            ("mole_coll", self.mole_coll),
            ("ke_loss_rate", self.ke_loss_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!(
                    "cro.{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.decomp_threshold == 0 {
            return Err(Error::config("cro.decomp_threshold must be positive"));
        }
        if self.synth_threshold.is_nan() || self.synth_threshold <= 0.0 {
            return Err(Error::config("cro.synth_threshold must be positive"));
        }
        if self.fe_limit < self.pop_size as u64 {
            return Err(Error::config(format!(
                "cro.fe_limit ({}) is smaller than the evaluations needed for the initial population ({})",
                self.fe_limit, self.pop_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule<S> {
    pub structure: S,
    pub pe: f64,
    pub ke: f64,
    pub num_hit: u64,
    /// `num_hit` at the last personal-best improvement.
    pub min_hit: u64,
    pub min_pe: f64,
    pub min_structure: S,
}

impl<S: Clone> Molecule<S> {
    pub fn new(structure: S, pe: f64, ke: f64) -> Self {
        Molecule {
            min_structure: structure.clone(),
            structure,
            pe,
            ke,
            num_hit: 0,
            min_hit: 0,
            min_pe: pe,
        }
    }

    fn adopt(&mut self, structure: S, pe: f64, ke: f64) {
        self.num_hit += 1;
        if pe < self.min_pe {
            self.min_pe = pe;
            self.min_structure = structure.clone();
            self.min_hit = self.num_hit;
        }
        self.structure = structure;
        self.pe = pe;
        self.ke = ke;
    }

    /// Hits since the last personal-best improvement.
    pub fn stagnation(&self) -> u64 {
        self.num_hit - self.min_hit
    }
}

/// An elementary reaction and the population indices taking part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reaction {
    OnWall(usize),
    Decomposition(usize),
    Intermolecular(usize, usize),
    Synthesis(usize, usize),
}

impl Reaction {
    /// Objective evaluations the reaction consumes.
    pub fn evaluations(&self) -> u64 {
        match self {
            Reaction::OnWall(_) | Reaction::Synthesis(..) => 1,
            Reaction::Decomposition(_) | Reaction::Intermolecular(..) => 2,
        }
    }

    pub fn is_unimolecular(&self) -> bool {
        matches!(self, Reaction::OnWall(_) | Reaction::Decomposition(_))
    }
}

/// How many reactions of each kind were attempted and accepted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReactionTally {
    pub attempted: [u64; 4],
    pub accepted: [u64; 4],
}

impl ReactionTally {
    fn record(&mut self, r: Reaction, accepted: bool) {
        let k = match r {
            Reaction::OnWall(_) => 0,
            Reaction::Decomposition(_) => 1,
            Reaction::Intermolecular(..) => 2,
            Reaction::Synthesis(..) => 3,
        };
        self.attempted[k] += 1;
        self.accepted[k] += u64::from(accepted);
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome<S> {
    pub best: S,
    pub best_pe: f64,
    pub fe_count: u64,
    /// True when the stop callback ended the run before the FE budget.
    pub stopped_early: bool,
}

/// Engine state for one optimisation run.
pub struct Engine<P: Problem, R> {
    params: CroParams,
    problem: P,
    rng: R,
    population: Vec<Molecule<P::Solution>>,
    buffer: f64,
    fe_count: u64,
    best_pe: f64,
    best: P::Solution,
    initial_energy: f64,
    tally: ReactionTally,
}

impl<P: Problem, R: Rng> Engine<P, R> {
    /// Generates and evaluates `pop_size` molecules.
    pub fn new(params: CroParams, problem: P, mut rng: R) -> Result<Self> {
        params.validate()?;
        let population: Vec<_> = (0..params.pop_size)
            .map(|_| {
                let s = problem.generate(&mut rng);
                let pe = problem.objective(&s);
                Molecule::new(s, pe, params.initial_ke)
            })
            .collect();
        Ok(Self::from_population(
            params,
            problem,
            rng,
            population,
            params.buffer_init,
            params.pop_size as u64,
        ))
    }

    fn from_population(
        params: CroParams,
        problem: P,
        rng: R,
        population: Vec<Molecule<P::Solution>>,
        buffer: f64,
        fe_count: u64,
    ) -> Self {
        assert!(!population.is_empty());
        let best_idx = population
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.pe.total_cmp(&b.1.pe))
            .map(|(i, _)| i)
            .unwrap();
        let initial_energy = population.iter().map(|m| m.pe + m.ke).sum::<f64>() + buffer;
        Engine {
            params,
            best_pe: population[best_idx].pe,
            best: population[best_idx].structure.clone(),
            problem,
            rng,
            population,
            buffer,
            fe_count,
            initial_energy,
            tally: ReactionTally::default(),
        }
    }

    pub fn params(&self) -> &CroParams {
        &self.params
    }

    pub fn problem(&self) -> &P {
        &self.problem
    }

    pub fn population(&self) -> &[Molecule<P::Solution>] {
        &self.population
    }

    pub fn buffer(&self) -> f64 {
        self.buffer
    }

    pub fn fe_count(&self) -> u64 {
        self.fe_count
    }

    pub fn best_pe(&self) -> f64 {
        self.best_pe
    }

    /// Best structure evaluated so far, including ones whose molecule has
    /// since been destroyed or whose reaction was rejected.
    pub fn best(&self) -> &P::Solution {
        &self.best
    }

    pub fn tally(&self) -> ReactionTally {
        self.tally
    }

    /// `Σ(pe + ke) + buffer`.
    pub fn total_energy(&self) -> f64 {
        self.population.iter().map(|m| m.pe + m.ke).sum::<f64>() + self.buffer
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    fn evaluate(&mut self, s: &P::Solution) -> f64 {
        self.fe_count += 1;
        let pe = self.problem.objective(s);
        if pe < self.best_pe {
            self.best_pe = pe;
            self.best = s.clone();
        }
        pe
    }

    /// Chooses the next reaction and its participants.
    pub fn select_reaction(&mut self) -> Reaction {
        let n = self.population.len();
        let t: f64 = self.rng.random();
        if t > self.params.mole_coll || n == 1 {
            let i = self.rng.random_range(0..n);
            if self.population[i].stagnation() > self.params.decomp_threshold {
                Reaction::Decomposition(i)
            } else {
                Reaction::OnWall(i)
            }
        } else {
            let i = self.rng.random_range(0..n);
            let mut j = self.rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let beta = self.params.synth_threshold;
            if self.population[i].ke <= beta && self.population[j].ke <= beta {
                Reaction::Synthesis(i, j)
            } else {
                Reaction::Intermolecular(i, j)
            }
        }
    }

    pub fn on_wall(&mut self, i: usize) -> bool {
        let candidate = self
            .problem
            .neighbour(&self.population[i].structure, &mut self.rng);
        self.on_wall_with(i, candidate)
    }

    /// On-wall collision of molecule `i` against a supplied candidate.
    pub fn on_wall_with(&mut self, i: usize, candidate: P::Solution) -> bool {
        let new_pe = self.evaluate(&candidate);
        let m = &self.population[i];
        let retain = self.rng.random_range(self.params.ke_loss_rate..=1.0);
        match energy::on_wall(m.pe, m.ke, new_pe, retain) {
            Some(out) => {
                self.buffer += out.to_buffer;
                self.population[i].adopt(candidate, new_pe, out.ke);
                true
            }
            None => {
                self.population[i].num_hit += 1;
                false
            }
        }
    }

    pub fn decompose(&mut self, i: usize) -> bool {
        let (a, b) = self
            .problem
            .decompose(&self.population[i].structure, &mut self.rng);
        self.decompose_with(i, a, b)
    }

    pub fn decompose_with(&mut self, i: usize, first: P::Solution, second: P::Solution) -> bool {
        let pe1 = self.evaluate(&first);
        let pe2 = self.evaluate(&second);
        let m = &self.population[i];
        let rng = &mut self.rng;
        let outcome = energy::decomposition(m.pe, m.ke, pe1, pe2, self.buffer, || rng.random());
        match outcome {
            Some(out) => {
                self.buffer = out.buffer;
                self.population[i] = Molecule::new(first, pe1, out.ke1);
                self.population.push(Molecule::new(second, pe2, out.ke2));
                true
            }
            None => {
                self.population[i].num_hit += 1;
                false
            }
        }
    }

    pub fn collide(&mut self, i: usize, j: usize) -> bool {
        let a = self
            .problem
            .neighbour(&self.population[i].structure, &mut self.rng);
        let b = self
            .problem
            .neighbour(&self.population[j].structure, &mut self.rng);
        self.collide_with(i, j, a, b)
    }

    /// Inter-molecular ineffective collision of molecules `i` and `j`.
    pub fn collide_with(
        &mut self,
        i: usize,
        j: usize,
        first: P::Solution,
        second: P::Solution,
    ) -> bool {
        assert_ne!(i, j, "a molecule cannot collide with itself");
        let pe1 = self.evaluate(&first);
        let pe2 = self.evaluate(&second);
        let (m1, m2) = (&self.population[i], &self.population[j]);
        let rng = &mut self.rng;
        match energy::intermolecular(m1.pe, m1.ke, m2.pe, m2.ke, pe1, pe2, || rng.random()) {
            Some((ke1, ke2)) => {
                self.population[i].adopt(first, pe1, ke1);
                self.population[j].adopt(second, pe2, ke2);
                true
            }
            None => {
                self.population[i].num_hit += 1;
                self.population[j].num_hit += 1;
                false
            }
        }
    }

    pub fn synthesize(&mut self, i: usize, j: usize) -> bool {
        let child = self.problem.synthesize(
            &self.population[i].structure,
            &self.population[j].structure,
            &mut self.rng,
        );
        self.synthesize_with(i, j, child)
    }

    /// Synthesis of molecules `i` and `j` into `child`.
    pub fn synthesize_with(&mut self, i: usize, j: usize, child: P::Solution) -> bool {
        assert_ne!(i, j, "a molecule cannot synthesise with itself");
        let new_pe = self.evaluate(&child);
        let (m1, m2) = (&self.population[i], &self.population[j]);
        match energy::synthesis(m1.pe, m1.ke, m2.pe, m2.ke, new_pe) {
            Some(ke) => {
                self.population[i] = Molecule::new(child, new_pe, ke);
                self.population.swap_remove(j);
                true
            }
            None => {
                self.population[i].num_hit += 1;
                self.population[j].num_hit += 1;
                false
            }
        }
    }

    /// Applies `r`, generating candidates with the problem's operators.
    pub fn apply(&mut self, r: Reaction) -> bool {
        let accepted = match r {
            Reaction::OnWall(i) => self.on_wall(i),
            Reaction::Decomposition(i) => self.decompose(i),
            Reaction::Intermolecular(i, j) => self.collide(i, j),
            Reaction::Synthesis(i, j) => self.synthesize(i, j),
        };
        self.tally.record(r, accepted);
        accepted
    }

    /// Runs one reaction if budget remains. A two-evaluation reaction drawn
    /// with a single evaluation left is replaced by an on-wall collision of
    /// its first molecule so the budget is never exceeded.
    pub fn step(&mut self) -> Option<(Reaction, bool)> {
        let remaining = self.params.fe_limit.saturating_sub(self.fe_count);
        if remaining == 0 {
            return None;
        }
        let mut r = self.select_reaction();
        if r.evaluations() > remaining {
            r = match r {
                Reaction::Decomposition(i) | Reaction::Intermolecular(i, _) => Reaction::OnWall(i),
                other => other,
            };
        }
        let accepted = self.apply(r);
        Some((r, accepted))
    }

    /// Reacts until the FE budget is spent or `stop` breaks. `stop` sees the
    /// engine after every reaction.
    pub fn run(
        &mut self,
        mut stop: impl FnMut(&Self) -> ControlFlow<()>,
    ) -> RunOutcome<P::Solution> {
        let mut stopped_early = false;
        while self.step().is_some() {
            if stop(self).is_break() {
                stopped_early = self.fe_count < self.params.fe_limit;
                break;
            }
        }
        RunOutcome {
            best: self.best.clone(),
            best_pe: self.best_pe,
            fe_count: self.fe_count,
            stopped_early,
        }
    }
}
