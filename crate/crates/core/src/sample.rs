//! Optimizers over a QUBO at fixed penalty strength.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::encode::QuboPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub bits: BitString,
    pub f: f64,
}

/// Minimum of `f` over all bitstrings; ties go to the smallest index.
pub fn exhaustive_min(q: &QuboPair, gamma: f64, cap: usize) -> Result<Sample> {
    let n = q.n();
    if n > cap || n >= 64 {
        return Err(Error::CapExceeded { n, cap });
    }
    let (idx, f) = (0..1u64 << n)
        .into_par_iter()
        .map(|idx| (idx, q.cost().evaluate_index(idx) + gamma * q.penalty().evaluate_index(idx)))
        .reduce(
            || (u64::MAX, f64::INFINITY),
            |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    Ok(Sample {
        bits: BitString::from_index(idx, n),
        f,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentStep {
    pub flip_index: usize,
    pub f_before: f64,
    pub f_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentTrace {
    pub start: BitString,
    pub steps: Vec<DescentStep>,
    pub final_bits: BitString,
    pub final_f: f64,
}

impl DescentTrace {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }
}

/// Best-improvement descent: repeatedly take the flip with the largest
/// strict decrease of `f` (lowest index on ties) until none remains.
pub fn greedy_descent(q: &QuboPair, gamma: f64, start: &[bool]) -> Result<DescentTrace> {
    let mut current = BitString::from(start.to_vec());
    let mut f = q.evaluate(&current, gamma)?;
    let mut steps = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for u in 0..q.n() {
            current.flip(u);
            let f_u = q.cost().evaluate(&current) + gamma * q.penalty().evaluate(&current);
            current.flip(u);
            if f_u < best.map_or(f, |(_, b)| b) {
                best = Some((u, f_u));
            }
        }
        let Some((u, f_after)) = best else { break };
        current.flip(u);
        steps.push(DescentStep {
            flip_index: u,
            f_before: f,
            f_after,
        });
        f = f_after;
    }
    Ok(DescentTrace {
        start: BitString::from(start.to_vec()),
        steps,
        final_bits: current,
        final_f: f,
    })
}

/// Greedy polish of an externally produced sample.
pub fn sample_and_polish(q: &QuboPair, gamma: f64, sample: &[bool]) -> Result<DescentTrace> {
    greedy_descent(q, gamma, sample)
}

/// Geometric-cooling single-flip Metropolis schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    pub cooling: f64,
    pub sweeps: usize,
    pub restarts: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            initial_temperature: 10.0,
            cooling: 0.95,
            sweeps: 200,
            restarts: 0,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(Error::Schedule(format!(
                "initial temperature must be positive, got {}",
                self.initial_temperature
            )));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::Schedule(format!("cooling factor must lie in (0, 1), got {}", self.cooling)));
        }
        if self.sweeps == 0 {
            return Err(Error::Schedule("sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// Combined `f` as per-variable linear weights and neighbour lists, for
/// O(degree) flip deltas.
struct LocalFields {
    linear: Vec<f64>,
    couplings: Vec<Vec<(usize, f64)>>,
}

impl LocalFields {
    fn new(q: &QuboPair, gamma: f64) -> Self {
        let n = q.n();
        let mut linear = vec![0.0; n];
        let mut couplings = vec![Vec::new(); n];
        for (form, scale) in [(q.cost(), 1.0), (q.penalty(), gamma)] {
            for (&(u, v), &w) in form.terms() {
                if u == v {
                    linear[u] += scale * w;
                } else {
                    couplings[u].push((v, scale * w));
                    couplings[v].push((u, scale * w));
                }
            }
        }
        LocalFields { linear, couplings }
    }

    fn delta(&self, bits: &[bool], u: usize) -> f64 {
        let field = self.linear[u]
            + self.couplings[u]
                .iter()
                .filter(|(v, _)| bits[*v])
                .map(|(_, w)| w)
                .sum::<f64>();
        if bits[u] {
            -field
        } else {
            field
        }
    }
}

/// Simulated annealing with ChaCha8 streams: restart `r` draws from stream
/// `r` of the generator seeded with `seed`, so every run is reproducible.
/// Returns the lowest-energy state visited over all restarts.
pub fn simulated_annealing(q: &QuboPair, gamma: f64, schedule: &AnnealSchedule, seed: u64) -> Result<Sample> {
    schedule.validate()?;
    let n = q.n();
    let fields = LocalFields::new(q, gamma);
    let runs: Vec<Sample> = (0..=schedule.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            let mut bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let mut f = q.evaluate(&bits, gamma).expect("length matches");
            let mut best_bits = bits.clone();
            let mut best_f = f;
            let mut temperature = schedule.initial_temperature;
            for _ in 0..schedule.sweeps {
                for u in 0..n {
                    let delta = fields.delta(&bits, u);
                    if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                        bits[u] = !bits[u];
                        f += delta;
                        if f < best_f {
                            best_f = f;
                            best_bits.clone_from(&bits);
                        }
                    }
                }
                temperature *= schedule.cooling;
            }
            let f = q.evaluate(&best_bits, gamma).expect("length matches");
            Sample {
                bits: BitString::from(best_bits),
                f,
            }
        })
        .collect();
    Ok(runs
        .into_iter()
        .reduce(|a, b| {
            if b.f < a.f || (b.f == a.f && b.bits.to_index() < a.bits.to_index()) {
                b
            } else {
                a
            }
        })
        .expect("at least one run"))
}
