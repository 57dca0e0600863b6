//! Seeded population simulation of the solved game.
//!
//! Every sample draws both agent types and a full price path from its own
//! ChaCha stream, selected by the sample index under the master seed, then
//! plays the solved strategy profile to the end. Samples are processed in
//! fixed-size chunks whose partial sums are combined in chunk order, so the
//! result is bit-identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{
    settle, Action, AgentId, AgentType, DecisionNode, GameSpec, HistoryState, Move, Settlement,
};
use crate::scalar::Scalar;
use crate::solver::{solve, StrategyProfile};

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub spec: GameSpec<T>,
    pub samples: u64,
    pub seed: u64,
    /// Parallelism hint; never changes the result.
    pub workers: usize,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(spec: GameSpec<T>, samples: u64, seed: u64) -> Self {
        Self {
            spec,
            samples,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Loss statistics of the agent left holding the last unanswered transfer
/// when the swap stops at a given exit step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExitStats {
    pub count: u64,
    /// Value of the unmatched packet at the exit price: `P / N` when Alice
    /// sent it, `p0 / N` when Bob did.
    pub max_exposure_loss: f64,
    pub sum_exposure_loss: f64,
    /// Largest mark-to-market loss `-beta * Y` of that agent.
    pub max_financial_loss: f64,
}

impl ExitStats {
    fn record(&mut self, exposure: f64, financial: f64) {
        self.count += 1;
        self.max_exposure_loss = self.max_exposure_loss.max(exposure);
        self.sum_exposure_loss += exposure;
        self.max_financial_loss = self.max_financial_loss.max(financial);
    }

    fn merge(&mut self, other: &ExitStats) {
        self.count += other.count;
        self.max_exposure_loss = self.max_exposure_loss.max(other.max_exposure_loss);
        self.sum_exposure_loss += other.sum_exposure_loss;
        self.max_financial_loss = self.max_financial_loss.max(other.max_financial_loss);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub n_packets: usize,
    pub samples: u64,
    pub seed: u64,
    pub failures: u64,
    pub completions: u64,
    pub failure_rate: f64,
    pub std_error: f64,
    /// Count per exit step `0..=N+1`.
    pub exit_histogram: Vec<u64>,
    /// Per exit step `0..=N+1`; success and step 0 leave nobody exposed.
    pub exit_stats: Vec<ExitStats>,
    /// Highest price on the lattice, for the exposure bound.
    pub max_lattice_price: f64,
    utility_sum: [[f64; 2]; 2],
    type_count: [[u64; 2]; 2],
}

impl SimResult {
    /// Mean realized utility of `agent` over the samples where it had
    /// `agent_type`; `None` if that type was never drawn.
    pub fn mean_utility(&self, agent: AgentId, agent_type: AgentType) -> Option<f64> {
        let (a, t) = (agent.index(), agent_type.index());
        (self.type_count[a][t] > 0).then(|| self.utility_sum[a][t] / self.type_count[a][t] as f64)
    }

    pub fn type_count(&self, agent: AgentId, agent_type: AgentType) -> u64 {
        self.type_count[agent.index()][agent_type.index()]
    }
}

#[derive(Clone)]
struct Partial {
    failures: u64,
    histogram: Vec<u64>,
    stats: Vec<ExitStats>,
    utility_sum: [[f64; 2]; 2],
    type_count: [[u64; 2]; 2],
}

impl Partial {
    fn new(n_packets: usize) -> Self {
        Self {
            failures: 0,
            histogram: vec![0; n_packets + 2],
            stats: vec![ExitStats::default(); n_packets + 2],
            utility_sum: [[0.0; 2]; 2],
            type_count: [[0; 2]; 2],
        }
    }

    fn merge(&mut self, other: &Partial) {
        self.failures += other.failures;
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        for (a, b) in self.stats.iter_mut().zip(&other.stats) {
            a.merge(b);
        }
        for i in 0..2 {
            for j in 0..2 {
                self.utility_sum[i][j] += other.utility_sum[i][j];
                self.type_count[i][j] += other.type_count[i][j];
            }
        }
    }
}

/// The random stream of one sample: a ChaCha8 generator keyed by the master
/// seed, on the stream numbered by the sample index.
pub fn sample_rng(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

fn run_sample<T: Scalar>(
    spec: &GameSpec<T>,
    profile: &StrategyProfile,
    mu: [f64; 2],
    seed: u64,
    index: u64,
    acc: &mut Partial,
) {
    let n = spec.n_packets;
    let mut rng = sample_rng(seed, index);
    let types = mu.map(|m| {
        if rng.random_bool(m) {
            AgentType::Honest
        } else {
            AgentType::Malicious
        }
    });
    let mut path = (0..n).map(|_| rng.random::<bool>());

    let mut state = HistoryState::Decision(DecisionNode::new(0, 0));
    let exit = loop {
        let action = match state {
            HistoryState::Terminal(exit) => break exit,
            HistoryState::AwaitingMove { .. } => {
                let up = path.next().expect("one coin per period");
                Action::Wait(if up { Move::Up } else { Move::Down })
            }
            HistoryState::Decision(node) => {
                profile.choice(types[node.mover().index()], node).into()
            }
        };
        state = state
            .advance(action, n)
            .expect("profile play follows the history grammar");
    };

    let outcome = settle(spec, exit);
    acc.histogram[outcome.exit_step] += 1;
    for agent in AgentId::ALL {
        let t = types[agent.index()];
        acc.type_count[agent.index()][t.index()] += 1;
        acc.utility_sum[agent.index()][t.index()] += outcome.utility(agent, t).to_f64_lossy();
    }
    if outcome.settlement == Settlement::Failure {
        acc.failures += 1;
        if let Some(stopper) = outcome.stopper.filter(|_| outcome.exit_step > 0) {
            let victim = stopper.counterparty();
            let packets = n as f64;
            let exposure = match victim {
                AgentId::Alice => outcome.exit_price.to_f64_lossy() / packets,
                AgentId::Bob => spec.p0().to_f64_lossy() / packets,
            };
            let financial = -(victim.beta::<T>() * outcome.y.clone()).to_f64_lossy();
            acc.stats[outcome.exit_step].record(exposure, financial);
        }
    }
}

/// Plays `profile` on `config.samples` sampled games.
pub fn simulate<T: Scalar>(config: &SimConfig<T>, profile: &StrategyProfile) -> Result<SimResult> {
    let spec = &config.spec;
    spec.validate()?;
    if profile.n_packets() != spec.n_packets {
        return Err(Error::UnsolvedSpec(format!(
            "profile has N = {}, spec has N = {}",
            profile.n_packets(),
            spec.n_packets
        )));
    }
    if config.samples == 0 {
        return Err(Error::InvalidSimConfig("samples must be at least 1".into()));
    }
    if config.workers == 0 {
        return Err(Error::InvalidSimConfig("workers must be at least 1".into()));
    }
    let mu = [
        spec.population.mu_alice.to_f64_lossy(),
        spec.population.mu_bob.to_f64_lossy(),
    ];
    let n = spec.n_packets;
    let chunks = config.samples.div_ceil(CHUNK);
    let run_chunk = |c: u64| {
        let mut acc = Partial::new(n);
        let end = ((c + 1) * CHUNK).min(config.samples);
        for i in c * CHUNK..end {
            run_sample(spec, profile, mu, config.seed, i, &mut acc);
        }
        acc
    };
    let partials: Vec<Partial> = if config.workers == 1 {
        (0..chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidSimConfig(e.to_string()))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    };
    let mut total = Partial::new(n);
    for p in &partials {
        total.merge(p);
    }

    let samples = config.samples;
    let rate = total.failures as f64 / samples as f64;
    Ok(SimResult {
        n_packets: n,
        samples,
        seed: config.seed,
        failures: total.failures,
        completions: samples - total.failures,
        failure_rate: rate,
        std_error: (rate * (1.0 - rate) / samples as f64).sqrt(),
        exit_histogram: total.histogram,
        exit_stats: total.stats,
        max_lattice_price: spec.market.max_price().to_f64_lossy(),
        utility_sum: total.utility_sum,
        type_count: total.type_count,
    })
}

/// Solves `config.spec` and simulates the resulting profile.
pub fn solve_and_simulate<T: Scalar>(config: &SimConfig<T>) -> Result<SimResult> {
    let report = solve(&config.spec)?;
    simulate(config, &report.strategy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitRow {
    pub step: usize,
    pub count: u64,
    pub frequency: f64,
    pub max_exposure_loss: f64,
    pub mean_exposure_loss: Option<f64>,
    pub max_financial_loss: f64,
    /// `max_price / N` at the opening transfer, `2 max_price / N` after it,
    /// zero where nobody is exposed.
    pub exposure_bound: f64,
}

impl ExitRow {
    pub fn within_bound(&self) -> bool {
        self.max_exposure_loss <= self.exposure_bound
    }
}

pub fn exit_profile(result: &SimResult) -> Vec<ExitRow> {
    let n = result.n_packets;
    result
        .exit_histogram
        .iter()
        .zip(&result.exit_stats)
        .enumerate()
        .map(|(step, (&count, stats))| {
            let bound = match step {
                0 => 0.0,
                1 => result.max_lattice_price / n as f64,
                s if s <= n => 2.0 * result.max_lattice_price / n as f64,
                _ => 0.0,
            };
            ExitRow {
                step,
                count,
                frequency: count as f64 / result.samples as f64,
                max_exposure_loss: stats.max_exposure_loss,
                mean_exposure_loss: (stats.count > 0)
                    .then(|| stats.sum_exposure_loss / stats.count as f64),
                max_financial_loss: stats.max_financial_loss,
                exposure_bound: bound,
            }
        })
        .collect()
}
