//! Seeded round-based execution of the head-set protocol.
//!
//! Every joule a node spends goes through [`SimState`]'s debit path, which
//! keeps a compensated ledger so that
//! `initial total - sum(residual) == ledger` holds to rounding. A node
//! that cannot afford a debit dies: its residual is moved into the ledger,
//! it drops out of the round and stays dead.

mod compare;
mod protocol;

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, finite, Result};
use crate::sum::CompensatedSum;

pub use compare::{analytic_comparison, Comparison, ComparisonReport};
pub use protocol::{run_lifetime, RoundOutcome};

/// Generator used for placement and head selection. Recorded in output
/// metadata so runs can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, SeedableRng::seed_from_u64)";

pub type Point = (f64, f64);

pub(crate) fn distance(a: Point, b: Point) -> f64 {
    libm::hypot(a.0 - b.0, a.1 - b.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Member,
    HeadsetSleeping,
    HeadsetActive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub position: Point,
    pub residual_energy: f64,
    pub alive: bool,
    pub role: Role,
    pub cluster_id: Option<usize>,
    /// Head-set memberships over the whole run.
    pub times_elected: u32,
    /// Frames spent as the active head, cumulative.
    pub active_frames: u64,
    /// Frames spent uplinking as a plain member, cumulative.
    pub member_frames: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Broadcast,
    BroadcastRx,
    Join,
    JoinRx,
    MemberUplink,
    HeadRx,
    BaseStationUplink,
    /// Residual written off when a node cannot afford a debit.
    Death,
}

/// One ledger entry. Bulk frame debits are recorded once with `count` set
/// to the number of identical debits they stand for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEvent {
    pub round: u64,
    pub iteration: u64,
    pub node: usize,
    pub kind: EventKind,
    pub count: u64,
    pub joules: f64,
}

/// Cluster formed by the most recent election.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub head: usize,
    /// Every node that joined, the head excluded.
    pub members: Vec<usize>,
    /// Head first, then associates by descending residual energy.
    pub headset: Vec<usize>,
}

/// Running sums behind [`SimMetrics`].
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Accumulators {
    pub ch_election: CompensatedSum,
    pub ch_election_count: u64,
    pub nonch_election: CompensatedSum,
    pub nonch_election_count: u64,
    pub ch_frame: CompensatedSum,
    pub ch_frame_count: u64,
    pub nonch_frame: CompensatedSum,
    pub nonch_frame_count: u64,
    pub join_distance: CompensatedSum,
    pub join_count: u64,
    pub uplink_distance: CompensatedSum,
    pub bs_distance: CompensatedSum,
    pub iteration_time: CompensatedSum,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub nodes: Vec<Node>,
    pub base_station: Point,
    pub round: u64,
    pub iteration: u64,
    pub rng_seed: u64,
    /// Times head eligibility had to be reset before everyone had served.
    pub eligibility_resets: u64,
    /// Messages not delivered because a sender or head died.
    pub dropped_messages: u64,
    pub clusters: Vec<Cluster>,
    rng: ChaCha8Rng,
    ledger: CompensatedSum,
    initial_total: f64,
    served: Vec<bool>,
    trace: Option<Vec<LedgerEvent>>,
    pub(crate) acc: Accumulators,
}

/// Places `n` nodes uniformly in the `field_side` square, all holding
/// `e_start` joules.
pub fn init_network(seed: u64, n: usize, field_side: f64, base_station: Point, e_start: f64) -> Result<SimState> {
    ensure(n >= 1, "n", "n >= 1", n as f64)?;
    finite("field_side", field_side)?;
    ensure(field_side > 0.0, "field_side", "field_side > 0", field_side)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Point> = (0..n)
        .map(|_| (rng.gen::<f64>() * field_side, rng.gen::<f64>() * field_side))
        .collect();
    SimState::with_rng(seed, rng, &positions, base_station, e_start)
}

impl SimState {
    /// Network with caller-chosen positions; the generator is still seeded
    /// from `seed` for head selection.
    pub fn from_positions(seed: u64, positions: &[Point], base_station: Point, e_start: f64) -> Result<Self> {
        ensure(!positions.is_empty(), "n", "n >= 1", 0.0)?;
        Self::with_rng(seed, ChaCha8Rng::seed_from_u64(seed), positions, base_station, e_start)
    }

    fn with_rng(seed: u64, rng: ChaCha8Rng, positions: &[Point], base_station: Point, e_start: f64) -> Result<Self> {
        finite("e_start", e_start)?;
        ensure(e_start > 0.0, "e_start", "e_start > 0", e_start)?;
        finite("base_station", base_station.0)?;
        finite("base_station", base_station.1)?;
        let nodes: Vec<Node> = positions
            .iter()
            .enumerate()
            .map(|(id, &position)| Node {
                id,
                position,
                residual_energy: e_start,
                alive: true,
                role: Role::Member,
                cluster_id: None,
                times_elected: 0,
                active_frames: 0,
                member_frames: 0,
            })
            .collect();
        let initial_total = nodes.iter().map(|n| n.residual_energy).collect::<CompensatedSum>().value();
        Ok(Self {
            served: alloc::vec![false; nodes.len()],
            nodes,
            base_station,
            round: 0,
            iteration: 0,
            rng_seed: seed,
            eligibility_resets: 0,
            dropped_messages: 0,
            clusters: Vec::new(),
            rng,
            ledger: CompensatedSum::new(),
            initial_total,
            trace: None,
            acc: Accumulators::default(),
        })
    }

    /// Records every debit from now on.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[LedgerEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn ledger(&self) -> f64 {
        self.ledger.value()
    }

    pub fn initial_total(&self) -> f64 {
        self.initial_total
    }

    pub fn total_residual(&self) -> f64 {
        self.nodes.iter().map(|n| n.residual_energy).collect::<CompensatedSum>().value()
    }

    /// `|initial - residual - ledger| / initial`.
    pub fn conservation_error(&self) -> f64 {
        let gap = self.initial_total - self.total_residual() - self.ledger();
        libm::fabs(gap) / self.initial_total
    }

    pub fn live_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn has_dead(&self) -> bool {
        self.nodes.iter().any(|n| !n.alive)
    }

    /// Whether the node has served in a head-set during the current round.
    pub fn served_this_round(&self, id: usize) -> bool {
        self.served[id]
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Debits `count` copies of `unit` joules. Returns how many the node
    /// could afford; if fewer than `count`, the node is dead afterwards.
    pub(crate) fn debit(&mut self, node: usize, unit: f64, count: u64, kind: EventKind) -> u64 {
        if count == 0 || !self.nodes[node].alive {
            return 0;
        }
        let residual = self.nodes[node].residual_energy;
        let affordable = if unit <= 0.0 {
            count
        } else {
            let mut c = libm::floor(residual / unit).min(count as f64) as u64;
            while c > 0 && (c as f64) * unit > residual {
                c -= 1;
            }
            c
        };
        if affordable > 0 {
            let joules = affordable as f64 * unit;
            self.nodes[node].residual_energy = residual - joules;
            self.ledger.add(joules);
            self.record(node, kind, affordable, joules);
        }
        if affordable < count {
            let rest = self.nodes[node].residual_energy;
            self.nodes[node].residual_energy = 0.0;
            self.nodes[node].alive = false;
            self.ledger.add(rest);
            self.record(node, EventKind::Death, 1, rest);
        }
        affordable
    }

    fn record(&mut self, node: usize, kind: EventKind, count: u64, joules: f64) {
        let (round, iteration) = (self.round, self.iteration);
        if let Some(trace) = self.trace.as_mut() {
            trace.push(LedgerEvent { round, iteration, node, kind, count, joules });
        }
    }
}

/// Protocol parameters for [`run_lifetime`] and friends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimScenario {
    pub k: u32,
    pub m: u32,
    pub n_frames: u64,
    pub l: u32,
    pub max_rounds: u64,
    /// Stop after the round in which the first node dies.
    pub stop_at_first_death: bool,
}

impl Default for SimScenario {
    fn default() -> Self {
        Self { k: 14, m: 6, n_frames: 10_000, l: 2000, max_rounds: 10, stop_at_first_death: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub n: usize,
    pub scenario: SimScenario,
    pub rounds_completed: u64,
    pub iterations_completed: u64,
    /// `None` when every node survived.
    pub first_node_death_round: Option<u64>,
    pub energy_per_round: Vec<f64>,
    pub live_after_round: Vec<usize>,
    /// Head-set energy per cluster per iteration: the head's election cost
    /// plus every active-duty frame.
    pub mean_ch_energy: f64,
    /// Plain member energy per iteration: election plus uplinks.
    pub mean_nonch_energy: f64,
    pub mean_ch_election_energy: f64,
    pub mean_nonch_election_energy: f64,
    pub mean_ch_frame_energy: f64,
    pub mean_nonch_frame_energy: f64,
    pub mean_join_distance: f64,
    pub mean_uplink_distance: f64,
    pub mean_bs_distance: f64,
    pub iteration_time_s: f64,
    pub eligibility_resets: u64,
    pub dropped_messages: u64,
    pub conservation_error: f64,
}

pub(crate) fn mean(sum: &CompensatedSum, count: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum.value() / count as f64
    }
}
