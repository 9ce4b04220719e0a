//! Election, data transfer, rounds and lifetime runs.

use alloc::vec::Vec;

use rand::seq::index;

use super::{distance, mean, Cluster, EventKind, Role, SimMetrics, SimScenario, SimState};
use crate::error::{Error, Result};
use crate::radio::{Radio, RangeClass};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    /// Joules debited during the round; equals the ledger delta.
    pub energy: f64,
    pub iterations: u64,
}

impl SimState {
    /// One election: the base station draws `k` heads among live nodes that
    /// have not served yet this round, every head broadcasts, every other
    /// live node hears all `k` broadcasts, joins the nearest head (ties to
    /// the lower id) and announces itself; each head hears its joiners and
    /// picks `m - 1` associates among its joiners: those that have not
    /// served this round first, then by most residual energy.
    pub fn election_phase(&mut self, k: u32, m: u32, radio: &Radio, l: u32) -> Result<()> {
        let k = k as usize;
        let m = m as usize;
        let live: Vec<usize> = self.nodes.iter().filter(|n| n.alive).map(|n| n.id).collect();
        let needed = k.saturating_mul(m);
        if k == 0 || m == 0 || live.len() < needed {
            return Err(Error::ElectionFailure { live: live.len(), needed });
        }

        let mut eligible: Vec<usize> = live.iter().copied().filter(|&i| !self.served[i]).collect();
        if eligible.len() < k {
            self.served.iter_mut().for_each(|s| *s = false);
            self.eligibility_resets += 1;
            eligible = live.clone();
        }
        let mut heads: Vec<usize> = index::sample(self.rng(), eligible.len(), k)
            .into_iter()
            .map(|i| eligible[i])
            .collect();
        heads.sort_unstable();

        for node in &mut self.nodes {
            node.cluster_id = None;
            node.role = Role::Member;
        }
        let mut clusters: Vec<Cluster> = heads
            .iter()
            .map(|&h| Cluster { head: h, members: Vec::new(), headset: Vec::new() })
            .collect();
        for (c, &h) in heads.iter().enumerate() {
            self.nodes[h].cluster_id = Some(c);
        }

        // Nearest head by received signal strength, i.e. smallest distance.
        let mut choice: Vec<(usize, usize, f64)> = Vec::with_capacity(live.len());
        for &i in &live {
            if self.nodes[i].cluster_id.is_some() {
                continue;
            }
            let p = self.nodes[i].position;
            let mut best = (0usize, f64::INFINITY);
            for (c, &h) in heads.iter().enumerate() {
                let d = distance(p, self.nodes[h].position);
                if d < best.1 {
                    best = (c, d);
                }
            }
            choice.push((i, best.0, best.1));
        }

        let lf = f64::from(l);
        let rx = radio.rx_energy(lf)?;
        let mut head_cost = alloc::vec![0.0f64; k];

        // Broadcast must reach the farthest node that will join.
        let mut reach = alloc::vec![0.0f64; k];
        for &(_, c, d) in &choice {
            reach[c] = reach[c].max(d);
        }
        for c in 0..k {
            let h = heads[c];
            let cost = radio.tx_energy(lf, reach[c], RangeClass::Short)?;
            if self.debit(h, cost, 1, EventKind::Broadcast) == 1 {
                head_cost[c] += cost;
            }
        }

        for &(i, c, d) in &choice {
            let heard = self.debit(i, rx, k as u64, EventKind::BroadcastRx);
            let mut spent = heard as f64 * rx;
            let join = radio.tx_energy(lf, d, RangeClass::Short)?;
            if self.debit(i, join, 1, EventKind::Join) == 1 {
                spent += join;
                self.nodes[i].cluster_id = Some(c);
                clusters[c].members.push(i);
                self.acc.join_distance.add(d);
                self.acc.join_count += 1;
            } else {
                self.dropped_messages += 1;
            }
            self.acc.nonch_election.add(spent);
            self.acc.nonch_election_count += 1;
        }

        for (c, cluster) in clusters.iter_mut().enumerate() {
            let joined = cluster.members.len() as u64;
            let heard = self.debit(cluster.head, rx, joined, EventKind::JoinRx);
            head_cost[c] += heard as f64 * rx;
            self.dropped_messages += joined - heard;
            self.acc.ch_election.add(head_cost[c]);
            self.acc.ch_election_count += 1;

            let mut candidates: Vec<usize> =
                cluster.members.iter().copied().filter(|&i| self.nodes[i].alive).collect();
            // Nodes that already served this round go last, so the head-set
            // rotation reaches everyone.
            candidates.sort_by(|&a, &b| {
                self.served[a]
                    .cmp(&self.served[b])
                    .then(self.nodes[b].residual_energy.total_cmp(&self.nodes[a].residual_energy))
                    .then(a.cmp(&b))
            });
            cluster.headset.push(cluster.head);
            cluster.headset.extend(candidates.into_iter().take(m - 1));
            for &i in &cluster.headset {
                self.nodes[i].role = Role::HeadsetSleeping;
                self.nodes[i].times_elected += 1;
                self.served[i] = true;
            }
        }
        self.clusters = clusters;
        Ok(())
    }

    /// `n_frames` data frames in every cluster. Head-set members take the
    /// active role in turn, each for a contiguous slot of `n_frames/m`
    /// frames (the first `n_frames % m` slots get one extra). Per frame,
    /// every plain member uplinks to the active head, which hears each
    /// delivered message and forwards one aggregate to the base station.
    pub fn data_transfer_phase(&mut self, n_frames: u64, l: u32, radio: &Radio) -> Result<()> {
        let lf = f64::from(l);
        let rx = radio.rx_energy(lf)?;
        let clusters = core::mem::take(&mut self.clusters);
        let mut max_election_slots = 0usize;
        let mut max_frame_slots = 0usize;
        for cluster in &clusters {
            let members: Vec<usize> = cluster
                .members
                .iter()
                .copied()
                .filter(|i| !cluster.headset.contains(i))
                .collect();
            max_election_slots = max_election_slots.max(cluster.members.len());
            max_frame_slots = max_frame_slots.max(members.len() + 1);

            let slots = cluster.headset.len() as u64;
            let base = n_frames / slots;
            let extra = n_frames % slots;
            for (j, &owner) in cluster.headset.iter().enumerate() {
                let frames = base + u64::from((j as u64) < extra);
                self.run_slot(cluster, j, owner, frames, &members, radio, lf, rx)?;
            }
        }
        let slots = clusters.len() + max_election_slots + n_frames as usize * max_frame_slots;
        self.acc.iteration_time.add(slots as f64 * lf / radio.params().bit_rate);
        self.clusters = clusters;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn run_slot(
        &mut self,
        cluster: &Cluster,
        slot: usize,
        owner: usize,
        frames: u64,
        members: &[usize],
        radio: &Radio,
        l: f64,
        rx: f64,
    ) -> Result<()> {
        let mut remaining = frames;
        let mut active = owner;
        while remaining > 0 {
            // A dead slot owner hands the rest of its slot to the next live
            // head-set member in rotation order.
            if !self.nodes[active].alive {
                let n = cluster.headset.len();
                match (1..n)
                    .map(|o| cluster.headset[(slot + o) % n])
                    .find(|&h| self.nodes[h].alive)
                {
                    Some(h) => {
                        self.nodes[active].role = Role::HeadsetSleeping;
                        active = h;
                    }
                    None => {
                        let senders = members.iter().filter(|&&i| self.nodes[i].alive).count() as u64;
                        self.dropped_messages += senders * remaining;
                        return Ok(());
                    }
                }
            }
            self.nodes[active].role = Role::HeadsetActive;
            let head_pos = self.nodes[active].position;
            let uplink = radio.tx_energy(l, distance(head_pos, self.base_station), RangeClass::Long)?;
            let bs_distance = distance(head_pos, self.base_station);

            let live: Vec<(usize, f64, f64)> = members
                .iter()
                .copied()
                .filter(|&i| self.nodes[i].alive)
                .map(|i| {
                    let d = distance(self.nodes[i].position, head_pos);
                    Ok((i, d, radio.tx_energy(l, d, RangeClass::Short)?))
                })
                .collect::<Result<_>>()?;
            let head_frame = live.len() as f64 * rx + uplink;

            // Frames everyone can afford are identical; debit them in bulk.
            let afford = |residual: f64, cost: f64| {
                if cost > 0.0 {
                    libm::floor(residual / cost).min(u64::MAX as f64) as u64
                } else {
                    u64::MAX
                }
            };
            let mut capacity = afford(self.nodes[active].residual_energy, head_frame);
            for &(i, _, c) in &live {
                capacity = capacity.min(afford(self.nodes[i].residual_energy, c));
            }
            // The last affordable frame goes through the exact path below so
            // that split head debits never trip over rounding.
            let bulk = remaining.min(capacity.saturating_sub(1));
            if bulk > 0 {
                let mut delivered_all = true;
                for &(i, d, c) in &live {
                    delivered_all &= self.debit(i, c, bulk, EventKind::MemberUplink) == bulk;
                    self.nodes[i].member_frames += bulk;
                    self.acc.nonch_frame.add(bulk as f64 * c);
                    self.acc.nonch_frame_count += bulk;
                    self.acc.uplink_distance.add(bulk as f64 * d);
                }
                let heard = self.debit(active, rx, bulk * live.len() as u64, EventKind::HeadRx);
                let sent = self.debit(active, uplink, bulk, EventKind::BaseStationUplink);
                debug_assert!(delivered_all && heard == bulk * live.len() as u64 && sent == bulk);
                self.nodes[active].active_frames += bulk;
                self.acc.ch_frame.add(bulk as f64 * head_frame);
                self.acc.ch_frame_count += bulk;
                self.acc.bs_distance.add(bulk as f64 * bs_distance);
                remaining -= bulk;
                continue;
            }

            // Someone dies within the next frame; step it message by message.
            let mut delivered = 0u64;
            for &(i, d, c) in &live {
                if self.debit(i, c, 1, EventKind::MemberUplink) == 1 {
                    delivered += 1;
                    self.nodes[i].member_frames += 1;
                    self.acc.nonch_frame.add(c);
                    self.acc.nonch_frame_count += 1;
                    self.acc.uplink_distance.add(d);
                } else {
                    self.dropped_messages += 1;
                }
            }
            let heard = self.debit(active, rx, delivered, EventKind::HeadRx);
            self.dropped_messages += delivered - heard;
            if self.nodes[active].alive {
                if self.debit(active, uplink, 1, EventKind::BaseStationUplink) == 1 {
                    self.nodes[active].active_frames += 1;
                    self.acc.ch_frame.add(heard as f64 * rx + uplink);
                    self.acc.ch_frame_count += 1;
                    self.acc.bs_distance.add(bs_distance);
                } else {
                    self.dropped_messages += 1;
                }
            }
            remaining -= 1;
        }
        self.nodes[active].role = Role::HeadsetSleeping;
        Ok(())
    }

    /// `ceil(live / (k m))` iterations of election plus data transfer.
    /// Head eligibility resets at the start of every round.
    pub fn run_round(&mut self, k: u32, m: u32, n_frames: u64, l: u32, radio: &Radio) -> Result<RoundOutcome> {
        let per_iteration = u64::from(k) * u64::from(m);
        if per_iteration == 0 {
            return Err(Error::Degenerate("k*m must be positive"));
        }
        let iterations = (self.live_count() as u64).div_ceil(per_iteration);
        let before = self.ledger();
        self.served.iter_mut().for_each(|s| *s = false);
        for _ in 0..iterations {
            self.election_phase(k, m, radio, l)?;
            self.data_transfer_phase(n_frames, l, radio)?;
            self.iteration += 1;
        }
        self.round += 1;
        Ok(RoundOutcome { energy: self.ledger() - before, iterations })
    }

    pub fn metrics(&self, scenario: SimScenario, energy_per_round: Vec<f64>, live_after_round: Vec<usize>, first_death: Option<u64>) -> SimMetrics {
        let acc = &self.acc;
        let nf = scenario.n_frames as f64;
        let ch_elec = mean(&acc.ch_election, acc.ch_election_count);
        let nonch_elec = mean(&acc.nonch_election, acc.nonch_election_count);
        let ch_frame = mean(&acc.ch_frame, acc.ch_frame_count);
        let nonch_frame = mean(&acc.nonch_frame, acc.nonch_frame_count);
        SimMetrics {
            n: self.nodes.len(),
            scenario,
            rounds_completed: energy_per_round.len() as u64,
            iterations_completed: self.iteration,
            first_node_death_round: first_death,
            energy_per_round,
            live_after_round,
            mean_ch_energy: ch_elec + nf * ch_frame,
            mean_nonch_energy: nonch_elec + nf * nonch_frame,
            mean_ch_election_energy: ch_elec,
            mean_nonch_election_energy: nonch_elec,
            mean_ch_frame_energy: ch_frame,
            mean_nonch_frame_energy: nonch_frame,
            mean_join_distance: mean(&acc.join_distance, acc.join_count),
            mean_uplink_distance: mean(&acc.uplink_distance, acc.nonch_frame_count),
            mean_bs_distance: mean(&acc.bs_distance, acc.ch_frame_count),
            iteration_time_s: mean(&acc.iteration_time, self.iteration),
            eligibility_resets: self.eligibility_resets,
            dropped_messages: self.dropped_messages,
            conservation_error: self.conservation_error(),
        }
    }
}

/// Runs rounds until `max_rounds`, an election failure, or (when
/// `stop_at_first_death` is set) the end of the round in which the first
/// node died. Rounds cut short by an election failure are not counted.
pub fn run_lifetime(state: &mut SimState, scenario: &SimScenario, radio: &Radio) -> SimMetrics {
    let mut per_round = Vec::new();
    let mut live_after = Vec::new();
    let mut first_death = None;
    while (per_round.len() as u64) < scenario.max_rounds {
        match state.run_round(scenario.k, scenario.m, scenario.n_frames, scenario.l, radio) {
            Ok(outcome) => {
                per_round.push(outcome.energy);
                live_after.push(state.live_count());
            }
            Err(_) => {
                // Deaths inside the aborted round still count.
                if first_death.is_none() && state.has_dead() {
                    first_death = Some(state.round + 1);
                }
                break;
            }
        }
        if first_death.is_none() && state.has_dead() {
            first_death = Some(state.round);
            if scenario.stop_at_first_death {
                break;
            }
        }
    }
    state.metrics(*scenario, per_round, live_after, first_death)
}
