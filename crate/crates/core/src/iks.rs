//! Intuitive knowledge structure: a concept network computing by stochastic
//! firing cascades, with decision/emotion output neurons, Oja-style
//! association learning, winner-take-all concept allocation, and a redundant
//! replicated lower-level model.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::snn::{
    ExternalSignal, FiringState, Network, NeuronId, Simulation, Tag, Trace,
};

/// Clamp weight strong enough to force any reasonable threshold.
fn clamp_weight<S: Scalar>() -> S {
    S::from_f64_lossy(1e6)
}

/// Concept network plus a name index for external lookup.
#[derive(Debug, Clone)]
pub struct ConceptGraph<S: Scalar> {
    pub net: Network<S>,
    pub concept_index: BTreeMap<String, Vec<NeuronId>>,
}

/// Probability (sub-)distribution over output neurons reached by a cascade.
/// The mass missing from 1 is the probability that no output fired
/// persistently within the horizon.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeResult {
    pub distribution: BTreeMap<u32, f64>,
    pub stabilized: bool,
    pub stabilization_round: Option<u32>,
    pub trials: u32,
    pub seed: u64,
}

impl CascadeResult {
    pub fn probability(&self, n: NeuronId) -> f64 {
        self.distribution.get(&n.0).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.distribution.values().sum()
    }

    /// Modal output, if any trial produced a winner.
    pub fn mode(&self) -> Option<(NeuronId, f64)> {
        self.distribution
            .iter()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(a.0)))
            .map(|(&n, &p)| (NeuronId(n), p))
    }

    /// Distribution keyed by names from a concept index (falls back to the
    /// raw id when a neuron has no name).
    pub fn named(&self, index: &BTreeMap<String, Vec<NeuronId>>) -> BTreeMap<String, f64> {
        let mut rev: BTreeMap<u32, &str> = BTreeMap::new();
        for (name, ids) in index {
            for id in ids {
                rev.entry(id.0).or_insert(name);
            }
        }
        self.distribution
            .iter()
            .map(|(&n, &p)| {
                let name = rev
                    .get(&n)
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| format!("n{n}"));
                (name, p)
            })
            .collect()
    }
}

/// Replication factor for the lower-level redundant model.
#[derive(Debug, Clone, Copy)]
pub struct ReplicationSpec {
    pub m: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WtaPolicy {
    HighestPotential,
    FirstUnused,
}

#[derive(Debug, Clone, Copy)]
pub struct LearningConfig<S: Scalar> {
    pub eta: S,
    pub wta_policy: WtaPolicy,
}

impl<S: Scalar> LearningConfig<S> {
    pub fn new(eta: S, wta_policy: WtaPolicy) -> Self {
        assert!(eta > S::zero() && eta < S::one(), "eta must be in (0,1)");
        LearningConfig { eta, wta_policy }
    }
}

/// One Oja update step: w <- w + eta * y * (x - y * w).
pub fn oja_step<S: Scalar>(w: S, eta: S, x: S, y: S) -> S {
    w + eta * y * (x - y * w)
}

/// Rounds of the trailing window over which a single output neuron must fire
/// alone to count as the cascade's persistent decision.
pub const PERSISTENCE_WINDOW: usize = 3;

/// Scan a trace for the persistently-firing output: the same output neuron
/// fires in every one of the final `window` rounds and no other output fires
/// in those rounds. Returns the winner and the first round of its trailing
/// uninterrupted solo run.
pub fn persistent_winner(
    trace: &Trace,
    outputs: &[NeuronId],
    window: usize,
) -> (Option<NeuronId>, Option<u32>) {
    let n_states = trace.len_rounds();
    let window = window.min(n_states);
    if window == 0 {
        return (None, None);
    }
    let tail = &trace.states[n_states - window..];
    let mut winner = None;
    for &out in outputs {
        if tail.iter().all(|s| s.is_firing(out)) {
            if winner.is_some() {
                return (None, None); // two outputs firing through the window
            }
            winner = Some(out);
        }
    }
    let winner = match winner {
        Some(w) => w,
        None => return (None, None),
    };
    // No other output may fire anywhere in the window.
    for s in tail {
        for &out in outputs {
            if out != winner && s.is_firing(out) {
                return (None, None);
            }
        }
    }
    // Extend the solo run backwards to find the stabilization round.
    let mut start = n_states - window;
    while start > 0 {
        let s = &trace.states[start - 1];
        let solo = s.is_firing(winner) && outputs.iter().all(|&o| o == winner || !s.is_firing(o));
        if solo {
            start -= 1;
        } else {
            break;
        }
    }
    (Some(winner), Some(trace.states[start].round))
}

impl<S: Scalar> ConceptGraph<S> {
    pub fn new(net: Network<S>) -> Self {
        ConceptGraph {
            net,
            concept_index: BTreeMap::new(),
        }
    }

    /// Register a name for a neuron in the index.
    pub fn register(&mut self, name: &str, id: NeuronId) {
        self.concept_index
            .entry(name.to_owned())
            .or_default()
            .push(id);
    }

    pub fn concept(&self, name: &str) -> Result<&[NeuronId]> {
        self.concept_index
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownConcept(name.to_owned()))
    }

    /// The unique neuron for a name; errors if absent or non-unique.
    pub fn unique_concept(&self, name: &str) -> Result<NeuronId> {
        let ids = self.concept(name)?;
        if ids.len() == 1 {
            Ok(ids[0])
        } else {
            Err(Error::UnknownConcept(format!("{name} (not unique)")))
        }
    }

    /// Decision and emotion neurons, in id order.
    pub fn outputs(&self) -> Vec<NeuronId> {
        self.net
            .neuron_ids()
            .filter(|&n| {
                let spec = self.net.spec(n).unwrap();
                spec.has_tag(Tag::Decision) || spec.has_tag(Tag::Emotion)
            })
            .collect()
    }

    fn representing(&self) -> BTreeSet<NeuronId> {
        self.concept_index.values().flatten().copied().collect()
    }

    /// Single-round recognition: clamp the named concepts' neurons and
    /// return the representing neurons firing one round later.
    pub fn direct_recognize(&self, inputs: &[&str]) -> Result<BTreeSet<NeuronId>> {
        let mut start = BTreeSet::new();
        for name in inputs {
            start.extend(self.concept(name)?.iter().copied());
        }
        if start.is_empty() {
            return Ok(BTreeSet::new());
        }
        let init = FiringState::with_firing(self.net.len(), start.iter().copied());
        let clamp = ExternalSignal::to_neurons(start.iter().copied(), clamp_weight::<S>(), 1, 1);
        let trace = crate::snn::run(&self.net, init, &[clamp], 1, 0);
        let representing = self.representing();
        Ok(trace
            .state(1)
            .firing_set()
            .intersection(&representing)
            .copied()
            .collect())
    }

    /// Stochastic recognition cascade. Start neurons are clamped firing for
    /// the first two rounds of each trial; the result is the empirical
    /// distribution of the persistently-firing output neuron over trials.
    /// Trials use independent RNG streams derived from the seed, aggregated
    /// as integer counts, so the result is trial-order independent.
    pub fn cascade(
        &self,
        start: &BTreeSet<NeuronId>,
        horizon: u32,
        trials: u32,
        seed: u64,
    ) -> CascadeResult {
        assert!(horizon >= 1 && trials >= 1);
        let outputs = self.outputs();
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        let mut misses = 0u64;
        let mut stab_max: Option<u32> = None;
        for trial in 0..trials {
            let trace = self.cascade_trial(start, horizon, seed, trial);
            match persistent_winner(&trace, &outputs, PERSISTENCE_WINDOW) {
                (Some(w), stab) => {
                    *counts.entry(w.0).or_insert(0) += 1;
                    stab_max = stab_max.max(stab);
                }
                (None, _) => misses += 1,
            }
        }
        let stabilized = misses == 0;
        CascadeResult {
            distribution: counts
                .into_iter()
                .map(|(n, c)| (n, c as f64 / trials as f64))
                .collect(),
            stabilized,
            stabilization_round: if stabilized { stab_max } else { None },
            trials,
            seed,
        }
    }

    /// One cascade trial trace (exposed for correspondence tests).
    pub fn cascade_trial(
        &self,
        start: &BTreeSet<NeuronId>,
        horizon: u32,
        seed: u64,
        trial: u32,
    ) -> Trace {
        let init = FiringState::with_firing(self.net.len(), start.iter().copied());
        let mut sim = Simulation::new(self.net.clone(), init, seed);
        sim.set_stream(trial as u64 + 1);
        sim.push_signal(ExternalSignal::to_neurons(
            start.iter().copied(),
            clamp_weight::<S>(),
            1,
            1,
        ));
        sim.advance(horizon);
        sim.into_trace()
    }

    /// Neurons with no tags are unused and available for allocation.
    pub fn unused_neurons(&self) -> Vec<NeuronId> {
        self.net
            .neuron_ids()
            .filter(|&n| self.net.spec(n).unwrap().tags.is_empty())
            .collect()
    }

    /// Allocate an unused neuron for a new concept: winner-take-all per the
    /// configured policy, Oja-strengthened edges from the input pattern, the
    /// `concept` tag, and an index entry. Ties break to the lowest id.
    pub fn learn_concept(
        &mut self,
        name: &str,
        input_pattern: &BTreeSet<NeuronId>,
        cfg: &LearningConfig<S>,
    ) -> Result<NeuronId> {
        let candidates = self.unused_neurons();
        if candidates.is_empty() {
            return Err(Error::NoFreeNeuron);
        }
        let winner = match cfg.wta_policy {
            WtaPolicy::FirstUnused => candidates[0],
            WtaPolicy::HighestPotential => {
                let state =
                    FiringState::with_firing(self.net.len(), input_pattern.iter().copied());
                let mut best = candidates[0];
                let mut best_p = self.net.potential(&state, &[], best)?;
                for &c in &candidates[1..] {
                    let p = self.net.potential(&state, &[], c)?;
                    if p > best_p {
                        best = c;
                        best_p = p;
                    }
                }
                best
            }
        };
        for &src in input_pattern {
            let eid = match self.net.find_edge(src, winner) {
                Some(e) => e,
                None => self.net.add_edge(src, winner, S::zero(), None)?,
            };
            let w = self.net.edge_mut(eid).weight;
            self.net.edge_mut(eid).weight = oja_step(w, cfg.eta, S::one(), S::one());
        }
        self.net.spec_mut(winner)?.tags.insert(Tag::Concept);
        self.register(name, winner);
        Ok(winner)
    }

    /// Strengthen the association a -> b by `presentations` co-presentations
    /// under the Oja rule with clamped unit signals. Creates the edge at
    /// weight 0 if absent. Returns the final weight.
    pub fn learn_association(
        &mut self,
        a: NeuronId,
        b: NeuronId,
        presentations: u32,
        cfg: &LearningConfig<S>,
    ) -> Result<S> {
        let eid = match self.net.find_edge(a, b) {
            Some(e) => e,
            None => self.net.add_edge(a, b, S::zero(), None)?,
        };
        for _ in 0..presentations {
            let w = self.net.edge_mut(eid).weight;
            self.net.edge_mut(eid).weight = oja_step(w, cfg.eta, S::one(), S::one());
        }
        Ok(self.net.edge_mut(eid).weight)
    }

    /// Lower-level redundant model: `m` disjoint replicas per neuron, every
    /// edge (u, v, w) replaced by m*m edges of weight w/m so the total
    /// inbound potential of a unanimously-firing replica group is preserved.
    pub fn replicate(&self, spec: ReplicationSpec) -> ConceptGraph<S> {
        assert!(spec.m >= 1);
        let m = spec.m;
        let mut net = Network::with_residual(self.net.residual_cfg);
        for n in self.net.neuron_ids() {
            let s = self.net.spec(n).unwrap();
            for _ in 0..m {
                net.add_neuron(s.clone());
            }
        }
        let scale = S::from_f64_lossy(f64::from(m));
        for e in self.net.edges() {
            for ri in 0..m {
                for rj in 0..m {
                    net.add_edge(
                        NeuronId(e.src.0 * m + ri),
                        NeuronId(e.dst.0 * m + rj),
                        e.weight / scale,
                        e.label.as_deref(),
                    )
                    .unwrap();
                }
            }
        }
        let concept_index = self
            .concept_index
            .iter()
            .map(|(name, ids)| {
                let replicas = ids
                    .iter()
                    .flat_map(|id| (0..m).map(move |r| NeuronId(id.0 * m + r)))
                    .collect();
                (name.clone(), replicas)
            })
            .collect();
        ConceptGraph { net, concept_index }
    }

    /// Replica ids of a high-level neuron in a graph produced by
    /// [`ConceptGraph::replicate`] with factor `m`.
    pub fn replicas_of(high: NeuronId, m: u32) -> Vec<NeuronId> {
        (0..m).map(|r| NeuronId(high.0 * m + r)).collect()
    }
}
