//! Round-synchronous spiking-network engine.
//!
//! Networks are labeled, weighted, directed multigraphs. Time advances in
//! discrete rounds with uniform unit edge delay. Deterministic threshold
//! neurons fire when incoming potential meets their threshold (>= convention);
//! sigmoid neurons fire with probability given by a logistic curve over the
//! potential margin, with an optional independent failure flip.
//!
//! A neuron that stops firing can leave a residual: for `window` further
//! rounds its outgoing edges keep contributing a fixed fraction of their
//! weight. This is the history extension used by the sequence increment
//! circuit to survive the inhibition pulse.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{logistic, Scalar};

/// Identifier of a neuron within one [`Network`]. Ids are allocated
/// sequentially and never reused; networks only grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NeuronId(pub u32);

impl NeuronId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeuronKind {
    DeterministicThreshold,
    SigmoidStochastic,
}

/// Semantic tags used for selecting neuron groups (signal targets, output
/// classification, free-neuron bookkeeping).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    Input,
    Output,
    Decision,
    Emotion,
    Number,
    Letter,
    Role,
    Concept,
    Symbol,
}

#[derive(Debug, Clone)]
pub struct NeuronSpec<S: Scalar> {
    pub kind: NeuronKind,
    pub threshold: S,
    /// Sigmoid slope; ignored for deterministic neurons.
    pub steepness: S,
    /// Probability that the computed firing bit is flipped. Zero for
    /// deterministic neurons.
    pub failure_prob: S,
    pub tags: BTreeSet<Tag>,
}

impl<S: Scalar> NeuronSpec<S> {
    pub fn threshold_gate(threshold: S) -> Self {
        NeuronSpec {
            kind: NeuronKind::DeterministicThreshold,
            threshold,
            steepness: S::one(),
            failure_prob: S::zero(),
            tags: BTreeSet::new(),
        }
    }

    pub fn sigmoid(threshold: S, steepness: S) -> Self {
        assert!(steepness > S::zero(), "steepness must be positive");
        NeuronSpec {
            kind: NeuronKind::SigmoidStochastic,
            threshold,
            steepness,
            failure_prob: S::zero(),
            tags: BTreeSet::new(),
        }
    }

    pub fn with_failure(mut self, failure_prob: S) -> Self {
        assert!(
            failure_prob >= S::zero() && failure_prob <= S::one(),
            "failure_prob must be in [0,1]"
        );
        assert!(
            self.kind == NeuronKind::SigmoidStochastic || failure_prob == S::zero(),
            "deterministic neurons have failure_prob 0"
        );
        self.failure_prob = failure_prob;
        self
    }

    pub fn with_tag(mut self, tag: Tag) -> Self {
        self.tags.insert(tag);
        self
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }
}

#[derive(Debug, Clone)]
pub struct Edge<S: Scalar> {
    pub src: NeuronId,
    pub dst: NeuronId,
    pub weight: S,
    pub label: Option<String>,
}

/// Configuration of the presynaptic residual ledger.
///
/// When enabled, a neuron that fired at round t and is silent afterwards
/// contributes `magnitude_fraction * weight` along each outgoing edge at
/// rounds t+2 .. t+1+window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualConfig<S: Scalar> {
    pub enabled: bool,
    pub magnitude_fraction: S,
    pub window: u32,
}

impl<S: Scalar> Default for ResidualConfig<S> {
    fn default() -> Self {
        ResidualConfig {
            enabled: false,
            magnitude_fraction: S::zero(),
            window: 0,
        }
    }
}

impl<S: Scalar> ResidualConfig<S> {
    pub fn new(magnitude_fraction: S, window: u32) -> Self {
        assert!(
            magnitude_fraction >= S::zero() && magnitude_fraction < S::one(),
            "magnitude_fraction must be in [0,1)"
        );
        assert!(window >= 1, "window must be positive");
        ResidualConfig {
            enabled: true,
            magnitude_fraction,
            window,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SignalTarget {
    Neurons(BTreeSet<NeuronId>),
    Tag(Tag),
}

/// Externally scheduled excitation or inhibition pulse. Active exactly
/// during rounds [start_round, start_round + duration); an active signal
/// contributes its weight to the potential that decides firing at that round.
#[derive(Debug, Clone)]
pub struct ExternalSignal<S: Scalar> {
    pub target: SignalTarget,
    pub weight: S,
    pub start_round: u32,
    pub duration: u32,
}

impl<S: Scalar> ExternalSignal<S> {
    pub fn to_neurons<I: IntoIterator<Item = NeuronId>>(
        targets: I,
        weight: S,
        start_round: u32,
        duration: u32,
    ) -> Self {
        ExternalSignal {
            target: SignalTarget::Neurons(targets.into_iter().collect()),
            weight,
            start_round,
            duration,
        }
    }

    pub fn to_tag(tag: Tag, weight: S, start_round: u32, duration: u32) -> Self {
        ExternalSignal {
            target: SignalTarget::Tag(tag),
            weight,
            start_round,
            duration,
        }
    }

    pub fn active_at(&self, round: u32) -> bool {
        round >= self.start_round && round < self.start_round.saturating_add(self.duration)
    }

    pub fn targets<S2: Scalar>(&self, net: &Network<S2>, n: NeuronId) -> bool {
        match &self.target {
            SignalTarget::Neurons(set) => set.contains(&n),
            SignalTarget::Tag(tag) => net.spec(n).map(|s| s.has_tag(*tag)).unwrap_or(false),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Network<S: Scalar> {
    neurons: Vec<NeuronSpec<S>>,
    edges: Vec<Edge<S>>,
    /// Edge indices grouped by destination, for potential accumulation.
    incoming: Vec<Vec<u32>>,
    pub residual_cfg: ResidualConfig<S>,
}

impl<S: Scalar> Network<S> {
    pub fn new() -> Self {
        Network {
            neurons: Vec::new(),
            edges: Vec::new(),
            incoming: Vec::new(),
            residual_cfg: ResidualConfig::default(),
        }
    }

    pub fn with_residual(residual_cfg: ResidualConfig<S>) -> Self {
        Network {
            residual_cfg,
            ..Network::new()
        }
    }

    pub fn add_neuron(&mut self, spec: NeuronSpec<S>) -> NeuronId {
        let id = NeuronId(self.neurons.len() as u32);
        self.neurons.push(spec);
        self.incoming.push(Vec::new());
        id
    }

    pub fn add_edge(
        &mut self,
        src: NeuronId,
        dst: NeuronId,
        weight: S,
        label: Option<&str>,
    ) -> Result<EdgeId> {
        self.check(src)?;
        self.check(dst)?;
        let id = EdgeId(self.edges.len() as u32);
        self.incoming[dst.index()].push(id.0);
        self.edges.push(Edge {
            src,
            dst,
            weight,
            label: label.map(str::to_owned),
        });
        Ok(id)
    }

    fn check(&self, n: NeuronId) -> Result<()> {
        if n.index() < self.neurons.len() {
            Ok(())
        } else {
            Err(Error::UnknownNeuron(n.0))
        }
    }

    pub fn len(&self) -> usize {
        self.neurons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neurons.is_empty()
    }

    pub fn spec(&self, n: NeuronId) -> Result<&NeuronSpec<S>> {
        self.neurons.get(n.index()).ok_or(Error::UnknownNeuron(n.0))
    }

    pub fn spec_mut(&mut self, n: NeuronId) -> Result<&mut NeuronSpec<S>> {
        self.neurons
            .get_mut(n.index())
            .ok_or(Error::UnknownNeuron(n.0))
    }

    pub fn neuron_ids(&self) -> impl Iterator<Item = NeuronId> {
        (0..self.neurons.len() as u32).map(NeuronId)
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn edge_mut(&mut self, e: EdgeId) -> &mut Edge<S> {
        &mut self.edges[e.0 as usize]
    }

    /// Find an edge src -> dst, if any (first match in insertion order).
    pub fn find_edge(&self, src: NeuronId, dst: NeuronId) -> Option<EdgeId> {
        self.incoming
            .get(dst.index())?
            .iter()
            .find(|&&e| self.edges[e as usize].src == src)
            .map(|&e| EdgeId(e))
    }

    pub fn tagged(&self, tag: Tag) -> Vec<NeuronId> {
        self.neuron_ids()
            .filter(|&n| self.neurons[n.index()].has_tag(tag))
            .collect()
    }

    /// Incoming potential of `n` for the round following `state.round`:
    /// live edge weights from currently firing sources, residual fractions
    /// from sources on the residual ledger, and weights of the given signals
    /// active at `state.round + 1`.
    pub fn potential(
        &self,
        state: &FiringState,
        signals: &[ExternalSignal<S>],
        n: NeuronId,
    ) -> Result<S> {
        self.check(n)?;
        let round = state.round + 1;
        let mut p = S::zero();
        for &e in &self.incoming[n.index()] {
            let edge = &self.edges[e as usize];
            // Neurons added after the state was captured are silent.
            if state.is_firing(edge.src) {
                p = p + edge.weight;
            } else if self.residual_cfg.enabled
                && state.residual.get(&edge.src.0).copied().unwrap_or(0) > 0
            {
                p = p + self.residual_cfg.magnitude_fraction * edge.weight;
            }
        }
        for sig in signals {
            if sig.active_at(round) && sig.targets(self, n) {
                p = p + sig.weight;
            }
        }
        Ok(p)
    }
}

/// Firing vector plus residual ledger for one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiringState {
    pub round: u32,
    pub firing: Vec<bool>,
    /// Rounds of residual contribution remaining, per silent neuron.
    pub residual: BTreeMap<u32, u32>,
}

impl FiringState {
    pub fn silent(n_neurons: usize) -> Self {
        FiringState {
            round: 0,
            firing: vec![false; n_neurons],
            residual: BTreeMap::new(),
        }
    }

    pub fn with_firing<I: IntoIterator<Item = NeuronId>>(n_neurons: usize, firing: I) -> Self {
        let mut s = FiringState::silent(n_neurons);
        for n in firing {
            s.firing[n.index()] = true;
        }
        s
    }

    pub fn is_firing(&self, n: NeuronId) -> bool {
        self.firing.get(n.index()).copied().unwrap_or(false)
    }

    pub fn firing_set(&self) -> BTreeSet<NeuronId> {
        self.firing
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| NeuronId(i as u32))
            .collect()
    }
}

/// Advance the network one round. Stochastic draws are consumed in neuron
/// index order (sigmoid draw, then failure draw if failure_prob > 0), so a
/// trace is a deterministic function of the seed.
pub fn step<S: Scalar, R: Rng>(
    net: &Network<S>,
    state: &FiringState,
    signals: &[ExternalSignal<S>],
    rng: &mut R,
) -> FiringState {
    let mut firing = vec![false; net.len()];
    for n in net.neuron_ids() {
        let spec = net.spec(n).expect("neuron exists");
        let p = net.potential(state, signals, n).expect("neuron exists");
        let mut fires = match spec.kind {
            NeuronKind::DeterministicThreshold => p >= spec.threshold,
            NeuronKind::SigmoidStochastic => {
                let prob = logistic((spec.steepness * (p - spec.threshold)).as_f64());
                rng.gen::<f64>() < prob
            }
        };
        if spec.failure_prob > S::zero() && rng.gen::<f64>() < spec.failure_prob.as_f64() {
            fires = !fires;
        }
        firing[n.index()] = fires;
    }

    let mut residual = BTreeMap::new();
    if net.residual_cfg.enabled {
        for n in net.neuron_ids() {
            let i = n.index();
            if firing[i] {
                continue;
            }
            if state.is_firing(n) {
                residual.insert(n.0, net.residual_cfg.window);
            } else if let Some(&left) = state.residual.get(&n.0) {
                if left > 1 {
                    residual.insert(n.0, left - 1);
                }
            }
        }
    }

    FiringState {
        round: state.round + 1,
        firing,
        residual,
    }
}

/// Per-run record: state sequence, applied signal indices per round, seed,
/// and tagged events (bind/release/equal markers from working memory).
#[derive(Debug, Clone)]
pub struct Trace {
    pub states: Vec<FiringState>,
    pub signals_applied: Vec<Vec<usize>>,
    pub seed: u64,
    pub events: Vec<(u32, String)>,
}

impl Trace {
    pub fn len_rounds(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, round: u32) -> &FiringState {
        &self.states[round as usize]
    }

    pub fn fired(&self, n: NeuronId, round: u32) -> bool {
        self.states[round as usize].is_firing(n)
    }

    /// Rounds at which `n` fired.
    pub fn firing_rounds(&self, n: NeuronId) -> Vec<u32> {
        self.states
            .iter()
            .filter(|s| s.is_firing(n))
            .map(|s| s.round)
            .collect()
    }

    /// CSV emission: one row per round, one 0/1 column per neuron, a
    /// `signals` column listing active signal indices, and an `event` column.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        // The network may grow mid-run; pad early rows to the final width.
        let n = self.states.iter().map(|s| s.firing.len()).max().unwrap_or(0);
        write!(w, "round")?;
        for i in 0..n {
            write!(w, ",n{i}")?;
        }
        writeln!(w, ",signals,event")?;
        for (r, state) in self.states.iter().enumerate() {
            write!(w, "{}", state.round)?;
            for i in 0..n {
                write!(w, ",{}", u8::from(state.is_firing(NeuronId(i as u32))))?;
            }
            let sigs = self
                .signals_applied
                .get(r)
                .map(|v| {
                    v.iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default();
            let events = self
                .events
                .iter()
                .filter(|(er, _)| *er == state.round)
                .map(|(_, e)| e.as_str())
                .collect::<Vec<_>>()
                .join(";");
            writeln!(w, ",{sigs},{events}")?;
        }
        Ok(())
    }
}

/// Incremental simulation driver. Owns the network, the pending signal
/// schedule, the RNG and the trace; higher layers push signals and advance
/// round by round.
#[derive(Debug, Clone)]
pub struct Simulation<S: Scalar> {
    net: Network<S>,
    signals: Vec<ExternalSignal<S>>,
    state: FiringState,
    rng: ChaCha8Rng,
    trace: Trace,
}

impl<S: Scalar> Simulation<S> {
    pub fn new(net: Network<S>, init: FiringState, seed: u64) -> Self {
        let trace = Trace {
            states: vec![init.clone()],
            signals_applied: vec![Vec::new()],
            seed,
            events: Vec::new(),
        };
        Simulation {
            net,
            signals: Vec::new(),
            state: init,
            rng: ChaCha8Rng::seed_from_u64(seed),
            trace,
        }
    }

    pub fn from_network(net: Network<S>, seed: u64) -> Self {
        let init = FiringState::silent(net.len());
        Simulation::new(net, init, seed)
    }

    /// Select an independent RNG stream (used for per-trial derived seeds).
    pub fn set_stream(&mut self, stream: u64) {
        self.rng.set_stream(stream);
    }

    pub fn net(&self) -> &Network<S> {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Network<S> {
        &mut self.net
    }

    pub fn state(&self) -> &FiringState {
        &self.state
    }

    pub fn set_state(&mut self, state: FiringState) {
        self.state = state;
        self.trace.states = vec![self.state.clone()];
        self.trace.signals_applied = vec![Vec::new()];
    }

    pub fn now(&self) -> u32 {
        self.state.round
    }

    pub fn is_firing(&self, n: NeuronId) -> bool {
        self.state.is_firing(n)
    }

    pub fn push_signal(&mut self, sig: ExternalSignal<S>) -> usize {
        self.signals.push(sig);
        self.signals.len() - 1
    }

    pub fn signals(&self) -> &[ExternalSignal<S>] {
        &self.signals
    }

    pub fn record_event(&mut self, event: impl Into<String>) {
        let round = self.state.round;
        self.trace.events.push((round, event.into()));
    }

    pub fn step(&mut self) {
        let next = step(&self.net, &self.state, &self.signals, &mut self.rng);
        let applied = self
            .signals
            .iter()
            .enumerate()
            .filter(|(_, s)| s.active_at(next.round))
            .map(|(i, _)| i)
            .collect();
        self.state = next;
        self.trace.states.push(self.state.clone());
        self.trace.signals_applied.push(applied);
    }

    pub fn advance(&mut self, rounds: u32) {
        for _ in 0..rounds {
            self.step();
        }
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }
}

/// Run a network for a fixed number of rounds. The result is a deterministic
/// function of (net, init, signals, seed); the trace has `rounds + 1` states
/// including the initial one.
pub fn run<S: Scalar>(
    net: &Network<S>,
    init: FiringState,
    signals: &[ExternalSignal<S>],
    rounds: u32,
    seed: u64,
) -> Trace {
    assert!(rounds >= 1, "rounds must be >= 1");
    let mut sim = Simulation::new(net.clone(), init, seed);
    for sig in signals {
        sim.push_signal(sig.clone());
    }
    sim.advance(rounds);
    sim.into_trace()
}
