//! Working memory: role neurons bound to symbol neurons through temporary
//! high-weight mutual edges plus phase-slot gating, so several bindings can
//! coexist on alternating rounds without blending. Equality of two bound
//! symbols is detected by a memory/detector neuron pair that recognizes the
//! shared symbol firing on two consecutive slots.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::snn::{
    EdgeId, ExternalSignal, NeuronId, NeuronSpec, Simulation, Tag, Trace,
};

/// Phase-slot scheme: bindings co-fire on rounds r with r % period == phase,
/// and a binding (or its release) takes `window` of its slots to settle.
#[derive(Debug, Clone, Copy)]
pub struct AlternationConfig {
    pub period: u32,
    pub window: u32,
}

impl Default for AlternationConfig {
    fn default() -> Self {
        AlternationConfig { period: 2, window: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RoleId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BindingId(pub usize);

#[derive(Debug, Clone)]
struct RoleEntry {
    name: String,
    neuron: NeuronId,
    phase: u32,
    binding: Option<BindingId>,
}

#[derive(Debug, Clone)]
struct BindingEntry {
    role: RoleId,
    symbol: NeuronId,
    established_round: u32,
    active: bool,
    edges: [EdgeId; 2],
}

/// Memory/detector pair watching one symbol neuron. The detector fires at
/// round r+1 exactly when the symbol fired at rounds r-1 and r.
#[derive(Debug, Clone, Copy)]
pub struct DetectorPair {
    pub memory: NeuronId,
    pub detector: NeuronId,
}

/// Install a consecutive-firing detector for `watched` into a network.
/// `enable_weight` must be supplied as an external signal on the detector for
/// it to fire; without it the detector stays silent (so pairs can be left
/// wired permanently and armed per check round).
pub fn install_detector<S: Scalar>(
    net: &mut crate::snn::Network<S>,
    watched: NeuronId,
) -> DetectorPair {
    let one = S::one();
    let memory = net.add_neuron(NeuronSpec::threshold_gate(one));
    let detector = net.add_neuron(NeuronSpec::threshold_gate(S::from_f64_lossy(3.0)));
    net.add_edge(watched, memory, one, Some("detector-memory")).unwrap();
    net.add_edge(watched, detector, one, Some("detector-live")).unwrap();
    net.add_edge(memory, detector, one, Some("detector-held")).unwrap();
    DetectorPair { memory, detector }
}

/// Weight of the detector arming signal.
pub fn detector_enable_weight<S: Scalar>() -> S {
    S::one()
}

/// Working memory over a simulation that already contains the symbol
/// neurons. Roles are added here; bindings schedule the slot clamps.
#[derive(Debug, Clone)]
pub struct WorkingMemory<S: Scalar> {
    sim: Simulation<S>,
    cfg: AlternationConfig,
    roles: Vec<RoleEntry>,
    bindings: Vec<BindingEntry>,
    detectors: BTreeMap<u32, DetectorPair>,
}

impl<S: Scalar> WorkingMemory<S> {
    pub fn new(sim: Simulation<S>, cfg: AlternationConfig) -> Self {
        assert!(cfg.period >= 2 && cfg.window >= 1);
        WorkingMemory {
            sim,
            cfg,
            roles: Vec::new(),
            bindings: Vec::new(),
            detectors: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> AlternationConfig {
        self.cfg
    }

    pub fn sim(&self) -> &Simulation<S> {
        &self.sim
    }

    pub fn sim_mut(&mut self) -> &mut Simulation<S> {
        &mut self.sim
    }

    pub fn trace(&self) -> &Trace {
        self.sim.trace()
    }

    /// Add a role neuron firing on phase slot `phase` (< period).
    pub fn add_role(&mut self, name: &str, phase: u32) -> RoleId {
        assert!(phase < self.cfg.period, "phase must be < period");
        assert!(
            self.roles.iter().all(|r| r.name != name),
            "role names must be distinct"
        );
        let neuron = self
            .sim
            .net_mut()
            .add_neuron(NeuronSpec::threshold_gate(S::one()).with_tag(Tag::Role));
        self.roles.push(RoleEntry {
            name: name.to_owned(),
            neuron,
            phase,
            binding: None,
        });
        RoleId(self.roles.len() - 1)
    }

    pub fn role_neuron(&self, role: RoleId) -> NeuronId {
        self.roles[role.0].neuron
    }

    pub fn role_phase(&self, role: RoleId) -> u32 {
        self.roles[role.0].phase
    }

    pub fn binding_symbol(&self, b: BindingId) -> NeuronId {
        self.bindings[b.0].symbol
    }

    fn clamp_w(&self, n: NeuronId) -> S {
        let th = self.sim.net().spec(n).unwrap().threshold;
        S::from_f64_lossy(3.0) * (th + S::from_f64_lossy(2.0))
    }

    fn damp_w(&self, n: NeuronId) -> S {
        let th = self.sim.net().spec(n).unwrap().threshold;
        -(th + S::from_f64_lossy(2.0))
    }

    /// Bind a role to a symbol neuron: install the mutual edges and the
    /// slot clamps, then run `window` full periods so the co-firing pattern
    /// is established. Errors if the role already holds a binding.
    pub fn bind(&mut self, role: RoleId, symbol: NeuronId) -> Result<BindingId> {
        let entry = &self.roles[role.0];
        if entry.binding.is_some() {
            return Err(Error::RoleBusy(entry.name.clone()));
        }
        self.sim.net().spec(symbol)?; // UnknownNeuron check
        let rn = entry.neuron;
        let w_to_sym = self.sim.net().spec(symbol)?.threshold + S::one();
        let w_to_role = self.sim.net().spec(rn)?.threshold + S::one();
        let e1 = self.sim.net_mut().add_edge(rn, symbol, w_to_sym, Some("binding"))?;
        let e2 = self.sim.net_mut().add_edge(symbol, rn, w_to_role, Some("binding"))?;

        self.detectors
            .entry(symbol.0)
            .or_insert_with(|| install_detector(self.sim.net_mut(), symbol));

        let id = BindingId(self.bindings.len());
        self.roles[role.0].binding = Some(id);
        self.bindings.push(BindingEntry {
            role,
            symbol,
            established_round: 0,
            active: true,
        edges: [e1, e2],
        });
        let name = self.roles[role.0].name.clone();
        self.sim.record_event(format!("bind:{name}"));
        self.advance(self.cfg.window * self.cfg.period);
        self.bindings[id.0].established_round = self.sim.now();
        Ok(id)
    }

    /// Release a binding: remove the mutual edges and clamps and inhibit the
    /// role for `window` periods so it falls silent. No-op when already
    /// released.
    pub fn release(&mut self, b: BindingId) {
        if !self.bindings[b.0].active {
            return;
        }
        self.bindings[b.0].active = false;
        let role = self.bindings[b.0].role;
        self.roles[role.0].binding = None;
        for e in self.bindings[b.0].edges {
            self.sim.net_mut().edge_mut(e).weight = S::zero();
        }
        let rn = self.roles[role.0].neuron;
        let inhibit = self.clamp_w(rn);
        let rounds = self.cfg.window * self.cfg.period;
        self.sim.push_signal(ExternalSignal::to_neurons(
            [rn],
            -inhibit,
            self.sim.now() + 1,
            rounds,
        ));
        let name = self.roles[role.0].name.clone();
        self.sim.record_event(format!("release:{name}"));
        self.advance(rounds);
    }

    /// Advance the simulation, generating the per-slot clamp and off-slot
    /// damp signals for every active binding.
    pub fn advance(&mut self, rounds: u32) {
        for _ in 0..rounds {
            let next = self.sim.now() + 1;
            let mut pushes: Vec<ExternalSignal<S>> = Vec::new();
            for b in &self.bindings {
                if !b.active {
                    continue;
                }
                let phase = self.roles[b.role.0].phase;
                let rn = self.roles[b.role.0].neuron;
                let on_slot = next % self.cfg.period == phase;
                for n in [rn, b.symbol] {
                    let w = if on_slot { self.clamp_w(n) } else { self.damp_w(n) };
                    pushes.push(ExternalSignal::to_neurons([n], w, next, 1));
                }
            }
            for sig in pushes {
                self.sim.push_signal(sig);
            }
            self.sim.step();
        }
    }

    /// Check whether roles `a` and `b` are bound to the same symbol, by
    /// arming the consecutive-firing detectors over `cycles` periods and
    /// looking for a detector that fired in each of them. The two roles must
    /// occupy adjacent phase slots for the shared symbol to fire on
    /// consecutive rounds.
    pub fn detect_equal(&mut self, a: RoleId, b: RoleId, cycles: u32) -> Result<bool> {
        for role in [a, b] {
            if self.roles[role.0].binding.is_none() {
                return Err(Error::RoleUnbound(self.roles[role.0].name.clone()));
            }
        }
        let start = self.sim.now() + 1;
        let rounds = cycles * self.cfg.period;
        let dets: Vec<NeuronId> = self.detectors.values().map(|d| d.detector).collect();
        self.sim.push_signal(ExternalSignal::to_neurons(
            dets.iter().copied(),
            detector_enable_weight::<S>(),
            start,
            rounds,
        ));
        self.advance(rounds);
        let trace = self.sim.trace();
        let hit = dets.iter().any(|&d| {
            (0..cycles).all(|c| {
                let lo = start + c * self.cfg.period;
                (lo..lo + self.cfg.period).any(|r| trace.fired(d, r))
            })
        });
        if hit {
            self.sim.record_event("equal");
        }
        Ok(hit)
    }
}

/// No-split-attention check: at every round of the trace, each firing role
/// neuron co-fires with at most one symbol from its pool. Returns the first
/// violating round, if any.
pub fn split_attention_violation(
    trace: &Trace,
    roles: &[(NeuronId, Vec<NeuronId>)],
) -> Option<u32> {
    for state in &trace.states {
        for (role, pool) in roles {
            if !state.is_firing(*role) {
                continue;
            }
            let co = pool.iter().filter(|&&s| state.is_firing(s)).count();
            if co > 1 {
                return Some(state.round);
            }
        }
    }
    None
}
