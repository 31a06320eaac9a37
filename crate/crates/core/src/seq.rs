//! Symbolic sequence machine: a memorized letter sequence is replayed by a
//! counting circuit of deterministic neurons. Two parallel token chains
//! (count numbers and sequence letters) advance in lockstep under shared
//! excitation/inhibition pulses; a goal comparison runs on interleaved check
//! rounds, and on a hit the active letter hands off to its concept neuron in
//! the embedded intuitive network, which cascades to a decision.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Inequality, Result};
use crate::iks::{persistent_winner, CascadeResult, ConceptGraph, PERSISTENCE_WINDOW};
use crate::scalar::Scalar;
use crate::snn::{
    ExternalSignal, FiringState, Network, NeuronId, NeuronSpec, Simulation, Tag, Trace,
};
use crate::wm::install_detector;

/// Parameters of the increment circuit: firing threshold `h`, attention
/// weight `cur`, self-loop weight `l`, successor weight `s`, residual
/// successor weight `s_resid`, excitation pulse `exc` and inhibition pulse
/// `inh` (signed; inhibition is negative).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CountParams<S: Scalar> {
    pub h: S,
    pub cur: S,
    pub l: S,
    pub s: S,
    pub s_resid: S,
    pub exc: S,
    pub inh: S,
}

impl<S: Scalar> CountParams<S> {
    /// The worked parameter assignment: cur 0, l 4, h 3, s 2, exc 2,
    /// inh -2, s_resid 1.
    pub fn canonical() -> Self {
        let f = S::from_f64_lossy;
        CountParams {
            h: f(3.0),
            cur: f(0.0),
            l: f(4.0),
            s: f(2.0),
            s_resid: f(1.0),
            exc: f(2.0),
            inh: f(-2.0),
        }
    }

    /// Violated constraints, empty when the parameters are valid.
    pub fn violations(&self) -> Vec<Inequality> {
        let CountParams { h, cur, l, s, s_resid, exc, inh } = *self;
        let mut v = Vec::new();
        if !(h <= cur + l) {
            v.push(Inequality::I1);
        }
        if !(h > s + cur) {
            v.push(Inequality::I2);
        }
        if !(h <= exc + s + cur) {
            v.push(Inequality::I3);
        }
        if !(h > exc + cur) {
            v.push(Inequality::I4);
        }
        if !(h > cur + l + inh) {
            v.push(Inequality::I5);
        }
        if !(h <= cur + l + inh + s_resid) {
            v.push(Inequality::I6);
        }
        if !(s > S::zero() && s_resid >= S::zero() && s_resid < s) {
            v.push(Inequality::Residual);
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// Residual magnitude as a fraction of the live weight: s_resid / s.
    pub fn frac(&self) -> S {
        self.s_resid / self.s
    }

    /// A weight strictly dominating any sum of circuit weights; used for
    /// gating clamps and kills that must override everything else.
    fn big(&self) -> S {
        let CountParams { h, cur, l, s, s_resid, exc, inh } = *self;
        h.abs() + cur.abs() + l.abs() + s.abs() + s_resid.abs() + exc.abs() + inh.abs()
            + S::from_f64_lossy(10.0)
    }
}

/// Timing of one increment pulse pair, in rounds relative to the cycle
/// start: one excitation round, a gap, two inhibition rounds, one rest round
/// by default (cycle length 5).
#[derive(Debug, Clone, Copy)]
pub struct PulseSchedule {
    pub excite_at: u32,
    pub excite_duration: u32,
    pub inhibit_at: u32,
    pub inhibit_duration: u32,
    pub rest: u32,
}

impl Default for PulseSchedule {
    fn default() -> Self {
        PulseSchedule {
            excite_at: 0,
            excite_duration: 1,
            inhibit_at: 2,
            inhibit_duration: 2,
            rest: 1,
        }
    }
}

impl PulseSchedule {
    pub fn cycle_len(&self) -> u32 {
        (self.excite_at + self.excite_duration).max(self.inhibit_at + self.inhibit_duration)
            + self.rest
    }
}

/// Outcome of a position query: which letter was reached, the stochastic
/// judgment cascade it triggered, and the timing of the answer.
#[derive(Debug, Clone, Serialize)]
pub struct QueryResult {
    /// 1-based position of the answering letter in the sequence.
    pub letter_index: u32,
    pub letter: String,
    pub decision: CascadeResult,
    /// Round at which the goal comparison fired.
    pub detection_round: u32,
    /// Round at which the decision output stabilized (detection + handoff).
    pub latency_rounds: u32,
}

#[derive(Debug, Clone)]
pub struct SequenceNetwork<S: Scalar> {
    sim: Simulation<S>,
    params: CountParams<S>,
    schedule: PulseSchedule,
    k: u32,
    numbers: Vec<NeuronId>,
    letters: Vec<NeuronId>,
    letter_names: Vec<String>,
    cur_num_role: NeuronId,
    cur_let_role: NeuronId,
    goal_role: NeuronId,
    dets: Vec<NeuronId>,
    /// Concept neuron per letter position, inside the embedded network.
    concepts: Vec<NeuronId>,
    /// Name index of the embedded intuitive network, with remapped ids.
    index: BTreeMap<String, Vec<NeuronId>>,
    exc_iks: S,
    seed: u64,
    started: bool,
    goal: Option<u32>,
    /// Rounds during which an increment legitimately holds two chain tokens.
    pulse_windows: Vec<(u32, u32)>,
}

impl<S: Scalar> SequenceNetwork<S> {
    /// Wire the full machine: number chain, letter chain (length `k`,
    /// positions named by `letter_names`), attention roles, per-number
    /// equality detectors, and a private copy of the intuitive network whose
    /// concept neurons the letters link to bidirectionally.
    pub fn build(
        params: CountParams<S>,
        iks: &ConceptGraph<S>,
        letter_names: &[&str],
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        let k = letter_names.len() as u32;
        if k == 0 {
            return Err(Error::Spec("sequence must be non-empty".into()));
        }
        let schedule = PulseSchedule::default();
        let mut net: Network<S> = Network::with_residual(crate::snn::ResidualConfig::new(
            params.frac(),
            schedule.inhibit_duration,
        ));

        let numbers: Vec<_> = (0..k)
            .map(|_| net.add_neuron(NeuronSpec::threshold_gate(params.h).with_tag(Tag::Number)))
            .collect();
        let letters: Vec<_> = (0..k)
            .map(|_| net.add_neuron(NeuronSpec::threshold_gate(params.h).with_tag(Tag::Letter)))
            .collect();
        for chain in [&numbers, &letters] {
            for w in chain.windows(2) {
                net.add_edge(w[0], w[1], params.s, Some("successor"))?;
            }
            for &n in chain.iter() {
                net.add_edge(n, n, params.l, Some("self-loop"))?;
            }
        }
        let role_spec = NeuronSpec::threshold_gate(S::one()).with_tag(Tag::Role);
        let cur_num_role = net.add_neuron(role_spec.clone());
        let cur_let_role = net.add_neuron(role_spec.clone());
        let goal_role = net.add_neuron(role_spec);
        for &n in &numbers {
            net.add_edge(cur_num_role, n, params.cur, Some("attention"))?;
        }
        for &n in &letters {
            net.add_edge(cur_let_role, n, params.cur, Some("attention"))?;
        }
        let dets: Vec<_> = numbers
            .iter()
            .map(|&n| install_detector(&mut net, n).detector)
            .collect();

        // Embed the intuitive network with remapped ids.
        let offset = net.len() as u32;
        for n in iks.net.neuron_ids() {
            net.add_neuron(iks.net.spec(n)?.clone());
        }
        for e in iks.net.edges() {
            net.add_edge(
                NeuronId(e.src.0 + offset),
                NeuronId(e.dst.0 + offset),
                e.weight,
                e.label.as_deref(),
            )?;
        }
        let index: BTreeMap<String, Vec<NeuronId>> = iks
            .concept_index
            .iter()
            .map(|(name, ids)| {
                (
                    name.clone(),
                    ids.iter().map(|i| NeuronId(i.0 + offset)).collect(),
                )
            })
            .collect();

        // Letter <-> concept links: sub-threshold alone, supra-threshold
        // together with the handoff excitation (the I3/I4 pattern again).
        let two_thirds = S::from_f64_lossy(2.0 / 3.0);
        let mut concepts = Vec::with_capacity(k as usize);
        let mut exc_iks = S::zero();
        for (i, name) in letter_names.iter().enumerate() {
            let ids = index
                .get(*name)
                .ok_or_else(|| Error::UnknownConcept((*name).to_owned()))?;
            if ids.len() != 1 {
                return Err(Error::UnknownConcept(format!("{name} (not unique)")));
            }
            let c = ids[0];
            let th = net.spec(c)?.threshold;
            let w_link = th * two_thirds;
            exc_iks = exc_iks.max(w_link);
            net.add_edge(letters[i], c, w_link, Some("grounding"))?;
            net.add_edge(c, letters[i], w_link, Some("grounding"))?;
            concepts.push(c);
        }

        let sim = Simulation::from_network(net, seed);
        Ok(SequenceNetwork {
            sim,
            params,
            schedule,
            k,
            numbers,
            letters,
            letter_names: letter_names.iter().map(|s| (*s).to_owned()).collect(),
            cur_num_role,
            cur_let_role,
            goal_role,
            dets,
            concepts,
            index,
            exc_iks,
            seed,
            started: false,
            goal: None,
            pulse_windows: Vec::new(),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn params(&self) -> CountParams<S> {
        self.params
    }

    pub fn schedule(&self) -> PulseSchedule {
        self.schedule
    }

    /// Reported cycle length of query mode: check (2) + settle (2) +
    /// increment (cycle_len).
    pub fn query_cycle_len(&self) -> u32 {
        2 + self.schedule.inhibit_duration + self.schedule.cycle_len()
    }

    pub fn sim(&self) -> &Simulation<S> {
        &self.sim
    }

    /// Mutable simulation access, for driving the machine with raw pulses.
    pub fn sim_mut(&mut self) -> &mut Simulation<S> {
        &mut self.sim
    }

    /// Run the machine forward without any scheduled pulses.
    pub fn advance(&mut self, rounds: u32) {
        self.sim.advance(rounds);
    }

    pub fn trace(&self) -> &Trace {
        self.sim.trace()
    }

    pub fn numbers(&self) -> &[NeuronId] {
        &self.numbers
    }

    pub fn letters(&self) -> &[NeuronId] {
        &self.letters
    }

    pub fn concepts(&self) -> &[NeuronId] {
        &self.concepts
    }

    pub fn index(&self) -> &BTreeMap<String, Vec<NeuronId>> {
        &self.index
    }

    pub fn roles(&self) -> [NeuronId; 3] {
        [self.cur_num_role, self.cur_let_role, self.goal_role]
    }

    /// 1-based count currently held, if exactly one number token is alive.
    pub fn current_position(&self) -> Option<u32> {
        let firing: Vec<_> = self
            .numbers
            .iter()
            .enumerate()
            .filter(|(_, &n)| self.sim.is_firing(n))
            .collect();
        match firing.as_slice() {
            [(i, _)] => Some(*i as u32 + 1),
            _ => None,
        }
    }

    fn outputs(&self) -> Vec<NeuronId> {
        self.sim
            .net()
            .neuron_ids()
            .filter(|&n| {
                let s = self.sim.net().spec(n).unwrap();
                s.has_tag(Tag::Decision) || s.has_tag(Tag::Emotion)
            })
            .collect()
    }

    /// Place the machine directly at count `i` (1-based): roles plus the
    /// i-th tokens firing, attention clamps installed. Test entry point for
    /// exercising single increments from arbitrary positions.
    pub fn seed_position(&mut self, i: u32) -> Result<()> {
        if i < 1 || i > self.k {
            return Err(Error::GoalOutOfRange { goal: i as i64, max: self.k });
        }
        let idx = (i - 1) as usize;
        let init = FiringState::with_firing(
            self.sim.net().len(),
            [
                self.cur_num_role,
                self.cur_let_role,
                self.numbers[idx],
                self.letters[idx],
            ],
        );
        self.sim.set_state(init);
        self.install_role_clamps();
        self.started = true;
        Ok(())
    }

    fn install_role_clamps(&mut self) {
        self.sim.push_signal(ExternalSignal::to_neurons(
            [self.cur_num_role, self.cur_let_role],
            S::from_f64_lossy(2.0),
            self.sim.now() + 1,
            u32::MAX,
        ));
    }

    /// Ignite both chains with a start pulse of weight s + exc, the letter
    /// chain at position `letter_start` (0-based). Advances one round, after
    /// which count 1 is held.
    fn start_at(&mut self, letter_start: usize) -> Result<()> {
        if self.started
            || self
                .numbers
                .iter()
                .chain(self.letters.iter())
                .any(|&n| self.sim.is_firing(n))
        {
            return Err(Error::AlreadyStarted);
        }
        self.install_role_clamps();
        self.sim.push_signal(ExternalSignal::to_neurons(
            [self.numbers[0], self.letters[letter_start]],
            self.params.s + self.params.exc,
            self.sim.now() + 1,
            1,
        ));
        self.sim.record_event("start");
        self.sim.advance(1);
        self.started = true;
        Ok(())
    }

    /// Start counting at 1 from the head of the letter sequence.
    pub fn start_count(&mut self) -> Result<()> {
        self.start_at(0)
    }

    /// Fix the query goal (1-based position).
    pub fn set_goal(&mut self, g: i64) -> Result<()> {
        if g < 1 || g > self.k as i64 {
            return Err(Error::GoalOutOfRange { goal: g, max: self.k });
        }
        self.goal = Some(g as u32);
        Ok(())
    }

    /// One increment cycle: a shared excitation pulse ignites the successor
    /// tokens, then an inhibition pulse retires the old ones, the successors
    /// surviving on self-loop plus residual. Both chains advance together.
    pub fn increment(&mut self) -> Result<()> {
        if !self.started {
            return Err(Error::Spec("increment before start".into()));
        }
        let pos = self
            .current_position()
            .ok_or_else(|| Error::Spec("increment requires exactly one count token".into()))?;
        if pos == self.k {
            return Err(Error::AtEnd);
        }
        let t0 = self.sim.now() + 1;
        let sch = self.schedule;
        for tag in [Tag::Number, Tag::Letter] {
            self.sim.push_signal(ExternalSignal::to_tag(
                tag,
                self.params.exc,
                t0 + sch.excite_at,
                sch.excite_duration,
            ));
            self.sim.push_signal(ExternalSignal::to_tag(
                tag,
                self.params.inh,
                t0 + sch.inhibit_at,
                sch.inhibit_duration,
            ));
        }
        self.pulse_windows
            .push((t0 + sch.excite_at, t0 + sch.inhibit_at - 1));
        self.sim.advance(sch.cycle_len());
        Ok(())
    }

    /// One goal-comparison phase (2 rounds): a gate round in which every
    /// chain token is suppressed and the goal token alone is clamped onto
    /// the number pool, then a recovery round in which a uniform beat
    /// re-ignites exactly the suspended tokens from their residuals while a
    /// targeted kill removes the goal probe. The consecutive-firing detector
    /// of the goal number reports equality on the recovery round.
    pub fn equality_check(&mut self) -> Result<bool> {
        if !self.started {
            return Err(Error::Spec("equality check before start".into()));
        }
        let g = self
            .goal
            .ok_or_else(|| Error::Spec("equality check without a goal".into()))? as usize;
        let p = self.params;
        let big = p.big();
        let two = S::from_f64_lossy(2.0);
        let t = self.sim.now() + 1;

        for tag in [Tag::Number, Tag::Letter] {
            self.sim
                .push_signal(ExternalSignal::to_tag(tag, -big, t, 1));
        }
        self.sim.push_signal(ExternalSignal::to_neurons(
            [self.numbers[g - 1]],
            big + big,
            t,
            1,
        ));
        self.sim
            .push_signal(ExternalSignal::to_neurons([self.goal_role], two, t, 1));

        let beat = p.h - p.cur - p.frac() * p.l;
        for tag in [Tag::Number, Tag::Letter] {
            self.sim
                .push_signal(ExternalSignal::to_tag(tag, beat, t + 1, 1));
        }
        // The kill outlasts the check by the residual window: the goal probe
        // may sit right after the live token, whose successor edge would
        // otherwise revive it from its own residual during the settle rounds.
        self.sim.push_signal(ExternalSignal::to_neurons(
            [self.numbers[g - 1]],
            -(big + big),
            t + 1,
            1 + self.schedule.inhibit_duration,
        ));
        self.sim.push_signal(ExternalSignal::to_neurons(
            self.dets.iter().copied(),
            crate::wm::detector_enable_weight::<S>(),
            t + 1,
            1,
        ));
        // The probe fired for one gate round, so its successor sees a live
        // successor weight on the recovery round; cancel it. A genuine
        // current token in that slot still recovers from its own residual.
        if g < self.k as usize {
            self.sim.push_signal(ExternalSignal::to_neurons(
                [self.numbers[g]],
                -p.s,
                t + 1,
                1,
            ));
        }
        self.sim.advance(2);
        let hit = self.dets.iter().any(|&d| self.sim.is_firing(d));
        if hit {
            self.sim.record_event("equal");
        }
        Ok(hit)
    }

    /// Settle rounds after a check so residuals expire before the next
    /// pulse.
    fn settle(&mut self) {
        self.sim.advance(self.schedule.inhibit_duration);
    }

    /// Count until the goal comparison fires; returns the detection round.
    fn count_to_goal(&mut self) -> Result<u32> {
        for _ in 0..=self.k {
            if self.equality_check()? {
                return Ok(self.sim.now());
            }
            self.settle();
            self.increment()?;
        }
        Err(Error::Spec("goal never detected".into()))
    }

    /// Letter token alive at `round` in the trace, as (1-based index, name).
    fn letter_at(&self, round: u32) -> Result<(u32, String)> {
        let state = self.sim.trace().state(round);
        let alive: Vec<_> = self
            .letters
            .iter()
            .enumerate()
            .filter(|(_, &n)| state.is_firing(n))
            .collect();
        match alive.as_slice() {
            [(i, _)] => Ok((*i as u32 + 1, self.letter_names[*i].clone())),
            _ => Err(Error::Spec("expected exactly one letter token".into())),
        }
    }

    /// Hand the surviving letter off to the intuitive network and gather the
    /// empirical decision distribution over independent trials. The main
    /// simulation also runs the handoff so its trace shows the full episode.
    fn handoff_and_judge(&mut self, horizon: u32, trials: u32) -> CascadeResult {
        assert!(horizon >= 1 && trials >= 1);
        let t = self.sim.now();
        let outputs = self.outputs();
        let base = self.sim.clone();
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        let mut misses = 0u64;
        let mut stab_max: Option<u32> = None;
        for trial in 0..trials {
            let mut sim = base.clone();
            sim.set_stream(trial as u64 + 1);
            sim.push_signal(ExternalSignal::to_tag(Tag::Concept, self.exc_iks, t + 1, 2));
            sim.advance(horizon);
            match persistent_winner(sim.trace(), &outputs, PERSISTENCE_WINDOW) {
                (Some(w), stab) => {
                    *counts.entry(w.0).or_insert(0) += 1;
                    stab_max = stab_max.max(stab);
                }
                (None, _) => misses += 1,
            }
        }
        self.sim
            .push_signal(ExternalSignal::to_tag(Tag::Concept, self.exc_iks, t + 1, 2));
        self.sim.record_event("handoff");
        self.sim.advance(horizon);
        let stabilized = misses == 0;
        CascadeResult {
            distribution: counts
                .into_iter()
                .map(|(n, c)| (n, c as f64 / trials as f64))
                .collect(),
            stabilized,
            stabilization_round: if stabilized { stab_max } else { None },
            trials,
            seed: self.seed,
        }
    }

    /// "What is letter number g?" — count from the head of the sequence to
    /// position `g`, then judge the reached letter.
    pub fn run_query1(&mut self, g: i64, horizon: u32, trials: u32) -> Result<QueryResult> {
        self.set_goal(g)?;
        self.start_count()?;
        let detection = self.count_to_goal()?;
        let (letter_index, letter) = self.letter_at(detection)?;
        let decision = self.handoff_and_judge(horizon, trials);
        let latency = decision.stabilization_round.unwrap_or(detection + horizon);
        Ok(QueryResult {
            letter_index,
            letter,
            decision,
            detection_round: detection,
            latency_rounds: latency,
        })
    }

    /// "What letter comes g after `letter`?" — start the letter chain at the
    /// named letter while the count chain starts at 1, and count to g + 1 so
    /// the g-th successor is alive at detection.
    pub fn run_query2(
        &mut self,
        letter: &str,
        g: i64,
        horizon: u32,
        trials: u32,
    ) -> Result<QueryResult> {
        let i = self
            .letter_names
            .iter()
            .position(|n| n == letter)
            .ok_or_else(|| Error::UnknownLetter(letter.to_owned()))? as u32
            + 1;
        let max = self.k - i;
        if g < 1 || g > max as i64 {
            return Err(Error::GoalOutOfRange { goal: g, max });
        }
        self.set_goal(g + 1)?;
        self.start_at((i - 1) as usize)?;
        let detection = self.count_to_goal()?;
        let (letter_index, letter) = self.letter_at(detection)?;
        let decision = self.handoff_and_judge(horizon, trials);
        let latency = decision.stabilization_round.unwrap_or(detection + horizon);
        Ok(QueryResult {
            letter_index,
            letter,
            decision,
            detection_round: detection,
            latency_rounds: latency,
        })
    }

    /// No-split-attention check over the main trace: whenever a role fires,
    /// at most one token of its pool fires with it — except during an
    /// increment pulse, where the old and new token of a chain legitimately
    /// overlap for the excitation rounds (and must then be exactly two,
    /// adjacent). Returns the first violating round.
    pub fn attention_violation(&self) -> Option<u32> {
        let pools: [(&NeuronId, &[NeuronId]); 3] = [
            (&self.cur_num_role, &self.numbers),
            (&self.goal_role, &self.numbers),
            (&self.cur_let_role, &self.letters),
        ];
        for state in &self.sim.trace().states {
            let r = state.round;
            let in_pulse = self
                .pulse_windows
                .iter()
                .any(|&(lo, hi)| r >= lo && r <= hi);
            for (role, pool) in pools {
                if !state.is_firing(*role) {
                    continue;
                }
                let alive: Vec<usize> = pool
                    .iter()
                    .enumerate()
                    .filter(|(_, &n)| state.is_firing(n))
                    .map(|(i, _)| i)
                    .collect();
                let ok = match alive.as_slice() {
                    [] | [_] => true,
                    [a, b] => in_pulse && b - a == 1,
                    _ => false,
                };
                if !ok {
                    return Some(r);
                }
            }
        }
        None
    }
}
