//! On-disk formats: a raw network spec (neurons, edges, residual rule,
//! signal schedule) for direct cascade runs, and two higher-level scenario
//! forms — a memorized-sequence scenario and a sentence-grammar scenario —
//! that expand into fully wired machines.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iks::ConceptGraph;
use crate::lexicon::Lexicon;
use crate::parser::{Parser, ReducedParse, StoryOutline, Template, Word};
use crate::seq::{CountParams, SequenceNetwork};
use crate::snn::{
    ExternalSignal, Network, NeuronId, NeuronKind, NeuronSpec, ResidualConfig, Tag,
};
use crate::wm::{AlternationConfig, WorkingMemory};

fn default_steepness() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronDto {
    pub kind: NeuronKind,
    pub threshold: f64,
    #[serde(default = "default_steepness")]
    pub steepness: f64,
    #[serde(default)]
    pub failure_prob: f64,
    #[serde(default)]
    pub tags: Vec<Tag>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDto {
    pub src: u32,
    pub dst: u32,
    pub weight: f64,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualDto {
    pub magnitude_fraction: f64,
    pub window: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetDto {
    Neurons { neurons: Vec<u32> },
    Tag { tag: Tag },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalDto {
    #[serde(flatten)]
    pub target: TargetDto,
    pub weight: f64,
    pub start_round: u32,
    #[serde(default = "default_duration")]
    pub duration: u32,
}

fn default_duration() -> u32 {
    1
}

/// Raw network description: the direct input format of the cascade runner.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NetworkSpecFile {
    #[serde(default)]
    pub neurons: Vec<NeuronDto>,
    #[serde(default)]
    pub edges: Vec<EdgeDto>,
    #[serde(default)]
    pub residual: Option<ResidualDto>,
    #[serde(default)]
    pub signals: Vec<SignalDto>,
    /// Named start/output groups (concept name -> neuron ids).
    #[serde(default)]
    pub concepts: BTreeMap<String, Vec<u32>>,
}

impl NetworkSpecFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_network(&self) -> Result<Network<f64>> {
        let mut net = match &self.residual {
            Some(r) => {
                if !(0.0..1.0).contains(&r.magnitude_fraction) || r.window == 0 {
                    return Err(Error::Spec(
                        "residual: magnitude_fraction must be in [0,1) and window >= 1".into(),
                    ));
                }
                Network::with_residual(ResidualConfig::new(r.magnitude_fraction, r.window))
            }
            None => Network::new(),
        };
        for n in &self.neurons {
            if n.kind == NeuronKind::DeterministicThreshold && n.failure_prob != 0.0 {
                return Err(Error::Spec(
                    "deterministic neurons cannot have failure_prob".into(),
                ));
            }
            if n.kind == NeuronKind::SigmoidStochastic && n.steepness <= 0.0 {
                return Err(Error::Spec("sigmoid steepness must be positive".into()));
            }
            if !(0.0..=1.0).contains(&n.failure_prob) {
                return Err(Error::Spec("failure_prob must be in [0,1]".into()));
            }
            let mut spec = match n.kind {
                NeuronKind::DeterministicThreshold => NeuronSpec::threshold_gate(n.threshold),
                NeuronKind::SigmoidStochastic => {
                    NeuronSpec::sigmoid(n.threshold, n.steepness).with_failure(n.failure_prob)
                }
            };
            spec.tags = n.tags.iter().copied().collect();
            net.add_neuron(spec);
        }
        for e in &self.edges {
            net.add_edge(NeuronId(e.src), NeuronId(e.dst), e.weight, e.label.as_deref())?;
        }
        Ok(net)
    }

    pub fn to_signals(&self) -> Vec<ExternalSignal<f64>> {
        self.signals
            .iter()
            .map(|s| match &s.target {
                TargetDto::Neurons { neurons } => ExternalSignal::to_neurons(
                    neurons.iter().map(|&n| NeuronId(n)),
                    s.weight,
                    s.start_round,
                    s.duration,
                ),
                TargetDto::Tag { tag } => {
                    ExternalSignal::to_tag(*tag, s.weight, s.start_round, s.duration)
                }
            })
            .collect()
    }

    pub fn to_concept_graph(&self) -> Result<ConceptGraph<f64>> {
        let net = self.to_network()?;
        let n = net.len() as u32;
        let mut g = ConceptGraph::new(net);
        for (name, ids) in &self.concepts {
            for &id in ids {
                if id >= n {
                    return Err(Error::UnknownNeuron(id));
                }
                g.register(name, NeuronId(id));
            }
        }
        Ok(g)
    }
}

/// Memorized-sequence scenario: circuit parameters, the letter sequence,
/// and the judgment layer (per-letter decision plus downstream emotion).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceScenario {
    pub params: CountParams<f64>,
    pub letters: Vec<String>,
    /// letter -> decision reached when that letter is the answer.
    pub variants: BTreeMap<String, String>,
    pub decisions: Vec<String>,
    /// decision -> emotion name (wired sub-threshold, structure only).
    #[serde(default)]
    pub emotions: BTreeMap<String, String>,
}

impl SequenceScenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Expand the judgment layer into an intuitive network: one stochastic
    /// concept neuron per letter, one self-sustaining decision neuron per
    /// verdict, and optional emotion neurons hanging off the decisions.
    pub fn build_iks(&self) -> Result<ConceptGraph<f64>> {
        let mut g = ConceptGraph::new(Network::new());
        let steep = 16.0;
        let mut decision_ids = BTreeMap::new();
        for d in &self.decisions {
            let id = g
                .net
                .add_neuron(NeuronSpec::sigmoid(3.0, steep).with_tag(Tag::Decision));
            g.net.add_edge(id, id, 4.0, Some("self-loop"))?;
            g.register(d, id);
            decision_ids.insert(d.clone(), id);
        }
        let mut emotion_ids = BTreeMap::new();
        for e in self.emotions.values() {
            if !emotion_ids.contains_key(e) {
                let id = g
                    .net
                    .add_neuron(NeuronSpec::sigmoid(3.0, steep).with_tag(Tag::Emotion));
                g.register(e, id);
                emotion_ids.insert(e.clone(), id);
            }
        }
        for (d, e) in &self.emotions {
            let d_id = *decision_ids
                .get(d)
                .ok_or_else(|| Error::UnknownConcept(d.clone()))?;
            g.net.add_edge(d_id, emotion_ids[e], 2.0, Some("affect"))?;
        }
        for letter in &self.letters {
            let c = g
                .net
                .add_neuron(NeuronSpec::sigmoid(3.0, steep).with_tag(Tag::Concept));
            g.register(letter, c);
            let d = self
                .variants
                .get(letter)
                .ok_or_else(|| Error::Spec(format!("letter `{letter}` has no variant verdict")))?;
            let d_id = *decision_ids
                .get(d)
                .ok_or_else(|| Error::UnknownConcept(d.clone()))?;
            g.net.add_edge(c, d_id, 4.0, Some("verdict"))?;
        }
        Ok(g)
    }

    pub fn build(&self, seed: u64) -> Result<SequenceNetwork<f64>> {
        let iks = self.build_iks()?;
        let names: Vec<&str> = self.letters.iter().map(String::as_str).collect();
        SequenceNetwork::build(self.params, &iks, &names, seed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Association {
    pub word: String,
    pub decision: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Judgments {
    pub decisions: Vec<String>,
    pub threshold: f64,
    pub associations: Vec<Association>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expect {
    Parse {
        template: String,
        bindings: BTreeMap<String, String>,
        #[serde(default)]
        judgment: Option<String>,
    },
    Error {
        error: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub sentence: String,
    pub expect: Expect,
}

fn default_free_neurons() -> u32 {
    32
}

/// Sentence-grammar scenario: templates, the word list with parts of speech,
/// the judgment layer, and a corpus of sentences with expected outcomes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentenceScenario {
    pub templates: Vec<Template>,
    pub words: Vec<Word>,
    pub judgments: Judgments,
    #[serde(default = "default_free_neurons")]
    pub free_neurons: u32,
    #[serde(default)]
    pub corpus: Vec<CorpusEntry>,
}

/// A fully wired sentence world: parser (with working memory over the
/// lexicon network), intuitive network with the judgment layer, and lexicon.
pub struct SentenceWorld {
    pub parser: Parser<f64>,
    pub iks: ConceptGraph<f64>,
    pub lexicon: Lexicon,
    pub words: BTreeMap<String, Word>,
}

impl SentenceScenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build(&self, seed: u64) -> Result<SentenceWorld> {
        // Intuitive side: a stochastic concept per word, a decision per
        // verdict (mutually inhibiting), association edges as configured,
        // and a pool of free neurons for story allocation.
        let mut iks = ConceptGraph::new(Network::new());
        let steep = 16.0;
        let th = self.judgments.threshold;
        let mut decisions = Vec::new();
        for d in &self.judgments.decisions {
            let id = iks
                .net
                .add_neuron(NeuronSpec::sigmoid(th, steep).with_tag(Tag::Decision));
            iks.net.add_edge(id, id, th + 1.0, Some("self-loop"))?;
            iks.register(d, id);
            decisions.push(id);
        }
        for &a in &decisions {
            for &b in &decisions {
                if a != b {
                    iks.net.add_edge(a, b, -(th + 1.0), Some("rivalry"))?;
                }
            }
        }
        for w in &self.words {
            let c = iks
                .net
                .add_neuron(NeuronSpec::sigmoid(3.0, steep).with_tag(Tag::Concept));
            iks.register(&w.surface, c);
        }
        for assoc in &self.judgments.associations {
            let c = iks.unique_concept(&assoc.word)?;
            let d = iks.unique_concept(&assoc.decision)?;
            iks.net.add_edge(c, d, assoc.weight, Some("association"))?;
        }
        for _ in 0..self.free_neurons {
            iks.net.add_neuron(NeuronSpec::threshold_gate(3.0));
        }

        // Symbolic side: a lexicon over its own network, one partner neuron
        // per word, and a working memory with one slot per surface position.
        let mut net: Network<f64> = Network::new();
        let mut lexicon = Lexicon::new();
        let mut symbols = BTreeMap::new();
        for w in &self.words {
            let partner = net.add_neuron(NeuronSpec::threshold_gate(3.0));
            let attrs: BTreeMap<String, String> = [(
                "pos".to_string(),
                w.pos
                    .iter()
                    .map(|p| format!("{p:?}"))
                    .collect::<Vec<_>>()
                    .join("|"),
            )]
            .into_iter()
            .collect();
            let entry = lexicon.add_symbol(&mut net, &w.surface, attrs, partner)?;
            symbols.insert(w.surface.clone(), entry.neuron);
        }
        let max_arity = self
            .templates
            .iter()
            .map(Template::arity)
            .max()
            .unwrap_or(0) as u32;
        let n = net.len();
        let sim = crate::snn::Simulation::new(net, crate::snn::FiringState::silent(n), seed);
        let wm = WorkingMemory::new(
            sim,
            AlternationConfig {
                period: max_arity.max(2),
                window: 2,
            },
        );
        let mut parser = Parser::new().with_memory(wm, symbols, max_arity);
        parser.load_templates(self.templates.clone())?;
        Ok(SentenceWorld {
            parser,
            iks,
            lexicon,
            words: self
                .words
                .iter()
                .map(|w| (w.surface.clone(), w.clone()))
                .collect(),
        })
    }
}

impl SentenceWorld {
    /// Parse a whitespace-separated sentence incrementally.
    pub fn parse_sentence(&mut self, sentence: &str) -> Result<ReducedParse> {
        self.parser.new_sentence()?;
        for surface in sentence.split_whitespace() {
            let word = self
                .words
                .get(surface)
                .ok_or_else(|| Error::UnknownWord(surface.to_owned()))?
                .clone();
            self.parser.ingest_word(&word)?;
        }
        self.parser.end_sentence()
    }

    /// Ground a parse and run the judgment cascade.
    pub fn judge(
        &mut self,
        parse: &ReducedParse,
        horizon: u32,
        trials: u32,
        seed: u64,
    ) -> Result<(StoryOutline, crate::iks::CascadeResult)> {
        let outline = self
            .parser
            .to_story_outline(parse, &mut self.iks, &self.lexicon)?;
        let result = crate::parser::story_cascade(&outline, &self.iks, horizon, trials, seed);
        Ok((outline, result))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_spec_roundtrip_and_expansion() {
        let text = r#"{
            "neurons": [
                {"kind": "deterministic-threshold", "threshold": 1.0, "tags": ["concept"]},
                {"kind": "sigmoid-stochastic", "threshold": 2.0, "steepness": 8.0,
                 "failure_prob": 0.01, "tags": ["decision"]}
            ],
            "edges": [{"src": 0, "dst": 1, "weight": 3.0, "label": "verdict"}],
            "residual": {"magnitude_fraction": 0.5, "window": 2},
            "signals": [
                {"neurons": [0], "weight": 5.0, "start_round": 1, "duration": 2},
                {"tag": "decision", "weight": -1.0, "start_round": 3}
            ],
            "concepts": {"x": [0]}
        }"#;
        let spec: NetworkSpecFile = serde_json::from_str(text).unwrap();
        let net = spec.to_network().unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(net.edges().len(), 1);
        assert!(net.residual_cfg.enabled);
        let signals = spec.to_signals();
        assert_eq!(signals.len(), 2);
        assert_eq!(signals[1].duration, 1, "default duration");
        let g = spec.to_concept_graph().unwrap();
        assert_eq!(g.concept("x").unwrap(), [NeuronId(0)]);
    }

    #[test]
    fn raw_spec_rejects_bad_configs() {
        let dangling: NetworkSpecFile = serde_json::from_str(
            r#"{"neurons": [{"kind": "deterministic-threshold", "threshold": 1.0}],
                "edges": [{"src": 0, "dst": 5, "weight": 1.0}]}"#,
        )
        .unwrap();
        assert!(matches!(
            dangling.to_network(),
            Err(Error::UnknownNeuron(5))
        ));

        let det_failure: NetworkSpecFile = serde_json::from_str(
            r#"{"neurons": [{"kind": "deterministic-threshold", "threshold": 1.0,
                             "failure_prob": 0.5}]}"#,
        )
        .unwrap();
        assert!(det_failure.to_network().is_err());

        assert!(serde_json::from_str::<NetworkSpecFile>(
            r#"{"neurons": [{"kind": "nonsense", "threshold": 1.0}]}"#
        )
        .is_err());
    }

    #[test]
    fn sequence_scenario_expands_to_a_machine() {
        let text = r#"{
            "params": {"h": 3.0, "cur": 0.0, "l": 4.0, "s": 2.0,
                       "s_resid": 1.0, "exc": 2.0, "inh": -2.0},
            "letters": ["alpha", "beta"],
            "variants": {"alpha": "OK", "beta": "bad"},
            "decisions": ["OK", "bad"],
            "emotions": {"OK": "neutral", "bad": "scary"}
        }"#;
        let sc: SequenceScenario = serde_json::from_str(text).unwrap();
        let mut m = sc.build(1).unwrap();
        let res = m.run_query1(2, 16, 50).unwrap();
        assert_eq!(res.letter, "beta");
        let named = res.decision.named(m.index());
        assert!(named["bad"] > 0.95, "{named:?}");
    }

    #[test]
    fn sentence_scenario_parses_and_judges() {
        let text = r#"{
            "templates": [{
                "id": "svo",
                "roles": {"subject": ["noun"], "verb": ["transitive-verb"],
                          "object": ["noun"]},
                "language_order": ["subject", "verb", "object"]
            }],
            "words": [
                {"surface": "baby", "pos": ["noun"]},
                {"surface": "eats", "pos": ["transitive-verb", "intransitive-verb"]},
                {"surface": "banana", "pos": ["noun"]}
            ],
            "judgments": {
                "decisions": ["pleasant"],
                "threshold": 5.0,
                "associations": [
                    {"word": "baby", "decision": "pleasant", "weight": 2.0},
                    {"word": "eats", "decision": "pleasant", "weight": 2.0},
                    {"word": "banana", "decision": "pleasant", "weight": 2.0}
                ]
            },
            "corpus": [{"sentence": "baby eats banana",
                        "expect": {"template": "svo",
                                   "bindings": {"subject": "baby", "verb": "eats",
                                                "object": "banana"},
                                   "judgment": "pleasant"}}]
        }"#;
        let sc: SentenceScenario = serde_json::from_str(text).unwrap();
        let mut world = sc.build(3).unwrap();
        let parse = world.parse_sentence("baby eats banana").unwrap();
        assert_eq!(parse.template, "svo");
        let (outline, res) = world.judge(&parse, 12, 100, 3).unwrap();
        assert_eq!(outline.constituents.len(), 3);
        let named = res.named(&world.iks.concept_index);
        assert!(named["pleasant"] > 0.95, "{named:?}");
        assert!(matches!(
            world.parse_sentence("baby ghost banana"),
            Err(Error::UnknownWord(_))
        ));
    }
}
