//! Incremental recognition of fixed-template sentences. A sentence is read
//! word by word; every stored template is a candidate until a word cannot
//! fill its next open role, so the candidate set only shrinks. Accepted
//! sentences reduce to role bindings, which ground out as a story outline in
//! the intuitive network for judgment by cascade.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iks::{CascadeResult, ConceptGraph, LearningConfig, WtaPolicy};
use crate::lexicon::Lexicon;
use crate::scalar::Scalar;
use crate::snn::NeuronId;
use crate::wm::{BindingId, RoleId, WorkingMemory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartOfSpeech {
    Noun,
    TransitiveVerb,
    IntransitiveVerb,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Word {
    pub surface: String,
    pub pos: BTreeSet<PartOfSpeech>,
}

impl Word {
    pub fn new(surface: &str, pos: impl IntoIterator<Item = PartOfSpeech>) -> Self {
        Word {
            surface: surface.to_owned(),
            pos: pos.into_iter().collect(),
        }
    }
}

/// Sentence template: named roles with admissible parts of speech, plus the
/// surface order in which the language presents them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub roles: BTreeMap<String, BTreeSet<PartOfSpeech>>,
    pub language_order: Vec<String>,
}

impl Template {
    pub fn arity(&self) -> usize {
        self.roles.len()
    }

    fn validate(&self) -> Result<()> {
        let order: BTreeSet<_> = self.language_order.iter().collect();
        if order.len() != self.language_order.len() || order != self.roles.keys().collect() {
            return Err(Error::Spec(format!(
                "template `{}`: language_order must be a permutation of its roles",
                self.id
            )));
        }
        Ok(())
    }
}

/// One still-viable reading of the sentence prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub template: String,
    pub bindings: BTreeMap<String, String>,
    /// Words consumed so far (index into the template's language order).
    pub consumed: usize,
}

#[derive(Debug, Clone, Default)]
pub struct CandidateSet {
    pub alive: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    pub fn template_ids(&self) -> Vec<&str> {
        self.alive.iter().map(|c| c.template.as_str()).collect()
    }
}

/// Final nonterminal-free reading: template id plus role -> word bindings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReducedParse {
    pub template: String,
    pub bindings: BTreeMap<String, String>,
}

/// Grounding of a parse in the intuitive network: one freshly learned story
/// neuron plus the concept neuron of each constituent.
#[derive(Debug, Clone, Serialize)]
pub struct StoryOutline {
    pub story: String,
    pub story_neuron: NeuronId,
    pub constituents: BTreeMap<String, NeuronId>,
}

struct OpenSentence {
    alive: Vec<Candidate>,
    position: usize,
    bindings: Vec<BindingId>,
}

/// Incremental parser. Optionally carries a working memory whose slot roles
/// are bound to the symbol neurons of incoming words for the duration of the
/// sentence, so the neural side tracks the symbolic side.
pub struct Parser<S: Scalar> {
    templates: Vec<Template>,
    wm: Option<WorkingMemory<S>>,
    symbols: BTreeMap<String, NeuronId>,
    slots: Vec<RoleId>,
    open: Option<OpenSentence>,
}

impl<S: Scalar> Default for Parser<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> Parser<S> {
    pub fn new() -> Self {
        Parser {
            templates: Vec::new(),
            wm: None,
            symbols: BTreeMap::new(),
            slots: Vec::new(),
            open: None,
        }
    }

    /// Attach a working memory and the word -> symbol-neuron map. One slot
    /// role per surface position is created, phases 0..n.
    pub fn with_memory(
        mut self,
        mut wm: WorkingMemory<S>,
        symbols: BTreeMap<String, NeuronId>,
        max_arity: u32,
    ) -> Self {
        assert!(max_arity <= wm.config().period);
        self.slots = (0..max_arity)
            .map(|i| wm.add_role(&format!("slot{i}"), i))
            .collect();
        self.wm = Some(wm);
        self.symbols = symbols;
        self
    }

    pub fn memory(&self) -> Option<&WorkingMemory<S>> {
        self.wm.as_ref()
    }

    pub fn load_templates(&mut self, templates: Vec<Template>) -> Result<()> {
        for t in &templates {
            t.validate()?;
            if self.templates.iter().any(|k| k.id == t.id)
                || templates.iter().filter(|k| k.id == t.id).count() > 1
            {
                return Err(Error::DuplicateTemplate(t.id.clone()));
            }
        }
        self.templates.extend(templates);
        Ok(())
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    /// Open a sentence with every template as a live candidate. An already
    /// open sentence is discarded (its working-memory bindings released).
    pub fn new_sentence(&mut self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::NoTemplate);
        }
        self.abort_sentence();
        self.open = Some(OpenSentence {
            alive: self
                .templates
                .iter()
                .map(|t| Candidate {
                    template: t.id.clone(),
                    bindings: BTreeMap::new(),
                    consumed: 0,
                })
                .collect(),
            position: 0,
            bindings: Vec::new(),
        });
        Ok(())
    }

    fn abort_sentence(&mut self) {
        if let Some(open) = self.open.take() {
            if let Some(wm) = &mut self.wm {
                for b in open.bindings {
                    wm.release(b);
                }
            }
        }
    }

    fn template(&self, id: &str) -> &Template {
        self.templates.iter().find(|t| t.id == id).expect("known template id")
    }

    /// Consume one word: each candidate either fills its next open role (in
    /// its template's surface order) with a compatible part of speech, or
    /// dies. The surviving set is returned; an empty set is an error and
    /// closes the sentence.
    pub fn ingest_word(&mut self, word: &Word) -> Result<CandidateSet> {
        let open = self.open.as_mut().ok_or(Error::NoOpenSentence)?;
        let mut survivors = Vec::new();
        for cand in &open.alive {
            let t = self
                .templates
                .iter()
                .find(|t| t.id == cand.template)
                .expect("known template id");
            if cand.consumed >= t.arity() {
                continue; // template already saturated
            }
            let role = &t.language_order[cand.consumed];
            if word.pos.is_disjoint(&t.roles[role]) {
                continue;
            }
            let mut next = cand.clone();
            next.bindings.insert(role.clone(), word.surface.clone());
            next.consumed += 1;
            survivors.push(next);
        }
        if survivors.is_empty() {
            self.abort_sentence();
            return Err(Error::NoCandidates(word.surface.clone()));
        }
        open.alive = survivors;
        let position = open.position;
        open.position += 1;
        let snapshot = CandidateSet {
            alive: self.open.as_ref().unwrap().alive.clone(),
        };
        if let Some(wm) = &mut self.wm {
            if let (Some(&slot), Some(&symbol)) =
                (self.slots.get(position), self.symbols.get(&word.surface))
            {
                let b = wm.bind(slot, symbol)?;
                if let Some(open) = self.open.as_mut() {
                    open.bindings.push(b);
                }
            }
        }
        Ok(snapshot)
    }

    /// Close the sentence. Exactly one candidate must have all its roles
    /// filled; fewer is [`Error::Incomplete`], more is [`Error::Ambiguous`].
    pub fn end_sentence(&mut self) -> Result<ReducedParse> {
        let open = self.open.take().ok_or(Error::NoOpenSentence)?;
        if let Some(wm) = &mut self.wm {
            for b in open.bindings {
                wm.release(b);
            }
        }
        let mut complete: Vec<_> = open
            .alive
            .into_iter()
            .filter(|c| c.consumed == self.template(&c.template).arity())
            .collect();
        match complete.len() {
            0 => Err(Error::Incomplete),
            1 => {
                let c = complete.pop().unwrap();
                Ok(ReducedParse {
                    template: c.template,
                    bindings: c.bindings,
                })
            }
            _ => Err(Error::Ambiguous(
                complete.into_iter().map(|c| c.template).collect(),
            )),
        }
    }

    /// Ground a parse: allocate a fresh story neuron over the constituents'
    /// concept neurons. Constituent words must exist in the lexicon and have
    /// concepts in the intuitive network.
    pub fn to_story_outline(
        &self,
        parse: &ReducedParse,
        iks: &mut ConceptGraph<S>,
        lex: &Lexicon,
    ) -> Result<StoryOutline> {
        let mut constituents = BTreeMap::new();
        for (role, surface) in &parse.bindings {
            lex.lookup(surface)?;
            constituents.insert(role.clone(), iks.unique_concept(surface)?);
        }
        let words: Vec<&str> = self
            .template(&parse.template)
            .language_order
            .iter()
            .map(|r| parse.bindings[r].as_str())
            .collect();
        let story = format!("story:{}:{}", parse.template, words.join(" "));
        let pattern: BTreeSet<NeuronId> = constituents.values().copied().collect();
        let cfg = LearningConfig::new(S::from_f64_lossy(0.1), WtaPolicy::FirstUnused);
        let story_neuron = iks.learn_concept(&story, &pattern, &cfg)?;
        Ok(StoryOutline {
            story,
            story_neuron,
            constituents,
        })
    }
}

/// Judge a story by cascading from all its constituents at once. The
/// judgment network is built so that single constituents are sub-threshold
/// while the joint pattern clears the decision thresholds.
pub fn story_cascade<S: Scalar>(
    outline: &StoryOutline,
    iks: &ConceptGraph<S>,
    horizon: u32,
    trials: u32,
    seed: u64,
) -> CascadeResult {
    let start: BTreeSet<NeuronId> = outline.constituents.values().copied().collect();
    iks.cascade(&start, horizon, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snn::{Network, NeuronSpec, Simulation, Tag};
    use crate::wm::AlternationConfig;
    use PartOfSpeech::*;

    fn t(id: &str, roles: &[(&str, &[PartOfSpeech])], order: &[&str]) -> Template {
        Template {
            id: id.to_owned(),
            roles: roles
                .iter()
                .map(|(r, ps)| (r.to_string(), ps.iter().copied().collect()))
                .collect(),
            language_order: order.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn grammar() -> Vec<Template> {
        vec![
            t(
                "svo",
                &[
                    ("subject", &[Noun]),
                    ("verb", &[TransitiveVerb]),
                    ("object", &[Noun]),
                ],
                &["subject", "verb", "object"],
            ),
            t(
                "sv",
                &[("subject", &[Noun]), ("verb", &[IntransitiveVerb])],
                &["subject", "verb"],
            ),
        ]
    }

    fn parser() -> Parser<f64> {
        let mut p = Parser::new();
        p.load_templates(grammar()).unwrap();
        p
    }

    fn noun(s: &str) -> Word {
        Word::new(s, [Noun])
    }

    #[test]
    fn template_bookkeeping_errors() {
        let mut p: Parser<f64> = Parser::new();
        assert!(matches!(p.new_sentence(), Err(Error::NoTemplate)));
        p.load_templates(grammar()).unwrap();
        assert!(matches!(
            p.load_templates(grammar()),
            Err(Error::DuplicateTemplate(_))
        ));
        let bad = t("bad", &[("subject", &[Noun])], &["verb"]);
        assert!(p.load_templates(vec![bad]).is_err());
        assert!(matches!(
            p.ingest_word(&noun("boy")),
            Err(Error::NoOpenSentence)
        ));
    }

    #[test]
    fn candidates_narrow_monotonically_to_svo() {
        let mut p = parser();
        p.new_sentence().unwrap();
        let c1 = p.ingest_word(&noun("baby")).unwrap();
        assert_eq!(c1.len(), 2);
        let c2 = p
            .ingest_word(&Word::new("eats", [TransitiveVerb, IntransitiveVerb]))
            .unwrap();
        assert_eq!(c2.len(), 2, "ambiguous verb keeps both templates");
        let c3 = p.ingest_word(&noun("banana")).unwrap();
        assert_eq!(c3.template_ids(), ["svo"]);
        let parse = p.end_sentence().unwrap();
        assert_eq!(parse.template, "svo");
        assert_eq!(parse.bindings["subject"], "baby");
        assert_eq!(parse.bindings["verb"], "eats");
        assert_eq!(parse.bindings["object"], "banana");
    }

    #[test]
    fn intransitive_verb_selects_sv() {
        let mut p = parser();
        p.new_sentence().unwrap();
        p.ingest_word(&noun("boy")).unwrap();
        let c = p.ingest_word(&Word::new("runs", [IntransitiveVerb])).unwrap();
        assert_eq!(c.template_ids(), ["sv"]);
        assert_eq!(p.end_sentence().unwrap().template, "sv");
    }

    #[test]
    fn shorter_complete_reading_wins_at_end() {
        // "boy eats" leaves svo incomplete; sv is the unique complete parse.
        let mut p = parser();
        p.new_sentence().unwrap();
        p.ingest_word(&noun("boy")).unwrap();
        p.ingest_word(&Word::new("eats", [TransitiveVerb, IntransitiveVerb]))
            .unwrap();
        assert_eq!(p.end_sentence().unwrap().template, "sv");
    }

    #[test]
    fn dead_prefix_reports_no_candidates() {
        let mut p = parser();
        p.new_sentence().unwrap();
        p.ingest_word(&noun("banana")).unwrap();
        let err = p.ingest_word(&noun("banana")).unwrap_err();
        assert!(matches!(err, Error::NoCandidates(w) if w == "banana"));
        assert!(matches!(
            p.end_sentence(),
            Err(Error::NoOpenSentence),
        ));
    }

    #[test]
    fn incomplete_and_ambiguous_endings() {
        let mut p = parser();
        p.new_sentence().unwrap();
        p.ingest_word(&noun("boy")).unwrap();
        assert!(matches!(p.end_sentence(), Err(Error::Incomplete)));

        let mut p = parser();
        p.load_templates(vec![t(
            "sv2",
            &[("actor", &[Noun]), ("act", &[IntransitiveVerb])],
            &["actor", "act"],
        )])
        .unwrap();
        p.new_sentence().unwrap();
        p.ingest_word(&noun("boy")).unwrap();
        p.ingest_word(&Word::new("runs", [IntransitiveVerb])).unwrap();
        match p.end_sentence() {
            Err(Error::Ambiguous(ids)) => assert_eq!(ids, ["sv", "sv2"]),
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn candidate_set_only_shrinks() {
        let mut p = parser();
        p.new_sentence().unwrap();
        let words = [
            Word::new("boy", [Noun]),
            Word::new("kicks", [TransitiveVerb]),
            Word::new("ball", [Noun]),
        ];
        let mut prev: Option<BTreeSet<String>> = None;
        for w in &words {
            let set: BTreeSet<String> = p
                .ingest_word(w)
                .unwrap()
                .alive
                .iter()
                .map(|c| c.template.clone())
                .collect();
            if let Some(prev) = &prev {
                assert!(set.is_subset(prev), "candidates only drop out");
            }
            prev = Some(set);
        }
    }

    /// Judgment fixture: concepts for three words, one decision wired so
    /// only the joint story pattern clears its threshold.
    fn judgment_iks() -> (ConceptGraph<f64>, Lexicon, Network<f64>) {
        let mut g = ConceptGraph::new(Network::new());
        let mut lex_net: Network<f64> = Network::new();
        let mut lex = Lexicon::new();
        for w in ["baby", "eats", "banana"] {
            let c = g
                .net
                .add_neuron(NeuronSpec::threshold_gate(3.0).with_tag(Tag::Concept));
            g.register(w, c);
            let partner = lex_net.add_neuron(NeuronSpec::threshold_gate(3.0));
            lex.add_symbol(&mut lex_net, w, BTreeMap::new(), partner)
                .unwrap();
        }
        let d = g
            .net
            .add_neuron(NeuronSpec::threshold_gate(5.0).with_tag(Tag::Decision));
        g.register("pleasant", d);
        g.net.add_edge(d, d, 6.0, None).unwrap();
        for w in ["baby", "eats", "banana"] {
            let c = g.unique_concept(w).unwrap();
            g.net.add_edge(c, d, 2.0, Some("association")).unwrap();
        }
        // free pool for story allocation
        for _ in 0..4 {
            g.net.add_neuron(NeuronSpec::threshold_gate(3.0));
        }
        (g, lex, lex_net)
    }

    #[test]
    fn story_outline_grounds_and_judges_superadditively() {
        let (mut iks, lex, _) = judgment_iks();
        let mut p = parser();
        p.new_sentence().unwrap();
        p.ingest_word(&noun("baby")).unwrap();
        p.ingest_word(&Word::new("eats", [TransitiveVerb, IntransitiveVerb]))
            .unwrap();
        p.ingest_word(&noun("banana")).unwrap();
        let parse = p.end_sentence().unwrap();
        let outline = p.to_story_outline(&parse, &mut iks, &lex).unwrap();
        assert_eq!(outline.constituents.len(), 3);
        assert_eq!(outline.story, "story:svo:baby eats banana");
        // the story neuron came from the free pool and now has inbound edges
        assert!(iks
            .net
            .find_edge(outline.constituents["subject"], outline.story_neuron)
            .is_some());

        let res = story_cascade(&outline, &iks, 12, 5, 0);
        let d = iks.unique_concept("pleasant").unwrap();
        assert_eq!(res.probability(d), 1.0, "joint pattern decides");
        assert!(res.stabilized);

        // single constituent: sub-threshold, no decision
        let single = StoryOutline {
            story: "fragment".into(),
            story_neuron: outline.story_neuron,
            constituents: [("object".to_string(), iks.unique_concept("banana").unwrap())]
                .into_iter()
                .collect(),
        };
        let res = story_cascade(&single, &iks, 12, 5, 0);
        assert!(res.distribution.is_empty());
        assert!(!res.stabilized);
    }

    #[test]
    fn unknown_words_fail_grounding() {
        let (mut iks, lex, _) = judgment_iks();
        let p = parser();
        let parse = ReducedParse {
            template: "sv".into(),
            bindings: [("subject".to_string(), "ghost".to_string())]
                .into_iter()
                .collect(),
        };
        assert!(p.to_story_outline(&parse, &mut iks, &lex).is_err());
    }

    #[test]
    fn working_memory_tracks_word_slots() {
        let mut net: Network<f64> = Network::new();
        let symbols: BTreeMap<String, NeuronId> = ["boy", "kicks", "ball"]
            .iter()
            .map(|w| {
                (
                    w.to_string(),
                    net.add_neuron(NeuronSpec::threshold_gate(3.0).with_tag(Tag::Symbol)),
                )
            })
            .collect();
        let n = net.len();
        let sim = Simulation::new(net, crate::snn::FiringState::silent(n), 0);
        let wm = WorkingMemory::new(sim, AlternationConfig { period: 3, window: 2 });
        let mut p = parser().with_memory(wm, symbols, 3);
        p.new_sentence().unwrap();
        p.ingest_word(&noun("boy")).unwrap();
        p.ingest_word(&Word::new("kicks", [TransitiveVerb])).unwrap();
        p.ingest_word(&noun("ball")).unwrap();
        p.end_sentence().unwrap();
        let events: Vec<&str> = p
            .memory()
            .unwrap()
            .trace()
            .events
            .iter()
            .map(|(_, e)| e.as_str())
            .collect();
        assert_eq!(
            events,
            [
                "bind:slot0",
                "bind:slot1",
                "bind:slot2",
                "release:slot0",
                "release:slot1",
                "release:slot2"
            ]
        );
    }
}
