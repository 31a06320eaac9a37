//! Lexicon: surface symbols with attribute lists, each represented by a
//! dedicated neuron wired bidirectionally (supra-threshold) to a partner
//! neuron in the symbolic structure, so activating either side activates the
//! other a round later.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::snn::{Network, NeuronId, NeuronSpec, Tag};

#[derive(Debug, Clone)]
pub struct LexiconEntry {
    pub symbol: String,
    /// The lexicon-side neuron for this symbol.
    pub neuron: NeuronId,
    /// The paired neuron in the symbolic structure.
    pub partner: NeuronId,
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn new() -> Self {
        Lexicon::default()
    }

    /// Add a symbol: allocates its lexicon neuron in `net` and installs
    /// bidirectional above-threshold edges to the partner neuron.
    pub fn add_symbol<S: Scalar>(
        &mut self,
        net: &mut Network<S>,
        symbol: &str,
        attributes: BTreeMap<String, String>,
        partner: NeuronId,
    ) -> Result<&LexiconEntry> {
        if self.entries.contains_key(symbol) {
            return Err(Error::DuplicateSymbol(symbol.to_owned()));
        }
        let partner_th = net.spec(partner)?.threshold;
        let neuron = net.add_neuron(NeuronSpec::threshold_gate(S::one()).with_tag(Tag::Symbol));
        net.add_edge(neuron, partner, partner_th + S::one(), Some("lexical"))?;
        net.add_edge(partner, neuron, S::one() + S::one(), Some("lexical"))?;
        let entry = LexiconEntry {
            symbol: symbol.to_owned(),
            neuron,
            partner,
            attributes,
        };
        Ok(self.entries.entry(symbol.to_owned()).or_insert(entry))
    }

    pub fn lookup(&self, symbol: &str) -> Result<&LexiconEntry> {
        self.entries
            .get(symbol)
            .ok_or_else(|| Error::NotFound(symbol.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }
}
