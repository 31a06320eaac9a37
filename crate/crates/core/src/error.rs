use thiserror::Error;

/// Inequality identifiers for sequence circuit parameter validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Inequality {
    /// h <= cur + l
    I1,
    /// h > s + cur
    I2,
    /// h <= exc + s + cur
    I3,
    /// h > exc + cur
    I4,
    /// h > cur + l + inh
    I5,
    /// h <= cur + l + inh + s_resid
    I6,
    /// s_resid < s
    Residual,
}

impl std::fmt::Display for Inequality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Inequality::I1 => "I1: h <= cur + l",
            Inequality::I2 => "I2: h > s + cur",
            Inequality::I3 => "I3: h <= exc + s + cur",
            Inequality::I4 => "I4: h > exc + cur",
            Inequality::I5 => "I5: h > cur + l + inh",
            Inequality::I6 => "I6: h <= cur + l + inh + s_resid",
            Inequality::Residual => "s_resid < s",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown neuron id {0}")]
    UnknownNeuron(u32),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("no free (untagged) neuron available")]
    NoFreeNeuron,
    #[error("role `{0}` is already bound")]
    RoleBusy(String),
    #[error("role `{0}` is not bound")]
    RoleUnbound(String),
    #[error("invalid circuit parameters, violated: {0:?}")]
    InvalidParams(Vec<Inequality>),
    #[error("goal {goal} out of range 1..={max}")]
    GoalOutOfRange { goal: i64, max: u32 },
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("count already started")]
    AlreadyStarted,
    #[error("count is at the end of the sequence")]
    AtEnd,
    #[error("symbol `{0}` already present in lexicon")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` not found in lexicon")]
    NotFound(String),
    #[error("duplicate template id `{0}`")]
    DuplicateTemplate(String),
    #[error("no templates loaded")]
    NoTemplate,
    #[error("no candidate template matches the sentence prefix at `{0}`")]
    NoCandidates(String),
    #[error("sentence is ambiguous between templates {0:?}")]
    Ambiguous(Vec<String>),
    #[error("no template was completed by the sentence")]
    Incomplete,
    #[error("no sentence is open")]
    NoOpenSentence,
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("spec file error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad spec file: {0}")]
    Spec(String),
}

impl Error {
    /// Stable kebab-case name, used in scenario expectations and exit-code
    /// mapping.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownNeuron(_) => "unknown-neuron",
            Error::UnknownConcept(_) => "unknown-concept",
            Error::NoFreeNeuron => "no-free-neuron",
            Error::RoleBusy(_) => "role-busy",
            Error::RoleUnbound(_) => "role-unbound",
            Error::InvalidParams(_) => "invalid-params",
            Error::GoalOutOfRange { .. } => "goal-out-of-range",
            Error::UnknownLetter(_) => "unknown-letter",
            Error::AlreadyStarted => "already-started",
            Error::AtEnd => "at-end",
            Error::DuplicateSymbol(_) => "duplicate-symbol",
            Error::NotFound(_) => "not-found",
            Error::DuplicateTemplate(_) => "duplicate-template",
            Error::NoTemplate => "no-template",
            Error::NoCandidates(_) => "no-candidates",
            Error::Ambiguous(_) => "ambiguous",
            Error::Incomplete => "incomplete",
            Error::NoOpenSentence => "no-open-sentence",
            Error::UnknownWord(_) => "unknown-word",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Spec(_) => "spec",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
