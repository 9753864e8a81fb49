//! On-disk model format (JSON). All indices in the file are 1-based.
//!
//! ```json
//! {
//!   "states": 2, "actions": 2, "beta": 0.5, "delta": 1e-6,
//!   "rates":   [{"i": 1, "j": 2, "a": 1, "poly": [{"coef": 1.0}]}],
//!   "rewards": [{"i": 1, "a": 1, "terms": [{"kind": "reglog", "coef": 1.0, "state_index": 1, "offset": -0.5}]}]
//! }
//! ```
//!
//! Omitted rates are zero. Omitted diagonal rates are filled in so that every row sums
//! to zero; the filled-in entries are listed by [`crate::validate_model`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MfgError, Result};
use crate::model::{ModelSpec, RewardTerm, DEFAULT_DELTA};
use crate::poly::{Monomial, Polynomial};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: usize,
    pub actions: usize,
    pub beta: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_names: Option<Vec<String>>,
    #[serde(default)]
    pub rates: Vec<RateEntry>,
    #[serde(default)]
    pub rewards: Vec<RewardEntry>,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEntry {
    pub i: usize,
    pub j: usize,
    pub a: usize,
    pub poly: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardEntry {
    pub i: usize,
    pub a: usize,
    pub terms: Vec<TermEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TermEntry {
    Poly {
        poly: Vec<Monomial>,
    },
    Reglog {
        coef: f64,
        state_index: usize,
        #[serde(default)]
        offset: f64,
    },
}

fn zero_based(v: usize, n: usize, field: &str) -> Result<usize> {
    if v == 0 || v > n {
        return Err(MfgError::MalformedModel(format!("{field} = {v} is outside 1..={n}")));
    }
    Ok(v - 1)
}

impl ModelFile {
    pub fn into_model(self) -> Result<ModelSpec> {
        let (s, na) = (self.states, self.actions);
        if s < 2 {
            return Err(MfgError::MalformedModel(format!("states = {s}, need at least 2")));
        }
        if na < 1 {
            return Err(MfgError::MalformedModel("actions must be at least 1".into()));
        }
        let mut b = ModelSpec::builder(s, na, self.beta).delta(self.delta);
        if let Some(n) = self.state_names {
            b = b.state_names(n);
        }
        if let Some(n) = self.action_names {
            b = b.action_names(n);
        }
        for (k, r) in self.rates.into_iter().enumerate() {
            let ctx = |f: &str| format!("rates[{k}].{f}");
            let i = zero_based(r.i, s, &ctx("i"))?;
            let j = zero_based(r.j, s, &ctx("j"))?;
            let a = zero_based(r.a, na, &ctx("a"))?;
            check_powers(&r.poly, s, &ctx("poly"))?;
            b = b.rate(i, j, a, Polynomial { terms: r.poly });
        }
        for (k, r) in self.rewards.into_iter().enumerate() {
            let ctx = |f: &str| format!("rewards[{k}].{f}");
            let i = zero_based(r.i, s, &ctx("i"))?;
            let a = zero_based(r.a, na, &ctx("a"))?;
            for t in r.terms {
                let term = match t {
                    TermEntry::Poly { poly } => {
                        check_powers(&poly, s, &ctx("terms.poly"))?;
                        RewardTerm::Poly(Polynomial { terms: poly })
                    }
                    TermEntry::Reglog { coef, state_index, offset } => RewardTerm::RegLog {
                        coef,
                        state: zero_based(state_index, s, &ctx("terms.state_index"))?,
                        offset,
                    },
                };
                b = b.reward(i, a, term);
            }
        }
        b.build()
    }

    /// Serialisable form of `model`. Diagonal rates that were auto-completed are omitted.
    pub fn from_model(model: &ModelSpec) -> ModelFile {
        let (s, na) = (model.num_states(), model.num_actions());
        let auto = model.autocompleted();
        let mut rates = Vec::new();
        for i in 0..s {
            for j in 0..s {
                for a in 0..na {
                    let p = model.rate(i, j, a);
                    if p.is_zero() || (i == j && auto.contains(&(i, a))) {
                        continue;
                    }
                    rates.push(RateEntry { i: i + 1, j: j + 1, a: a + 1, poly: p.terms.clone() });
                }
            }
        }
        let mut rewards = Vec::new();
        for i in 0..s {
            for a in 0..na {
                let terms: Vec<TermEntry> = model
                    .reward_terms(i, a)
                    .iter()
                    .map(|t| match t {
                        RewardTerm::Poly(p) => TermEntry::Poly { poly: p.terms.clone() },
                        RewardTerm::RegLog { coef, state, offset } => {
                            TermEntry::Reglog { coef: *coef, state_index: state + 1, offset: *offset }
                        }
                    })
                    .collect();
                if !terms.is_empty() {
                    rewards.push(RewardEntry { i: i + 1, a: a + 1, terms });
                }
            }
        }
        let default_names = |names: &[String]| names.iter().enumerate().all(|(k, n)| *n == (k + 1).to_string());
        ModelFile {
            states: s,
            actions: na,
            beta: model.beta(),
            delta: model.delta(),
            state_names: (!default_names(model.state_names())).then(|| model.state_names().to_vec()),
            action_names: (!default_names(model.action_names())).then(|| model.action_names().to_vec()),
            rates,
            rewards,
        }
    }
}

fn check_powers(poly: &[Monomial], s: usize, field: &str) -> Result<()> {
    for t in poly {
        if t.powers.len() > s && t.powers[s..].iter().any(|&p| p > 0) {
            return Err(MfgError::MalformedModel(format!(
                "{field}: exponent vector references a state index beyond {s}"
            )));
        }
    }
    Ok(())
}

pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.into_model()
}

pub fn model_to_string(model: &ModelSpec) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(model)).expect("model serialisation cannot fail")
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MfgError::Io(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}

pub fn save_model(model: &ModelSpec, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_string(model) + "\n")?;
    Ok(())
}
