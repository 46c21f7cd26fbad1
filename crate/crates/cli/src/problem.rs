//! Problem files: a command, one or more primes and a command-specific
//! payload.

use std::fmt;

use dmodp::algebra::is_prime;
use dmodp::connection::{ConnectionSpec, MatrixRow};
use dmodp::dixmier::{AutWord, Generator};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Pcurv,
    Psupport,
    Pcycle,
    Push,
    Derham,
    DixmierVerify,
    LiftObstruction,
    LiftsIso,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pcurv => "pcurv",
            Command::Psupport => "psupport",
            Command::Pcycle => "pcycle",
            Command::Push => "push",
            Command::Derham => "derham",
            Command::DixmierVerify => "dixmier-verify",
            Command::LiftObstruction => "lift-obstruction",
            Command::LiftsIso => "lifts-iso",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Primes {
    One(u64),
    Many(Vec<u64>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_reductions: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    command: Command,
    #[serde(default, alias = "primes")]
    prime: Option<Primes>,
    #[serde(default)]
    payload: Value,
    #[serde(default)]
    budgets: Option<Budgets>,
    #[serde(default)]
    seed: Option<u64>,
}

/// A module on affine `n`-space: a connection matrix, a cyclic operator
/// `D/D·L`, or the exponential `e^f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<ConnectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponential: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl ModuleSpec {
    fn check(&self) -> Result<(), String> {
        let given = [self.connection.is_some(), self.cyclic.is_some(), self.exponential.is_some()];
        match given.iter().filter(|g| **g).count() {
            1 => Ok(()),
            _ => Err("give exactly one of `connection`, `cyclic`, `exponential`".into()),
        }
    }
}

fn default_derham_bound() -> u32 {
    10
}

fn default_iso_bound() -> u32 {
    20
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcurvPayload {
    #[serde(flatten)]
    pub module: ModuleSpec,
    /// Compute `(λ∂ + Θ)^p` instead.
    #[serde(default)]
    pub lambda: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsupportPayload {
    #[serde(flatten)]
    pub module: ModuleSpec,
    #[serde(default)]
    pub lagrangian: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushPayload {
    /// `π(x1)`, a monic polynomial.
    pub map: String,
    pub source: ModuleSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerhamPayload {
    #[serde(flatten)]
    pub module: ModuleSpec,
    #[serde(default = "default_derham_bound")]
    pub bound: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DixmierPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<AutWord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<AutWord>>,
    /// Enumerate all words up to `max_len` over these generators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Generator>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    /// Also report the p-support of `D/D·A(∂)`.
    #[serde(default)]
    pub support: bool,
}

impl DixmierPayload {
    pub fn all_words(&self) -> Vec<AutWord> {
        let mut out = Vec::new();
        out.extend(self.word.iter().cloned());
        out.extend(self.words.iter().flatten().cloned());
        if let Some(g) = &self.generators {
            out.extend(dmodp::dixmier::all_words(g, self.max_len.unwrap_or(1)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionPayload {
    #[serde(flatten)]
    pub module: ModuleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u32>,
}

/// Two lifts `lift(base) + p·alpha_i`; `base` defaults to the trivial
/// connection and a missing `alpha_i` to zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoPayload {
    pub n: usize,
    #[serde(default = "one")]
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<ConnectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<Vec<Vec<MatrixRow>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<Vec<Vec<MatrixRow>>>,
    #[serde(default = "default_iso_bound")]
    pub bound: u32,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Pcurv(PcurvPayload),
    Psupport(PsupportPayload),
    Pcycle(ModuleSpec),
    Push(PushPayload),
    Derham(DerhamPayload),
    DixmierVerify(DixmierPayload),
    LiftObstruction(ObstructionPayload),
    LiftsIso(IsoPayload),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub command: Command,
    /// Sorted, without repeats.
    pub primes: Vec<u64>,
    pub payload: Payload,
    /// The payload as written, echoed into the certificate.
    pub raw_payload: Value,
    pub budgets: Budgets,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemError {
    Parse { line: usize, column: usize, message: String },
    BadPrime(String),
}

impl ProblemError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ProblemError::Parse { .. } => 4,
            ProblemError::BadPrime(_) => 2,
        }
    }
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::Parse { line, column, message } => write!(f, "parse error at line {line}, column {column}: {message}"),
            ProblemError::BadPrime(m) => write!(f, "bad prime: {m}"),
        }
    }
}

fn payload_error(message: impl fmt::Display) -> ProblemError {
    ProblemError::Parse {
        line: 0,
        column: 0,
        message: format!("payload: {message}"),
    }
}

fn typed<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, ProblemError> {
    let v = if v.is_null() { Value::Object(Default::default()) } else { v.clone() };
    serde_json::from_value(v).map_err(payload_error)
}

pub fn parse_problem(text: &[u8]) -> Result<ProblemSpec, ProblemError> {
    let text = std::str::from_utf8(text).map_err(|e| ProblemError::Parse {
        line: 0,
        column: 0,
        message: format!("input is not UTF-8: {e}"),
    })?;
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| ProblemError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut primes = match raw.prime {
        None => return Err(payload_error("missing `prime`")),
        Some(Primes::One(p)) => vec![p],
        Some(Primes::Many(v)) => v,
    };
    if primes.is_empty() {
        return Err(ProblemError::BadPrime("empty prime list".into()));
    }
    if let Some(p) = primes.iter().find(|p| !is_prime(**p)) {
        return Err(ProblemError::BadPrime(format!("{p} is not prime")));
    }
    primes.sort_unstable();
    primes.dedup();
    let payload = match raw.command {
        Command::Pcurv => Payload::Pcurv(typed(&raw.payload)?),
        Command::Psupport => Payload::Psupport(typed(&raw.payload)?),
        Command::Pcycle => Payload::Pcycle(typed(&raw.payload)?),
        Command::Push => Payload::Push(typed(&raw.payload)?),
        Command::Derham => Payload::Derham(typed(&raw.payload)?),
        Command::DixmierVerify => Payload::DixmierVerify(typed(&raw.payload)?),
        Command::LiftObstruction => Payload::LiftObstruction(typed(&raw.payload)?),
        Command::LiftsIso => Payload::LiftsIso(typed(&raw.payload)?),
    };
    let module = match &payload {
        Payload::Pcurv(p) => Some(&p.module),
        Payload::Psupport(p) => Some(&p.module),
        Payload::Pcycle(m) => Some(m),
        Payload::Push(p) => Some(&p.source),
        Payload::Derham(p) => Some(&p.module),
        Payload::LiftObstruction(p) => Some(&p.module),
        Payload::DixmierVerify(d) => {
            if d.all_words().is_empty() {
                return Err(payload_error("no words given"));
            }
            None
        }
        Payload::LiftsIso(_) => None,
    };
    if let Some(m) = module {
        m.check().map_err(payload_error)?;
    }
    Ok(ProblemSpec {
        command: raw.command,
        primes,
        payload,
        raw_payload: raw.payload,
        budgets: raw.budgets.unwrap_or_default(),
        seed: raw.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_spec() {
        let s = parse_problem(br#"{"command":"pcycle","prime":5,"payload":{"cyclic":"d1^2 - x1"}}"#).unwrap();
        assert_eq!(s.command, Command::Pcycle);
        assert_eq!(s.primes, vec![5]);
        assert_eq!(
            s.payload,
            Payload::Pcycle(ModuleSpec {
                connection: None,
                cyclic: Some("d1^2 - x1".into()),
                exponential: None,
                n: None
            })
        );
    }

    #[test]
    fn prime_lists_are_sorted() {
        let s = parse_problem(br#"{"command":"pcycle","primes":[7,5,7],"payload":{"exponential":"x1^3/3"}}"#).unwrap();
        assert_eq!(s.primes, vec![5, 7]);
    }

    #[test]
    fn rejections() {
        let bad = parse_problem(br#"{"command":"pcycle","prime":4,"payload":{"cyclic":"d1"}}"#).unwrap_err();
        assert_eq!(bad.exit_code(), 2);
        let e = parse_problem(b"{\"command\":\n \"pcycle\",").unwrap_err();
        assert!(matches!(e, ProblemError::Parse { line: 2, .. }));
        assert_eq!(e.exit_code(), 4);
        for text in [
            r#"{"command":"frobnicate","prime":5}"#,
            r#"{"command":"pcycle","prime":5,"payload":{}}"#,
            r#"{"command":"pcycle","prime":5,"payload":{"cyclic":"d1","exponential":"x1"}}"#,
            r#"{"command":"pcycle","prime":5,"payload":{"cyclic":"d1","extra":1}}"#,
            r#"{"command":"dixmier-verify","prime":5,"payload":{}}"#,
        ] {
            assert_eq!(parse_problem(text.as_bytes()).unwrap_err().exit_code(), 4, "{text}");
        }
    }

    #[test]
    fn word_payloads() {
        let s = parse_problem(
            br#"{"command":"dixmier-verify","prime":5,"payload":{"word":[{"kind":"shear","f":"x^2"}]}}"#,
        )
        .unwrap();
        let Payload::DixmierVerify(d) = s.payload else { panic!() };
        assert_eq!(d.all_words(), vec![vec![Generator::shear("x^2")]]);
    }
}
