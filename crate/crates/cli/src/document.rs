//! JSON instance and result documents.
//!
//! Every document carries a `"problem"` tag. Big integers travel as decimal
//! strings and rationals as `"p/q"`, so nothing depends on a parser's native
//! number width. Unknown fields are rejected.

use std::fmt;
use std::str::FromStr;

use hmsched_core::scheduling::{
    BinPackingInstance, JobType, Machine, ProblemKind, SchedulingInstance,
};
use hmsched_core::{IntMatrix, NFoldInstance, SeparableQuadObjective};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::de::{DeserializeOwned, Error as _};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// A decimal string on the wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dec<T>(pub T);

impl<T: fmt::Display> Serialize for Dec<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de, T: FromStr> Deserialize<'de> for Dec<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.trim()
            .parse()
            .map(Dec)
            .map_err(|_| D::Error::custom(format!("expected a decimal integer string, got {s:?}")))
    }
}

/// A rational as `"p/q"` in lowest terms; plain integers are accepted on input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ratio(pub BigRational);

pub fn format_rational(v: &BigRational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.trim().parse().ok()?;
            if q == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(p.trim().parse().ok()?, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s)
            .map(Ratio)
            .ok_or_else(|| D::Error::custom(format!("expected a rational \"p/q\", got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDoc {
    pub kind: usize,
    #[serde(default = "one")]
    pub speed: u64,
}

fn one() -> u64 {
    1
}

fn default_kinds() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobTypeDoc {
    /// Per machine kind; `null` forbids the kind.
    pub processing: Vec<Option<u64>>,
    #[serde(default = "one")]
    pub weight: u64,
    pub multiplicity: Dec<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulingDoc {
    pub problem: String,
    #[serde(default = "default_kinds")]
    pub kinds: usize,
    pub machines: Vec<MachineDoc>,
    pub job_types: Vec<JobTypeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub entries: Vec<Dec<BigInt>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    pub quadratic: Vec<Ratio>,
    pub linear: Vec<Ratio>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NFoldDoc {
    pub problem: String,
    pub a1: MatrixDoc,
    pub a2: MatrixDoc,
    pub bricks: usize,
    pub rhs: Vec<Dec<BigInt>>,
    pub lower: Vec<Dec<BigInt>>,
    pub upper: Vec<Dec<BigInt>>,
    /// Omitted means the zero objective.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinPackingDoc {
    pub problem: String,
    pub bins: usize,
    pub capacity: u64,
    pub items: Vec<u64>,
}

/// Any instance document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceDoc {
    Scheduling(SchedulingDoc),
    NFold(NFoldDoc),
    BinPacking(BinPackingDoc),
}

/// A solved instance as printed by `solve --json` and read by `verify`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDoc {
    pub problem: String,
    pub method: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Ratio>,
    /// Jobs of each type (rows) on each machine (columns).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<Dec<BigUint>>>>,
    /// Point of an n-fold program.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Dec<BigInt>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Ratio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsDoc {
    pub phase1_steps: usize,
    pub steps: usize,
    pub searches: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_brick_radius: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sigma_radius: Option<u64>,
}

fn typed<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Input(format!("at {path}: {}", e.into_inner()))
    })
}

/// Parses JSON text and reports schema errors with the offending field path.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Input(format!("at {path}: {}", e.into_inner()))
    })
}

impl InstanceDoc {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("malformed JSON: {e}")))?;
        let tag = value
            .get("problem")
            .and_then(|p| p.as_str())
            .ok_or_else(|| CliError::Input("at problem: missing or not a string".into()))?
            .to_string();
        match tag.as_str() {
            "q-cmax" | "r-cmax" | "r-wc" => Ok(Self::Scheduling(typed(value)?)),
            "nfold" => Ok(Self::NFold(typed(value)?)),
            "binpacking" => Ok(Self::BinPacking(typed(value)?)),
            other => Err(CliError::Input(format!(
                "at problem: unknown problem {other:?} (expected q-cmax, r-cmax, r-wc, nfold or binpacking)"
            ))),
        }
    }

    pub fn to_json(&self) -> String {
        let text = match self {
            Self::Scheduling(d) => serde_json::to_string_pretty(d),
            Self::NFold(d) => serde_json::to_string_pretty(d),
            Self::BinPacking(d) => serde_json::to_string_pretty(d),
        };
        text.expect("documents always serialize")
    }
}

fn problem_kind(tag: &str) -> Result<ProblemKind, CliError> {
    match tag {
        "q-cmax" => Ok(ProblemKind::QCmax),
        "r-cmax" => Ok(ProblemKind::RCmax),
        "r-wc" => Ok(ProblemKind::RWc),
        other => Err(CliError::Input(format!(
            "{other:?} is not a scheduling problem"
        ))),
    }
}

pub fn problem_tag(kind: ProblemKind) -> &'static str {
    match kind {
        ProblemKind::QCmax => "q-cmax",
        ProblemKind::RCmax => "r-cmax",
        ProblemKind::RWc => "r-wc",
    }
}

impl SchedulingDoc {
    pub fn to_instance(&self) -> Result<SchedulingInstance, CliError> {
        let machines = self
            .machines
            .iter()
            .map(|m| Machine {
                kind: m.kind,
                speed: m.speed,
            })
            .collect();
        let types = self
            .job_types
            .iter()
            .map(|t| JobType {
                processing: t.processing.clone(),
                weight: t.weight,
                multiplicity: t.multiplicity.0.clone(),
            })
            .collect();
        Ok(SchedulingInstance::new(
            problem_kind(&self.problem)?,
            self.kinds,
            machines,
            types,
        )?)
    }

    pub fn from_instance(inst: &SchedulingInstance) -> Self {
        Self {
            problem: problem_tag(inst.problem()).into(),
            kinds: inst.kinds(),
            machines: inst
                .machines()
                .iter()
                .map(|m| MachineDoc {
                    kind: m.kind,
                    speed: m.speed,
                })
                .collect(),
            job_types: inst
                .job_types()
                .iter()
                .map(|t| JobTypeDoc {
                    processing: t.processing.clone(),
                    weight: t.weight,
                    multiplicity: Dec(t.multiplicity.clone()),
                })
                .collect(),
        }
    }
}

fn unwrap_all<T: Clone>(v: &[Dec<T>]) -> Vec<T> {
    v.iter().map(|d| d.0.clone()).collect()
}

impl MatrixDoc {
    fn to_matrix(&self) -> Result<IntMatrix, CliError> {
        Ok(IntMatrix::new(
            self.rows,
            self.cols,
            unwrap_all(&self.entries),
        )?)
    }
}

impl NFoldDoc {
    pub fn to_instance(&self) -> Result<NFoldInstance, CliError> {
        let dim = self.bricks * self.a1.cols;
        let objective = match &self.objective {
            Some(o) => SeparableQuadObjective::new(
                o.quadratic.iter().map(|r| r.0.clone()).collect(),
                o.linear.iter().map(|r| r.0.clone()).collect(),
            )?,
            None => SeparableQuadObjective::zero(dim),
        };
        Ok(NFoldInstance::new(
            self.a1.to_matrix()?,
            self.a2.to_matrix()?,
            self.bricks,
            unwrap_all(&self.rhs),
            unwrap_all(&self.lower),
            unwrap_all(&self.upper),
            objective,
        )?)
    }
}

impl BinPackingDoc {
    pub fn to_instance(&self) -> Result<BinPackingInstance, CliError> {
        Ok(BinPackingInstance::new(
            self.bins,
            self.capacity,
            self.items.clone(),
        )?)
    }
}

/// Parses `"1 2 -1; 0 1 1"` (rows split by `;` or newlines).
pub fn parse_matrix(text: &str) -> Result<IntMatrix, CliError> {
    let rows: Vec<Vec<i64>> = text
        .split([';', '\n'])
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| {
            r.split([' ', ',', '\t'])
                .filter(|e| !e.is_empty())
                .map(|e| {
                    e.parse()
                        .map_err(|_| CliError::Input(format!("bad matrix entry {e:?}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(CliError::Input("empty matrix".into()));
    }
    Ok(IntMatrix::from_rows(&rows)?)
}
