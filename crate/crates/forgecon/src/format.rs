//! TOML documents for instances and solutions.
//!
//! An instance document looks like
//!
//! ```toml
//! schema = "forgecon.instance.v1"
//!
//! [[forgings]]
//! id = 1
//! fixed_order_cost = 2000.0
//! unit_cost = 10.0
//! unit_transport_cost = 5.0
//! unit_holding_cost = 15.0
//! discounts = [{ threshold = "0", discount = 0.0 }]
//!
//! [[parts]]
//! id = 1
//! order_quantity = 100
//! inventory_quantity = 10
//! fixed_order_cost = 1000.0
//! discounts = [{ threshold = "0", discount = 0.0 }]
//! options = [{ forging = 1, units_per_part = "1/3", unit_machining_cost = 20.0, unit_transport_cost = 2.0 }]
//! ```
//!
//! Quantities (`threshold`, `units_per_part`) are exact rationals written as
//! strings: `"250"`, `"1/3"` or a finite decimal such as `"0.25"`. Plain TOML
//! integers are accepted too. Costs and discount fractions are TOML numbers;
//! they are written in shortest round-trip form, so save/load is lossless.
//! Unknown keys are rejected and every schema error names its path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use forgecon_core::{
    CostBreakdown, DiscountLevel, DiscountSchedule, Error as CoreError, Forging, ForgingId,
    Instance, MachiningOption, Part, PartId, Quantity, Solution, SolveResult, SolveStatus,
};

pub const INSTANCE_SCHEMA: &str = "forgecon.instance.v1";
pub const SOLUTION_SCHEMA: &str = "forgecon.solution.v1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("TOML syntax error: {0}")]
    Syntax(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported schema `{found}`, expected `{expected}`")]
    Version {
        found: String,
        expected: &'static str,
    },
    #[error("invalid data at `{path}`: {source}")]
    Invalid {
        path: String,
        #[source]
        source: CoreError,
    },
    #[error("could not serialize document: {0}")]
    Serialize(#[from] toml::ser::Error),
}

impl FormatError {
    fn invalid(path: impl Into<String>, source: CoreError) -> Self {
        Self::Invalid {
            path: path.into(),
            source,
        }
    }
}

/// A rational quantity as stored in documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Exact(Quantity);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(self.0))
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExactVisitor;

        impl Visitor<'_> for ExactVisitor {
            type Value = Exact;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or a string like \"1/3\" or \"0.25\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exact, E> {
                u64::try_from(v)
                    .map(|v| Exact(Ratio::from_integer(v)))
                    .map_err(|_| E::custom("quantity must be non-negative"))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exact, E> {
                Ok(Exact(Ratio::from_integer(v)))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exact, E> {
                parse_ratio(v).map(Exact).map_err(E::custom)
            }
        }

        d.deserialize_any(ExactVisitor)
    }
}

pub fn format_ratio(q: Quantity) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"n"`, `"n/d"` or a finite decimal `"i.f"` into an exact ratio.
pub fn parse_ratio(text: &str) -> Result<Quantity, String> {
    let bad = || format!("`{text}` is not a non-negative rational");
    let digits = |s: &str| -> Result<u64, String> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse::<u64>()
            .map_err(|_| format!("`{text}` overflows 64 bits"))
    };
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let d = digits(d.trim())?;
        if d == 0 {
            return Err(format!("`{text}` has a zero denominator"));
        }
        return Ok(Ratio::new(digits(n.trim())?, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let int = if int.is_empty() { 0 } else { digits(int)? };
        let den = u32::try_from(frac.len())
            .ok()
            .and_then(|p| 10u64.checked_pow(p))
            .ok_or_else(bad)?;
        let frac = digits(frac)?;
        let numer = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(|| format!("`{text}` overflows 64 bits"))?;
        return Ok(Ratio::new(numer, den));
    }
    Ok(Ratio::from_integer(digits(text)?))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    threshold: Exact,
    discount: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionDoc {
    forging: u32,
    units_per_part: Exact,
    unit_machining_cost: f64,
    unit_transport_cost: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForgingDoc {
    id: u32,
    fixed_order_cost: f64,
    unit_cost: f64,
    unit_transport_cost: f64,
    unit_holding_cost: f64,
    discounts: Vec<LevelDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartDoc {
    id: u32,
    order_quantity: u64,
    inventory_quantity: u64,
    fixed_order_cost: f64,
    discounts: Vec<LevelDoc>,
    options: Vec<OptionDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    schema: String,
    forgings: Vec<ForgingDoc>,
    parts: Vec<PartDoc>,
}

fn levels_doc(schedule: &DiscountSchedule) -> Vec<LevelDoc> {
    schedule
        .levels()
        .iter()
        .map(|l| LevelDoc {
            threshold: Exact(l.threshold),
            discount: l.discount,
        })
        .collect()
}

fn schedule_from(levels: &[LevelDoc], path: &str) -> Result<DiscountSchedule, FormatError> {
    DiscountSchedule::new(
        levels
            .iter()
            .map(|l| DiscountLevel {
                threshold: l.threshold.0,
                discount: l.discount,
            })
            .collect(),
    )
    .map_err(|e| FormatError::invalid(path, e))
}

fn decode<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, FormatError> {
    let de = toml::Deserializer::parse(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = e.path().to_string();
        let message = e.into_inner().message().to_string();
        // point at the missing field itself rather than its parent
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|m| m.strip_suffix('`'))
        {
            path = if path == "." {
                field.to_string()
            } else {
                format!("{path}.{field}")
            };
        }
        FormatError::Schema { path, message }
    })
}

fn check_schema(found: &str, expected: &'static str) -> Result<(), FormatError> {
    if found == expected {
        Ok(())
    } else {
        Err(FormatError::Version {
            found: found.to_string(),
            expected,
        })
    }
}

pub fn save_instance(instance: &Instance) -> Result<String, FormatError> {
    let doc = InstanceDoc {
        schema: INSTANCE_SCHEMA.to_string(),
        forgings: instance
            .forgings()
            .iter()
            .map(|f| ForgingDoc {
                id: f.id.0,
                fixed_order_cost: f.fixed_order_cost,
                unit_cost: f.unit_cost,
                unit_transport_cost: f.unit_transport_cost,
                unit_holding_cost: f.unit_holding_cost,
                discounts: levels_doc(&f.discounts),
            })
            .collect(),
        parts: instance
            .parts()
            .iter()
            .map(|p| PartDoc {
                id: p.id.0,
                order_quantity: p.order_quantity,
                inventory_quantity: p.inventory_quantity,
                fixed_order_cost: p.fixed_order_cost,
                discounts: levels_doc(&p.discounts),
                options: p
                    .options
                    .iter()
                    .map(|o| OptionDoc {
                        forging: o.forging.0,
                        units_per_part: Exact(o.units_per_part),
                        unit_machining_cost: o.unit_machining_cost,
                        unit_transport_cost: o.unit_transport_cost,
                    })
                    .collect(),
            })
            .collect(),
    };
    Ok(toml::to_string(&doc)?)
}

pub fn load_instance(text: &str) -> Result<Instance, FormatError> {
    let doc: InstanceDoc = decode(text)?;
    check_schema(&doc.schema, INSTANCE_SCHEMA)?;
    let forgings = doc
        .forgings
        .iter()
        .enumerate()
        .map(|(k, f)| {
            Ok(Forging {
                id: ForgingId(f.id),
                fixed_order_cost: f.fixed_order_cost,
                unit_cost: f.unit_cost,
                unit_transport_cost: f.unit_transport_cost,
                unit_holding_cost: f.unit_holding_cost,
                discounts: schedule_from(&f.discounts, &format!("forgings[{k}].discounts"))?,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let parts = doc
        .parts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(Part {
                id: PartId(p.id),
                order_quantity: p.order_quantity,
                inventory_quantity: p.inventory_quantity,
                fixed_order_cost: p.fixed_order_cost,
                discounts: schedule_from(&p.discounts, &format!("parts[{i}].discounts"))?,
                options: p
                    .options
                    .iter()
                    .map(|o| MachiningOption {
                        forging: ForgingId(o.forging),
                        units_per_part: o.units_per_part.0,
                        unit_machining_cost: o.unit_machining_cost,
                        unit_transport_cost: o.unit_transport_cost,
                    })
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Instance::new(parts, forgings).map_err(|e| FormatError::invalid("", e))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostsDoc {
    machining: f64,
    forging: f64,
    inventory: f64,
    total: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentDoc {
    part: u32,
    forging: u32,
    level: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDoc {
    schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    node_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wall_time: Option<f64>,
    selected: Vec<u32>,
    costs: CostsDoc,
    assignment: Vec<AssignmentDoc>,
}

/// A solution plus the solver statistics stored next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub solution: Solution,
    pub status: Option<SolveStatus>,
    pub lower_bound: Option<f64>,
    pub node_count: Option<u64>,
    pub wall_time: Option<f64>,
}

impl SolutionRecord {
    pub fn bare(solution: Solution) -> Self {
        Self {
            solution,
            status: None,
            lower_bound: None,
            node_count: None,
            wall_time: None,
        }
    }
}

impl From<&SolveResult> for SolutionRecord {
    fn from(r: &SolveResult) -> Self {
        Self {
            solution: r.solution.clone(),
            status: Some(r.status),
            lower_bound: Some(r.lower_bound),
            node_count: Some(r.node_count),
            wall_time: Some(r.wall_time),
        }
    }
}

pub fn parse_status(text: &str) -> Option<SolveStatus> {
    [
        SolveStatus::Optimal,
        SolveStatus::GapLimit,
        SolveStatus::TimeLimit,
    ]
    .into_iter()
    .find(|s| s.as_str() == text)
}

/// Writes the assignment with each part's forging discount level inline.
/// Forgings selected without users cannot be expressed and are rejected.
pub fn save_solution(record: &SolutionRecord) -> Result<String, FormatError> {
    let s = &record.solution;
    let assignment = s
        .assignment
        .iter()
        .map(|(part, forging)| {
            let level = *s.discount_level.get(forging).ok_or_else(|| {
                FormatError::invalid("assignment", CoreError::NotSelected(*part, *forging))
            })?;
            Ok(AssignmentDoc {
                part: part.0,
                forging: forging.0,
                level,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let doc = SolutionDoc {
        schema: SOLUTION_SCHEMA.to_string(),
        status: record.status.map(|st| st.as_str().to_string()),
        lower_bound: record.lower_bound,
        node_count: record.node_count,
        wall_time: record.wall_time,
        selected: s.selected.iter().map(|f| f.0).collect(),
        costs: CostsDoc {
            machining: s.costs.machining,
            forging: s.costs.forging,
            inventory: s.costs.inventory,
            total: s.costs.total,
        },
        assignment,
    };
    Ok(toml::to_string(&doc)?)
}

/// Loads a solution document. Only the structure is checked here; use
/// [`forgecon_core::verify`] against the instance for the cost invariants.
pub fn load_solution(text: &str) -> Result<SolutionRecord, FormatError> {
    let doc: SolutionDoc = decode(text)?;
    check_schema(&doc.schema, SOLUTION_SCHEMA)?;
    let status = match &doc.status {
        None => None,
        Some(st) => Some(parse_status(st).ok_or_else(|| FormatError::Schema {
            path: "status".into(),
            message: format!("unknown status `{st}`"),
        })?),
    };
    let mut assignment = BTreeMap::new();
    let mut discount_level: BTreeMap<ForgingId, usize> = BTreeMap::new();
    for (n, a) in doc.assignment.iter().enumerate() {
        let path = format!("assignment[{n}]");
        if assignment
            .insert(PartId(a.part), ForgingId(a.forging))
            .is_some()
        {
            return Err(FormatError::invalid(
                path,
                CoreError::DuplicatePart(PartId(a.part)),
            ));
        }
        let previous = discount_level.insert(ForgingId(a.forging), a.level);
        if previous.is_some_and(|l| l != a.level) {
            return Err(FormatError::invalid(
                path,
                CoreError::WrongDiscountLevel(ForgingId(a.forging)),
            ));
        }
    }
    let selected: BTreeSet<ForgingId> = doc.selected.iter().map(|&k| ForgingId(k)).collect();
    let c = &doc.costs;
    let mut costs = CostBreakdown::new(c.machining, c.forging, c.inventory);
    costs.total = c.total;
    Ok(SolutionRecord {
        solution: Solution {
            selected,
            assignment,
            discount_level,
            costs,
        },
        status,
        lower_bound: doc.lower_bound,
        node_count: doc.node_count,
        wall_time: doc.wall_time,
    })
}
