//! Fixed-format MPS export and re-import.
//!
//! Names are replaced by positional ones so that every name fits in eight
//! characters: variable `j` becomes the eight-digit `j` (`00000000`,
//! `00000001`, ...), row `i` becomes `R` followed by seven digits. The
//! objective row is `OBJ`. The original names go to a sidecar table with one
//! `internal-name mps-name` pair per line, variables first.
//!
//! Layout rules that make the output byte-reproducible:
//!
//! - one coefficient per line; a column's objective entry comes first, then
//!   its rows in row order; a column with no entries gets an explicit `OBJ 0`;
//! - integer columns are wrapped in `MARKER` / `INTORG` / `INTEND` lines;
//! - the objective constant `c` is written as right-hand side `-c` of `OBJ`;
//! - binaries get `BV`; other integers always get explicit bounds; continuous
//!   columns get bounds only where they differ from `[0, +inf)`;
//! - numbers use the shorter of Rust's plain and exponent forms, both of
//!   which round-trip exactly. Long numbers may run past the nominal field
//!   width, so the parser splits on whitespace rather than on columns.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use forgecon_core::milp::{LinearModel, RowSense, VarId};

pub const MODEL_NAME: &str = "FORGECON";
pub const OBJECTIVE_ROW: &str = "OBJ";
const MAX_NAMES: usize = 100_000_000;
const MAX_ROWS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MpsError {
    #[error("model has {0} variables; MPS names allow at most 100000000")]
    TooManyVariables(usize),
    #[error("model has {0} rows; MPS names allow at most 10000000")]
    TooManyRows(usize),
    #[error("line {line}: section {found} cannot follow {after}")]
    SectionOrder {
        line: usize,
        found: String,
        after: &'static str,
    },
    #[error("input ends inside the {0} section (missing ENDATA)")]
    Truncated(&'static str),
    #[error("line {line}: unknown row sense `{sense}`")]
    UnknownSense { line: usize, sense: String },
    #[error("line {line}: unknown bound type `{kind}`")]
    UnknownBound { line: usize, kind: String },
    #[error("line {line}: duplicate name `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: unknown row `{name}`")]
    UnknownRow { line: usize, name: String },
    #[error("line {line}: unknown column `{name}`")]
    UnknownColumn { line: usize, name: String },
    #[error("line {line}: `{text}` is not a number")]
    BadNumber { line: usize, text: String },
    #[error("line {line}: malformed {section} entry")]
    Malformed { line: usize, section: &'static str },
    #[error("line {line}: {section} section is not supported")]
    Unsupported { line: usize, section: String },
    #[error("name table line {line}: {message}")]
    NameTable { line: usize, message: String },
    #[error("model rejected: {0}")]
    Model(String),
}

/// MPS text plus the rename table that maps it back to model names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpsExport {
    pub mps: String,
    pub names: String,
}

pub fn column_name(j: usize) -> String {
    format!("{j:08}")
}

pub fn row_name(i: usize) -> String {
    format!("R{i:07}")
}

/// Shortest decimal text that parses back to exactly `x`.
pub fn format_number(x: f64) -> String {
    let plain = format!("{x}");
    let exp = format!("{x:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

fn entry(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    let line = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4}");
    out.push_str(line.trim_end());
    out.push('\n');
}

fn sense_code(sense: RowSense) -> &'static str {
    match sense {
        RowSense::Le => "L",
        RowSense::Ge => "G",
        RowSense::Eq => "E",
    }
}

pub fn export_mps(model: &LinearModel) -> Result<MpsExport, MpsError> {
    let vars = model.variables();
    let rows = model.constraints();
    if vars.len() > MAX_NAMES {
        return Err(MpsError::TooManyVariables(vars.len()));
    }
    if rows.len() > MAX_ROWS {
        return Err(MpsError::TooManyRows(rows.len()));
    }

    let mut names = String::new();
    for (j, v) in vars.iter().enumerate() {
        writeln!(names, "{} {}", v.name, column_name(j)).expect("string write");
    }
    for (i, r) in rows.iter().enumerate() {
        writeln!(names, "{} {}", r.name, row_name(i)).expect("string write");
    }

    let mut out = String::new();
    writeln!(out, "NAME          {MODEL_NAME}").expect("string write");
    if model.is_empty() {
        out.push_str("ENDATA\n");
        return Ok(MpsExport { mps: out, names });
    }

    out.push_str("ROWS\n");
    entry(&mut out, "N", OBJECTIVE_ROW, "", "");
    for (i, r) in rows.iter().enumerate() {
        entry(&mut out, sense_code(r.sense), &row_name(i), "", "");
    }

    // transpose rows into columns
    let mut columns: Vec<Vec<(String, f64)>> = vec![Vec::new(); vars.len()];
    for &(VarId(j), c) in model.objective() {
        columns[j].push((OBJECTIVE_ROW.to_string(), c));
    }
    for (i, r) in rows.iter().enumerate() {
        for &(VarId(j), c) in &r.terms {
            columns[j].push((row_name(i), c));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0usize;
    for (j, v) in vars.iter().enumerate() {
        if v.integer != in_int {
            let tag = if v.integer { "'INTORG'" } else { "'INTEND'" };
            let line = format!("    M{markers:07}  'MARKER'                 {tag}");
            out.push_str(&line);
            out.push('\n');
            markers += 1;
            in_int = v.integer;
        }
        let name = column_name(j);
        if columns[j].is_empty() {
            entry(&mut out, "", &name, OBJECTIVE_ROW, "0");
        }
        for (row, c) in &columns[j] {
            entry(&mut out, "", &name, row, &format_number(*c));
        }
    }
    if in_int {
        out.push_str(&format!(
            "    M{markers:07}  'MARKER'                 'INTEND'\n"
        ));
    }

    out.push_str("RHS\n");
    if model.offset() != 0.0 {
        entry(
            &mut out,
            "",
            "RHS",
            OBJECTIVE_ROW,
            &format_number(-model.offset()),
        );
    }
    for (i, r) in rows.iter().enumerate() {
        if r.rhs != 0.0 {
            entry(&mut out, "", "RHS", &row_name(i), &format_number(r.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for (j, v) in vars.iter().enumerate() {
        let name = column_name(j);
        let mut bound = |kind: &str, value: Option<f64>| {
            let text = value.map(format_number).unwrap_or_default();
            entry(&mut out, kind, "BND", &name, &text);
        };
        if v.is_binary() {
            bound("BV", None);
            continue;
        }
        let (lo, up) = (v.lower, v.upper);
        if lo == up {
            bound("FX", Some(lo));
            continue;
        }
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            bound("FR", None);
            continue;
        }
        let explicit = v.integer;
        if lo == f64::NEG_INFINITY {
            bound("MI", None);
        } else if lo != 0.0 || explicit || up < 0.0 {
            bound("LO", Some(lo));
        }
        if up != f64::INFINITY {
            bound("UP", Some(up));
        } else if explicit {
            bound("PL", None);
        }
    }
    out.push_str("ENDATA\n");
    Ok(MpsExport { mps: out, names })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Start,
    Name,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

impl Section {
    fn label(self) -> &'static str {
        match self {
            Section::Start => "start of file",
            Section::Name => "NAME",
            Section::Rows => "ROWS",
            Section::Columns => "COLUMNS",
            Section::Rhs => "RHS",
            Section::Bounds => "BOUNDS",
            Section::End => "ENDATA",
        }
    }
}

struct ColumnData {
    name: String,
    integer: bool,
    lower: f64,
    upper: f64,
    entries: Vec<(usize, f64)>,
    objective: f64,
}

fn number(text: &str, line: usize) -> Result<f64, MpsError> {
    text.parse::<f64>().map_err(|_| MpsError::BadNumber {
        line,
        text: text.to_string(),
    })
}

/// Parses MPS text into a model named with the MPS names. Use
/// [`restore_names`] with the sidecar table to get the original names back.
pub fn parse_mps(text: &str) -> Result<LinearModel, MpsError> {
    let mut section = Section::Start;
    let mut rows: Vec<(String, RowSense, f64)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut objective_name: Option<String> = None;
    let mut columns: Vec<ColumnData> = Vec::new();
    let mut column_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;
    let mut offset = 0.0;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') {
            let keyword = raw.split_whitespace().next().unwrap_or("");
            let next = match keyword {
                "NAME" => Section::Name,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => {
                    return Err(MpsError::Unsupported {
                        line,
                        section: other.to_string(),
                    })
                }
            };
            let allowed = match next {
                Section::Name => section == Section::Start,
                Section::Rows => section == Section::Name,
                Section::Columns => section == Section::Rows,
                Section::Rhs => section == Section::Columns,
                Section::Bounds => matches!(section, Section::Columns | Section::Rhs),
                Section::End => section >= Section::Name && section != Section::End,
                Section::Start => false,
            };
            if !allowed {
                return Err(MpsError::SectionOrder {
                    line,
                    found: keyword.to_string(),
                    after: section.label(),
                });
            }
            section = next;
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match section {
            Section::Rows => {
                let [sense, name] = fields[..] else {
                    return Err(MpsError::Malformed {
                        line,
                        section: "ROWS",
                    });
                };
                let sense = match sense {
                    "N" => {
                        if objective_name.is_some() {
                            return Err(MpsError::Unsupported {
                                line,
                                section: "second objective row".into(),
                            });
                        }
                        objective_name = Some(name.to_string());
                        continue;
                    }
                    "L" => RowSense::Le,
                    "G" => RowSense::Ge,
                    "E" => RowSense::Eq,
                    other => {
                        return Err(MpsError::UnknownSense {
                            line,
                            sense: other.to_string(),
                        })
                    }
                };
                if row_index.insert(name.to_string(), rows.len()).is_some() {
                    return Err(MpsError::Duplicate {
                        line,
                        name: name.to_string(),
                    });
                }
                rows.push((name.to_string(), sense, 0.0));
            }
            Section::Columns => {
                if fields.get(1) == Some(&"'MARKER'") {
                    match fields.get(2).copied() {
                        Some("'INTORG'") => in_int = true,
                        Some("'INTEND'") => in_int = false,
                        _ => {
                            return Err(MpsError::Malformed {
                                line,
                                section: "COLUMNS",
                            })
                        }
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(MpsError::Malformed {
                        line,
                        section: "COLUMNS",
                    });
                }
                let name = fields[0];
                let j = match column_index.get(name) {
                    Some(&j) if j + 1 == columns.len() => j,
                    Some(_) => {
                        return Err(MpsError::Duplicate {
                            line,
                            name: name.to_string(),
                        })
                    }
                    None => {
                        column_index.insert(name.to_string(), columns.len());
                        columns.push(ColumnData {
                            name: name.to_string(),
                            integer: in_int,
                            lower: 0.0,
                            upper: f64::INFINITY,
                            entries: Vec::new(),
                            objective: 0.0,
                        });
                        columns.len() - 1
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let value = number(pair[1], line)?;
                    if Some(pair[0]) == objective_name.as_deref() {
                        columns[j].objective += value;
                    } else {
                        let i = *row_index.get(pair[0]).ok_or_else(|| MpsError::UnknownRow {
                            line,
                            name: pair[0].to_string(),
                        })?;
                        columns[j].entries.push((i, value));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(MpsError::Malformed {
                        line,
                        section: "RHS",
                    });
                }
                for pair in fields[1..].chunks(2) {
                    let value = number(pair[1], line)?;
                    if Some(pair[0]) == objective_name.as_deref() {
                        offset = -value;
                    } else {
                        let i = *row_index.get(pair[0]).ok_or_else(|| MpsError::UnknownRow {
                            line,
                            name: pair[0].to_string(),
                        })?;
                        rows[i].2 = value;
                    }
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(MpsError::Malformed {
                        line,
                        section: "BOUNDS",
                    });
                }
                let j = *column_index
                    .get(fields[2])
                    .ok_or_else(|| MpsError::UnknownColumn {
                        line,
                        name: fields[2].to_string(),
                    })?;
                let value = || -> Result<f64, MpsError> {
                    let text = fields.get(3).ok_or(MpsError::Malformed {
                        line,
                        section: "BOUNDS",
                    })?;
                    number(text, line)
                };
                let c = &mut columns[j];
                match fields[0] {
                    "LO" => c.lower = value()?,
                    "UP" => c.upper = value()?,
                    "FX" => {
                        c.lower = value()?;
                        c.upper = c.lower;
                    }
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    "MI" => c.lower = f64::NEG_INFINITY,
                    "PL" => c.upper = f64::INFINITY,
                    "BV" => {
                        c.integer = true;
                        c.lower = 0.0;
                        c.upper = 1.0;
                    }
                    "LI" => {
                        c.integer = true;
                        c.lower = value()?;
                    }
                    "UI" => {
                        c.integer = true;
                        c.upper = value()?;
                    }
                    other => {
                        return Err(MpsError::UnknownBound {
                            line,
                            kind: other.to_string(),
                        })
                    }
                }
            }
            Section::Name | Section::Start | Section::End => {
                return Err(MpsError::Malformed {
                    line,
                    section: section.label(),
                })
            }
        }
    }
    if section != Section::End {
        return Err(MpsError::Truncated(section.label()));
    }

    let model_err = |e: forgecon_core::Error| MpsError::Model(e.to_string());
    let mut model = LinearModel::new();
    let mut row_terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); rows.len()];
    let mut objective = Vec::new();
    for c in &columns {
        let id = model
            .add_variable(c.name.clone(), c.lower, c.upper, c.integer)
            .map_err(model_err)?;
        objective.push((id, c.objective));
        for &(i, value) in &c.entries {
            row_terms[i].push((id, value));
        }
    }
    for ((name, sense, rhs), terms) in rows.into_iter().zip(row_terms) {
        model
            .add_constraint(name, terms, sense, rhs)
            .map_err(model_err)?;
    }
    model.set_objective(objective, offset).map_err(model_err)?;
    Ok(model)
}

/// Reads a sidecar table into a map from MPS name to internal name.
pub fn parse_names(text: &str) -> Result<BTreeMap<String, String>, MpsError> {
    let mut table = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (internal, mps) = raw.rsplit_once(' ').ok_or_else(|| MpsError::NameTable {
            line,
            message: "expected `internal-name mps-name`".into(),
        })?;
        if table
            .insert(mps.to_string(), internal.to_string())
            .is_some()
        {
            return Err(MpsError::NameTable {
                line,
                message: format!("MPS name `{mps}` appears twice"),
            });
        }
    }
    Ok(table)
}

/// Renames a parsed model back to internal names. Names missing from the
/// table are kept as they are.
pub fn restore_names(
    model: &LinearModel,
    table: &BTreeMap<String, String>,
) -> Result<LinearModel, MpsError> {
    let lookup = |name: &str| table.get(name).cloned().unwrap_or_else(|| name.to_string());
    model
        .renamed(|_, n| lookup(n), |_, n| lookup(n))
        .map_err(|e| MpsError::Model(e.to_string()))
}
