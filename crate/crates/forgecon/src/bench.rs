//! Consolidation versus the no-consolidation baseline.
//!
//! A [`BenchRow`] holds both solutions' cost breakdowns and the ratios
//! between them. Sweeps regenerate one base instance spec with one parameter
//! varied and bench every point.
//!
//! CSV columns, in order: (`parameter`, `value` for sweeps only) `parts`,
//! `forgings`, `options`, `seed`, `selected`, `baseline_selected`,
//! `consolidated_ratio`, `forging_ratio`, `machining_ratio`,
//! `holding_ratio`, `total_ratio`, `machining`, `forging`, `inventory`,
//! `total`, `baseline_machining`, `baseline_forging`, `baseline_inventory`,
//! `baseline_total`, `lower_bound`, `status`, `nodes`, `wall_time`.
//! Undefined ratios (zero baseline component) are written as `NA`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use forgecon_core::cost::CostSummary;
use forgecon_core::instgen::{generate, GenSpec};
use forgecon_core::{
    baseline_no_consolidation, ratios, CostBreakdown, Error, Instance, RatioRecord, Solution,
    SolveConfig, SolveResult,
};

use crate::parallel;

pub const UNDEFINED: &str = "NA";

/// Where a benched instance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Origin {
    pub options: Option<usize>,
    pub seed: Option<u64>,
}

impl From<&GenSpec> for Origin {
    fn from(spec: &GenSpec) -> Self {
        Self {
            options: Some(spec.options_per_part),
            seed: Some(spec.seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub parts: usize,
    pub forgings: usize,
    pub origin: Origin,
    pub result: SolveResult,
    pub baseline: Solution,
    pub ratios: RatioRecord,
}

impl BenchRow {
    pub fn with_costs(&self) -> &CostBreakdown {
        &self.result.solution.costs
    }

    pub fn without_costs(&self) -> &CostBreakdown {
        &self.baseline.costs
    }
}

/// Solves `instance` and compares it with the baseline.
pub fn bench_instance(
    instance: &Instance,
    origin: Origin,
    config: &SolveConfig,
) -> Result<BenchRow, Error> {
    let result = parallel::solve(instance, config)?;
    Ok(row_from(instance, origin, result))
}

/// Builds a row from an already computed result (solver or oracle).
pub fn row_from(instance: &Instance, origin: Origin, result: SolveResult) -> BenchRow {
    let baseline = baseline_no_consolidation(instance);
    let n = instance.forgings().len();
    let ratios = ratios(
        &CostSummary::from(&result.solution),
        &CostSummary::from(&baseline),
        n,
    );
    BenchRow {
        parts: instance.parts().len(),
        forgings: n,
        origin,
        result,
        baseline,
        ratios,
    }
}

pub fn bench_spec(spec: &GenSpec, config: &SolveConfig) -> Result<BenchRow, Error> {
    bench_instance(&generate(spec)?, Origin::from(spec), config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    FixedCost,
    Options,
    Discount,
    Holding,
}

impl SweepKind {
    pub const ALL: [SweepKind; 4] = [
        SweepKind::FixedCost,
        SweepKind::Options,
        SweepKind::Discount,
        SweepKind::Holding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::FixedCost => "fixed-cost",
            SweepKind::Options => "options",
            SweepKind::Discount => "discount",
            SweepKind::Holding => "holding",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepKind::FixedCost | SweepKind::Holding => vec![1.0, 2.0, 3.0, 4.0, 5.0],
            SweepKind::Options => vec![2.0, 3.0, 4.0, 5.0, 6.0],
            SweepKind::Discount => vec![0.0, 1.0, 2.0, 3.0],
        }
    }

    /// The base spec with this parameter set to `value`.
    pub fn apply(self, base: &GenSpec, value: f64) -> Result<GenSpec, Error> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidSpec(
                "sweep values must be finite and non-negative",
            ));
        }
        let mut spec = base.clone();
        match self {
            SweepKind::FixedCost => spec.multipliers.forging_fixed_cost = value,
            SweepKind::Holding => spec.multipliers.holding_cost = value,
            SweepKind::Discount => spec.multipliers.forging_discount = value,
            SweepKind::Options => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::InvalidSpec(
                        "option counts must be positive integers",
                    ));
                }
                spec.options_per_part = value as usize;
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown sweep `{s}` (expected fixed-cost, options, discount or holding)")
            })
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub row: BenchRow,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
}

/// Benches every value in order. Rows follow `values` exactly.
pub fn run_sweep(
    kind: SweepKind,
    base: &GenSpec,
    values: &[f64],
    config: &SolveConfig,
) -> Result<SweepReport, Error> {
    let points = values
        .iter()
        .map(|&value| {
            let spec = kind.apply(base, value)?;
            Ok(SweepPoint {
                value,
                row: bench_spec(&spec, config)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(SweepReport { kind, points })
}

const ROW_HEADER: [&str; 23] = [
    "parts",
    "forgings",
    "options",
    "seed",
    "selected",
    "baseline_selected",
    "consolidated_ratio",
    "forging_ratio",
    "machining_ratio",
    "holding_ratio",
    "total_ratio",
    "machining",
    "forging",
    "inventory",
    "total",
    "baseline_machining",
    "baseline_forging",
    "baseline_inventory",
    "baseline_total",
    "lower_bound",
    "status",
    "nodes",
    "wall_time",
];

fn ratio_field(r: Option<f64>) -> String {
    r.map_or_else(|| UNDEFINED.to_string(), |v| v.to_string())
}

fn row_fields(row: &BenchRow) -> Vec<String> {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let w = row.with_costs();
    let b = row.without_costs();
    vec![
        row.parts.to_string(),
        row.forgings.to_string(),
        opt(row.origin.options.map(|o| o.to_string())),
        opt(row.origin.seed.map(|s| s.to_string())),
        row.result.solution.selected.len().to_string(),
        row.baseline.selected.len().to_string(),
        ratio_field(row.ratios.consolidated),
        ratio_field(row.ratios.forging),
        ratio_field(row.ratios.machining),
        ratio_field(row.ratios.holding),
        ratio_field(row.ratios.total),
        w.machining.to_string(),
        w.forging.to_string(),
        w.inventory.to_string(),
        w.total.to_string(),
        b.machining.to_string(),
        b.forging.to_string(),
        b.inventory.to_string(),
        b.total.to_string(),
        row.result.lower_bound.to_string(),
        row.result.status.as_str().to_string(),
        row.result.node_count.to_string(),
        format!("{:.6}", row.result.wall_time),
    ]
}

pub fn write_rows_csv<W: Write>(rows: &[BenchRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROW_HEADER)?;
    for row in rows {
        w.write_record(row_fields(row))?;
    }
    w.flush()?;
    Ok(())
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["parameter", "value"];
        header.extend(ROW_HEADER);
        w.write_record(&header)?;
        for p in &self.points {
            let mut fields = vec![self.kind.name().to_string(), p.value.to_string()];
            fields.extend(row_fields(&p.row));
            w.write_record(fields)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_option_instances_give_unit_ratios() {
        let mut spec = GenSpec::new(12, 6, 4);
        spec.options_per_part = 1;
        let row = bench_spec(&spec, &SolveConfig::default()).unwrap();
        assert_eq!(row.result.solution, row.baseline);
        let r = row.ratios;
        for v in [r.forging, r.machining, r.holding, r.total] {
            assert_eq!(v, Some(1.0));
        }
    }

    #[test]
    fn sweep_kinds_parse_and_apply() {
        for k in SweepKind::ALL {
            assert_eq!(k.name().parse::<SweepKind>(), Ok(k));
        }
        assert!("volume".parse::<SweepKind>().is_err());
        let base = GenSpec::new(5, 5, 1);
        assert_eq!(
            SweepKind::Options
                .apply(&base, 4.0)
                .unwrap()
                .options_per_part,
            4
        );
        assert!(SweepKind::Options.apply(&base, 2.5).is_err());
        assert!(SweepKind::Options.apply(&base, 6.0).is_err());
        assert!(SweepKind::Holding.apply(&base, f64::NAN).is_err());
        let s = SweepKind::FixedCost.apply(&base, 3.0).unwrap();
        assert_eq!(s.multipliers.forging_fixed_cost, 3.0);
    }

    #[test]
    fn csv_rows_follow_the_value_list() {
        let base = GenSpec::new(6, 4, 9);
        let report = run_sweep(
            SweepKind::Holding,
            &base,
            &[3.0, 1.0],
            &SolveConfig::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("parameter,value,parts,forgings"));
        assert!(lines[1].starts_with("holding,3,6,4,2,9,"));
        assert!(lines[2].starts_with("holding,1,6,4,2,9,"));
    }
}
