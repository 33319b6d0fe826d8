//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.
//!
//! Run alone with `cargo test -p forgecon --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use common::{random_model, read_fixture};
use forgecon::bench::{bench_spec, run_sweep, SweepKind};
use forgecon::core::instgen::{below, entity_rng, generate, GenSpec};
use forgecon::core::milp::{
    build_model, linearize_continuous_times_binary, linearize_product_of_binaries, LinearModel,
    VarId, VariableMap,
};
use forgecon::core::oracle::{brute_force, DEFAULT_ENUMERATION_LIMIT};
use forgecon::core::{
    verify, ForgingId, Instance, MachiningOption, PartId, Quantity, Solution, SolveConfig,
    SolveStatus,
};
use forgecon::format::load_instance;
use forgecon::mps::{export_mps, parse_mps, parse_names, restore_names};

/// Relative tolerance on optimal totals and objective values.
const REL_TOL: f64 = 1e-6;
/// Row tolerance when replaying points; below the model's 1e-6 strictness margin.
const ROW_TOL: f64 = 1e-9;
/// Allowed distance of a mean total ratio from the published value.
const RATIO_BAND: f64 = 0.05;
/// Published mean total ratios for sizes 10, 100 and 200.
const REFERENCE_TOTALS: [(usize, f64); 3] = [(10, 0.8989), (100, 0.9397), (200, 0.9407)];
const TABLE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const ORACLE_INSTANCES: u64 = 240;
const ORACLE_BUDGET_SECS: f64 = 60.0;
const SOLVE_BUDGET_SECS: f64 = 300.0;
const CONSISTENCY_INSTANCES: u64 = 120;
const MPS_MODELS: u64 = 20;
const MUTATION_TRIALS: u64 = 100;
const SWEEP_SEED: u64 = 1;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn config() -> SolveConfig {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(8);
    SolveConfig {
        worker_count: workers,
        ..SolveConfig::default()
    }
}

/// Small instance with up to 8 parts, 6 forgings and 3 options. Odd seeds
/// use the published ranges; even seeds use thresholds small pools reach.
fn small_instance(seed: u64) -> Instance {
    let mut rng = entity_rng(seed, 0xacce, 1);
    let parts = 1 + below(&mut rng, 8) as usize;
    let forgings = 1 + below(&mut rng, 6) as usize;
    let mut spec = GenSpec::new(parts, forgings, seed);
    spec.options_per_part = 1 + below(&mut rng, 3.min(forgings as u64)) as usize;
    if seed.is_multiple_of(2) {
        spec.order_range = 20..=220;
        spec.inventory_range = 0..=40;
        spec.fixed_cost_range = 100..=3000;
        spec.discount_levels = vec![(0, 0.0), (120, 0.08), (300, 0.2)];
    }
    generate(&spec).unwrap()
}

fn tiny_instance(seed: u64) -> Instance {
    let mut rng = entity_rng(seed, 0xacce, 2);
    let parts = 1 + below(&mut rng, 4) as usize;
    let forgings = 1 + below(&mut rng, 3) as usize;
    let mut spec = GenSpec::new(parts, forgings, seed);
    spec.options_per_part = 1 + below(&mut rng, forgings as u64) as usize;
    spec.order_range = 20..=220;
    spec.inventory_range = 0..=40;
    spec.discount_levels = vec![(0, 0.0), (120, 0.08), (300, 0.2)];
    generate(&spec).unwrap()
}

fn assignments(inst: &Instance) -> Vec<BTreeMap<PartId, ForgingId>> {
    let mut out = vec![BTreeMap::new()];
    for p in inst.parts() {
        out = out
            .into_iter()
            .flat_map(|a| {
                p.options.iter().map(move |o| {
                    let mut a = a.clone();
                    a.insert(p.id, o.forging);
                    a
                })
            })
            .collect();
    }
    out
}

// ---------------------------------------------------------------- 1

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for seed in 0..ORACLE_INSTANCES {
        let inst = small_instance(seed);
        let oracle = brute_force(&inst, DEFAULT_ENUMERATION_LIMIT).unwrap();
        let r = forgecon::solve(&inst, &config()).unwrap();
        let (a, b) = (r.solution.costs.total, oracle.solution.costs.total);
        worst = worst.max((a - b).abs() / b.abs().max(1.0));
        if !close(a, b) || r.status != SolveStatus::Optimal || verify(&inst, &r.solution).is_err() {
            failures.push(seed);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(
        failures.is_empty() && secs < ORACLE_BUDGET_SECS,
        format!(
            "{ORACLE_INSTANCES} instances, max relative difference {worst:.2e}, {} mismatches {failures:?}, {secs:.1}s (budget {ORACLE_BUDGET_SECS}s)",
            failures.len()
        ),
    )
}

// ---------------------------------------------------------------- 2

/// Smallest feasible v plus the product variables for the binaries in `values`.
fn complete_point(inst: &Instance, model: &LinearModel, map: &VariableMap, values: &mut [f64]) {
    for p in inst.parts() {
        let v = p
            .options
            .iter()
            .filter(|o| values[map.x[&(p.id, o.forging)].0] > 0.5)
            .map(MachiningOption::unit_cost)
            .fold(map.epsilon, f64::max);
        values[map.v[&p.id].0] = v.min(model.variable(map.v[&p.id]).upper);
    }
    for (&(i, k, d), &y) in &map.y {
        let x = values[map.x[&(i, k)].0];
        let u = values[map.u[&(k, d)].0];
        values[y.0] = values[map.z[&k].0] * x * u;
        values[map.w[&(i, k, d)].0] = x * u;
    }
}

/// Counts feasible model points over every z, every assignment and every
/// level choice; each must decode to a valid solution of matching cost.
fn enumerate_model(
    inst: &Instance,
    model: &LinearModel,
    map: &VariableMap,
) -> Result<(u64, u64), String> {
    let n = inst.forgings().len();
    let levels: Vec<usize> = inst.forgings().iter().map(|f| f.discounts.len()).collect();
    let combos: usize = levels.iter().product();
    let (mut feasible, mut expected) = (0u64, 0u64);
    for a in assignments(inst) {
        let used: BTreeSet<ForgingId> = a.values().copied().collect();
        expected += 1 << (n - used.len());
        for zmask in 0u32..(1 << n) {
            for mut combo in 0..combos {
                let mut values = vec![0.0; model.variables().len()];
                for (j, f) in inst.forgings().iter().enumerate() {
                    values[map.z[&f.id].0] = ((zmask >> j) & 1) as f64;
                    values[map.u[&(f.id, combo % levels[j])].0] = 1.0;
                    combo /= levels[j];
                }
                for (p, k) in &a {
                    values[map.x[&(*p, *k)].0] = 1.0;
                }
                complete_point(inst, model, map, &mut values);
                if model.check_point(&values, ROW_TOL).is_err() {
                    continue;
                }
                feasible += 1;
                let s = map
                    .solution_from_point(inst, &values)
                    .map_err(|e| e.to_string())?;
                verify(inst, &s).map_err(|e| e.to_string())?;
                let unused: f64 = map
                    .z
                    .iter()
                    .filter(|(k, z)| values[z.0] > 0.5 && !s.selected.contains(k))
                    .map(|(k, _)| inst.forging(*k).unwrap().fixed_order_cost)
                    .sum();
                if !close(model.objective_value(&values), s.costs.total + unused) {
                    return Err(format!(
                        "point objective {} vs solution {} + unused {unused}",
                        model.objective_value(&values),
                        s.costs.total
                    ));
                }
            }
        }
    }
    Ok((feasible, expected))
}

fn model_consistency() -> Verdict {
    let mut solutions = 0;
    let mut points = 0;
    for seed in 0..CONSISTENCY_INSTANCES {
        let inst = tiny_instance(seed);
        let (model, map) = build_model(&inst).unwrap();
        for a in assignments(&inst) {
            let s = Solution::from_assignment(&inst, a).unwrap();
            let point = map.point_from_solution(&model, &inst, &s).unwrap();
            if let Err(e) = model.check_point(&point, ROW_TOL) {
                return Verdict::new(
                    false,
                    format!("seed {seed}: solution point infeasible: {e:?}"),
                );
            }
            if !close(model.objective_value(&point), s.costs.total) {
                return Verdict::new(
                    false,
                    format!(
                        "seed {seed}: objective {} vs evaluate {}",
                        model.objective_value(&point),
                        s.costs.total
                    ),
                );
            }
            solutions += 1;
        }
        match enumerate_model(&inst, &model, &map) {
            Ok((found, expected)) if found == expected => points += found,
            Ok((found, expected)) => {
                return Verdict::new(
                    false,
                    format!("seed {seed}: {found} feasible points, expected {expected}"),
                )
            }
            Err(e) => return Verdict::new(false, format!("seed {seed}: {e}")),
        }
    }
    Verdict::new(
        true,
        format!("{CONSISTENCY_INSTANCES} instances, {solutions} solutions mapped, {points} feasible integer points decoded"),
    )
}

// ---------------------------------------------------------------- 3

fn table_reproduction() -> Verdict {
    let mut pass = true;
    let mut lines = Vec::new();
    for (size, reference) in REFERENCE_TOTALS {
        let mut totals = Vec::new();
        for seed in TABLE_SEEDS {
            let row = bench_spec(&GenSpec::new(size, size, seed), &config()).unwrap();
            let r = row.ratios;
            let get = |v: Option<f64>| v.unwrap_or(f64::NAN);
            let (m, f, h, t, c) = (
                get(r.machining),
                get(r.forging),
                get(r.holding),
                get(r.total),
                get(r.consolidated),
            );
            let ok = m >= 1.0 && f < 1.0 && h <= 1.0 && t < 1.0 && c < 1.0;
            let optimal = row.result.status == SolveStatus::Optimal;
            let in_time = size != 100 || row.result.wall_time <= SOLVE_BUDGET_SECS;
            pass &= ok && optimal && in_time;
            totals.push(t);
            lines.push(format!(
                "      {size:>3}x{size:<3} seed {seed}: consolidated {c:.4} forging {f:.4} machining {m:.4} holding {h:.4} total {t:.4} {} {:.2}s{}",
                row.result.status.as_str(),
                row.result.wall_time,
                if ok { "" } else { "  <- ratio check failed" }
            ));
        }
        let mean = totals.iter().sum::<f64>() / totals.len() as f64;
        let near = (mean - reference).abs() <= RATIO_BAND;
        pass &= near;
        lines.push(format!(
            "      {size:>3}x{size:<3} mean total {mean:.4}, reference {reference:.4}, band +/-{RATIO_BAND}: {}",
            if near { "ok" } else { "outside" }
        ));
    }
    Verdict::new(
        pass,
        format!("seeds {TABLE_SEEDS:?} per size\n{}", lines.join("\n")),
    )
}

// ---------------------------------------------------------------- 4-6

fn non_increasing(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= w[0] + REL_TOL * w[0].abs().max(1.0))
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn sweep(kind: SweepKind) -> forgecon::bench::SweepReport {
    let base = GenSpec::new(100, 100, SWEEP_SEED);
    run_sweep(kind, &base, &kind.default_values(), &config()).unwrap()
}

fn ratio_series(
    report: &forgecon::bench::SweepReport,
    pick: impl Fn(&forgecon::core::RatioRecord) -> Option<f64>,
) -> Vec<f64> {
    report
        .points
        .iter()
        .map(|p| pick(&p.row.ratios).unwrap_or(f64::NAN))
        .collect()
}

fn all_optimal(report: &forgecon::bench::SweepReport) -> bool {
    report
        .points
        .iter()
        .all(|p| p.row.result.status == SolveStatus::Optimal)
}

fn fixed_cost_sensitivity() -> Verdict {
    let report = sweep(SweepKind::FixedCost);
    let consolidated = ratio_series(&report, |r| r.consolidated);
    let total = ratio_series(&report, |r| r.total);
    let holding = ratio_series(&report, |r| r.holding);
    Verdict::new(
        all_optimal(&report)
            && non_increasing(&consolidated)
            && non_increasing(&total)
            && holding.iter().all(|&h| h < 1.0),
        format!(
            "multipliers 1-5: consolidated {} total {} holding {}",
            fmt_list(&consolidated),
            fmt_list(&total),
            fmt_list(&holding)
        ),
    )
}

fn options_sensitivity() -> Verdict {
    let report = sweep(SweepKind::Options);
    let total: Vec<f64> = report
        .points
        .iter()
        .map(|p| p.row.result.solution.costs.total)
        .collect();
    let forging: Vec<f64> = report
        .points
        .iter()
        .map(|p| p.row.result.solution.costs.forging)
        .collect();
    Verdict::new(
        all_optimal(&report) && non_increasing(&total) && non_increasing(&forging),
        format!(
            "options 2-6: total {} forging {}",
            fmt_list(&total),
            fmt_list(&forging)
        ),
    )
}

fn holding_sensitivity() -> Verdict {
    let report = sweep(SweepKind::Holding);
    let holding = ratio_series(&report, |r| r.holding);
    Verdict::new(
        all_optimal(&report) && holding.iter().all(|&h| h < 1.0),
        format!("multipliers 1-5: holding {}", fmt_list(&holding)),
    )
}

// ---------------------------------------------------------------- 7

fn feasible(model: &LinearModel, values: &[f64]) -> bool {
    model.check_point(values, ROW_TOL).is_ok()
}

/// For every binary point of the factors, the product rows admit exactly
/// the product value.
fn product_rows_exact(n: usize) -> bool {
    let mut m = LinearModel::new();
    let xs: Vec<VarId> = (0..n)
        .map(|i| m.add_binary(format!("x{i}")).unwrap())
        .collect();
    let p = linearize_product_of_binaries(&mut m, "p", &xs).unwrap();
    (0u32..(1 << n)).all(|mask| {
        let mut values = vec![0.0; m.variables().len()];
        for (i, x) in xs.iter().enumerate() {
            values[x.0] = ((mask >> i) & 1) as f64;
        }
        let product = (mask == (1 << n) - 1) as u8 as f64;
        [0.0, 1.0].iter().all(|&pv| {
            values[p.0] = pv;
            feasible(&m, &values) == (pv == product)
        })
    })
}

/// s = v * u is the only feasible s on a grid of v and candidate s values.
fn continuous_rows_exact() -> bool {
    let cap = 10.0;
    let mut m = LinearModel::new();
    let v = m.add_continuous("v", 0.0, cap).unwrap();
    let u = m.add_binary("u").unwrap();
    let s = linearize_continuous_times_binary(&mut m, "s", v, u, cap).unwrap();
    (0..=40).all(|step| {
        let vv = step as f64 * cap / 40.0;
        [0.0, 1.0].iter().all(|&uv| {
            let target = vv * uv;
            let candidates = [target, target + 0.25, target - 0.25, 0.0, vv, cap];
            candidates.iter().all(|&sv| {
                let mut values = vec![0.0; m.variables().len()];
                values[v.0] = vv;
                values[u.0] = uv;
                values[s.0] = sv;
                feasible(&m, &values) == ((sv - target).abs() < 1e-12)
            })
        })
    })
}

/// On a built model, the rows of one y (or w) variable accept exactly the
/// product of its factors, for every binary combination.
fn model_link_rows_exact(
    model: &LinearModel,
    target: VarId,
    factors: &[VarId],
    prefix: &str,
) -> bool {
    let rows: Vec<_> = model
        .constraints()
        .iter()
        .filter(|r| r.name.starts_with(prefix))
        .collect();
    if rows.len() != factors.len() + 1 {
        return false;
    }
    let n = factors.len();
    (0u32..(1 << n)).all(|mask| {
        let mut values = vec![0.0; model.variables().len()];
        for (i, f) in factors.iter().enumerate() {
            values[f.0] = ((mask >> i) & 1) as f64;
        }
        let product = (mask == (1 << n) - 1) as u8 as f64;
        [0.0, 1.0].iter().all(|&t| {
            values[target.0] = t;
            rows.iter().all(|r| r.violation(&values) <= ROW_TOL) == (t == product)
        })
    })
}

fn linearization() -> Verdict {
    let products = (1..=5).all(product_rows_exact);
    let continuous = continuous_rows_exact();
    let mut links = 0;
    let mut links_ok = true;
    for seed in 0..10 {
        let inst = tiny_instance(seed);
        let (model, map) = build_model(&inst).unwrap();
        for (&(i, k, d), &y) in &map.y {
            let (z, x, u) = (map.z[&k], map.x[&(i, k)], map.u[&(k, d)]);
            let tag = format!("{}_{}_{}", i.0, k.0, d);
            links_ok &= model_link_rows_exact(&model, y, &[z, x, u], &format!("y_{tag}_"));
            links_ok &=
                model_link_rows_exact(&model, map.w[&(i, k, d)], &[x, u], &format!("w_{tag}_"));
            links += 2;
        }
    }
    Verdict::new(
        products && continuous && links_ok,
        format!(
            "n-factor products n=1..5 {}, continuous times binary {}, {links} model y/w links {}",
            ok_word(products),
            ok_word(continuous),
            ok_word(links_ok)
        ),
    )
}

fn ok_word(b: bool) -> &'static str {
    if b {
        "exact"
    } else {
        "BROKEN"
    }
}

// ---------------------------------------------------------------- 8

fn mps_round_trip() -> Verdict {
    let mut identical = 0;
    let mut equal = 0;
    for seed in 0..MPS_MODELS {
        let models = [
            random_model(seed),
            build_model(&small_instance(seed)).unwrap().0,
        ];
        for m in &models {
            let first = export_mps(m).unwrap();
            let parsed = parse_mps(&first.mps).unwrap();
            identical += (export_mps(&parsed).unwrap().mps == first.mps) as u32;
            let restored = restore_names(&parsed, &parse_names(&first.names).unwrap()).unwrap();
            equal += (&restored == m) as u32;
        }
    }
    // replay known optima: the hand-evaluated fixture and oracle optima
    let mut instances = vec![(
        load_instance(&read_fixture("one_part.toml")).unwrap(),
        Some(7000.0),
    )];
    instances.extend((0..MPS_MODELS).map(|s| (small_instance(s), None)));
    let mut replayed = 0;
    let mut worst = 0.0f64;
    for (inst, known) in &instances {
        let best = brute_force(inst, DEFAULT_ENUMERATION_LIMIT)
            .unwrap()
            .solution;
        let expected = known.unwrap_or(best.costs.total);
        let (model, map) = build_model(inst).unwrap();
        let parsed = parse_mps(&export_mps(&model).unwrap().mps).unwrap();
        let point = map.point_from_solution(&model, inst, &best).unwrap();
        let obj = parsed.objective_value(&point);
        worst = worst.max((obj - expected).abs() / expected.abs().max(1.0));
        replayed += (parsed.check_point(&point, ROW_TOL).is_ok() && close(obj, expected)) as u32;
    }
    let total = 2 * MPS_MODELS as u32;
    Verdict::new(
        identical == total && equal == total && replayed as usize == instances.len(),
        format!(
            "{identical}/{total} byte-identical re-exports, {equal}/{total} equal after renaming, {replayed}/{} optima replayed (max objective error {worst:.1e})",
            instances.len()
        ),
    )
}

// ---------------------------------------------------------------- 9

fn mutation_instance(seed: u64) -> Instance {
    let mut rng = entity_rng(seed, 0x6d75, 0);
    let parts = 4 + below(&mut rng, 20) as usize;
    let forgings = 2 + below(&mut rng, 10) as usize;
    let mut spec = GenSpec::new(parts, forgings, seed);
    spec.options_per_part = 1 + below(&mut rng, 3.min(forgings as u64)) as usize;
    generate(&spec).unwrap()
}

fn optimum(inst: &Instance) -> (f64, bool) {
    let r = forgecon::solve(inst, &config()).unwrap();
    (r.solution.costs.total, r.status == SolveStatus::Optimal)
}

fn monotonicity() -> Verdict {
    let mut restriction = (0, 0);
    let mut extension = (0, 0);
    let mut seed = 0u64;
    while restriction.0 < MUTATION_TRIALS || extension.0 < MUTATION_TRIALS {
        let inst = mutation_instance(seed);
        let mut rng = entity_rng(seed, 0x6d75, 1);
        seed += 1;
        let (base, base_opt) = optimum(&inst);

        if restriction.0 < MUTATION_TRIALS {
            let k = inst.forgings()[below(&mut rng, inst.forgings().len() as u64) as usize].id;
            let mut parts = inst.parts().to_vec();
            let keeps_all = parts.iter_mut().all(|p| {
                p.options.retain(|o| o.forging != k);
                !p.options.is_empty()
            });
            if keeps_all {
                let forgings = inst
                    .forgings()
                    .iter()
                    .filter(|f| f.id != k)
                    .cloned()
                    .collect();
                let (after, opt) = optimum(&Instance::new(parts, forgings).unwrap());
                restriction.0 += 1;
                restriction.1 += (base_opt && opt && after >= base - REL_TOL * base) as u64;
            }
        }

        if extension.0 < MUTATION_TRIALS {
            let i = below(&mut rng, inst.parts().len() as u64) as usize;
            let mut parts = inst.parts().to_vec();
            let free: Vec<ForgingId> = inst
                .forgings()
                .iter()
                .map(|f| f.id)
                .filter(|k| parts[i].option_for(*k).is_none())
                .collect();
            if !free.is_empty() {
                let k = free[below(&mut rng, free.len() as u64) as usize];
                parts[i].options.push(MachiningOption {
                    forging: k,
                    units_per_part: Quantity::new(1, 1 + below(&mut rng, 3)),
                    unit_machining_cost: 10.0 + below(&mut rng, 31) as f64,
                    unit_transport_cost: 1.0 + below(&mut rng, 5) as f64,
                });
                let (after, opt) =
                    optimum(&Instance::new(parts, inst.forgings().to_vec()).unwrap());
                extension.0 += 1;
                extension.1 += (base_opt && opt && after <= base + REL_TOL * base) as u64;
            }
        }
    }
    Verdict::new(
        restriction.1 == restriction.0 && extension.1 == extension.0,
        format!(
            "forging removal {}/{} never cheaper, option addition {}/{} never dearer",
            restriction.1, restriction.0, extension.1, extension.0
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("model/evaluator consistency", model_consistency),
        ("consolidation versus baseline", table_reproduction),
        ("fixed-cost sensitivity", fixed_cost_sensitivity),
        ("options sensitivity", options_sensitivity),
        ("holding-cost sensitivity", holding_sensitivity),
        ("linearization", linearization),
        ("MPS round trip", mps_round_trip),
        ("monotonicity", monotonicity),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        println!(
            "{} {id}. {name} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
