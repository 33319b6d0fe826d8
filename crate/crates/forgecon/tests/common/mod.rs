#![allow(dead_code)]

use std::path::PathBuf;

use forgecon::core::instgen::{below, entity_rng};
use forgecon::core::milp::{LinearModel, RowSense};
use rand_pcg::Pcg64;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// A random model using every row sense and bound kind MPS can express.
pub fn random_model(seed: u64) -> LinearModel {
    let mut rng = entity_rng(seed, 0x4d50, 0);
    let coef = |rng: &mut Pcg64| (below(rng, 4001) as f64 - 2000.0) / 16.0;
    let mut m = LinearModel::new();
    let n = 1 + below(&mut rng, 12) as usize;
    for j in 0..n {
        let (lo, hi, int) = match below(&mut rng, 8) {
            0 => (0.0, 1.0, true),
            1 => (0.0, f64::INFINITY, false),
            2 => (f64::NEG_INFINITY, f64::INFINITY, false),
            3 => (f64::NEG_INFINITY, coef(&mut rng), false),
            4 => {
                let v = coef(&mut rng);
                (v, v, false)
            }
            5 => (-(below(&mut rng, 5) as f64), f64::INFINITY, true),
            6 => (0.0, 1.0 + below(&mut rng, 9) as f64, true),
            _ => {
                let lo = coef(&mut rng);
                (lo, lo + 1.0 / (1 + below(&mut rng, 7)) as f64, false)
            }
        };
        m.add_variable(format!("var_{j}"), lo, hi, int).unwrap();
    }
    let vars: Vec<_> = m
        .variables()
        .iter()
        .map(|v| m.var_by_name(&v.name).unwrap())
        .collect();
    let rows = below(&mut rng, 10) as usize;
    for i in 0..rows {
        let sense = [RowSense::Le, RowSense::Ge, RowSense::Eq][below(&mut rng, 3) as usize];
        let mut terms = Vec::new();
        for &v in &vars {
            if below(&mut rng, 2) == 0 {
                terms.push((v, coef(&mut rng)));
            }
        }
        let rhs = coef(&mut rng);
        m.add_constraint(format!("row_{i}"), terms, sense, rhs)
            .unwrap();
    }
    let mut objective = Vec::new();
    for &v in &vars {
        if below(&mut rng, 3) != 0 {
            objective.push((v, coef(&mut rng) * 1e-3));
        }
    }
    let offset = coef(&mut rng);
    m.set_objective(objective, offset).unwrap();
    m
}
