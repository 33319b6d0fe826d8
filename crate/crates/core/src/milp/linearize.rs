//! Exact linear reformulations of products involving binary variables.

use alloc::format;
use alloc::vec::Vec;

use super::{LinearModel, RowSense, VarId};
use crate::error::Error;

/// Adds a binary `p` with `p = x_1 * ... * x_n` on every binary point:
///
/// ```text
/// p <= x_j            for every factor j
/// p >= sum_j x_j - (n - 1)
/// ```
pub fn linearize_product_of_binaries(
    model: &mut LinearModel,
    name: &str,
    factors: &[VarId],
) -> Result<VarId, Error> {
    if factors.is_empty() {
        return Err(Error::EmptyFactors);
    }
    for &f in factors {
        if f.0 >= model.variables().len() {
            return Err(Error::UnknownVariable(f.0));
        }
        if !model.variable(f).is_binary() {
            return Err(Error::NotBinary(model.variable(f).name.clone()));
        }
    }
    let p = model.add_binary(name)?;
    for (j, &f) in factors.iter().enumerate() {
        model.add_constraint(
            format!("{name}_le{j}"),
            [(p, 1.0), (f, -1.0)],
            RowSense::Le,
            0.0,
        )?;
    }
    let mut terms: Vec<(VarId, f64)> = factors.iter().map(|&f| (f, -1.0)).collect();
    terms.push((p, 1.0));
    model.add_constraint(
        format!("{name}_ge"),
        terms,
        RowSense::Ge,
        -((factors.len() - 1) as f64),
    )?;
    Ok(p)
}

/// Adds a continuous `s = v * u` for binary `u` and `0 <= v <= cap`:
///
/// ```text
/// s <= cap * u
/// s <= v
/// s >= v - cap * (1 - u)
/// s >= 0
/// ```
pub fn linearize_continuous_times_binary(
    model: &mut LinearModel,
    name: &str,
    v: VarId,
    u: VarId,
    cap: f64,
) -> Result<VarId, Error> {
    if cap.is_nan() || cap <= 0.0 {
        return Err(Error::NonPositiveCap);
    }
    for id in [v, u] {
        if id.0 >= model.variables().len() {
            return Err(Error::UnknownVariable(id.0));
        }
    }
    if !model.variable(u).is_binary() {
        return Err(Error::NotBinary(model.variable(u).name.clone()));
    }
    let s = model.add_continuous(name, 0.0, f64::INFINITY)?;
    model.add_constraint(
        format!("{name}_cap"),
        [(s, 1.0), (u, -cap)],
        RowSense::Le,
        0.0,
    )?;
    model.add_constraint(
        format!("{name}_le"),
        [(s, 1.0), (v, -1.0)],
        RowSense::Le,
        0.0,
    )?;
    model.add_constraint(
        format!("{name}_ge"),
        [(s, 1.0), (v, -1.0), (u, -cap)],
        RowSense::Ge,
        -cap,
    )?;
    Ok(s)
}
