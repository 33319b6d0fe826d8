//! Solver-agnostic mixed-integer linear models.
//!
//! [`LinearModel`] is a plain container: named bounded variables, named sparse
//! rows and a minimization objective with a constant offset. [`build_model`]
//! fills one with the consolidation formulation; the helpers in [`linearize`]
//! replace products of variables by auxiliary variables and linear rows.

mod build;
pub mod linearize;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;

pub use build::{build_model, VariableMap, DEFAULT_EPSILON};
pub use linearize::{linearize_continuous_times_binary, linearize_product_of_binaries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

impl Variable {
    pub fn is_binary(&self) -> bool {
        self.integer && self.lower == 0.0 && self.upper == 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sorted by variable, no duplicates, no zeros.
    pub terms: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization MILP.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    offset: f64,
    var_names: BTreeMap<String, VarId>,
    row_names: BTreeMap<String, usize>,
}

/// First failing check reported by [`LinearModel::check_point`].
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    Bound { variable: String, value: f64 },
    Integrality { variable: String, value: f64 },
    Row { row: String, violation: f64 },
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> Result<VarId, Error> {
        let name = name.into();
        if self.var_names.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let id = VarId(self.variables.len());
        self.var_names.insert(name.clone(), id);
        self.variables.push(Variable {
            name,
            lower,
            upper,
            integer,
        });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, Error> {
        self.add_variable(name, 0.0, 1.0, true)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, Error> {
        self.add_variable(name, lower, upper, false)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> Result<usize, Error> {
        let name = name.into();
        if self.row_names.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let terms = self.canonical(terms)?;
        let idx = self.constraints.len();
        self.row_names.insert(name.clone(), idx);
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(idx)
    }

    /// Adds `coef` to the objective coefficient of `var`.
    pub fn add_objective_term(&mut self, var: VarId, coef: f64) -> Result<(), Error> {
        let mut terms = core::mem::take(&mut self.objective);
        terms.push((var, coef));
        self.objective = self.canonical(terms)?;
        Ok(())
    }

    pub fn set_objective(
        &mut self,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        offset: f64,
    ) -> Result<(), Error> {
        self.objective = self.canonical(terms)?;
        self.offset = offset;
        Ok(())
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<&Constraint> {
        self.row_names.get(name).map(|&i| &self.constraints[i])
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty() && self.constraints.is_empty() && self.offset == 0.0
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.offset
            + self
                .objective
                .iter()
                .map(|&(v, c)| c * values[v.0])
                .sum::<f64>()
    }

    /// Checks bounds, integrality and every row at absolute tolerance `tol`.
    pub fn check_point(&self, values: &[f64], tol: f64) -> Result<(), Infeasibility> {
        for (var, &x) in self.variables.iter().zip(values) {
            if x < var.lower - tol || x > var.upper + tol {
                return Err(Infeasibility::Bound {
                    variable: var.name.clone(),
                    value: x,
                });
            }
            if var.integer && (x - libm::round(x)).abs() > tol {
                return Err(Infeasibility::Integrality {
                    variable: var.name.clone(),
                    value: x,
                });
            }
        }
        for row in &self.constraints {
            let violation = row.violation(values);
            if violation > tol {
                return Err(Infeasibility::Row {
                    row: row.name.clone(),
                    violation,
                });
            }
        }
        Ok(())
    }

    /// Replaces variable and row names, keeping structure and order.
    pub fn renamed(
        &self,
        var_name: impl Fn(usize, &str) -> String,
        row_name: impl Fn(usize, &str) -> String,
    ) -> Result<Self, Error> {
        let mut out = Self::new();
        for (i, v) in self.variables.iter().enumerate() {
            out.add_variable(var_name(i, &v.name), v.lower, v.upper, v.integer)?;
        }
        for (i, r) in self.constraints.iter().enumerate() {
            out.add_constraint(
                row_name(i, &r.name),
                r.terms.iter().copied(),
                r.sense,
                r.rhs,
            )?;
        }
        out.objective = self.objective.clone();
        out.offset = self.offset;
        Ok(out)
    }

    fn canonical(
        &self,
        terms: impl IntoIterator<Item = (VarId, f64)>,
    ) -> Result<Vec<(VarId, f64)>, Error> {
        let mut merged = BTreeMap::<VarId, f64>::new();
        for (v, c) in terms {
            if v.0 >= self.variables.len() {
                return Err(Error::UnknownVariable(v.0));
            }
            *merged.entry(v).or_insert(0.0) += c;
        }
        Ok(merged.into_iter().filter(|&(_, c)| c != 0.0).collect())
    }
}
