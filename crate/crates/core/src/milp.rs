//! Mixed-binary linear programs: a named-variable container that model
//! builders write into and solvers read from.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::error::ModelError;

/// Slack allowed on bounds and rows when checking a point.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Distance from 0 or 1 under which a binary value counts as integral.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

/// Handle to a variable of one [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Handle to a constraint of one [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    /// Whether `lhs (sense) rhs` holds within `tol`.
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Sense::Le => lhs <= rhs + tol,
            Sense::Eq => (lhs - rhs).abs() <= tol,
            Sense::Ge => lhs >= rhs - tol,
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

/// `Σ coef · var (sense) rhs`. Terms are kept sorted by variable with no
/// duplicates and no zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }
}

/// Minimisation problem over binary and continuous variables.
///
/// Two models compare equal when their variables and constraints match in
/// declaration order.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    var_names: BTreeMap<String, VarId>,
    con_names: BTreeSet<String>,
}

impl PartialEq for MilpModel {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.constraints == other.constraints
    }
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(ModelError::InvalidBounds { name, lower, upper });
        }
        if !objective.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
        if self.var_names.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        let id = VarId(self.variables.len());
        self.var_names.insert(name.clone(), id);
        self.variables.push(Variable { name, kind, lower, upper, objective });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64) -> Result<VarId, ModelError> {
        self.add_variable(name, VarKind::Binary, 0.0, 1.0, objective)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> Result<VarId, ModelError> {
        self.add_variable(name, VarKind::Continuous, lower, upper, objective)
    }

    /// Adds a row. Repeated variables are merged and zero coefficients
    /// dropped; an empty row is kept as written.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId, ModelError> {
        let name = name.into();
        let mut terms: Vec<(VarId, f64)> = terms.into_iter().collect();
        for &(v, c) in &terms {
            if v.0 >= self.variables.len() {
                return Err(ModelError::UnknownVariable(v.0));
            }
            if !c.is_finite() {
                return Err(ModelError::NonFinite(name));
            }
        }
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
        if self.con_names.contains(&name) {
            return Err(ModelError::DuplicateConstraint(name));
        }
        terms.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        let id = ConId(self.constraints.len());
        self.con_names.insert(name.clone());
        self.constraints.push(Constraint { name, terms: merged, sense, rhs });
        Ok(id)
    }

    pub fn set_objective_coefficient(&mut self, var: VarId, coefficient: f64) -> Result<(), ModelError> {
        let v = self.variables.get_mut(var.0).ok_or(ModelError::UnknownVariable(var.0))?;
        if !coefficient.is_finite() {
            return Err(ModelError::NonFinite(v.name.clone()));
        }
        v.objective = coefficient;
        Ok(())
    }

    /// Adds `coefficient` to the objective coefficient of `var`.
    pub fn add_to_objective(&mut self, var: VarId, coefficient: f64) -> Result<(), ModelError> {
        let current = self.variable(var).ok_or(ModelError::UnknownVariable(var.0))?.objective;
        self.set_objective_coefficient(var, current + coefficient)
    }

    /// Replaces the whole objective.
    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, f64)>) -> Result<(), ModelError> {
        let terms: Vec<_> = terms.into_iter().collect();
        if let Some(&(v, _)) = terms.iter().find(|(v, _)| v.0 >= self.variables.len()) {
            return Err(ModelError::UnknownVariable(v.0));
        }
        for v in &mut self.variables {
            v.objective = 0.0;
        }
        for (v, c) in terms {
            self.add_to_objective(v, c)?;
        }
        Ok(())
    }

    /// Fixes a variable to a value by collapsing its bounds.
    pub fn fix(&mut self, var: VarId, value: f64) -> Result<(), ModelError> {
        let v = self.variables.get_mut(var.0).ok_or(ModelError::UnknownVariable(var.0))?;
        v.lower = value;
        v.upper = value;
        Ok(())
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, var: VarId) -> Option<&Variable> {
        self.variables.get(var.0)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn has_constraint(&self, name: &str) -> bool {
        self.con_names.contains(name)
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables.iter().enumerate().filter(|(_, v)| v.kind == VarKind::Binary).map(|(i, _)| VarId(i))
    }

    pub fn is_continuous(&self) -> bool {
        self.variables.iter().all(|v| v.kind == VarKind::Continuous)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables.iter().zip(values).map(|(v, x)| v.objective * x).sum()
    }

    /// Name of the first bound, integrality or row violated by `values`, if any.
    pub fn first_violation(&self, values: &[f64], feas_tol: f64, int_tol: f64) -> Option<String> {
        if values.len() != self.variables.len() {
            return Some("dimension".to_string());
        }
        for (v, &x) in self.variables.iter().zip(values) {
            if x < v.lower - feas_tol || x > v.upper + feas_tol {
                return Some(v.name.clone());
            }
            if v.kind == VarKind::Binary && x.abs() > int_tol && (x - 1.0).abs() > int_tol {
                return Some(v.name.clone());
            }
        }
        self.constraints.iter().find(|c| !c.sense.holds(c.activity(values), c.rhs, feas_tol)).map(|c| c.name.clone())
    }

    pub fn is_feasible_point(&self, values: &[f64], feas_tol: f64, int_tol: f64) -> bool {
        self.first_violation(values, feas_tol, int_tol).is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
    /// The LP engine gave up; nothing is claimed about the model.
    Numerical,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::Numerical => "numerical",
        })
    }
}

/// Result of a solve. `objective` and `values` describe the best point found
/// (empty `values` and infinite `objective` when there is none); `bound` is
/// the best proven lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub bound: f64,
    pub node_count: u64,
    pub solve_time: Duration,
}

impl MilpSolution {
    /// A solution without a point.
    pub fn empty(status: SolveStatus, bound: f64) -> Self {
        MilpSolution {
            status,
            objective: f64::INFINITY,
            values: Vec::new(),
            bound,
            node_count: 0,
            solve_time: Duration::ZERO,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }
}

/// The linear relaxation: every binary becomes continuous on `[0, 1]`.
pub fn relax(model: &MilpModel) -> MilpModel {
    let mut out = model.clone();
    for v in &mut out.variables {
        if v.kind == VarKind::Binary {
            v.kind = VarKind::Continuous;
            v.lower = v.lower.max(0.0);
            v.upper = v.upper.min(1.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn builder_accepts_declared_handles() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x_1_8_9", 1.0).unwrap();
        assert!(m.add_constraint("c", [(x, 1.0)], Sense::Le, 1.0).is_ok());
        assert_eq!(m.var_by_name("x_1_8_9"), Some(x));
    }

    #[test]
    fn duplicate_names_and_unknown_handles() {
        let mut m = MilpModel::new();
        m.add_binary("x", 1.0).unwrap();
        assert_eq!(m.add_binary("x", 0.0), Err(ModelError::DuplicateVariable("x".into())));
        m.add_constraint("c", [], Sense::Le, 0.0).unwrap();
        assert_eq!(m.add_constraint("c", [], Sense::Le, 0.0), Err(ModelError::DuplicateConstraint("c".into())));
        assert_eq!(m.add_constraint("d", [(VarId(7), 1.0)], Sense::Le, 0.0), Err(ModelError::UnknownVariable(7)));
    }

    #[test]
    fn terms_are_merged_and_sorted() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, 0.0).unwrap();
        let y = m.add_continuous("y", 0.0, 1.0, 0.0).unwrap();
        let c = m.add_constraint("c", [(y, 1.0), (x, 2.0), (y, -1.0), (x, 1.0)], Sense::Ge, 0.0).unwrap();
        assert_eq!(m.constraints()[c.0].terms, vec![(x, 3.0)]);
    }

    #[test]
    fn bad_bounds_rejected() {
        let mut m = MilpModel::new();
        assert!(matches!(m.add_continuous("x", 2.0, 1.0, 0.0), Err(ModelError::InvalidBounds { .. })));
        assert!(matches!(m.add_continuous("y", f64::NAN, 1.0, 0.0), Err(ModelError::InvalidBounds { .. })));
    }

    #[test]
    fn relax_fixed_point_and_idempotent() {
        let mut m = MilpModel::new();
        m.add_continuous("a", 0.0, f64::INFINITY, 1.0).unwrap();
        assert_eq!(relax(&m), m);
        let b = m.add_binary("b", 2.0).unwrap();
        let r = relax(&m);
        assert_eq!(r.variable(b).unwrap().kind, VarKind::Continuous);
        assert_eq!((r.variable(b).unwrap().lower, r.variable(b).unwrap().upper), (0.0, 1.0));
        assert_eq!(relax(&r), r);
    }

    proptest! {
        // any feasible point of a model is feasible for its relaxation
        #[test]
        fn relaxation_contains_feasible_points(
            coefs in proptest::collection::vec(-3i32..4, 12),
            rhs in proptest::collection::vec(-2i32..5, 3),
            point in proptest::collection::vec(0u8..2, 4),
        ) {
            let mut m = MilpModel::new();
            let vars: Vec<_> = (0..4).map(|i| m.add_binary(alloc::format!("b{i}"), 1.0).unwrap()).collect();
            for (r, chunk) in coefs.chunks(4).enumerate() {
                let terms = vars.iter().zip(chunk).map(|(&v, &c)| (v, c as f64));
                m.add_constraint(alloc::format!("r{r}"), terms, Sense::Le, rhs[r] as f64).unwrap();
            }
            let x: Vec<f64> = point.iter().map(|&b| b as f64).collect();
            if m.is_feasible_point(&x, 1e-9, 1e-6) {
                prop_assert!(relax(&m).is_feasible_point(&x, 1e-9, 1e-6));
            }
        }
    }
}
