//! Builds the three packing LPs over enumerated schedule instances (full
//! relaxation, light-instance LIS, heavy-instance HIS) and wraps the simplex
//! solver with the feasibility/duality checks the rounding procedures rely
//! on.

use std::collections::HashMap;

use crate::instance::InstanceSet;
use crate::model::{MachineId, Slot};
use crate::simplex::{self, PivotRule, SparseLp};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RowLabel {
    /// Unit-coefficient exclusivity row for a vAP at a slot.
    VapSlot(MachineId, Slot),
    /// Fractional-capacity row for a server at a slot.
    ServerSlot(MachineId, Slot),
    /// Unit-coefficient row (heavy exclusivity) for any machine at a slot.
    MachineSlot(MachineId, Slot),
    /// At-most-one row for a job.
    Job(usize),
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub lp: SparseLp,
    /// Structural variable -> global instance index.
    pub vars: Vec<usize>,
    pub rows: Vec<RowLabel>,
}

/// Optimal fractional solution; values are paired with global instance
/// indices, sorted ascending.
#[derive(Debug, Clone)]
pub struct FractionalSolution {
    pub values: Vec<(usize, f64)>,
    pub objective: f64,
}

impl FractionalSolution {
    pub fn empty() -> FractionalSolution {
        FractionalSolution {
            values: Vec::new(),
            objective: 0.0,
        }
    }

    pub fn value(&self, instance: usize) -> f64 {
        match self.values.binary_search_by_key(&instance, |&(i, _)| i) {
            Ok(pos) => self.values[pos].1,
            Err(_) => 0.0,
        }
    }
}

enum ServerRows {
    /// (7b): server rows weighted by the allocation fraction, vAP rows unit.
    Fractional,
    /// Eq. (10): unit coefficients on every machine row.
    Unit,
}

fn build(set: &InstanceSet, members: &[usize], server_rows: ServerRows) -> LinearProgram {
    let mut row_of: HashMap<RowLabel, usize> = HashMap::new();
    let mut rows: Vec<RowLabel> = Vec::new();
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(members.len());
    let mut objective = Vec::with_capacity(members.len());

    let mut row_idx = |rows: &mut Vec<RowLabel>, label: RowLabel| -> usize {
        *row_of.entry(label.clone()).or_insert_with(|| {
            rows.push(label);
            rows.len() - 1
        })
    };

    for &gi in members {
        let inst = &set.instances[gi];
        let mut col: Vec<(usize, f64)> = Vec::new();
        for (m, iv, c) in inst.operations() {
            for t in iv.start..=iv.end {
                let (label, coeff) = match server_rows {
                    ServerRows::Fractional => {
                        if c == 1.0 && m != inst.server {
                            (RowLabel::VapSlot(m, t), 1.0)
                        } else {
                            (RowLabel::ServerSlot(m, t), c)
                        }
                    }
                    ServerRows::Unit => (RowLabel::MachineSlot(m, t), 1.0),
                };
                let r = row_idx(&mut rows, label);
                col.push((r, coeff));
            }
        }
        let jr = row_idx(&mut rows, RowLabel::Job(inst.job));
        col.push((jr, 1.0));
        // Merge duplicate rows (an instance may touch a row through more than
        // one operation in degenerate layouts).
        col.sort_by_key(|&(r, _)| r);
        col.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
        cols.push(col);
        objective.push(inst.energy);
    }

    let num_rows = rows.len();
    LinearProgram {
        lp: SparseLp {
            num_rows,
            objective,
            cols,
            rhs: vec![1.0; num_rows],
        },
        vars: members.to_vec(),
        rows,
    }
}

/// LP relaxation of the full offline ILP over the given instances; used as
/// the performance-ratio upper bound.
pub fn build_full_relaxation(set: &InstanceSet, members: &[usize]) -> LinearProgram {
    build(set, members, ServerRows::Fractional)
}

/// LIS: the full relaxation restricted to light instances.
pub fn build_lis(set: &InstanceSet, light: &[usize]) -> LinearProgram {
    build(set, light, ServerRows::Fractional)
}

/// HIS: heavy instances cannot share a machine slot at all, so every machine
/// row carries unit coefficients.
pub fn build_his(set: &InstanceSet, heavy: &[usize]) -> LinearProgram {
    build(set, heavy, ServerRows::Unit)
}

/// Row-slack feasibility tolerance (absolute, rhs is always 1).
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Solves the LP, clamps values into `[0, 1]`, and checks the dual
/// certificate (weak duality within 1e-7 relative) plus row feasibility.
pub fn solve(program: &LinearProgram, rule: PivotRule) -> Result<FractionalSolution> {
    if program.vars.is_empty() {
        return Ok(FractionalSolution::empty());
    }
    let sol = simplex::solve(&program.lp, rule)?;

    let dual_obj = sol.dual_objective(&program.lp);
    let scale = 1.0 + sol.objective.abs().max(dual_obj.abs());
    if sol.objective > dual_obj + 1e-7 * scale {
        return Err(Error::Internal(format!(
            "weak duality violated: primal {} > dual {}",
            sol.objective, dual_obj
        )));
    }

    // Row feasibility by direct recomputation.
    let mut slack = program.lp.rhs.clone();
    for (j, col) in program.lp.cols.iter().enumerate() {
        for &(r, a) in col {
            slack[r] -= a * sol.x[j];
        }
    }
    for (r, s) in slack.iter().enumerate() {
        if *s < -FEASIBILITY_TOL * (1.0 + program.lp.rhs[r].abs()) {
            return Err(Error::Internal(format!(
                "infeasible LP solution: row {r} violated by {}",
                -s
            )));
        }
    }

    let values = program
        .vars
        .iter()
        .zip(&sol.x)
        .map(|(&gi, &v)| (gi, v.clamp(0.0, 1.0)))
        .collect();
    Ok(FractionalSolution {
        values,
        objective: sol.objective,
    })
}

/// Human-readable text export (objective + rows) for cross-checking against
/// external solvers.
pub fn export_text(set: &InstanceSet, program: &LinearProgram) -> String {
    let mut out = String::from("maximize\n ");
    for (j, &gi) in program.vars.iter().enumerate() {
        let e = set.instances[gi].energy;
        if j > 0 {
            out.push_str(" + ");
        }
        out.push_str(&format!("{e} x{gi}"));
    }
    out.push_str("\nsubject to\n");
    let mut row_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); program.lp.num_rows];
    for (j, col) in program.lp.cols.iter().enumerate() {
        for &(r, a) in col {
            row_terms[r].push((program.vars[j], a));
        }
    }
    for (r, terms) in row_terms.iter().enumerate() {
        out.push_str(&format!(" r{r}: "));
        for (k, (v, a)) in terms.iter().enumerate() {
            if k > 0 {
                out.push_str(" + ");
            }
            out.push_str(&format!("{a} x{v}"));
        }
        out.push_str(&format!(" <= {}\n", program.lp.rhs[r]));
    }
    out.push_str("bounds\n x >= 0\n");
    out
}
