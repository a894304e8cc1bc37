use std::collections::HashMap;

use super::lp::lp_name;
use super::model::MilpModel;
use crate::error::{Error, Result};
use crate::etg::ExtendedTaskGraph;
use crate::validate::Schedule;

/// Distance from 0 or 1 within which a binary counts as integral.
pub const BINARY_TOLERANCE: f64 = 1e-5;

/// Orders `name -> value` pairs by variable index. Names may be canonical
/// or LP-safe. Every model variable must be present.
pub fn assignment_from_names(model: &MilpModel, values: &HashMap<String, f64>) -> Result<Vec<f64>> {
    model
        .variables()
        .iter()
        .map(|v| {
            values
                .get(&v.name)
                .or_else(|| values.get(&lp_name(&v.name)))
                .copied()
                .ok_or_else(|| Error::Decode(format!("assignment lacks variable {}", v.name)))
        })
        .collect()
}

/// Reads the schedule out of a solver assignment (indexed like the model's
/// variables).
pub fn decode_solution(model: &MilpModel, etg: &ExtendedTaskGraph, values: &[f64], method: &str) -> Result<Schedule> {
    if values.len() != model.variables().len() {
        return Err(Error::Decode(format!(
            "assignment has {} values for {} variables",
            values.len(),
            model.variables().len()
        )));
    }
    let dm = model.decode_map();
    let mut nodes = Vec::with_capacity(etg.num_tasks());
    let mut starts = Vec::with_capacity(etg.num_tasks());
    for i in 0..etg.num_tasks() {
        let mut chosen = None;
        for n in etg.task(i).nodes.clone() {
            let v = values[dm.x[n]];
            let one = (v - 1.0).abs() <= BINARY_TOLERANCE;
            if !one && v.abs() > BINARY_TOLERANCE {
                return Err(Error::Decode(format!("{} = {v} is not integral", model.variables()[dm.x[n]].name)));
            }
            if one && chosen.replace(n).is_some() {
                return Err(Error::Decode(format!("task {} selects more than one candidate", etg.task(i).id)));
            }
        }
        let n = chosen.ok_or_else(|| Error::Decode(format!("task {} selects no candidate", etg.task(i).id)))?;
        nodes.push(n);
        // Solvers may return starts a hair below zero.
        starts.push(values[dm.t[i]].max(0.0));
    }
    let mut schedule = Schedule::from_nodes(etg, &nodes, &starts, method);
    schedule.makespan_s = values[dm.makespan];
    Ok(schedule)
}

/// Expresses a schedule as a model assignment, setting every auxiliary
/// binary to the value the constraints require. Used to check that schedules
/// found by other methods are feasible for the model.
pub fn encode_schedule(model: &MilpModel, etg: &ExtendedTaskGraph, schedule: &Schedule) -> Result<Vec<f64>> {
    let resolved = schedule.resolve(etg)?;
    let dm = model.decode_map();
    let mut v = vec![0.0; model.variables().len()];
    for &(n, start) in &resolved {
        v[dm.x[n]] = 1.0;
        v[dm.t[etg.node(n).task]] = start;
    }
    for (k, a) in etg.arcs().iter().enumerate() {
        if v[dm.x[a.from]] == 1.0 && v[dm.x[a.to]] == 1.0 {
            v[dm.xa[k]] = 1.0;
        }
    }
    v[dm.makespan] = schedule.makespan_s;
    for (&(i, j), &o) in &dm.xo {
        if resolved[i].1 <= resolved[j].1 {
            v[o] = 1.0;
        }
    }
    for (e, &(_, te)) in resolved.iter().enumerate() {
        for &(n, ti) in &resolved {
            let end = ti + etg.node(n).exec_time_s;
            if ti <= te && te < end {
                v[dm.xe(e, n)] = 1.0;
            } else if te < ti {
                v[dm.xh(e, n)] = 1.0;
            }
        }
    }
    Ok(v)
}
