//! Randomized comparison of the closed forms with the exact solver.

use std::collections::BTreeMap;

use cyclic_cntx::criteria::{connections_feasible, optimal_connection_plan};
use cyclic_cntx::ingest::spec_value;
use cyclic_cntx::sampling::{random_contextual_specs, random_specs};
use cyclic_cntx::{
    cntx, criterion_conjectured, criterion_main, delta_min_formula, delta_of_coupling, Oracle,
    Result, SystemSpec,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::status;

struct Trial {
    index: usize,
    case: &'static str,
    contextual: bool,
    failure: Option<String>,
}

/// Signs for the flip check, derived from the trial index so that results do
/// not depend on scheduling.
fn signs_for(index: usize, n: usize) -> Vec<i8> {
    (0..n)
        .map(|i| {
            if (index.wrapping_mul(31) + i * 7).is_multiple_of(3) {
                -1
            } else {
                1
            }
        })
        .collect()
}

fn check(index: usize, spec: &SystemSpec, oracle: &Oracle) -> Result<Trial> {
    let mut problems = Vec::new();
    let (formula, _) = delta_min_formula(spec)?;
    let (lp, witness) = oracle.min_delta(spec)?;
    if formula != lp {
        problems.push("closed-form Δmin differs from the exact minimum");
    }
    if witness.check_against(spec).is_err() || delta_of_coupling(&witness)? != lp {
        problems.push("optimal coupling does not reproduce the system");
    }
    let contextual = criterion_main(spec)?;
    if criterion_conjectured(spec)? != contextual {
        problems.push("the two contextuality criteria disagree");
    }
    let value = cntx(spec)?.cntx;
    let n = spec.n();
    let mut variants: Vec<SystemSpec> = (1..n).map(|s| spec.rotated(s)).collect();
    variants.push(spec.reflected());
    variants.push(spec.with_signs(&signs_for(index, n)));
    for v in &variants {
        if cntx(v)?.cntx != value {
            problems.push("the measure changes under a symmetry of the cycle");
            break;
        }
    }
    let plan = optimal_connection_plan(spec)?;
    if !connections_feasible(spec, &plan.vector) {
        problems.push("optimal connection vector fails the cycle test");
    }
    if contextual {
        match oracle.feasible_with_connections(spec, &plan.vector)? {
            (true, Some(w)) if delta_of_coupling(&w)? == formula => {}
            _ => problems.push("no coupling attains Δmin with the optimal connection vector"),
        }
    }
    Ok(Trial {
        index,
        case: plan.case.as_str(),
        contextual,
        failure: (!problems.is_empty()).then(|| problems.join("; ")),
    })
}

pub fn run(n: usize, trials: usize, seed: u64, limit: usize, contextual_only: bool) -> u8 {
    if trials == 0 || n < 2 {
        eprintln!("error: verify needs --n >= 2 and --trials >= 1");
        return status::INVALID;
    }
    let oracle = Oracle::with_limit(limit);
    if n > oracle.limit() {
        eprintln!(
            "error: n = {n} exceeds the oracle limit of {}",
            oracle.limit()
        );
        return status::RESOURCE;
    }
    let specs = if contextual_only {
        random_contextual_specs(n, trials, seed)
    } else {
        random_specs(n, trials, seed)
    };
    let mut results: Vec<Trial> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            check(i, spec, &oracle).unwrap_or_else(|e| Trial {
                index: i,
                case: "error",
                contextual: false,
                failure: Some(e.to_string()),
            })
        })
        .collect();
    results.sort_by_key(|t| t.index);

    let mut cases: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &results {
        *cases.entry(t.case).or_insert(0) += 1;
    }
    let failed: Vec<&Trial> = results.iter().filter(|t| t.failure.is_some()).collect();
    let counterexample = failed.first().map(|t| {
        json!({
            "trial": t.index,
            "reason": t.failure,
            "spec": spec_value(&specs[t.index]),
        })
    });
    let summary = json!({
        "n": n,
        "trials": trials,
        "seed": seed,
        "contextual_only": contextual_only,
        "passed": trials - failed.len(),
        "failed": failed.len(),
        "contextual": results.iter().filter(|t| t.contextual).count(),
        "cases": cases,
        "counterexample": counterexample.unwrap_or(Value::Null),
    });
    println!("{summary}");
    if let Some(t) = failed.first() {
        eprintln!(
            "error: trial {} failed: {}",
            t.index,
            t.failure.as_deref().unwrap_or_default()
        );
        status::FAILED
    } else {
        status::OK
    }
}
