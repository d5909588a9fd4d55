use crate::{FastPath, GenKind, ModeArg, ObjectiveArg};
use ivauction::binary::solve_det_k2;
use ivauction::duo::{twosat_search, Duo};
use ivauction::gen::{
    default_epsilon, find_fractional_vertex, fixtures, gen_hardness, gen_query_adversary, gen_random, Formula1in3,
    GenError, Plant,
};
use ivauction::io::{allocation_file_json, instance_json, parse_allocation, parse_instance, payments_rows, ratios_json};
use ivauction::lp::{solve_cst, solve_det_lp, solve_val, LpError};
use ivauction::model::{
    check_truthful, eval_ratio, orderings_from_instance, ratios_from_values, Dims, Instance, LineOrdering, Mode,
    Objective, Ratios,
};
use ivauction::oracle::{brute_force_det, propagation_search, search_space, verify_report, OracleError, DEFAULT_SIZE_CAP};
use ivauction::payments::{synthesize_payments, verify_ic_ir};
use ivauction::rational::{fmt_q, parse_q, to_decimal, Q};
use ivauction::report::{RatioKind, SolveReport};
use serde_json::{json, Map, Value};
use std::fs;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

/// Largest table the dense simplex is asked to handle.
const LP_ENTRY_GUARD: usize = 1500;
/// Exhaustive formula solving for witnesses stops here.
const MAX_WITNESS_VARS: usize = 25;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("cross-check failed: {reason}")]
    CrossCheck { reason: String, matrix: Option<String> },
    #[error("allocation is not truthful: {0}")]
    NotTruthful(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::SizeGuard(_) => 3,
            CliError::CrossCheck { .. } => 4,
            CliError::NotTruthful(_) => 5,
        }
    }

    pub fn stdout(&self) -> Option<&str> {
        match self {
            CliError::CrossCheck { matrix, .. } => matrix.as_deref(),
            _ => None,
        }
    }
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| failed(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    parse_instance(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn rational(flag: &str, text: &str) -> Result<Q, CliError> {
    parse_q(text).map_err(|e| CliError::Parse(format!("--{flag}: {e}")))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn kind_of(objective: ObjectiveArg) -> RatioKind {
    match objective {
        ObjectiveArg::Value => RatioKind::Value,
        ObjectiveArg::Cost => RatioKind::Cost,
        ObjectiveArg::Det => RatioKind::Det,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Lp,
    Duo,
    TwoSat,
    Binary,
    Oracle,
    Propagation,
}

impl Route {
    fn name(self) -> &'static str {
        match self {
            Route::Lp => "lp",
            Route::Duo => "duo",
            Route::TwoSat => "twosat",
            Route::Binary => "binary",
            Route::Oracle => "oracle",
            Route::Propagation => "propagation",
        }
    }
}

fn resolve(path: FastPath, dims: Dims, kind: RatioKind) -> Route {
    match path {
        FastPath::Lp => Route::Lp,
        FastPath::Duo => Route::Duo,
        FastPath::Binary => Route::Binary,
        FastPath::Oracle => Route::Oracle,
        FastPath::Auto if dims.n() == 2 => Route::Duo,
        FastPath::Auto if kind == RatioKind::Det && dims.k() == 2 => Route::Binary,
        FastPath::Auto if kind == RatioKind::Det => Route::Propagation,
        FastPath::Auto => Route::Lp,
    }
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::TooLarge { .. } | OracleError::Timeout { .. } => CliError::SizeGuard(e.to_string()),
        other => failed(other),
    }
}

fn run(route: Route, rho: &Ratios, ord: &LineOrdering, kind: RatioKind, budget: u64) -> Result<SolveReport, CliError> {
    let dims = rho.dims();
    let det_only = |what: &str| {
        if kind == RatioKind::Det {
            Ok(())
        } else {
            Err(failed(format!("the {what} path only computes the deterministic ratio")))
        }
    };
    match route {
        Route::Lp => {
            if dims.entries() > LP_ENTRY_GUARD {
                return Err(CliError::SizeGuard(format!(
                    "{} LP variables exceed the limit of {LP_ENTRY_GUARD}",
                    dims.entries()
                )));
            }
            let lp_err = |e: LpError| failed(e);
            match kind {
                RatioKind::Value => solve_val(rho, ord).map_err(lp_err),
                RatioKind::Cost => solve_cst(rho, ord).map_err(lp_err),
                RatioKind::Det => solve_det_lp(rho, ord).map_err(lp_err),
            }
        }
        Route::Duo => Duo::new(rho.clone(), ord.clone())
            .and_then(|d| d.solve(kind))
            .map_err(failed),
        Route::TwoSat => {
            det_only("2-SAT")?;
            Ok(twosat_search(&Duo::new(rho.clone(), ord.clone()).map_err(failed)?))
        }
        Route::Binary => {
            det_only("matching")?;
            solve_det_k2(rho, ord).map_err(failed)
        }
        Route::Oracle => {
            det_only("oracle")?;
            brute_force_det(rho, ord, Some(DEFAULT_SIZE_CAP))
                .map(|b| b.into_report())
                .map_err(oracle_error)
        }
        Route::Propagation => {
            det_only("propagation")?;
            propagation_search(rho, ord, budget).map_err(oracle_error)
        }
    }
}

fn ratio_json(v: &Q, decimal: bool) -> Value {
    if decimal {
        json!({ "exact": fmt_q(v), "decimal": to_decimal(v, 6) })
    } else {
        json!(fmt_q(v))
    }
}

pub fn solve(
    path: &Path,
    objective: ObjectiveArg,
    gamma: Option<&str>,
    fast_path: FastPath,
    budget: u64,
    decimal: bool,
) -> Result<String, CliError> {
    let inst = read_instance(path)?;
    let gamma = gamma.map(|g| rational("gamma", g)).transpose()?;
    let (rho, ord) = (ratios_from_values(&inst), orderings_from_instance(&inst));
    let kind = kind_of(objective);
    let route = resolve(fast_path, inst.dims(), kind);
    let start = Instant::now();
    let report = run(route, &rho, &ord, kind, budget)?;
    let wall = start.elapsed();
    verify_report(&rho, &ord, &report).map_err(|m| CliError::CrossCheck {
        reason: format!("{} report rejected: {m}", route.name()),
        matrix: None,
    })?;
    let mut out = report.to_json(decimal);
    out["wall_time_ms"] = json!(wall.as_secs_f64() * 1000.0);
    if let Some(g) = gamma {
        out["gamma"] = json!(fmt_q(&g));
        out["feasible"] = json!(report.ratio <= g);
    }
    Ok(pretty(&out))
}

pub fn verify(instance: &Path, allocation: &Path, objective: ObjectiveArg, decimal: bool) -> Result<String, CliError> {
    let inst = read_instance(instance)?;
    let x = parse_allocation(&read(allocation)?).map_err(|e| CliError::Parse(format!("{}: {e}", allocation.display())))?;
    if x.dims() != inst.dims() {
        return Err(CliError::Parse("allocation and instance dimensions differ".into()));
    }
    check_truthful(&x, &orderings_from_instance(&inst)).map_err(|v| CliError::NotTruthful(v.to_string()))?;
    let obj = match objective {
        ObjectiveArg::Cost => Objective::Cost,
        ObjectiveArg::Value | ObjectiveArg::Det => Objective::Value,
    };
    if objective == ObjectiveArg::Det && !x.is_deterministic() {
        return Err(failed("allocation is randomized"));
    }
    let ratio = eval_ratio(&ratios_from_values(&inst), &x, obj);
    Ok(pretty(&json!({
        "truthful": true,
        "deterministic": x.is_deterministic(),
        "objective": kind_of(objective).to_string(),
        "ratio": ratio_json(&ratio, decimal),
    })))
}

pub fn payments(instance: &Path, allocation: &Path) -> Result<String, CliError> {
    let inst = read_instance(instance)?;
    let x = parse_allocation(&read(allocation)?).map_err(|e| CliError::Parse(format!("{}: {e}", allocation.display())))?;
    if x.dims() != inst.dims() {
        return Err(CliError::Parse("allocation and instance dimensions differ".into()));
    }
    check_truthful(&x, &orderings_from_instance(&inst)).map_err(|v| CliError::NotTruthful(v.to_string()))?;
    let pay = synthesize_payments(&inst, &x).map_err(|e| CliError::NotTruthful(e.to_string()))?;
    verify_ic_ir(&inst, &x, &pay).map_err(|v| CliError::CrossCheck {
        reason: v.to_string(),
        matrix: None,
    })?;
    let dims = inst.dims();
    Ok(pretty(&json!({
        "n": dims.n(),
        "k": dims.k(),
        "payments": payments_rows(&pay),
        "verification": {
            "ic": "ok",
            "ir": "ok",
            "deviations_checked": dims.entries() * dims.k(),
        },
    })))
}

fn gen_error(e: GenError) -> CliError {
    match e {
        GenError::MalformedFormula { .. } => CliError::Parse(e.to_string()),
        other => failed(other),
    }
}

fn parse_plant(text: &str) -> Result<Plant, CliError> {
    let bad = || CliError::Parse(format!("--plant: expected none, first:INDEX or second:INDEX, got {text:?}"));
    if text == "none" {
        return Ok(Plant::None);
    }
    let (side, idx) = text.split_once(':').ok_or_else(bad)?;
    let idx: usize = idx.parse().map_err(|_| bad())?;
    match side {
        "first" => Ok(Plant::First(idx)),
        "second" => Ok(Plant::Second(idx)),
        _ => Err(bad()),
    }
}

pub fn generate(kind: GenKind) -> Result<String, CliError> {
    match kind {
        GenKind::Fig5 => Ok(instance_json(&fixtures::fig5_pair())),
        GenKind::Hardness {
            formula,
            beta,
            epsilon,
            witness_out,
            layout_out,
        } => {
            let phi = Formula1in3::parse(&read(&formula)?).map_err(gen_error)?;
            let beta = rational("beta", &beta)?;
            let epsilon = match epsilon {
                Some(e) => rational("epsilon", &e)?,
                None => default_epsilon(&beta),
            };
            let h = gen_hardness(&phi, &epsilon, &beta).map_err(gen_error)?;
            if let Some(path) = layout_out {
                write(&path, &h.layout.table())?;
            }
            if let Some(path) = witness_out {
                if phi.vars() > MAX_WITNESS_VARS {
                    return Err(CliError::SizeGuard(format!(
                        "witness search is exhaustive and limited to {MAX_WITNESS_VARS} variables"
                    )));
                }
                match phi.solve_exhaustive() {
                    Some(a) => write(&path, &allocation_file_json(&h.witness(&a).map_err(gen_error)?))?,
                    None => eprintln!("formula is unsatisfiable; no witness written"),
                }
            }
            Ok(ratios_json(&h.ratios))
        }
        GenKind::Query {
            n,
            k,
            plant,
            epsilon,
            meta_out,
        } => {
            let plant = parse_plant(&plant)?;
            let epsilon = rational("epsilon", &epsilon)?;
            let adv = gen_query_adversary(n, k, plant, &epsilon).map_err(gen_error)?;
            if let Some(path) = meta_out {
                let meta = json!({
                    "focal": adv.focal.0,
                    "focal_index": adv.focal_index,
                    "first_set_size": adv.first_set.len(),
                    "second_set_size": adv.second_set.len(),
                });
                write(&path, &pretty(&meta))?;
            }
            Ok(ratios_json(&adv.ratios))
        }
        GenKind::Random {
            n,
            k,
            mode,
            seed,
            tie_prob,
        } => {
            let dims = Dims::new(n, k).map_err(failed)?;
            let mode = match mode {
                ModeArg::Good => Mode::Good,
                ModeArg::Chore => Mode::Chore,
            };
            Ok(instance_json(&gen_random(dims, mode, seed, tie_prob)))
        }
        GenKind::Fracvertex { n, k, trials, seed } => {
            let dims = Dims::new(n, k).map_err(failed)?;
            let x = find_fractional_vertex(dims, trials, seed).map_err(gen_error)?;
            Ok(allocation_file_json(&x))
        }
    }
}

fn routes_for(dims: Dims, kind: RatioKind) -> Vec<Route> {
    let (n, k) = (dims.n(), dims.k());
    let mut routes = vec![Route::Lp];
    if n == 2 {
        routes.push(Route::Duo);
    }
    if kind == RatioKind::Det {
        if n != 2 && k != 2 {
            routes.retain(|r| *r != Route::Lp);
        }
        if n == 2 {
            routes.push(Route::TwoSat);
        }
        if k == 2 {
            routes.push(Route::Binary);
        }
        routes.push(Route::Oracle);
        routes.push(Route::Propagation);
    }
    routes
}

pub fn crosscheck(path: &Path, budget: u64, decimal: bool) -> Result<String, CliError> {
    let inst = read_instance(path)?;
    let dims = inst.dims();
    let (rho, ord) = (ratios_from_values(&inst), orderings_from_instance(&inst));
    let mut matrix = Map::new();
    let mut notes = Vec::new();
    let mut problems = Vec::new();
    for kind in [RatioKind::Value, RatioKind::Cost, RatioKind::Det] {
        let mut row = Map::new();
        let mut agreed: Option<Q> = None;
        for route in routes_for(dims, kind) {
            if route == Route::Oracle && search_space(dims) > DEFAULT_SIZE_CAP {
                notes.push(format!("{kind}: oracle skipped by the size guard"));
                continue;
            }
            let report = match run(route, &rho, &ord, kind, budget) {
                Ok(r) => r,
                Err(e @ CliError::SizeGuard(_)) => {
                    notes.push(format!("{kind}: {} skipped, {e}", route.name()));
                    continue;
                }
                Err(e) => {
                    problems.push(format!("{kind}/{}: {e}", route.name()));
                    continue;
                }
            };
            if let Err(m) = verify_report(&rho, &ord, &report) {
                problems.push(format!("{kind}/{}: {m}", route.name()));
            }
            match &agreed {
                Some(r) if *r != report.ratio => problems.push(format!(
                    "{kind}: {} gives {}, expected {}",
                    route.name(),
                    fmt_q(&report.ratio),
                    fmt_q(r)
                )),
                Some(_) => {}
                None => agreed = Some(report.ratio.clone()),
            }
            row.insert(route.name().to_string(), ratio_json(&report.ratio, decimal));
        }
        matrix.insert(kind.to_string(), Value::Object(row));
    }
    let out = pretty(&json!({
        "n": dims.n(),
        "k": dims.k(),
        "matrix": matrix,
        "agree": problems.is_empty(),
        "problems": problems,
        "notes": notes,
    }));
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(CliError::CrossCheck {
            reason: problems.join("; "),
            matrix: Some(out),
        })
    }
}
