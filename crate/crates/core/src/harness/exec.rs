use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use rayon::prelude::*;

use super::{evaluation_budget, CellFailure, CellKey, ExperimentPlan, HarnessError, RunLog, RunRecord};
use crate::instancegen::{load_suite, Instance};
use crate::objective::{CostConfig, PathObjective};
use crate::optimizers::{run_optimizer, OptimizerSpec, Problem, Registry};

/// Runs one optimizer on one instance with `3 * dv * base_budget`
/// evaluations. Only optimizer execution is timed.
pub fn run_cell(
    instance: &Instance<f64>,
    spec: &OptimizerSpec,
    dv: usize,
    base_budget: u64,
    seed: u64,
    wall_cap: Option<Duration>,
    cost: &CostConfig,
) -> Result<RunRecord, HarnessError> {
    let key = CellKey {
        instance_id: instance.id.clone(),
        optimizer: spec.display_name().to_string(),
        dv,
        base_budget,
        seed,
    };
    let cell_err = |source| HarnessError::Optimizer {
        cell: key.to_string(),
        source,
    };
    let optimizer = Registry::default().build(spec).map_err(cell_err)?;
    let objective = PathObjective::new(instance, dv, cost.clone());
    let func = |x: &[f64]| objective.evaluate(x);
    let problem = Problem::new(objective.bounds().to_vec(), &func).with_periodic(objective.periodic());
    let budget = evaluation_budget(dv, base_budget);
    let result = run_optimizer(optimizer.as_ref(), &problem, budget, wall_cap, seed).map_err(cell_err)?;
    let cost_breakdown = objective.breakdown(&result.best_x);
    let best_path = objective.decode(&result.best_x).nodes();
    Ok(RunRecord {
        instance_id: key.instance_id,
        density_class: instance.density_class,
        optimizer: key.optimizer,
        spec: spec.clone(),
        dv,
        base_budget,
        seed,
        budget,
        best_value: result.best_f,
        best_vector: result.best_x,
        evals_used: result.evals_used,
        wall_seconds: result.wall_seconds,
        truncated: result.truncated,
        trace: result.trace,
        cost_breakdown,
        best_path,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done(Box<RunRecord>),
    Failed(CellFailure),
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

/// Runs `cells` on up to `workers` threads. Outcomes come back in the order
/// of `cells`; each is also appended to `log` as soon as it finishes.
/// A failing or panicking cell becomes a [`CellOutcome::Failed`] and does not
/// affect the others.
pub fn run_cells(
    plan: &ExperimentPlan,
    instances: &[Instance<f64>],
    cells: &[CellKey],
    workers: usize,
    log: Option<&RunLog>,
) -> Result<Vec<CellOutcome>, HarnessError> {
    let by_id: BTreeMap<&str, &Instance<f64>> = instances.iter().map(|i| (i.id.as_str(), i)).collect();
    let specs: BTreeMap<&str, &OptimizerSpec> = plan
        .optimizer_specs
        .iter()
        .map(|s| (s.display_name(), s))
        .collect();
    let execute = |key: &CellKey| -> Result<CellOutcome, HarnessError> {
        let attempt = catch_unwind(AssertUnwindSafe(|| {
            let inst = by_id
                .get(key.instance_id.as_str())
                .ok_or_else(|| HarnessError::InvalidPlan(format!("unknown instance in cell {key}")))?;
            let spec = specs
                .get(key.optimizer.as_str())
                .ok_or_else(|| HarnessError::InvalidPlan(format!("unknown optimizer in cell {key}")))?;
            run_cell(inst, spec, key.dv, key.base_budget, key.seed, plan.wall_cap_for(key.base_budget), &plan.cost)
        }));
        let outcome = match attempt {
            Ok(Ok(record)) => CellOutcome::Done(Box::new(record)),
            Ok(Err(e)) => CellOutcome::Failed(CellFailure {
                cell: key.clone(),
                error: e.to_string(),
            }),
            Err(payload) => CellFailure {
                cell: key.clone(),
                error: format!("panicked: {}", panic_message(payload)),
            }
            .into(),
        };
        if let Some(log) = log {
            match &outcome {
                CellOutcome::Done(r) => log.append(r)?,
                CellOutcome::Failed(f) => log.append_failure(f)?,
            }
        }
        Ok(outcome)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::InvalidPlan(format!("cannot start worker pool: {e}")))?;
    pool.install(|| cells.par_iter().map(execute).collect())
}

impl From<CellFailure> for CellOutcome {
    fn from(f: CellFailure) -> Self {
        CellOutcome::Failed(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSummary {
    pub total_cells: usize,
    /// Cells already in the log before this invocation.
    pub skipped: usize,
    pub executed: usize,
    pub failures: Vec<CellFailure>,
    /// Every record in the log after the run, previous ones included.
    pub records: Vec<RunRecord>,
}

/// Loads the suite, skips cells already logged (when `resume`) and runs the
/// rest. Missing instance files abort before any cell runs.
pub fn run_plan(plan: &ExperimentPlan, workers: usize, resume: bool) -> Result<PlanSummary, HarnessError> {
    plan.validate()?;
    let instances = load_suite(&plan.suite)?;
    let mut ids = BTreeSet::new();
    for inst in &instances {
        if !ids.insert(inst.id.clone()) {
            return Err(HarnessError::InvalidPlan(format!("duplicate instance id `{}`", inst.id)));
        }
    }
    let log = RunLog::open(&plan.output_dir)?;
    let existing = super::read_records(&log.runs_path())?;
    if !resume && !existing.is_empty() {
        return Err(HarnessError::InvalidPlan(format!(
            "{} already holds {} runs; resume or choose another output_dir",
            plan.output_dir.display(),
            existing.len()
        )));
    }
    let done: BTreeSet<CellKey> = existing.iter().map(RunRecord::key).collect();
    let ids: Vec<String> = instances.iter().map(|i| i.id.clone()).collect();
    let all = plan.cells(&ids);
    let pending: Vec<CellKey> = all.iter().filter(|c| !done.contains(c)).cloned().collect();
    let outcomes = run_cells(plan, &instances, &pending, workers, Some(&log))?;
    let mut records = existing;
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            CellOutcome::Done(r) => records.push(*r),
            CellOutcome::Failed(f) => failures.push(f),
        }
    }
    Ok(PlanSummary {
        total_cells: all.len(),
        skipped: all.len() - pending.len(),
        executed: pending.len(),
        failures,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::flat_instance;

    fn plan(dir: &std::path::Path) -> ExperimentPlan {
        ExperimentPlan {
            suite: dir.join("manifest.json"),
            optimizer_specs: vec![OptimizerSpec::named("de"), OptimizerSpec::named("nm")],
            dv_values: vec![3],
            base_budgets: vec![20],
            seeds: vec![1, 2],
            wall_cap_seconds: None,
            wall_cap_scope: Default::default(),
            output_dir: dir.join("out"),
            cost: CostConfig::default(),
        }
    }

    #[test]
    fn cell_budget_and_record() {
        let inst = flat_instance(41, 0.0);
        let r = run_cell(&inst, &OptimizerSpec::named("de"), 3, 20, 4, None, &CostConfig::default()).unwrap();
        assert_eq!(r.budget, 180);
        assert_eq!(r.evals_used, 180);
        assert_eq!(r.best_path.len(), 5);
        assert_eq!(r.cost_breakdown.total, r.best_value);
        let again = run_cell(&inst, &OptimizerSpec::named("de"), 3, 20, 4, None, &CostConfig::default()).unwrap();
        assert_eq!(
            RunRecord { wall_seconds: 0.0, ..again },
            RunRecord { wall_seconds: 0.0, ..r }
        );
    }

    #[test]
    fn plan_runs_resumes_and_isolates_failures() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = flat_instance(41, 0.0);
        a.id = "a".into();
        let mut b = flat_instance(41, 3.0);
        b.id = "b".into();
        let prov = crate::instancegen::SuiteProvenance::new(0, &[], &[], &Default::default());
        crate::instancegen::write_suite(dir.path(), &[a, b], prov).unwrap();
        let p = plan(dir.path());

        let first = run_plan(&p, 2, false).unwrap();
        assert_eq!((first.total_cells, first.executed, first.skipped), (8, 8, 0));
        assert_eq!(first.records.len(), 8);
        assert!(run_plan(&p, 2, false).is_err());
        let again = run_plan(&p, 1, true).unwrap();
        assert_eq!((again.executed, again.skipped), (0, 8));

        // simulate a kill: drop the last two records and leave half a line
        let runs = p.output_dir.join("runs.jsonl");
        let text = std::fs::read_to_string(&runs).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let mut cut = lines[..6].join("\n");
        cut.push('\n');
        cut.push_str(&lines[6][..20]);
        std::fs::write(&runs, cut).unwrap();
        let resumed = run_plan(&p, 3, true).unwrap();
        assert_eq!(resumed.executed, 2);
        let keys: BTreeSet<CellKey> = resumed.records.iter().map(RunRecord::key).collect();
        assert_eq!(keys.len(), 8);
        assert_eq!(super::super::read_records(&p.output_dir).unwrap().len(), 8);

        let mut by_key: BTreeMap<CellKey, (f64, Vec<f64>)> = BTreeMap::new();
        for r in &first.records {
            by_key.insert(r.key(), (r.best_value, r.best_vector.clone()));
        }
        for r in &resumed.records {
            assert_eq!(by_key[&r.key()], (r.best_value, r.best_vector.clone()));
        }
    }

    #[test]
    fn missing_instance_aborts_before_running() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = flat_instance(41, 0.0);
        a.id = "a".into();
        let prov = crate::instancegen::SuiteProvenance::new(0, &[], &[], &Default::default());
        crate::instancegen::write_suite(dir.path(), &[a], prov).unwrap();
        std::fs::remove_file(dir.path().join("a.json")).unwrap();
        let p = plan(dir.path());
        assert!(run_plan(&p, 1, false).is_err());
        assert!(!p.output_dir.exists());
    }

    #[test]
    fn failing_cell_is_recorded() {
        let p = plan(std::path::Path::new("/nonexistent"));
        let inst = flat_instance(41, 0.0);
        let good = CellKey {
            instance_id: inst.id.clone(),
            optimizer: "de".into(),
            dv: 3,
            base_budget: 20,
            seed: 0,
        };
        let bad = CellKey {
            instance_id: "missing".into(),
            ..good.clone()
        };
        let tiny = CellKey {
            base_budget: 1,
            ..good.clone()
        };
        let out = run_cells(&p, &[inst], &[bad, good, tiny], 2, None).unwrap();
        assert!(matches!(out[0], CellOutcome::Failed(_)));
        assert!(matches!(out[1], CellOutcome::Done(_)));
        match &out[2] {
            CellOutcome::Failed(f) => assert!(f.error.contains("budget"), "{}", f.error),
            other => panic!("{other:?}"),
        }
    }
}
