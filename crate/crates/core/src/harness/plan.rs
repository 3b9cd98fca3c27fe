use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::objective::CostConfig;
use crate::optimizers::{OptimizerSpec, Registry};

/// Which budgets the wall-clock cap applies to.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallCapScope {
    #[default]
    LargestBudget,
    AllBudgets,
    Budgets(Vec<u64>),
}

fn default_dvs() -> Vec<usize> {
    vec![5, 10, 15, 20]
}

fn default_budgets() -> Vec<u64> {
    vec![1_000, 10_000, 100_000]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_wall_cap() -> Option<f64> {
    Some(3.0 * 3600.0)
}

/// Experiment plan file. Relative paths resolve against the plan file's
/// directory when loaded with [`ExperimentPlan::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Suite manifest.
    pub suite: PathBuf,
    pub optimizer_specs: Vec<OptimizerSpec>,
    #[serde(default = "default_dvs")]
    pub dv_values: Vec<usize>,
    #[serde(default = "default_budgets")]
    pub base_budgets: Vec<u64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Seconds; `null` disables the cap.
    #[serde(default = "default_wall_cap")]
    pub wall_cap_seconds: Option<f64>,
    #[serde(default)]
    pub wall_cap_scope: WallCapScope,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cost: CostConfig,
}

impl ExperimentPlan {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let bytes = std::fs::read(path).map_err(super::io_err(path))?;
        let de = &mut serde_json::Deserializer::from_slice(&bytes);
        let mut plan: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            HarnessError::InvalidPlan(format!("{}: `{}`: {}", path.display(), e.path(), e.inner()))
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if plan.suite.is_relative() {
            plan.suite = base.join(&plan.suite);
        }
        if plan.output_dir.is_relative() {
            plan.output_dir = base.join(&plan.output_dir);
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidPlan(m.to_string()));
        if self.optimizer_specs.is_empty() || self.dv_values.is_empty() || self.base_budgets.is_empty() || self.seeds.is_empty() {
            return bad("optimizer_specs, dv_values, base_budgets and seeds must be non-empty");
        }
        if self.dv_values.contains(&0) || self.base_budgets.contains(&0) {
            return bad("dv_values and base_budgets must be positive");
        }
        if let Some(w) = self.wall_cap_seconds {
            if !(w >= 0.0 && w.is_finite()) {
                return bad("wall_cap_seconds must be a non-negative number");
            }
        }
        let mut names = BTreeSet::new();
        let registry = Registry::default();
        for spec in &self.optimizer_specs {
            if !names.insert(spec.display_name().to_string()) {
                return Err(HarnessError::InvalidPlan(format!(
                    "optimizer `{}` appears twice; give one a label",
                    spec.display_name()
                )));
            }
            let opt = registry.build(spec).map_err(|e| HarnessError::InvalidPlan(e.to_string()))?;
            for &dv in &self.dv_values {
                for &b in &self.base_budgets {
                    let budget = super::evaluation_budget(dv, b);
                    let min = opt.min_budget(3 * dv);
                    if budget < min {
                        return Err(HarnessError::InvalidPlan(format!(
                            "optimizer `{}` needs {min} evaluations at dv={dv}, base budget {b} gives {budget}",
                            spec.display_name()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Wall-clock cap for cells at `base_budget`.
    pub fn wall_cap_for(&self, base_budget: u64) -> Option<std::time::Duration> {
        let applies = match &self.wall_cap_scope {
            WallCapScope::LargestBudget => Some(&base_budget) == self.base_budgets.iter().max(),
            WallCapScope::AllBudgets => true,
            WallCapScope::Budgets(list) => list.contains(&base_budget),
        };
        self.wall_cap_seconds
            .filter(|_| applies)
            .map(std::time::Duration::from_secs_f64)
    }

    /// All cells in a fixed order: instance, optimizer, dv, budget, seed.
    pub fn cells(&self, instance_ids: &[String]) -> Vec<CellKey> {
        let mut out = Vec::new();
        for id in instance_ids {
            for spec in &self.optimizer_specs {
                for &dv in &self.dv_values {
                    for &b in &self.base_budgets {
                        for &seed in &self.seeds {
                            out.push(CellKey {
                                instance_id: id.clone(),
                                optimizer: spec.display_name().to_string(),
                                dv,
                                base_budget: b,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub instance_id: String,
    pub optimizer: String,
    pub dv: usize,
    pub base_budget: u64,
    pub seed: u64,
}

impl CellKey {
    /// File-name-safe identifier.
    pub fn file_stem(&self) -> String {
        let clean = |s: &str| {
            s.chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
                .collect::<String>()
        };
        format!(
            "{}__{}__dv{}__b{}__s{}",
            clean(&self.instance_id),
            clean(&self.optimizer),
            self.dv,
            self.base_budget,
            self.seed
        )
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(instance {}, optimizer {}, dv {}, budget {}, seed {})",
            self.instance_id, self.optimizer, self.dv, self.base_budget, self.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> ExperimentPlan {
        serde_json::from_str(r#"{"suite":"m.json","optimizer_specs":[{"name":"de"},{"name":"nm"}],"output_dir":"out"}"#).unwrap()
    }

    #[test]
    fn defaults() {
        let p = plan();
        assert_eq!(p.dv_values, vec![5, 10, 15, 20]);
        assert_eq!(p.base_budgets, vec![1000, 10000, 100000]);
        assert_eq!(p.seeds, vec![0]);
        assert_eq!(p.wall_cap_for(100_000), Some(std::time::Duration::from_secs(10800)));
        assert_eq!(p.wall_cap_for(1000), None);
        p.validate().unwrap();
    }

    #[test]
    fn budget_formula() {
        assert_eq!(super::super::evaluation_budget(10, 10_000), 300_000);
        assert_eq!(super::super::evaluation_budget(5, 1_000), 15_000);
    }

    #[test]
    fn cell_count_and_validation() {
        let mut p = plan();
        p.dv_values = vec![5];
        p.base_budgets = vec![1000];
        let ids: Vec<String> = (0..56).map(|i| format!("i{i}")).collect();
        p.optimizer_specs = crate::optimizers::default_roster();
        assert_eq!(p.cells(&ids).len(), 392);

        p.optimizer_specs.push(OptimizerSpec::named("de"));
        assert!(p.validate().is_err());
        p.optimizer_specs.pop();
        p.base_budgets = vec![1];
        assert!(p.validate().unwrap_err().to_string().contains("needs"));
        p.base_budgets = vec![];
        assert!(p.validate().is_err());
        assert!(serde_json::from_str::<ExperimentPlan>(r#"{"suite":"a","optimizer_specs":[],"output_dir":"b","typo":1}"#).is_err());
    }
}
