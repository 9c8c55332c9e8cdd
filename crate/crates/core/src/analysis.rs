//! Analyses over solution sets and policy families: Pareto dominance among
//! solutions, and connectivity as a function of a budget parameter.

use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::accumulation::AccumulationState;
use crate::engine::{search, SearchConfig, TraversalState};
use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("state {index} has no dimension `{dimension}`")]
    DimensionMismatch { index: usize, dimension: String },
    #[error("sweep needs at least one (source, target) pair")]
    EmptyPairSet,
    #[error("sweep budgets must be strictly increasing and finite")]
    BudgetsNotIncreasing,
    #[error("knee report needs at least two budgets")]
    TooFewBudgets,
    #[error("search {source_node} -> {target} at budget {budget} failed: {message}")]
    Search {
        source_node: NodeId,
        target: NodeId,
        budget: f64,
        message: String,
    },
    #[error("pair {source_node} -> {target} reachable at budget {earlier} but not at {later}")]
    NonMonotone {
        source_node: NodeId,
        target: NodeId,
        earlier: f64,
        later: f64,
    },
}

/// Minimize every listed dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceRelation {
    pub dimensions: Vec<String>,
}

impl DominanceRelation {
    pub fn minimize<S: Into<String>>(dims: impl IntoIterator<Item = S>) -> Self {
        DominanceRelation {
            dimensions: dims.into_iter().map(Into::into).collect(),
        }
    }

    /// Uses every dimension the state type exposes.
    pub fn all_dimensions<A: AccumulationState>(sample: &A) -> Self {
        Self::minimize(sample.dimensions().into_iter().map(|(n, _)| n))
    }

    /// `a` is no worse everywhere and strictly better somewhere.
    pub fn dominates(&self, a: &[f64], b: &[f64]) -> bool {
        let mut strict = false;
        for (x, y) in a.iter().zip(b) {
            if x > y {
                return false;
            }
            if x < y {
                strict = true;
            }
        }
        strict
    }

    fn project<A: AccumulationState>(&self, index: usize, a: &A) -> Result<Vec<f64>, AnalysisError> {
        let dims = a.dimensions();
        self.dimensions
            .iter()
            .map(|name| {
                dims.iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| AnalysisError::DimensionMismatch {
                        index,
                        dimension: name.clone(),
                    })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominatedState<A> {
    pub state: TraversalState<A>,
    /// Input position of the state that dominates this one.
    pub input_index: usize,
    /// Input position of a non-dominated state that dominates this one.
    pub dominated_by: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceSplit<A> {
    /// Non-dominated states, in input order, with their input positions.
    pub frontier: Vec<(usize, TraversalState<A>)>,
    pub dominated: Vec<DominatedState<A>>,
}

/// Splits `states` into the non-dominated frontier and the rest.
pub fn dominance_filter<A: AccumulationState>(
    states: &[TraversalState<A>],
    rel: &DominanceRelation,
) -> Result<DominanceSplit<A>, AnalysisError> {
    let points: Vec<Vec<f64>> = states
        .iter()
        .enumerate()
        .map(|(i, s)| rel.project(i, &s.accumulation))
        .collect::<Result<_, _>>()?;
    let non_dominated: Vec<bool> = (0..states.len())
        .map(|i| !(0..states.len()).any(|j| j != i && rel.dominates(&points[j], &points[i])))
        .collect();

    let mut frontier = Vec::new();
    let mut dominated = Vec::new();
    for (i, s) in states.iter().enumerate() {
        if non_dominated[i] {
            frontier.push((i, s.clone()));
        } else {
            // Strict dominance is a finite strict order, so some maximal
            // element sits above every dominated point.
            let by = (0..states.len())
                .find(|&j| non_dominated[j] && rel.dominates(&points[j], &points[i]))
                .expect("a non-dominated dominator exists");
            dominated.push(DominatedState {
                state: s.clone(),
                input_index: i,
                dominated_by: by,
            });
        }
    }
    Ok(DominanceSplit { frontier, dominated })
}

/// Builds the search for one (source, target, budget) triple.
pub type ConfigFactory<A> = Arc<dyn Fn(&NodeId, &NodeId, f64) -> Result<SearchConfig<A>, String> + Send + Sync>;

/// A family of searches whose exploration predicate prunes on a budget.
pub struct SweepSpec<A> {
    pub budgets: Vec<f64>,
    pub pairs: Vec<(NodeId, NodeId)>,
    pub factory: ConfigFactory<A>,
    /// Skip pairs already reachable at a smaller budget.
    pub reuse_monotone: bool,
}

impl<A> SweepSpec<A> {
    pub fn new(
        budgets: Vec<f64>,
        pairs: Vec<(NodeId, NodeId)>,
        factory: impl Fn(&NodeId, &NodeId, f64) -> Result<SearchConfig<A>, String> + Send + Sync + 'static,
    ) -> Self {
        SweepSpec {
            budgets,
            pairs,
            factory: Arc::new(factory),
            reuse_monotone: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub budget: f64,
    /// Per pair, in `SweepResult::pairs` order.
    pub reachable: Vec<bool>,
    /// `None` where the verdict was carried over from a smaller budget.
    pub solution_counts: Vec<Option<usize>>,
    pub fraction: Ratio<usize>,
}

impl BudgetRow {
    pub fn fraction_f64(&self) -> f64 {
        self.fraction.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub pairs: Vec<(NodeId, NodeId)>,
    pub rows: Vec<BudgetRow>,
}

impl SweepResult {
    pub fn fractions(&self) -> Vec<f64> {
        self.rows.iter().map(BudgetRow::fraction_f64).collect()
    }

    /// One line per (budget, pair): `budget,source,target,reachable,fraction`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("budget,source,target,reachable,fraction\n");
        for row in &self.rows {
            for ((s, t), ok) in self.pairs.iter().zip(&row.reachable) {
                let _ = writeln!(out, "{},{},{},{},{}", row.budget, s, t, ok, row.fraction_f64());
            }
        }
        out
    }
}

/// Runs one search per (pair, budget), budgets ascending. Pair searches at
/// a given budget run in parallel.
pub fn sweep<A: AccumulationState>(spec: &SweepSpec<A>) -> Result<SweepResult, AnalysisError> {
    if spec.pairs.is_empty() {
        return Err(AnalysisError::EmptyPairSet);
    }
    if spec.budgets.iter().any(|b| !b.is_finite()) || spec.budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::BudgetsNotIncreasing);
    }

    let mut rows: Vec<BudgetRow> = Vec::with_capacity(spec.budgets.len());
    for &budget in &spec.budgets {
        let previous = rows.last().map(|r| r.reachable.clone());
        let outcomes: Vec<Result<(bool, Option<usize>), AnalysisError>> = spec
            .pairs
            .par_iter()
            .enumerate()
            .map(|(i, (s, t))| {
                if spec.reuse_monotone && previous.as_ref().is_some_and(|p| p[i]) {
                    return Ok((true, None));
                }
                let fail = |message: String| AnalysisError::Search {
                    source_node: s.clone(),
                    target: t.clone(),
                    budget,
                    message,
                };
                let cfg = (spec.factory)(s, t, budget).map_err(fail)?;
                let set = search(&cfg).map_err(|e| fail(e.to_string()))?;
                Ok((!set.is_empty(), Some(set.len())))
            })
            .collect();
        let mut reachable = Vec::with_capacity(spec.pairs.len());
        let mut solution_counts = Vec::with_capacity(spec.pairs.len());
        for o in outcomes {
            let (r, c) = o?;
            reachable.push(r);
            solution_counts.push(c);
        }

        if let (Some(prev), Some(prev_row)) = (&previous, rows.last()) {
            for (i, (&was, &now)) in prev.iter().zip(&reachable).enumerate() {
                if was && !now {
                    return Err(AnalysisError::NonMonotone {
                        source_node: spec.pairs[i].0.clone(),
                        target: spec.pairs[i].1.clone(),
                        earlier: prev_row.budget,
                        later: budget,
                    });
                }
            }
        }

        let hits = reachable.iter().filter(|&&r| r).count();
        rows.push(BudgetRow {
            budget,
            fraction: Ratio::new(hits, spec.pairs.len()),
            reachable,
            solution_counts,
        });
    }
    Ok(SweepResult {
        pairs: spec.pairs.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KneePoint {
    pub budget: f64,
    pub fraction: Ratio<usize>,
    /// Change from the previous budget; `None` for the first.
    pub marginal_gain: Option<Ratio<usize>>,
    /// Same as `marginal_gain`, signed, as a float.
    pub marginal_gain_f64: Option<f64>,
}

/// The connectivity curve with marginal gains between consecutive budgets.
pub fn knee_report(result: &SweepResult) -> Result<Vec<KneePoint>, AnalysisError> {
    if result.rows.len() < 2 {
        return Err(AnalysisError::TooFewBudgets);
    }
    let mut out = Vec::with_capacity(result.rows.len());
    for (i, row) in result.rows.iter().enumerate() {
        let (gain, gain_f) = match i.checked_sub(1).map(|j| &result.rows[j]) {
            None => (None, None),
            Some(prev) => {
                let g = row.fraction_f64() - prev.fraction_f64();
                let exact = (row.fraction >= prev.fraction).then(|| row.fraction - prev.fraction);
                (exact, Some(g))
            }
        };
        out.push(KneePoint {
            budget: row.budget,
            fraction: row.fraction,
            marginal_gain: gain,
            marginal_gain_f64: gain_f,
        });
    }
    Ok(out)
}
