use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::policy::{PolicyDocument, SearchRequest};
use super::{IoError, FORMAT_VERSION};
use crate::accumulation::{AccumulationState, ExplorationDecision};
use crate::engine::{SearchConfig, SearchStats, SolutionSet};
use crate::graph::{NodeId, TypedGraph};
use crate::traversal::{Transition, TransitionKind, Traversal};

/// Shown when a search finds nothing.
pub const NO_SOLUTION_MESSAGE: &str = "no admissible traversal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: TransitionKind,
    /// Change of each dimension caused by this step.
    pub delta: BTreeMap<String, f64>,
    /// Accumulation after this step.
    pub accumulation: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub index: usize,
    pub start: NodeId,
    pub nodes: Vec<NodeId>,
    pub gap_count: usize,
    pub steps: Vec<StepRecord>,
    pub initial: BTreeMap<String, f64>,
    pub accumulation: BTreeMap<String, f64>,
    /// `limit - value` for every dimension the policy caps.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub remaining: BTreeMap<String, f64>,
}

impl SolutionRecord {
    pub fn traversal(&self) -> Traversal {
        Traversal::from_steps(
            self.start.clone(),
            self.steps
                .iter()
                .map(|s| Transition {
                    from: s.from.clone(),
                    to: s.to.clone(),
                    kind: s.kind,
                })
                .collect(),
        )
    }
}

/// Output of one search: enough to re-check every transition and
/// accumulation against the topology and policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format_version: u32,
    pub scenario: String,
    pub from: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<NodeId>,
    pub frontier: String,
    pub dimensions: Vec<String>,
    #[serde(default)]
    pub limits: BTreeMap<String, f64>,
    pub total_solutions: usize,
    /// Solutions were left out by `--max-solutions`.
    pub truncated: bool,
    /// The safety cap stopped the search early.
    pub incomplete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub stats: SearchStats,
    pub solutions: Vec<SolutionRecord>,
}

fn to_map(dims: &[(String, f64)]) -> BTreeMap<String, f64> {
    dims.iter().cloned().collect()
}

/// Accumulation after each prefix, starting with the empty traversal.
fn prefix_accumulations<A: AccumulationState>(cfg: &SearchConfig<A>, t: &Traversal) -> Vec<A> {
    let mut out = Vec::with_capacity(t.len() + 1);
    let mut acc = cfg.accumulator.initial();
    out.push(acc.clone());
    for k in 1..=t.len() {
        acc = cfg.accumulator.step(&cfg.graph, &acc, &t.prefix(k));
        out.push(acc.clone());
    }
    out
}

fn record<A: AccumulationState>(
    cfg: &SearchConfig<A>,
    index: usize,
    t: &Traversal,
    limits: &BTreeMap<String, f64>,
) -> SolutionRecord {
    let accs = prefix_accumulations(cfg, t);
    let steps = t
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let before = accs[i].dimensions();
            let after = accs[i + 1].dimensions();
            StepRecord {
                from: s.from.clone(),
                to: s.to.clone(),
                kind: s.kind,
                delta: after.iter().zip(&before).map(|((n, a), (_, b))| (n.clone(), a - b)).collect(),
                accumulation: to_map(&after),
            }
        })
        .collect();
    let last = accs.last().expect("initial accumulation").dimensions();
    let remaining = last
        .iter()
        .filter_map(|(n, v)| limits.get(n).map(|l| (n.clone(), l - v)))
        .collect();
    SolutionRecord {
        index,
        start: t.start.clone(),
        nodes: t.nodes().cloned().collect(),
        gap_count: t.gap_count(),
        steps,
        initial: to_map(&accs[0].dimensions()),
        accumulation: to_map(&last),
        remaining,
    }
}

pub struct ReportContext<'a> {
    pub scenario: &'a str,
    pub to: Option<NodeId>,
    pub dimensions: Vec<String>,
    pub limits: BTreeMap<String, f64>,
    pub max_solutions: Option<usize>,
}

impl ResultDocument {
    pub fn build<A: AccumulationState>(cfg: &SearchConfig<A>, set: &SolutionSet<A>, ctx: ReportContext<'_>) -> Self {
        let keep = ctx.max_solutions.unwrap_or(usize::MAX).min(set.len());
        let solutions = set.solutions[..keep]
            .iter()
            .enumerate()
            .map(|(i, s)| record(cfg, i, &s.traversal, &ctx.limits))
            .collect();
        ResultDocument {
            format_version: FORMAT_VERSION,
            scenario: ctx.scenario.to_string(),
            from: cfg.start.clone(),
            to: ctx.to,
            frontier: cfg.frontier.name().to_string(),
            dimensions: ctx.dimensions,
            limits: ctx.limits,
            total_solutions: set.len(),
            truncated: keep < set.len(),
            incomplete: set.stats.cap_exceeded,
            message: set.is_empty().then(|| NO_SOLUTION_MESSAGE.to_string()),
            stats: set.stats,
            solutions,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// One row per step: `solution,step,from,to,kind,<dimension>...`, with the
    /// accumulation after the step. Empty traversals get a single `step = 0` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("solution,step,from,to,kind");
        for d in &self.dimensions {
            out.push(',');
            out.push_str(d);
        }
        out.push('\n');
        for s in &self.solutions {
            let mut row = |step: usize, from: &NodeId, to: &NodeId, kind: &str, acc: &BTreeMap<String, f64>| {
                let _ = write!(out, "{},{step},{from},{to},{kind}", s.index);
                for d in &self.dimensions {
                    let _ = write!(out, ",{}", acc.get(d).copied().unwrap_or(f64::NAN));
                }
                out.push('\n');
            };
            if s.steps.is_empty() {
                row(0, &s.start, &s.start, "", &s.accumulation);
            }
            for (i, st) in s.steps.iter().enumerate() {
                let kind = match st.kind {
                    TransitionKind::Edge => "edge",
                    TransitionKind::Gap => "gap",
                };
                row(i + 1, &st.from, &st.to, kind, &st.accumulation);
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} search from {}{} ({} frontier): {} solution(s){}",
            self.scenario,
            self.from,
            self.to.as_ref().map(|t| format!(" to {t}")).unwrap_or_default(),
            self.frontier,
            self.total_solutions,
            if self.truncated {
                format!(", showing {}", self.solutions.len())
            } else {
                String::new()
            }
        );
        if let Some(m) = &self.message {
            let _ = writeln!(out, "{m}");
        }
        if self.incomplete {
            let _ = writeln!(out, "warning: safety cap reached, results are partial");
        }
        let fmt_acc = |acc: &BTreeMap<String, f64>| {
            self.dimensions
                .iter()
                .map(|d| format!("{d}={}", acc.get(d).map_or("?".to_string(), |v| trim(*v))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for s in &self.solutions {
            let _ = writeln!(out, "\n#{} {}", s.index, s.traversal());
            for (i, st) in s.steps.iter().enumerate() {
                let arrow = if st.kind == TransitionKind::Gap { "~>" } else { "->" };
                let tag = if st.kind == TransitionKind::Gap { "  [gap]" } else { "" };
                let _ = writeln!(out, "  {:>2}. {} {arrow} {}  {}{tag}", i + 1, st.from, st.to, fmt_acc(&st.accumulation));
            }
            let _ = writeln!(out, "  final: {}", fmt_acc(&s.accumulation));
            if !s.remaining.is_empty() {
                let rem: Vec<String> = s.remaining.iter().map(|(k, v)| format!("{k}={}", trim(*v))).collect();
                let _ = writeln!(out, "  remaining: {}", rem.join(" "));
            }
        }
        let st = &self.stats;
        let _ = writeln!(
            out,
            "\nexpanded {} pruned {} terminated {} gaps generated {} dropped {}",
            st.states_expanded, st.states_pruned, st.states_terminated, st.gap_transitions_generated, st.states_dropped
        );
        out
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn check_map(what: &str, got: &[(String, f64)], recorded: &BTreeMap<String, f64>) -> Result<(), String> {
    if got.len() != recorded.len() {
        return Err(format!("{what}: expected {} dimensions, found {}", got.len(), recorded.len()));
    }
    for (n, v) in got {
        match recorded.get(n) {
            Some(r) if close(*v, *r) => {}
            Some(r) => return Err(format!("{what}: {n} is {r}, recomputed {v}")),
            None => return Err(format!("{what}: missing dimension {n}")),
        }
    }
    Ok(())
}

fn verify_with<A: AccumulationState>(cfg: &SearchConfig<A>, doc: &ResultDocument) -> Result<(), String> {
    for s in &doc.solutions {
        let tag = format!("solution {}", s.index);
        if s.start != cfg.start {
            return Err(format!("{tag}: starts at {} instead of {}", s.start, cfg.start));
        }
        let t = s.traversal();
        if !t.is_contiguous() || !t.is_simple() {
            return Err(format!("{tag}: not a contiguous simple traversal"));
        }
        if s.nodes != t.nodes().cloned().collect::<Vec<_>>() || s.gap_count != t.gap_count() {
            return Err(format!("{tag}: node list or gap count disagrees with the steps"));
        }
        for st in &s.steps {
            let kind = cfg.classify(&st.from, &st.to).map_err(|e| format!("{tag}: {e}"))?;
            if kind != Some(st.kind) {
                return Err(format!("{tag}: {} -> {} is recorded as {:?} but is {:?}", st.from, st.to, st.kind, kind));
            }
        }
        let accs = prefix_accumulations(cfg, &t);
        check_map(&format!("{tag} initial"), &accs[0].dimensions(), &s.initial)?;
        for (k, st) in s.steps.iter().enumerate() {
            check_map(&format!("{tag} step {}", k + 1), &accs[k + 1].dimensions(), &st.accumulation)?;
            let delta: Vec<(String, f64)> = accs[k + 1]
                .dimensions()
                .into_iter()
                .zip(accs[k].dimensions())
                .map(|((n, a), (_, b))| (n, a - b))
                .collect();
            check_map(&format!("{tag} step {} delta", k + 1), &delta, &st.delta)?;
        }
        check_map(&format!("{tag} final"), &accs[t.len()].dimensions(), &s.accumulation)?;
        for (k, acc) in accs.iter().enumerate() {
            let verdict = cfg.sigma.decide(&cfg.graph, &t.prefix(k), acc);
            if verdict == ExplorationDecision::Prune {
                return Err(format!("{tag}: prefix of length {k} is pruned by the policy"));
            }
            if k == t.len() && verdict != ExplorationDecision::Terminate {
                return Err(format!("{tag}: final state is not terminating"));
            }
        }
    }
    Ok(())
}

/// Re-checks a result against the topology and policy it claims to come
/// from: each step's kind, every accumulation, and every exploration verdict.
pub fn verify_result(graph: Arc<TypedGraph>, policy: &PolicyDocument, doc: &ResultDocument) -> Result<(), IoError> {
    let mut req = SearchRequest::new(doc.from.clone());
    req.to = doc.to.clone();
    req.safety_cap = Some(usize::MAX);
    let search = policy.search_config(graph, &req)?;
    let outcome = crate::with_scenario!(&search, cfg => verify_with(cfg, doc));
    outcome.map_err(IoError::Verification)
}

/// Runs `req` and reports it, keeping at most `max_solutions` in the document.
pub fn run_search(
    graph: Arc<TypedGraph>,
    policy: &PolicyDocument,
    req: &SearchRequest,
    max_solutions: Option<usize>,
) -> Result<ResultDocument, IoError> {
    let search = policy.search_config(graph, req)?;
    let scenario = format!("{:?}", policy.scenario).to_lowercase();
    let ctx = || ReportContext {
        scenario: &scenario,
        to: req.to.clone(),
        dimensions: policy.dimension_names(),
        limits: policy.limits(),
        max_solutions,
    };
    fn go<A: AccumulationState>(cfg: &SearchConfig<A>, ctx: ReportContext<'_>) -> Result<ResultDocument, IoError> {
        let set = crate::engine::search(cfg)?;
        Ok(ResultDocument::build(cfg, &set, ctx))
    }
    crate::with_scenario!(&search, cfg => go(cfg, ctx()))
}
