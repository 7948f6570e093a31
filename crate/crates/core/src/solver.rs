//! End-to-end solve pipeline: decompose, make nice, run the dynamic program
//! bottom-up with a reduction policy, extract the optimum. Handles terminal
//! connectivity, time budgets, and statistics collection.

use std::time::{Duration, Instant};

use crate::dp::{
    self, BagTable, DpCtx, SolveError, SolveStats,
};
use crate::graph::Instance;
use crate::nice::{self, NiceTreeDecomposition, NodeKind};
use crate::reduce::{apply_policy_ctx, ReductionPolicy};
use crate::report::{Outcome, RunReport};
use crate::td;

/// A decomposed instance ready to be solved under any policy. Building this
/// once and running several policies against it gives every algorithm the
/// same nice tree decomposition.
pub struct Prepared {
    /// The instance the DP actually runs on: the terminal component of the
    /// input, with vertex ids compacted if the input was disconnected.
    pub working: Option<Instance>,
    pub ntd: Option<NiceTreeDecomposition>,
    pub width: Option<usize>,
    /// |V|, |E|, |K| of the original input, for reporting.
    pub input_counts: (usize, usize, usize),
    pub decompose_time: Duration,
    pub nicify_time: Duration,
    /// Set when the terminals span several components: no tree can exist.
    pub infeasible: bool,
}

/// Decomposes `instance`: checks that all terminals share one connected
/// component (otherwise the run is infeasible), restricts to that component
/// if the graph is disconnected, and builds the nice tree decomposition.
pub fn prepare(instance: &Instance) -> Prepared {
    let input_counts = (
        instance.vertex_count(),
        instance.edge_count(),
        instance.terminal_count(),
    );
    let components = instance.connected_components();
    let home = components
        .iter()
        .find(|c| c.binary_search(&instance.lowest_terminal()).is_ok())
        .expect("lowest terminal lives somewhere");
    let all_in_home = instance
        .terminals()
        .iter()
        .all(|t| home.binary_search(t).is_ok());
    if !all_in_home {
        return Prepared {
            working: None,
            ntd: None,
            width: None,
            input_counts,
            decompose_time: Duration::ZERO,
            nicify_time: Duration::ZERO,
            infeasible: true,
        };
    }
    let working = if components.len() == 1 {
        instance.clone()
    } else {
        let (sub, _) = instance
            .induced(home)
            .expect("terminal component keeps all terminals");
        sub
    };

    let t0 = Instant::now();
    let decomposition = td::greedy_degree_decompose(&working);
    let decompose_time = t0.elapsed();

    let t1 = Instant::now();
    let ntd = nice::make_nice(&decomposition, &working);
    let nicify_time = t1.elapsed();

    Prepared {
        width: Some(ntd.width()),
        working: Some(working),
        ntd: Some(ntd),
        input_counts,
        decompose_time,
        nicify_time,
        infeasible: false,
    }
}

/// Runs the dynamic program over a prepared decomposition under one policy.
pub fn run_prepared(
    prepared: &Prepared,
    name: &str,
    policy: ReductionPolicy,
    time_budget: Option<Duration>,
) -> RunReport {
    let stats = SolveStats {
        decompose_time: prepared.decompose_time,
        nicify_time: prepared.nicify_time,
        ..SolveStats::default()
    };

    let mut report = RunReport {
        instance: name.to_string(),
        algorithm: policy,
        width: prepared.width,
        vertices: prepared.input_counts.0,
        edges: prepared.input_counts.1,
        terminals: prepared.input_counts.2,
        outcome: Outcome::Infeasible,
        wall_ms: 0,
        stats,
    };
    if prepared.infeasible {
        return report;
    }
    let (instance, ntd) = (
        prepared.working.as_ref().unwrap(),
        prepared.ntd.as_ref().unwrap(),
    );

    let start = Instant::now();
    let deadline = time_budget.map(|b| start + b);
    let outcome = match run_dp(ntd, instance, policy, deadline, &mut report.stats) {
        Ok(optimum) => Outcome::Optimum(optimum),
        Err(SolveError::Timeout) => Outcome::Timeout,
        Err(SolveError::Infeasible) => Outcome::Infeasible,
        Err(other) => Outcome::Failed(other.to_string()),
    };
    report.stats.dp_time = start.elapsed();
    report.wall_ms = (prepared.decompose_time + prepared.nicify_time + start.elapsed())
        .as_millis() as u64;
    report.outcome = outcome;
    report
}

/// Full pipeline for one instance and one policy.
pub fn solve(
    instance: &Instance,
    name: &str,
    policy: ReductionPolicy,
    time_budget: Option<Duration>,
) -> RunReport {
    run_prepared(&prepare(instance), name, policy, time_budget)
}

/// Solves under each policy in turn, reusing one decomposition, so the
/// reports line up for tabulation. Per-mode failures stay per-mode.
pub fn compare(
    instance: &Instance,
    name: &str,
    policies: &[ReductionPolicy],
    time_budget: Option<Duration>,
) -> Vec<RunReport> {
    let prepared = prepare(instance);
    policies
        .iter()
        .map(|&p| run_prepared(&prepared, name, p, time_budget))
        .collect()
}

/// Bottom-up table computation over the nice tree decomposition. The root is
/// a forget node of a terminal; the answer is read from its child's table.
fn run_dp(
    ntd: &NiceTreeDecomposition,
    instance: &Instance,
    policy: ReductionPolicy,
    deadline: Option<Instant>,
    stats: &mut SolveStats,
) -> Result<u64, SolveError> {
    if ntd.width() + 1 > 32 {
        return Err(SolveError::BagTooLarge(ntd.width() + 1));
    }
    let root = ntd.root();
    let root_terminal = match ntd.node(root).kind {
        NodeKind::ForgetVertex(v) if instance.is_terminal(v) => v,
        _ => unreachable!("nice decompositions are rooted at a terminal forget"),
    };
    let mut ctx = DpCtx::new(stats, deadline);
    let mut stack: Vec<BagTable> = Vec::new();
    for i in ntd.post_order() {
        if i == root {
            break;
        }
        ctx.check_deadline()?;
        let node = ntd.node(i);
        let table = match node.kind {
            NodeKind::Leaf => dp::leaf_table_ctx(&mut ctx)?,
            NodeKind::IntroduceVertex(v) => {
                let child = stack.pop().expect("child table");
                dp::introduce_vertex_ctx(&child, v, instance.is_terminal(v), &mut ctx)?
            }
            NodeKind::IntroduceEdge(u, v) => {
                let child = stack.pop().expect("child table");
                let w = instance
                    .weight_of(u, v)
                    .expect("introduced edges exist in the graph");
                dp::introduce_edge_ctx(child, u, v, w, &mut ctx)?
            }
            NodeKind::ForgetVertex(v) => {
                let child = stack.pop().expect("child table");
                dp::forget_vertex_ctx(&child, v, &mut ctx)?
            }
            NodeKind::Join => {
                let right = stack.pop().expect("right table");
                let left = stack.pop().expect("left table");
                dp::join_ctx(&left, &right, &mut ctx)?
            }
        };
        let table = apply_policy_ctx(table, policy, &mut ctx)?;
        ctx.stats.record_table(node.bag.len(), table.len() as u64);
        stack.push(table);
    }
    debug_assert_eq!(stack.len(), 1, "only the root child's table remains");
    dp::extract_answer(&stack[0], root_terminal)
}
