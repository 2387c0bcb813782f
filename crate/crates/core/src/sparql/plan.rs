use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::kg::TermTriple;

use super::{BgpQuery, SparqlBackend, SparqlError};

/// One page of one branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryJob {
    pub branch: usize,
    pub limit: u64,
    pub offset: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryBatchPlan {
    pub jobs: Vec<QueryJob>,
    /// Row count per branch as reported by the backend.
    pub counts: Vec<u64>,
    pub batch_size: u64,
}

impl QueryBatchPlan {
    pub fn estimated_rows(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Rows gathered so far and the indices of the jobs that produced them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialResult {
    pub completed: BTreeSet<usize>,
    pub rows: Vec<TermTriple>,
}

pub fn get_graph_size(
    backend: &dyn SparqlBackend,
    bgp: &BgpQuery,
) -> Result<Vec<u64>, SparqlError> {
    (0..bgp.branches.len())
        .map(|b| backend.count(bgp, b))
        .collect()
}

pub fn execution_planner(bgp: &BgpQuery, counts: &[u64], bs: u64) -> Result<QueryBatchPlan, SparqlError> {
    if bs == 0 {
        return Err(SparqlError::UnsupportedParams("batch size must be >= 1".into()));
    }
    if counts.len() != bgp.branches.len() {
        return Err(SparqlError::UnsupportedParams(format!(
            "{} counts for {} branches",
            counts.len(),
            bgp.branches.len()
        )));
    }
    let mut jobs = Vec::new();
    for (branch, &count) in counts.iter().enumerate() {
        let mut offset = 0;
        while offset < count {
            jobs.push(QueryJob {
                branch,
                limit: bs,
                offset,
            });
            offset += bs;
        }
    }
    Ok(QueryBatchPlan {
        jobs,
        counts: counts.to_vec(),
        batch_size: bs,
    })
}

pub fn execute_plan(
    backend: &dyn SparqlBackend,
    bgp: &BgpQuery,
    plan: &QueryBatchPlan,
    workers: usize,
) -> Result<Vec<TermTriple>, SparqlError> {
    resume_plan(backend, bgp, plan, workers, PartialResult::default())
}

/// Runs the jobs of `plan` not already listed in `done.completed`. Workers
/// claim jobs through a shared counter; the first failure stops the others
/// and is reported with everything gathered up to that point.
pub fn resume_plan(
    backend: &dyn SparqlBackend,
    bgp: &BgpQuery,
    plan: &QueryBatchPlan,
    workers: usize,
    done: PartialResult,
) -> Result<Vec<TermTriple>, SparqlError> {
    if workers == 0 {
        return Err(SparqlError::UnsupportedParams("worker count must be >= 1".into()));
    }
    let skip = done.completed.clone();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let acc = Mutex::new(done);
    let failure: Mutex<Option<(usize, SparqlError)>> = Mutex::new(None);
    let workers = workers.min(plan.jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = plan.jobs.get(i) else { break };
                if skip.contains(&i) {
                    continue;
                }
                match backend.fetch(bgp, job) {
                    Ok(rows) => {
                        let mut acc = acc.lock().unwrap();
                        acc.rows.extend(rows);
                        acc.completed.insert(i);
                    }
                    Err(e) => {
                        abort.store(true, Ordering::Relaxed);
                        let mut f = failure.lock().unwrap();
                        if f.is_none() {
                            *f = Some((i, e));
                        }
                        break;
                    }
                }
            });
        }
    });
    let acc = acc.into_inner().unwrap();
    match failure.into_inner().unwrap() {
        None => Ok(acc.rows),
        Some((index, cause)) => {
            log::error!("job {index} failed: {cause}");
            Err(SparqlError::JobFailed {
                index,
                job: plan.jobs[index],
                cause: Box::new(cause),
                partial: Box::new(acc),
            })
        }
    }
}
