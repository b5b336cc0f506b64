//! Job scheduling for per-submodule minimization.
//!
//! Jobs are (submodule id, estimated size) pairs; the size is the
//! submodule's initial gate count, which stands in for processing time.
//! LPT sorts jobs by size descending and greedily places each on the core
//! with the smallest aggregate; round-robin assigns job i to core i mod N
//! regardless of size.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Lpt,
    RoundRobin,
}

/// One scheduling decision, in the order it was made.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub job: usize,
    pub size: u64,
    pub core: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleState {
    pub n_cores: usize,
    /// Job ids per core, in assignment order.
    pub core_jobs: Vec<Vec<usize>>,
    /// Total assigned size per core.
    pub aggregates: Vec<u64>,
    /// The assignment log, for replaying the greedy invariant.
    pub log: Vec<Placement>,
}

impl ScheduleState {
    pub fn makespan(&self) -> u64 {
        self.aggregates.iter().copied().max().unwrap_or(0)
    }
}

/// Assigns `jobs` (id, size) to `n_cores` cores under the chosen strategy.
pub fn schedule(jobs: &[(usize, u64)], n_cores: usize, strategy: Strategy) -> ScheduleState {
    assert!(n_cores >= 1, "need at least one core");
    let mut state = ScheduleState {
        n_cores,
        core_jobs: vec![Vec::new(); n_cores],
        aggregates: vec![0; n_cores],
        log: Vec::new(),
    };
    let order: Vec<(usize, u64)> = match strategy {
        Strategy::Lpt => {
            let mut sorted = jobs.to_vec();
            // Descending size; equal sizes keep ascending job id.
            sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            sorted
        }
        Strategy::RoundRobin => jobs.to_vec(),
    };
    for (position, &(job, size)) in order.iter().enumerate() {
        let core = match strategy {
            Strategy::Lpt => {
                let min = state.aggregates.iter().copied().min().unwrap();
                state.aggregates.iter().position(|&g| g == min).unwrap()
            }
            Strategy::RoundRobin => position % n_cores,
        };
        state.core_jobs[core].push(job);
        state.aggregates[core] += size;
        state.log.push(Placement { job, size, core });
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lpt_balances_the_reference_jobs() {
        // g = [7, 5, 3, 2] on two cores: 7 -> core0, 5 -> core1, 3 -> core1
        // (5 < 7), 2 -> core0 (7 < 8): cores {7, 2} and {5, 3}, makespan 9.
        let jobs = [(0, 7), (1, 5), (2, 3), (3, 2)];
        let s = schedule(&jobs, 2, Strategy::Lpt);
        assert_eq!(s.core_jobs, vec![vec![0, 3], vec![1, 2]]);
        assert_eq!(s.aggregates, vec![9, 8]);
        assert_eq!(s.makespan(), 9);
    }

    #[test]
    fn single_core_takes_everything() {
        let jobs = [(0, 4), (1, 9), (2, 1)];
        let s = schedule(&jobs, 1, Strategy::Lpt);
        assert_eq!(s.core_jobs, vec![vec![1, 0, 2]]);
        assert_eq!(s.aggregates, vec![14]);
    }

    #[test]
    fn round_robin_is_position_modulo() {
        let jobs = [(10, 7), (11, 5), (12, 3), (13, 2)];
        let s = schedule(&jobs, 2, Strategy::RoundRobin);
        assert_eq!(s.core_jobs, vec![vec![10, 12], vec![11, 13]]);
        for (i, p) in s.log.iter().enumerate() {
            assert_eq!(p.core, i % 2);
        }
    }

    #[test]
    fn lpt_log_replays_greedily() {
        let jobs: Vec<(usize, u64)> = (0..17).map(|i| (i, (i as u64 * 13 + 5) % 23)).collect();
        let s = schedule(&jobs, 4, Strategy::Lpt);
        let mut aggregates = vec![0u64; 4];
        let mut seen = Vec::new();
        for p in &s.log {
            let min = aggregates.iter().copied().min().unwrap();
            assert!(
                aggregates[p.core] <= min,
                "job {} went to core {} with aggregate {} > minimum {}",
                p.job,
                p.core,
                aggregates[p.core],
                min
            );
            aggregates[p.core] += p.size;
            seen.push(p.job);
        }
        assert_eq!(aggregates, s.aggregates);
        seen.sort_unstable();
        assert_eq!(seen, (0..17).collect::<Vec<_>>(), "each job placed exactly once");
    }

    #[test]
    fn empty_job_list() {
        let s = schedule(&[], 3, Strategy::Lpt);
        assert_eq!(s.makespan(), 0);
        assert!(s.log.is_empty());
    }
}
