//! Options, outcomes and stage logging shared by the two solvers.

use crate::error::{PkpError, Result};
use crate::field::Elem;
use crate::instance::{Permutation, Reconstructor, ValueIndex};
use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

/// Default bound on the number of list entries held in memory.
pub const DEFAULT_MEMORY_CAP: usize = 1 << 28;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Enumerate every solution instead of stopping at the first.
    pub exhaustive: bool,
    pub memory_cap: usize,
    /// ISD iteration budget; `None` uses the default failure target.
    pub max_isd_iters: Option<u64>,
    /// Resampling budget for column choices that make a block singular.
    pub max_resamples: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            exhaustive: false,
            memory_cap: DEFAULT_MEMORY_CAP,
            max_isd_iters: None,
            max_resamples: 200,
        }
    }
}

impl SolveOptions {
    pub fn exhaustive() -> Self {
        Self {
            exhaustive: true,
            ..Self::default()
        }
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: &'static str,
    pub predicted_log2: f64,
    pub measured: u64,
    pub elapsed_ms: f64,
}

impl fmt::Display for StageRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stage={} predicted_log2={:.4} measured={} elapsed_ms={:.3}",
            self.stage, self.predicted_log2, self.measured, self.elapsed_ms
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOutcome {
    /// Sorted by permutation map; a single entry unless exhaustive.
    pub solutions: Vec<Permutation>,
    pub stages: Vec<StageRecord>,
}

impl SolveOutcome {
    pub fn first(&self) -> Option<&Permutation> {
        self.solutions.first()
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }
}

pub(crate) struct StageLog {
    records: Vec<StageRecord>,
}

impl StageLog {
    pub(crate) fn new() -> Self {
        Self { records: Vec::new() }
    }

    pub(crate) fn time<T>(
        &mut self,
        stage: &'static str,
        predicted_log2: f64,
        f: impl FnOnce() -> Result<(T, u64)>,
    ) -> Result<T> {
        let start = Instant::now();
        let (value, measured) = f()?;
        let rec = StageRecord {
            stage,
            predicted_log2,
            measured,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        log::info!("{rec}");
        self.records.push(rec);
        Ok(value)
    }

    pub(crate) fn finish(self, found: BTreeSet<Vec<usize>>) -> Result<SolveOutcome> {
        if found.is_empty() {
            return Err(PkpError::NoSolution);
        }
        let solutions = found.into_iter().map(Permutation::new).collect::<Result<Vec<_>>>()?;
        Ok(SolveOutcome {
            solutions,
            stages: self.records,
        })
    }
}

/// Final test shared by both solvers: completes a candidate on the free
/// coordinates, maps it back to original column order, and keeps it if it
/// is a rearrangement of `c`.
pub(crate) struct FinalTest<'a> {
    pub recon: &'a Reconstructor,
    pub index: &'a ValueIndex,
    /// Column order used while solving; `c~[column_order[i]] = solved[i]`.
    pub column_order: &'a Permutation,
    pub scratch: Vec<Elem>,
    pub original: Vec<Elem>,
}

impl FinalTest<'_> {
    pub(crate) fn check(&mut self, partial: &[Elem]) -> Option<Vec<usize>> {
        self.recon.fill(partial, &mut self.scratch);
        for (i, &col) in self.column_order.as_slice().iter().enumerate() {
            self.original[col] = self.scratch[i];
        }
        self.index.permutation_of(&self.original).map(|p| p.as_slice().to_vec())
    }
}
