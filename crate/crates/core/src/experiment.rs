//! Seeded sweeps over SDN counts and traffic matrices, rendered as CSV.
//!
//! Matrix `i` uses seed `base + i` and is shared by every SDN count; the
//! switches for count `k` are placed with seed `base + 1_000_000 + k`. Rows
//! come out ordered by (algorithm, sdn_count, matrix_index) however the work
//! was scheduled.
//!
//! CSV layout: a header, one data row per run, then `#`-prefixed summary
//! lines:
//!
//! ```text
//! # summary
//! # mean,<algorithm>,<sdn_count>,<ok_rows>,<mean_ratio>
//! # series,<algorithm>,<sdn_count>,<ratio of matrix 0>,<ratio of matrix 1>,...
//! # gap,<algorithm>,<baseline>,<sdn_count>,<mean difference>
//! ```
//!
//! Means and gaps cover `ok` rows only; a series leaves an empty field for a
//! matrix whose run failed. Gaps compare HEATE with each baseline present.

use std::fmt::Write;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::heate::{run, Algorithm, HeateError};
use crate::topology::{Topology, TopologyError};
use crate::traffic::{generate_matrix, GeneratorParams, TrafficError, TrafficMatrix};
use crate::weight_search::{ConfigError, SearchConfig};

pub const CSV_HEADER: &str =
    "algorithm,sdn_count,matrix_index,matrix_seed,status,energy_saving_ratio,max_utilization,active_links,rounds,wall_time_ms";

const PLACEMENT_SEED_OFFSET: u64 = 1_000_000;

pub fn matrix_seed(base_seed: u64, matrix_index: usize) -> u64 {
    base_seed.wrapping_add(matrix_index as u64)
}

pub fn placement_seed(base_seed: u64, sdn_count: usize) -> u64 {
    base_seed.wrapping_add(PLACEMENT_SEED_OFFSET).wrapping_add(sdn_count as u64)
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Node kinds are overwritten by the seeded placement for each count.
    pub topology: Topology,
    pub algorithms: Vec<Algorithm>,
    pub config: SearchConfig,
    pub sdn_counts: Vec<usize>,
    pub matrices: usize,
    pub base_seed: u64,
    pub sigma_max: f64,
    /// Fill `wall_time_ms`; leaves the output non-reproducible.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(topology: Topology) -> Self {
        ExperimentSpec {
            topology,
            algorithms: vec![Algorithm::Heate],
            config: SearchConfig::default(),
            sdn_counts: vec![0],
            matrices: 50,
            base_seed: 0,
            sigma_max: GeneratorParams::default().sigma_max,
            timing: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("no algorithms selected")]
    NoAlgorithms,
    #[error("no sdn counts selected")]
    NoSdnCounts,
    #[error("matrix count must be at least 1")]
    NoMatrices,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Ok {
        energy_saving_ratio: f64,
        max_utilization: f64,
        active_links: usize,
        rounds: usize,
    },
    /// The full topology could not carry the matrix.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub algorithm: Algorithm,
    pub sdn_count: usize,
    pub matrix_index: usize,
    pub matrix_seed: u64,
    pub outcome: RowOutcome,
    pub wall_time_ms: Option<f64>,
}

impl ExperimentRow {
    pub fn ratio(&self) -> Option<f64> {
        match self.outcome {
            RowOutcome::Ok { energy_saving_ratio, .. } => Some(energy_saving_ratio),
            RowOutcome::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    fn groups(&self) -> Vec<(Algorithm, usize)> {
        let mut groups: Vec<(Algorithm, usize)> = Vec::new();
        for row in &self.rows {
            if groups.last() != Some(&(row.algorithm, row.sdn_count)) {
                groups.push((row.algorithm, row.sdn_count));
            }
        }
        groups
    }

    fn group(&self, algorithm: Algorithm, sdn_count: usize) -> impl Iterator<Item = &ExperimentRow> {
        self.rows.iter().filter(move |r| r.algorithm == algorithm && r.sdn_count == sdn_count)
    }

    /// Mean ratio over the `ok` rows of one (algorithm, sdn_count) group,
    /// with the number of rows it covers. `None` if no row succeeded.
    pub fn mean_ratio(&self, algorithm: Algorithm, sdn_count: usize) -> Option<(f64, usize)> {
        let ratios: Vec<f64> = self.group(algorithm, sdn_count).filter_map(ExperimentRow::ratio).collect();
        if ratios.is_empty() {
            return None;
        }
        Some((ratios.iter().sum::<f64>() / ratios.len() as f64, ratios.len()))
    }

    /// Per-matrix ratios of one group, in matrix order.
    pub fn series(&self, algorithm: Algorithm, sdn_count: usize) -> Vec<Option<f64>> {
        self.group(algorithm, sdn_count).map(ExperimentRow::ratio).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{},{},{},", row.algorithm, row.sdn_count, row.matrix_index, row.matrix_seed);
            match row.outcome {
                RowOutcome::Ok { energy_saving_ratio, max_utilization, active_links, rounds } => {
                    let _ = write!(out, "ok,{energy_saving_ratio},{max_utilization},{active_links},{rounds},");
                }
                RowOutcome::Infeasible => out.push_str("infeasible,,,,,"),
            }
            if let Some(ms) = row.wall_time_ms {
                let _ = write!(out, "{ms:.3}");
            }
            out.push('\n');
        }

        out.push_str("# summary\n");
        let groups = self.groups();
        for &(algorithm, sdn_count) in &groups {
            match self.mean_ratio(algorithm, sdn_count) {
                Some((mean, n)) => {
                    let _ = writeln!(out, "# mean,{algorithm},{sdn_count},{n},{mean}");
                }
                None => {
                    let _ = writeln!(out, "# mean,{algorithm},{sdn_count},0,");
                }
            }
        }
        for &(algorithm, sdn_count) in &groups {
            let _ = write!(out, "# series,{algorithm},{sdn_count}");
            for ratio in self.series(algorithm, sdn_count) {
                match ratio {
                    Some(r) => {
                        let _ = write!(out, ",{r}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        for &(algorithm, sdn_count) in groups.iter().filter(|g| g.0 == Algorithm::Heate) {
            let Some((ours, _)) = self.mean_ratio(algorithm, sdn_count) else { continue };
            for baseline in [Algorithm::EaOspf, Algorithm::EaFa] {
                if let Some((theirs, _)) = self.mean_ratio(baseline, sdn_count) {
                    let _ = writeln!(out, "# gap,{algorithm},{baseline},{sdn_count},{}", ours - theirs);
                }
            }
        }
        out
    }
}

struct Job {
    algorithm: Algorithm,
    sdn_count: usize,
    matrix_index: usize,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, ExperimentError> {
    if spec.algorithms.is_empty() {
        return Err(ExperimentError::NoAlgorithms);
    }
    if spec.sdn_counts.is_empty() {
        return Err(ExperimentError::NoSdnCounts);
    }
    if spec.matrices == 0 {
        return Err(ExperimentError::NoMatrices);
    }
    spec.config.validate()?;

    let mut placed = Vec::with_capacity(spec.sdn_counts.len());
    for &k in &spec.sdn_counts {
        let mut topo = spec.topology.clone();
        topo.place_sdn(k, placement_seed(spec.base_seed, k))?;
        placed.push(topo);
    }
    let matrices: Vec<TrafficMatrix> = (0..spec.matrices)
        .map(|i| {
            let params = GeneratorParams { sigma_max: spec.sigma_max, seed: matrix_seed(spec.base_seed, i) };
            generate_matrix(&spec.topology, &params)
        })
        .collect::<Result<_, _>>()?;

    let mut jobs = Vec::new();
    for &algorithm in &spec.algorithms {
        for (slot, &sdn_count) in spec.sdn_counts.iter().enumerate() {
            for matrix_index in 0..spec.matrices {
                jobs.push((slot, Job { algorithm, sdn_count, matrix_index }));
            }
        }
    }

    let rows = jobs
        .par_iter()
        .map(|(slot, job)| {
            let start = Instant::now();
            let result = run(&placed[*slot], &matrices[job.matrix_index], &spec.config, job.algorithm);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let outcome = match result {
                Ok(r) => RowOutcome::Ok {
                    energy_saving_ratio: r.energy_saving_ratio,
                    max_utilization: r.max_utilization,
                    active_links: r.topology.active_physical_links().count(),
                    rounds: r.rounds,
                },
                Err(HeateError::InitialInfeasible(reason)) => {
                    log::info!("{} sdn={} matrix={}: {reason}", job.algorithm, job.sdn_count, job.matrix_index);
                    RowOutcome::Infeasible
                }
                Err(e) => unreachable!("inputs validated up front: {e}"),
            };
            ExperimentRow {
                algorithm: job.algorithm,
                sdn_count: job.sdn_count,
                matrix_index: job.matrix_index,
                matrix_seed: matrix_seed(spec.base_seed, job.matrix_index),
                outcome,
                wall_time_ms: spec.timing.then_some(elapsed),
            }
        })
        .collect();
    Ok(ExperimentReport { rows })
}
