//! End-to-end analysis of one matrix: iterate, classify, order, test the
//! belly, reduce, and estimate crossings.

use serde::{Deserialize, Serialize};

use crate::decay::{classify_decay, count_rank_crossings, min_crossing_iteration, CrossingEstimates, DecayParams, EntityDecay};
use crate::engine::{iterate, EngineParams, IterationState, RankAxis, StopReason, StoppingRule, Trajectory};
use crate::error::Result;
use crate::geometry::{belly_test, find_crossing_country, order_matrix, BellyReport, OrderedMatrix, RemovalResult};
use crate::matrix::{BipartiteMatrix, Sanitation};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Where the matrix came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct InputDescriptor {
    /// File path, `named:<name>` or `blocks:<record>`.
    pub source: String,
    /// Hex SHA-256 of the matrix in dense CSV form, as analysed.
    pub content_hash: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub ones: usize,
    /// Empty lines dropped before iterating.
    pub sanitation: Sanitation,
}

/// Final value of one country or product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct EntityValue {
    pub label: String,
    pub value: f64,
    pub log10_value: f64,
    /// Iteration at which the value hit the underflow floor.
    pub collapsed_at: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct LabelledDecay {
    pub label: String,
    #[serde(flatten)]
    pub decay: EntityDecay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct OrderingReport {
    /// Country labels, most fit first.
    pub rows: Vec<String>,
    /// Product labels, least complex first.
    pub cols: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct RemovalReport {
    pub crossing_country: Option<String>,
    pub removed_countries: Vec<String>,
    pub removed_products: Vec<String>,
    pub rounds: usize,
    pub reduced_rows: Vec<String>,
    pub reduced_cols: Vec<String>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct RunReport {
    pub schema_version: String,
    pub input: InputDescriptor,
    pub params: EngineParams,
    pub decay_params: DecayParams,
    pub stopping: StoppingRule,
    pub stop: StopReason,
    pub final_iteration: u64,
    pub fitness: Vec<EntityValue>,
    pub complexity: Vec<EntityValue>,
    pub country_decay: Vec<LabelledDecay>,
    pub product_decay: Vec<LabelledDecay>,
    pub ordering: OrderingReport,
    pub belly: BellyReport,
    pub removal: RemovalReport,
    /// Estimates at the final iteration; absent when the trajectory does not
    /// hold the sample `delta` iterations back.
    pub crossing_estimates: Option<CrossingEstimates>,
}

/// Report plus the series written next to it.
pub struct Analysis {
    pub report: RunReport,
    pub trajectory: Trajectory,
    pub ordered: OrderedMatrix,
    pub crossing_counts: Vec<(u64, usize)>,
    pub removal: RemovalResult,
    /// Matrix actually iterated (empty lines removed).
    pub matrix: BipartiteMatrix,
}

fn entity_values(values: &[f64], labels: &[String], collapse: &[Option<crate::engine::Collapse>]) -> Vec<EntityValue> {
    values
        .iter()
        .zip(labels)
        .zip(collapse)
        .map(|((&v, l), c)| EntityValue {
            label: l.clone(),
            value: v,
            log10_value: v.log10(),
            collapsed_at: c.map(|c| c.iteration),
        })
        .collect()
}

fn labelled(decays: Vec<EntityDecay>, labels: &[String]) -> Vec<LabelledDecay> {
    decays
        .into_iter()
        .zip(labels)
        .map(|(decay, l)| LabelledDecay { label: l.clone(), decay })
        .collect()
}

/// Runs the whole pipeline. Empty lines are dropped first and listed in the
/// input descriptor; `content_hash` is left for the caller to fill.
pub fn analyse(
    source: &str,
    m: &BipartiteMatrix,
    params: &EngineParams,
    stop: StoppingRule,
    decay_params: &DecayParams,
) -> Result<Analysis> {
    let (m, sanitation) = m.without_empty_lines()?;
    let mut run_params = params.clone();
    run_params.record_complexity = true;
    let outcome = iterate(&m, IterationState::uniform(&m)?, &run_params, stop)?;
    let state = &outcome.state;
    let traj = &outcome.trajectory;

    let decay = classify_decay(traj, decay_params);
    let ordered = order_matrix(&m, state)?;
    let belly = belly_test(&ordered);
    let removal = find_crossing_country(&m, params, stop)?;
    let crossing_estimates = match &outcome.stop {
        StopReason::MciExceeded { estimates } => Some(estimates.clone()),
        _ => min_crossing_iteration(traj, RankAxis::Countries, decay_params.delta),
    };
    let crossing_counts = count_rank_crossings(traj, RankAxis::Countries);

    let rl = m.row_labels();
    let cl = m.col_labels();
    let names = |idx: &[usize], labels: &[String]| idx.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>();
    let report = RunReport {
        schema_version: SCHEMA_VERSION.into(),
        input: InputDescriptor {
            source: source.into(),
            content_hash: String::new(),
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            ones: m.ones(),
            sanitation,
        },
        params: params.clone(),
        decay_params: decay_params.clone(),
        stopping: stop,
        stop: outcome.stop.clone(),
        final_iteration: state.iteration,
        fitness: entity_values(&state.fitness, rl, &state.row_collapse),
        complexity: entity_values(&state.complexity, cl, &state.col_collapse),
        country_decay: labelled(decay.rows, rl),
        product_decay: labelled(decay.cols, cl),
        ordering: OrderingReport {
            rows: names(&ordered.row_perm, rl),
            cols: names(&ordered.col_perm, cl),
        },
        belly,
        removal: RemovalReport {
            crossing_country: removal.crossing_country.map(|i| rl[i].clone()),
            removed_countries: names(&removal.removed_countries(), rl),
            removed_products: names(&removal.removed_products(), cl),
            rounds: removal.steps.len(),
            reduced_rows: names(&removal.surviving_rows, rl),
            reduced_cols: names(&removal.surviving_cols, cl),
            degenerate: removal.degenerate,
        },
        crossing_estimates,
    };
    Ok(Analysis {
        report,
        trajectory: outcome.trajectory,
        ordered,
        crossing_counts,
        removal,
        matrix: m,
    })
}

/// Cells for external plotting of the ordered matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct HeatmapSidecar {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub diagonal_cells: Vec<(usize, usize)>,
    pub external_cells: Vec<(usize, usize)>,
    /// Row ranks where the diagonal meets the external area, bottom-up.
    pub crossing_rows: Vec<usize>,
    pub grazing: bool,
}

impl HeatmapSidecar {
    pub fn new(om: &OrderedMatrix, belly: &BellyReport) -> Self {
        Self {
            n_rows: om.matrix.n_rows(),
            n_cols: om.matrix.n_cols(),
            row_labels: om.matrix.row_labels().to_vec(),
            col_labels: om.matrix.col_labels().to_vec(),
            diagonal_cells: belly.diagonal_cells.clone(),
            external_cells: belly.external_cells.clone(),
            crossing_rows: belly.crossing_rows.clone(),
            grazing: belly.grazing,
        }
    }
}
