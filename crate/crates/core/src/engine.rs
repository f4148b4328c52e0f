//! The Fitness-Complexity map.
//!
//! One step computes complexities from the previous fitnesses, then
//! fitnesses from the freshly normalized complexities:
//!
//! ```text
//! Q~_p = ( sum_c M_cp F_c^(1/gamma) )^gamma      (gamma = -1: 1 / sum_c M_cp / F_c)
//! Q_p  = Q~_p / <Q~>
//! F~_c = sum_p M_cp Q_p
//! F_c  = F~_c / <F~>
//! ```
//!
//! Entities whose normalized value drops below `underflow_floor` are frozen
//! at the floor and excluded from every later sum and mean. A collapsed
//! country drags the products it exports with it: a product's complexity is
//! bounded above by the smallest fitness among its exporters.

use serde::{Deserialize, Serialize};

use crate::decay::{crossing_estimates, CrossingEstimates};
use crate::error::{Error, Result};
use crate::matrix::BipartiteMatrix;

/// Tunables of the iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct EngineParams {
    /// Elasticity of the complexity update; `-1` is the harmonic original.
    pub gamma: f64,
    pub underflow_floor: f64,
    pub max_iterations: u64,
    /// Trajectory sampling stride (the initial and final states are always kept).
    pub record_every: u64,
    pub record_complexity: bool,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            gamma: -1.0,
            underflow_floor: 1e-280,
            max_iterations: 100_000,
            record_every: 1,
            record_complexity: false,
        }
    }
}

impl EngineParams {
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_max_iterations(mut self, n: u64) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_record_every(mut self, stride: u64) -> Self {
        self.record_every = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma < 0.0) {
            return Err(Error::InvalidParams(format!(
                "gamma must be a finite negative number, got {}",
                self.gamma
            )));
        }
        // Stay well clear of the subnormal range so frozen values keep full precision.
        if !(self.underflow_floor >= 1e-300 && self.underflow_floor < 1e-3) {
            return Err(Error::InvalidParams(format!(
                "underflow_floor must lie in [1e-300, 1e-3), got {}",
                self.underflow_floor
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be positive".into()));
        }
        Ok(())
    }
}

/// When and how deep an entity fell through the floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct Collapse {
    pub iteration: u64,
    /// Natural log of the normalized value at the collapse step (may be `-inf`).
    pub ln_value: f64,
}

/// Fitness and complexity vectors at one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct IterationState {
    pub fitness: Vec<f64>,
    pub complexity: Vec<f64>,
    pub iteration: u64,
    pub row_collapse: Vec<Option<Collapse>>,
    pub col_collapse: Vec<Option<Collapse>>,
}

impl IterationState {
    /// `F = 1`, `Q = 1`, `n = 0`. Fails on all-zero rows or columns.
    pub fn uniform(m: &BipartiteMatrix) -> Result<Self> {
        Self::with_fitness(m, vec![1.0; m.n_rows()])
    }

    /// Starts from an arbitrary positive fitness vector (`Q = 1`).
    pub fn with_fitness(m: &BipartiteMatrix, fitness: Vec<f64>) -> Result<Self> {
        let empty = m.empty_lines();
        if !empty.is_clean() {
            return Err(Error::EmptyLines {
                rows: empty.empty_rows,
                cols: empty.empty_cols,
            });
        }
        if fitness.len() != m.n_rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} initial fitnesses for {} rows",
                fitness.len(),
                m.n_rows()
            )));
        }
        if let Some(bad) = fitness.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::InvalidParams(format!(
                "initial fitness must be positive and finite, got {bad}"
            )));
        }
        Ok(Self {
            fitness,
            complexity: vec![1.0; m.n_cols()],
            iteration: 0,
            row_collapse: vec![None; m.n_rows()],
            col_collapse: vec![None; m.n_cols()],
        })
    }

    #[inline]
    pub fn is_row_collapsed(&self, row: usize) -> bool {
        self.row_collapse[row].is_some()
    }

    #[inline]
    pub fn is_col_collapsed(&self, col: usize) -> bool {
        self.col_collapse[col].is_some()
    }

    pub fn collapsed_rows(&self) -> Vec<usize> {
        indices_of(&self.row_collapse)
    }

    pub fn collapsed_cols(&self) -> Vec<usize> {
        indices_of(&self.col_collapse)
    }

    /// Natural log of every fitness (frozen entities report the floor).
    pub fn ln_fitness(&self) -> Vec<f64> {
        self.fitness.iter().map(|f| f.ln()).collect()
    }

    pub fn ln_complexity(&self) -> Vec<f64> {
        self.complexity.iter().map(|q| q.ln()).collect()
    }

    /// Rows from most to least fit. Collapsed rows rank below live ones,
    /// later collapses above earlier ones; ties fall back to the row index.
    pub fn row_ranking(&self) -> Vec<usize> {
        ranking(&self.fitness, &self.row_collapse)
    }

    /// Columns from most to least complex, same conventions as [`Self::row_ranking`].
    pub fn col_ranking(&self) -> Vec<usize> {
        ranking(&self.complexity, &self.col_collapse)
    }

    fn check_shape(&self, m: &BipartiteMatrix) -> Result<()> {
        if self.fitness.len() != m.n_rows()
            || self.row_collapse.len() != m.n_rows()
            || self.complexity.len() != m.n_cols()
            || self.col_collapse.len() != m.n_cols()
        {
            return Err(Error::ShapeMismatch(format!(
                "state sized {}x{} for a {}x{} matrix",
                self.fitness.len(),
                self.complexity.len(),
                m.n_rows(),
                m.n_cols()
            )));
        }
        Ok(())
    }
}

fn indices_of(flags: &[Option<Collapse>]) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|_| i))
        .collect()
}

/// Descending order key: (alive, collapse iteration, log value).
fn rank_key(value: f64, collapse: &Option<Collapse>) -> (bool, u64, f64) {
    match collapse {
        None => (true, u64::MAX, value.ln()),
        Some(c) => (false, c.iteration, c.ln_value),
    }
}

fn ranking(values: &[f64], collapse: &[Option<Collapse>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let ka = rank_key(values[a], &collapse[a]);
        let kb = rank_key(values[b], &collapse[b]);
        kb.0.cmp(&ka.0)
            .then(kb.1.cmp(&ka.1))
            .then(kb.2.total_cmp(&ka.2))
            .then(a.cmp(&b))
    });
    idx
}

/// Sampled log-fitness (and optionally log-complexity) history of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct Trajectory {
    pub iterations: Vec<u64>,
    /// `ln F` per sample, one vector of length `n_rows` each.
    pub ln_fitness: Vec<Vec<f64>>,
    /// `ln Q` per sample; empty unless `record_complexity` was set.
    pub ln_complexity: Vec<Vec<f64>>,
    /// Collapse iteration of each row, as of the last sample.
    pub row_collapsed_at: Vec<Option<u64>>,
    pub col_collapsed_at: Vec<Option<u64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    fn push(&mut self, state: &IterationState, with_complexity: bool) {
        self.row_collapsed_at = state.row_collapse.iter().map(|c| c.map(|c| c.iteration)).collect();
        self.col_collapsed_at = state.col_collapse.iter().map(|c| c.map(|c| c.iteration)).collect();
        if self.iterations.last() == Some(&state.iteration) {
            return;
        }
        self.iterations.push(state.iteration);
        self.ln_fitness.push(state.ln_fitness());
        if with_complexity {
            self.ln_complexity.push(state.ln_complexity());
        }
    }

    /// `(n, ln F)` series of one row.
    pub fn fitness_series(&self, row: usize) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.iterations
            .iter()
            .zip(&self.ln_fitness)
            .map(move |(&n, v)| (n, v[row]))
    }

    pub fn complexity_series(&self, col: usize) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.iterations
            .iter()
            .zip(&self.ln_complexity)
            .map(move |(&n, v)| (n, v[col]))
    }

    /// Sample index holding iteration `n`, if recorded.
    pub fn position(&self, n: u64) -> Option<usize> {
        self.iterations.binary_search(&n).ok()
    }
}

/// Which ranking the MCI stopping rule watches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "lowercase")]
pub enum RankAxis {
    Countries,
    Products,
}

/// Stop once the minimum crossing iteration exceeds `threshold`, or no
/// crossing is predicted at all.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct MciRule {
    pub threshold: f64,
    pub axis: RankAxis,
    pub delta: u64,
    /// Do not fire before this iteration.
    pub min_iterations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Run exactly this many iterations.
    Iterations { count: u64 },
    /// Every live component changed by less than `tol` (relative) in one step.
    RelativeChange { tol: f64 },
    Mci(MciRule),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    IterationsReached,
    Converged { max_relative_change: f64 },
    MciExceeded { estimates: CrossingEstimates },
    /// `max_iterations` ran out before the rule fired.
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct RunOutcome {
    pub state: IterationState,
    pub trajectory: Trajectory,
    pub stop: StopReason,
}

/// Precomputed sparsity plus scratch buffers for repeated steps on one matrix.
pub struct Engine<'a> {
    matrix: &'a BipartiteMatrix,
    params: EngineParams,
    products_of: Vec<Vec<usize>>,
    exporters_of: Vec<Vec<usize>>,
    ln_floor: f64,
    scratch: Vec<f64>,
}

impl<'a> Engine<'a> {
    pub fn new(matrix: &'a BipartiteMatrix, params: EngineParams) -> Result<Self> {
        params.validate()?;
        let mut products_of = vec![Vec::new(); matrix.n_rows()];
        let mut exporters_of = vec![Vec::new(); matrix.n_cols()];
        for (r, products) in products_of.iter_mut().enumerate() {
            for (c, &v) in matrix.row(r).iter().enumerate() {
                if v {
                    products.push(c);
                    exporters_of[c].push(r);
                }
            }
        }
        Ok(Self {
            matrix,
            ln_floor: params.underflow_floor.ln(),
            params,
            products_of,
            exporters_of,
            scratch: Vec::new(),
        })
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn matrix(&self) -> &BipartiteMatrix {
        self.matrix
    }

    /// Advances `state` by one iteration in place.
    pub fn advance(&mut self, state: &mut IterationState) -> Result<()> {
        state.check_shape(self.matrix)?;
        let n = state.iteration + 1;
        self.update_complexity(state, n);
        self.update_fitness(state, n);
        self.cascade(state, n);
        state.iteration = n;
        Ok(())
    }

    fn update_complexity(&mut self, state: &mut IterationState, n: u64) {
        let floor = self.params.underflow_floor;
        let active: Vec<usize> = (0..self.matrix.n_cols())
            .filter(|&p| !state.is_col_collapsed(p))
            .collect();
        if active.is_empty() {
            return;
        }
        if self.params.gamma == -1.0 {
            self.scratch.clear();
            for &p in &active {
                let inv_sum: f64 = self.exporters_of[p]
                    .iter()
                    .filter(|&&c| !state.is_row_collapsed(c))
                    .map(|&c| 1.0 / state.fitness[c])
                    .sum();
                self.scratch.push(1.0 / inv_sum);
            }
            let mean = self.scratch.iter().sum::<f64>() / active.len() as f64;
            for (&p, &raw) in active.iter().zip(&self.scratch) {
                let q = raw / mean;
                state.complexity[p] = q;
                if q < floor {
                    state.col_collapse[p] = Some(Collapse {
                        iteration: n,
                        ln_value: q.ln(),
                    });
                    state.complexity[p] = floor;
                }
            }
        } else {
            // Power mean with a negative exponent: work in logs, since
            // F^(1/gamma) overflows long before F reaches the floor.
            let inv_gamma = 1.0 / self.params.gamma;
            self.scratch.clear();
            for &p in &active {
                let lse = log_sum_exp(
                    self.exporters_of[p]
                        .iter()
                        .filter(|&&c| !state.is_row_collapsed(c))
                        .map(|&c| inv_gamma * state.fitness[c].ln()),
                );
                self.scratch.push(self.params.gamma * lse);
            }
            let ln_mean = log_sum_exp(self.scratch.iter().copied()) - (active.len() as f64).ln();
            for (&p, &ln_raw) in active.iter().zip(&self.scratch) {
                let ln_q = ln_raw - ln_mean;
                if ln_q < self.ln_floor {
                    state.col_collapse[p] = Some(Collapse {
                        iteration: n,
                        ln_value: ln_q,
                    });
                    state.complexity[p] = floor;
                } else {
                    state.complexity[p] = ln_q.exp();
                }
            }
        }
    }

    fn update_fitness(&mut self, state: &mut IterationState, n: u64) {
        let floor = self.params.underflow_floor;
        let active: Vec<usize> = (0..self.matrix.n_rows())
            .filter(|&c| !state.is_row_collapsed(c))
            .collect();
        self.scratch.clear();
        for &c in &active {
            let sum: f64 = self.products_of[c]
                .iter()
                .filter(|&&p| !state.is_col_collapsed(p))
                .map(|&p| state.complexity[p])
                .sum();
            self.scratch.push(sum);
        }
        let mean = self.scratch.iter().sum::<f64>() / active.len() as f64;
        for (&c, &raw) in active.iter().zip(&self.scratch) {
            let f = raw / mean;
            state.fitness[c] = f;
            if f < floor {
                state.row_collapse[c] = Some(Collapse {
                    iteration: n,
                    ln_value: f.ln(),
                });
                state.fitness[c] = floor;
            }
        }
    }

    /// Products of a country that collapsed this step collapse with it.
    fn cascade(&self, state: &mut IterationState, n: u64) {
        for c in 0..self.matrix.n_rows() {
            if !matches!(state.row_collapse[c], Some(col) if col.iteration == n) {
                continue;
            }
            for &p in &self.products_of[c] {
                if state.col_collapse[p].is_none() {
                    state.col_collapse[p] = Some(Collapse {
                        iteration: n,
                        ln_value: state.complexity[p].ln(),
                    });
                    state.complexity[p] = self.params.underflow_floor;
                }
            }
        }
    }

    /// Runs from `init` until `stop` fires or the iteration budget runs out.
    pub fn run(&mut self, init: IterationState, stop: StoppingRule) -> Result<RunOutcome> {
        init.check_shape(self.matrix)?;
        let stride = self.params.record_every;
        let with_q = self.params.record_complexity;
        let mut state = init;
        let mut trajectory = Trajectory::default();
        trajectory.push(&state, with_q);

        // ln F history for the MCI estimator, indexed by iteration modulo delta + 1.
        let mut history: Vec<Vec<f64>> = Vec::new();
        let mci_rule = match stop {
            StoppingRule::Mci(rule) => {
                if rule.delta == 0 || rule.threshold.is_nan() || rule.threshold <= 0.0 {
                    return Err(Error::InvalidParams(
                        "MCI rule needs delta >= 1 and a positive threshold".into(),
                    ));
                }
                history = vec![Vec::new(); rule.delta as usize + 1];
                history[(state.iteration % (rule.delta + 1)) as usize] = mci_values(&state, rule.axis);
                Some(rule)
            }
            _ => None,
        };

        let reason = loop {
            if let StoppingRule::Iterations { count } = stop {
                if state.iteration >= count {
                    break StopReason::IterationsReached;
                }
            }
            if state.iteration >= self.params.max_iterations {
                break StopReason::BudgetExhausted;
            }
            let previous = matches!(stop, StoppingRule::RelativeChange { .. }).then(|| state.clone());
            self.advance(&mut state)?;
            let n = state.iteration;
            if n.is_multiple_of(stride) {
                trajectory.push(&state, with_q);
            }

            match (stop, previous) {
                (StoppingRule::RelativeChange { tol }, Some(prev)) => {
                    let change = max_relative_change(&prev, &state);
                    if change < tol {
                        break StopReason::Converged {
                            max_relative_change: change,
                        };
                    }
                }
                (StoppingRule::Mci(_), _) => {
                    let rule = mci_rule.expect("set above");
                    let slots = rule.delta + 1;
                    history[(n % slots) as usize] = mci_values(&state, rule.axis);
                    if n >= rule.min_iterations.max(rule.delta + 1) {
                        let earlier = &history[((n - rule.delta) % slots) as usize];
                        let current = &history[(n % slots) as usize];
                        let estimates = crossing_estimates(current, earlier, n, rule.delta);
                        let fire = match estimates.mci {
                            None => true,
                            Some(m) => m.log10_iteration > rule.threshold.log10(),
                        };
                        if fire {
                            break StopReason::MciExceeded { estimates };
                        }
                    }
                }
                _ => {}
            }
        };
        trajectory.push(&state, with_q);
        Ok(RunOutcome {
            state,
            trajectory,
            stop: reason,
        })
    }
}

/// `ln` values fed to the crossing estimator; collapsed entities become NaN
/// so the estimator skips them.
fn mci_values(state: &IterationState, axis: RankAxis) -> Vec<f64> {
    let (values, collapse) = match axis {
        RankAxis::Countries => (&state.fitness, &state.row_collapse),
        RankAxis::Products => (&state.complexity, &state.col_collapse),
    };
    values
        .iter()
        .zip(collapse)
        .map(|(v, c)| if c.is_some() { f64::NAN } else { v.ln() })
        .collect()
}

fn max_relative_change(prev: &IterationState, next: &IterationState) -> f64 {
    let rows = prev
        .fitness
        .iter()
        .zip(&next.fitness)
        .zip(&next.row_collapse)
        .filter(|(_, c)| c.is_none())
        .map(|((a, b), _)| ((b - a) / a).abs());
    let cols = prev
        .complexity
        .iter()
        .zip(&next.complexity)
        .zip(&next.col_collapse)
        .filter(|(_, c)| c.is_none())
        .map(|((a, b), _)| ((b - a) / a).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `F = Q = 1` starting state; see [`IterationState::uniform`].
pub fn init_uniform(m: &BipartiteMatrix) -> Result<IterationState> {
    IterationState::uniform(m)
}

/// One iteration of the map, returning the next state.
pub fn step(m: &BipartiteMatrix, state: &IterationState, params: &EngineParams) -> Result<IterationState> {
    let mut next = state.clone();
    Engine::new(m, params.clone())?.advance(&mut next)?;
    Ok(next)
}

/// Iterates from `init` under `stop`; see [`Engine::run`].
pub fn iterate(
    m: &BipartiteMatrix,
    init: IterationState,
    params: &EngineParams,
    stop: StoppingRule,
) -> Result<RunOutcome> {
    Engine::new(m, params.clone())?.run(init, stop)
}
