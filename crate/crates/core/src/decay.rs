//! Decay classification and rank-crossing estimators.
//!
//! A decaying fitness is either a power law, `ln F` linear in `ln n`, or an
//! exponential, `ln F` linear in `n`. The classifier measures both slopes
//! over the geometric half-windows `[L/4, L/2]` and `[L/2, L]` ending at the
//! last live sample `L`; only the right model gives two matching slopes.

use serde::{Deserialize, Serialize};

use crate::engine::{MciRule, RankAxis, StoppingRule, Trajectory};

/// Classifier and estimator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct DecayParams {
    /// Delay of the growth-rate estimator.
    pub delta: u64,
    /// Minimum span, in iterations, of the trailing half-window.
    pub window: u64,
    /// Relative drift allowed between the two half-window slopes.
    pub slope_tol: f64,
    /// One-step relative change below which a live entity counts as converged.
    pub conv_tol: f64,
    /// Largest `|d ln F / d ln n|` still read as convergence, provided it is shrinking.
    pub converge_slope: f64,
    /// Shortest trajectory worth classifying.
    pub classify_at: u64,
}

impl Default for DecayParams {
    fn default() -> Self {
        Self {
            delta: 2,
            window: 50,
            slope_tol: 1e-2,
            conv_tol: 1e-12,
            converge_slope: 0.05,
            classify_at: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    Converged { limit: f64 },
    /// `F ~ n^alpha`, `alpha < 0`.
    PowerLaw { alpha: f64 },
    /// `F ~ exp(rate * n)`, `rate < 0`, natural log per iteration.
    Exponential { rate: f64 },
    Stationary,
    Undetermined,
}

impl DecayClass {
    pub fn decays(&self) -> bool {
        matches!(self, Self::PowerLaw { .. } | Self::Exponential { .. })
    }

    pub fn short_label(&self) -> String {
        match self {
            Self::Converged { .. } => "c".into(),
            Self::PowerLaw { alpha } => format!("n^{alpha:.2}"),
            Self::Exponential { rate } => format!("e^({rate:.3}n)"),
            Self::Stationary => "s".into(),
            Self::Undetermined => "?".into(),
        }
    }
}

/// Slopes behind one classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct SlopeDiagnostics {
    /// Last live iteration used.
    pub last_live: u64,
    pub collapsed_at: Option<u64>,
    /// `d ln F / d ln n` over the early and late half-windows.
    pub loglog_slopes: [f64; 2],
    /// `d ln F / d n` over the same windows.
    pub linear_slopes: [f64; 2],
    pub final_relative_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct EntityDecay {
    pub class: DecayClass,
    pub diagnostics: Option<SlopeDiagnostics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct DecayReport {
    pub rows: Vec<EntityDecay>,
    /// Empty unless complexities were recorded.
    pub cols: Vec<EntityDecay>,
}

/// Predicted crossing between two adjacent entries of the ranking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct CrossingEstimate {
    /// Index of the currently higher-ranked entity.
    pub upper: usize,
    pub lower: usize,
    pub alpha_upper: f64,
    pub alpha_lower: f64,
    /// `log10` of the estimated crossing iteration; `None` for parallel decays.
    pub log10_iteration: Option<f64>,
    /// True when the estimate lies in the future (the lower entity decays slower).
    pub valid: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct MinimumCrossing {
    pub log10_iteration: f64,
    pub upper: usize,
    pub lower: usize,
}

impl MinimumCrossing {
    pub fn iteration(&self) -> f64 {
        10f64.powf(self.log10_iteration)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct CrossingEstimates {
    pub iteration: u64,
    pub pairs: Vec<CrossingEstimate>,
    /// Minimum over valid pairs; `None` means no future crossing is predicted.
    pub mci: Option<MinimumCrossing>,
}

/// Growth-rate estimate `(ln F(n) - ln F(n - delta)) / (ln n - ln(n - delta))`.
pub fn estimate_alpha(ln_now: f64, ln_before: f64, n: u64, delta: u64) -> f64 {
    debug_assert!(delta >= 1 && n > delta);
    (ln_now - ln_before) / ((n as f64).ln() - ((n - delta) as f64).ln())
}

/// Estimated crossing iteration of two adjacent entities, `upper` currently
/// ahead: `n (F_upper / F_lower)^(1 / (alpha_lower - alpha_upper))`, in log10.
/// Returns `None` when the growth rates are equal.
pub fn crossing_iteration(ln_upper: f64, ln_lower: f64, alpha_upper: f64, alpha_lower: f64, n: u64) -> Option<f64> {
    let gap = alpha_lower - alpha_upper;
    if gap == 0.0 || !gap.is_finite() {
        return None;
    }
    let ln_ci = (n as f64).ln() + (ln_upper - ln_lower) / gap;
    Some(ln_ci / std::f64::consts::LN_10)
}

/// Crossing estimates between adjacent ranks at iteration `n`, from log
/// values at `n` and `n - delta`. Entries that are NaN in either slice
/// (collapsed entities) are skipped.
pub fn crossing_estimates(ln_now: &[f64], ln_before: &[f64], n: u64, delta: u64) -> CrossingEstimates {
    let mut live: Vec<usize> = (0..ln_now.len())
        .filter(|&i| ln_now[i].is_finite() && ln_before[i].is_finite())
        .collect();
    live.sort_by(|&a, &b| ln_now[b].total_cmp(&ln_now[a]).then(a.cmp(&b)));
    let alpha = |i: usize| estimate_alpha(ln_now[i], ln_before[i], n, delta);
    let log10_n = (n as f64).log10();

    let pairs: Vec<CrossingEstimate> = live
        .windows(2)
        .map(|w| {
            let (upper, lower) = (w[0], w[1]);
            let (alpha_upper, alpha_lower) = (alpha(upper), alpha(lower));
            let log10_iteration = crossing_iteration(ln_now[upper], ln_now[lower], alpha_upper, alpha_lower, n);
            let valid = log10_iteration.is_some_and(|ci| ci > log10_n);
            CrossingEstimate {
                upper,
                lower,
                alpha_upper,
                alpha_lower,
                log10_iteration,
                valid,
            }
        })
        .collect();

    let mci = pairs
        .iter()
        .filter(|p| p.valid)
        .map(|p| MinimumCrossing {
            log10_iteration: p.log10_iteration.expect("valid pairs carry an estimate"),
            upper: p.upper,
            lower: p.lower,
        })
        .min_by(|a, b| a.log10_iteration.total_cmp(&b.log10_iteration));

    CrossingEstimates {
        iteration: n,
        pairs,
        mci,
    }
}

/// Classifies every row (and every column, when recorded) of a trajectory.
pub fn classify_decay(traj: &Trajectory, params: &DecayParams) -> DecayReport {
    let rows = (0..traj.ln_fitness.first().map_or(0, Vec::len))
        .map(|r| {
            let series: Vec<(u64, f64)> = traj.fitness_series(r).collect();
            classify_series(&series, traj.row_collapsed_at.get(r).copied().flatten(), params)
        })
        .collect();
    let cols = (0..traj.ln_complexity.first().map_or(0, Vec::len))
        .map(|c| {
            let series: Vec<(u64, f64)> = traj.complexity_series(c).collect();
            classify_series(&series, traj.col_collapsed_at.get(c).copied().flatten(), params)
        })
        .collect();
    DecayReport { rows, cols }
}

/// Latest sample at or before iteration `n`.
fn sample_at(series: &[(u64, f64)], n: u64) -> (u64, f64) {
    let i = series.partition_point(|&(k, _)| k <= n);
    series[i.saturating_sub(1)]
}

/// Classifies one `(n, ln value)` series. `collapsed_at` marks where the
/// values stop being live.
pub fn classify_series(series: &[(u64, f64)], collapsed_at: Option<u64>, params: &DecayParams) -> EntityDecay {
    let undetermined = EntityDecay {
        class: DecayClass::Undetermined,
        diagnostics: None,
    };
    let Some(&(_, first)) = series.first() else {
        return undetermined;
    };
    let live: Vec<(u64, f64)> = series
        .iter()
        .copied()
        .take_while(|&(n, _)| collapsed_at.is_none_or(|c| n < c))
        .collect();

    if collapsed_at.is_none() && live.iter().all(|&(_, v)| (v - first).abs() <= 1e-14) {
        return EntityDecay {
            class: DecayClass::Stationary,
            diagnostics: None,
        };
    }

    let Some(&(last, ln_last)) = live.last() else {
        return undetermined;
    };
    let reached = collapsed_at.unwrap_or(last);
    if reached < params.classify_at || last / 2 < params.window || last < 4 {
        return undetermined;
    }

    let (n0, v0) = sample_at(&live, last / 4);
    let (n1, v1) = sample_at(&live, last / 2);
    let (n2, v2) = (last, ln_last);
    if !(n0 < n1 && n1 < n2) || n0 == 0 {
        return undetermined;
    }
    let ll = |a: (u64, f64), b: (u64, f64)| (b.1 - a.1) / ((b.0 as f64).ln() - (a.0 as f64).ln());
    let lin = |a: (u64, f64), b: (u64, f64)| (b.1 - a.1) / (b.0 - a.0) as f64;
    let loglog_slopes = [ll((n0, v0), (n1, v1)), ll((n1, v1), (n2, v2))];
    let linear_slopes = [lin((n0, v0), (n1, v1)), lin((n1, v1), (n2, v2))];

    let prev = live.len().checked_sub(2).map(|i| live[i]);
    let final_relative_change = match prev {
        Some((np, vp)) if np + 1 == last => (ln_last - vp).exp_m1().abs(),
        // Sparse sampling: scale the last gap back to one iteration.
        Some((np, vp)) => ((ln_last - vp) / (last - np) as f64).exp_m1().abs(),
        None => f64::INFINITY,
    };
    let diagnostics = SlopeDiagnostics {
        last_live: last,
        collapsed_at,
        loglog_slopes,
        linear_slopes,
        final_relative_change,
    };

    let stable = |pair: [f64; 2]| (pair[1] - pair[0]).abs() <= params.slope_tol * pair[1].abs();
    let [early, late] = loglog_slopes;
    let class = if collapsed_at.is_none()
        && (final_relative_change < params.conv_tol
            || (late.abs() < params.converge_slope && late.abs() <= 0.75 * early.abs()))
    {
        DecayClass::Converged { limit: ln_last.exp() }
    } else if late < 0.0 && stable(loglog_slopes) {
        DecayClass::PowerLaw { alpha: late }
    } else if linear_slopes[1] < 0.0 && stable(linear_slopes) {
        DecayClass::Exponential {
            rate: linear_slopes[1],
        }
    } else {
        DecayClass::Undetermined
    };
    EntityDecay {
        class,
        diagnostics: Some(diagnostics),
    }
}

/// Crossing estimates at the last sample of `traj`, which must also hold
/// iteration `n - delta`.
pub fn min_crossing_iteration(traj: &Trajectory, axis: RankAxis, delta: u64) -> Option<CrossingEstimates> {
    let n = *traj.iterations.last()?;
    if n <= delta {
        return None;
    }
    let now = traj.len() - 1;
    let before = traj.position(n - delta)?;
    let (values, collapsed) = match axis {
        RankAxis::Countries => (&traj.ln_fitness, &traj.row_collapsed_at),
        RankAxis::Products => (&traj.ln_complexity, &traj.col_collapsed_at),
    };
    if values.is_empty() {
        return None;
    }
    let mask = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| if collapsed.get(i).copied().flatten().is_some() { f64::NAN } else { x })
            .collect()
    };
    Some(crossing_estimates(&mask(&values[now]), &mask(&values[before]), n, delta))
}

/// Number of adjacent-rank inversions between consecutive samples, keyed by
/// the later sample's iteration. The ranking is carried from sample to
/// sample, so a tie keeps the previous order and a crossing that passes
/// through an exact tie is counted once, when the order strictly flips.
pub fn count_rank_crossings(traj: &Trajectory, axis: RankAxis) -> Vec<(u64, usize)> {
    let values = match axis {
        RankAxis::Countries => &traj.ln_fitness,
        RankAxis::Products => &traj.ln_complexity,
    };
    let Some(first) = values.first() else {
        return Vec::new();
    };
    let mut order: Vec<usize> = (0..first.len()).collect();
    order.sort_by(|&a, &b| first[b].total_cmp(&first[a]));
    values
        .iter()
        .zip(&traj.iterations)
        .skip(1)
        .map(|(after, &n)| {
            let count = order.windows(2).filter(|p| after[p[1]] > after[p[0]]).count();
            order.sort_by(|&a, &b| after[b].total_cmp(&after[a]));
            (n, count)
        })
        .collect()
}

/// Stopping rule firing once the minimum crossing iteration exceeds
/// `threshold` (or no crossing is predicted), not before `classify_at`.
pub fn mci_stopping_rule(threshold: f64, axis: RankAxis, params: &DecayParams) -> StoppingRule {
    StoppingRule::Mci(MciRule {
        threshold,
        axis,
        delta: params.delta,
        min_iterations: params.classify_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(series: &[fn(f64) -> f64], n_max: u64) -> Trajectory {
        let iterations: Vec<u64> = (1..=n_max).collect();
        Trajectory {
            ln_fitness: iterations.iter().map(|&n| series.iter().map(|f| f(n as f64).ln()).collect()).collect(),
            row_collapsed_at: vec![None; series.len()],
            iterations,
            ..Trajectory::default()
        }
    }

    #[test]
    fn alpha_of_exact_power_law() {
        let ln = |n: f64| -1.5 * n.ln();
        assert!((estimate_alpha(ln(100.0), ln(98.0), 100, 2) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn crossing_of_two_power_laws() {
        // 2/n and n^-1/2 meet at n = 4.
        let ln_lower = (2f64).powf(-0.5).ln();
        let ci_exact = crossing_iteration(0.0, ln_lower, -1.0, -0.5, 2).unwrap();
        assert!((10f64.powf(ci_exact) - 4.0).abs() < 1e-12);
        assert_eq!(crossing_iteration(0.0, -1.0, -1.0, -1.0, 10), None);
    }

    #[test]
    fn estimates_validity_follows_the_formula() {
        let traj = synthetic(&[|n| 2.0 / n, |n| n.powf(-0.5)], 3);
        let est = min_crossing_iteration(&traj, RankAxis::Countries, 2).unwrap();
        assert_eq!(est.pairs.len(), 1);
        assert!(est.pairs[0].valid);
        assert!((est.mci.unwrap().iteration() - 4.0).abs() < 1e-9);

        // Upper decays slower: no future crossing.
        let traj = synthetic(&[|n| n.powf(-0.5), |n| 0.5 / n], 50);
        let est = min_crossing_iteration(&traj, RankAxis::Countries, 2).unwrap();
        assert!(!est.pairs[0].valid);
        assert!(est.mci.is_none());
    }

    #[test]
    fn collapsed_entries_are_skipped() {
        let est = crossing_estimates(&[0.0, f64::NAN, -1.0], &[0.1, -0.5, -0.8], 10, 2);
        assert_eq!(est.pairs.len(), 1);
        assert_eq!((est.pairs[0].upper, est.pairs[0].lower), (0, 2));
    }

    #[test]
    fn crossing_counted_once_through_a_tie() {
        let traj = synthetic(&[|n| 2.0 / n, |n| n.powf(-0.5)], 10);
        let counts = count_rank_crossings(&traj, RankAxis::Countries);
        let total: usize = counts.iter().map(|c| c.1).sum();
        assert_eq!(total, 1);
        assert_eq!(counts.iter().find(|c| c.1 == 1).unwrap().0, 5);
    }

    #[test]
    fn classifies_synthetic_shapes() {
        let p = DecayParams::default();
        let traj = synthetic(
            &[|_| 2.0, |n| 3.0 * n.powf(-2.0), |n| (-0.3 * n).exp(), |n| 1.0 + 1.0 / (n * n)],
            1000,
        );
        let rep = classify_decay(&traj, &p);
        assert!(matches!(rep.rows[0].class, DecayClass::Stationary));
        match rep.rows[1].class {
            DecayClass::PowerLaw { alpha } => assert!((alpha + 2.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        match rep.rows[2].class {
            DecayClass::Exponential { rate } => assert!((rate + 0.3).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert!(matches!(rep.rows[3].class, DecayClass::Converged { .. }));
    }

    #[test]
    fn short_series_are_undetermined() {
        let traj = synthetic(&[|n| 1.0 / n], 50);
        assert!(matches!(classify_decay(&traj, &DecayParams::default()).rows[0].class, DecayClass::Undetermined));
    }

    #[test]
    fn collapse_truncates_the_series() {
        let series: Vec<(u64, f64)> = (1..=2000).map(|n| (n, (-0.5 * n as f64).max(-644.0))).collect();
        let d = classify_series(&series, Some(1289), &DecayParams::default());
        assert!(matches!(d.class, DecayClass::Exponential { .. }), "{:?}", d.class);
        assert_eq!(d.diagnostics.unwrap().last_live, 1288);
    }
}
