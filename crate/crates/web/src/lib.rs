//! JSON entry points for the browser demo. Every function takes plain
//! strings and numbers and returns a JSON document, so the page needs no
//! bindings beyond `wasm-bindgen`'s string passing.

use fitconv::blocks::{classify_regime, closed_form_f2_spec, generate_block_matrix, BlockRecord, RegimeReport};
use fitconv::decay::{classify_decay, DecayClass, DecayParams};
use fitconv::geometry::{belly_test, find_crossing_country, order_matrix, BellyReport};
use fitconv::{catalog, iterate, BipartiteMatrix, EngineParams, IterationState, StoppingRule};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Most points sent per curve.
const MAX_POINTS: usize = 400;

#[derive(Serialize)]
struct CatalogEntry {
    name: &'static str,
    about: &'static str,
    rows: usize,
    cols: usize,
}

#[derive(Serialize)]
struct Curve {
    label: String,
    /// `(iteration, log10 value)`, thinned to at most [`MAX_POINTS`].
    points: Vec<(u64, f64)>,
}

#[derive(Serialize)]
struct RegimeView {
    regime: RegimeReport,
    n_rows: usize,
    n_cols: usize,
    first_lower_row: usize,
    /// Simulated fitness of the first row of each group.
    simulated: Vec<Curve>,
    /// Closed-form lower-group fitness; only at `gamma = -1`.
    closed_form: Option<Curve>,
}

#[derive(Serialize)]
struct MatrixView {
    source: String,
    iterations: u64,
    /// Ordered matrix as `0`/`1` strings, best country first.
    cells: Vec<String>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    belly: BellyReport,
    crossing_country: Option<String>,
    /// Decay label of each country in ordered position.
    decay: Vec<DecayClass>,
    /// One log10 fitness curve per country, in original order.
    trajectories: Vec<Curve>,
}

fn thin(points: impl Iterator<Item = (u64, f64)>) -> Vec<(u64, f64)> {
    let all: Vec<(u64, f64)> = points.filter(|p| p.1.is_finite()).collect();
    let stride = all.len().div_ceil(MAX_POINTS).max(1);
    let last = all.last().copied();
    let mut out: Vec<(u64, f64)> = all.into_iter().step_by(stride).collect();
    if let (Some(l), Some(o)) = (last, out.last()) {
        if o.0 != l.0 {
            out.push(l);
        }
    }
    out
}

fn log10_curve(label: String, series: impl Iterator<Item = (u64, f64)>) -> Curve {
    Curve {
        label,
        points: thin(series.map(|(n, ln)| (n, ln / std::f64::consts::LN_10))),
    }
}

/// Named matrix, two-block record (`R1=..,R2=..`) or a raw pattern of
/// space-separated 0/1 rows.
fn parse_source(source: &str) -> fitconv::Result<BipartiteMatrix> {
    let s = source.trim();
    if let Ok(entry) = catalog::entry(s) {
        return BipartiteMatrix::from_pattern(entry.pattern);
    }
    if s.contains('=') {
        let rec: BlockRecord = s.parse()?;
        return generate_block_matrix(&rec.spec, 0);
    }
    if !s.chars().all(|c| c == '0' || c == '1' || c.is_whitespace()) {
        return Err(fitconv::Error::UnknownName(s.into()));
    }
    BipartiteMatrix::from_pattern(s)
}

fn check_iterations(iterations: u32) -> Result<u64, String> {
    match iterations {
        1..=200_000 => Ok(iterations as u64),
        _ => Err(format!("iterations must lie in 1..=200000, got {iterations}")),
    }
}

pub fn catalog_view() -> String {
    let entries: Vec<CatalogEntry> = catalog::CATALOG
        .iter()
        .map(|e| {
            let m = BipartiteMatrix::from_pattern(e.pattern).expect("catalog patterns are valid");
            CatalogEntry {
                name: e.name,
                about: e.about,
                rows: m.n_rows(),
                cols: m.n_cols(),
            }
        })
        .collect();
    serde_json::to_string(&entries).expect("serializable")
}

pub fn regime_view(record: &str, gamma: f64, iterations: u32) -> Result<String, String> {
    let n = check_iterations(iterations)?;
    let rec: BlockRecord = record.parse().map_err(|e: fitconv::Error| e.to_string())?;
    let spec = rec.spec;
    let regime = classify_regime(&spec, gamma).map_err(|e| e.to_string())?;
    let m = generate_block_matrix(&spec, 0).map_err(|e| e.to_string())?;
    let params = EngineParams::default().with_gamma(gamma).with_max_iterations(n);
    let init = IterationState::uniform(&m).map_err(|e| e.to_string())?;
    let out = iterate(&m, init, &params, StoppingRule::Iterations { count: n }).map_err(|e| e.to_string())?;
    let lower = spec.first_lower_row();
    let simulated = [(0, "upper group"), (lower, "lower group")]
        .into_iter()
        .map(|(row, label)| log10_curve(label.into(), out.trajectory.fitness_series(row)))
        .collect();
    let closed_form = (gamma == -1.0 && regime.a1.is_some()).then(|| Curve {
        label: "closed form".into(),
        points: thin((0..=n).filter_map(|k| closed_form_f2_spec(&spec, k).map(|f| (k, f.log10())))),
    });
    let view = RegimeView {
        regime,
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        first_lower_row: lower,
        simulated,
        closed_form,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

pub fn matrix_view(source: &str, iterations: u32) -> Result<String, String> {
    let n = check_iterations(iterations)?;
    let raw = parse_source(source).map_err(|e| e.to_string())?;
    let (m, _) = raw.without_empty_lines().map_err(|e| e.to_string())?;
    let params = EngineParams::default().with_max_iterations(n);
    let stop = StoppingRule::Iterations { count: n };
    let init = IterationState::uniform(&m).map_err(|e| e.to_string())?;
    let out = iterate(&m, init, &params, stop).map_err(|e| e.to_string())?;
    let om = order_matrix(&m, &out.state).map_err(|e| e.to_string())?;
    let belly = belly_test(&om);
    let removal = find_crossing_country(&m, &params, stop).map_err(|e| e.to_string())?;
    let decay = classify_decay(&out.trajectory, &DecayParams::default());

    let view = MatrixView {
        source: source.trim().into(),
        iterations: out.state.iteration,
        cells: (0..om.matrix.n_rows())
            .map(|r| om.matrix.row(r).iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect(),
        row_labels: om.matrix.row_labels().to_vec(),
        col_labels: om.matrix.col_labels().to_vec(),
        belly,
        crossing_country: removal.crossing_country.map(|i| m.row_labels()[i].clone()),
        decay: om.row_perm.iter().map(|&i| decay.rows[i].class).collect(),
        trajectories: (0..m.n_rows())
            .map(|r| log10_curve(m.row_labels()[r].clone(), out.trajectory.fitness_series(r)))
            .collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Names, descriptions and shapes of the reference matrices.
#[wasm_bindgen]
pub fn catalog_json() -> String {
    catalog_view()
}

/// Regime of a two-block record with its simulated and closed-form curves.
#[wasm_bindgen]
pub fn regime_json(record: &str, gamma: f64, iterations: u32) -> Result<String, JsValue> {
    regime_view(record, gamma, iterations).map_err(|e| JsValue::from_str(&e))
}

/// Ordered matrix, belly test, crossing country, decay labels and trajectories.
#[wasm_bindgen]
pub fn matrix_json(source: &str, iterations: u32) -> Result<String, JsValue> {
    matrix_view(source, iterations).map_err(|e| JsValue::from_str(&e))
}
