//! Ordered-matrix geometry: the external area, the diagonal, the belly test
//! and the bottom-up removal that locates the crossing country.
//!
//! Orientation: row 0 is the most fit country, the last column the most
//! complex product. The external area is the 4-connected zero region holding
//! the bottom-right corner; the diagonal runs from the bottom-left corner
//! point to the top-right corner point.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::engine::{iterate, EngineParams, IterationState, StoppingRule};
use crate::error::{Error, Result};
use crate::matrix::BipartiteMatrix;

/// `(row rank from the top, column rank from the left)`, zero-based.
pub type Cell = (usize, usize);

/// `M` with rows by descending fitness and columns by ascending complexity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct OrderedMatrix {
    /// The permuted matrix.
    pub matrix: BipartiteMatrix,
    /// `row_perm[rank]` is the original row index.
    pub row_perm: Vec<usize>,
    /// `col_perm[rank]` is the original column index.
    pub col_perm: Vec<usize>,
    /// Fitness in ordered position.
    pub fitness: Vec<f64>,
    /// Complexity in ordered position.
    pub complexity: Vec<f64>,
    /// Iteration of the state used for ordering.
    pub iteration: u64,
}

/// Orders `m` by the ranking held in `state` (see
/// [`IterationState::row_ranking`]; ties fall back to the original index).
pub fn order_matrix(m: &BipartiteMatrix, state: &IterationState) -> Result<OrderedMatrix> {
    if state.fitness.len() != m.n_rows() || state.complexity.len() != m.n_cols() {
        return Err(Error::ShapeMismatch("state does not match matrix".into()));
    }
    let row_perm = state.row_ranking();
    let mut col_perm = state.col_ranking();
    col_perm.reverse();
    // Reversal flips index order inside ties; restore ascending index there.
    let mut start = 0;
    while start < col_perm.len() {
        let key = |c: usize| (state.col_collapse[c].map(|x| (x.iteration, x.ln_value.to_bits())), state.complexity[c].to_bits());
        let mut end = start + 1;
        while end < col_perm.len() && key(col_perm[end]) == key(col_perm[start]) {
            end += 1;
        }
        col_perm[start..end].sort_unstable();
        start = end;
    }
    Ok(OrderedMatrix {
        matrix: m.submatrix(&row_perm, &col_perm)?,
        fitness: row_perm.iter().map(|&r| state.fitness[r]).collect(),
        complexity: col_perm.iter().map(|&c| state.complexity[c]).collect(),
        row_perm,
        col_perm,
        iteration: state.iteration,
    })
}

/// Zero cells 4-connected to the bottom-right corner, sorted. Empty when that
/// corner holds a one.
pub fn external_area(om: &OrderedMatrix) -> Vec<Cell> {
    zero_component(&om.matrix, (om.matrix.n_rows() - 1, om.matrix.n_cols() - 1))
}

fn zero_component(m: &BipartiteMatrix, seed: Cell) -> Vec<Cell> {
    let (rows, cols) = (m.n_rows(), m.n_cols());
    if m.get(seed.0, seed.1) {
        return Vec::new();
    }
    let mut seen = vec![false; rows * cols];
    let mut queue = VecDeque::from([seed]);
    seen[seed.0 * cols + seed.1] = true;
    let mut out = Vec::new();
    while let Some((r, c)) = queue.pop_front() {
        out.push((r, c));
        let neighbours = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for (nr, nc) in neighbours {
            if nr < rows && nc < cols && !seen[nr * cols + nc] && !m.get(nr, nc) {
                seen[nr * cols + nc] = true;
                queue.push_back((nr, nc));
            }
        }
    }
    out.sort_unstable();
    out
}

/// How the diagonal meets a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    /// The segment passes through the cell's interior.
    Interior,
    /// The segment only touches one corner point of the cell.
    Corner,
}

/// Contact between cell `(i, j)` and the segment from `(x=0, y=rows)` to
/// `(x=cols, y=0)`, with `y` growing downwards. Along the segment
/// `cols*y + rows*x = rows*cols`; the closed cell spans
/// `[cols*i + rows*j, cols*(i+1) + rows*(j+1)]` of that linear form.
fn contact(rows: usize, cols: usize, i: usize, j: usize) -> Option<Contact> {
    let target = rows * cols;
    let lo = cols * i + rows * j;
    let hi = cols * (i + 1) + rows * (j + 1);
    if lo < target && target < hi {
        Some(Contact::Interior)
    } else if lo == target || hi == target {
        Some(Contact::Corner)
    } else {
        None
    }
}

/// Cells met by the corner-to-corner diagonal of a `rows x cols` grid,
/// including cells it only touches at a corner point, sorted.
pub fn diagonal_cells(rows: usize, cols: usize) -> Vec<Cell> {
    diagonal_contacts(rows, cols).into_iter().map(|(c, _)| c).collect()
}

/// Cells whose interior the diagonal crosses, sorted.
pub fn diagonal_interior_cells(rows: usize, cols: usize) -> Vec<Cell> {
    diagonal_contacts(rows, cols)
        .into_iter()
        .filter(|(_, k)| *k == Contact::Interior)
        .map(|(c, _)| c)
        .collect()
}

pub fn diagonal_contacts(rows: usize, cols: usize) -> Vec<(Cell, Contact)> {
    let mut out = Vec::new();
    for i in 0..rows {
        // Only a handful of columns per row can touch; scan the narrow band.
        let centre = cols * (rows - i) / rows;
        let from = centre.saturating_sub(cols / rows + 2);
        let to = (centre + cols / rows + 2).min(cols);
        for j in from..to {
            if let Some(k) = contact(rows, cols, i, j) {
                out.push(((i, j), k));
            }
        }
    }
    out.sort_unstable_by_key(|&(c, _)| c);
    out
}

/// Outcome of intersecting the diagonal with the external area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct BellyReport {
    pub external_cells: Vec<Cell>,
    pub diagonal_cells: Vec<Cell>,
    /// The diagonal meets the external area (inward belly).
    pub crossing: bool,
    /// Row ranks where it does, bottom-up.
    pub crossing_rows: Vec<usize>,
    /// Crossing happens only at corner points: the borderline case.
    pub grazing: bool,
}

/// Does the diagonal meet the external area?
pub fn belly_test(om: &OrderedMatrix) -> BellyReport {
    let (rows, cols) = (om.matrix.n_rows(), om.matrix.n_cols());
    let external_cells = external_area(om);
    let mut is_external = vec![false; rows * cols];
    for &(r, c) in &external_cells {
        is_external[r * cols + c] = true;
    }
    let contacts = diagonal_contacts(rows, cols);
    let hits: Vec<(Cell, Contact)> = contacts
        .iter()
        .copied()
        .filter(|&((r, c), _)| is_external[r * cols + c])
        .collect();
    let mut crossing_rows: Vec<usize> = hits.iter().map(|&((r, _), _)| r).collect();
    crossing_rows.sort_unstable_by(|a, b| b.cmp(a));
    crossing_rows.dedup();
    BellyReport {
        crossing: !hits.is_empty(),
        grazing: !hits.is_empty() && hits.iter().all(|&(_, k)| k == Contact::Corner),
        crossing_rows,
        diagonal_cells: contacts.into_iter().map(|(c, _)| c).collect(),
        external_cells,
    }
}

/// One round of the removal process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct RemovalStep {
    /// Bottom-ranked country removed this round (original index).
    pub country: usize,
    /// Its products, removed with it.
    pub products: Vec<usize>,
    /// Countries left without products, removed too.
    pub emptied: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct RemovalResult {
    /// Lowest-fitness surviving country (original index); `None` when the
    /// reduction exhausted the matrix.
    pub crossing_country: Option<usize>,
    pub crossing_label: Option<String>,
    pub steps: Vec<RemovalStep>,
    /// Surviving rows and columns (original indices) in their final order.
    pub surviving_rows: Vec<usize>,
    pub surviving_cols: Vec<usize>,
    /// Final ordered submatrix; `None` when nothing survives.
    pub reduced: Option<OrderedMatrix>,
    /// The reduction ended at a single country.
    pub degenerate: bool,
}

impl RemovalResult {
    pub fn removed_countries(&self) -> Vec<usize> {
        self.steps
            .iter()
            .flat_map(|s| std::iter::once(s.country).chain(s.emptied.iter().copied()))
            .collect()
    }

    pub fn removed_products(&self) -> Vec<usize> {
        self.steps.iter().flat_map(|s| s.products.iter().copied()).collect()
    }
}

/// Runs the dynamics, orders, tests the belly, and while the diagonal meets
/// the external area removes the bottom country together with every product
/// it exports (and any country left empty), then starts over on the reduced
/// matrix.
pub fn find_crossing_country(m: &BipartiteMatrix, params: &EngineParams, stop: StoppingRule) -> Result<RemovalResult> {
    let mut rows: Vec<usize> = (0..m.n_rows()).collect();
    let mut cols: Vec<usize> = (0..m.n_cols()).collect();
    let mut steps = Vec::new();

    loop {
        let sub = m.submatrix(&rows, &cols)?;
        let outcome = iterate(&sub, IterationState::uniform(&sub)?, params, stop)?;
        let om = order_matrix(&sub, &outcome.state)?;
        let report = belly_test(&om);
        let surviving_rows: Vec<usize> = om.row_perm.iter().map(|&r| rows[r]).collect();
        let surviving_cols: Vec<usize> = om.col_perm.iter().map(|&c| cols[c]).collect();

        if !report.crossing || rows.len() == 1 {
            let bottom = *surviving_rows.last().expect("non-empty");
            return Ok(RemovalResult {
                crossing_country: Some(bottom),
                crossing_label: Some(m.row_labels()[bottom].clone()),
                steps,
                degenerate: surviving_rows.len() == 1,
                surviving_rows,
                surviving_cols,
                reduced: Some(om),
            });
        }

        let bottom_local = *om.row_perm.last().expect("non-empty");
        let country = rows[bottom_local];
        let dropped_cols: Vec<usize> = (0..cols.len()).filter(|&c| sub.get(bottom_local, c)).collect();
        let products: Vec<usize> = dropped_cols.iter().map(|&c| cols[c]).collect();

        let keep_cols: Vec<usize> = (0..cols.len()).filter(|c| !dropped_cols.contains(c)).collect();
        let mut emptied = Vec::new();
        let mut keep_rows = Vec::new();
        for r in (0..rows.len()).filter(|&r| r != bottom_local) {
            if keep_cols.iter().any(|&c| sub.get(r, c)) {
                keep_rows.push(rows[r]);
            } else {
                emptied.push(rows[r]);
            }
        }
        // Emptied rows are logged bottom-up by the current ranking.
        emptied.sort_by_key(|r| std::cmp::Reverse(surviving_rows.iter().position(|x| x == r)));
        steps.push(RemovalStep {
            country,
            products,
            emptied,
        });

        cols = keep_cols.iter().map(|&c| cols[c]).collect();
        rows = keep_rows;
        if rows.is_empty() || cols.is_empty() {
            return Ok(RemovalResult {
                crossing_country: None,
                crossing_label: None,
                steps,
                surviving_rows: Vec::new(),
                surviving_cols: Vec::new(),
                reduced: None,
                degenerate: true,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::named;

    fn ordered(name: &str) -> OrderedMatrix {
        let m = named(name).unwrap();
        let out = iterate(
            &m,
            IterationState::uniform(&m).unwrap(),
            &EngineParams::default(),
            StoppingRule::Iterations { count: 1000 },
        )
        .unwrap();
        order_matrix(&m, &out.state).unwrap()
    }

    #[test]
    fn diagonal_of_rectangle() {
        assert_eq!(diagonal_cells(2, 3), vec![(0, 1), (0, 2), (1, 0), (1, 1)]);
        assert_eq!(diagonal_cells(1, 4), vec![(0, 0), (0, 1), (0, 2), (0, 3)]);
        assert_eq!(diagonal_cells(3, 1), vec![(0, 0), (1, 0), (2, 0)]);
    }

    #[test]
    fn square_diagonal_interior_and_corners() {
        let interior = diagonal_interior_cells(5, 5);
        assert_eq!(interior, (0..5).map(|i| (i, 4 - i)).collect::<Vec<_>>());
        let all = diagonal_cells(5, 5);
        assert_eq!(all.len(), 13);
        assert!(all.contains(&(4, 1)) && all.contains(&(0, 3)));
    }

    #[test]
    fn external_area_of_c_and_b() {
        // C: the zero triangle below the staircase.
        let om = ordered("C");
        assert_eq!(om.row_perm, vec![0, 1, 2, 3, 4]);
        let ext = external_area(&om);
        assert_eq!(ext, vec![(2, 4), (3, 3), (3, 4), (4, 2), (4, 3), (4, 4)]);

        let om = ordered("B");
        let ext = external_area(&om);
        assert_eq!(ext.len(), 13);
        assert!(ext.iter().all(|&(r, c)| !om.matrix.get(r, c)));
        assert_eq!(ext.iter().map(|c| c.0).min(), Some(1));
    }

    #[test]
    fn full_matrix_has_no_external_area() {
        let m = BipartiteMatrix::from_pattern("111 111").unwrap();
        let om = order_matrix(&m, &IterationState::uniform(&m).unwrap()).unwrap();
        assert!(external_area(&om).is_empty());
        assert!(!belly_test(&om).crossing);
    }

    #[test]
    fn belly_verdicts() {
        assert!(!belly_test(&ordered("C")).crossing);
        let b = belly_test(&ordered("B"));
        assert!(b.crossing && !b.grazing);
        let d = belly_test(&ordered("D"));
        assert!(d.crossing && d.grazing);
        assert_eq!(d.crossing_rows, vec![1]);
    }

    #[test]
    fn ties_keep_index_order() {
        let m = BipartiteMatrix::from_pattern("11 11").unwrap();
        let om = order_matrix(&m, &IterationState::uniform(&m).unwrap()).unwrap();
        assert_eq!(om.row_perm, vec![0, 1]);
        assert_eq!(om.col_perm, vec![0, 1]);
    }

    fn removal(name: &str) -> RemovalResult {
        find_crossing_country(
            &named(name).unwrap(),
            &EngineParams::default(),
            StoppingRule::Iterations { count: 1000 },
        )
        .unwrap()
    }

    #[test]
    fn removal_verdicts() {
        let a = removal("A");
        assert_eq!(a.crossing_country, Some(0));
        assert!(a.degenerate);

        let b = removal("B");
        assert_eq!(b.crossing_country, Some(0));
        assert_eq!(b.surviving_cols, vec![3, 4]);

        for name in ["C", "E"] {
            let r = removal(name);
            assert!(r.steps.is_empty(), "{name}");
            assert_eq!(r.crossing_country, Some(named(name).unwrap().n_rows() - 1));
        }

        let d = removal("D");
        assert_eq!(d.crossing_country, Some(0));
        assert_eq!(d.surviving_cols, vec![4]);

        for name in ["F", "G"] {
            let r = removal(name);
            assert_eq!(r.crossing_country, Some(1), "{name}");
            assert!(!r.degenerate, "{name}");
        }
    }
}
