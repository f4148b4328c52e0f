//! The two-block matrix class and its closed-form dynamics.
//!
//! Rows split into an upper group of `R2` countries and a lower group of
//! `R1`; columns into `C1` left and `C2` right products. Blocks are numbered
//! anticlockwise from the top right:
//!
//! ```text
//!            C1        C2
//!        +---------+---------+
//!   R2   | block 2 | block 1 |
//!        +---------+---------+
//!   R1   | block 3 | block 4 |   block 4 is empty
//!        +---------+---------+
//! ```
//!
//! With every fitness in a group equal, one step maps the lower-group
//! fitness `b -> b / (A1 b + A2)`, so `F2(n) = 1 / (A1 sum_{i<n} A2^i + A2^n)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BipartiteMatrix;

/// Shape and densities of a two-block matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct BlockSpec {
    /// Rows in the lower group.
    pub r1: usize,
    /// Rows in the upper group.
    pub r2: usize,
    pub c1: usize,
    pub c2: usize,
    /// Density of block 1 (top right).
    pub d1: f64,
    /// Density of block 2 (top left, the internal area).
    pub d2: f64,
    /// Density of block 3 (bottom left).
    pub d3: f64,
}

impl BlockSpec {
    pub fn unit(r1: usize, r2: usize, c1: usize, c2: usize) -> Self {
        Self {
            r1,
            r2,
            c1,
            c2,
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
        }
    }

    pub fn with_densities(mut self, d1: f64, d2: f64, d3: f64) -> Self {
        self.d1 = d1;
        self.d2 = d2;
        self.d3 = d3;
        self
    }

    pub fn is_unit_density(&self) -> bool {
        self.d1 == 1.0 && self.d2 == 1.0 && self.d3 == 1.0
    }

    pub fn n_rows(&self) -> usize {
        self.r1 + self.r2
    }

    pub fn n_cols(&self) -> usize {
        self.c1 + self.c2
    }

    pub fn validate(&self) -> Result<()> {
        if self.r1 == 0 || self.r2 == 0 || self.c1 == 0 || self.c2 == 0 {
            return Err(Error::InvalidBlockSpec(format!(
                "block sizes must be positive, got R1={} R2={} C1={} C2={}",
                self.r1, self.r2, self.c1, self.c2
            )));
        }
        for (name, d) in [("d1", self.d1), ("d2", self.d2), ("d3", self.d3)] {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidBlockSpec(format!("{name}={d} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Row index of the first lower-group country in generated matrices.
    pub fn first_lower_row(&self) -> usize {
        self.r2
    }
}

impl fmt::Display for BlockSpec {
    /// Flat key-value record, one `key=value` per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "R1={}", self.r1)?;
        writeln!(f, "R2={}", self.r2)?;
        writeln!(f, "C1={}", self.c1)?;
        writeln!(f, "C2={}", self.c2)?;
        writeln!(f, "d1={}", self.d1)?;
        writeln!(f, "d2={}", self.d2)?;
        write!(f, "d3={}", self.d3)
    }
}

/// A parsed key-value record: a [`BlockSpec`] plus an optional `gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRecord {
    pub spec: BlockSpec,
    pub gamma: Option<f64>,
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    let bad = || Error::InvalidBlockSpec(format!("{key}: cannot parse {value:?}"));
    match value.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            Ok(num / den)
        }
        None => value.trim().parse().map_err(|_| bad()),
    }
}

impl FromStr for BlockRecord {
    type Err = Error;

    /// Accepts `key=value` pairs separated by commas or newlines. Keys are
    /// `R1 R2 C1 C2 d1 d2 d3 gamma`; `d` sets all three densities.
    /// Densities may be written as fractions (`d3=1/3`).
    fn from_str(s: &str) -> Result<Self> {
        let mut sizes = [None; 4];
        let mut dens = [1.0; 3];
        let mut gamma = None;
        for item in s.split([',', '\n']).map(str::trim).filter(|t| !t.is_empty() && !t.starts_with('#')) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidBlockSpec(format!("expected key=value, got {item:?}")))?;
            let key = key.trim();
            let size = |v: &str| -> Result<usize> {
                v.trim()
                    .parse()
                    .map_err(|_| Error::InvalidBlockSpec(format!("{key}: expected a positive integer, got {v:?}")))
            };
            match key {
                "R1" => sizes[0] = Some(size(value)?),
                "R2" => sizes[1] = Some(size(value)?),
                "C1" => sizes[2] = Some(size(value)?),
                "C2" => sizes[3] = Some(size(value)?),
                "d" => dens = [parse_number(key, value)?; 3],
                "d1" => dens[0] = parse_number(key, value)?,
                "d2" => dens[1] = parse_number(key, value)?,
                "d3" => dens[2] = parse_number(key, value)?,
                "gamma" => gamma = Some(parse_number(key, value)?),
                other => return Err(Error::InvalidBlockSpec(format!("unknown key {other:?}"))),
            }
        }
        let [Some(r1), Some(r2), Some(c1), Some(c2)] = sizes else {
            return Err(Error::InvalidBlockSpec("R1, R2, C1 and C2 are all required".into()));
        };
        let spec = BlockSpec::unit(r1, r2, c1, c2).with_densities(dens[0], dens[1], dens[2]);
        spec.validate()?;
        Ok(Self { spec, gamma })
    }
}

/// Recursion coefficients of `b -> b / (A1 b + A2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct Coefficients {
    /// Absent when block 3 is empty (`d3 = 0`).
    pub a1: Option<f64>,
    pub a2: f64,
}

/// `A2 = C2 R1 / (C1 R2)`, the external-to-internal area ratio, and
/// `A1 = (R2 K + R1 (1 - A2)) / (R1 + R2)` with `K = (d2 / d3) (C1 + C2) / C1`.
///
/// With regular blocks the group ratio `x = b / a` obeys
/// `x -> x / (K x + A2)`; renormalizing to unit mean fitness gives the
/// recursion for `b`. At unit density `A1 = 1 + C2 (R2 - R1) / (C1 R2)`.
/// `A2` does not depend on the densities, and `A1` depends only on `d2 / d3`.
pub fn a_coefficients(spec: &BlockSpec) -> Coefficients {
    let (r1, r2, c1, c2) = (spec.r1 as f64, spec.r2 as f64, spec.c1 as f64, spec.c2 as f64);
    let a2 = c2 * r1 / (c1 * r2);
    let a1 = if spec.is_unit_density() {
        Some(1.0 + c2 * (r2 - r1) / (c1 * r2))
    } else if spec.d3 > 0.0 {
        let k = (spec.d2 / spec.d3) * (c1 + c2) / c1;
        Some((r2 * k + r1 * (1.0 - a2)) / (r1 + r2))
    } else {
        None
    };
    Coefficients { a1, a2 }
}

fn big(x: usize) -> BigInt {
    BigInt::from(x)
}

/// `A2` as an exact rational, `(C2 / C1) (R2 / R1)^gamma` for integer `gamma`.
pub fn a2_rational(spec: &BlockSpec, gamma: i32) -> BigRational {
    let cols = Ratio::new(big(spec.c2), big(spec.c1));
    let rows = Ratio::new(big(spec.r2), big(spec.r1));
    cols * rows.pow(gamma)
}

/// `A2` at elasticity `gamma`: `(C2 / C1) (R2 / R1)^gamma`. Equals
/// [`a_coefficients`]'s `a2` at `gamma = -1`.
pub fn a2_gamma(spec: &BlockSpec, gamma: f64) -> f64 {
    (spec.c2 as f64 / spec.c1 as f64) * (spec.r2 as f64 / spec.r1 as f64).powf(gamma)
}

/// `F2(n) = 1 / (A1 sum_{i<n} A2^i + A2^n)`, evaluated without overflow.
pub fn closed_form_f2(a1: f64, a2: f64, n: u64) -> f64 {
    ln_closed_form_f2(a1, a2, n).exp()
}

/// Natural log of [`closed_form_f2`]; stays finite long after `F2` underflows.
pub fn ln_closed_form_f2(a1: f64, a2: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let ln_a2 = (a2 - 1.0).ln_1p();
    if a2 == 1.0 {
        return -(a1 * nf).ln_1p();
    }
    if a2 < 1.0 {
        // A2^n <= 1, sum = (1 - A2^n) / (1 - A2).
        let pow = (nf * ln_a2).exp();
        let sum = -(nf * ln_a2).exp_m1() / (1.0 - a2);
        -(a1 * sum + pow).ln()
    } else {
        // Factor out A2^n: F2 = A2^-n / (A1 (1 - A2^-n) / (A2 - 1) + 1).
        let tail = -(-nf * ln_a2).exp_m1() / (a2 - 1.0);
        -nf * ln_a2 - (a1 * tail + 1.0).ln()
    }
}

/// Closed-form lower-group fitness; `None` when `d3 = 0`.
pub fn closed_form_f2_spec(spec: &BlockSpec, n: u64) -> Option<f64> {
    let Coefficients { a1, a2 } = a_coefficients(spec);
    a1.map(|a1| closed_form_f2(a1, a2, n))
}

/// Group fitnesses `(a, b)` at iteration `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct TwoBlockSolution {
    /// Fitness of each upper-group row.
    pub a: f64,
    /// Fitness of each lower-group row.
    pub b: f64,
    pub n: u64,
}

pub fn two_block_solution(spec: &BlockSpec, n: u64) -> Option<TwoBlockSolution> {
    let b = closed_form_f2_spec(spec, n)?;
    let (r1, r2) = (spec.r1 as f64, spec.r2 as f64);
    let a = (r1 + r2 - r1 * b) / r2;
    Some(TwoBlockSolution { a, b, n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `A2 > 1`: the lower group decays exponentially.
    ZeroExponential,
    /// `A2 = 1`: the lower group decays as `1 / n`.
    ZeroPowerLaw,
    /// `A2 < 1`: the lower group converges to `(1 - A2) / A1`.
    PositiveLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct RegimeReport {
    pub gamma: f64,
    pub a1: Option<f64>,
    pub a2: f64,
    pub regime: Regime,
    /// `(1 - A2) / A1` for the positive-limit regime, when `A1` is known.
    pub limit_value: Option<f64>,
    /// `1 / |A2 - 1|`; absent at `A2 = 1`.
    pub characteristic_time: Option<f64>,
    /// True when the regime was decided in exact integer arithmetic.
    pub exact: bool,
    pub warning: Option<String>,
}

/// Width of the power-law band when `gamma` is not a small rational.
pub const A2_UNIT_BAND: f64 = 1e-12;

/// `gamma = -m / q` with small `m`, `q`, when `gamma` is exactly that double.
fn small_rational(gamma: f64) -> Option<(u32, u32)> {
    let r = Ratio::<i64>::approximate_float(gamma)?;
    let (num, den) = (*r.numer(), *r.denom());
    if num >= 0 || den > 1000 || -num > 1000 || num as f64 / den as f64 != gamma {
        return None;
    }
    Some(((-num) as u32, den as u32))
}

/// Regime of the two-block recursion at elasticity `gamma < 0`.
///
/// The comparison of `A2` against one is done exactly when `gamma` is a
/// rational with numerator and denominator up to 1000, comparing
/// `C2^q R1^m` with `C1^q R2^m` for `gamma = -m/q`. Otherwise a band of
/// [`A2_UNIT_BAND`] around one maps to the power-law regime, with a warning.
pub fn classify_regime(spec: &BlockSpec, gamma: f64) -> Result<RegimeReport> {
    spec.validate()?;
    if !(gamma.is_finite() && gamma < 0.0) {
        return Err(Error::InvalidParams(format!("gamma must be negative, got {gamma}")));
    }
    let a2 = a2_gamma(spec, gamma);
    let (regime, exact, warning) = match small_rational(gamma) {
        Some((m, q)) => {
            let lhs = BigUint::from(spec.c2).pow(q) * BigUint::from(spec.r1).pow(m);
            let rhs = BigUint::from(spec.c1).pow(q) * BigUint::from(spec.r2).pow(m);
            let regime = match lhs.cmp(&rhs) {
                std::cmp::Ordering::Greater => Regime::ZeroExponential,
                std::cmp::Ordering::Equal => Regime::ZeroPowerLaw,
                std::cmp::Ordering::Less => Regime::PositiveLimit,
            };
            (regime, true, None)
        }
        None => {
            let regime = if (a2 - 1.0).abs() < A2_UNIT_BAND {
                Regime::ZeroPowerLaw
            } else if a2 > 1.0 {
                Regime::ZeroExponential
            } else {
                Regime::PositiveLimit
            };
            let warning = (regime == Regime::ZeroPowerLaw).then(|| {
                format!("gamma={gamma} is not a small rational; |A2 - 1| < {A2_UNIT_BAND:e} read as A2 = 1")
            });
            (regime, false, warning)
        }
    };
    let a1 = if gamma == -1.0 { a_coefficients(spec).a1 } else { None };
    let limit_value = match (regime, a1) {
        (Regime::PositiveLimit, Some(a1)) => Some((1.0 - a2) / a1),
        _ => None,
    };
    let characteristic_time = (regime != Regime::ZeroPowerLaw).then(|| 1.0 / (a2 - 1.0).abs());
    Ok(RegimeReport {
        gamma,
        a1,
        a2,
        regime,
        limit_value,
        characteristic_time,
        exact,
        warning,
    })
}

/// Lower-group height `R1` on the curve `A2 = 1`:
/// `R_total C2^(1/gamma) / (C1^(1/gamma) + C2^(1/gamma))`.
pub fn gamma_frontier(c1: f64, c2: f64, r_total: f64, gamma: f64) -> f64 {
    let inv = 1.0 / gamma;
    let (w1, w2) = (c1.powf(inv), c2.powf(inv));
    r_total * w2 / (w1 + w2)
}

/// Ones per row and per column of an `rows x cols` block at density `d`.
fn regular_counts(block: u8, d: f64, rows: usize, cols: usize) -> Result<(usize, usize)> {
    let per_row = d * cols as f64;
    let per_col = d * rows as f64;
    let near_int = |x: f64| (x - x.round()).abs() < 1e-9;
    if !near_int(per_row) || !near_int(per_col) {
        return Err(Error::InfeasibleDensity {
            block,
            density: d,
            rows,
            cols,
        });
    }
    Ok((per_row.round() as usize, per_col.round() as usize))
}

/// Builds the two-block matrix of `spec`: upper rows first, left columns
/// first, block 4 empty. Inside each block, row `i` holds a one in column
/// `j` iff `((j + i + seed) k) mod w < k` for `k` ones per row and width
/// `w`, which makes every row and every column of the block regular.
pub fn generate_block_matrix(spec: &BlockSpec, pattern_seed: usize) -> Result<BipartiteMatrix> {
    spec.validate()?;
    let k1 = regular_counts(1, spec.d1, spec.r2, spec.c2)?.0;
    let k2 = regular_counts(2, spec.d2, spec.r2, spec.c1)?.0;
    let k3 = regular_counts(3, spec.d3, spec.r1, spec.c1)?.0;
    let cell = |i: usize, j: usize, k: usize, w: usize| ((j + i + pattern_seed) * k) % w < k;

    let (rows, cols) = (spec.n_rows(), spec.n_cols());
    let mut cells = vec![false; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let upper = i < spec.r2;
            let left = j < spec.c1;
            cells[i * cols + j] = match (upper, left) {
                (true, true) => cell(i, j, k2, spec.c1),
                (true, false) => cell(i, j - spec.c1, k1, spec.c2),
                (false, true) => cell(i - spec.r2, j, k3, spec.c1),
                (false, false) => false,
            };
        }
    }
    BipartiteMatrix::from_cells(rows, cols, cells)
}

/// `A2 = 1` at `gamma = -1`, decided in integers: the block corner sits
/// on the diagonal.
pub fn is_diagonal(spec: &BlockSpec) -> bool {
    a2_rational(spec, -1).is_one()
}
