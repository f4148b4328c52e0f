//! Small reference matrices with known convergence behaviour.
//!
//! Rows are listed from the most to the least fit country, columns as the
//! matrices are conventionally drawn. Every entry carries the expected
//! long-run behaviour of each row.

use crate::error::{Error, Result};
use crate::matrix::BipartiteMatrix;

/// Expected long-run behaviour of one row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Expected {
    /// Converges to a positive value.
    Converges,
    /// Decays as `n^alpha`.
    PowerLaw(f64),
    /// Decays exponentially in `n`.
    Exponential,
    /// Never moves from its initial value.
    Stationary,
}

pub struct NamedMatrix {
    pub name: &'static str,
    pub about: &'static str,
    pub pattern: &'static str,
    pub expected: &'static [Expected],
}

use Expected::{Converges as C, Exponential as E, PowerLaw as P, Stationary as S};

pub const CATALOG: &[NamedMatrix] = &[
    NamedMatrix {
        name: "eq5",
        about: "two-block class example: densities 1/2, 1, 1/3, 0 anticlockwise from the top-right block",
        pattern: "111101010 111010101 111101010 111010101 010000000 100000000 001000000",
        expected: &[],
    },
    NamedMatrix {
        name: "blockdiag",
        about: "block-diagonal matrix: every positive initial condition is stationary",
        pattern: "000011 000011 000100 111000 111000 111000",
        expected: &[S, S, S, S, S, S],
    },
    NamedMatrix {
        name: "monopoly6",
        about: "one monopolist, one duopoly pair, three countries with common products only",
        pattern: "111101 111110 110110 011000 101000 110000",
        expected: &[C, P(-1.0), P(-1.0), P(-2.0), P(-2.0), P(-2.0)],
    },
    NamedMatrix {
        name: "common4",
        about: "staircase of common products",
        pattern: "1011 1110 1100 1000",
        expected: &[C, P(-1.0), P(-2.0), P(-3.0)],
    },
    NamedMatrix {
        name: "threeblock",
        about: "duopoly, monopoly and a connected block of three; the duopoly links to the worst block",
        pattern: "100011 000011 000100 011000 101000 110000",
        expected: &[C, C, P(-0.6), P(-1.0), P(-1.0), P(-1.0)],
    },
    NamedMatrix {
        name: "threeblock34",
        about: "threeblock with the external link moved from the duopoly to the monopoly",
        pattern: "000011 000011 100100 011000 101000 110000",
        expected: &[P(-0.75), P(-0.75), C, P(-1.0), P(-1.0), P(-1.0)],
    },
    NamedMatrix {
        name: "exp4",
        about: "two unshared monopolies: every competitor decays exponentially",
        pattern: "01011 10100 01000 10000",
        expected: &[C, E, E, E],
    },
    NamedMatrix {
        name: "A",
        about: "full staircase, borderline: power-law ladder",
        pattern: "11111 11110 11100 11000 10000",
        expected: &[C, P(-1.0), P(-2.0), P(-3.0), P(-4.0)],
    },
    NamedMatrix {
        name: "B",
        about: "inward belly: only the top country survives",
        pattern: "11111 11100 11000 10000 10000",
        expected: &[C, E, E, E, E],
    },
    NamedMatrix {
        name: "C",
        about: "outward belly: every country converges",
        pattern: "11111 11111 11110 11100 11000",
        expected: &[C, C, C, C, C],
    },
    NamedMatrix {
        name: "D",
        about: "C minus one product of country 2: crossing at a high-ranking row",
        pattern: "11111 11110 11110 11100 11000",
        expected: &[C, P(-1.0), P(-1.0), P(-1.0), P(-1.0)],
    },
    NamedMatrix {
        name: "E",
        about: "rectangular, outward belly",
        pattern: "111111 111110 111100 110000",
        expected: &[C, C, C, C],
    },
    NamedMatrix {
        name: "F",
        about: "E minus one product: the diagonal grazes the empty region",
        pattern: "111111 111110 111000 110000",
        expected: &[C, C, P(-1.0), P(-1.0)],
    },
    NamedMatrix {
        name: "G",
        about: "F minus one more product: exponential collapse below country 2",
        pattern: "111111 111110 110000 110000",
        expected: &[C, C, E, E],
    },
];

pub fn names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|e| e.name)
}

pub fn entry(name: &str) -> Result<&'static NamedMatrix> {
    CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownName(name.to_string()))
}

pub fn named(name: &str) -> Result<BipartiteMatrix> {
    BipartiteMatrix::from_pattern(entry(name)?.pattern)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses_and_labels_every_row() {
        for e in CATALOG {
            let m = named(e.name).unwrap();
            assert!(m.empty_lines().is_clean(), "{}", e.name);
            if !e.expected.is_empty() {
                assert_eq!(e.expected.len(), m.n_rows(), "{}", e.name);
            }
        }
        assert!(named("Z").is_err());
    }
}
