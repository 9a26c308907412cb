use std::fmt::Write as _;

use crate::dictionary::{Dictionary, ScoreCounter};
use crate::error::{Error, Result};
use crate::linalg::axpy;

/// Sparse representation over an `m`-atom dictionary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseCode {
    pub m: usize,
    /// Accumulated coefficient per atom, in order of first selection.
    pub entries: Vec<(usize, f32)>,
    /// Every pursuit step as (atom, step coefficient), repeats included.
    pub history: Vec<(usize, f32)>,
    /// Inner products spent producing the code.
    pub cost: ScoreCounter,
}

impl SparseCode {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            ..Self::default()
        }
    }

    pub fn ip_count(&self) -> u64 {
        self.cost.inner_products()
    }

    /// Adds `coef` to atom `index`, appending it if it is new.
    pub fn accumulate(&mut self, index: usize, coef: f32) {
        match self.entries.iter_mut().find(|(i, _)| *i == index) {
            Some(e) => e.1 += coef,
            None => self.entries.push((index, coef)),
        }
    }

    pub fn coefficient(&self, index: usize) -> f32 {
        self.entries
            .iter()
            .find(|(i, _)| *i == index)
            .map_or(0.0, |e| e.1)
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// One `index coefficient` line per entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, c) in &self.entries {
            writeln!(s, "{i} {c}").unwrap();
        }
        s
    }
}

/// Parses the line format written by [`SparseCode::to_text`].
pub fn parse_code_text(text: &str, m: usize) -> Result<SparseCode> {
    let mut code = SparseCode::new(m);
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let bad = || Error::invalid(format!("line {}: expected `index coefficient`", ln + 1));
        let index: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let coef: f32 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        if index >= m {
            return Err(Error::invalid(format!(
                "line {}: atom {index} out of range",
                ln + 1
            )));
        }
        code.accumulate(index, coef);
    }
    Ok(code)
}

/// `sum_i coefficient_i * atom_i`.
pub fn reconstruct(d: &Dictionary, code: &SparseCode) -> Result<Vec<f32>> {
    let mut out = vec![0.0f32; d.dim()];
    for &(i, c) in &code.entries {
        if i >= d.len() {
            return Err(Error::invalid(format!(
                "code references atom {i} of a {}-atom dictionary",
                d.len()
            )));
        }
        axpy(c, d.atom(i), &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::random_dictionary;

    #[test]
    fn reconstruct_basics() {
        let d = random_dictionary(5, 8, 1);
        assert_eq!(reconstruct(&d, &SparseCode::new(8)).unwrap(), vec![0.0; 5]);
        let mut code = SparseCode::new(8);
        code.accumulate(3, 1.0);
        assert_eq!(reconstruct(&d, &code).unwrap(), d.atom(3));
        code.accumulate(8, 1.0);
        assert!(reconstruct(&d, &code).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut code = SparseCode::new(10);
        code.accumulate(4, -0.125);
        code.accumulate(9, 3.3);
        code.accumulate(4, 1.0);
        let parsed = parse_code_text(&code.to_text(), 10).unwrap();
        assert_eq!(parsed.entries, code.entries);
        assert!(parse_code_text("11 1.0", 10).is_err());
        assert!(parse_code_text("1", 10).is_err());
    }
}
