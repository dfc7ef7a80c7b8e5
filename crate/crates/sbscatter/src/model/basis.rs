use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Atomic level: `Ground` is φ₀ (energy 0), `Excited` is φ₁ (energy e1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Ground = 0,
    Excited = 1,
}

impl Level {
    pub fn flip(self) -> Self {
        match self {
            Level::Ground => Level::Excited,
            Level::Excited => Level::Ground,
        }
    }
}

/// Truncated symmetric Fock space over a radial grid, tensored with the two atomic levels.
///
/// State index = 2·(occupation index) + level, so σ₁ maps index i to i ^ 1.
/// Occupations are non-decreasing lists of mode indices.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_modes: usize,
    n_max: usize,
    occupations: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
}

fn push_multisets(n_modes: usize, len: usize, start: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    for j in start..n_modes {
        cur.push(j as u16);
        push_multisets(n_modes, len, j, cur, out);
        cur.pop();
    }
}

/// C(n + b - 1, b), the number of b-boson occupations over n modes.
pub fn multiset_count(n: usize, b: usize) -> usize {
    (0..b).fold(1usize, |acc, i| acc * (n + i) / (i + 1))
}

impl FockBasis {
    pub fn new(n_modes: usize, n_max: usize) -> Self {
        assert!(n_modes <= u16::MAX as usize, "mode index overflows u16");
        let mut occupations = Vec::new();
        for b in 0..=n_max {
            push_multisets(n_modes, b, 0, &mut Vec::with_capacity(b), &mut occupations);
        }
        let index = occupations.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        Self { n_modes, n_max, occupations, index }
    }

    pub fn expected_dim(n_modes: usize, n_max: usize) -> usize {
        2 * (0..=n_max).map(|b| multiset_count(n_modes, b)).sum::<usize>()
    }

    pub fn dim(&self) -> usize {
        2 * self.occupations.len()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn state_index(&self, level: Level, occupation: &[u16]) -> Option<usize> {
        self.index.get(occupation).map(|&o| 2 * o + level as usize)
    }

    /// φ_level ⊗ Ω.
    pub fn vacuum(&self, level: Level) -> usize {
        level as usize
    }

    pub fn level(&self, state: usize) -> Level {
        if state.is_multiple_of(2) {
            Level::Ground
        } else {
            Level::Excited
        }
    }

    pub fn occupation(&self, state: usize) -> &[u16] {
        &self.occupations[state / 2]
    }

    pub fn boson_number(&self, state: usize) -> usize {
        self.occupations[state / 2].len()
    }

    /// Every creation step: (occupation index, mode j, raised occupation index, √(n_j+1)).
    pub fn creation_steps(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut steps = Vec::new();
        let mut buf = Vec::with_capacity(self.n_max);
        for (oi, occ) in self.occupations.iter().enumerate() {
            if occ.len() >= self.n_max {
                continue;
            }
            for j in 0..self.n_modes {
                buf.clear();
                buf.extend_from_slice(occ);
                let pos = buf.partition_point(|&m| (m as usize) <= j);
                buf.insert(pos, j as u16);
                let nj = buf.iter().filter(|&&m| m as usize == j).count();
                let up = self.index[&buf];
                steps.push((oi, j, up, (nj as f64).sqrt()));
            }
        }
        steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(FockBasis::new(400, 1).dim(), 802);
        assert_eq!(FockBasis::new(60, 2).dim(), 3782);
        for (n, b) in [(5, 3), (7, 2), (3, 4)] {
            assert_eq!(FockBasis::new(n, b).dim(), FockBasis::expected_dim(n, b));
        }
    }

    #[test]
    fn vacua_and_flip() {
        let b = FockBasis::new(4, 2);
        assert_eq!(b.state_index(Level::Ground, &[]), Some(b.vacuum(Level::Ground)));
        assert_eq!(b.state_index(Level::Excited, &[]), Some(b.vacuum(Level::Excited)));
        for s in 0..b.dim() {
            assert_eq!(b.level(s ^ 1), b.level(s).flip());
            assert_eq!(b.occupation(s ^ 1), b.occupation(s));
        }
    }

    #[test]
    fn creation_factors() {
        let b = FockBasis::new(3, 2);
        let steps = b.creation_steps();
        let one = b.state_index(Level::Ground, &[1]).unwrap() / 2;
        let two = b.state_index(Level::Ground, &[1, 1]).unwrap() / 2;
        let s = steps.iter().find(|s| s.0 == one && s.1 == 1).unwrap();
        assert_eq!(s.2, two);
        assert!((s.3 - 2f64.sqrt()).abs() < 1e-15);
    }
}
