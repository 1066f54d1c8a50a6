use crate::error::{Error, Result};

/// Uniform grid on `[0, 1]`: nodes `x_i = i dx` for `i = 0..=m+1` and cell
/// centres `y_j = (j + 1/2) dx` for `j = 0..=m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    m: usize,
}

impl Grid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "need at least two interior nodes",
            });
        }
        Ok(Self { m })
    }

    /// Number of interior nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of cells (shifted nodes), `m + 1`.
    pub fn cells(&self) -> usize {
        self.m + 1
    }

    /// Number of nodes including both poles, `m + 2`.
    pub fn nodes(&self) -> usize {
        self.m + 2
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.m + 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.m + 1 {
            1.0
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx()
    }

    pub fn node_iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes()).map(move |i| self.node(i))
    }

    pub fn center_iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells()).map(move |j| self.center(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        for m in [2, 7, 199, 400] {
            let g = Grid::new(m).unwrap();
            assert_eq!(g.node(0), 0.0);
            assert_eq!(g.node(m + 1), 1.0);
            for j in 0..g.cells() {
                let mid = 0.5 * (g.node(j) + g.node(j + 1));
                assert!((g.center(j) - mid).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(Grid::new(1).is_err());
    }
}
