//! Uniform 1-D grids and second-order central-difference stencils.
//!
//! A [`Grid`] covers `[0, L]` with `n_nodes` collocation nodes and pads each
//! side with `ghost` extra nodes at the same spacing, so a stencil centred on
//! a boundary node still sees samples on both sides.
//!
//! Stencil results are [`StencilOutput`]s: a dense vector plus the index of
//! the first node it covers. Nodes too close to the edge of the sampled range
//! have no value at all instead of a sentinel.

use crate::{Error, Result};

/// Minimum number of collocation nodes; the fourth-derivative stencil needs five.
pub const MIN_NODES: usize = 5;

/// Uniform grid over `[-ghost*h, L + ghost*h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    length: f64,
    n_nodes: usize,
    ghost: usize,
    spacing: f64,
    nodes: Vec<f64>,
}

/// Builds a grid with `n_nodes` nodes on `[0, length]` and `ghost` extra nodes per side.
pub fn make_grid(length: f64, n_nodes: usize, ghost: usize) -> Result<Grid> {
    Grid::new(length, n_nodes, ghost)
}

impl Grid {
    pub fn new(length: f64, n_nodes: usize, ghost: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if n_nodes < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes, got {n_nodes}"
            )));
        }
        let intervals = (n_nodes - 1) as f64;
        // Scale the integer offset before multiplying so the last interior node is exactly L.
        let nodes = (0..n_nodes + 2 * ghost)
            .map(|i| length * ((i as f64 - ghost as f64) / intervals))
            .collect();
        Ok(Self {
            length,
            n_nodes,
            ghost,
            spacing: length / intervals,
            nodes,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of nodes inside `[0, L]`.
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn ghost(&self) -> usize {
        self.ghost
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// All node coordinates, ghosts included.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the node at `x = 0`.
    pub fn left(&self) -> usize {
        self.ghost
    }

    /// Index of the node at `x = L`.
    pub fn right(&self) -> usize {
        self.ghost + self.n_nodes - 1
    }

    pub fn interior_range(&self) -> std::ops::Range<usize> {
        self.left()..self.right() + 1
    }

    pub fn interior(&self) -> &[f64] {
        &self.nodes[self.interior_range()]
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> SampledField<'_> {
        SampledField {
            grid: self,
            values: self.nodes.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// Function values at every node of a grid, ghosts included.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField<'g> {
    grid: &'g Grid,
    values: Vec<f64>,
}

impl<'g> SampledField<'g> {
    pub fn new(grid: &'g Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: grid.nodes.len(),
                actual: values.len(),
            });
        }
        debug_assert!(values.iter().all(|v| v.is_finite()), "non-finite field sample");
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &'g Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// A central-difference derivative operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stencil {
    /// `(F(x+h) - F(x-h)) / 2h`
    First,
    /// `(F(x+h) - 2F(x) + F(x-h)) / h^2`
    Second,
    /// `(F(x+2h) - 4F(x+h) + 6F(x) - 4F(x-h) + F(x-2h)) / h^4`
    Fourth,
}

impl Stencil {
    /// Number of neighbours needed on each side.
    pub fn reach(self) -> usize {
        match self {
            Stencil::First | Stencil::Second => 1,
            Stencil::Fourth => 2,
        }
    }

    /// Unscaled `(offset, weight)` pairs.
    pub fn weights(self) -> &'static [(isize, f64)] {
        match self {
            Stencil::First => &[(-1, -1.0), (1, 1.0)],
            Stencil::Second => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
            Stencil::Fourth => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        }
    }

    /// Denominator of the stencil at spacing `h`.
    pub fn denominator(self, h: f64) -> f64 {
        match self {
            Stencil::First => 2.0 * h,
            Stencil::Second => h * h,
            Stencil::Fourth => h * h * h * h,
        }
    }

    /// `(offset, coefficient)` pairs with the denominator folded in.
    pub fn coefficients(self, h: f64) -> impl Iterator<Item = (isize, f64)> {
        let d = self.denominator(h);
        self.weights().iter().map(move |&(o, w)| (o, w / d))
    }

    /// Applies the stencil centred on `center`. Returns `None` when the stencil
    /// would reach past either end of `values`.
    pub fn apply_at(self, values: &[f64], center: usize, h: f64) -> Option<f64> {
        let r = self.reach();
        if center < r || center + r >= values.len() {
            return None;
        }
        let numerator: f64 = self
            .weights()
            .iter()
            .map(|&(o, w)| w * values[(center as isize + o) as usize])
            .sum();
        Some(numerator / self.denominator(h))
    }

    /// Applies the stencil on every node where it fits.
    pub fn apply(self, field: &SampledField<'_>) -> Result<StencilOutput> {
        let values = field.values();
        let needed = 2 * self.reach() + 1;
        if values.len() < needed {
            return Err(Error::TooFewNodes {
                needed,
                available: values.len(),
            });
        }
        let h = field.grid().spacing();
        let start = self.reach();
        let out = (start..values.len() - self.reach())
            .map(|i| self.apply_at(values, i, h).expect("index within stencil reach"))
            .collect();
        Ok(StencilOutput { start, values: out })
    }
}

/// Derivative samples covering nodes `start..start + values.len()` of the source grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilOutput {
    start: usize,
    values: Vec<f64>,
}

impl StencilOutput {
    /// Index of the first grid node with a value.
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn valid_range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Derivative at grid node `node`, if the stencil fits there.
    pub fn get(&self, node: usize) -> Option<f64> {
        node.checked_sub(self.start).and_then(|k| self.values.get(k).copied())
    }
}

pub fn d1(field: &SampledField<'_>) -> Result<StencilOutput> {
    Stencil::First.apply(field)
}

pub fn d2(field: &SampledField<'_>) -> Result<StencilOutput> {
    Stencil::Second.apply(field)
}

pub fn d4(field: &SampledField<'_>) -> Result<StencilOutput> {
    Stencil::Fourth.apply(field)
}
