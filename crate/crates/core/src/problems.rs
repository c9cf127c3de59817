//! The two benchmark problems and their loss functions.
//!
//! * Axially loaded bar: `-(EA u')' = x` on `[0, L]`, with `u(0) = 0` and a
//!   traction `EA u'(L) = P` at the free end.
//! * Simply supported beam: `EI w'''' + sin(x) = 0` on `[0, L]`, with
//!   `w = w'' = 0` at both ends.
//!
//! Every loss term is the square of a linear functional of the output samples
//! `K` on the grid (a stencil or a point value, plus a constant). That makes
//! the gradient with respect to `K` a scatter of the stencil coefficients,
//! which is then pulled back through the multiplier and the network.

use std::fmt;

use crate::bc::{penalty_term, BcStrategy, Multiplier, PenaltyCoefficient, PenaltyWeights, StrategyKind};
use crate::fdm::{Grid, Stencil};
use crate::nn::{DenseNetwork, ParamGradient};
use crate::{Error, Result};

/// Axially loaded bar with distributed load `f(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarSpec {
    pub youngs_modulus: f64,
    pub area: f64,
    pub length: f64,
    /// Concentrated force at `x = L`.
    pub end_load: f64,
}

impl Default for BarSpec {
    fn default() -> Self {
        Self {
            youngs_modulus: 1.0,
            area: 1.0,
            length: 1.0,
            end_load: 0.0,
        }
    }
}

impl BarSpec {
    pub fn validate(&self) -> Result<()> {
        positive("youngs_modulus", self.youngs_modulus)?;
        positive("area", self.area)?;
        positive("length", self.length)?;
        if !self.end_load.is_finite() {
            return Err(Error::InvalidParameter {
                name: "end_load",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn axial_stiffness(&self) -> f64 {
        self.youngs_modulus * self.area
    }

    pub fn load(&self, x: f64) -> f64 {
        x
    }
}

/// Simply supported beam with distributed load `f(x) = sin(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub youngs_modulus: f64,
    pub inertia: f64,
    pub length: f64,
}

impl Default for BeamSpec {
    fn default() -> Self {
        Self {
            youngs_modulus: 1.0,
            inertia: 1.0,
            length: std::f64::consts::PI,
        }
    }
}

impl BeamSpec {
    pub fn validate(&self) -> Result<()> {
        positive("youngs_modulus", self.youngs_modulus)?;
        positive("inertia", self.inertia)?;
        positive("length", self.length)
    }

    pub fn flexural_rigidity(&self) -> f64 {
        self.youngs_modulus * self.inertia
    }

    pub fn load(&self, x: f64) -> f64 {
        x.sin()
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

fn check_domain(x: f64, length: f64) -> Result<()> {
    if (0.0..=length).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { x, length })
    }
}

/// Closed-form bar displacement `u(x) = (P x + L^2 x / 2 - x^3 / 6) / EA`.
pub fn bar_analytic(spec: &BarSpec, x: f64) -> Result<f64> {
    check_domain(x, spec.length)?;
    let l = spec.length;
    Ok((spec.end_load * x + l * l * x / 2.0 - x * x * x / 6.0) / spec.axial_stiffness())
}

/// Closed-form beam deflection `w(x) = b x + d x^3 - sin(x) / EI` with
/// `d = -sin(L) / (6 L EI)` and `b = sin(L) / (L EI) - d L^2`.
pub fn beam_analytic(spec: &BeamSpec, x: f64) -> Result<f64> {
    check_domain(x, spec.length)?;
    let (l, ei) = (spec.length, spec.flexural_rigidity());
    let d = -l.sin() / (6.0 * l * ei);
    let b = l.sin() / (l * ei) - d * l * l;
    Ok(b * x + d * x * x * x - x.sin() / ei)
}

/// One of the two benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    Bar(BarSpec),
    Beam(BeamSpec),
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Bar(_) => "bar",
            Problem::Beam(_) => "beam",
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Problem::Bar(s) => s.length,
            Problem::Beam(s) => s.length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Problem::Bar(s) => s.validate(),
            Problem::Beam(s) => s.validate(),
        }
    }

    /// Ghost nodes the residual stencil needs on each side.
    pub fn min_ghost(&self) -> usize {
        match self {
            Problem::Bar(_) => Stencil::Second.reach(),
            Problem::Beam(_) => Stencil::Fourth.reach(),
        }
    }

    pub fn analytic(&self, x: f64) -> Result<f64> {
        match self {
            Problem::Bar(s) => bar_analytic(s, x),
            Problem::Beam(s) => beam_analytic(s, x),
        }
    }

    /// Checks that `strategy` is one of the cases defined for this problem.
    pub fn check_strategy(&self, strategy: &BcStrategy) -> Result<()> {
        let ok = match (self, strategy) {
            (Problem::Bar(_), BcStrategy::Penalty(_)) => true,
            (Problem::Bar(_), BcStrategy::Reparameterization(Multiplier::BarDecay)) => true,
            (Problem::Beam(_), BcStrategy::Penalty(_)) => true,
            (Problem::Beam(s), BcStrategy::Hybrid(Multiplier::BeamSine { length }, _)) => *length == s.length,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleStrategy {
                problem: self.name(),
                strategy: strategy.kind().as_str(),
            })
        }
    }

    /// Builds the strategy a problem uses for a configured strategy name.
    pub fn strategy(&self, kind: StrategyKind, weights: PenaltyWeights) -> Result<BcStrategy> {
        let strategy = match (self, kind) {
            (_, StrategyKind::Penalty) => BcStrategy::Penalty(weights),
            (Problem::Bar(_), StrategyKind::Reparam) => BcStrategy::Reparameterization(Multiplier::BarDecay),
            (Problem::Beam(s), StrategyKind::Hybrid) => BcStrategy::Hybrid(Multiplier::beam_sine(s.length)?, weights),
            _ => {
                return Err(Error::IncompatibleStrategy {
                    problem: self.name(),
                    strategy: kind.as_str(),
                })
            }
        };
        Ok(strategy)
    }

    /// Deviation of the output samples `k` from the boundary conditions at
    /// `x = 0` and `x = L`.
    ///
    /// Bar: `|u(0)|` and `|u'(L) - P/EA|` (central stencil). Beam: `|w(0)|` and `|w(L)|`.
    pub fn boundary_deviation(&self, grid: &Grid, k: &[f64]) -> (f64, f64) {
        let (l, r) = (grid.left(), grid.right());
        match self {
            Problem::Bar(s) => {
                let slope = Stencil::First.apply_at(k, r, grid.spacing()).unwrap_or(f64::NAN);
                (k[l].abs(), (slope - s.end_load / s.axial_stiffness()).abs())
            }
            Problem::Beam(_) => (k[l].abs(), k[r].abs()),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One weighted boundary term of a loss.
#[derive(Debug, Clone, PartialEq)]
pub struct BcTerm {
    pub label: &'static str,
    /// Unsquared boundary residual.
    pub raw: f64,
    /// `lambda * raw^2`.
    pub weighted: f64,
}

/// A loss value split into its governing-equation and boundary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    /// Mean squared residual of the governing equation over `[0, L]`.
    pub residual_term: f64,
    pub bc_terms: Vec<BcTerm>,
    pub total: f64,
}

impl LossBreakdown {
    pub fn bc_total(&self) -> f64 {
        self.bc_terms.iter().map(|t| t.weighted).sum()
    }
}

/// A squared linear functional of the output samples:
/// `weight * (stencil(K)[node] + constant)^2`, or `K[node]` when there is no stencil.
struct Row {
    node: usize,
    stencil: Option<Stencil>,
    constant: f64,
    weight: f64,
    label: Option<&'static str>,
}

impl Row {
    fn residual(&self, k: &[f64], h: f64) -> f64 {
        let v = match self.stencil {
            Some(s) => s.apply_at(k, self.node, h).expect("grid has enough ghost nodes"),
            None => k[self.node],
        };
        v + self.constant
    }

    /// Adds `d(weight * r^2)/dK` into `grad`.
    fn scatter(&self, r: f64, h: f64, grad: &mut [f64]) {
        let scale = 2.0 * self.weight * r;
        match self.stencil {
            Some(s) => {
                for (o, c) in s.coefficients(h) {
                    grad[(self.node as isize + o) as usize] += scale * c;
                }
            }
            None => grad[self.node] += scale,
        }
    }
}

fn bc_row(
    node: usize,
    stencil: Option<Stencil>,
    constant: f64,
    lambda: PenaltyCoefficient,
    label: &'static str,
) -> Row {
    Row {
        node,
        stencil,
        constant,
        weight: lambda.value(),
        label: Some(label),
    }
}

fn rows(problem: &Problem, strategy: &BcStrategy, grid: &Grid) -> Result<Vec<Row>> {
    problem.validate()?;
    problem.check_strategy(strategy)?;
    if (grid.length() - problem.length()).abs() > 1e-12 * problem.length() {
        return Err(Error::InvalidGrid(format!(
            "grid length {} does not match problem length {}",
            grid.length(),
            problem.length()
        )));
    }
    if grid.ghost() < problem.min_ghost() {
        return Err(Error::InvalidGrid(format!(
            "the {problem} problem needs at least {} ghost nodes, grid has {}",
            problem.min_ghost(),
            grid.ghost()
        )));
    }

    let mean_weight = 1.0 / grid.n_nodes() as f64;
    let nodes = grid.nodes();
    let (stencil, forcing): (Stencil, Box<dyn Fn(f64) -> f64>) = match *problem {
        Problem::Bar(s) => (Stencil::Second, Box::new(move |x| s.load(x) / s.axial_stiffness())),
        Problem::Beam(s) => (Stencil::Fourth, Box::new(move |x| s.load(x) / s.flexural_rigidity())),
    };
    let mut out: Vec<Row> = grid
        .interior_range()
        .map(|i| Row {
            node: i,
            stencil: Some(stencil),
            constant: forcing(nodes[i]),
            weight: mean_weight,
            label: None,
        })
        .collect();

    let (l, r) = (grid.left(), grid.right());
    match (problem, strategy) {
        (Problem::Bar(_), BcStrategy::Reparameterization(_)) => {}
        (Problem::Bar(s), BcStrategy::Penalty(w)) => {
            let traction = s.end_load / s.axial_stiffness();
            out.push(bc_row(l, None, 0.0, w.lambda1, "u(0)"));
            out.push(bc_row(r, Some(Stencil::First), -traction, w.lambda2, "u'(L)-P/EA"));
        }
        (Problem::Beam(_), BcStrategy::Hybrid(_, w)) => {
            out.push(bc_row(l, Some(Stencil::Second), 0.0, w.lambda1, "w''(0)"));
            out.push(bc_row(r, Some(Stencil::Second), 0.0, w.lambda2, "w''(L)"));
        }
        (Problem::Beam(_), BcStrategy::Penalty(w)) => {
            out.push(bc_row(l, None, 0.0, w.lambda1, "w(0)"));
            out.push(bc_row(r, None, 0.0, w.lambda1, "w(L)"));
            out.push(bc_row(l, Some(Stencil::Second), 0.0, w.lambda2, "w''(0)"));
            out.push(bc_row(r, Some(Stencil::Second), 0.0, w.lambda2, "w''(L)"));
        }
        _ => unreachable!("pairing checked above"),
    }
    Ok(out)
}

fn breakdown(rows: &[Row], k: &[f64], h: f64) -> (LossBreakdown, Vec<f64>) {
    let mut residual_term = 0.0;
    let mut bc_terms = Vec::new();
    let mut residuals = Vec::with_capacity(rows.len());
    for row in rows {
        let r = row.residual(k, h);
        residuals.push(r);
        match row.label {
            None => residual_term += row.weight * r * r,
            Some(label) => bc_terms.push(BcTerm {
                label,
                raw: r,
                weighted: penalty_term(r, PenaltyCoefficient::new(row.weight).expect("validated")),
            }),
        }
    }
    let total = residual_term + bc_terms.iter().map(|t| t.weighted).sum::<f64>();
    (
        LossBreakdown {
            residual_term,
            bc_terms,
            total,
        },
        residuals,
    )
}

/// Evaluates a case's loss for raw network samples `raw` given at every grid node.
///
/// The samples are passed through the strategy's multiplier (if any) before
/// the stencils are applied.
pub fn loss_from_samples(problem: &Problem, strategy: &BcStrategy, grid: &Grid, raw: &[f64]) -> Result<LossBreakdown> {
    let rows = rows(problem, strategy, grid)?;
    if raw.len() != grid.nodes().len() {
        return Err(Error::LengthMismatch {
            expected: grid.nodes().len(),
            actual: raw.len(),
        });
    }
    let k = strategy.output(grid.nodes(), raw)?;
    Ok(breakdown(&rows, &k, grid.spacing()).0)
}

/// Loss of `net` for `problem` under `strategy`.
pub fn loss(problem: &Problem, strategy: &BcStrategy, net: &DenseNetwork, grid: &Grid) -> Result<LossBreakdown> {
    let raw = net.forward(grid.nodes());
    loss_from_samples(problem, strategy, grid, &raw)
}

/// Bar loss: case 1 (reparameterized with `x e^{-x}`) or case 2 (penalties).
pub fn bar_loss(spec: &BarSpec, strategy: &BcStrategy, net: &DenseNetwork, grid: &Grid) -> Result<LossBreakdown> {
    loss(&Problem::Bar(*spec), strategy, net, grid)
}

/// Beam loss: case 3 (hybrid with `sin(pi x / L)`) or case 4 (penalties).
pub fn beam_loss(spec: &BeamSpec, strategy: &BcStrategy, net: &DenseNetwork, grid: &Grid) -> Result<LossBreakdown> {
    loss(&Problem::Beam(*spec), strategy, net, grid)
}

/// Loss and its exact gradient with respect to every network parameter.
pub fn loss_and_gradient(
    problem: &Problem,
    strategy: &BcStrategy,
    net: &DenseNetwork,
    grid: &Grid,
) -> Result<(LossBreakdown, ParamGradient)> {
    let rows = rows(problem, strategy, grid)?;
    let xs = grid.nodes();
    let h = grid.spacing();
    let raw = net.forward(xs);
    let k = strategy.output(xs, &raw)?;
    let (breakdown, residuals) = breakdown(&rows, &k, h);

    let mut upstream = vec![0.0; xs.len()];
    for (row, &r) in rows.iter().zip(&residuals) {
        row.scatter(r, h, &mut upstream);
    }
    if let Some(m) = strategy.multiplier() {
        for (u, &x) in upstream.iter_mut().zip(xs) {
            *u *= crate::bc::reparam_chain_factor(m, x);
        }
    }
    let grad = net.backward(xs, &upstream)?;
    Ok((breakdown, grad))
}

pub fn loss_gradient(
    problem: &Problem,
    strategy: &BcStrategy,
    net: &DenseNetwork,
    grid: &Grid,
) -> Result<ParamGradient> {
    loss_and_gradient(problem, strategy, net, grid).map(|(_, g)| g)
}

/// The four benchmark cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    BarReparam,
    BarPenalty,
    BeamHybrid,
    BeamPenalty,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::BarReparam, Case::BarPenalty, Case::BeamHybrid, Case::BeamPenalty];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn label(self) -> &'static str {
        match self {
            Case::BarReparam => "case1_bar_reparam",
            Case::BarPenalty => "case2_bar_penalty",
            Case::BeamHybrid => "case3_beam_hybrid",
            Case::BeamPenalty => "case4_beam_penalty",
        }
    }

    pub fn strategy_kind(self) -> StrategyKind {
        match self {
            Case::BarReparam => StrategyKind::Reparam,
            Case::BeamHybrid => StrategyKind::Hybrid,
            Case::BarPenalty | Case::BeamPenalty => StrategyKind::Penalty,
        }
    }

    pub fn is_bar(self) -> bool {
        matches!(self, Case::BarReparam | Case::BarPenalty)
    }

    /// Identifies the case a (problem, strategy) pair belongs to.
    pub fn identify(problem: &Problem, strategy: &BcStrategy) -> Result<Case> {
        problem.check_strategy(strategy)?;
        Ok(match (problem, strategy.kind()) {
            (Problem::Bar(_), StrategyKind::Reparam) => Case::BarReparam,
            (Problem::Bar(_), _) => Case::BarPenalty,
            (Problem::Beam(_), StrategyKind::Hybrid) => Case::BeamHybrid,
            (Problem::Beam(_), _) => Case::BeamPenalty,
        })
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
