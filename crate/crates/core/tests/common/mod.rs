//! Test oracles shared by the integration tests. Nothing here calls into the
//! library's loss or gradient code.

#![allow(dead_code, clippy::needless_range_loop)]

pub mod dd;

use dd::Dd;
use pinnbc::{Activation, Case, DenseNetwork, Physics};

/// Penalty weights used by the oracle; must match the configuration under test.
pub const LAMBDA: f64 = 100.0;

fn activate(act: Activation, z: Dd) -> Dd {
    match act {
        Activation::Identity => z,
        Activation::Sigmoid => Dd::ONE / (Dd::ONE + (-z).exp()),
        Activation::Relu => {
            if z.to_f64() > 0.0 {
                z
            } else {
                Dd::ZERO
            }
        }
    }
}

/// Network output at `x` for flat parameters laid out layer by layer,
/// row-major weights first, then biases.
pub fn dd_forward(dims: &[usize], hidden: Activation, output: Activation, params: &[Dd], x: f64) -> Dd {
    let mut a = vec![Dd::new(x)];
    let mut offset = 0;
    let layers = dims.len() - 1;
    for k in 0..layers {
        let (n_in, n_out) = (dims[k], dims[k + 1]);
        let w = &params[offset..offset + n_in * n_out];
        let b = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
        offset += n_in * n_out + n_out;
        let act = if k + 1 == layers { output } else { hidden };
        a = (0..n_out)
            .map(|j| {
                let mut z = b[j];
                for i in 0..n_in {
                    z = z + w[j * n_in + i] * a[i];
                }
                activate(act, z)
            })
            .collect();
    }
    a[0]
}

/// The four case losses written out directly, evaluated in double-double.
/// `nodes` are all grid coordinates (two ghosts per side), `h` the spacing.
pub fn dd_case_loss(case: Case, physics: &Physics, net: &DenseNetwork, params: &[Dd], nodes: &[f64], h: f64) -> Dd {
    let dims = net.layer_dims();
    let raw: Vec<Dd> = nodes
        .iter()
        .map(|&x| dd_forward(&dims, net.hidden_activation(), net.output_activation(), params, x))
        .collect();
    let ghost = 2;
    let left = ghost;
    let right = nodes.len() - 1 - ghost;
    let n = (right - left + 1) as f64;
    let h = Dd::new(h);
    let lam = Dd::new(LAMBDA);

    let second = |k: &[Dd], i: usize| (k[i + 1] - Dd::new(2.0) * k[i] + k[i - 1]) / (h * h);
    let fourth = |k: &[Dd], i: usize| {
        (k[i + 2] - Dd::new(4.0) * k[i + 1] + Dd::new(6.0) * k[i] - Dd::new(4.0) * k[i - 1] + k[i - 2])
            / (h * h * h * h)
    };

    match case {
        Case::BarReparam | Case::BarPenalty => {
            let ea = Dd::new(physics.bar.youngs_modulus) * Dd::new(physics.bar.area);
            let k: Vec<Dd> = if case == Case::BarReparam {
                nodes
                    .iter()
                    .zip(&raw)
                    .map(|(&x, &f)| Dd::new(x) * (-Dd::new(x)).exp() * f)
                    .collect()
            } else {
                raw
            };
            let mut residual = Dd::ZERO;
            for i in left..=right {
                let r = second(&k, i) + Dd::new(nodes[i]) / ea;
                residual = residual + r.sqr();
            }
            let mut total = residual / Dd::new(n);
            if case == Case::BarPenalty {
                let slope = (k[right + 1] - k[right - 1]) / (Dd::new(2.0) * h);
                let neumann = slope - Dd::new(physics.bar.end_load) / ea;
                total = total + lam * k[left].sqr() + lam * neumann.sqr();
            }
            total
        }
        Case::BeamHybrid | Case::BeamPenalty => {
            let ei = Dd::new(physics.beam.youngs_modulus) * Dd::new(physics.beam.inertia);
            let l = Dd::new(physics.beam.length);
            let k: Vec<Dd> = if case == Case::BeamHybrid {
                nodes
                    .iter()
                    .zip(&raw)
                    .map(|(&x, &f)| (dd::PI * Dd::new(x) / l).sin() * f)
                    .collect()
            } else {
                raw
            };
            let mut residual = Dd::ZERO;
            for i in left..=right {
                let r = fourth(&k, i) + Dd::new(nodes[i]).sin() / ei;
                residual = residual + r.sqr();
            }
            let mut total = residual / Dd::new(n);
            total = total + lam * second(&k, left).sqr() + lam * second(&k, right).sqr();
            if case == Case::BeamPenalty {
                total = total + lam * k[left].sqr() + lam * k[right].sqr();
            }
            total
        }
    }
}

/// Central finite differences of the double-double loss with step `step`
/// on every parameter of `net`.
pub fn fd_gradient(case: Case, physics: &Physics, net: &DenseNetwork, nodes: &[f64], h: f64, step: f64) -> Vec<f64> {
    let base: Vec<Dd> = net.parameters().into_iter().map(Dd::new).collect();
    (0..base.len())
        .map(|k| {
            let mut plus = base.clone();
            plus[k] = plus[k] + Dd::new(step);
            let mut minus = base.clone();
            minus[k] = minus[k] - Dd::new(step);
            let lp = dd_case_loss(case, physics, net, &plus, nodes, h);
            let lm = dd_case_loss(case, physics, net, &minus, nodes, h);
            ((lp - lm) / Dd::new(2.0 * step)).to_f64()
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
