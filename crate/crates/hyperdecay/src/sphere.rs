//! Deterministic direction samples on the unit sphere and its surface area.

use crate::symbol_core::Direction;

/// n = 1: both signs; n = 2: 256 uniform angles; n = 3: 512-point Fibonacci
/// lattice. Other dimensions are not supported.
pub fn sphere_samples(dim: usize) -> Vec<Direction> {
    match dim {
        1 => vec![Direction::axis(1, 0), Direction::normalized(&[-1.0]).unwrap()],
        2 => circle(256),
        3 => fibonacci(512),
        _ => panic!("sphere sampling supports dimensions 1 to 3, got {dim}"),
    }
}

/// Directions to sample for a stack: a single axis when it is isotropic.
pub fn samples_for(dim: usize, isotropic: bool) -> Vec<Direction> {
    if isotropic {
        vec![Direction::axis(dim, 0)]
    } else {
        sphere_samples(dim)
    }
}

pub fn circle(count: usize) -> Vec<Direction> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            Direction::normalized(&[t.cos(), t.sin()]).unwrap()
        })
        .collect()
}

pub fn fibonacci(count: usize) -> Vec<Direction> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Direction::normalized(&[r * phi.cos(), r * phi.sin(), z]).unwrap()
        })
        .collect()
}

/// Surface measure of `S^{n-1}`: 2, 2π, 4π.
pub fn sphere_area(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            let n = dim as f64;
            2.0 * PI.powf(n / 2.0) / gamma_half_int(dim)
        }
    }
}

/// Γ(n/2) for a positive integer n.
fn gamma_half_int(n: usize) -> f64 {
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x + 1.0 <= n as f64 / 2.0 {
            g *= x;
            x += 1.0;
        }
        g
    }
}
