//! Built-in operator stacks for the classical dissipative models, with their
//! physical parameters exposed by name.

use crate::symbol_core::{HomogeneousSymbol, OperatorStack};
use crate::{Error, Result};

pub const NAMES: [&str; 9] = [
    "mgt",
    "blackstock_crighton",
    "em_elastic",
    "em_elastic_dissipative",
    "anisotropic_elastic_2d",
    "mgt_classical_damping",
    "fourth_order_weak",
    "example_ell3",
    "damped_wave",
];

/// Default parameters, including the spatial dimension `n`.
pub fn defaults(name: &str) -> Result<Vec<(&'static str, f64)>> {
    Ok(match name {
        "mgt" => vec![("tau", 1.0), ("c", 1.0), ("b", 1.0), ("n", 3.0)],
        "blackstock_crighton" => vec![("tau", 1.0), ("c", 1.0), ("a", 1.0), ("b", 1.0), ("n", 3.0)],
        "em_elastic" => vec![("mu", 1.0), ("c", 1.0), ("gamma", 1.0), ("sigma", 1.0), ("n", 3.0)],
        "em_elastic_dissipative" => vec![
            ("a", 2.0),
            ("mu", 1.0),
            ("c", 1.0),
            ("gamma", 1.0),
            ("sigma", 1.0),
            ("n", 3.0),
        ],
        "anisotropic_elastic_2d" => vec![("a1", 2.0), ("a2", 1.0), ("mu", 1.0), ("nu", 0.0)],
        "mgt_classical_damping" => vec![("tau", 1.0), ("c", 1.0), ("b", 1.0), ("n", 3.0)],
        "fourth_order_weak" => vec![("c", 2.0), ("n", 1.0)],
        "example_ell3" => vec![
            ("a", 1.0),
            ("b", 0.5),
            ("c1", 1.0),
            ("c2", 2.0),
            ("c3", 1.0),
            ("n", 1.0),
        ],
        "damped_wave" => vec![("n", 1.0)],
        _ => return Err(Error::InvalidModel(format!("unknown preset `{name}`"))),
    })
}

pub fn is_preset(name: &str) -> bool {
    NAMES.contains(&name)
}

/// Merge overrides into the defaults, rejecting unknown names.
pub fn resolve(name: &str, overrides: &[(&str, f64)]) -> Result<Vec<(&'static str, f64)>> {
    let mut p = defaults(name)?;
    for (k, v) in overrides {
        match p.iter_mut().find(|(n, _)| n == k) {
            Some(slot) => slot.1 = *v,
            None => {
                return Err(Error::InvalidModel(format!("preset `{name}` has no parameter `{k}`")));
            }
        }
    }
    Ok(p)
}

/// Symbol `Σ c_k λ^k |ξ|^{order-k}`.
fn radial(order: usize, dim: usize, terms: &[(usize, f64)]) -> Result<HomogeneousSymbol> {
    let mut s = HomogeneousSymbol::new(order, dim);
    for &(k, c) in terms {
        s.add_radial(k, c)?;
    }
    Ok(s)
}

pub fn build(name: &str, overrides: &[(&str, f64)]) -> Result<OperatorStack> {
    let p = resolve(name, overrides)?;
    let get = |k: &str| p.iter().find(|(n, _)| *n == k).map(|x| x.1).unwrap();
    let n = p.iter().find(|(k, _)| *k == "n").map(|x| x.1).unwrap_or(2.0);
    if n.fract() != 0.0 || !(1.0..=3.0).contains(&n) {
        return Err(Error::InvalidModel(format!("dimension n must be 1, 2 or 3, got {n}")));
    }
    let n = n as usize;
    let symbols = match name {
        "mgt" => {
            let (tau, c, b) = (get("tau"), get("c"), get("b"));
            vec![
                radial(3, n, &[(3, 1.0), (1, -(c * c + b / tau))])?,
                radial(2, n, &[(2, 1.0 / tau), (0, -c * c / tau)])?,
            ]
        }
        "blackstock_crighton" => {
            let (tau, c, a, b) = (get("tau"), get("c"), get("a"), get("b"));
            vec![
                radial(4, n, &[(4, 1.0), (2, -(c * c + (a + b) / tau)), (0, a * c * c / tau)])?,
                radial(3, n, &[(3, 1.0 / tau), (1, -c * c / tau)])?,
            ]
        }
        "em_elastic" => {
            let (mu, c, g, s) = (get("mu"), get("c"), get("gamma"), get("sigma"));
            vec![
                radial(5, n, &[(5, 1.0), (3, -(mu + c * c + g * g)), (1, c * c * mu)])?,
                radial(4, n, &[(4, 2.0 * s), (2, -s * (2.0 * mu + c * c + g * g)), (0, s * c * c * mu)])?,
                radial(3, n, &[(3, s * s), (1, -s * s * mu)])?,
            ]
        }
        "em_elastic_dissipative" => {
            let (a, mu, c, g, s) = (get("a"), get("mu"), get("c"), get("gamma"), get("sigma"));
            vec![
                radial(4, n, &[(4, 1.0), (2, -(mu + c * c + g * g)), (0, c * c * mu)])?,
                radial(3, n, &[(3, a + s), (1, -(a * c * c + mu * s))])?,
                radial(2, n, &[(2, a * s)])?,
            ]
        }
        "anisotropic_elastic_2d" => {
            let (a1, a2, mu, nu) = (get("a1"), get("a2"), get("mu"), get("nu"));
            let l = 2.0 * mu + nu;
            // (λ² − μ|ξ|²)(λ² − (2μ+ν)|ξ|²)
            let p4 = radial(4, 2, &[(4, 1.0), (2, -(mu + l)), (0, mu * l)])?;
            let mut p3 = HomogeneousSymbol::new(3, 2);
            p3.add_term(3, &[0, 0], a1 + a2)?;
            p3.add_term(1, &[2, 0], -(a1 * mu + a2 * (mu + (mu + nu))))?;
            p3.add_term(1, &[0, 2], -(a1 * (mu + (mu + nu)) + a2 * mu))?;
            let p2 = radial(2, 2, &[(2, a1 * a2)])?;
            vec![p4, p3, p2]
        }
        "mgt_classical_damping" => {
            let (tau, c, b) = (get("tau"), get("c"), get("b"));
            vec![
                radial(3, n, &[(3, 1.0), (1, -c * c)])?,
                radial(2, n, &[(2, 1.0 / tau), (0, -c * c / tau)])?,
                radial(1, n, &[(1, b / tau)])?,
            ]
        }
        "fourth_order_weak" => {
            let c = get("c");
            vec![
                radial(4, n, &[(4, 1.0), (2, -c * c)])?,
                radial(3, n, &[(3, 1.0), (1, -1.0)])?,
                radial(2, n, &[(2, 1.0), (0, -1.0)])?,
            ]
        }
        "example_ell3" => {
            let (a, b) = (get("a"), get("b"));
            let (c1, c2, c3) = (get("c1"), get("c2"), get("c3"));
            vec![
                radial(4, n, &[(4, 1.0), (2, -a * a)])?,
                radial(3, n, &[(3, c3), (1, -c3 * a * a)])?,
                radial(2, n, &[(2, c2), (0, -c2 * b * b)])?,
                radial(1, n, &[(1, c1)])?,
            ]
        }
        "damped_wave" => vec![radial(2, n, &[(2, 1.0), (0, -1.0)])?, radial(1, n, &[(1, 1.0)])?],
        _ => unreachable!(),
    };
    OperatorStack::new(name, symbols)
}

/// The closed-form strict-stability condition of `example_ell3`.
pub fn example_ell3_condition(a: f64, b: f64, c1: f64, c2: f64, c3: f64) -> bool {
    c1 < c2 * c3 && b * b < (1.0 - c1 / (c2 * c3)) * a * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootkit::roots;
    use crate::symbol_core::Direction;

    #[test]
    fn all_presets_build() {
        for name in NAMES {
            let st = build(name, &[]).unwrap();
            assert_eq!(st.p(0).unwrap().leading_time_coeff(), 1.0);
            assert_eq!(st.is_isotropic(), name != "anisotropic_elastic_2d", "{name}");
        }
        assert!(build("mgt", &[("zeta", 1.0)]).is_err());
        assert!(build("nope", &[]).is_err());
    }

    #[test]
    fn mgt_full_symbol_at_unit_constants() {
        let st = build("mgt", &[]).unwrap();
        let q = st.full_symbol_at(&[0.5, 0.0, 0.0]).unwrap();
        let want = [0.25, 0.5, 1.0, 1.0];
        for (k, w) in want.iter().enumerate() {
            assert!((q.coeff(k).re - w).abs() < 1e-15 && q.coeff(k).im == 0.0);
        }
    }

    #[test]
    fn em_elastic_low_frequency_limits() {
        // λ_{4,5}(0) = −σ from λ² + 2σλ + σ².
        let st = build("em_elastic", &[("sigma", 1.5)]).unwrap();
        let r = roots(&st.full_symbol_at(&[0.0; 3]).unwrap()).unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 3);
        assert!(r.iter().filter(|z| (z.re + 1.5).abs() < 1e-7).count() == 2);
    }

    #[test]
    fn anisotropic_restriction_matches_displayed_form() {
        let st = build("anisotropic_elastic_2d", &[]).unwrap();
        let p3 = st.restrict(1, &Direction::axis(2, 0)).unwrap();
        assert_eq!(p3.coeff(3).re, 3.0);
        assert_eq!(p3.coeff(1).re, -4.0);
    }
}
