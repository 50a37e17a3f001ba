//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

const THETA_13: f64 = 5.371920351148152;

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * re(0.5f64.powi(s));
    let id = CMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = PADE_13;
    let u_inner = &a6 * (&a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]))
        + &a6 * re(b[7])
        + &a4 * re(b[5])
        + &a2 * re(b[3])
        + &id * re(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]))
        + &a6 * re(b[6])
        + &a4 * re(b[4])
        + &a2 * re(b[2])
        + &id * re(b[0]);
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .expect("Padé denominator is nonsingular within the scaling bound");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_nilpotent() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![re(1.0), Complex64::new(0.0, 2.0), re(-30.0)]));
        let e = expm(&a);
        assert!((e[(0, 0)] - re(1f64.exp())).norm() < 1e-14);
        assert!((e[(1, 1)] - Complex64::new(0.0, 2.0).exp()).norm() < 1e-14);
        assert!((e[(2, 2)] - re((-30f64).exp())).norm() < 1e-25);
        let mut n = CMatrix::zeros(3, 3);
        n[(0, 1)] = re(1.0);
        n[(1, 2)] = re(1.0);
        let e = expm(&(n * re(2.0)));
        assert!((e[(0, 2)] - re(2.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - re(2.0)).norm() < 1e-14);
    }

    #[test]
    fn rotation() {
        let t = 40.0;
        let a = CMatrix::from_row_slice(2, 2, &[re(0.0), re(t), re(-t), re(0.0)]);
        let e = expm(&a);
        assert!((e[(0, 0)] - re(t.cos())).norm() < 1e-12);
        assert!((e[(0, 1)] - re(t.sin())).norm() < 1e-12);
    }
}
