//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005).

use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::hilbert::RealMatrix;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
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

/// `e^A` for a real square matrix.
pub fn matrix_exp(a: &RealMatrix) -> Result<RealMatrix> {
    expm(a)
}

/// `e^A` for any real or complex square matrix.
pub fn expm<T>(a: &DMatrix<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = rows;
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let norm = one_norm(a);
    let ident = DMatrix::<T>::identity(n, n);

    for (theta, coeffs) in [
        (THETA_3, &PADE_3[..]),
        (THETA_5, &PADE_5[..]),
        (THETA_7, &PADE_7[..]),
        (THETA_9, &PADE_9[..]),
    ] {
        if norm <= theta {
            let (u, v) = pade_low(a, &ident, coeffs);
            return solve_pade(u, v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.map(|z| z.unscale(2f64.powi(s)));
    let (u, v) = pade_13(&scaled, &ident);
    let mut x = solve_pade(u, v)?;
    for _ in 0..s {
        x = &x * &x;
    }
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(x)
}

fn one_norm<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>, c: f64) -> DMatrix<T> {
    m.map(|z| z.scale(c))
}

/// Odd part `U` and even part `V` of a degree 3..9 approximant.
fn pade_low<T>(a: &DMatrix<T>, ident: &DMatrix<T>, b: &[f64]) -> (DMatrix<T>, DMatrix<T>)
where
    T: ComplexField<RealField = f64> + Copy,
{
    let a2 = a * a;
    let mut even_pow = ident.clone();
    let mut u_inner = scaled(ident, b[1]);
    let mut v = scaled(ident, b[0]);
    let m = b.len() - 1;
    let mut k = 2;
    while k <= m {
        even_pow = &even_pow * &a2;
        v += scaled(&even_pow, b[k]);
        if k + 1 <= m {
            u_inner += scaled(&even_pow, b[k + 1]);
        }
        k += 2;
    }
    (a * u_inner, v)
}

fn pade_13<T>(a: &DMatrix<T>, ident: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>)
where
    T: ComplexField<RealField = f64> + Copy,
{
    let b = &PADE_13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u_inner = &a6 * u_hi
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(ident, b[1]);
    let u = a * u_inner;
    let v_hi = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * v_hi
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(ident, b[0]);
    (u, v)
}

fn solve_pade<T>(u: DMatrix<T>, v: DMatrix<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Singular("Padé denominator".into()))
}

/// `e^A` for a real symmetric matrix through its eigendecomposition.
pub fn symmetric_matrix_exp(a: &RealMatrix) -> Result<RealMatrix> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    let asym = (a - a.transpose()).abs().max();
    if asym > 1e-12 * a.abs().max().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (residual {asym:e})"
        )));
    }
    let eig = a.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let scaled = RealMatrix::from_fn(rows, rows, |i, k| v[(i, k)] * eig.eigenvalues[k].exp());
    Ok(scaled * v.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// Truncated Taylor series with scaling and squaring; the oracle.
    fn taylor_exp(a: &RealMatrix, terms: usize) -> RealMatrix {
        let n = a.nrows();
        let mut sum = RealMatrix::identity(n, n);
        let mut term = RealMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * a / k as f64;
            sum += &term;
        }
        sum
    }

    fn max_abs(m: &RealMatrix) -> f64 {
        m.abs().max()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = RealMatrix::zeros(5, 5);
        assert_eq!(matrix_exp(&z).unwrap(), RealMatrix::identity(5, 5));
    }

    #[test]
    fn exp_of_diagonal() {
        for (a, b) in [(0.3, -1.2), (4.0, -7.5), (12.0, 0.0)] {
            let d = RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, b]));
            let e = matrix_exp(&d).unwrap();
            assert!((e[(0, 0)] - f64::exp(a)).abs() <= 1e-13 * f64::exp(a));
            assert!((e[(1, 1)] - f64::exp(b)).abs() <= 1e-13 * f64::exp(b).max(1.0));
            assert_eq!(e[(0, 1)], 0.0);
            assert_eq!(e[(1, 0)], 0.0);
        }
    }

    #[test]
    fn rotation_generator_matches_taylor() {
        for t in [0.01, 0.2, 1.0, 2.5] {
            let a = RealMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]);
            let got = matrix_exp(&a).unwrap();
            let oracle = taylor_exp(&a, 200);
            assert!(max_abs(&(&got - &oracle)) < 1e-12, "t = {t}");
            assert!((got[(0, 0)] - t.cos()).abs() < 1e-12);
            assert!((got[(0, 1)] - t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn every_pade_degree_matches_taylor() {
        // norms chosen to land in each degree bracket, including scaling
        for norm in [0.01, 0.2, 0.9, 2.0, 5.0, 20.0] {
            let a = RealMatrix::from_fn(4, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
            let a = &a * (norm / one_norm(&a));
            // oracle: Taylor on a/2^6, squared back up
            let small = &a / 64.0;
            let mut oracle = taylor_exp(&small, 60);
            for _ in 0..6 {
                oracle = &oracle * &oracle;
            }
            let got = matrix_exp(&a).unwrap();
            let rel = max_abs(&(&got - &oracle)) / max_abs(&oracle);
            assert!(rel < 1e-12, "norm {norm}: relative error {rel:e}");
        }
    }

    #[test]
    fn complex_exp_of_phase() {
        let a = DMatrix::from_element(1, 1, Complex64::new(0.0, 1.3));
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - Complex64::new(1.3f64.cos(), 1.3f64.sin())).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = RealMatrix::zeros(2, 2);
        a[(0, 1)] = f64::NAN;
        assert_eq!(matrix_exp(&a), Err(Error::NonFinite));
        assert!(matches!(matrix_exp(&RealMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn symmetric_path_agrees_with_pade() {
        let a = RealMatrix::from_fn(6, 6, |i, j| -((i as f64) - (j as f64)).abs() * 0.4 + if i == j { 1.0 } else { 0.0 });
        let a = (&a + a.transpose()) * 0.5;
        let lhs = symmetric_matrix_exp(&a).unwrap();
        let rhs = matrix_exp(&a).unwrap();
        assert!(max_abs(&(&lhs - &rhs)) < 1e-12 * max_abs(&rhs));
    }

    proptest! {
        #[test]
        fn commuting_sum_factorizes(
            a in proptest::collection::vec(-3.0..3.0f64, 5),
            b in proptest::collection::vec(-3.0..3.0f64, 5),
        ) {
            // commuting pair: diagonal matrices conjugated by the same rotation
            let q = matrix_exp(&RealMatrix::from_fn(5, 5, |i, j| (i as f64) - (j as f64)).scale(0.1)).unwrap();
            let qi = q.clone().try_inverse().unwrap();
            let da = &q * RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(a)) * &qi;
            let db = &q * RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(b)) * &qi;
            let lhs = matrix_exp(&(&da + &db)).unwrap();
            let rhs = matrix_exp(&da).unwrap() * matrix_exp(&db).unwrap();
            let scale = max_abs(&rhs).max(1.0);
            prop_assert!(max_abs(&(&lhs - &rhs)) <= 1e-11 * scale);
        }
    }
}
