//! Dense complex matrix helpers for the 2×2/3×3 moment-map work.

use num_complex::Complex64;

pub type CMat = Vec<Vec<Complex64>>;

pub fn zeros(n: usize) -> CMat {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

pub fn identity(n: usize) -> CMat {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn mul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, bk) in b.iter().enumerate() {
                s += a[i][k] * bk[j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn adjoint(a: &CMat) -> CMat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn scale(a: &CMat, s: Complex64) -> CMat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter()
        .flat_map(|r| r.iter().map(|x| x.norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

pub fn trace(a: &CMat) -> Complex64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn mat_vec(a: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
        .collect()
}

/// Row-vector times matrix.
pub fn vec_mat(v: &[Complex64], a: &CMat) -> Vec<Complex64> {
    (0..a.len())
        .map(|j| v.iter().enumerate().map(|(i, x)| x * a[i][j]).sum())
        .collect()
}

pub fn det(a: &CMat) -> Complex64 {
    match a.len() {
        0 => Complex64::new(1.0, 0.0),
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => unimplemented!("determinant only needed up to 3×3"),
    }
}

/// Outer product `z·w` of a column and a row vector.
pub fn outer(z: &[Complex64], w: &[Complex64]) -> CMat {
    z.iter().map(|zi| w.iter().map(|wj| zi * wj).collect()).collect()
}

/// Trace-free part.
pub fn traceless(a: &CMat) -> CMat {
    let n = a.len();
    let t = trace(a) / n as f64;
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] -= t;
    }
    out
}
