#![allow(dead_code)]

use finestruct::model::Matrix4;
use finestruct::DotParameters;
use rand::Rng;

/// Cyclic Jacobi eigendecomposition of a dense symmetric 4×4 matrix.
/// Returns eigenvalues ascending and the matching unit eigenvectors.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigen(m: &Matrix4) -> ([f64; 4], [[f64; 4]; 4]) {
    let mut a = *m;
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm.max(1e-300) {
            break;
        }
        for p in 0..3 {
            for q in p + 1..4 {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.map(|i| a[i][i]);
    let vectors = order.map(|i| [v[0][i], v[1][i], v[2][i], v[3][i]]);
    (values, vectors)
}

pub fn jacobi_eigenvalues(m: &Matrix4) -> [f64; 4] {
    jacobi_eigen(m).0
}

/// Random valid dot with σ₀ = 0, d0 ∈ [50, 800], |s0| < min(300, 1.5 d0),
/// |g| ≤ 2.
pub fn random_dot<R: Rng>(rng: &mut R) -> DotParameters {
    let d0 = rng.gen_range(50.0..800.0);
    let s_max = f64::min(300.0, 1.5 * d0);
    let s0 = rng.gen_range(-s_max..s_max);
    let g_e = rng.gen_range(-2.0..2.0);
    let g_h = rng.gen_range(-2.0..2.0);
    DotParameters::new(s0, d0, g_e, g_h).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Curvature of S at b = 0 by two Richardson steps on (S(h) − S(0))/h²,
/// which is K + K′h² + O(h⁴) since S is even in b.
pub fn fd_curvature(p: &DotParameters) -> f64 {
    let s = |b: f64| finestruct::model::bright_splitting(p, b).unwrap();
    let scale = (p.g_hpol().abs().max(p.g_vpol().abs()) * finestruct::MU_B).max(1e-12);
    let gap = p.d_h0().min(p.d_v0());
    let h = 0.1 * gap / scale;
    let s_0 = s(0.0);
    let c = |h: f64| (s(h) - s_0) / (h * h);
    let (c1, c2, c3) = (c(h), c(h / 2.0), c(h / 4.0));
    let r1 = (4.0 * c2 - c1) / 3.0;
    let r2 = (4.0 * c3 - c2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}
