//! Dense reference implementations used as test oracles. They form every
//! matrix explicitly and invert with LU, sharing no code path with the
//! library's Cholesky / Woodbury / Kronecker-structured routines.

#![allow(dead_code)]

use dmimo::model::CovarianceSet;
use dmimo::{CMat, CVec, C64};
use nalgebra::DMatrix;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn inv(a: &CMat) -> CMat {
    a.clone()
        .try_inverse()
        .expect("oracle matrix is invertible")
}

pub fn eye(m: usize) -> CMat {
    CMat::identity(m, m)
}

/// `(Q_tr, Q, Z)` for BS `n`, straight from the definitions.
pub fn stat_matrices(cov: &CovarianceSet, n: usize, rho: f64, rho_tr: f64) -> (CMat, CMat, CMat) {
    let m = cov.antennas();
    let sum = (0..cov.num_ue()).fold(CMat::zeros(m, m), |acc, k| acc + cov.block(k, n));
    let q_tr = &sum + eye(m) * c(1.0 / rho_tr);
    let q = &sum + eye(m) * c(1.0 / rho);
    let q_tr_inv = inv(&q_tr);
    let mut z = eye(m) * c(1.0 / rho);
    for k in 0..cov.num_ue() {
        let r = cov.block(k, n);
        z += r - r * &q_tr_inv * r;
    }
    (q_tr, q, z)
}

/// Sums over BSs of `(1/M) tr(R_j A R_k B)` for `(A, B) = (Q_tr^{-1}, Q^{-1})`
/// (`alpha`) and `(Q_tr^{-1}, Z^{-1})` (`beta`).
pub fn coefficient_sums(
    cov: &CovarianceSet,
    rho: f64,
    rho_tr: f64,
) -> (DMatrix<C64>, DMatrix<C64>) {
    let k = cov.num_ue();
    let m = cov.antennas() as f64;
    let mut alpha = DMatrix::<C64>::zeros(k, k);
    let mut beta = DMatrix::<C64>::zeros(k, k);
    for n in 0..cov.num_bs() {
        let (q_tr, q, z) = stat_matrices(cov, n, rho, rho_tr);
        let (q_tr_i, q_i, z_i) = (inv(&q_tr), inv(&q), inv(&z));
        let filters: Vec<CMat> = (0..k).map(|j| cov.block(j, n) * &q_tr_i).collect();
        for j in 0..k {
            for l in 0..k {
                let left = &filters[j] * cov.block(l, n);
                alpha[(j, l)] += trace_product(&left, &q_i) / c(m);
                beta[(j, l)] += trace_product(&left, &z_i) / c(m);
            }
        }
    }
    (alpha, beta)
}

/// `tr(A B) = sum_ij A_ij B_ji`.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    a.component_mul(&b.transpose()).sum()
}

pub fn vec_of(a: &CMat) -> CVec {
    CVec::from_iterator(a.len(), a.iter().copied())
}

/// Use-and-then-forget SINR of deterministic `W` applied to the LS
/// estimate, with the noise term as a dense Kronecker quadratic form.
pub fn uatf_sinr(w: &[CMat], cov: &CovarianceSet, rho: f64, rho_tr: f64, ue: usize) -> f64 {
    let mut signal = C64::new(0.0, 0.0);
    let mut interference = vec![C64::new(0.0, 0.0); cov.num_ue()];
    let mut noise = 0.0;
    for (n, wn) in w.iter().enumerate() {
        let (q_tr, q, _) = stat_matrices(cov, n, rho, rho_tr);
        signal += (wn.adjoint() * cov.block(ue, n)).trace();
        for (i, acc) in interference.iter_mut().enumerate() {
            if i != ue {
                *acc += (wn.adjoint() * cov.block(i, n)).trace();
            }
        }
        let u = q_tr.transpose().kronecker(&q);
        let v = vec_of(wn);
        noise += v.dotc(&(&u * &v)).re;
    }
    signal.norm_sqr() / (interference.iter().map(|x| x.norm_sqr()).sum::<f64>() + noise)
}

pub fn stack(parts: &[CVec]) -> CVec {
    let len = parts.iter().map(|p| p.len()).sum();
    CVec::from_iterator(len, parts.iter().flat_map(|p| p.iter().copied()))
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(total, total);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// `|v^H h_ue|^2 / (sum_{i != ue} |v^H h_i|^2 + v^H Z v)` on stacked vectors.
pub fn sinr(v: &CVec, h: &[CVec], z: &CMat, ue: usize) -> f64 {
    let num = v.dotc(&h[ue]).norm_sqr();
    let mut den = v.dotc(&(z * v)).re;
    for (i, hi) in h.iter().enumerate() {
        if i != ue {
            den += v.dotc(hi).norm_sqr();
        }
    }
    num / den
}

/// `h_ue^H (sum_{i != ue} h_i h_i^H + Z)^{-1} h_ue`.
pub fn mmse_sinr(h: &[CVec], z: &CMat, ue: usize) -> f64 {
    let mut a = z.clone();
    for (i, hi) in h.iter().enumerate() {
        if i != ue {
            a += hi * hi.adjoint();
        }
    }
    h[ue].dotc(&(inv(&a) * &h[ue])).re
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Relative Frobenius distance `||a - b|| / ||b||`.
pub fn rel_mat(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm()
}
