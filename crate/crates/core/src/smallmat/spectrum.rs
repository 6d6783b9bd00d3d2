//! Eigenvalue machinery.
//!
//! Dimension 1 and 2 use closed forms (the 2x2 case via a cancellation-safe
//! quadratic formula). Dimension 3 and above reduce to upper Hessenberg form
//! and run a shifted QR iteration in complex arithmetic with a hard global
//! iteration cap; eigenvalues of real input are symmetrized into exact
//! conjugate pairs afterwards. Symmetric eigenvalues (for singular values)
//! use cyclic Jacobi.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SmallMatrix;
use crate::error::{Error, Result};

/// Global cap on QR steps per matrix. Generous: a 16x16 matrix typically
/// deflates in well under 200 steps.
const QR_MAX_ITER: usize = 10_000;

/// Steps on one unreduced block before an exceptional shift is injected.
const EXCEPTIONAL_EVERY: usize = 25;

/// Eigenvalues sorted by (real, imaginary) plus the spectral radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<(f64, f64)>,
    pub spectral_radius: f64,
}

impl Spectrum {
    pub fn complex_eigenvalues(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn spectrum(a: &SmallMatrix) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let eigs = match a.rows() {
        1 => vec![Complex64::new(a[(0, 0)], 0.0)],
        2 => eig2(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]).to_vec(),
        _ => eig_qr(a)?,
    };
    let mut eigs = eigs;
    eigs.sort_by(|x, y| {
        x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap())
    });
    let spectral_radius = eigs.iter().map(|e| e.norm()).fold(0.0, f64::max);
    Ok(Spectrum {
        eigenvalues: eigs.into_iter().map(|e| (e.re, e.im)).collect(),
        spectral_radius,
    })
}

/// Eigenvalues of [[a, b], [c, d]] by the quadratic formula. The discriminant
/// is computed as (a-d)^2 + 4bc, which avoids the cancellation in tr^2-4det.
pub(crate) fn eig2(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 2] {
    let tr = a + d;
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // split via the numerically large root first
        let r1 = 0.5 * (tr + if tr >= 0.0 { sq } else { -sq });
        let det = a * d - b * c;
        let r2 = if r1 != 0.0 { det / r1 } else { 0.5 * (tr - sq) };
        [Complex64::new(r1.min(r2), 0.0), Complex64::new(r1.max(r2), 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        let re = 0.5 * tr;
        [Complex64::new(re, -im), Complex64::new(re, im)]
    }
}

/// Householder reduction to upper Hessenberg form, in place on a copy.
fn to_hessenberg(a: &SmallMatrix) -> Vec<Vec<f64>> {
    let n = a.rows();
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = 0.0;
        for i in k + 1..n {
            norm2 += h[i][k] * h[i][k];
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if h[k + 1][k] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in k + 1..n {
            v[i] = h[i][k];
        }
        v[k + 1] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        let beta = 2.0 / vtv;
        // H <- (I - beta v v^T) H
        for j in 0..n {
            let mut dot = 0.0;
            for i in k + 1..n {
                dot += v[i] * h[i][j];
            }
            let f = beta * dot;
            for i in k + 1..n {
                h[i][j] -= f * v[i];
            }
        }
        // H <- H (I - beta v v^T)
        for i in 0..n {
            let mut dot = 0.0;
            for j in k + 1..n {
                dot += h[i][j] * v[j];
            }
            let f = beta * dot;
            for j in k + 1..n {
                h[i][j] -= f * v[j];
            }
        }
        for i in k + 2..n {
            h[i][k] = 0.0;
        }
        h[k + 1][k] = alpha;
    }
    h
}

/// Complex Givens rotation: returns (c, s, r) with c real such that
/// [c s; -conj(s) c] * [f; g] = [r; 0].
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    if g == Complex64::ZERO {
        return (1.0, Complex64::ZERO, f);
    }
    if f == Complex64::ZERO {
        let ga = g.norm();
        return (0.0, g.conj() / ga, Complex64::new(ga, 0.0));
    }
    let fa = f.norm();
    let ga = g.norm();
    let d = fa.hypot(ga);
    let fs = f / fa;
    (fa / d, fs * g.conj() / d, fs * d)
}

/// Wilkinson shift from the trailing 2x2 block.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powu(2) + b * c;
    let root = disc.sqrt();
    let m1 = half + root;
    let m2 = half - root;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

fn eig_qr(a: &SmallMatrix) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let hr = to_hessenberg(a);
    let mut h: Vec<Vec<Complex64>> =
        hr.iter().map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut eigs: Vec<Complex64> = Vec::with_capacity(n);
    let mut hi = n;
    let mut total_steps = 0usize;
    let mut block_steps = 0usize;

    let negligible = |sub: Complex64, d1: Complex64, d2: Complex64, scale: f64| {
        sub.norm() <= f64::EPSILON * (d1.norm() + d2.norm()).max(scale * 1e-3)
    };

    while hi > 0 {
        if hi == 1 {
            eigs.push(h[0][0]);
            hi = 0;
            continue;
        }
        // deflate a converged trailing eigenvalue
        if negligible(h[hi - 1][hi - 2], h[hi - 2][hi - 2], h[hi - 1][hi - 1], scale) {
            eigs.push(h[hi - 1][hi - 1]);
            hi -= 1;
            block_steps = 0;
            continue;
        }
        // active block [lo, hi): largest lo whose subdiagonal vanishes
        let mut lo = 0;
        for k in (1..hi).rev() {
            if negligible(h[k][k - 1], h[k - 1][k - 1], h[k][k], scale) {
                h[k][k - 1] = Complex64::ZERO;
                lo = k;
                break;
            }
        }
        if total_steps >= QR_MAX_ITER {
            return Err(Error::NoConvergence(QR_MAX_ITER));
        }
        total_steps += 1;
        block_steps += 1;

        let sigma = if block_steps % EXCEPTIONAL_EVERY == 0 {
            // rare stagnation escape: magnitude-based ad hoc shift
            Complex64::new(
                h[hi - 1][hi - 2].norm() + h[hi - 1][hi - 1].norm(),
                h[hi - 2][hi - 2].norm() * 0.5,
            )
        } else {
            wilkinson_shift(
                h[hi - 2][hi - 2],
                h[hi - 2][hi - 1],
                h[hi - 1][hi - 2],
                h[hi - 1][hi - 1],
            )
        };

        // explicit shifted QR step on the active block
        for i in lo..hi {
            h[i][i] -= sigma;
        }
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi - 1 {
            let (c, s, r) = givens(h[i][i], h[i + 1][i]);
            h[i][i] = r;
            h[i + 1][i] = Complex64::ZERO;
            for j in i + 1..hi {
                let t1 = h[i][j];
                let t2 = h[i + 1][j];
                h[i][j] = c * t1 + s * t2;
                h[i + 1][j] = -s.conj() * t1 + c * t2;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            let top = (i + 2).min(hi);
            for row in lo..top {
                let t1 = h[row][i];
                let t2 = h[row][i + 1];
                h[row][i] = c * t1 + s.conj() * t2;
                h[row][i + 1] = -s * t1 + c * t2;
            }
        }
        for i in lo..hi {
            h[i][i] += sigma;
        }
    }

    Ok(symmetrize_conjugates(eigs, scale))
}

/// Real input has eigenvalues in conjugate pairs; the complex QR sweep leaves
/// tiny asymmetries, so pair them up and enforce exact conjugacy.
fn symmetrize_conjugates(mut eigs: Vec<Complex64>, scale: f64) -> Vec<Complex64> {
    let n = eigs.len();
    let tiny = 1e-10 * scale.max(1.0);
    for e in eigs.iter_mut() {
        if e.im.abs() <= tiny * 1e-4 {
            e.im = 0.0;
        }
    }
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || eigs[i].im <= 0.0 {
            continue;
        }
        let target = eigs[i].conj();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == i || used[j] || eigs[j].im > 0.0 {
                continue;
            }
            let d = (eigs[j] - target).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            if d <= tiny {
                let re = 0.5 * (eigs[i].re + eigs[j].re);
                let im = 0.5 * (eigs[i].im - eigs[j].im);
                eigs[i] = Complex64::new(re, im);
                eigs[j] = Complex64::new(re, -im);
                used[i] = true;
                used[j] = true;
            }
        }
    }
    eigs
}

/// Greedy nearest-neighbour multiset comparison: pairs each eigenvalue of `a`
/// with its closest unmatched partner in `b` and reports the largest gap.
/// Returns infinity when the lengths differ.
pub fn multiset_max_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    // match in decreasing magnitude so dominant eigenvalues pair first
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| b[j].norm().partial_cmp(&b[i].norm()).unwrap());
    let mut order_a: Vec<usize> = (0..a.len()).collect();
    order_a.sort_by(|&i, &j| a[j].norm().partial_cmp(&a[i].norm()).unwrap());
    for &i in &order_a {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..b.len() {
            if used[j] {
                continue;
            }
            let d = (a[i] - b[j]).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("lengths match");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix given as nested rows.
/// Internal sizes may exceed the public 16x16 cap (real embeddings of
/// complex Gram matrices reach 32x32).
pub(crate) fn jacobi_sym_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    if n == 0 {
        return vec![];
    }
    let fro: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let stop = f64::EPSILON * fro.max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += 2.0 * a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= stop * 1e-2 / (n as f64) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Gaussian elimination with partial pivoting over complex numbers.
pub(crate) fn solve_complex(
    a: &[Vec<Complex64>],
    b: &[Complex64],
) -> Option<Vec<Complex64>> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut x: Vec<Complex64> = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if m[i][k].norm() > m[piv][k].norm() {
                piv = i;
            }
        }
        if m[piv][k].norm() < 1e-300 {
            return None;
        }
        m.swap(k, piv);
        x.swap(k, piv);
        let pivot = m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / pivot;
            m[i][k] = Complex64::ZERO;
            for j in k + 1..n {
                let sub = f * m[k][j];
                m[i][j] -= sub;
            }
            let sub = f * x[k];
            x[i] -= sub;
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for j in k + 1..n {
            acc -= m[k][j] * x[j];
        }
        x[k] = acc / m[k][k];
    }
    Some(x)
}

/// Condition number of an (approximate) eigenvector basis of `a`, computed
/// by inverse iteration per eigenvalue. Near-defective input yields a very
/// large value, which downstream decay bounds treat as "no useful bound".
pub(crate) fn eigenbasis_condition(a: &SmallMatrix) -> Result<f64> {
    let n = a.rows();
    let eigs = spectrum(a)?.complex_eigenvalues();
    let ac: Vec<Vec<Complex64>> =
        (0..n).map(|i| (0..n).map(|j| Complex64::new(a[(i, j)], 0.0)).collect()).collect();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (idx, lam) in eigs.iter().enumerate() {
        // slightly off-shifted system; deterministic start varies per index
        let shift = lam + Complex64::new(1e-9 * scale, 1e-11 * scale);
        let mut shifted = ac.clone();
        for i in 0..n {
            shifted[i][i] -= shift;
        }
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(1.0 + ((k + idx * 3) % 5) as f64, ((k * 7 + idx) % 3) as f64))
            .collect();
        for _ in 0..3 {
            match solve_complex(&shifted, &v) {
                Some(w) => {
                    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if !norm.is_finite() || norm == 0.0 {
                        break;
                    }
                    v = w.into_iter().map(|z| z / norm).collect();
                }
                None => break,
            }
        }
        basis.push(v);
    }
    // Hermitian Gram matrix of the basis columns, embedded as a real
    // symmetric 2n x 2n matrix: [[Re G, -Im G], [Im G, Re G]].
    let mut g = vec![vec![Complex64::ZERO; n]; n];
    for p in 0..n {
        for q in 0..n {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                acc += basis[p][k].conj() * basis[q][k];
            }
            g[p][q] = acc;
        }
    }
    let mut embed = vec![vec![0.0; 2 * n]; 2 * n];
    for p in 0..n {
        for q in 0..n {
            embed[p][q] = g[p][q].re;
            embed[p][q + n] = -g[p][q].im;
            embed[p + n][q] = g[p][q].im;
            embed[p + n][q + n] = g[p][q].re;
        }
    }
    let eigs = jacobi_sym_eigenvalues(embed);
    let max = eigs.iter().cloned().fold(0.0f64, f64::max).max(0.0);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
    if min <= f64::EPSILON * max {
        return Ok(1e300);
    }
    Ok((max / min).sqrt())
}
