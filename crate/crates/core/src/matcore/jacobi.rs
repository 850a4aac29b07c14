use super::{C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Outcome of [`joint_diagonalize`].
pub(crate) struct JointRotation {
    /// Accumulated unitary, row-major; its columns are the common eigenvectors.
    pub vectors: Option<Vec<C64>>,
    pub sweeps: usize,
    pub off_diagonal: f64,
}

fn off_norm(mats: &[Vec<C64>], n: usize) -> f64 {
    let mut s = 0.0;
    for a in mats {
        for p in 0..n {
            for q in p + 1..n {
                s += 2.0 * a[p * n + q].norm_sqr();
            }
        }
    }
    s
}

/// Unit vector maximising the summed squared projections of the Bloch vectors
/// of the 2x2 blocks at (p, q). Handles one or two matrices.
fn rotation_axis(mats: &[Vec<C64>], n: usize, p: usize, q: usize) -> Option<[f64; 3]> {
    let bloch = |a: &Vec<C64>| {
        let b = a[p * n + q];
        [b.re, -b.im, 0.5 * (a[p * n + p].re - a[q * n + q].re)]
    };
    let dot = |x: &[f64; 3], y: &[f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let w = match mats {
        [a] => bloch(a),
        [a, b] => {
            let v1 = bloch(a);
            let v2 = bloch(b);
            let (pp, qq, rr) = (dot(&v1, &v1), dot(&v1, &v2), dot(&v2, &v2));
            let phi = 0.5 * (2.0 * qq).atan2(pp - rr);
            let (s, c) = phi.sin_cos();
            [
                c * v1[0] + s * v2[0],
                c * v1[1] + s * v2[1],
                c * v1[2] + s * v2[2],
            ]
        }
        _ => unreachable!("joint diagonalisation supports one or two matrices"),
    };
    let norm = dot(&w, &w).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let sign = if w[2] < 0.0 { -1.0 } else { 1.0 };
    Some([sign * w[0] / norm, sign * w[1] / norm, sign * w[2] / norm])
}

/// Jointly diagonalise commuting Hermitian matrices (at most two) in place by
/// cyclic two-sided unitary rotations.
pub(crate) fn joint_diagonalize(
    mats: &mut [Vec<C64>],
    n: usize,
    want_vectors: bool,
    max_sweeps: usize,
) -> Result<JointRotation> {
    let mut vectors = want_vectors.then(|| {
        let mut v = vec![ZERO; n * n];
        for i in 0..n {
            v[i * n + i] = ONE;
        }
        v
    });
    let scale2: f64 = mats
        .iter()
        .map(|a| a.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    let tight = (n as f64 * f64::EPSILON).powi(2) * scale2;
    // a sweep that no longer contracts stops here, well below any tolerance
    // the callers check against
    let floor = (64.0 * n as f64 * f64::EPSILON).powi(2) * scale2;
    let loose = 1e-14 * scale2;

    let mut off = off_norm(mats, n);
    let mut sweeps = 0;
    while off > tight {
        if sweeps == max_sweeps {
            if off <= loose {
                log::debug!("jacobi accepted at noise floor: off {off:.3e} after {sweeps} sweeps");
                break;
            }
            return Err(Error::Numeric {
                stage: "jacobi",
                iterations: sweeps,
                residual: off.sqrt(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                if mats.iter().all(|a| a[p * n + q] == ZERO) {
                    continue;
                }
                let Some(w) = rotation_axis(mats, n, p, q) else {
                    continue;
                };
                let c = (0.5 * (1.0 + w[2])).sqrt();
                let s = C64::new(w[0], w[1]) / (2.0 * c);
                if s == ZERO {
                    continue;
                }
                for a in mats.iter_mut() {
                    rotate(a, n, p, q, c, s);
                }
                if let Some(v) = vectors.as_mut() {
                    rotate_columns(v, n, p, q, c, s);
                }
            }
        }
        let next = off_norm(mats, n);
        let stalled = next > 0.25 * off;
        off = next;
        if stalled && off <= floor {
            break;
        }
    }
    Ok(JointRotation {
        vectors,
        sweeps,
        off_diagonal: off.sqrt(),
    })
}

fn rotate_columns(a: &mut [C64], n: usize, p: usize, q: usize, c: f64, s: C64) {
    let sc = s.conj();
    for i in 0..n {
        let ap = a[i * n + p];
        let aq = a[i * n + q];
        a[i * n + p] = ap * c + aq * s;
        a[i * n + q] = aq * c - ap * sc;
    }
}

/// `a <- J* a J` with `J = [[c, -conj(s)], [s, c]]` acting on (p, q).
fn rotate(a: &mut [C64], n: usize, p: usize, q: usize, c: f64, s: C64) {
    rotate_columns(a, n, p, q, c, s);
    let sc = s.conj();
    for j in 0..n {
        let ap = a[p * n + j];
        let aq = a[q * n + j];
        a[p * n + j] = ap * c + aq * sc;
        a[q * n + j] = aq * c - ap * s;
    }
}
