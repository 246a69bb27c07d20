//! Real symmetric tridiagonal eigenproblems.
//!
//! Lowest eigenvalues come from Sturm-sequence bisection, the full spectrum
//! (optionally with eigenvectors) from the implicit QL algorithm with Wilkinson
//! shifts.

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Eigenvalues in ascending order with the matching unit eigenvectors;
/// `vectors[i]` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymTridiagonal {
    /// `off[i]` couples rows `i` and `i + 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("diag", "matrix must have dimension at least 1"));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::invalid(
                "off",
                format!("expected {} off-diagonal entries, got {}", diag.len() - 1, off.len()),
            ));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::invalid("diag", "entries must be finite"));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`, from the signs of the LDL^T
    /// pivots of `T - x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0.. {
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
            if i + 1 == self.dim() {
                break;
            }
            q = self.diag[i + 1] - x - self.off[i] * self.off[i] / q;
        }
        count
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        if k > self.dim() {
            return Err(Error::invalid(
                "k",
                format!("requested {k} eigenvalues of a {}-dimensional matrix", self.dim()),
            ));
        }
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let width = hi - lo;
        let lo = lo - 1e-3 * width - scale * f64::EPSILON;
        let hi = hi + 1e-3 * width + scale * f64::EPSILON;
        let resolution = 2.0 * f64::EPSILON * scale;
        let mut values = Vec::with_capacity(k);
        let mut floor = lo;
        for index in 0..k {
            // Smallest x with count_below(x) > index.
            let (mut a, mut b) = (floor, hi);
            while b - a > resolution {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if self.count_below(mid) > index {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            let value = 0.5 * (a + b);
            values.push(value);
            floor = a;
        }
        Ok(values)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        implicit_ql(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// All eigenpairs, ascending.
    pub fn eigensystem(&self) -> Result<Eigensystem> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        let mut z: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        implicit_ql(&mut d, &mut e, Some(&mut z))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&i| d[i]).collect();
        let mut slots: Vec<Option<Vec<f64>>> = z.into_iter().map(Some).collect();
        let vectors = order.iter().map(|&i| slots[i].take().unwrap()).collect();
        Ok(Eigensystem { values, vectors })
    }
}

/// Rotates the pair of vectors `(z[i], z[i + 1])` in place.
fn rotate_pair(z: &mut [Vec<f64>], i: usize, c: f64, s: f64) {
    let (head, tail) = z.split_at_mut(i + 1);
    let (u, w) = (&mut head[i], &mut tail[0]);
    for (ui, wi) in u.iter_mut().zip(w.iter_mut()) {
        let f = *wi;
        *wi = s * *ui + c * f;
        *ui = c * *ui - s * f;
    }
}

/// Implicit QL on `d` (diagonal) and `e` (sub-diagonal, `e[i]` couples `i` and
/// `i + 1`, `e[n-1] = 0`). On return `d` holds the unsorted eigenvalues and
/// `z[i]`, if given, the eigenvector of `d[i]`.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [Vec<f64>]>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::Convergence(format!(
                    "implicit QL: eigenvalue {l} of {n} not isolated after {MAX_QL_SWEEPS} sweeps (residual coupling {:e})",
                    e[l]
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    rotate_pair(z, i, c, s);
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
