//! Small dense row-major matrices and a rank-revealing right pseudo-inverse.

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};

/// Relative rank tolerance on the pivoted-QR diagonal.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Panics on non-conformable shapes.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "non-conformable product");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.data.iter()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Moore–Penrose right inverse `G` of a full-row-rank `h` (`h · G = I`).
///
/// Computed from a column-pivoted Householder QR of `hᵀ`:
/// `hᵀ Π = Q R`, hence `G = Q R⁻ᵀ Πᵀ`. Rows of `h` are users; a pivot whose
/// diagonal falls below `RANK_TOLERANCE` times the first one marks that user
/// as linearly dependent on the others.
pub fn right_pseudo_inverse(h: &Matrix) -> Result<Matrix> {
    let (users, aps) = (h.rows, h.cols);
    if users > aps {
        return Err(Error::Infeasible { users, aps });
    }
    if users == 0 {
        return Ok(Matrix::zeros(aps, 0));
    }

    // working copy of hᵀ, one column per user
    let mut a = h.transpose();
    let mut perm: Vec<usize> = (0..users).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(users);
    let mut first_pivot = 0.0;

    for k in 0..users {
        let col_norm = |a: &Matrix, j: usize| -> f64 {
            (k..aps).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt()
        };
        let (pivot, norm) = (k..users)
            .map(|j| (j, col_norm(&a, j)))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pivot != k {
            for i in 0..aps {
                let tmp = a[(i, k)];
                a[(i, k)] = a[(i, pivot)];
                a[(i, pivot)] = tmp;
            }
            perm.swap(k, pivot);
        }
        if k == 0 {
            first_pivot = norm;
        }
        if !(norm > RANK_TOLERANCE * first_pivot) || first_pivot == 0.0 {
            let user = perm[k];
            return Err(Error::SingularChannel {
                user,
                partner: most_parallel_row(h, user),
            });
        }

        // Householder vector for column k, rows k..aps
        let alpha = if a[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..aps).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..users {
                let dot: f64 = (k..aps).map(|i| v[i - k] * a[(i, j)]).sum();
                let s = 2.0 * dot / vnorm2;
                for i in k..aps {
                    a[(i, j)] -= s * v[i - k];
                }
            }
        }
        reflectors.push(v);
    }
    // later pivots swap whole columns, so R is read only once all are done
    let r = Matrix::from_fn(users, users, |i, j| if j >= i { a[(i, j)] } else { 0.0 });

    // thin Q: apply reflectors in reverse to the first `users` unit columns
    let mut q = Matrix::zeros(aps, users);
    for j in 0..users {
        q[(j, j)] = 1.0;
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in 0..users {
            let dot: f64 = (k..aps).map(|i| v[i - k] * q[(i, j)]).sum();
            let s = 2.0 * dot / vnorm2;
            for i in k..aps {
                q[(i, j)] -= s * v[i - k];
            }
        }
    }

    // Y = R⁻ᵀ by forward substitution on Rᵀ (lower triangular)
    let mut y = Matrix::zeros(users, users);
    for col in 0..users {
        for i in 0..users {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= r[(k, i)] * y[(k, col)];
            }
            y[(i, col)] = s / r[(i, i)];
        }
    }

    let qy = q.mul(&y);
    let mut g = Matrix::zeros(aps, users);
    for (j, &user) in perm.iter().enumerate() {
        for i in 0..aps {
            g[(i, user)] = qy[(i, j)];
        }
    }

    // One refinement step G += G (I - h G). The correction stays in the row
    // space of h, so G remains the minimum-norm inverse; near the rank
    // tolerance it roughly halves the identity residual.
    let mut resid = h.mul(&g).scale(-1.0);
    for i in 0..users {
        resid[(i, i)] += 1.0;
    }
    let delta = g.mul(&resid);
    for (gv, dv) in g.data.iter_mut().zip(&delta.data) {
        *gv += dv;
    }
    Ok(g)
}

fn most_parallel_row(h: &Matrix, user: usize) -> Option<usize> {
    let norm = |i: usize| h.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
    let nu = norm(user);
    if nu == 0.0 {
        return None;
    }
    (0..h.rows)
        .filter(|&v| v != user)
        .map(|v| {
            let nv = norm(v);
            let dot: f64 = h.row(user).iter().zip(h.row(v)).map(|(a, b)| a * b).sum();
            let cos = if nv == 0.0 {
                0.0
            } else {
                (dot / (nu * nv)).abs()
            };
            (v, cos)
        })
        .fold(None, |best: Option<(usize, f64)>, c| match best {
            Some(b) if b.1 >= c.1 => Some(b),
            _ => Some(c),
        })
        .map(|(v, _)| v)
}
