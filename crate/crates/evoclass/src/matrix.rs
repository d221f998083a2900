//! Dense exact matrices over a runtime-chosen field.
//!
//! Plain row-major storage with Gaussian elimination for rank and inverse.
//! All operations take the owning [`FieldSpec`] explicitly; sizes here are
//! desk-scale (n ≤ a few dozen), so no pivoting heuristics beyond
//! first-nonzero are needed — arithmetic is exact.

use crate::fields::{FieldSpec, Scalar};

pub type Vector = Vec<Scalar>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub n_rows: usize,
    pub n_cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zero(field: &FieldSpec, n_rows: usize, n_cols: usize) -> Self {
        Matrix {
            n_rows,
            n_cols,
            data: vec![field.zero(); n_rows * n_cols],
        }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vector>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Matrix {
            n_rows,
            n_cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(field: &FieldSpec, cols: &[Vector]) -> Self {
        let n_rows = cols.first().map_or(0, |c| c.len());
        let mut m = Self::zero(field, n_rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n_rows, "ragged columns");
            for i in 0..n_rows {
                m.set(i, j, col[i].clone());
            }
        }
        m
    }

    pub fn diagonal(field: &FieldSpec, d: &[Scalar]) -> Self {
        let mut m = Self::zero(field, d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn col(&self, j: usize) -> Vector {
        (0..self.n_rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Scalar]> {
        self.data.chunks_exact(self.n_cols.max(1))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Matrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            data: self.data.clone(),
        };
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                t.data[j * self.n_rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix, field: &FieldSpec) -> Matrix {
        assert_eq!(self.n_cols, rhs.n_rows, "shape mismatch");
        let mut out = Matrix::zero(field, self.n_rows, rhs.n_cols);
        for i in 0..self.n_rows {
            for j in 0..rhs.n_cols {
                let mut acc = field.zero();
                for k in 0..self.n_cols {
                    if field.is_zero(self.get(i, k)) {
                        continue;
                    }
                    acc = field.add(&acc, &field.mul(self.get(i, k), rhs.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar], field: &FieldSpec) -> Vector {
        assert_eq!(self.n_cols, v.len(), "shape mismatch");
        (0..self.n_rows)
            .map(|i| {
                let mut acc = field.zero();
                for k in 0..self.n_cols {
                    acc = field.add(&acc, &field.mul(self.get(i, k), &v[k]));
                }
                acc
            })
            .collect()
    }

    /// `PᵀGP` for `G = self`.
    pub fn congruence(&self, p: &Matrix, field: &FieldSpec) -> Matrix {
        p.transpose().mul(&self.mul(p, field), field)
    }

    pub fn scale(&self, c: &Scalar, field: &FieldSpec) -> Matrix {
        Matrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|x| field.mul(x, c)).collect(),
        }
    }

    pub fn is_symmetric(&self, _field: &FieldSpec) -> bool {
        self.n_rows == self.n_cols
            && (0..self.n_rows)
                .all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_diagonal(&self, field: &FieldSpec) -> bool {
        (0..self.n_rows).all(|i| {
            (0..self.n_cols).all(|j| i == j || field.is_zero(self.get(i, j)))
        })
    }

    pub fn rank(&self, field: &FieldSpec) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.n_cols {
            let Some(pivot) = (rank..m.n_rows).find(|&r| !field.is_zero(m.get(r, c))) else {
                continue;
            };
            m.swap_rows(rank, pivot);
            let inv = field.inv(m.get(rank, c)).expect("pivot nonzero");
            for j in 0..m.n_cols {
                m.set(rank, j, field.mul(m.get(rank, j), &inv));
            }
            for r in 0..m.n_rows {
                if r != rank && !field.is_zero(m.get(r, c)) {
                    let f = m.get(r, c).clone();
                    for j in 0..m.n_cols {
                        let v = field.sub(m.get(r, j), &field.mul(&f, m.get(rank, j)));
                        m.set(r, j, v);
                    }
                }
            }
            rank += 1;
            if rank == m.n_rows {
                break;
            }
        }
        rank
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self, field: &FieldSpec) -> Option<Matrix> {
        assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_rows;
        let mut m = self.clone();
        let mut inv = Matrix::identity(field, n);
        for c in 0..n {
            let pivot = (c..n).find(|&r| !field.is_zero(m.get(r, c)))?;
            m.swap_rows(c, pivot);
            inv.swap_rows(c, pivot);
            let f = field.inv(m.get(c, c)).expect("pivot nonzero");
            for j in 0..n {
                m.set(c, j, field.mul(m.get(c, j), &f));
                inv.set(c, j, field.mul(inv.get(c, j), &f));
            }
            for r in 0..n {
                if r != c && !field.is_zero(m.get(r, c)) {
                    let g = m.get(r, c).clone();
                    for j in 0..n {
                        let mv = field.sub(m.get(r, j), &field.mul(&g, m.get(c, j)));
                        m.set(r, j, mv);
                        let iv = field.sub(inv.get(r, j), &field.mul(&g, inv.get(c, j)));
                        inv.set(r, j, iv);
                    }
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n_cols {
            self.data
                .swap(a * self.n_cols + j, b * self.n_cols + j);
        }
    }

    /// Render with the field's canonical scalar text, row per line.
    pub fn format(&self, field: &FieldSpec) -> String {
        self.rows()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|x| field.format_scalar(x)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Decode the `idx`-th vector of length `len` over a finite field, in
/// lexicographic order (coordinate 0 most significant, elements in
/// enumeration order).
pub fn vector_from_index(field: &FieldSpec, len: usize, mut idx: u64) -> Vector {
    let q = field.order().expect("finite field");
    let mut out = vec![field.zero(); len];
    for k in (0..len).rev() {
        out[k] = field.element_from_index(idx % q);
        idx /= q;
    }
    out
}

pub fn vector_index(field: &FieldSpec, v: &[Scalar]) -> u64 {
    let q = field.order().expect("finite field");
    v.iter().fold(0, |acc, x| acc * q + field.element_index(x))
}

/// Decode the `idx`-th `n×n` matrix (row-major digits, same order).
pub fn matrix_from_index(field: &FieldSpec, n: usize, idx: u64) -> Matrix {
    let flat = vector_from_index(field, n * n, idx);
    Matrix {
        n_rows: n,
        n_cols: n,
        data: flat,
    }
}

pub fn format_vector(field: &FieldSpec, v: &[Scalar]) -> String {
    let cells: Vec<String> = v.iter().map(|x| field.format_scalar(x)).collect();
    format!("({})", cells.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_inverse_over_f3() {
        let f3 = FieldSpec::finite(3, 1).unwrap();
        let m = Matrix::from_rows(vec![
            vec![f3.from_i64(1), f3.from_i64(2)],
            vec![f3.from_i64(2), f3.from_i64(1)],
        ]);
        assert_eq!(m.rank(&f3), 2);
        let inv = m.inverse(&f3).unwrap();
        assert_eq!(m.mul(&inv, &f3), Matrix::identity(&f3, 2));

        let singular = Matrix::from_rows(vec![
            vec![f3.from_i64(1), f3.from_i64(2)],
            vec![f3.from_i64(2), f3.from_i64(1 + 3)],
        ]);
        // rows (1,2),(2,1): independent; make a truly singular one
        let s = Matrix::from_rows(vec![
            vec![f3.from_i64(1), f3.from_i64(2)],
            vec![f3.from_i64(2), f3.from_i64(4)],
        ]);
        assert_eq!(s.rank(&f3), 1);
        assert!(s.inverse(&f3).is_none());
        assert_eq!(singular.rank(&f3), 2);
    }

    #[test]
    fn rational_inverse_exact() {
        let q = FieldSpec::real_closure();
        let m = Matrix::from_rows(vec![
            vec![q.parse_scalar("1/2").unwrap(), q.from_i64(1)],
            vec![q.from_i64(1), q.from_i64(3)],
        ]);
        let inv = m.inverse(&q).unwrap();
        assert_eq!(m.mul(&inv, &q), Matrix::identity(&q, 2));
    }

    #[test]
    fn index_roundtrip() {
        let f4 = FieldSpec::finite(2, 2).unwrap();
        for idx in 0..256u64 {
            let m = matrix_from_index(&f4, 2, idx);
            let back = vector_index(
                &f4,
                &(0..2)
                    .flat_map(|i| m.row(i).to_vec())
                    .collect::<Vec<_>>(),
            );
            assert_eq!(back, idx);
        }
    }

    #[test]
    fn congruence_shape() {
        let q = FieldSpec::real_closure();
        let g = Matrix::diagonal(&q, &[q.from_i64(1), q.from_i64(-1)]);
        let p = Matrix::from_rows(vec![
            vec![q.from_i64(1), q.from_i64(1)],
            vec![q.from_i64(0), q.from_i64(1)],
        ]);
        let c = g.congruence(&p, &q);
        assert!(c.is_symmetric(&q));
    }
}
