//! Symmetric bilinear forms over the supported fields.
//!
//! Everything an exact classification needs:
//! - congruence diagonalization and the rank/signature/discriminant
//!   invariants that decide isometry over each supported field,
//! - constructive pieces: value representation, isotropic vectors,
//!   hyperbolic pairs, transport of isotropic vectors between isometric
//!   forms (Witt-style), reflection transport of anisotropic vectors,
//! - exhaustive orthogonal groups and orbit partitions over small finite
//!   fields.
//!
//! Diagonal forms may be degenerate; the constructive operations act on the
//! nondegenerate part and keep radical coordinates fixed. Every returned
//! matrix satisfies its defining identity exactly — callers can (and tests
//! do) re-check `θᵀ·G₂·θ = G₁` by multiplication.

use crate::exec;
use crate::fields::{FieldSpec, RationalMode, Scalar, SquareClass};
use crate::matrix::{matrix_from_index, vector_from_index, vector_index, Matrix, Vector};
use crate::Budget;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("forms live over different fields")]
    FieldMismatch,
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("cannot diagonalize a non-diagonal Gram matrix in characteristic 2")]
    NonDiagonalCharTwo,
    #[error("operation requires a nondegenerate form")]
    DegenerateForm,
    #[error("exhaustive search needs {needed} candidates, over the budget {limit}")]
    BudgetExceeded { needed: u64, limit: u64 },
    #[error("operation is not available over {0}")]
    UnsupportedField(String),
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("the two forms are not isometric")]
    NotIsometric,
    #[error("characteristic-two field: hyperbolic pair construction needs 2 invertible")]
    CharacteristicTwo,
    #[error("an isometry exists but no rational witness does (irrational scaling)")]
    RationalWitnessUnavailable,
}

/// A symmetric Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramForm {
    pub field: FieldSpec,
    pub gram: Matrix,
}

impl GramForm {
    pub fn new(field: FieldSpec, gram: Matrix) -> Result<Self, FormError> {
        if gram.n_rows != gram.n_cols || !gram.is_symmetric(&field) {
            return Err(FormError::NotSymmetric);
        }
        Ok(GramForm { field, gram })
    }

    pub fn dim(&self) -> usize {
        self.gram.n_rows
    }
}

/// A form given by its diagonal Gram entries; zeros span the radical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalForm {
    pub field: FieldSpec,
    pub entries: Vec<Scalar>,
}

impl DiagonalForm {
    pub fn new(field: FieldSpec, entries: Vec<Scalar>) -> Self {
        DiagonalForm { field, entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// `vᵀ D v`.
    pub fn evaluate(&self, v: &[Scalar]) -> Scalar {
        let k = &self.field;
        let mut acc = k.zero();
        for (d, x) in self.entries.iter().zip(v) {
            acc = k.add(&acc, &k.mul(d, &k.mul(x, x)));
        }
        acc
    }

    /// `uᵀ D v`.
    pub fn pair(&self, u: &[Scalar], v: &[Scalar]) -> Scalar {
        let k = &self.field;
        let mut acc = k.zero();
        for ((d, x), y) in self.entries.iter().zip(u).zip(v) {
            acc = k.add(&acc, &k.mul(d, &k.mul(x, y)));
        }
        acc
    }

    pub fn gram(&self) -> Matrix {
        Matrix::diagonal(&self.field, &self.entries)
    }

    pub fn rank(&self) -> usize {
        self.entries
            .iter()
            .filter(|d| !self.field.is_zero(d))
            .count()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rank() == self.dim()
    }
}

/// Complete isometry invariants for the field the form lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormInvariants {
    pub dim: usize,
    pub rank: usize,
    pub detail: InvariantDetail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvariantDetail {
    /// Quadratically closed mode and perfect characteristic-2 fields.
    RankOnly,
    /// Real-closure mode: inertia of the nondegenerate part.
    Signature { pos: usize, neg: usize },
    /// Finite fields of odd order: square class of the product of the
    /// nonzero diagonal entries (`[1]` for rank 0).
    Discriminant(SquareClass),
}

impl std::fmt::Display for InvariantDetail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InvariantDetail::RankOnly => write!(f, "rank-only"),
            InvariantDetail::Signature { pos, neg } => write!(f, "signature ({pos}, {neg})"),
            InvariantDetail::Discriminant(c) => write!(f, "discriminant {c}"),
        }
    }
}

/// An isometry witness: `matrix ᵀ · G₂ · matrix = G₁` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isometry {
    pub matrix: Matrix,
}

/// Outcome of an isotropic-vector search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsotropicSearch {
    /// The nondegenerate part has no nonzero isotropic vector.
    None,
    /// An explicit vector, exact: `wᵀDw = 0`.
    Found(Vector),
    /// One exists over the target closure, but no witness with rational
    /// coordinates could be built (rational modes only).
    ExistsUnconstructed,
}

/// One orbit of the orthogonal group acting on a vector set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    /// Lexicographically least member (element enumeration order).
    pub representative: Vector,
    pub members: Vec<Vector>,
}

/// Decision (and, when constructible, a witness) for form isometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsometryDecision {
    NotIsometric,
    Isometric(Option<Isometry>),
}

/// Indices spanning the radical: exactly the zero diagonal entries.
pub fn radical_indices(d: &DiagonalForm) -> Vec<usize> {
    d.entries
        .iter()
        .enumerate()
        .filter(|(_, x)| d.field.is_zero(x))
        .map(|(i, _)| i)
        .collect()
}

fn nondeg_indices(d: &DiagonalForm) -> Vec<usize> {
    d.entries
        .iter()
        .enumerate()
        .filter(|(_, x)| !d.field.is_zero(x))
        .map(|(i, _)| i)
        .collect()
}

fn restrict(d: &DiagonalForm, idxs: &[usize]) -> DiagonalForm {
    DiagonalForm::new(
        d.field,
        idxs.iter().map(|&i| d.entries[i].clone()).collect(),
    )
}

fn embed_vector(field: &FieldSpec, dim: usize, idxs: &[usize], v: &[Scalar]) -> Vector {
    let mut out = vec![field.zero(); dim];
    for (&i, x) in idxs.iter().zip(v) {
        out[i] = x.clone();
    }
    out
}

/// Congruence-diagonalize a symmetric Gram matrix: returns `(P, D)` with
/// `PᵀGP = diag(D)` exactly. In characteristic 2 only diagonal inputs are
/// accepted (natural bases arrive pre-diagonalized).
pub fn diagonalize(g: &GramForm) -> Result<(Matrix, DiagonalForm), FormError> {
    let k = &g.field;
    let n = g.dim();
    if g.gram.is_diagonal(k) {
        let d = (0..n).map(|i| g.gram.get(i, i).clone()).collect();
        return Ok((Matrix::identity(k, n), DiagonalForm::new(*k, d)));
    }
    if k.characteristic() == 2 {
        return Err(FormError::NonDiagonalCharTwo);
    }
    let mut m = g.gram.clone();
    let mut p = Matrix::identity(k, n);
    let apply = |m: &mut Matrix, p: &mut Matrix, e: &Matrix, k: &FieldSpec| {
        *m = e.transpose().mul(&m.mul(e, k), k);
        *p = p.mul(e, k);
    };
    for col in 0..n {
        if k.is_zero(m.get(col, col)) {
            if let Some(j) = (col + 1..n).find(|&j| !k.is_zero(m.get(j, j))) {
                let mut e = Matrix::identity(k, n);
                e.set(col, col, k.zero());
                e.set(j, j, k.zero());
                e.set(col, j, k.one());
                e.set(j, col, k.one());
                apply(&mut m, &mut p, &e, k);
            } else {
                // All remaining diagonal entries vanish; dig up an
                // off-diagonal pivot and fold it onto the diagonal.
                let mut found = None;
                'search: for i in col..n {
                    for j in i + 1..n {
                        if !k.is_zero(m.get(i, j)) {
                            found = Some((i, j));
                            break 'search;
                        }
                    }
                }
                let Some((i, j)) = found else {
                    break; // zero block: done
                };
                let mut e = Matrix::identity(k, n);
                e.set(j, i, k.one()); // e_i <- e_i + e_j, so M[i][i] becomes 2·M[i][j]
                apply(&mut m, &mut p, &e, k);
                if i != col {
                    let mut s = Matrix::identity(k, n);
                    s.set(col, col, k.zero());
                    s.set(i, i, k.zero());
                    s.set(col, i, k.one());
                    s.set(i, col, k.one());
                    apply(&mut m, &mut p, &s, k);
                }
            }
        }
        let pivot = m.get(col, col).clone();
        if k.is_zero(&pivot) {
            continue;
        }
        for j in col + 1..n {
            if !k.is_zero(m.get(col, j)) {
                let f = k.div(m.get(col, j), &pivot).expect("pivot nonzero");
                let mut e = Matrix::identity(k, n);
                e.set(col, j, k.neg(&f));
                apply(&mut m, &mut p, &e, k);
            }
        }
    }
    let d: Vec<Scalar> = (0..n).map(|i| m.get(i, i).clone()).collect();
    debug_assert!(m.is_diagonal(k));
    debug_assert_eq!(g.gram.congruence(&p, k), Matrix::diagonal(k, &d));
    Ok((p, DiagonalForm::new(*k, d)))
}

/// Rank plus the field-appropriate complete invariant of the nondegenerate
/// part (signature / discriminant / nothing further).
pub fn form_invariants(d: &DiagonalForm) -> FormInvariants {
    let k = &d.field;
    let nonzero: Vec<&Scalar> = d.entries.iter().filter(|x| !k.is_zero(x)).collect();
    let rank = nonzero.len();
    let detail = match k.rational_mode() {
        Some(RationalMode::RealClosure) => {
            let pos = nonzero
                .iter()
                .filter(|x| k.square_class(x) == SquareClass::Positive)
                .count();
            InvariantDetail::Signature {
                pos,
                neg: rank - pos,
            }
        }
        Some(RationalMode::QuadraticClosure) => InvariantDetail::RankOnly,
        None if k.characteristic() == 2 => InvariantDetail::RankOnly,
        None => {
            let prod = nonzero.iter().fold(k.one(), |acc, x| k.mul(&acc, x));
            InvariantDetail::Discriminant(k.square_class(&prod))
        }
    };
    FormInvariants {
        dim: d.dim(),
        rank,
        detail,
    }
}

/// Complete isometry decision over the supported fields.
pub fn isometric(d1: &DiagonalForm, d2: &DiagonalForm) -> Result<bool, FormError> {
    if d1.field != d2.field {
        return Err(FormError::FieldMismatch);
    }
    Ok(form_invariants(d1) == form_invariants(d2))
}

/// A vector of the nondegenerate part with `vᵀDv = c`, first in enumeration
/// order; `None` when the value is not represented. Finite fields only.
pub fn represent_value(
    d: &DiagonalForm,
    c: &Scalar,
    budget: &Budget,
) -> Result<Option<Vector>, FormError> {
    let k = d.field;
    if k.is_zero(c) {
        return Ok(Some(vec![k.zero(); d.dim()]));
    }
    let Some(q) = k.order() else {
        return Err(FormError::UnsupportedField(k.describe()));
    };
    let idxs = nondeg_indices(d);
    let sub = restrict(d, &idxs);
    let m = idxs.len() as u32;
    let total = q
        .checked_pow(m)
        .filter(|&t| t <= budget.scan_limit)
        .ok_or(FormError::BudgetExceeded {
            needed: q.saturating_pow(m),
            limit: budget.scan_limit,
        })?;
    let hit = exec::scan_first(total, |i| {
        let v = vector_from_index(&k, m as usize, i);
        (sub.evaluate(&v) == *c).then_some(v)
    });
    Ok(hit.map(|v| embed_vector(&k, d.dim(), &idxs, &v)))
}

/// Search for a nonzero isotropic vector in the nondegenerate part.
pub fn find_isotropic(d: &DiagonalForm, budget: &Budget) -> Result<IsotropicSearch, FormError> {
    let k = d.field;
    let idxs = nondeg_indices(d);
    let sub = restrict(d, &idxs);
    let m = idxs.len();
    if k.is_finite() {
        let q = k.order().unwrap();
        let total = q
            .checked_pow(m as u32)
            .filter(|&t| t <= budget.scan_limit)
            .ok_or(FormError::BudgetExceeded {
                needed: q.saturating_pow(m as u32),
                limit: budget.scan_limit,
            })?;
        let hit = exec::scan_first(total, |i| {
            if i == 0 {
                return None; // zero vector
            }
            let v = vector_from_index(&k, m, i);
            k.is_zero(&sub.evaluate(&v)).then_some(v)
        });
        return Ok(match hit {
            Some(v) => IsotropicSearch::Found(embed_vector(&k, d.dim(), &idxs, &v)),
            None => IsotropicSearch::None,
        });
    }
    let mode = k.rational_mode().expect("rational");
    let exists = match mode {
        RationalMode::RealClosure => {
            let inv = form_invariants(&sub);
            matches!(inv.detail, InvariantDetail::Signature { pos, neg } if pos > 0 && neg > 0)
        }
        RationalMode::QuadraticClosure => m >= 2,
    };
    if !exists {
        return Ok(IsotropicSearch::None);
    }
    // Witness attempt: w = e_i + s·e_j needs s = sqrt(-d_i/d_j) rational.
    for i in 0..m {
        for j in i + 1..m {
            let ratio = k
                .div(&k.neg(&sub.entries[i]), &sub.entries[j])
                .expect("nondegenerate");
            if let Some(s) = k.sqrt(&ratio) {
                let mut v = vec![k.zero(); m];
                v[i] = k.one();
                v[j] = s;
                debug_assert!(k.is_zero(&sub.evaluate(&v)));
                return Ok(IsotropicSearch::Found(embed_vector(&k, d.dim(), &idxs, &v)));
            }
        }
    }
    Ok(IsotropicSearch::ExistsUnconstructed)
}

fn check_in_nondeg_part(d: &DiagonalForm, w: &[Scalar]) -> Result<(), FormError> {
    let k = &d.field;
    if w.len() != d.dim() {
        return Err(FormError::InvalidVector("dimension mismatch".into()));
    }
    if w.iter().all(|x| k.is_zero(x)) {
        return Err(FormError::InvalidVector("zero vector".into()));
    }
    for (i, x) in w.iter().enumerate() {
        if k.is_zero(&d.entries[i]) && !k.is_zero(x) {
            return Err(FormError::InvalidVector(
                "vector meets the radical".into(),
            ));
        }
    }
    Ok(())
}

/// Complete `w` to a hyperbolic pair: returns `w′` with `⟨w,w′⟩ = 1` and
/// `⟨w′,w′⟩ = 0`. Characteristic ≠ 2; `w` nonzero isotropic in the
/// nondegenerate part.
pub fn hyperbolic_pair(d: &DiagonalForm, w: &[Scalar]) -> Result<Vector, FormError> {
    let k = d.field;
    if k.characteristic() == 2 {
        return Err(FormError::CharacteristicTwo);
    }
    check_in_nondeg_part(d, w)?;
    if !k.is_zero(&d.evaluate(w)) {
        return Err(FormError::InvalidVector("vector is anisotropic".into()));
    }
    // Any basis vector of the nondegenerate part that pairs nontrivially
    // against w will do: <w, e_i> = d_i·w_i.
    let i = (0..d.dim())
        .find(|&i| !k.is_zero(&k.mul(&d.entries[i], &w[i])))
        .expect("w nonzero in the nondegenerate part");
    let pairing = k.mul(&d.entries[i], &w[i]);
    let mut u = vec![k.zero(); d.dim()];
    u[i] = k.inv(&pairing).expect("nonzero");
    // w' = u - (q(u)/2)·w
    let half = k.inv(&k.from_i64(2)).expect("char != 2");
    let coeff = k.mul(&d.evaluate(&u), &half);
    let wp: Vector = (0..d.dim())
        .map(|t| k.sub(&u[t], &k.mul(&coeff, &w[t])))
        .collect();
    debug_assert!(k.is_one(&d.pair(w, &wp)));
    debug_assert!(k.is_zero(&d.evaluate(&wp)));
    Ok(wp)
}

/// Reflection in `z`: `x ↦ x − (2⟨x,z⟩/q(z))·z`, as a matrix.
fn reflection(d: &DiagonalForm, z: &[Scalar]) -> Matrix {
    let k = &d.field;
    let n = d.dim();
    let qz = d.evaluate(z);
    let factor = k
        .div(&k.from_i64(2), &qz)
        .expect("reflection axis is anisotropic");
    let mut m = Matrix::identity(k, n);
    for i in 0..n {
        for j in 0..n {
            // subtract factor·z_i·d_j·z_j from entry (i, j)
            let t = k.mul(&factor, &k.mul(&z[i], &k.mul(&d.entries[j], &z[j])));
            m.set(i, j, k.sub(m.get(i, j), &t));
        }
    }
    m
}

/// An isometry of `d` (nondegenerate, char ≠ 2) mapping `u` to `w`, where
/// `q(u) = q(w) ≠ 0`: one or two reflections.
fn point_isometry_reflect(d: &DiagonalForm, u: &[Scalar], w: &[Scalar]) -> Matrix {
    let k = &d.field;
    debug_assert_eq!(d.evaluate(u), d.evaluate(w));
    let diff: Vector = u.iter().zip(w).map(|(a, b)| k.sub(a, b)).collect();
    if !k.is_zero(&d.evaluate(&diff)) {
        return reflection(d, &diff);
    }
    let sum: Vector = u.iter().zip(w).map(|(a, b)| k.add(a, b)).collect();
    // q(u−w) + q(u+w) = 4·q(u) ≠ 0, so the sum works when the difference fails.
    reflection(d, w).mul(&reflection(d, &sum), k)
}

/// An isometry of the nondegenerate `d` mapping `u` to `w` with
/// `q(u) = q(w) ≠ 0`. Char ≠ 2 uses reflections; char 2 searches the
/// orthogonal group exhaustively.
pub fn point_isometry(
    d: &DiagonalForm,
    u: &[Scalar],
    w: &[Scalar],
    budget: &Budget,
) -> Result<Option<Matrix>, FormError> {
    let k = d.field;
    if d.evaluate(u) != d.evaluate(w) || k.is_zero(&d.evaluate(u)) {
        return Err(FormError::InvalidVector(
            "point transport needs equal nonzero values".into(),
        ));
    }
    if k.characteristic() != 2 {
        let m = point_isometry_reflect(d, u, w);
        debug_assert_eq!(m.mul_vec(u, &k), w.to_vec());
        return Ok(Some(m));
    }
    let n = d.dim();
    let q = k.order().unwrap();
    let total = q
        .checked_pow((n * n) as u32)
        .filter(|&t| t <= budget.scan_limit)
        .ok_or(FormError::BudgetExceeded {
            needed: q.saturating_pow((n * n) as u32),
            limit: budget.scan_limit,
        })?;
    let gram = d.gram();
    let hit = exec::scan_first(total, |i| {
        let m = matrix_from_index(&k, n, i);
        (is_form_preserving(&m, d, d) && m.mul_vec(u, &k) == w)
            .then_some(m)
    });
    let _ = gram;
    Ok(hit)
}

fn is_form_preserving(m: &Matrix, d_src: &DiagonalForm, d_tgt: &DiagonalForm) -> bool {
    // mᵀ·D_tgt·m = D_src, column by column with early exit.
    let k = &d_src.field;
    let n = m.n_cols;
    for i in 0..n {
        for j in i..n {
            let mut acc = k.zero();
            for t in 0..n {
                acc = k.add(
                    &acc,
                    &k.mul(&d_tgt.entries[t], &k.mul(m.get(t, i), m.get(t, j))),
                );
            }
            let want = if i == j {
                d_src.entries[i].clone()
            } else {
                k.zero()
            };
            if acc != want {
                return false;
            }
        }
    }
    true
}

/// All isometries of a nondegenerate form over a small finite field, in
/// deterministic (index) order.
pub fn orthogonal_group(d: &DiagonalForm, budget: &Budget) -> Result<Vec<Isometry>, FormError> {
    let k = d.field;
    let Some(q) = k.order() else {
        return Err(FormError::UnsupportedField(k.describe()));
    };
    if !d.is_nondegenerate() {
        return Err(FormError::DegenerateForm);
    }
    let n = d.dim();
    let total = q
        .checked_pow((n * n) as u32)
        .filter(|&t| t <= budget.scan_limit)
        .ok_or(FormError::BudgetExceeded {
            needed: q.saturating_pow((n * n) as u32),
            limit: budget.scan_limit,
        })?;
    Ok(exec::scan_collect(total, |i| {
        let m = matrix_from_index(&k, n, i);
        is_form_preserving(&m, d, d).then_some(Isometry { matrix: m })
    }))
}

/// Orbits of the orthogonal group on `{v ≠ 0 : q(v) = c}`. With
/// `projective`, orbits are additionally merged under nonzero scalings
/// (only meaningful for `c = 0`).
pub fn value_orbits(
    d: &DiagonalForm,
    c: &Scalar,
    projective: bool,
    budget: &Budget,
) -> Result<Vec<Orbit>, FormError> {
    let k = d.field;
    assert!(
        !projective || k.is_zero(c),
        "projective orbits need an isotropic value set"
    );
    let group = orthogonal_group(d, budget)?;
    let n = d.dim();
    let q = k.order().unwrap();
    let total = q
        .checked_pow(n as u32)
        .filter(|&t| t <= budget.scan_limit)
        .ok_or(FormError::BudgetExceeded {
            needed: q.saturating_pow(n as u32),
            limit: budget.scan_limit,
        })?;
    let scalars: Vec<Scalar> = if projective {
        k.elements()
            .unwrap()
            .into_iter()
            .filter(|s| !k.is_zero(s))
            .collect()
    } else {
        Vec::new()
    };
    let mut visited = vec![false; total as usize];
    let mut orbits = Vec::new();
    for seed in 1..total {
        if visited[seed as usize] {
            continue;
        }
        let v = vector_from_index(&k, n, seed);
        if d.evaluate(&v) != *c {
            continue;
        }
        let mut member_idx = vec![seed];
        visited[seed as usize] = true;
        let mut frontier = vec![v];
        while let Some(u) = frontier.pop() {
            let mut images: Vec<Vector> = group
                .iter()
                .map(|g| g.matrix.mul_vec(&u, &k))
                .collect();
            for s in &scalars {
                images.push(u.iter().map(|x| k.mul(s, x)).collect());
            }
            for img in images {
                let idx = vector_index(&k, &img);
                if !visited[idx as usize] {
                    visited[idx as usize] = true;
                    member_idx.push(idx);
                    frontier.push(img);
                }
            }
        }
        member_idx.sort_unstable();
        let members: Vec<Vector> = member_idx
            .iter()
            .map(|&i| vector_from_index(&k, n, i))
            .collect();
        orbits.push(Orbit {
            representative: members[0].clone(),
            members,
        });
    }
    Ok(orbits)
}

/// Orbits of the orthogonal group on the nonzero isotropic vectors.
pub fn isotropic_orbits(d: &DiagonalForm, budget: &Budget) -> Result<Vec<Orbit>, FormError> {
    let zero = d.field.zero();
    value_orbits(d, &zero, false, budget)
}

/// Canonical diagonal shape of a nondegenerate form, with a change-of-basis
/// witness `T` satisfying `Tᵀ·D·T = diag(canon)` when one exists over the
/// coefficient field (always, for finite fields).
#[derive(Debug, Clone)]
pub struct Canonicalization {
    pub canon: Vec<Scalar>,
    pub witness: Option<Matrix>,
}

/// Canonical shapes: `diag(1,…,1,δ)`, `δ ∈ {1, ω}` over finite odd fields;
/// all-ones over perfect char-2 fields and in quadratic-closure mode;
/// `diag(1,…,1,−1,…,−1)` in real-closure mode.
pub fn canonicalize(d: &DiagonalForm, budget: &Budget) -> Result<Canonicalization, FormError> {
    let k = d.field;
    if !d.is_nondegenerate() {
        return Err(FormError::DegenerateForm);
    }
    let m = d.dim();
    match k.rational_mode() {
        Some(RationalMode::RealClosure) => {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by_key(|&i| k.square_class(&d.entries[i]) != SquareClass::Positive);
            let canon: Vec<Scalar> = order
                .iter()
                .map(|&i| {
                    if k.square_class(&d.entries[i]) == SquareClass::Positive {
                        k.one()
                    } else {
                        k.from_i64(-1)
                    }
                })
                .collect();
            // T: e'_j = (1/sqrt|d_{order[j]}|)·e_{order[j]}
            let mut witness = Some(Matrix::zero(&k, m, m));
            for (j, &i) in order.iter().enumerate() {
                let abs = if k.square_class(&d.entries[i]) == SquareClass::Positive {
                    d.entries[i].clone()
                } else {
                    k.neg(&d.entries[i])
                };
                match k.sqrt(&k.inv(&abs).unwrap()) {
                    Some(s) => {
                        if let Some(w) = witness.as_mut() {
                            w.set(i, j, s);
                        }
                    }
                    None => witness = None,
                }
            }
            Ok(Canonicalization { canon, witness })
        }
        Some(RationalMode::QuadraticClosure) => {
            let canon = vec![k.one(); m];
            let mut witness = Some(Matrix::zero(&k, m, m));
            for i in 0..m {
                match k.sqrt(&k.inv(&d.entries[i]).unwrap()) {
                    Some(s) => {
                        if let Some(w) = witness.as_mut() {
                            w.set(i, i, s);
                        }
                    }
                    None => witness = None,
                }
            }
            Ok(Canonicalization { canon, witness })
        }
        None if k.characteristic() == 2 => {
            // Perfect: scale each axis by 1/sqrt(d_i).
            let mut t = Matrix::zero(&k, m, m);
            for i in 0..m {
                let s = k
                    .sqrt(&k.inv(&d.entries[i]).unwrap())
                    .expect("perfect field");
                t.set(i, i, s);
            }
            Ok(Canonicalization {
                canon: vec![k.one(); m],
                witness: Some(t),
            })
        }
        None => canonicalize_finite_odd(d, budget),
    }
}

fn canonicalize_finite_odd(
    d: &DiagonalForm,
    budget: &Budget,
) -> Result<Canonicalization, FormError> {
    let k = d.field;
    let m = d.dim();
    if m == 0 {
        return Ok(Canonicalization {
            canon: vec![],
            witness: Some(Matrix::identity(&k, 0)),
        });
    }
    if m == 1 {
        let d0 = &d.entries[0];
        let (target, scale_sq) = match k.square_class(d0) {
            SquareClass::Square => (k.one(), d0.clone()),
            _ => {
                let w = k.nonsquare_unit().expect("odd finite field");
                (w.clone(), k.div(d0, &w).unwrap())
            }
        };
        // d0 = target·s²; column (1/s) rescales to target.
        let s = k.sqrt(&scale_sq).expect("square by construction");
        let mut t = Matrix::zero(&k, 1, 1);
        t.set(0, 0, k.inv(&s).unwrap());
        return Ok(Canonicalization {
            canon: vec![target],
            witness: Some(t),
        });
    }
    // Nondegenerate forms of rank ≥ 2 over finite fields are universal:
    // split off a vector of norm 1 and recurse on its complement.
    let v = represent_value(d, &k.one(), budget)?
        .expect("rank ≥ 2 forms over finite fields represent every value");
    // Project the standard basis onto v-perp: u_i = e_i − <e_i, v>·v.
    let mut candidates: Vec<Vector> = Vec::with_capacity(m);
    for i in 0..m {
        let pairing = k.mul(&d.entries[i], &v[i]); // <e_i, v>
        let u: Vector = (0..m)
            .map(|t| {
                let sub = k.mul(&pairing, &v[t]);
                if t == i {
                    k.sub(&k.one(), &sub)
                } else {
                    k.neg(&sub)
                }
            })
            .collect();
        candidates.push(u);
    }
    // Select m−1 independent ones, in order.
    let mut basis: Vec<Vector> = Vec::with_capacity(m - 1);
    for u in candidates {
        if basis.len() == m - 1 {
            break;
        }
        let mut probe = basis.clone();
        probe.push(u.clone());
        let mat = Matrix::from_cols(&k, &probe);
        if mat.rank(&k) == probe.len() {
            basis.push(u);
        }
    }
    debug_assert_eq!(basis.len(), m - 1);
    let u_mat = Matrix::from_cols(&k, &basis);
    let b = d.gram().congruence(&u_mat, &k); // Gram of the complement
    let (p, delta) = diagonalize(&GramForm::new(k, b).expect("symmetric"))?;
    let tail = canonicalize_finite_odd(&delta, budget)?;
    let tail_w = tail.witness.expect("finite fields always have witnesses");
    // Assemble T = [v | U·P·T'].
    let rest = u_mat.mul(&p.mul(&tail_w, &k), &k);
    let mut t = Matrix::zero(&k, m, m);
    for i in 0..m {
        t.set(i, 0, v[i].clone());
        for j in 0..m - 1 {
            t.set(i, j + 1, rest.get(i, j).clone());
        }
    }
    let mut canon = vec![k.one()];
    canon.extend(tail.canon);
    debug_assert_eq!(
        d.gram().congruence(&t, &k),
        Matrix::diagonal(&k, &canon)
    );
    Ok(Canonicalization { canon, witness: Some(t) })
}

/// Decide isometry and, when possible over the coefficient field, produce a
/// witness (always over finite fields; over rational modes only when the
/// needed square roots are rational). Degenerate forms are handled by
/// matching radical coordinates in index order.
pub fn isometry_between(
    d1: &DiagonalForm,
    d2: &DiagonalForm,
    budget: &Budget,
) -> Result<IsometryDecision, FormError> {
    if !isometric(d1, d2)? {
        return Ok(IsometryDecision::NotIsometric);
    }
    let k = d1.field;
    let n = d1.dim();
    let (r1, n1) = (radical_indices(d1), nondeg_indices(d1));
    let (r2, n2) = (radical_indices(d2), nondeg_indices(d2));
    let c1 = canonicalize(&restrict(d1, &n1), budget)?;
    let c2 = canonicalize(&restrict(d2, &n2), budget)?;
    debug_assert_eq!(c1.canon, c2.canon);
    let (Some(t1), Some(t2)) = (c1.witness, c2.witness) else {
        return Ok(IsometryDecision::Isometric(None));
    };
    let theta_nd = t2.mul(&t1.inverse(&k).expect("invertible"), &k);
    let mut theta = Matrix::zero(&k, n, n);
    for (a, b) in r1.iter().zip(&r2) {
        theta.set(*b, *a, k.one());
    }
    for (bi, &row) in n2.iter().enumerate() {
        for (aj, &col) in n1.iter().enumerate() {
            theta.set(row, col, theta_nd.get(bi, aj).clone());
        }
    }
    debug_assert_eq!(d1.gram(), d2.gram().congruence(&theta, &k));
    Ok(IsometryDecision::Isometric(Some(Isometry { matrix: theta })))
}

/// Transport one isotropic vector to another: an isometry `θ` with
/// `θᵀD₂θ = D₁` and `θ·w1 = w2`, exactly.
///
/// `Ok(None)` means no such isometry exists (possible only in
/// characteristic 2, where isotropic orbits can be proper subsets);
/// [`FormError::RationalWitnessUnavailable`] signals a decision-only
/// answer over the rational modes.
pub fn transporter(
    d1: &DiagonalForm,
    w1: &[Scalar],
    d2: &DiagonalForm,
    w2: &[Scalar],
    budget: &Budget,
) -> Result<Option<Isometry>, FormError> {
    if d1.field != d2.field {
        return Err(FormError::FieldMismatch);
    }
    let k = d1.field;
    check_in_nondeg_part(d1, w1)?;
    check_in_nondeg_part(d2, w2)?;
    if !k.is_zero(&d1.evaluate(w1)) || !k.is_zero(&d2.evaluate(w2)) {
        return Err(FormError::InvalidVector("vector is anisotropic".into()));
    }
    if !isometric(d1, d2)? {
        return Err(FormError::NotIsometric);
    }
    if d1 == d2 && w1 == w2 {
        return Ok(Some(Isometry {
            matrix: Matrix::identity(&k, d1.dim()),
        }));
    }
    let n = d1.dim();
    let (rad1, nd1) = (radical_indices(d1), nondeg_indices(d1));
    let (rad2, nd2) = (radical_indices(d2), nondeg_indices(d2));
    let e1 = restrict(d1, &nd1);
    let e2 = restrict(d2, &nd2);
    let u1: Vector = nd1.iter().map(|&i| w1[i].clone()).collect();
    let u2: Vector = nd2.iter().map(|&i| w2[i].clone()).collect();
    let m = nd1.len();

    let theta_nd: Option<Matrix> = if k.characteristic() == 2 {
        let q = k.order().unwrap();
        let total = q
            .checked_pow((m * m) as u32)
            .filter(|&t| t <= budget.scan_limit)
            .ok_or(FormError::BudgetExceeded {
                needed: q.saturating_pow((m * m) as u32),
                limit: budget.scan_limit,
            })?;
        exec::scan_first(total, |i| {
            let cand = matrix_from_index(&k, m, i);
            (is_form_preserving(&cand, &e1, &e2) && cand.mul_vec(&u1, &k) == u2)
                .then_some(cand)
        })
    } else {
        // Hyperbolic frames around each vector, then any isometry between
        // the frame complements, assembled as A₂·A₁⁻¹.
        let w1p = hyperbolic_pair(&e1, &u1)?;
        let w2p = hyperbolic_pair(&e2, &u2)?;
        let frame = |e: &DiagonalForm, u: &Vector, up: &Vector| -> Result<Matrix, FormError> {
            if m == 2 {
                return Ok(Matrix::from_cols(&k, &[u.clone(), up.clone()]));
            }
            // Complement: kernel of the two pairing functionals.
            let rows = vec![
                (0..m).map(|t| k.mul(&e.entries[t], &u[t])).collect::<Vector>(),
                (0..m).map(|t| k.mul(&e.entries[t], &up[t])).collect::<Vector>(),
            ];
            let h = kernel_basis(&k, &Matrix::from_rows(rows));
            debug_assert_eq!(h.len(), m - 2);
            let u_mat = Matrix::from_cols(&k, &h);
            let b = e.gram().congruence(&u_mat, &k);
            let (p, delta) = diagonalize(&GramForm::new(k, b)?)?;
            let canon = canonicalize(&delta, budget)?;
            let Some(tw) = canon.witness else {
                return Err(FormError::RationalWitnessUnavailable);
            };
            let rest = u_mat.mul(&p.mul(&tw, &k), &k);
            let mut a = Matrix::zero(&k, m, m);
            for i in 0..m {
                a.set(i, 0, u[i].clone());
                a.set(i, 1, up[i].clone());
                for j in 0..m - 2 {
                    a.set(i, j + 2, rest.get(i, j).clone());
                }
            }
            Ok(a)
        };
        let a1 = frame(&e1, &u1, &w1p)?;
        let a2 = frame(&e2, &u2, &w2p)?;
        // A_iᵀ·E_i·A_i agree (hyperbolic block ⊕ common canonical form).
        debug_assert_eq!(
            e1.gram().congruence(&a1, &k),
            e2.gram().congruence(&a2, &k)
        );
        Some(a2.mul(&a1.inverse(&k).expect("frame invertible"), &k))
    };
    let Some(theta_nd) = theta_nd else {
        return Ok(None);
    };
    let mut theta = Matrix::zero(&k, n, n);
    for (a, b) in rad1.iter().zip(&rad2) {
        theta.set(*b, *a, k.one());
    }
    for (bi, &row) in nd2.iter().enumerate() {
        for (aj, &col) in nd1.iter().enumerate() {
            theta.set(row, col, theta_nd.get(bi, aj).clone());
        }
    }
    debug_assert_eq!(d1.gram(), d2.gram().congruence(&theta, &k));
    debug_assert_eq!(theta.mul_vec(w1, &k), w2.to_vec());
    Ok(Some(Isometry { matrix: theta }))
}

/// Basis of the kernel of a full-row-rank system, deterministic
/// (free variables in ascending index order).
fn kernel_basis(k: &FieldSpec, m: &Matrix) -> Vec<Vector> {
    let mut a = m.clone();
    let (rows, cols) = (a.n_rows, a.n_cols);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !k.is_zero(a.get(r, c))) else {
            continue;
        };
        for j in 0..cols {
            let (x, y) = (a.get(rank, j).clone(), a.get(p, j).clone());
            a.set(rank, j, y);
            a.set(p, j, x);
        }
        let inv = k.inv(a.get(rank, c)).unwrap();
        for j in 0..cols {
            a.set(rank, j, k.mul(a.get(rank, j), &inv));
        }
        for r in 0..rows {
            if r != rank && !k.is_zero(a.get(r, c)) {
                let f = a.get(r, c).clone();
                for j in 0..cols {
                    let v = k.sub(a.get(r, j), &k.mul(&f, a.get(rank, j)));
                    a.set(r, j, v);
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![k.zero(); cols];
        v[free] = k.one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = k.neg(a.get(r, free));
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::default()
    }

    fn f(spec: &FieldSpec, vals: &[i64]) -> DiagonalForm {
        DiagonalForm::new(*spec, vals.iter().map(|&v| spec.from_i64(v)).collect())
    }

    fn f9() -> FieldSpec {
        FieldSpec::finite(3, 2).unwrap()
    }

    fn f4() -> FieldSpec {
        FieldSpec::finite(2, 2).unwrap()
    }

    fn f3() -> FieldSpec {
        FieldSpec::finite(3, 1).unwrap()
    }

    #[test]
    fn radical_examples() {
        let q = FieldSpec::real_closure();
        assert_eq!(radical_indices(&f(&q, &[0, 1, -1])), vec![0]);
        let k = f9();
        assert_eq!(radical_indices(&f(&k, &[1, 1, 1])), Vec::<usize>::new());
        assert_eq!(radical_indices(&f(&k, &[0, 0, 1])), vec![0, 1]);
    }

    #[test]
    fn diagonalize_hyperbolic_plane() {
        let q = FieldSpec::real_closure();
        let g = GramForm::new(
            q,
            Matrix::from_rows(vec![
                vec![q.from_i64(0), q.from_i64(1)],
                vec![q.from_i64(1), q.from_i64(0)],
            ]),
        )
        .unwrap();
        let (p, d) = diagonalize(&g).unwrap();
        assert_eq!(g.gram.congruence(&p, &q), d.gram());
        assert_eq!(d.rank(), 2);
        assert_eq!(
            d.entries,
            vec![q.from_i64(2), q.parse_scalar("-1/2").unwrap()]
        );
    }

    #[test]
    fn diagonalize_trivial_cases() {
        let q = FieldSpec::real_closure();
        let g = GramForm::new(q, Matrix::diagonal(&q, &[q.from_i64(3), q.from_i64(0)])).unwrap();
        let (p, d) = diagonalize(&g).unwrap();
        assert_eq!(p, Matrix::identity(&q, 2));
        assert_eq!(d.entries, vec![q.from_i64(3), q.from_i64(0)]);

        let z = GramForm::new(q, Matrix::zero(&q, 2, 2)).unwrap();
        let (_, d) = diagonalize(&z).unwrap();
        assert_eq!(d.rank(), 0);

        let k = f4();
        let nondiag = GramForm::new(
            k,
            Matrix::from_rows(vec![
                vec![k.zero(), k.one()],
                vec![k.one(), k.zero()],
            ]),
        )
        .unwrap();
        assert_eq!(diagonalize(&nondiag), Err(FormError::NonDiagonalCharTwo));
    }

    #[test]
    fn invariants_examples() {
        let q = FieldSpec::real_closure();
        let inv = form_invariants(&f(&q, &[1, 1, -1]));
        assert_eq!(inv.rank, 3);
        assert_eq!(inv.detail, InvariantDetail::Signature { pos: 2, neg: 1 });

        let k = f9();
        let w = k.nonsquare_unit().unwrap();
        let d = DiagonalForm::new(k, vec![w, k.one(), k.one()]);
        assert_eq!(
            form_invariants(&d).detail,
            InvariantDetail::Discriminant(SquareClass::NonSquare)
        );

        assert_eq!(form_invariants(&f(&k, &[0, 0, 0])).rank, 0);
    }

    #[test]
    fn isometric_examples() {
        let k = f9();
        // −1 is a square in F9, so (1,1) ≅ (1,−1)
        assert!(isometric(&f(&k, &[1, 1]), &f(&k, &[1, -1])).unwrap());
        let q = FieldSpec::real_closure();
        assert!(!isometric(&f(&q, &[1, 1]), &f(&q, &[1, -1])).unwrap());
        let k4 = f4();
        assert!(isometric(&f(&k4, &[1, 1, 0]), &f(&k4, &[1, 1, 0])).unwrap());
        assert!(isometric(&f(&k4, &[1, 1]), &f(&q, &[1, 1])).is_err());
    }

    #[test]
    fn isometric_distinguishes_degenerate_parts() {
        let k = f9();
        let w = k.nonsquare_unit().unwrap();
        let a = f(&k, &[0, 1, 1]);
        let b = DiagonalForm::new(k, vec![k.zero(), w, k.one()]);
        assert!(!isometric(&a, &b).unwrap());
    }

    #[test]
    fn represent_value_examples() {
        let k = f9();
        let w = k.nonsquare_unit().unwrap();
        let d = f(&k, &[1, 1]);
        let v = represent_value(&d, &w, &budget()).unwrap().unwrap();
        assert_eq!(d.evaluate(&v), w);

        let zero_rep = represent_value(&d, &k.zero(), &budget()).unwrap().unwrap();
        assert!(zero_rep.iter().all(|x| k.is_zero(x)));

        let k3 = f3();
        assert_eq!(
            represent_value(&f(&k3, &[1]), &k3.from_i64(2), &budget()).unwrap(),
            None
        );
    }

    #[test]
    fn find_isotropic_examples() {
        let k = f9();
        let w = k.nonsquare_unit().unwrap();
        let d = DiagonalForm::new(k, vec![w, k.one()]);
        assert_eq!(find_isotropic(&d, &budget()).unwrap(), IsotropicSearch::None);

        let k4 = f4();
        let d4 = f(&k4, &[1, 1]);
        assert_eq!(
            find_isotropic(&d4, &budget()).unwrap(),
            IsotropicSearch::Found(vec![k4.one(), k4.one()])
        );

        let q = FieldSpec::real_closure();
        assert_eq!(
            find_isotropic(&f(&q, &[1, -1]), &budget()).unwrap(),
            IsotropicSearch::Found(vec![q.one(), q.one()])
        );
        assert_eq!(
            find_isotropic(&f(&q, &[1, 1]), &budget()).unwrap(),
            IsotropicSearch::None
        );
        // exists over R but the ratio is not a rational square
        assert_eq!(
            find_isotropic(&f(&q, &[1, -2]), &budget()).unwrap(),
            IsotropicSearch::ExistsUnconstructed
        );
    }

    #[test]
    fn hyperbolic_pair_example() {
        let q = FieldSpec::real_closure();
        let d = f(&q, &[1, -1]);
        let w = vec![q.one(), q.one()];
        let wp = hyperbolic_pair(&d, &w).unwrap();
        assert_eq!(
            wp,
            vec![q.parse_scalar("1/2").unwrap(), q.parse_scalar("-1/2").unwrap()]
        );
        assert!(q.is_one(&d.pair(&w, &wp)));
        assert!(q.is_zero(&d.evaluate(&wp)));

        let d3 = f(&q, &[1, -1, 1]);
        let w3 = vec![q.one(), q.one(), q.zero()];
        let wp3 = hyperbolic_pair(&d3, &w3).unwrap();
        assert!(q.is_one(&d3.pair(&w3, &wp3)));
        assert!(q.is_zero(&d3.evaluate(&wp3)));

        let aniso = vec![q.one(), q.zero(), q.zero()];
        assert!(hyperbolic_pair(&d3, &aniso).is_err());
    }

    #[test]
    fn transporter_f3_example() {
        let k = f3();
        let d = f(&k, &[1, -1]);
        let w1 = vec![k.one(), k.one()];
        let w2 = vec![k.one(), k.from_i64(2)];
        let theta = transporter(&d, &w1, &d, &w2, &budget()).unwrap().unwrap();
        assert_eq!(d.gram(), d.gram().congruence(&theta.matrix, &k));
        assert_eq!(theta.matrix.mul_vec(&w1, &k), w2);

        let id = transporter(&d, &w1, &d, &w1, &budget()).unwrap().unwrap();
        assert_eq!(id.matrix, Matrix::identity(&k, 2));
    }

    #[test]
    fn transporter_f4_distinct_orbits() {
        let k = f4();
        let d = f(&k, &[1, 1]);
        let a = k.parse_scalar("a").unwrap();
        let w1 = vec![k.one(), k.one()];
        let w2 = vec![a.clone(), a];
        assert_eq!(transporter(&d, &w1, &d, &w2, &budget()).unwrap(), None);
    }

    #[test]
    fn orthogonal_group_examples() {
        let k4 = f4();
        let g = orthogonal_group(&f(&k4, &[1, 1]), &budget()).unwrap();
        assert_eq!(g.len(), 4);
        // Klein group: every element squares to the identity.
        let id = Matrix::identity(&k4, 2);
        for m in &g {
            assert_eq!(m.matrix.mul(&m.matrix, &k4), id);
        }

        let k3 = f3();
        let g1 = orthogonal_group(&f(&k3, &[1]), &budget()).unwrap();
        assert_eq!(
            g1.iter().map(|m| m.matrix.get(0, 0).clone()).collect::<Vec<_>>(),
            vec![k3.one(), k3.from_i64(2)]
        );

        assert_eq!(orthogonal_group(&f(&k3, &[1, 1]), &budget()).unwrap().len(), 8);

        // group axioms on an enumerated group
        let g2 = orthogonal_group(&f(&k3, &[1, -1]), &budget()).unwrap();
        let mats: Vec<&Matrix> = g2.iter().map(|m| &m.matrix).collect();
        assert!(mats.contains(&&Matrix::identity(&k3, 2)));
        for a in &mats {
            assert!(mats.contains(&&a.inverse(&k3).unwrap()));
            for b in &mats {
                assert!(mats.contains(&&a.mul(b, &k3)));
            }
        }
    }

    #[test]
    fn orthogonal_group_budget_and_degenerate() {
        let k = f9();
        let d = f(&k, &[1, 1, 1]);
        assert!(matches!(
            orthogonal_group(&d, &budget()),
            Err(FormError::BudgetExceeded { .. })
        ));
        let k3 = f3();
        assert_eq!(
            orthogonal_group(&f(&k3, &[0, 1]), &budget()),
            Err(FormError::DegenerateForm)
        );
    }

    #[test]
    fn isotropic_orbit_examples() {
        let k4 = f4();
        let orbits = isotropic_orbits(&f(&k4, &[1, 1]), &budget()).unwrap();
        let a = k4.parse_scalar("a").unwrap();
        let b = k4.parse_scalar("b").unwrap();
        assert_eq!(orbits.len(), 3);
        assert!(orbits.iter().all(|o| o.members.len() == 1));
        assert_eq!(orbits[0].representative, vec![k4.one(), k4.one()]);
        assert_eq!(orbits[1].representative, vec![a.clone(), a]);
        assert_eq!(orbits[2].representative, vec![b.clone(), b]);

        let k9 = f9();
        let w = k9.nonsquare_unit().unwrap();
        let d = DiagonalForm::new(k9, vec![w, k9.one()]);
        assert!(isotropic_orbits(&d, &budget()).unwrap().is_empty());

        let k3 = f3();
        let orbits3 = isotropic_orbits(&f(&k3, &[1, -1]), &budget()).unwrap();
        assert_eq!(orbits3.len(), 1);
        assert_eq!(orbits3[0].members.len(), 4);
    }

    #[test]
    fn orbits_partition_and_are_invariant() {
        let k = f4();
        let d = f(&k, &[1, 1, 1]);
        let orbits = isotropic_orbits(&d, &budget()).unwrap();
        let group = orthogonal_group(&d, &budget()).unwrap();
        let all: Vec<Vector> = orbits.iter().flat_map(|o| o.members.clone()).collect();
        let total: usize = orbits.iter().map(|o| o.members.len()).sum();
        assert_eq!(all.len(), total); // disjoint
        for o in &orbits {
            for v in &o.members {
                assert!(k.is_zero(&d.evaluate(v)));
                for g in &group {
                    let img = g.matrix.mul_vec(v, &k);
                    assert!(o.members.contains(&img));
                }
            }
        }
    }

    #[test]
    fn canonicalize_finite_odd_shapes() {
        let k = f9();
        let w = k.nonsquare_unit().unwrap();
        for entries in [
            vec![k.one(), k.one(), k.one()],
            vec![w.clone(), k.one(), k.one()],
            vec![w.clone(), w.clone(), w.clone()],
            vec![k.from_i64(2), w.clone(), k.one()],
        ] {
            let d = DiagonalForm::new(k, entries);
            let c = canonicalize(&d, &budget()).unwrap();
            let t = c.witness.unwrap();
            assert_eq!(d.gram().congruence(&t, &k), Matrix::diagonal(&k, &c.canon));
            for x in &c.canon[..c.canon.len() - 1] {
                assert!(k.is_one(x));
            }
        }
    }

    #[test]
    fn canonicalize_char2_and_rational() {
        let k4 = f4();
        let a = k4.parse_scalar("a").unwrap();
        let d = DiagonalForm::new(k4, vec![a.clone(), k4.one()]);
        let c = canonicalize(&d, &budget()).unwrap();
        assert_eq!(c.canon, vec![k4.one(), k4.one()]);
        let t = c.witness.unwrap();
        assert_eq!(d.gram().congruence(&t, &k4), Matrix::diagonal(&k4, &c.canon));

        let q = FieldSpec::real_closure();
        let d = f(&q, &[-1, 4, -9]);
        let c = canonicalize(&d, &budget()).unwrap();
        assert_eq!(c.canon, vec![q.one(), q.from_i64(-1), q.from_i64(-1)]);
        let t = c.witness.unwrap();
        assert_eq!(d.gram().congruence(&t, &q), Matrix::diagonal(&q, &c.canon));

        // irrational scaling: decision still available, witness is not
        let d = f(&q, &[2]);
        let c = canonicalize(&d, &budget()).unwrap();
        assert!(c.witness.is_none());
        assert_eq!(c.canon, vec![q.one()]);
    }

    #[test]
    fn isometry_between_produces_checked_witnesses() {
        let k = f9();
        let w = k.nonsquare_unit().unwrap();
        let d1 = DiagonalForm::new(k, vec![k.zero(), w.clone(), k.one()]);
        let d2 = DiagonalForm::new(k, vec![k.one(), k.zero(), w.clone()]);
        match isometry_between(&d1, &d2, &budget()).unwrap() {
            IsometryDecision::Isometric(Some(iso)) => {
                assert_eq!(d1.gram(), d2.gram().congruence(&iso.matrix, &k));
            }
            other => panic!("expected witness, got {other:?}"),
        }
        let d3 = DiagonalForm::new(k, vec![k.one(), k.zero(), k.one()]);
        assert_eq!(
            isometry_between(&d1, &d3, &budget()).unwrap(),
            IsometryDecision::NotIsometric
        );
    }

    #[test]
    fn point_isometry_reflections() {
        let k = f3();
        let d = f(&k, &[1, 1, 2]);
        let u = vec![k.one(), k.zero(), k.zero()];
        let w = vec![k.zero(), k.one(), k.zero()];
        let m = point_isometry(&d, &u, &w, &budget()).unwrap().unwrap();
        assert_eq!(m.mul_vec(&u, &k), w);
        assert_eq!(d.gram(), d.gram().congruence(&m, &k));
    }

    #[test]
    fn point_isometry_char2_exhaustive() {
        let k = f4();
        let d = f(&k, &[1, 1]);
        let u = vec![k.one(), k.zero()];
        let a = k.parse_scalar("a").unwrap();
        let b = k.parse_scalar("b").unwrap();
        let w = vec![a, b];
        let m = point_isometry(&d, &u, &w, &budget()).unwrap().unwrap();
        assert_eq!(m.mul_vec(&u, &k), w);
        assert_eq!(d.gram(), d.gram().congruence(&m, &k));
    }
}
