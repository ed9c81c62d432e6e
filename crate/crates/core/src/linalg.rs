//! Dense matrices over a [`Scalar`] with tensor-leg metadata.
//!
//! Basis vector `e_{i1} ⊗ … ⊗ e_{in}` (1-based labels) sits at flat index
//! `Σ_k (i_k - 1) · Π_{m>k} d_m`, i.e. big-endian in the leg order.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{Residual, Scalar};

/// Default relative rank / invariance tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Operator<S> {
    rows: usize,
    cols: usize,
    legs: Vec<usize>,
    data: Vec<S>,
}

pub fn flat_index(legs: &[usize], labels: &[usize]) -> usize {
    assert_eq!(legs.len(), labels.len());
    legs.iter().zip(labels).fold(0, |acc, (&d, &i)| {
        assert!(i >= 1 && i <= d, "label {i} out of range 1..={d}");
        acc * d + (i - 1)
    })
}

impl<S: Scalar> Operator<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Operator {
            rows,
            cols,
            legs: vec![rows],
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn square_zeros(legs: &[usize]) -> Self {
        let d = legs.iter().product();
        Operator {
            rows: d,
            cols: d,
            legs: legs.to_vec(),
            data: vec![S::zero(); d * d],
        }
    }

    pub fn identity(legs: &[usize]) -> Self {
        let mut m = Operator::square_zeros(legs);
        for i in 0..m.rows {
            m.data[i * m.cols + i] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Operator {
            rows,
            cols,
            legs: vec![rows],
            data,
        }
    }

    pub fn diag(values: Vec<S>) -> Self {
        let n = values.len();
        let mut m = Operator::square_zeros(&[n]);
        for (i, v) in values.into_iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// `E_{ij}` on `C^dim`, 1-based labels.
    pub fn elementary(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Operator::square_zeros(&[dim]);
        m.data[(i - 1) * dim + (j - 1)] = S::one();
        m
    }

    /// The column vector `e_{i1} ⊗ … ⊗ e_{in}`.
    pub fn basis_vector(legs: &[usize], labels: &[usize]) -> Self {
        let d: usize = legs.iter().product();
        let mut m = Operator::zeros(d, 1);
        m.legs = legs.to_vec();
        m.data[flat_index(legs, labels)] = S::one();
        m
    }

    /// Stacks equally long columns side by side.
    pub fn from_columns(legs: &[usize], columns: &[Vec<S>]) -> Self {
        let rows: usize = legs.iter().product();
        let cols = columns.len();
        let mut m = Operator::zeros(rows, cols);
        m.legs = legs.to_vec();
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (r, v) in col.iter().enumerate() {
                m.data[r * cols + c] = v.clone();
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

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    /// Re-labels the row factorization; the product must equal the row count.
    pub fn with_legs(mut self, legs: &[usize]) -> Result<Self> {
        if legs.iter().product::<usize>() != self.rows {
            return Err(Error::Dimension(format!(
                "legs {legs:?} do not factor {} rows",
                self.rows
            )));
        }
        self.legs = legs.to_vec();
        Ok(self)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Operator<T> {
        Operator {
            rows: self.rows,
            cols: self.cols,
            legs: self.legs.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<T: Scalar>(&self, f: impl Fn(&S) -> Result<T>) -> Result<Operator<T>> {
        Ok(Operator {
            rows: self.rows,
            cols: self.cols,
            legs: self.legs.clone(),
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(S::is_zero)
    }

    pub fn frobenius(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.magnitude() * z.magnitude())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(S::magnitude).fold(0.0, f64::max)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in entrywise operation"
        );
        Operator {
            rows: self.rows,
            cols: self.cols,
            legs: self.legs.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, S::add)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, S::sub)
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|z| c.mul(z))
    }

    pub fn neg(&self) -> Self {
        self.map(S::neg)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Operator::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone());
        if self.is_square() {
            t.legs = self.legs.clone();
        }
        t
    }

    /// Matrix product; rows are computed in parallel and zero entries of the
    /// left factor are skipped.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols_in(), "inner dimensions differ");
        let n = rhs.cols;
        let mut data = vec![S::zero(); self.rows * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(r, out)| {
            for (k, a) in self.row(r).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (o, b) in out.iter_mut().zip(rhs.row(k)) {
                    if !b.is_zero() {
                        *o = o.add(&a.mul(b));
                    }
                }
            }
        });
        Operator {
            rows: self.rows,
            cols: n,
            legs: self.legs.clone(),
            data,
        }
    }

    fn cols_in(&self) -> usize {
        self.rows
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.matmul(rhs).sub(&rhs.matmul(self))
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Operator::from_fn(self.rows, cols.len(), |r, c| self.get(r, cols[c]).clone());
        m.legs = self.legs.clone();
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Operator::from_fn(rows.len(), self.cols, |r, c| self.get(rows[r], c).clone())
    }

    /// Residual against `other` (same shape), see [`Scalar::compare`].
    pub fn compare(&self, other: &Self) -> Residual {
        self.compare_with_floor(other, 0.0)
    }

    pub fn compare_with_floor(&self, other: &Self, floor: f64) -> Residual {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        S::compare(&self.data, &other.data, floor)
    }

    /// Sparse triplet dump: `{"legs": [...], "entries": [[row, col, scalar], ...]}`.
    /// Rectangular matrices also carry `"shape": [rows, cols]`.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .filter(|&(r, c)| !self.get(r, c).is_zero())
            .map(|(r, c)| json!([r, c, self.get(r, c).to_json()]))
            .collect();
        if self.is_square() {
            json!({ "legs": self.legs, "entries": entries })
        } else {
            json!({ "legs": self.legs, "shape": [self.rows, self.cols], "entries": entries })
        }
    }
}

pub fn kron<S: Scalar>(a: &Operator<S>, b: &Operator<S>) -> Operator<S> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = vec![S::zero(); rows * cols];
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a.get(ar, ac);
            if x.is_zero() {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    let y = b.get(br, bc);
                    if y.is_zero() {
                        continue;
                    }
                    data[(ar * b.rows + br) * cols + ac * b.cols + bc] = x.mul(y);
                }
            }
        }
    }
    let mut legs = a.legs.clone();
    legs.extend_from_slice(&b.legs);
    Operator {
        rows,
        cols,
        legs,
        data,
    }
}

fn leg_span(local: &Operator<impl Scalar>, i: usize, legs: &[usize]) -> Result<(usize, usize)> {
    let k = local.legs.len();
    if !local.is_square() || i == 0 || i - 1 + k > legs.len() || legs[i - 1..i - 1 + k] != local.legs[..] {
        return Err(Error::Dimension(format!(
            "operator with legs {:?} cannot act at leg {i} of {legs:?}",
            local.legs
        )));
    }
    let left = legs[..i - 1].iter().product();
    let right = legs[i - 1 + k..].iter().product();
    Ok((left, right))
}

/// `I ⊗ R ⊗ I` where `R` occupies legs `i, i+1, …` (1-based) of `legs`.
pub fn embed_at_leg<S: Scalar>(r: &Operator<S>, i: usize, legs: &[usize]) -> Result<Operator<S>> {
    let (left, right) = leg_span(r, i, legs)?;
    let mut out = kron(
        &kron(&Operator::identity(&[left]), r),
        &Operator::identity(&[right]),
    );
    out.legs = legs.to_vec();
    Ok(out)
}

/// Computes `embed_at_leg(r, i, legs) · target` without forming the embedding.
pub fn apply_at_leg<S: Scalar>(
    r: &Operator<S>,
    i: usize,
    legs: &[usize],
    target: &Operator<S>,
) -> Result<Operator<S>> {
    let (_, right) = leg_span(r, i, legs)?;
    let dim: usize = legs.iter().product();
    if target.rows != dim {
        return Err(Error::Dimension(format!(
            "target has {} rows, legs {legs:?} need {dim}",
            target.rows
        )));
    }
    let mid = r.rows;
    let cols = target.cols;
    // nonzero local entries, grouped by output row
    let local: Vec<Vec<(usize, S)>> = (0..mid)
        .map(|a| {
            (0..mid)
                .filter(|&b| !r.get(a, b).is_zero())
                .map(|b| (b, r.get(a, b).clone()))
                .collect()
        })
        .collect();
    let mut data = vec![S::zero(); dim * cols];
    data.par_chunks_mut(cols.max(1))
        .enumerate()
        .for_each(|(row, out)| {
            let rr = row % right;
            let a = (row / right) % mid;
            let l = row / (right * mid);
            for (b, coeff) in &local[a] {
                let src = (l * mid + b) * right + rr;
                for (o, t) in out.iter_mut().zip(target.row(src)) {
                    if !t.is_zero() {
                        *o = o.add(&coeff.mul(t));
                    }
                }
            }
        });
    Ok(Operator {
        rows: dim,
        cols,
        legs: target.legs.clone(),
        data,
    })
}

/// Greedy pivoted elimination; returns the pivot columns in order. Numeric
/// pivots below `tol · max|entry|` are treated as zero.
pub fn pivot_columns<S: Scalar>(m: &Operator<S>, tol: f64) -> Vec<usize> {
    let threshold = tol * m.max_magnitude();
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (best, mag) = (rank..rows)
            .map(|r| (r, a[r * cols + c].magnitude()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= 0.0 || a[best * cols + c].negligible(threshold) {
            continue;
        }
        if best != rank {
            for k in 0..cols {
                a.swap(best * cols + k, rank * cols + k);
            }
        }
        let pivot = a[rank * cols + c].clone();
        let pivot_row: Vec<S> = a[rank * cols + c..(rank + 1) * cols].to_vec();
        let below: Vec<usize> = (rank + 1..rows).filter(|&r| !a[r * cols + c].is_zero()).collect();
        for r in below {
            let f = a[r * cols + c].try_div(&pivot).expect("pivot is nonzero");
            for (k, p) in pivot_row.iter().enumerate().skip(1) {
                if !p.is_zero() {
                    let idx = r * cols + c + k;
                    a[idx] = a[idx].sub(&f.mul(p));
                }
            }
            a[r * cols + c] = S::zero();
        }
        pivots.push(c);
        rank += 1;
    }
    pivots
}

pub fn rank<S: Scalar>(m: &Operator<S>, tol: f64) -> usize {
    pivot_columns(m, tol).len()
}

/// Solves `a · X = b` for square `a` by Gaussian elimination with pivoting.
pub fn solve<S: Scalar>(a: &Operator<S>, b: &Operator<S>) -> Result<Operator<S>> {
    let n = a.rows;
    if !a.is_square() || b.rows != n {
        return Err(Error::Dimension(format!(
            "solve: {}x{} system with {} right-hand rows",
            a.rows, a.cols, b.rows
        )));
    }
    let m = b.cols;
    let threshold = 1e-14 * a.max_magnitude();
    let mut aa = a.data.clone();
    let mut bb = b.data.clone();
    for c in 0..n {
        let best = (c..n)
            .max_by(|&i, &j| {
                aa[i * n + c]
                    .magnitude()
                    .partial_cmp(&aa[j * n + c].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty range");
        if aa[best * n + c].is_zero() || aa[best * n + c].negligible(threshold) {
            return Err(Error::Singular);
        }
        if best != c {
            for k in 0..n {
                aa.swap(best * n + k, c * n + k);
            }
            for k in 0..m {
                bb.swap(best * m + k, c * m + k);
            }
        }
        let pivot = aa[c * n + c].clone();
        for r in 0..n {
            if r == c || aa[r * n + c].is_zero() {
                continue;
            }
            let f = aa[r * n + c].try_div(&pivot)?;
            for k in c..n {
                if !aa[c * n + k].is_zero() {
                    aa[r * n + k] = aa[r * n + k].sub(&f.mul(&aa[c * n + k]));
                }
            }
            for k in 0..m {
                if !bb[c * m + k].is_zero() {
                    bb[r * m + k] = bb[r * m + k].sub(&f.mul(&bb[c * m + k]));
                }
            }
        }
    }
    let mut out = Operator::zeros(n, m);
    for r in 0..n {
        let p = &aa[r * n + r];
        for k in 0..m {
            out.data[r * m + k] = bb[r * m + k].try_div(p)?;
        }
    }
    Ok(out)
}

pub fn inverse<S: Scalar>(a: &Operator<S>) -> Result<Operator<S>> {
    let mut inv = solve(a, &Operator::identity(&[a.rows]))?;
    inv.legs = a.legs.clone();
    Ok(inv)
}

/// A full-column-rank set of column vectors.
#[derive(Clone, Debug)]
pub struct SubspaceBasis<S> {
    columns: Operator<S>,
}

impl<S: Scalar> SubspaceBasis<S> {
    pub fn new(columns: Operator<S>, tol: f64) -> Result<Self> {
        let r = rank(&columns, tol);
        if r != columns.cols {
            return Err(Error::Consistency(format!(
                "{} columns span only {r} dimensions",
                columns.cols
            )));
        }
        Ok(SubspaceBasis { columns })
    }

    pub fn empty(legs: &[usize]) -> Self {
        let d = legs.iter().product();
        let mut columns = Operator::zeros(d, 0);
        columns.legs = legs.to_vec();
        SubspaceBasis { columns }
    }

    pub fn columns(&self) -> &Operator<S> {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.cols
    }

    pub fn ambient(&self) -> usize {
        self.columns.rows
    }

    /// Basis of `U ⊗ W` from bases of `U` and `W`.
    pub fn tensor(&self, other: &Self) -> Self {
        SubspaceBasis {
            columns: kron(&self.columns, &other.columns),
        }
    }
}

/// Column space via pivoted column extraction; the returned basis consists of
/// original columns of `m`.
pub fn column_space<S: Scalar>(m: &Operator<S>, tol: f64) -> SubspaceBasis<S> {
    let piv = pivot_columns(m, tol);
    SubspaceBasis {
        columns: m.select_columns(&piv),
    }
}

/// `S` with `image ≈ B·S`, the residual of that fit, and the worst column.
#[derive(Clone, Debug)]
pub struct Restriction<S> {
    pub matrix: Operator<S>,
    pub residual: Residual,
    pub worst_column: usize,
}

/// Fits `image = B·S` using `dim B` independent rows of `B`, then measures
/// the residual on all rows.
pub fn restrict_image<S: Scalar>(image: &Operator<S>, basis: &SubspaceBasis<S>) -> Result<Restriction<S>> {
    restrict_image_with_floor(image, basis, 0.0)
}

/// As [`restrict_image`], with `floor` as a lower bound on the residual's
/// normalizing scale (for images that may legitimately vanish).
pub fn restrict_image_with_floor<S: Scalar>(
    image: &Operator<S>,
    basis: &SubspaceBasis<S>,
    floor: f64,
) -> Result<Restriction<S>> {
    let b = basis.columns();
    if image.rows != b.rows {
        return Err(Error::Dimension(format!(
            "image has {} rows, basis lives in dimension {}",
            image.rows, b.rows
        )));
    }
    let d = basis.dim();
    if d == 0 {
        let matrix = Operator::zeros(0, image.cols);
        let zero = Operator::zeros(image.rows, image.cols);
        return Ok(Restriction {
            residual: image.compare_with_floor(&zero, floor),
            matrix,
            worst_column: 0,
        });
    }
    let rows = pivot_columns(&b.transpose(), DEFAULT_TOL);
    if rows.len() != d {
        return Err(Error::Consistency("basis is rank deficient".into()));
    }
    let mut s = solve(&b.select_rows(&rows), &image.select_rows(&rows))?;
    s.legs = vec![d];
    let fit = b.matmul(&s);
    let residual = image.compare_with_floor(&fit, floor);
    let worst_column = (0..image.cols)
        .map(|c| {
            let lhs = Operator::from_columns(&[image.rows], &[image.column(c)]);
            let rhs = Operator::from_columns(&[image.rows], &[fit.column(c)]);
            (c, lhs.compare_with_floor(&rhs, image.frobenius()).value())
        })
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc })
        .0;
    Ok(Restriction {
        matrix: s,
        residual,
        worst_column,
    })
}

/// Restriction of `m` to an invariant subspace: `S` with `m·B = B·S`.
pub fn restrict<S: Scalar>(m: &Operator<S>, basis: &SubspaceBasis<S>, tol: f64) -> Result<Operator<S>> {
    let fit = restrict_image(&m.matmul(basis.columns()), basis)?;
    if !fit.residual.passes(tol) {
        return Err(Error::NotInvariant {
            column: fit.worst_column,
            residual: fit.residual.value(),
        });
    }
    Ok(fit.matrix)
}

/// Dimension of `{M : M·A = A·M for all A in ops}`.
pub fn commutant_dimension<S: Scalar>(ops: &[Operator<S>], tol: f64) -> usize {
    let Some(first) = ops.first() else {
        return 0;
    };
    let d = first.rows;
    let n = d * d;
    let mut system = Operator::<S>::zeros(ops.len() * n, n);
    for (k, a) in ops.iter().enumerate() {
        assert_eq!((a.rows, a.cols), (d, d), "commutant needs equal square shapes");
        for i in 0..d {
            for j in 0..d {
                let row = k * n + i * d + j;
                // (M A)_{ij} = Σ_l M_{il} A_{lj}
                for l in 0..d {
                    let c = i * d + l;
                    let v = system.get(row, c).add(a.get(l, j));
                    system.set(row, c, v);
                }
                // (A M)_{ij} = Σ_l A_{il} M_{lj}
                for l in 0..d {
                    let c = l * d + j;
                    let v = system.get(row, c).sub(a.get(i, l));
                    system.set(row, c, v);
                }
            }
        }
    }
    n - rank(&system, tol)
}
