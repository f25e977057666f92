//! Hilbert-space layout for k three-level control atoms and N four-level
//! target atoms.
//!
//! Basis ordering is fixed once and for all here: control atoms come first
//! (most significant digits, radix 3), then target atoms (radix 4). Within
//! each atom the levels follow the column-vector convention |0>, |1>, |r>
//! for controls and |A>, |B>, |P>, |R> for targets, so the flat index of a
//! product basis state is a mixed-radix encoding in `[0, 3^k * 4^N)`.
//!
//! Operators on the full space are kept as structured sums of site-local
//! matrices plus a full-dimension diagonal, and are applied matrix-free.
//! A dense materialization exists for use as a test oracle and for the
//! exponential propagator at small dimensions.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Number of levels of a control atom (|0>, |1>, |r>).
pub const CONTROL_DIM: usize = 3;
/// Number of levels of a target atom (|A>, |B>, |P>, |R>).
pub const TARGET_DIM: usize = 4;

/// Level of a control atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlLevel {
    Zero = 0,
    One = 1,
    Rydberg = 2,
}

impl ControlLevel {
    pub const ALL: [ControlLevel; CONTROL_DIM] =
        [ControlLevel::Zero, ControlLevel::One, ControlLevel::Rydberg];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Level of a target atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetLevel {
    A = 0,
    B = 1,
    P = 2,
    R = 3,
}

impl TargetLevel {
    pub const ALL: [TargetLevel; TARGET_DIM] =
        [TargetLevel::A, TargetLevel::B, TargetLevel::P, TargetLevel::R];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One atom slot in the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Control(usize),
    Target(usize),
}

impl Site {
    pub fn local_dim(self) -> usize {
        match self {
            Site::Control(_) => CONTROL_DIM,
            Site::Target(_) => TARGET_DIM,
        }
    }
}

/// Atom counts fixing the product-space layout. `k >= 1` controls,
/// `N >= 1` targets, total dimension `3^k * 4^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceDims {
    controls: usize,
    targets: usize,
}

impl SpaceDims {
    pub fn new(controls: usize, targets: usize) -> Result<Self> {
        if controls == 0 || targets == 0 {
            return Err(Error::EmptyLayout);
        }
        Ok(SpaceDims { controls, targets })
    }

    pub fn controls(&self) -> usize {
        self.controls
    }

    pub fn targets(&self) -> usize {
        self.targets
    }

    /// Full product-space dimension `3^k * 4^N`.
    pub fn dim(&self) -> usize {
        CONTROL_DIM.pow(self.controls as u32) * TARGET_DIM.pow(self.targets as u32)
    }

    /// Dimension of the computational subspace `2^(k+N)`.
    pub fn computational_dim(&self) -> usize {
        1usize << (self.controls + self.targets)
    }

    pub fn contains(&self, site: Site) -> bool {
        match site {
            Site::Control(i) => i < self.controls,
            Site::Target(j) => j < self.targets,
        }
    }

    /// Stride of a site in the flat index: incrementing the site's level by
    /// one moves the flat index by this amount.
    pub fn stride(&self, site: Site) -> Result<usize> {
        if !self.contains(site) {
            return Err(Error::SiteOutOfRange {
                site,
                controls: self.controls,
                targets: self.targets,
            });
        }
        Ok(match site {
            Site::Control(i) => {
                TARGET_DIM.pow(self.targets as u32) * CONTROL_DIM.pow((self.controls - 1 - i) as u32)
            }
            Site::Target(j) => TARGET_DIM.pow((self.targets - 1 - j) as u32),
        })
    }

    /// All sites in index order: controls first, then targets.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.controls)
            .map(Site::Control)
            .chain((0..self.targets).map(Site::Target))
    }

    /// Level digit of `site` in the basis state with the given flat index.
    pub fn level_of(&self, flat: usize, site: Site) -> Result<usize> {
        let stride = self.stride(site)?;
        Ok(flat / stride % site.local_dim())
    }
}

/// Product-basis label: one level per atom, controls then targets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub controls: Vec<ControlLevel>,
    pub targets: Vec<TargetLevel>,
}

impl BasisLabel {
    pub fn new(controls: Vec<ControlLevel>, targets: Vec<TargetLevel>) -> Self {
        BasisLabel { controls, targets }
    }

    /// Mixed-radix flat index: controls (radix 3) most significant, then
    /// targets (radix 4).
    pub fn flat_index(&self, dims: SpaceDims) -> Result<usize> {
        if self.controls.len() != dims.controls {
            return Err(Error::LabelLengthMismatch {
                role: "control",
                got: self.controls.len(),
                expected: dims.controls,
            });
        }
        if self.targets.len() != dims.targets {
            return Err(Error::LabelLengthMismatch {
                role: "target",
                got: self.targets.len(),
                expected: dims.targets,
            });
        }
        let mut idx = 0;
        for c in &self.controls {
            idx = idx * CONTROL_DIM + c.index();
        }
        for t in &self.targets {
            idx = idx * TARGET_DIM + t.index();
        }
        Ok(idx)
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn from_flat(dims: SpaceDims, flat: usize) -> Self {
        let mut rem = flat;
        let mut targets = vec![TargetLevel::A; dims.targets];
        for j in (0..dims.targets).rev() {
            targets[j] = TargetLevel::from_index(rem % TARGET_DIM).unwrap();
            rem /= TARGET_DIM;
        }
        let mut controls = vec![ControlLevel::Zero; dims.controls];
        for i in (0..dims.controls).rev() {
            controls[i] = ControlLevel::from_index(rem % CONTROL_DIM).unwrap();
            rem /= CONTROL_DIM;
        }
        BasisLabel { controls, targets }
    }

    /// True if every atom is in a computational level ({0,1} or {A,B}).
    pub fn is_computational(&self) -> bool {
        self.controls.iter().all(|c| c.index() < 2) && self.targets.iter().all(|t| t.index() < 2)
    }
}

/// Complex state vector over the full product space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: SpaceDims,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(dims: SpaceDims) -> Self {
        StateVector {
            dims,
            amps: vec![C64::ZERO; dims.dim()],
        }
    }

    /// Unit basis state |label>.
    pub fn basis(dims: SpaceDims, label: &BasisLabel) -> Result<Self> {
        let mut s = Self::zero(dims);
        s.amps[label.flat_index(dims)?] = C64::ONE;
        Ok(s)
    }

    pub fn from_amplitudes(dims: SpaceDims, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dims.dim() {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector length {} does not match dimension {}",
                amps.len(),
                dims.dim()
            )));
        }
        Ok(StateVector { dims, amps })
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Result<C64> {
        Ok(self.amps[label.flat_index(self.dims)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// Population on the exact basis state |label>.
    pub fn population(&self, label: &BasisLabel) -> Result<f64> {
        Ok(self.amplitude(label)?.norm_sqr())
    }
}

/// Site-local operator matrix, 3x3 for controls or 4x4 for targets.
/// Stored in a fixed 4x4 block; rows/columns beyond `dim` are unused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteMatrix {
    dim: usize,
    m: [[C64; 4]; 4],
}

impl SiteMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= 4, "site matrices are at most 4x4");
        SiteMatrix {
            dim,
            m: [[C64::ZERO; 4]; 4],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut s = Self::zeros(dim);
        for i in 0..dim {
            s.m[i][i] = C64::ONE;
        }
        s
    }

    /// Rank-one projector |level><level|.
    pub fn projector(dim: usize, level: usize) -> Self {
        assert!(level < dim);
        let mut s = Self::zeros(dim);
        s.m[level][level] = C64::ONE;
        s
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut s = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim);
            for (j, v) in row.iter().enumerate() {
                s.m[i][j] = *v;
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        assert!(i < self.dim && j < self.dim);
        self.m[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(i < self.dim && j < self.dim);
        self.m[i][j] = v;
    }

    pub fn add_assign(&mut self, other: &SiteMatrix) {
        assert_eq!(self.dim, other.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.m[i][j] += other.m[i][j];
            }
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] *= s;
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.m
            .iter()
            .flatten()
            .all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| i == j || (self.m[i][j].re == 0.0 && self.m[i][j].im == 0.0))
        })
    }

    pub fn diagonal(&self) -> [C64; 4] {
        let mut d = [C64::ZERO; 4];
        for i in 0..self.dim {
            d[i] = self.m[i][i];
        }
        d
    }
}

/// An operator on the site identified by `site`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteOperator {
    pub site: Site,
    pub matrix: SiteMatrix,
}

impl SiteOperator {
    pub fn new(site: Site, matrix: SiteMatrix) -> Result<Self> {
        if matrix.dim() != site.local_dim() {
            return Err(Error::SiteMatrixDimension {
                got: matrix.dim(),
                expected: site.local_dim(),
            });
        }
        Ok(SiteOperator { site, matrix })
    }
}

#[derive(Debug, Clone)]
struct EmbeddedSite {
    stride: usize,
    matrix: SiteMatrix,
}

#[derive(Debug, Clone)]
struct EmbeddedPair {
    a: EmbeddedSite,
    b: EmbeddedSite,
}

/// Full-space operator kept as a structured sum of embedded site terms, an
/// optional full-dimension diagonal, and (rarely) two-site product terms.
/// Application to a state never materializes the `3^k * 4^N` square matrix.
#[derive(Debug, Clone)]
pub struct Operator {
    dims: SpaceDims,
    sites: Vec<EmbeddedSite>,
    pairs: Vec<EmbeddedPair>,
    diagonal: Option<Vec<C64>>,
}

impl Operator {
    pub fn zero(dims: SpaceDims) -> Self {
        Operator {
            dims,
            sites: Vec::new(),
            pairs: Vec::new(),
            diagonal: None,
        }
    }

    /// Operator acting as `op.matrix` on `op.site` and as identity elsewhere.
    pub fn embed_site(op: &SiteOperator, dims: SpaceDims) -> Result<Self> {
        let mut out = Self::zero(dims);
        out.add_site(op)?;
        Ok(out)
    }

    /// Product of the embeddings of two operators on distinct sites.
    pub fn embed_pair(a: &SiteOperator, b: &SiteOperator, dims: SpaceDims) -> Result<Self> {
        if a.site == b.site {
            return Err(Error::SameSiteTwice(a.site));
        }
        let mut out = Self::zero(dims);
        out.add_pair(a, b)?;
        Ok(out)
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    /// Add an embedded single-site term. Diagonal matrices are folded into
    /// the full diagonal so the apply loop only visits genuinely
    /// off-diagonal site terms.
    pub fn add_site(&mut self, op: &SiteOperator) -> Result<()> {
        if op.matrix.dim() != op.site.local_dim() {
            return Err(Error::SiteMatrixDimension {
                got: op.matrix.dim(),
                expected: op.site.local_dim(),
            });
        }
        let stride = self.dims.stride(op.site)?;
        if op.matrix.is_zero() {
            return Ok(());
        }
        if op.matrix.is_diagonal() {
            let d = op.matrix.diagonal();
            let local = op.site.local_dim();
            let diag = self.diagonal_mut();
            for (i, v) in diag.iter_mut().enumerate() {
                *v += d[i / stride % local];
            }
        } else {
            self.sites.push(EmbeddedSite {
                stride,
                matrix: op.matrix,
            });
        }
        Ok(())
    }

    /// Add a two-site product term `A_i B_j`. Products of diagonal matrices
    /// (projector pairs, in particular) are folded into the full diagonal.
    pub fn add_pair(&mut self, a: &SiteOperator, b: &SiteOperator) -> Result<()> {
        if a.site == b.site {
            return Err(Error::SameSiteTwice(a.site));
        }
        for op in [a, b] {
            if op.matrix.dim() != op.site.local_dim() {
                return Err(Error::SiteMatrixDimension {
                    got: op.matrix.dim(),
                    expected: op.site.local_dim(),
                });
            }
        }
        let stride_a = self.dims.stride(a.site)?;
        let stride_b = self.dims.stride(b.site)?;
        if a.matrix.is_zero() || b.matrix.is_zero() {
            return Ok(());
        }
        if a.matrix.is_diagonal() && b.matrix.is_diagonal() {
            let da = a.matrix.diagonal();
            let db = b.matrix.diagonal();
            let (la, lb) = (a.site.local_dim(), b.site.local_dim());
            let diag = self.diagonal_mut();
            for (i, v) in diag.iter_mut().enumerate() {
                *v += da[i / stride_a % la] * db[i / stride_b % lb];
            }
        } else {
            self.pairs.push(EmbeddedPair {
                a: EmbeddedSite {
                    stride: stride_a,
                    matrix: a.matrix,
                },
                b: EmbeddedSite {
                    stride: stride_b,
                    matrix: b.matrix,
                },
            });
        }
        Ok(())
    }

    /// Add `weight * P_a P_b` for level projectors on two distinct sites.
    pub fn add_projector_pair(
        &mut self,
        a: Site,
        level_a: usize,
        b: Site,
        level_b: usize,
        weight: C64,
    ) -> Result<()> {
        let pa = SiteOperator::new(a, SiteMatrix::projector(a.local_dim(), level_a).scaled(weight))?;
        let pb = SiteOperator::new(b, SiteMatrix::projector(b.local_dim(), level_b))?;
        self.add_pair(&pa, &pb)
    }

    /// Add an arbitrary full-dimension diagonal.
    pub fn add_diagonal(&mut self, values: &[C64]) -> Result<()> {
        if values.len() != self.dims.dim() {
            return Err(Error::InvalidParameter(format!(
                "diagonal length {} does not match dimension {}",
                values.len(),
                self.dims.dim()
            )));
        }
        let diag = self.diagonal_mut();
        for (d, v) in diag.iter_mut().zip(values) {
            *d += v;
        }
        Ok(())
    }

    fn diagonal_mut(&mut self) -> &mut Vec<C64> {
        let dim = self.dims.dim();
        self.diagonal.get_or_insert_with(|| vec![C64::ZERO; dim])
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty() && self.pairs.is_empty() && self.diagonal.is_none()
    }

    /// y = O x (matrix-free).
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.fill(C64::ZERO);
        self.apply_add(x, y);
    }

    /// y += O x (matrix-free).
    pub fn apply_add(&self, x: &[C64], y: &mut [C64]) {
        self.apply_add_scaled(x, y, 1.0);
    }

    /// y += s O x for a real scale factor, without temporaries for the
    /// site and diagonal terms.
    pub fn apply_add_scaled(&self, x: &[C64], y: &mut [C64], s: f64) {
        debug_assert_eq!(x.len(), self.dims.dim());
        debug_assert_eq!(y.len(), self.dims.dim());
        for term in &self.sites {
            apply_site_add_scaled(term, x, y, s);
        }
        if let Some(diag) = &self.diagonal {
            for ((yv, xv), dv) in y.iter_mut().zip(x).zip(diag) {
                *yv += dv * xv * s;
            }
        }
        if !self.pairs.is_empty() {
            let mut tmp = vec![C64::ZERO; x.len()];
            for pair in &self.pairs {
                tmp.fill(C64::ZERO);
                apply_site_add_scaled(&pair.b, x, &mut tmp, s);
                apply_site_add_scaled(&pair.a, &tmp, y, 1.0);
            }
        }
    }

    /// Dense materialization, column by column. Intended as a test oracle
    /// and for the exponential propagator at small dimensions.
    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let dim = self.dims.dim();
        let mut dense = nalgebra::DMatrix::zeros(dim, dim);
        let mut e = vec![C64::ZERO; dim];
        let mut col = vec![C64::ZERO; dim];
        for j in 0..dim {
            e[j] = C64::ONE;
            self.apply(&e, &mut col);
            for i in 0..dim {
                dense[(i, j)] = col[i];
            }
            e[j] = C64::ZERO;
        }
        dense
    }
}

fn apply_site_add_scaled(term: &EmbeddedSite, x: &[C64], y: &mut [C64], s: f64) {
    let d = term.matrix.dim;
    let stride = term.stride;
    let block = d * stride;
    let m = &term.matrix.m;
    let n = x.len();
    let mut base = 0;
    while base < n {
        for off in 0..stride {
            let i0 = base + off;
            let mut xs = [C64::ZERO; 4];
            for (l, xv) in xs.iter_mut().enumerate().take(d) {
                *xv = x[i0 + l * stride];
            }
            for l in 0..d {
                let row = &m[l];
                let mut acc = row[0] * xs[0];
                for c in 1..d {
                    acc += row[c] * xs[c];
                }
                y[i0 + l * stride] += acc * s;
            }
        }
        base += block;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn flat_index_examples() {
        let d11 = SpaceDims::new(1, 1).unwrap();
        let all_zero = BasisLabel::new(vec![ControlLevel::Zero], vec![TargetLevel::A]);
        assert_eq!(all_zero.flat_index(d11).unwrap(), 0);
        let maximal = BasisLabel::new(vec![ControlLevel::Rydberg], vec![TargetLevel::R]);
        assert_eq!(maximal.flat_index(d11).unwrap(), 11);

        // (0,1; A,B) at k=2, N=2: 0*48 + 1*16 + 0*4 + 1 = 17
        let d22 = SpaceDims::new(2, 2).unwrap();
        let label = BasisLabel::new(
            vec![ControlLevel::Zero, ControlLevel::One],
            vec![TargetLevel::A, TargetLevel::B],
        );
        assert_eq!(label.flat_index(d22).unwrap(), 17);
    }

    #[test]
    fn flat_index_rejects_wrong_lengths() {
        let d = SpaceDims::new(2, 1).unwrap();
        let label = BasisLabel::new(vec![ControlLevel::Zero], vec![TargetLevel::A]);
        assert!(matches!(
            label.flat_index(d),
            Err(Error::LabelLengthMismatch { .. })
        ));
    }

    #[test]
    fn flat_index_bijective_exhaustive() {
        for k in 1..=2 {
            for n in 1..=4 {
                let dims = SpaceDims::new(k, n).unwrap();
                for flat in 0..dims.dim() {
                    let label = BasisLabel::from_flat(dims, flat);
                    assert_eq!(label.flat_index(dims).unwrap(), flat);
                }
            }
        }
    }

    #[test]
    fn embed_identity_is_identity() {
        let dims = SpaceDims::new(1, 4).unwrap();
        let op = SiteOperator::new(Site::Target(2), SiteMatrix::identity(TARGET_DIM)).unwrap();
        let full = Operator::embed_site(&op, dims).unwrap();
        let dense = full.to_dense();
        for i in 0..dims.dim() {
            for j in 0..dims.dim() {
                let expect = if i == j { C64::ONE } else { C64::ZERO };
                assert_eq!(dense[(i, j)], expect);
            }
        }
    }

    #[test]
    fn embed_projector_diagonal_pattern() {
        // |R><R| on target 0 at k=1, N=1: ones exactly where the target digit is 3.
        let dims = SpaceDims::new(1, 1).unwrap();
        let op = SiteOperator::new(
            Site::Target(0),
            SiteMatrix::projector(TARGET_DIM, TargetLevel::R.index()),
        )
        .unwrap();
        let dense = Operator::embed_site(&op, dims).unwrap().to_dense();
        for flat in 0..12 {
            let label = BasisLabel::from_flat(dims, flat);
            let expect = if label.targets[0] == TargetLevel::R {
                C64::ONE
            } else {
                C64::ZERO
            };
            assert_eq!(dense[(flat, flat)], expect, "diagonal at {flat}");
        }
        assert_eq!(dense.map(|v| v.norm_sqr()).sum(), 3.0); // one per control level
    }

    #[test]
    fn embed_projector_trace_multiplicative() {
        // trace of |r><r| embedded on the control of k=1, N=4 is 4^4 = 256.
        let dims = SpaceDims::new(1, 4).unwrap();
        let op = SiteOperator::new(
            Site::Control(0),
            SiteMatrix::projector(CONTROL_DIM, ControlLevel::Rydberg.index()),
        )
        .unwrap();
        let dense = Operator::embed_site(&op, dims).unwrap().to_dense();
        let trace: C64 = (0..dims.dim()).map(|i| dense[(i, i)]).sum();
        assert_eq!(trace, c(256.0, 0.0));
    }

    #[test]
    fn embed_pair_projectors() {
        // |r><r| on the control and |R><R| on target 0 at k=1, N=1:
        // diagonal, nonzero only at flat index 11.
        let dims = SpaceDims::new(1, 1).unwrap();
        let a = SiteOperator::new(
            Site::Control(0),
            SiteMatrix::projector(CONTROL_DIM, ControlLevel::Rydberg.index()),
        )
        .unwrap();
        let b = SiteOperator::new(
            Site::Target(0),
            SiteMatrix::projector(TARGET_DIM, TargetLevel::R.index()),
        )
        .unwrap();
        let dense = Operator::embed_pair(&a, &b, dims).unwrap().to_dense();
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == 11 && j == 11 { C64::ONE } else { C64::ZERO };
                assert_eq!(dense[(i, j)], expect);
            }
        }
    }

    #[test]
    fn embed_pair_equals_product_of_embeddings() {
        let dims = SpaceDims::new(1, 2).unwrap();
        let a = SiteOperator::new(
            Site::Control(0),
            SiteMatrix::projector(CONTROL_DIM, ControlLevel::One.index()),
        )
        .unwrap();
        let b = SiteOperator::new(
            Site::Target(1),
            SiteMatrix::projector(TARGET_DIM, TargetLevel::P.index()),
        )
        .unwrap();
        let pair = Operator::embed_pair(&a, &b, dims).unwrap().to_dense();
        let prod = Operator::embed_site(&a, dims).unwrap().to_dense()
            * Operator::embed_site(&b, dims).unwrap().to_dense();
        assert_eq!(pair, prod);
    }

    #[test]
    fn target_target_projector_count() {
        // k=1, N=2: |R><R| x |R><R| on the two targets has exactly 3 nonzero
        // diagonal entries, one per control level.
        let dims = SpaceDims::new(1, 2).unwrap();
        let a = SiteOperator::new(
            Site::Target(0),
            SiteMatrix::projector(TARGET_DIM, TargetLevel::R.index()),
        )
        .unwrap();
        let b = SiteOperator::new(
            Site::Target(1),
            SiteMatrix::projector(TARGET_DIM, TargetLevel::R.index()),
        )
        .unwrap();
        let dense = Operator::embed_pair(&a, &b, dims).unwrap().to_dense();
        let nonzero: usize = (0..dims.dim())
            .filter(|&i| dense[(i, i)].norm_sqr() > 0.0)
            .count();
        assert_eq!(nonzero, 3);
        let offdiag: f64 = (0..dims.dim())
            .flat_map(|i| (0..dims.dim()).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| dense[(i, j)].norm_sqr())
            .sum();
        assert_eq!(offdiag, 0.0);
    }

    #[test]
    fn embed_pair_rejects_same_site() {
        let dims = SpaceDims::new(1, 1).unwrap();
        let a = SiteOperator::new(Site::Target(0), SiteMatrix::identity(TARGET_DIM)).unwrap();
        assert!(matches!(
            Operator::embed_pair(&a, &a, dims),
            Err(Error::SameSiteTwice(_))
        ));
    }

    #[test]
    fn site_out_of_range() {
        let dims = SpaceDims::new(1, 2).unwrap();
        let op = SiteOperator::new(Site::Target(2), SiteMatrix::identity(TARGET_DIM)).unwrap();
        assert!(matches!(
            Operator::embed_site(&op, dims),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    // Independent dense oracle: explicit Kronecker product of per-site
    // matrices, built with none of the stride machinery above.
    fn kron_oracle(factors: &[nalgebra::DMatrix<C64>]) -> nalgebra::DMatrix<C64> {
        let mut out = nalgebra::DMatrix::from_element(1, 1, C64::ONE);
        for f in factors {
            out = out.kronecker(f);
        }
        out
    }

    fn random_site_matrix(dim: usize, rng: &mut impl rand::Rng) -> SiteMatrix {
        let mut m = SiteMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        m
    }

    fn site_to_dmatrix(m: &SiteMatrix) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
    }

    #[test]
    fn matrix_free_apply_matches_kron_oracle() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for (k, n) in [(1, 1), (1, 2), (2, 1)] {
            let dims = SpaceDims::new(k, n).unwrap();
            let dim = dims.dim();

            // One random op per site, embedded and summed.
            let mut op = Operator::zero(dims);
            let mut oracle = nalgebra::DMatrix::<C64>::zeros(dim, dim);
            for site in dims.sites().collect::<Vec<_>>() {
                let m = random_site_matrix(site.local_dim(), &mut rng);
                op.add_site(&SiteOperator::new(site, m).unwrap()).unwrap();
                let factors: Vec<_> = dims
                    .sites()
                    .map(|s| {
                        if s == site {
                            site_to_dmatrix(&m)
                        } else {
                            nalgebra::DMatrix::identity(s.local_dim(), s.local_dim())
                        }
                    })
                    .collect();
                oracle += kron_oracle(&factors);
            }

            let x: Vec<C64> = (0..dim)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut y = vec![C64::ZERO; dim];
            op.apply(&x, &mut y);

            let xv = nalgebra::DVector::from_column_slice(&x);
            let yv = &oracle * xv;
            let num: f64 = y
                .iter()
                .zip(yv.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let den: f64 = yv.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(num / den < 1e-12, "relative error {} at k={k}, n={n}", num / den);
        }
    }

    #[test]
    fn embed_preserves_hermiticity_and_psd() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let dims = SpaceDims::new(1, 2).unwrap();
        // Build a random PSD site matrix m = a^H a.
        let a = random_site_matrix(TARGET_DIM, &mut rng);
        let ad = site_to_dmatrix(&a);
        let psd = ad.adjoint() * &ad;
        let mut m = SiteMatrix::zeros(TARGET_DIM);
        for i in 0..TARGET_DIM {
            for j in 0..TARGET_DIM {
                m.set(i, j, psd[(i, j)]);
            }
        }
        let dense = Operator::embed_site(
            &SiteOperator::new(Site::Target(1), m).unwrap(),
            dims,
        )
        .unwrap()
        .to_dense();
        let defect = (&dense - dense.adjoint()).norm();
        assert!(defect < 1e-14);
        let eig = dense.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn state_vector_basics() {
        let dims = SpaceDims::new(1, 1).unwrap();
        let label = BasisLabel::new(vec![ControlLevel::One], vec![TargetLevel::B]);
        let s = StateVector::basis(dims, &label).unwrap();
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.amplitude(&label).unwrap(), C64::ONE);
        assert_eq!(s.population(&label).unwrap(), 1.0);
    }
}
