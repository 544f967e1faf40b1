//! Matrix models of u(n+1), sp(n+1) and spin(9) together with the reductive
//! split g = k + p1 + p2 that presents S^{2n+1}, S^{4n+3} and S^15 as
//! homogeneous spaces.
//!
//! Quaternions act on R^4 = span{1, i, j, k} by left multiplication, so a
//! quaternionic (n+1)x(n+1) matrix becomes a real matrix of 4x4 blocks;
//! complex matrices use 2x2 blocks the same way. Conjugate transpose turns
//! into ordinary transpose under this embedding, so the algebras sit inside
//! so(N) and the realified algebra is exactly the set of skew matrices that
//! commute with right multiplication by the imaginary units.
//!
//! Tangent vectors at the base point are coordinate vectors ([`PVector`])
//! in the orthonormal basis
//!
//! * C, H: `X_1/sqrt(tau), .., X_m/sqrt(tau)`, then for each j the block
//!   `Y_j, J_1 Y_j, .., J_m Y_j`;
//! * O: `X_1/(2 sqrt(tau)), .., X_7/(2 sqrt(tau)), Y_1, .., Y_8`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::tolerances;

/// Coordinates of a tangent vector at o in the orthonormal p-basis.
pub type PVector = DVector<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    C,
    H,
    O,
}

impl Family {
    /// Real dimension of the division algebra.
    pub fn dim_f(self) -> usize {
        match self {
            Family::C => 2,
            Family::H => 4,
            Family::O => 8,
        }
    }

    /// Dimension of the vertical space p1.
    pub fn vertical_dim(self) -> usize {
        self.dim_f() - 1
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::C => "C",
            Family::H => "H",
            Family::O => "O",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "C" | "c" => Ok(Family::C),
            "H" | "h" => Ok(Family::H),
            "O" | "o" => Ok(Family::O),
            other => Err(format!("unknown family '{other}', expected C, H or O")),
        }
    }
}

/// A real square matrix in one of the three algebras.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub mat: DMatrix<f64>,
}

impl AlgebraElement {
    pub fn new(mat: DMatrix<f64>) -> Self {
        AlgebraElement { mat }
    }

    pub fn zeros(size: usize) -> Self {
        AlgebraElement { mat: DMatrix::zeros(size, size) }
    }

    pub fn size(&self) -> usize {
        self.mat.nrows()
    }

    /// Matrix commutator `ab - ba`.
    pub fn bracket(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        if self.size() != other.size() {
            return Err(GeometryError::DimensionMismatch { expected: self.size(), got: other.size() });
        }
        Ok(AlgebraElement::new(commutator(&self.mat, &other.mat)))
    }

    /// The ad-invariant form `-tr(ab)`, positive definite on skew matrices.
    pub fn trace_form(&self, other: &AlgebraElement) -> f64 {
        trace_form(&self.mat, &other.mat)
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }
}

pub(crate) fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

pub(crate) fn trace_form(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    -s
}

type Quat = [f64; 4];

fn quat_mul(p: Quat, q: Quat) -> Quat {
    let [a1, b1, c1, d1] = p;
    let [a2, b2, c2, d2] = q;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

fn quat_unit(k: usize) -> Quat {
    let mut q = [0.0; 4];
    q[k] = 1.0;
    q
}

/// Matrix of `x -> q x` (left) or `x -> x q` (right) on the first `d`
/// real coordinates; `d = 2` gives the complex numbers.
fn mult_block(q: Quat, d: usize, left: bool) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |r, c| {
        let e = quat_unit(c);
        let prod = if left { quat_mul(q, e) } else { quat_mul(e, q) };
        prod[r]
    })
}

/// Serializable summary of a presentation.
#[derive(Clone, Debug, Serialize)]
pub struct PresentationDescriptor {
    pub family: Family,
    pub n: usize,
    pub tau: f64,
    pub dim_p1: usize,
    pub dim_p2: usize,
    pub scale: Vec<f64>,
    /// Unscaled generators, each flattened row-major.
    pub basis: Vec<Vec<f64>>,
}

/// A Hopf-Berger sphere `S_{F,tau}` as a reductive homogeneous space.
#[derive(Clone, Debug)]
pub struct Presentation {
    family: Family,
    n: usize,
    tau: f64,
    basis: Vec<AlgebraElement>,
    scale: Vec<f64>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    // structure[(a*dim + b)*dim + c] = c-th coordinate of [e_a, e_b]_p
    structure: Vec<f64>,
    commutant: Vec<DMatrix<f64>>,
}

impl Presentation {
    /// Build the presentation of `S^{2n+1}_{C,tau}`, `S^{4n+3}_{H,tau}` or,
    /// for `Family::O` (which requires `n = 1`), `S^15_{O,tau}`.
    pub fn build(family: Family, n: usize, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(GeometryError::InvalidTau(tau));
        }
        match family {
            Family::O if n != 1 => return Err(GeometryError::OctonionicN(n)),
            _ if n == 0 => return Err(GeometryError::InvalidN(n)),
            _ => {}
        }
        let (basis, scale, commutant) = match family {
            Family::C | Family::H => division_algebra_basis(family, n, tau),
            Family::O => spin9_basis(tau),
        };
        let dim = basis.len();
        let gram = DMatrix::from_fn(dim, dim, |a, b| basis[a].trace_form(&basis[b]));
        let gram_inv = gram.clone().try_inverse().expect("p-basis is linearly independent");
        let mut pres = Presentation {
            family,
            n,
            tau,
            basis,
            scale,
            gram,
            gram_inv,
            structure: Vec::new(),
            commutant,
        };
        let scaled: Vec<DMatrix<f64>> = (0..dim).map(|a| &pres.basis[a].mat * pres.scale[a]).collect();
        let mut structure = vec![0.0; dim * dim * dim];
        for a in 0..dim {
            for b in (a + 1)..dim {
                let c = pres.coords(&commutator(&scaled[a], &scaled[b]));
                for k in 0..dim {
                    structure[(a * dim + b) * dim + k] = c[k];
                    structure[(b * dim + a) * dim + k] = -c[k];
                }
            }
        }
        pres.structure = structure;
        Ok(pres)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Dimension of p, i.e. of the sphere.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dim_p1(&self) -> usize {
        self.family.vertical_dim()
    }

    pub fn dim_p2(&self) -> usize {
        self.dim() - self.dim_p1()
    }

    /// Size of the real matrices.
    pub fn matrix_size(&self) -> usize {
        self.basis[0].size()
    }

    /// Unscaled generators `X_i`, then the p2 generators.
    pub fn basis(&self) -> &[AlgebraElement] {
        &self.basis
    }

    /// Factors turning the generators into the orthonormal basis.
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Trace-form Gram matrix of the unscaled generators.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Raw structure constants, `[(a*dim + b)*dim + c]`.
    pub fn structure_constants(&self) -> &[f64] {
        &self.structure
    }

    pub fn descriptor(&self) -> PresentationDescriptor {
        PresentationDescriptor {
            family: self.family,
            n: self.n,
            tau: self.tau,
            dim_p1: self.dim_p1(),
            dim_p2: self.dim_p2(),
            scale: self.scale.clone(),
            basis: self
                .basis
                .iter()
                .map(|b| {
                    let m = &b.mat;
                    let mut row_major = Vec::with_capacity(m.len());
                    for r in 0..m.nrows() {
                        for c in 0..m.ncols() {
                            row_major.push(m[(r, c)]);
                        }
                    }
                    row_major
                })
                .collect(),
        }
    }

    /// Orthonormal p-coordinates of a matrix, without membership checks.
    fn coords(&self, m: &DMatrix<f64>) -> PVector {
        let dim = self.dim();
        let rhs = DVector::from_fn(dim, |a, _| trace_form(&self.basis[a].mat, m));
        let c = &self.gram_inv * rhs;
        DVector::from_fn(dim, |a, _| c[a] / self.scale[a])
    }

    pub fn embed(&self, v: &PVector) -> AlgebraElement {
        let size = self.matrix_size();
        let mut m = DMatrix::zeros(size, size);
        for (a, b) in self.basis.iter().enumerate() {
            if v[a] != 0.0 {
                m += &b.mat * (v[a] * self.scale[a]);
            }
        }
        AlgebraElement::new(m)
    }

    /// Distance of a matrix from the realified algebra: its symmetric part
    /// plus its failure to commute with right multiplications.
    pub fn algebra_residual(&self, a: &AlgebraElement) -> f64 {
        let m = &a.mat;
        let mut r = (m + m.transpose()).norm() / 2.0;
        for c in &self.commutant {
            r += commutator(m, c).norm();
        }
        r
    }

    fn check_member(&self, a: &AlgebraElement) -> Result<()> {
        if a.size() != self.matrix_size() {
            return Err(GeometryError::DimensionMismatch { expected: self.matrix_size(), got: a.size() });
        }
        let r = self.algebra_residual(a) / a.norm().max(1.0);
        if r > tolerances::ALGEBRA_MEMBERSHIP {
            return Err(GeometryError::NotInAlgebra(r));
        }
        Ok(())
    }

    /// The p-component of an algebra element, in orthonormal coordinates.
    pub fn project_p(&self, a: &AlgebraElement) -> Result<PVector> {
        self.check_member(a)?;
        Ok(self.coords(&a.mat))
    }

    /// The k-component, the trace-form complement of p.
    pub fn project_k(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_member(a)?;
        Ok(self.k_part(&a.mat))
    }

    fn k_part(&self, m: &DMatrix<f64>) -> AlgebraElement {
        let p = self.embed(&self.coords(m));
        AlgebraElement::new(m - p.mat)
    }

    /// `[x, y]_p` through the cached structure constants.
    pub fn bracket_p(&self, x: &PVector, y: &PVector) -> PVector {
        let dim = self.dim();
        let mut out = DVector::zeros(dim);
        for a in 0..dim {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..dim {
                let w = x[a] * y[b];
                if w == 0.0 {
                    continue;
                }
                let base = (a * dim + b) * dim;
                for c in 0..dim {
                    out[c] += w * self.structure[base + c];
                }
            }
        }
        out
    }

    /// `[x, y]_k` as a matrix.
    pub fn bracket_k(&self, x: &PVector, y: &PVector) -> AlgebraElement {
        let xm = self.embed(x);
        let ym = self.embed(y);
        self.k_part(&commutator(&xm.mat, &ym.mat))
    }

    /// `[k, z]_p` for a k-element given as a matrix.
    pub fn act_p(&self, k: &AlgebraElement, z: &PVector) -> PVector {
        let zm = self.embed(z);
        self.coords(&commutator(&k.mat, &zm.mat))
    }

    /// `[[x, y]_k, z]_p`, the term of the curvature formula that leaves p.
    pub fn bracket_k_act(&self, x: &PVector, y: &PVector, z: &PVector) -> PVector {
        self.act_p(&self.bracket_k(x, y), z)
    }

    fn check_vertical_index(&self, i: usize) -> Result<()> {
        let m = self.dim_p1();
        if i == 0 || i > m {
            return Err(GeometryError::IndexOutOfRange { index: i, max: m });
        }
        Ok(())
    }

    /// Number of horizontal generators `Y_j` (n for C and H, 8 for O).
    pub fn num_y(&self) -> usize {
        match self.family {
            Family::O => 8,
            _ => self.n,
        }
    }

    /// Coordinate index of `Y_j` (1-based j).
    pub fn y_index(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.num_y() {
            return Err(GeometryError::IndexOutOfRange { index: j, max: self.num_y() });
        }
        let m = self.dim_p1();
        Ok(match self.family {
            Family::O => m + j - 1,
            _ => m + (j - 1) * (m + 1),
        })
    }

    /// The unscaled generator `X_i` (1-based) in orthonormal coordinates.
    pub fn x_vec(&self, i: usize) -> Result<PVector> {
        self.check_vertical_index(i)?;
        let mut v = DVector::zeros(self.dim());
        v[i - 1] = 1.0 / self.scale[i - 1];
        Ok(v)
    }

    /// The unit vector along `X_i`.
    pub fn x_hat(&self, i: usize) -> Result<PVector> {
        self.check_vertical_index(i)?;
        Ok(unit_vector(self.dim(), i - 1))
    }

    /// `Y_j` (1-based), a unit horizontal vector.
    pub fn y_vec(&self, j: usize) -> Result<PVector> {
        Ok(unit_vector(self.dim(), self.y_index(j)?))
    }

    pub fn p1_part(&self, v: &PVector) -> PVector {
        let m = self.dim_p1();
        DVector::from_fn(self.dim(), |a, _| if a < m { v[a] } else { 0.0 })
    }

    pub fn p2_part(&self, v: &PVector) -> PVector {
        let m = self.dim_p1();
        DVector::from_fn(self.dim(), |a, _| if a < m { 0.0 } else { v[a] })
    }

    /// `J_i v = [v, X_i]` for horizontal v.
    pub fn apply_j(&self, i: usize, v: &PVector) -> Result<PVector> {
        self.check_vertical_index(i)?;
        if v.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let vert = self.p1_part(v).norm();
        if vert > tolerances::CONTAINMENT * v.norm().max(1.0) {
            return Err(GeometryError::NotHorizontal(vert));
        }
        Ok(self.p2_part(&self.bracket_p(&self.p2_part(v), &self.x_vec(i)?)))
    }

    /// `J_x v = [v, x]` for a vertical x given in orthonormal coordinates,
    /// unscaled so that `J_{X_i} = J_i`.
    pub fn apply_j_vertical(&self, x: &PVector, v: &PVector) -> PVector {
        let mut xu = DVector::zeros(self.dim());
        for a in 0..self.dim_p1() {
            xu[a] = x[a];
        }
        self.p2_part(&self.bracket_p(&self.p2_part(v), &xu))
    }

    /// The matrix of `J_i` on all of p (zero on p1).
    pub fn j_matrix(&self, i: usize) -> Result<DMatrix<f64>> {
        self.check_vertical_index(i)?;
        let dim = self.dim();
        let m = self.dim_p1();
        let mut out = DMatrix::zeros(dim, dim);
        for c in m..dim {
            let col = self.apply_j(i, &unit_vector(dim, c))?;
            out.set_column(c, &col);
        }
        Ok(out)
    }

    /// Gram matrix of the orthonormal basis in the tau-metric, computed from
    /// the trace form: on p1 the form is rescaled so that the first vertical
    /// generator has its declared length, on p2 so that `Y_1` is a unit.
    pub fn metric_gram(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let m = self.dim_p1();
        let x_len2 = match self.family {
            Family::O => 4.0 * self.tau,
            _ => self.tau,
        };
        let w1 = x_len2 / self.gram[(0, 0)];
        let y = self.y_index(1).expect("at least one horizontal generator");
        let w2 = 1.0 / self.gram[(y, y)];
        DMatrix::from_fn(dim, dim, |a, b| {
            let w = match (a < m, b < m) {
                (true, true) => w1,
                (false, false) => w2,
                _ => 1.0,
            };
            w * self.gram[(a, b)] * self.scale[a] * self.scale[b]
        })
    }

    /// Oriented triples `(i, j, k)` with `J_j J_i = J_k` on the quaternionic
    /// line through `Y_1`, detected from the matrices. Each line appears
    /// once, rotated so that its smallest index comes first.
    pub fn derive_fano_table(&self) -> Result<Vec<[usize; 3]>> {
        if self.family != Family::O {
            return Err(GeometryError::RequiresOctonions);
        }
        let y1 = self.y_vec(1)?;
        let jy: Vec<PVector> = (1..=7).map(|i| self.apply_j(i, &y1)).collect::<Result<_>>()?;
        let mut lines: Vec<[usize; 3]> = Vec::new();
        for i in 1..=7 {
            for j in (i + 1)..=7 {
                let w = self.apply_j(j, &jy[i - 1])?;
                let mut found = Vec::new();
                for k in 1..=7 {
                    if k == i || k == j {
                        continue;
                    }
                    if (&w - &jy[k - 1]).norm() < tolerances::FANO {
                        found.push((k, 1.0));
                    } else if (&w + &jy[k - 1]).norm() < tolerances::FANO {
                        found.push((k, -1.0));
                    }
                }
                if found.len() != 1 {
                    return Err(GeometryError::FanoAmbiguous(i, j));
                }
                let (k, sign) = found[0];
                let oriented = if sign > 0.0 { [i, j, k] } else { [j, i, k] };
                if !self.fano_triple_holds(oriented)? {
                    return Err(GeometryError::FanoAmbiguous(i, j));
                }
                let rot = rotate_min_first(oriented);
                if !lines.contains(&rot) {
                    lines.push(rot);
                }
            }
        }
        lines.sort();
        Ok(lines)
    }

    /// `J_b J_a = J_c` for all cyclic rotations, on span{Y_1, J_l Y_1 : l in the triple}.
    fn fano_triple_holds(&self, t: [usize; 3]) -> Result<bool> {
        let y1 = self.y_vec(1)?;
        let mut probes = vec![y1.clone()];
        for &l in &t {
            probes.push(self.apply_j(l, &y1)?);
        }
        for r in 0..3 {
            let (a, b, c) = (t[r], t[(r + 1) % 3], t[(r + 2) % 3]);
            for v in &probes {
                let lhs = self.apply_j(b, &self.apply_j(a, v)?)?;
                let rhs = self.apply_j(c, v)?;
                if (lhs - rhs).norm() > tolerances::FANO {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// A Gaussian element of the full algebra g.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> AlgebraElement {
        let size = self.matrix_size();
        match self.family {
            Family::O => {
                let a = DMatrix::from_fn(size, size, |_, _| rng.sample::<f64, _>(StandardNormal));
                AlgebraElement::new((&a - a.transpose()) * 0.5)
            }
            fam => {
                let d = fam.dim_f();
                let blocks = self.n + 1;
                let mut m = DMatrix::zeros(size, size);
                for p in 0..blocks {
                    for q in p..blocks {
                        let mut blk = DMatrix::zeros(d, d);
                        let start = if p == q { 1 } else { 0 };
                        for k in start..d {
                            let z: f64 = rng.sample(StandardNormal);
                            blk += mult_block(quat_unit(k), d, true) * z;
                        }
                        m.view_mut((d * p, d * q), (d, d)).copy_from(&blk);
                        if p != q {
                            m.view_mut((d * q, d * p), (d, d)).copy_from(&(-blk.transpose()));
                        }
                    }
                }
                AlgebraElement::new(m)
            }
        }
    }

    /// A Gaussian tangent vector.
    pub fn random_pvector<R: Rng + ?Sized>(&self, rng: &mut R) -> PVector {
        DVector::from_fn(self.dim(), |_, _| rng.sample(StandardNormal))
    }
}

pub(crate) fn unit_vector(dim: usize, a: usize) -> PVector {
    let mut v = DVector::zeros(dim);
    v[a] = 1.0;
    v
}

fn rotate_min_first(t: [usize; 3]) -> [usize; 3] {
    let pos = (0..3).min_by_key(|&r| t[r]).unwrap();
    [t[pos], t[(pos + 1) % 3], t[(pos + 2) % 3]]
}

type BasisParts = (Vec<AlgebraElement>, Vec<f64>, Vec<DMatrix<f64>>);

fn division_algebra_basis(family: Family, n: usize, tau: f64) -> BasisParts {
    let d = family.dim_f();
    let m = family.vertical_dim();
    let size = d * (n + 1);
    let block = |i: usize, j: usize, b: &DMatrix<f64>| {
        let mut mat = DMatrix::zeros(size, size);
        mat.view_mut((d * i, d * j), (d, d)).copy_from(b);
        mat
    };
    let units: Vec<DMatrix<f64>> = (1..=m).map(|k| mult_block(quat_unit(k), d, true)).collect();
    let one = DMatrix::identity(d, d);

    let xs: Vec<DMatrix<f64>> = units.iter().map(|u| block(n, n, u)).collect();
    let mut basis: Vec<AlgebraElement> = xs.iter().cloned().map(AlgebraElement::new).collect();
    let mut scale = vec![1.0 / tau.sqrt(); m];
    for j in 0..n {
        let y = block(j, n, &one) - block(n, j, &one);
        // J_i Y = [Y, X_i]
        let jys: Vec<DMatrix<f64>> = xs.iter().map(|x| commutator(&y, x)).collect();
        basis.push(AlgebraElement::new(y));
        scale.push(1.0);
        for jy in jys {
            basis.push(AlgebraElement::new(jy));
            scale.push(1.0);
        }
    }

    let mut commutant = Vec::new();
    for k in 1..=m.min(2) {
        let r = mult_block(quat_unit(k), d, false);
        let mut big = DMatrix::zeros(size, size);
        for b in 0..=n {
            big.view_mut((d * b, d * b), (d, d)).copy_from(&r);
        }
        commutant.push(big);
    }
    (basis, scale, commutant)
}

fn spin9_basis(tau: f64) -> BasisParts {
    let e = |i: usize, j: usize| {
        let mut m = DMatrix::zeros(9, 9);
        m[(i - 1, j - 1)] = 1.0;
        m[(j - 1, i - 1)] = -1.0;
        m
    };
    let xs = [
        e(1, 5) + e(2, 6) + e(3, 7) + e(4, 8),
        e(1, 7) + e(2, 8) - e(3, 5) - e(4, 6),
        e(1, 3) - e(2, 4) - e(5, 7) + e(6, 8),
        e(1, 6) - e(2, 5) - e(3, 8) + e(4, 7),
        e(1, 8) - e(2, 7) + e(3, 6) - e(4, 5),
        e(1, 2) + e(3, 4) - e(5, 6) - e(7, 8),
        e(1, 4) + e(2, 3) - e(5, 8) - e(6, 7),
    ];
    let mut basis: Vec<AlgebraElement> = xs.into_iter().map(AlgebraElement::new).collect();
    let mut scale = vec![1.0 / (2.0 * tau.sqrt()); 7];
    for i in 1..=8 {
        basis.push(AlgebraElement::new(e(i, 9) * 2.0));
        scale.push(1.0);
    }
    (basis, scale, Vec::new())
}
