//! Curvature of the invariant metric at the base point.
//!
//! With `U` defined by `2<U(x,y),z> = <[z,x]_p, y> + <x, [z,y]_p>` the
//! Levi-Civita connection at o is `-1/2 [x,y]_p + U(x,y)` and the difference
//! with the canonical connection is `D_x y = 1/2 [x,y]_p + U(x,y)`. Both
//! connections have parallel torsion and curvature data along the orbit, so
//! covariant derivatives of R follow from D by the Leibniz rule alone.
//!
//! Sign convention: `R(x,y) = [nabla_x, nabla_y] - nabla_[x,y]`, so that the
//! round sphere has `R(x,y)y = x` for orthonormal x, y.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GeometryError, Result};
use crate::liealg::{unit_vector, AlgebraElement, PVector, Presentation};
use crate::tolerances;

/// Eigenvalue with multiplicity.
pub type SpectrumPair = (f64, usize);

/// Jacobi spectrum restricted to the vertical and horizontal blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitSpectrum {
    pub p1: Vec<SpectrumPair>,
    pub p2: Vec<SpectrumPair>,
    /// Norm of the block coupling p1 to p2; zero when both are invariant.
    pub coupling: f64,
}

#[derive(Clone, Debug)]
pub struct CurvatureModel {
    pres: Presentation,
    dim: usize,
    // [(a*dim + b)*dim + c]
    u_arr: Vec<f64>,
    d_arr: Vec<f64>,
    // [((a*dim + b)*dim + c)*dim + o]
    r_arr: Option<Vec<f64>>,
    // [(((v*dim + a)*dim + b)*dim + c)*dim + o]
    nabla_arr: Option<Vec<f64>>,
}

fn bilinear(arr: &[f64], dim: usize, x: &PVector, y: &PVector) -> PVector {
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
                out[c] += w * arr[base + c];
            }
        }
    }
    out
}

/// Contract the first slot of a flat tensor whose remaining extent is `rest`.
fn contract_first(arr: &[f64], dim: usize, rest: usize, x: &PVector) -> Vec<f64> {
    let mut out = vec![0.0; rest];
    for a in 0..dim {
        let w = x[a];
        if w == 0.0 {
            continue;
        }
        let block = &arr[a * rest..(a + 1) * rest];
        for (o, v) in out.iter_mut().zip(block) {
            *o += w * v;
        }
    }
    out
}

/// Contract the leading slots of a flat tensor, one matrix per slot. Slot s
/// of the result runs over the columns of `mats[s]`; the trailing extent is
/// untouched.
fn contract_slots(arr: &[f64], dim: usize, mats: &[&DMatrix<f64>]) -> Vec<f64> {
    let mut cur: Vec<f64> = arr.to_vec();
    let mut blocks = 1;
    for m in mats {
        let k = m.ncols();
        let rest = cur.len() / (blocks * dim);
        let mut next = vec![0.0; blocks * k * rest];
        for b in 0..blocks {
            for a in 0..dim {
                let src = &cur[(b * dim + a) * rest..(b * dim + a + 1) * rest];
                for i in 0..k {
                    let w = m[(a, i)];
                    if w == 0.0 {
                        continue;
                    }
                    let dst = &mut next[(b * k + i) * rest..(b * k + i + 1) * rest];
                    for (o, s) in dst.iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            }
        }
        blocks *= k;
        cur = next;
    }
    cur
}

fn split_vectors(flat: Vec<f64>, dim: usize) -> Vec<PVector> {
    flat.chunks(dim).map(DVector::from_column_slice).collect()
}

impl CurvatureModel {
    /// Build a model, memoizing R and its first derivative as dense arrays
    /// when `dim p` is small enough.
    pub fn new(pres: Presentation) -> Self {
        let memo = pres.dim() <= tolerances::MEMO_MAX_DIM;
        Self::build(pres, memo)
    }

    /// Build a model that always evaluates R from the bracket formula.
    pub fn lazy(pres: Presentation) -> Self {
        Self::build(pres, false)
    }

    fn build(pres: Presentation, memo: bool) -> Self {
        let dim = pres.dim();
        let s = pres.structure_constants();
        let mut u_arr = vec![0.0; dim * dim * dim];
        let mut d_arr = vec![0.0; dim * dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let u = 0.5 * (s[(c * dim + a) * dim + b] + s[(c * dim + b) * dim + a]);
                    u_arr[(a * dim + b) * dim + c] = u;
                    d_arr[(a * dim + b) * dim + c] = 0.5 * s[(a * dim + b) * dim + c] + u;
                }
            }
        }
        let mut model = CurvatureModel { pres, dim, u_arr, d_arr, r_arr: None, nabla_arr: None };
        if memo {
            let r = model.build_r_array();
            model.r_arr = Some(r);
            let nabla = model.build_nabla_array();
            model.nabla_arr = Some(nabla);
        }
        model
    }

    fn build_r_array(&self) -> Vec<f64> {
        let dim = self.dim;
        let basis: Vec<PVector> = (0..dim).map(|a| unit_vector(dim, a)).collect();
        let mut arr = vec![0.0; dim * dim * dim * dim];
        for a in 0..dim {
            for b in (a + 1)..dim {
                let kab = self.pres.bracket_k(&basis[a], &basis[b]);
                for c in 0..dim {
                    let r = self.r_formula(&basis[a], &basis[b], &basis[c], &kab);
                    for o in 0..dim {
                        arr[((a * dim + b) * dim + c) * dim + o] = r[o];
                        arr[((b * dim + a) * dim + c) * dim + o] = -r[o];
                    }
                }
            }
        }
        arr
    }

    fn build_nabla_array(&self) -> Vec<f64> {
        let dim = self.dim;
        let r = self.r_arr.as_ref().expect("R array present");
        let d = &self.d_arr;
        let d2 = dim * dim;
        let d3 = d2 * dim;
        let d4 = d3 * dim;
        let mut out = vec![0.0; d4 * dim];
        for v in 0..dim {
            let dv = |m: usize, o: usize| d[(v * dim + m) * dim + o];
            let t = &mut out[v * d4..(v + 1) * d4];
            for a in 0..dim {
                for b in 0..dim {
                    for c in 0..dim {
                        let idx = ((a * dim + b) * dim + c) * dim;
                        for m in 0..dim {
                            // D_v R(a,b,c)
                            let rm = r[idx + m];
                            if rm != 0.0 {
                                for o in 0..dim {
                                    t[idx + o] += rm * dv(m, o);
                                }
                            }
                            // - R(D_v a, b, c) - R(a, D_v b, c) - R(a, b, D_v c)
                            let wa = dv(a, m);
                            let wb = dv(b, m);
                            let wc = dv(c, m);
                            for o in 0..dim {
                                t[idx + o] -= wa * r[((m * dim + b) * dim + c) * dim + o]
                                    + wb * r[((a * dim + m) * dim + c) * dim + o]
                                    + wc * r[((a * dim + b) * dim + m) * dim + o];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_memoized(&self) -> bool {
        self.r_arr.is_some()
    }

    pub fn u(&self, x: &PVector, y: &PVector) -> PVector {
        bilinear(&self.u_arr, self.dim, x, y)
    }

    pub fn d(&self, x: &PVector, y: &PVector) -> PVector {
        bilinear(&self.d_arr, self.dim, x, y)
    }

    /// The linear map `y -> D_x y` as a matrix.
    pub fn d_matrix(&self, x: &PVector) -> DMatrix<f64> {
        let dim = self.dim;
        let flat = contract_first(&self.d_arr, dim, dim * dim, x);
        // flat[m*dim + o] = (D_x e_m)_o
        DMatrix::from_fn(dim, dim, |o, m| flat[m * dim + o])
    }

    fn r_formula(&self, x: &PVector, y: &PVector, z: &PVector, kxy: &AlgebraElement) -> PVector {
        let p = &self.pres;
        let br = |a: &PVector, b: &PVector| p.bracket_p(a, b);
        let u = |a: &PVector, b: &PVector| self.u(a, b);
        let xy = br(x, y);
        let zy = br(z, y);
        let zx = br(z, x);
        let uzy = u(z, y);
        let uzx = u(z, x);
        br(z, &xy) * 0.5 - p.act_p(kxy, z) - u(z, &xy) + br(&zy, x) * 0.25 - u(&zy, x) * 0.5 - br(&uzy, x) * 0.5
            + u(&uzy, x)
            - br(&zx, y) * 0.25
            + u(&zx, y) * 0.5
            + br(&uzx, y) * 0.5
            - u(&uzx, y)
    }

    /// R(x,y)z straight from the bracket formula.
    pub fn r_lazy(&self, x: &PVector, y: &PVector, z: &PVector) -> PVector {
        let kxy = self.pres.bracket_k(x, y);
        self.r_formula(x, y, z, &kxy)
    }

    /// R(x,y)z.
    pub fn r(&self, x: &PVector, y: &PVector, z: &PVector) -> PVector {
        match &self.r_arr {
            Some(arr) => {
                let dim = self.dim;
                let t = contract_first(arr, dim, dim * dim * dim, x);
                let t = contract_first(&t, dim, dim * dim, y);
                let t = contract_first(&t, dim, dim, z);
                DVector::from_vec(t)
            }
            None => self.r_lazy(x, y, z),
        }
    }

    /// Matrix whose i-th column is R with `e_i` inserted in `slot` (0, 1 or 2)
    /// and `a`, `b` filling the other two slots in order.
    pub fn r_slot_matrix(&self, slot: usize, a: &PVector, b: &PVector) -> DMatrix<f64> {
        let dim = self.dim;
        let mut out = DMatrix::zeros(dim, dim);
        match (&self.r_arr, slot) {
            (Some(arr), 0) => {
                // R(e_i, a, b): contract slots 1, 2 of each i-block
                for i in 0..dim {
                    let block = &arr[i * dim * dim * dim..(i + 1) * dim * dim * dim];
                    let t = contract_first(block, dim, dim * dim, a);
                    let t = contract_first(&t, dim, dim, b);
                    out.set_column(i, &DVector::from_vec(t));
                }
            }
            (Some(arr), 1) => {
                let t = contract_first(arr, dim, dim * dim * dim, a);
                for i in 0..dim {
                    let block = &t[i * dim * dim..(i + 1) * dim * dim];
                    out.set_column(i, &DVector::from_vec(contract_first(block, dim, dim, b)));
                }
            }
            (Some(arr), 2) => {
                let t = contract_first(arr, dim, dim * dim * dim, a);
                let t = contract_first(&t, dim, dim * dim, b);
                for i in 0..dim {
                    out.set_column(i, &DVector::from_column_slice(&t[i * dim..(i + 1) * dim]));
                }
            }
            _ => {
                for i in 0..dim {
                    let e = unit_vector(dim, i);
                    let col = match slot {
                        0 => self.r(&e, a, b),
                        1 => self.r(a, &e, b),
                        _ => self.r(a, b, &e),
                    };
                    out.set_column(i, &col);
                }
            }
        }
        out
    }

    /// (nabla_v R)(x,y)z.
    pub fn nabla_r(&self, v: &PVector, x: &PVector, y: &PVector, z: &PVector) -> PVector {
        match &self.nabla_arr {
            Some(arr) => {
                let dim = self.dim;
                let t = contract_first(arr, dim, dim.pow(4), v);
                let t = contract_first(&t, dim, dim.pow(3), x);
                let t = contract_first(&t, dim, dim * dim, y);
                DVector::from_vec(contract_first(&t, dim, dim, z))
            }
            None => self.nabla_k_r(std::slice::from_ref(v), x, y, z),
        }
    }

    /// `(nabla^k R)(v_1, .., v_k; x, y)z` with `v_1` the outermost derivative.
    pub fn nabla_k_r(&self, vs: &[PVector], x: &PVector, y: &PVector, z: &PVector) -> PVector {
        if vs.is_empty() {
            return self.r(x, y, z);
        }
        if vs.len() == 1 && self.nabla_arr.is_some() {
            return self.nabla_r(&vs[0], x, y, z);
        }
        let v = &vs[0];
        let rest = &vs[1..];
        let mut out = self.d(v, &self.nabla_k_r(rest, x, y, z));
        for i in 0..rest.len() {
            let mut shifted = rest.to_vec();
            shifted[i] = self.d(v, &rest[i]);
            out -= self.nabla_k_r(&shifted, x, y, z);
        }
        out -= self.nabla_k_r(rest, &self.d(v, x), y, z);
        out -= self.nabla_k_r(rest, x, &self.d(v, y), z);
        out -= self.nabla_k_r(rest, x, y, &self.d(v, z));
        out
    }

    /// `D_{f_a} f_b` for the columns of `f`, indexed `a*d + b`.
    pub fn d_frame(&self, f: &DMatrix<f64>) -> Vec<PVector> {
        split_vectors(contract_slots(&self.d_arr, self.dim, &[f, f]), self.dim)
    }

    /// `R(f_a, f_b) f_c`, indexed `(a*d + b)*d + c`.
    pub fn r_frame(&self, f: &DMatrix<f64>) -> Vec<PVector> {
        match &self.r_arr {
            Some(arr) => split_vectors(contract_slots(arr, self.dim, &[f, f, f]), self.dim),
            None => {
                let cols: Vec<PVector> = f.column_iter().map(|c| c.into_owned()).collect();
                let mut out = Vec::with_capacity(cols.len().pow(3));
                for a in &cols {
                    for b in &cols {
                        for c in &cols {
                            out.push(self.r(a, b, c));
                        }
                    }
                }
                out
            }
        }
    }

    /// `(nabla_{f_v} R)(f_a, f_b) f_c`, indexed `((v*d + a)*d + b)*d + c`.
    pub fn nabla_frame(&self, f: &DMatrix<f64>) -> Vec<PVector> {
        match &self.nabla_arr {
            Some(arr) => split_vectors(contract_slots(arr, self.dim, &[f, f, f, f]), self.dim),
            None => self.nabla_k_frame_lazy(1, f),
        }
    }

    /// `(nabla^2 R)(f_w, f_v; f_a, f_b) f_c`, indexed like [`Self::nabla_frame`]
    /// with the outer derivative `w` in front.
    pub fn nabla2_frame(&self, f: &DMatrix<f64>) -> Vec<PVector> {
        let Some(arr) = &self.nabla_arr else {
            return self.nabla_k_frame_lazy(2, f);
        };
        let dim = self.dim;
        let d = f.ncols();
        let e = 2 * d;
        let mut out = Vec::with_capacity(d.pow(5));
        for w in 0..d {
            let dw = self.d_matrix(&f.column(w).into_owned());
            let mut h = DMatrix::zeros(dim, e);
            h.view_mut((0, 0), (dim, d)).copy_from(f);
            h.view_mut((0, d), (dim, d)).copy_from(&(&dw * f));
            let t = contract_slots(arr, dim, &[&h, &h, &h, &h]);
            let at = |i: [usize; 4]| {
                let idx = (((i[0] * e + i[1]) * e + i[2]) * e + i[3]) * dim;
                DVector::from_column_slice(&t[idx..idx + dim])
            };
            for v in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            let mut val = &dw * at([v, a, b, c]);
                            val -= at([v + d, a, b, c]);
                            val -= at([v, a + d, b, c]);
                            val -= at([v, a, b + d, c]);
                            val -= at([v, a, b, c + d]);
                            out.push(val);
                        }
                    }
                }
            }
        }
        out
    }

    fn nabla_k_frame_lazy(&self, k: usize, f: &DMatrix<f64>) -> Vec<PVector> {
        let cols: Vec<PVector> = f.column_iter().map(|c| c.into_owned()).collect();
        let d = cols.len();
        let total = d.pow(k as u32 + 3);
        (0..total)
            .map(|mut idx| {
                let mut slots = vec![0; k + 3];
                for s in (0..k + 3).rev() {
                    slots[s] = idx % d;
                    idx /= d;
                }
                let vs: Vec<PVector> = slots[..k].iter().map(|&i| cols[i].clone()).collect();
                self.nabla_k_r(&vs, &cols[slots[k]], &cols[slots[k + 1]], &cols[slots[k + 2]])
            })
            .collect()
    }

    /// The Jacobi operator `y -> R(y,x)x`.
    pub fn jacobi(&self, x: &PVector) -> Result<DMatrix<f64>> {
        if x.norm() == 0.0 {
            return Err(GeometryError::ZeroVector);
        }
        let m = self.r_slot_matrix(0, x, x);
        Ok((&m + m.transpose()) * 0.5)
    }

    pub fn jacobi_spectrum(&self, x: &PVector) -> Result<Vec<SpectrumPair>> {
        Ok(group_eigenvalues(self.jacobi(x)?))
    }

    /// Spectrum of the Jacobi operator on p1 and on p2 separately.
    pub fn jacobi_split_spectrum(&self, x: &PVector) -> Result<SplitSpectrum> {
        let j = self.jacobi(x)?;
        let m = self.pres.dim_p1();
        let d = self.dim;
        let b1 = j.view((0, 0), (m, m)).into_owned();
        let b2 = j.view((m, m), (d - m, d - m)).into_owned();
        let coupling = j.view((0, m), (m, d - m)).norm();
        Ok(SplitSpectrum { p1: group_eigenvalues(b1), p2: group_eigenvalues(b2), coupling })
    }

    pub fn sectional(&self, x: &PVector, y: &PVector) -> Result<f64> {
        let denom = x.dot(x) * y.dot(y) - x.dot(y).powi(2);
        if denom < tolerances::SECTIONAL_DENOMINATOR * (x.dot(x) * y.dot(y)).max(1.0) {
            return Err(GeometryError::Degenerate);
        }
        Ok(self.r(x, y, y).dot(x) / denom)
    }
}

/// Sorted eigenvalues grouped into (value, multiplicity).
pub fn group_eigenvalues(sym: DMatrix<f64>) -> Vec<SpectrumPair> {
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for v in ev {
        match out.last_mut() {
            Some((sum, count, last)) if (v - *last).abs() <= tolerances::SPECTRUM_GROUPING => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(s, c, _)| (s / c as f64, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::Family;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(f: Family, n: usize, tau: f64) -> CurvatureModel {
        CurvatureModel::new(Presentation::build(f, n, tau).unwrap())
    }

    fn close(a: &PVector, b: &PVector) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn u_vanishes_on_vertical_pairs() {
        let m = model(Family::H, 1, 0.3);
        let p = m.presentation();
        for i in 1..=3 {
            for j in 1..=3 {
                let (xi, xj) = (p.x_vec(i).unwrap(), p.x_vec(j).unwrap());
                assert!(m.u(&xi, &xj).amax() < 1e-14);
                // on p1 only the bracket half of D survives
                let half = p.bracket_p(&xi, &xj) * 0.5;
                assert!((m.d(&xi, &xj) - half).amax() < 1e-14);
            }
        }
        let z = DVector::zeros(m.dim());
        assert_eq!(m.u(&p.y_vec(1).unwrap(), &z).amax(), 0.0);
    }

    #[test]
    fn u_solves_its_defining_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = model(Family::O, 1, 0.35);
        let p = m.presentation();
        for _ in 0..10 {
            let x = p.random_pvector(&mut rng);
            let y = p.random_pvector(&mut rng);
            let u = m.u(&x, &y);
            assert!(close(&u, &m.u(&y, &x)) < 1e-12);
            for c in 0..m.dim() {
                let z = unit_vector(m.dim(), c);
                let rhs = p.bracket_p(&z, &x).dot(&y) + x.dot(&p.bracket_p(&z, &y));
                assert!((2.0 * u.dot(&z) - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn difference_tensor_examples() {
        for tau in [0.3, 1.7] {
            let h = model(Family::H, 2, tau);
            let p = h.presentation();
            let y = p.y_vec(1).unwrap();
            for i in 1..=3 {
                let jy = p.apply_j(i, &y).unwrap();
                assert!(close(&h.d(&y, &p.x_vec(i).unwrap()), &(&jy * tau)) < 1e-13);
            }
            let o = model(Family::O, 1, tau);
            let q = o.presentation();
            let y1 = q.y_vec(1).unwrap();
            for i in 1..=7 {
                let jy = q.apply_j(i, &y1).unwrap();
                assert!(close(&o.d(&y1, &q.x_vec(i).unwrap()), &(&jy * (2.0 * tau))) < 1e-13);
            }
        }
    }

    #[test]
    fn d_is_skew_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (f, n) in [(Family::C, 2), (Family::H, 1), (Family::O, 1)] {
            let m = model(f, n, 0.42);
            let p = m.presentation();
            for _ in 0..20 {
                let x = p.random_pvector(&mut rng);
                let dx = m.d_matrix(&x);
                assert!((&dx + dx.transpose()).amax() < 1e-12);
                let y = p.random_pvector(&mut rng);
                assert!(close(&(&dx * &y), &m.d(&x, &y)) < 1e-12);
            }
        }
    }

    #[test]
    fn curvature_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (f, n, tau) in [(Family::C, 2, 0.3), (Family::H, 1, 0.6), (Family::O, 1, 1.3)] {
            let m = model(f, n, tau);
            let p = m.presentation();
            for _ in 0..20 {
                let [x, y, z, w] = std::array::from_fn(|_| p.random_pvector(&mut rng));
                assert!(close(&m.r(&x, &y, &z), &-m.r(&y, &x, &z)) < 1e-11);
                assert!((m.r(&x, &y, &z).dot(&w) + m.r(&x, &y, &w).dot(&z)).abs() < 1e-11);
                let bianchi = m.r(&x, &y, &z) + m.r(&y, &z, &x) + m.r(&z, &x, &y);
                assert!(bianchi.amax() < 1e-11);
                assert!((m.r(&x, &y, &z).dot(&w) - m.r(&z, &w, &x).dot(&y)).abs() < 1e-11);
                assert!(m.r(&x, &x, &z).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn memo_agrees_with_lazy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (f, n) in [(Family::H, 2), (Family::O, 1)] {
            let pres = Presentation::build(f, n, 0.27).unwrap();
            let memo = CurvatureModel::new(pres.clone());
            let lazy = CurvatureModel::lazy(pres);
            assert!(memo.is_memoized() && !lazy.is_memoized());
            for _ in 0..200 {
                let [x, y, z] = std::array::from_fn(|_| memo.presentation().random_pvector(&mut rng));
                assert!(close(&memo.r(&x, &y, &z), &lazy.r(&x, &y, &z)) < 1e-12);
            }
            for _ in 0..5 {
                let [v, x, y, z] = std::array::from_fn(|_| memo.presentation().random_pvector(&mut rng));
                assert!(close(&memo.nabla_r(&v, &x, &y, &z), &lazy.nabla_r(&v, &x, &y, &z)) < 1e-11);
                assert!((memo.r_slot_matrix(1, &x, &y) - lazy.r_slot_matrix(1, &x, &y)).amax() < 1e-12);
                assert!((memo.r_slot_matrix(2, &x, &y) - lazy.r_slot_matrix(2, &x, &y)).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn large_models_stay_lazy() {
        let m = model(Family::C, 8, 0.5);
        assert_eq!(m.dim(), 17);
        assert!(!m.is_memoized());
    }

    #[test]
    fn round_sphere_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (f, n) in [(Family::C, 1), (Family::H, 1), (Family::O, 1)] {
            let m = model(f, n, 1.0);
            let x = m.presentation().random_pvector(&mut rng).normalize();
            let spec = m.jacobi_spectrum(&x).unwrap();
            assert_eq!(spec.len(), 2);
            assert!(spec[0].0.abs() < 1e-12 && spec[0].1 == 1);
            assert!((spec[1].0 - 1.0).abs() < 1e-12 && spec[1].1 == m.dim() - 1);
        }
    }

    #[test]
    fn quaternionic_vertical_spectrum() {
        let tau = 0.3;
        let m = model(Family::H, 1, tau);
        let s = m.jacobi_split_spectrum(&m.presentation().x_hat(1).unwrap()).unwrap();
        assert_eq!(s.p1.len(), 2);
        assert!(s.p1[0].0.abs() < 1e-12 && s.p1[0].1 == 1);
        assert!((s.p1[1].0 - 1.0 / tau).abs() < 1e-12 && s.p1[1].1 == 2);
        assert_eq!(s.p2.len(), 1);
        assert!((s.p2[0].0 - tau).abs() < 1e-12 && s.p2[0].1 == 4);
        assert!(s.coupling < 1e-12);
    }

    #[test]
    fn octonionic_horizontal_spectrum() {
        let tau = 0.25;
        let m = model(Family::O, 1, tau);
        let s = m.jacobi_split_spectrum(&m.presentation().y_vec(1).unwrap()).unwrap();
        assert_eq!(s.p1, vec![(s.p1[0].0, 7)]);
        assert!((s.p1[0].0 - tau).abs() < 1e-12);
        assert_eq!(s.p2.len(), 2);
        assert!((s.p2[1].0 - (4.0 - 3.0 * tau)).abs() < 1e-12 && s.p2[1].1 == 7);
    }

    #[test]
    fn jacobi_rejects_zero() {
        let m = model(Family::C, 1, 0.5);
        assert_eq!(m.jacobi(&DVector::zeros(3)).unwrap_err(), GeometryError::ZeroVector);
        let y = m.presentation().y_vec(1).unwrap();
        assert_eq!(m.sectional(&y, &(&y * 2.0)).unwrap_err(), GeometryError::Degenerate);
    }

    #[test]
    fn round_sphere_sectional() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = model(Family::H, 1, 1.0);
        for _ in 0..20 {
            let x = m.presentation().random_pvector(&mut rng);
            let y = m.presentation().random_pvector(&mut rng);
            assert!((m.sectional(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    // Closed forms for <(nabla_u R)(v,u)u, Y_1> and <(nabla_u R)(v,u)v, X_1> on
    // the two-quaternionic-line configuration used to rule out projective
    // planes at generic tau.
    #[test]
    fn nabla_r_closed_forms() {
        let tau = 0.25;
        let m = model(Family::H, 2, tau);
        let p = m.presentation();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xh = |i| p.x_hat(i).unwrap();
        let y1 = p.y_vec(1).unwrap();
        let j1y1 = p.apply_j(1, &y1).unwrap();
        let y2 = p.y_vec(2).unwrap();
        for trial in 0..5 {
            let a: Vec<f64> = (0..4).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
            let b: Vec<f64> = (0..6).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
            let (a, b) = if trial == 0 { (vec![1.0, 0.3, -0.2, 1.0], vec![0.1, 0.2, 0.3, 0.0, 1.0, 0.4]) } else { (a, b) };
            let u = xh(1) * a[0] + xh(2) * a[1] + xh(3) * a[2] + &y1 * a[3];
            let v = xh(1) * b[0] + xh(2) * b[1] + xh(3) * b[2] + &j1y1 * b[4] + &y2 * b[5];
            let lhs = m.nabla_r(&u, &v, &u, &u).dot(&y1);
            let rhs = -4.0 * a[0] * a[3].powi(2) * b[4] * tau.sqrt() * (tau - 1.0);
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");

            let u0 = &u - xh(1) * a[0];
            let v0 = &v - xh(1) * b[0];
            let lhs = m.nabla_r(&u0, &v0, &u0, &v0).dot(&p.x_vec(1).unwrap());
            let rhs = 4.0 * a[3] * (a[1] * b[1] + a[2] * b[2]) * b[4] * (tau - 1.0) * (2.0 * tau - 1.0);
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
        // a1 = a4 = b5 = 1 at tau = 1/4
        let u = xh(1) + &y1;
        let v = &j1y1 * 1.0;
        assert!((m.nabla_r(&u, &v, &u, &u).dot(&y1) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn second_derivative_recursion_matches_lazy() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pres = Presentation::build(Family::H, 1, 0.37).unwrap();
        let memo = CurvatureModel::new(pres.clone());
        let lazy = CurvatureModel::lazy(pres);
        let vs: Vec<PVector> = (0..2).map(|_| memo.presentation().random_pvector(&mut rng)).collect();
        let [x, y, z] = std::array::from_fn(|_| memo.presentation().random_pvector(&mut rng));
        let a = memo.nabla_k_r(&vs, &x, &y, &z);
        let b = lazy.nabla_k_r(&vs, &x, &y, &z);
        assert!(close(&a, &b) < 1e-11);
    }

    #[test]
    fn frame_contractions_match_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pres = Presentation::build(Family::H, 1, 0.33).unwrap();
        let memo = CurvatureModel::new(pres.clone());
        let lazy = CurvatureModel::lazy(pres);
        let f = DMatrix::from_fn(7, 2, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let cols: Vec<PVector> = f.column_iter().map(|c| c.into_owned()).collect();
        let r = memo.r_frame(&f);
        assert!(close(&r[1], &memo.r(&cols[0], &cols[0], &cols[1])) < 1e-12);
        let dd = memo.d_frame(&f);
        assert!(close(&dd[2], &memo.d(&cols[1], &cols[0])) < 1e-12);
        let n1 = memo.nabla_frame(&f);
        let n1l = lazy.nabla_frame(&f);
        for (a, b) in n1.iter().zip(&n1l) {
            assert!(close(a, b) < 1e-11);
        }
        let n2 = memo.nabla2_frame(&f);
        let n2l = lazy.nabla2_frame(&f);
        assert_eq!(n2.len(), 32);
        for (a, b) in n2.iter().zip(&n2l) {
            assert!(close(a, b) < 1e-10);
        }
        let want = memo.nabla_k_r(&[cols[1].clone(), cols[0].clone()], &cols[1], &cols[0], &cols[0]);
        assert!(close(&n2[16 + 4], &want) < 1e-11);
    }

    #[test]
    fn grouping() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 2.0 + 1e-12, 0.0]));
        assert_eq!(group_eigenvalues(m).iter().map(|p| p.1).collect::<Vec<_>>(), vec![1, 1, 2]);
    }
}
