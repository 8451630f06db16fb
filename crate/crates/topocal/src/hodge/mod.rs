//! The complex #_Φ on a flat torus with constant Φ, one Fourier mode at a time.
//!
//! E^j(V) gets an orthonormal basis B_j. The symbol of d on mode k is
//! D_j(k) = i·R_j(k) with R_j(k) = Σ_i k_i M_{j,i} and M_{j,i} = B_{j+1}ᵀ(θ^i∧)B_j,
//! so Δ_j(k) = R_{j−1}R_{j−1}ᵀ + R_jᵀR_j is real symmetric. Inner products are
//! the L² ones with volume normalized to one, so constants have unit norm.

mod decompose;
mod dirac;

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exalg::MultiForm;
use crate::linalg;
use crate::orbits::{ek_space, CalibrationSpec, Kind};
use crate::scalar::{binomial, C64};
use crate::torus::{neg_freq, Freq, Trig, TrigForm};

pub use decompose::{decomposition_checks, hk_lambda2, DecompositionCheck};
pub use dirac::{dirac_check, DiracReport};

/// Highest level with a basis; Laplacians exist for levels 0..=TOP−1.
const TOP: usize = 3;
/// Relative tolerance for fibre membership of inputs.
const FIT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
struct Level {
    degrees: Vec<usize>,
    basis: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct HodgeSystem {
    pub spec: CalibrationSpec,
    pub torus_dim: usize,
    pub freq_bound: i32,
    levels: Vec<Level>,
    /// symbols[j][i] = M_{j,i}: E^j → E^{j+1}
    symbols: Vec<Vec<DMatrix<f64>>>,
    /// Δ_j(k) = Σ_{i≤l} k_i k_l lap[j][(i,l)]
    lap: Vec<Vec<DMatrix<f64>>>,
}

fn pair_index(n: usize, i: usize, l: usize) -> usize {
    // i ≤ l, row-major upper triangle
    i * n - i * (i + 1) / 2 + l
}

fn wedge_matrix(n: usize, i: usize, from: &[usize]) -> DMatrix<f64> {
    let to: Vec<usize> = from.iter().map(|p| p + 1).collect();
    let rows = MultiForm::<f64>::dense_len(n, &to);
    let cols = MultiForm::<f64>::dense_len(n, from);
    let mut m = DMatrix::zeros(rows, cols);
    let mut e = vec![0.0; cols];
    for c in 0..cols {
        e[c] = 1.0;
        let a = MultiForm::from_dense(n, from, &e).wedge_coord(i);
        for (r, v) in a.dense().into_iter().enumerate() {
            m[(r, c)] = v;
        }
        e[c] = 0.0;
    }
    m
}

impl HodgeSystem {
    /// Assembles bases, symbols and Laplacian pieces for the constant point
    /// `spec.phi0` on T^n.
    pub fn build(spec: &CalibrationSpec, torus_dim: usize, freq_bound: i32) -> Result<Self> {
        if spec.dim != torus_dim {
            return Err(Error::DimensionMismatch(format!("structure dim {} vs torus dim {}", spec.dim, torus_dim)));
        }
        if freq_bound < 0 {
            return Err(Error::InvalidInput("frequency bound must be non-negative".into()));
        }
        let n = torus_dim;
        let levels: Vec<Level> = (0..=TOP)
            .map(|j| Level {
                degrees: spec.degrees.iter().map(|p| (p + j).saturating_sub(1)).collect(),
                basis: ek_space(spec, j),
            })
            .collect();
        let symbols: Vec<Vec<DMatrix<f64>>> = (0..TOP)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let w = wedge_matrix(n, i, &levels[j].degrees);
                        levels[j + 1].basis.transpose() * w * &levels[j].basis
                    })
                    .collect()
            })
            .collect();
        let mut lap = Vec::with_capacity(TOP);
        for j in 0..TOP {
            let e = levels[j].basis.ncols();
            let mut pieces = Vec::with_capacity(n * (n + 1) / 2);
            for i in 0..n {
                for l in i..n {
                    let mut s = symbols[j][i].transpose() * &symbols[j][l];
                    if j > 0 {
                        s += &symbols[j - 1][i] * symbols[j - 1][l].transpose();
                    }
                    let s = if i == l { s } else { &s + s.transpose() };
                    debug_assert_eq!(s.nrows(), e);
                    pieces.push(s);
                }
            }
            lap.push(pieces);
        }
        Ok(HodgeSystem { spec: spec.clone(), torus_dim: n, freq_bound, levels, symbols, lap })
    }

    pub fn fibre_dim(&self, j: usize) -> usize {
        self.levels[j].basis.ncols()
    }

    pub fn basis(&self, j: usize) -> &DMatrix<f64> {
        &self.levels[j].basis
    }

    pub fn degrees(&self, j: usize) -> &[usize] {
        &self.levels[j].degrees
    }

    /// R_j(k): E^j → E^{j+1}; the symbol of d is i·R_j(k).
    pub fn symbol(&self, j: usize, k: &[i32]) -> DMatrix<f64> {
        let m = &self.symbols[j];
        let mut out = DMatrix::zeros(m[0].nrows(), m[0].ncols());
        for (i, &ki) in k.iter().enumerate() {
            if ki != 0 {
                out += &m[i] * f64::from(ki);
            }
        }
        out
    }

    pub fn laplacian(&self, j: usize, k: &[i32]) -> DMatrix<f64> {
        let n = self.torus_dim;
        let e = self.fibre_dim(j);
        let mut out = DMatrix::zeros(e, e);
        let nz: Vec<usize> = (0..n).filter(|&i| k[i] != 0).collect();
        for (a, &i) in nz.iter().enumerate() {
            for &l in &nz[a..] {
                let c = f64::from(k[i] * k[l]);
                for (o, &x) in out.as_mut_slice().iter_mut().zip(self.lap[j][pair_index(n, i, l)].as_slice()) {
                    *o += c * x;
                }
            }
        }
        out
    }

    /// dim ker Δ_j(k), via Cholesky with an eigen fallback.
    pub(crate) fn kernel_dim(&self, j: usize, k: &[i32]) -> usize {
        if k.iter().all(|&x| x == 0) {
            return self.fibre_dim(j);
        }
        if self.fibre_dim(j) == 0 {
            return 0;
        }
        let l = self.laplacian(j, k);
        let dmax = l.diagonal().max();
        if let Some(ch) = Cholesky::new(l) {
            let piv = ch.l_dirty().diagonal().map(|x| x * x).min();
            if piv > 1e-8 * dmax {
                return 0;
            }
        }
        let ev = SymmetricEigen::new(self.laplacian(j, k)).eigenvalues;
        let top = ev.max();
        ev.iter().filter(|&&x| x <= 1e-9 * top).count()
    }

    /// Smallest eigenvalue of Δ_j(k)/|k|² over 0 < |k|_∞ ≤ 1.
    pub fn shell_min_eigenvalue(&self, j: usize) -> f64 {
        let mut best = f64::INFINITY;
        for k in half_box(self.torus_dim, 1) {
            let l = self.laplacian(j, &k);
            if l.nrows() == 0 {
                continue;
            }
            let k2: i32 = k.iter().map(|x| x * x).sum();
            best = best.min(SymmetricEigen::new(l).eigenvalues.min() / f64::from(k2));
        }
        best
    }

    /// Frequency-0 copies of the E^j basis.
    pub fn harmonics(&self, j: usize) -> Vec<TrigForm<C64>> {
        let b = self.basis(j);
        (0..b.ncols())
            .map(|c| {
                let v: Vec<C64> = b.column(c).iter().map(|&x| C64::new(x, 0.0)).collect();
                Trig::constant(self.torus_dim, MultiForm::from_dense(self.torus_dim, self.degrees(j), &v))
            })
            .collect()
    }

    /// Coordinates of a fibre element in B_j, checking membership.
    pub fn coords(&self, j: usize, a: &MultiForm<C64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let b = self.basis(j);
        let v = a.dense();
        if v.len() != b.nrows() {
            return Err(Error::DimensionMismatch(format!("fibre length {} vs {}", v.len(), b.nrows())));
        }
        let re = DVector::from_iterator(v.len(), v.iter().map(|z| z.re));
        let im = DVector::from_iterator(v.len(), v.iter().map(|z| z.im));
        let (cr, ci) = (b.transpose() * &re, b.transpose() * &im);
        let res = (&re - b * &cr).norm_squared() + (&im - b * &ci).norm_squared();
        let scale = re.norm_squared() + im.norm_squared();
        if res > FIT_TOL * FIT_TOL * scale.max(f64::MIN_POSITIVE) && res > 1e-28 {
            return Err(Error::NotInSubspace((res / scale.max(f64::MIN_POSITIVE)).sqrt()));
        }
        Ok((cr, ci))
    }

    /// Largest residual of fitting the modes of α into E^j, relative to the
    /// largest mode of α. Modes that cancel to round-off stay below tolerance.
    pub fn membership_residual(&self, j: usize, alpha: &TrigForm<C64>) -> f64 {
        let b = self.basis(j);
        let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
        for c in alpha.modes().values() {
            let v = c.dense();
            if v.len() != b.nrows() {
                return f64::INFINITY;
            }
            for part in [v.iter().map(|z| z.re).collect::<Vec<_>>(), v.iter().map(|z| z.im).collect()] {
                let x = DVector::from_vec(part);
                scale = scale.max(x.norm());
                worst = worst.max((&x - b * (b.transpose() * &x)).norm());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }

    fn from_coords(&self, j: usize, cr: &DVector<f64>, ci: &DVector<f64>) -> MultiForm<C64> {
        let b = self.basis(j);
        let (vr, vi) = (b * cr, b * ci);
        let v: Vec<C64> = vr.iter().zip(vi.iter()).map(|(&r, &i)| C64::new(r, i)).collect();
        MultiForm::from_dense(self.torus_dim, self.degrees(j), &v)
    }

    fn map_field(
        &self,
        from: usize,
        to: usize,
        alpha: &TrigForm<C64>,
        f: impl Fn(&[i32], &DVector<f64>) -> Result<Option<DVector<f64>>>,
    ) -> Result<TrigForm<C64>> {
        let proto = MultiForm::zero(self.torus_dim, self.degrees(to));
        let mut out = Trig::zero(self.torus_dim, &proto).with_cap(alpha.cap());
        for (k, c) in alpha.modes() {
            let (cr, ci) = self.coords(from, c)?;
            if let (Some(xr), Some(xi)) = (f(k, &cr)?, f(k, &ci)?) {
                out.add_mode(k.clone(), self.from_coords(to, &xr, &xi));
            }
        }
        Ok(out)
    }

    /// Δ_# on Γ(E^j).
    pub fn laplacian_apply(&self, j: usize, alpha: &TrigForm<C64>) -> Result<TrigForm<C64>> {
        self.map_field(j, j, alpha, |k, c| Ok(Some(self.laplacian(j, k) * c)))
    }

    /// d on Γ(E^j) in fibre coordinates (agrees with the exterior derivative).
    pub fn d_apply(&self, j: usize, alpha: &TrigForm<C64>) -> Result<TrigForm<C64>> {
        // d = iR: (x + iy) ↦ i R x − R y
        let proto = MultiForm::zero(self.torus_dim, self.degrees(j + 1));
        let mut out = Trig::zero(self.torus_dim, &proto).with_cap(alpha.cap());
        for (k, c) in alpha.modes() {
            let (cr, ci) = self.coords(j, c)?;
            let r = self.symbol(j, k);
            out.add_mode(k.clone(), self.from_coords(j + 1, &(-(&r * ci)), &(&r * cr)));
        }
        Ok(out)
    }

    /// d*: Γ(E^{j+1}) → Γ(E^j), the L² adjoint of d.
    pub fn codifferential(&self, j: usize, beta: &TrigForm<C64>) -> Result<TrigForm<C64>> {
        // d* = −i Rᵀ: (x + iy) ↦ Rᵀy − i Rᵀx
        let proto = MultiForm::zero(self.torus_dim, self.degrees(j));
        let mut out = Trig::zero(self.torus_dim, &proto).with_cap(beta.cap());
        for (k, c) in beta.modes() {
            let (cr, ci) = self.coords(j + 1, c)?;
            let rt = self.symbol(j, k).transpose();
            out.add_mode(k.clone(), self.from_coords(j, &(&rt * ci), &(-(&rt * cr))));
        }
        Ok(out)
    }

    /// Π_harm: the frequency-0 mode.
    pub fn harmonic_part(&self, j: usize, alpha: &TrigForm<C64>) -> Result<TrigForm<C64>> {
        self.map_field(j, j, alpha, |k, c| Ok(k.iter().all(|&x| x == 0).then(|| c.clone())))
    }

    /// G_#: Δβ = α − Π_harm α with Π_harm β = 0, mode by mode.
    pub fn green_apply(&self, j: usize, alpha: &TrigForm<C64>) -> Result<TrigForm<C64>> {
        self.map_field(j, j, alpha, |k, c| {
            if k.iter().all(|&x| x == 0) {
                return Ok(None);
            }
            self.solve(j, k, c).map(Some)
        })
    }

    /// Δ_j(k)⁻¹ c, failing on a singular block.
    pub fn solve(&self, j: usize, k: &[i32], c: &DVector<f64>) -> Result<DVector<f64>> {
        let l = self.laplacian(j, k);
        let dmax = l.diagonal().max();
        if let Some(ch) = Cholesky::new(l.clone()) {
            if ch.l_dirty().diagonal().map(|x| x * x).min() > 1e-8 * dmax {
                return Ok(ch.solve(c));
            }
        }
        let sigma = SymmetricEigen::new(l).eigenvalues.min();
        Err(Error::SingularBlock { freq: k.to_vec(), sigma })
    }

    /// Cohomology dimensions over |k|_∞ ≤ F together with the p-maps.
    pub fn cohomology(&self) -> CohomologyReport {
        let n = self.torus_dim;
        let freqs = half_box(n, self.freq_bound);
        let counts = parallel_kernel_dims(self, &freqs);
        let mut h_sharp = Vec::with_capacity(TOP);
        let mut singular = Vec::new();
        for j in 0..TOP {
            let mut extra = 0usize;
            for (k, dims) in freqs.iter().zip(&counts) {
                if dims[j] > 0 {
                    // k and −k both carry the kernel
                    extra += 2 * dims[j];
                    if singular.len() < 16 {
                        singular.push(SingularFrequency { level: j, freq: k.clone(), kernel_dim: dims[j] });
                    }
                }
            }
            h_sharp.push(self.fibre_dim(j) + extra);
        }
        let p: Vec<PMap> = (0..TOP).map(|j| self.p_map_with(j, h_sharp[j])).collect();
        let min_singular_values =
            (0..TOP).map(|j| (j.to_string(), self.shell_min_eigenvalue(j).max(0.0))).collect();
        CohomologyReport {
            structure: self.spec.kind,
            torus_dim: n,
            freq_bound: self.freq_bound,
            h_sharp,
            fibre_dims: (0..=TOP).map(|j| self.fibre_dim(j)).collect(),
            betti: (0..=n).map(|p| binomial(n, p)).collect(),
            p1_injective: p[1].injective,
            p2_injective: p[2].injective,
            p_ranks: p.iter().map(|x| x.rank).collect(),
            min_singular_values,
            singular_frequencies: singular,
            scope: "flat torus, constant structure".into(),
        }
    }

    /// p^j on harmonic representatives: the frequency-0 component of each one
    /// in the de Rham harmonic basis (constant forms). Harmonics at k ≠ 0,
    /// present only for non-elliptic structures, map to zero.
    pub fn p_map(&self, j: usize) -> PMap {
        let h = self.cohomology_dim(j);
        self.p_map_with(j, h)
    }

    fn cohomology_dim(&self, j: usize) -> usize {
        let freqs = half_box(self.torus_dim, self.freq_bound);
        self.fibre_dim(j) + freqs.iter().map(|k| 2 * self.kernel_dim(j, k)).sum::<usize>()
    }

    fn p_map_with(&self, j: usize, h: usize) -> PMap {
        let b = self.basis(j);
        let mut m = DMatrix::zeros(b.nrows(), h);
        m.view_mut((0, 0), (b.nrows(), b.ncols())).copy_from(b);
        let rank = linalg::rank(&m, 1e-10);
        PMap { rows: m.nrows(), cols: h, rank, injective: rank == h, matrix: m }
    }
}

/// One representative of each ±k pair with 0 < |k|_∞ ≤ F.
pub fn half_box(n: usize, f: i32) -> Vec<Freq> {
    let mut out = Vec::new();
    if f <= 0 {
        return out;
    }
    let side = (2 * f + 1) as usize;
    let total = side.pow(n as u32);
    let mut k = vec![-f; n];
    for _ in 0..total {
        // keep k when its first nonzero entry is positive
        if let Some(&first) = k.iter().find(|&&x| x != 0) {
            if first > 0 {
                out.push(k.clone());
            }
        }
        for x in k.iter_mut() {
            if *x < f {
                *x += 1;
                break;
            }
            *x = -f;
        }
    }
    out
}

fn parallel_kernel_dims(sys: &HodgeSystem, freqs: &[Freq]) -> Vec<[usize; TOP]> {
    let threads = std::thread::available_parallelism().map(|x| x.get()).unwrap_or(1).min(16);
    let chunk = freqs.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = freqs
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|k| {
                            let mut d = [0usize; TOP];
                            for (j, slot) in d.iter_mut().enumerate() {
                                *slot = sys.kernel_dim(j, k);
                            }
                            d
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker")).collect()
    })
}

#[derive(Clone, Debug)]
pub struct PMap {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub injective: bool,
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularFrequency {
    pub level: usize,
    pub freq: Freq,
    pub kernel_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub structure: Kind,
    pub torus_dim: usize,
    pub freq_bound: i32,
    pub h_sharp: Vec<usize>,
    pub fibre_dims: Vec<usize>,
    pub betti: Vec<usize>,
    pub p1_injective: bool,
    pub p2_injective: bool,
    pub p_ranks: Vec<usize>,
    /// min over 0 < |k|_∞ ≤ 1 of σ_min(Δ_j(k))/|k|², keyed by level.
    pub min_singular_values: BTreeMap<String, f64>,
    pub singular_frequencies: Vec<SingularFrequency>,
    pub scope: String,
}

impl CohomologyReport {
    /// Topological on this torus: p¹ and p² injective.
    pub fn topological(&self) -> bool {
        self.p1_injective && self.p2_injective
    }
}

/// Random element of Γ(E^j) with the given frequencies (real field).
pub fn random_section<R: rand::Rng>(sys: &HodgeSystem, j: usize, freqs: &[Freq], rng: &mut R) -> TrigForm<C64> {
    let b = sys.basis(j);
    let proto = MultiForm::zero(sys.torus_dim, sys.degrees(j));
    let mut t = Trig::zero(sys.torus_dim, &proto);
    for k in freqs {
        let cr = DVector::from_fn(b.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let ci = if k.iter().all(|&x| x == 0) {
            DVector::zeros(b.ncols())
        } else {
            DVector::from_fn(b.ncols(), |_, _| rng.gen_range(-1.0..1.0))
        };
        let c = sys.from_coords(j, &cr, &ci);
        if k.iter().any(|&x| x != 0) {
            t.add_mode(neg_freq(k), c.conj());
        }
        t.add_mode(k.clone(), c);
    }
    t
}
