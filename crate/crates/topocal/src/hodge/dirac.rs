use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{half_box, wedge_matrix, HodgeSystem};
use crate::error::{Error, Result};
use crate::linalg;
use crate::orbits::{irrep_projectors, Kind};
use crate::torus::Freq;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracReport {
    pub freq_bound: i32,
    /// Frequencies checked, one of each ±k pair.
    pub frequencies: usize,
    pub zero_mode_kernel: usize,
    pub min_rank: usize,
    /// min over checked k of σ_min(π₈∘d*)/|k|.
    pub min_sigma: f64,
    /// max over checked k of (σ_max − σ_min)/|k|; zero for a Clifford symbol.
    pub clifford_defect: f64,
    /// Frequencies with |k|_∞ ≤ 1 where closed and coclosed elements of E¹ exist.
    pub harmonic_leaks: Vec<Freq>,
    pub failures: Vec<Freq>,
    pub pass: bool,
}

/// π₈∘d* on Λ⁴₁ ⊕ Λ⁴₇ for Spin(7), frequency by frequency up to the bound.
/// The kernel must be the frequency-0 fibre.
pub fn dirac_check(sys: &HodgeSystem) -> Result<DiracReport> {
    if sys.spec.kind != Kind::Spin7 {
        return Err(Error::WrongKind(format!("expected spin7, got {}", sys.spec.kind)));
    }
    let n = sys.torus_dim;
    let proj = irrep_projectors(&sys.spec, 4)?;
    let small: Vec<DMatrix<f64>> = proj.iter().filter(|p| p.dim == 1 || p.dim == 7).map(|p| p.basis.clone()).collect();
    let q = linalg::hstack(&small);
    let b0 = sys.basis(0);
    let wedges: Vec<DMatrix<f64>> = (0..n).map(|i| q.transpose() * wedge_matrix(n, i, &[3]) * b0).collect();
    // d* has symbol −i·(∧k)ᵀ; the factor −i does not change ranks
    let block = |k: &[i32]| {
        let mut m = DMatrix::zeros(q.ncols(), b0.ncols());
        for (i, &ki) in k.iter().enumerate() {
            if ki != 0 {
                m += &wedges[i] * f64::from(ki);
            }
        }
        m.transpose()
    };
    let zero_mode_kernel = q.ncols() - linalg::rank_abs(&block(&vec![0; n]), 1e-12);
    let freqs = half_box(n, sys.freq_bound);
    let mut min_rank = usize::MAX;
    let mut min_sigma = f64::INFINITY;
    let mut clifford_defect: f64 = 0.0;
    let mut failures = Vec::new();
    let mut harmonic_leaks = Vec::new();
    for k in &freqs {
        let m = block(k);
        let s = linalg::singular_values(&m);
        let norm = f64::from(k.iter().map(|x| x * x).sum::<i32>()).sqrt();
        let smin = s.last().copied().unwrap_or(0.0);
        let smax = s.first().copied().unwrap_or(0.0);
        let rank = s.iter().filter(|&&x| x > 1e-9 * norm).count();
        min_rank = min_rank.min(rank);
        min_sigma = min_sigma.min(smin / norm);
        clifford_defect = clifford_defect.max((smax - smin) / norm);
        if rank < q.ncols() {
            failures.push(k.clone());
        }
        // closed and coclosed elements of E¹ at k lie in ker Δ_1(k)
        if k.iter().all(|x| x.abs() <= 1) && sys.kernel_dim(1, k) > 0 {
            harmonic_leaks.push(k.clone());
        }
    }
    if freqs.is_empty() {
        min_rank = q.ncols();
        min_sigma = 0.0;
    }
    let pass = zero_mode_kernel == q.ncols() && failures.is_empty() && harmonic_leaks.is_empty();
    Ok(DiracReport {
        freq_bound: sys.freq_bound,
        frequencies: freqs.len(),
        zero_mode_kernel,
        min_rank,
        min_sigma,
        clifford_defect,
        harmonic_leaks,
        failures,
        pass,
    })
}
