//! Bookkeeping for the t-expansion of ρ̂_a^l Φ⁰ with a = Σ α_i t^i, α_i = a_i/i!.

use std::collections::BTreeMap;

use super::c64;
use crate::error::Result;
use crate::exalg::{Endo, MultiForm};
use crate::scalar::{binomial, factorial, C64};
use crate::torus::{nijenhuis, EndoField, Trig, TrigForm, TwoVectorField};

/// A truncated series Σ_m v[m] t^m.
type Series = Vec<TrigForm<C64>>;

pub(crate) struct Expansion {
    phi: TrigForm<C64>,
    zero: TrigForm<C64>,
    /// alphas[i] = α_i; alphas[0] is unused.
    alphas: Vec<EndoField<C64>>,
    /// s[l][m] = (ρ̂_a^l Φ⁰)_m.
    s: Vec<Vec<TrigForm<C64>>>,
    /// Order-p pieces of N(a,a) and a·a, ordered pairs summed.
    g_parts: Vec<Option<(TwoVectorField<C64>, EndoField<C64>)>>,
}

fn add_two_vector(a: &mut TwoVectorField<C64>, b: &TwoVectorField<C64>) {
    for (key, v) in &b.comps {
        let slot = a.comps.entry(*key).or_insert_with(|| Trig::zero(v.torus_dim(), v.proto()).with_cap(v.cap()));
        *slot = slot.add(v);
    }
}

impl Expansion {
    pub fn new(phi: TrigForm<C64>) -> Self {
        let zero = Trig::zero(phi.torus_dim(), phi.proto()).with_cap(phi.cap());
        let n = phi.form_dim();
        let zero_endo = Trig::zero(phi.torus_dim(), &Endo::zero(n)).with_cap(phi.cap());
        Expansion {
            s: vec![vec![phi.clone()]],
            phi,
            zero,
            alphas: vec![zero_endo],
            g_parts: vec![None, None],
        }
    }

    fn known(&self) -> usize {
        self.alphas.len() - 1
    }

    fn get(&self, l: usize, m: usize) -> &TrigForm<C64> {
        self.s.get(l).and_then(|r| r.get(m)).unwrap_or(&self.zero)
    }

    fn put(&mut self, l: usize, m: usize, v: TrigForm<C64>) {
        while self.s.len() <= l {
            self.s.push(Vec::new());
        }
        let row = &mut self.s[l];
        while row.len() <= m {
            row.push(self.zero.clone());
        }
        row[m] = v;
    }

    /// Fills S[l][k] for 2 ≤ l ≤ k from α_1..α_{k−1}.
    pub fn extend(&mut self, k: usize) -> Result<()> {
        debug_assert_eq!(self.known(), k - 1);
        for l in 2..=k {
            let mut acc = self.zero.clone();
            for i in 1..=k + 1 - l {
                let prev = self.get(l - 1, k - i);
                if !prev.is_zero() {
                    acc = acc.add(&prev.rho_hat(&self.alphas[i])?);
                }
            }
            acc.check_cap()?;
            self.put(l, k, acc);
        }
        Ok(())
    }

    /// Records α_k and S[1][k] = ρ̂_{α_k}Φ⁰.
    pub fn set_alpha(&mut self, k: usize, alpha: EndoField<C64>) -> Result<()> {
        debug_assert_eq!(self.known(), k - 1);
        let s1 = self.phi.rho_hat(&alpha)?;
        self.alphas.push(alpha);
        self.put(1, k, s1);
        Ok(())
    }

    /// The t^m coefficient of ρ_{exp a}Φ⁰ = Σ_l S[l][m]/l!.
    pub fn coefficient(&self, m: usize) -> TrigForm<C64> {
        let mut acc = if m == 0 { self.phi.clone() } else { self.zero.clone() };
        for l in 1..=m {
            acc = acc.add(&self.get(l, m).scale(&c64(1.0 / factorial(l))));
        }
        acc
    }

    /// Σ_{l≥2} S[l][k]/l!, whose d is Ob_k.
    pub fn primitive(&self, k: usize) -> TrigForm<C64> {
        let mut acc = self.zero.clone();
        for l in 2..=k {
            acc = acc.add(&self.get(l, k).scale(&c64(1.0 / factorial(l))));
        }
        acc
    }

    pub fn obstruction_direct(&self, k: usize) -> TrigForm<C64> {
        self.primitive(k).d()
    }

    fn g_part(&mut self, p: usize) -> Result<&(TwoVectorField<C64>, EndoField<C64>)> {
        while self.g_parts.len() <= p {
            self.g_parts.push(None);
        }
        if self.g_parts[p].is_none() {
            let n = self.phi.form_dim();
            let mut nn = TwoVectorField { n, comps: BTreeMap::new() };
            let mut prod = Trig::zero(self.phi.torus_dim(), &Endo::zero(n)).with_cap(self.phi.cap());
            for i in 1..p {
                let (a, b) = (&self.alphas[i], &self.alphas[p - i]);
                add_two_vector(&mut nn, &nijenhuis(a, b)?);
                prod = prod.add(&a.matmul(b)?);
            }
            self.g_parts[p] = Some((nn, prod));
        }
        Ok(self.g_parts[p].as_ref().expect("just filled"))
    }

    /// G(a,a) = i_{N(a,a)} − L_{a·a} applied to a series, through order k.
    fn g_series(&mut self, v: &Series, k: usize) -> Result<Series> {
        let proto = MultiForm::zero(self.phi.form_dim(), &v[0].degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
        let zero = Trig::zero(self.phi.torus_dim(), &proto).with_cap(self.phi.cap());
        let mut out = vec![zero; k + 1];
        for p in 2..=k {
            let (nn, prod) = self.g_part(p)?.clone();
            for q in 0..=k - p {
                if v[q].is_zero() {
                    continue;
                }
                let g = v[q].contract_two_vector(&nn)?.sub(&v[q].lie_operator_l(&prod)?);
                out[p + q] = out[p + q].add(&g);
            }
        }
        Ok(out)
    }

    /// ρ̂_a applied to a series, through order k.
    fn rho_series(&self, v: &Series, k: usize) -> Result<Series> {
        let zero = Trig::zero(self.phi.torus_dim(), v[0].proto()).with_cap(self.phi.cap());
        let mut out = vec![zero; k + 1];
        for m in 1..=k {
            for i in 1..=m.min(self.known()) {
                if !v[m - i].is_zero() {
                    out[m] = out[m].add(&v[m - i].rho_hat(&self.alphas[i])?);
                }
            }
        }
        Ok(out)
    }

    /// Ob_k = Σ_{l=2}^k (−1)^{l−1}/l! (ad_{ρ̂_a}^{l−2} G(a,a) Φ⁰)_k, expanding
    /// ad^m G = Σ_j C(m,j)(−1)^j ρ̂^{m−j} G ρ̂^j. Valid once orders below k close.
    pub fn obstruction_commutator(&mut self, k: usize) -> Result<TrigForm<C64>> {
        let proto = MultiForm::zero(self.phi.form_dim(), &self.phi.degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
        let mut acc = Trig::zero(self.phi.torus_dim(), &proto).with_cap(self.phi.cap());
        for j in 0..=k - 2 {
            let sj: Series = (0..=k).map(|m| self.get(j, m).clone()).collect();
            let mut t = self.g_series(&sj, k)?;
            // t = ρ̂^r G ρ̂^j Φ⁰ with m = r + j, l = m + 2
            for r in 0..=k - 2 - j {
                if r > 0 {
                    t = self.rho_series(&t, k)?;
                }
                let m = r + j;
                let l = m + 2;
                let sign = if (j + l - 1) % 2 == 0 { 1.0 } else { -1.0 };
                let coef = sign * binomial(m, j) as f64 / factorial(l);
                acc = acc.add(&t[k].scale(&c64(coef)));
            }
        }
        Ok(acc)
    }
}
