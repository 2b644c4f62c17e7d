//! Hamiltonian assembly for spin–boson networks.
//!
//! In the single-excitation sector `σz_n` acts as `2|n⟩⟨n| − 1`, and the
//! exchange term `½ J (σxσx + σyσy)` moves the excitation with amplitude `J`.
//! Constant offsets `C_n` never enter the assembled operator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{GeneralizedHolsteinModel, HolsteinModel};
use crate::operator::{BasisDescriptor, Sector, SparseOperator, TruncationSpec};

/// Oscillator attached to the network, coupled to `site` through `σz_site (c + c†)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub site: usize,
    pub omega: f64,
    pub coupling: f64,
}

/// Generic electronic register + oscillators, the common target of model and
/// chain assembly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpinBosonNetwork {
    pub n_sites: usize,
    /// `(i, j, J_ij)` with `i ≠ j`; each unordered pair listed once.
    pub exchange: Vec<(usize, usize, f64)>,
    /// Energy of an excitation sitting on each site (`ε_n n̂_n`); empty means zero.
    pub site_energy: Vec<f64>,
    pub oscillators: Vec<Oscillator>,
    /// Number-conserving oscillator hopping `λ (c_a† c_b + c_b† c_a)`.
    pub links: Vec<(usize, usize, f64)>,
}

impl SpinBosonNetwork {
    pub fn from_model(model: &GeneralizedHolsteinModel) -> Self {
        let oscillators = model
            .modes()
            .iter()
            .enumerate()
            .flat_map(|(site, list)| {
                list.iter().map(move |m| Oscillator { site, omega: m.omega, coupling: m.kappa() })
            })
            .collect();
        Self {
            n_sites: model.n_sites(),
            exchange: model.coupled_pairs(),
            site_energy: Vec::new(),
            oscillators,
            links: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        for &(i, j, _) in &self.exchange {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidModel(format!("bad exchange pair ({i}, {j})")));
            }
        }
        if !self.site_energy.is_empty() && self.site_energy.len() != n {
            return Err(Error::InvalidModel("site energy length mismatch".into()));
        }
        if let Some(o) = self.oscillators.iter().find(|o| o.site >= n) {
            return Err(Error::InvalidModel(format!("oscillator on missing site {}", o.site)));
        }
        let m = self.oscillators.len();
        for &(a, b, _) in &self.links {
            if a >= m || b >= m || a == b {
                return Err(Error::InvalidModel(format!("bad oscillator link ({a}, {b})")));
            }
        }
        Ok(())
    }

    pub fn basis(&self, trunc: &TruncationSpec) -> Result<BasisDescriptor> {
        let dims = trunc.resolve(self.oscillators.len())?;
        BasisDescriptor::new(trunc.sector, self.n_sites, dims, trunc.dim_cap)
    }

    pub fn assemble(&self, trunc: &TruncationSpec) -> Result<SparseOperator> {
        self.validate()?;
        let basis = self.basis(trunc)?;
        let fock_total = basis.fock_total();
        let n_e = basis.electronic_dim();
        let b = &basis;
        let triplets: Vec<(usize, usize, f64)> = (0..n_e * fock_total)
            .into_par_iter()
            .flat_map_iter(|col| {
                let (e, f) = b.split(col);
                let mut out = Vec::new();
                let mut diag = 0.0;
                for (k, o) in self.oscillators.iter().enumerate() {
                    let n = b.occupation(f, k);
                    diag += o.omega * n as f64;
                    if o.coupling != 0.0 {
                        let g = o.coupling * b.sigma_z(e, o.site);
                        let s = b.stride(k);
                        if n + 1 < b.fock_dims()[k] {
                            out.push((b.index(e, f + s), col, g * ((n + 1) as f64).sqrt()));
                        }
                        if n > 0 {
                            out.push((b.index(e, f - s), col, g * (n as f64).sqrt()));
                        }
                    }
                }
                for (site, &eps) in self.site_energy.iter().enumerate() {
                    if eps != 0.0 && b.is_excited(e, site) {
                        diag += eps;
                    }
                }
                if diag != 0.0 {
                    out.push((col, col, diag));
                }
                for &(i, j, v) in &self.exchange {
                    if let Some(e2) = b.hop(e, i, j) {
                        out.push((b.index(e2, f), col, v));
                    }
                    if let Some(e2) = b.hop(e, j, i) {
                        out.push((b.index(e2, f), col, v));
                    }
                }
                for &(a, c, lam) in &self.links {
                    // c_a† c_c and c_c† c_a
                    for (up, down) in [(a, c), (c, a)] {
                        let nu = b.occupation(f, up);
                        let nd = b.occupation(f, down);
                        if nd > 0 && nu + 1 < b.fock_dims()[up] {
                            let f2 = f + b.stride(up) - b.stride(down);
                            let amp = lam * (((nu + 1) * nd) as f64).sqrt();
                            out.push((b.index(e, f2), col, amp));
                        }
                    }
                }
                out.into_iter()
            })
            .collect();
        SparseOperator::from_real_triplets(basis, triplets)
    }
}

/// Assemble `½ Σ J_nm (σxσx + σyσy) + Σ_nk [κ_nk σz_n (b† + b) + ω_nk b†b]`.
pub fn assemble_hamiltonian(
    model: &GeneralizedHolsteinModel,
    trunc: &TruncationSpec,
) -> Result<SparseOperator> {
    SpinBosonNetwork::from_model(model).assemble(trunc)
}

/// Total electronic excitation number `Σ_n (1 + σz_n)/2`.
pub fn excitation_number(basis: &BasisDescriptor) -> Result<SparseOperator> {
    let triplets = (0..basis.dim())
        .filter_map(|i| {
            let (e, _) = basis.split(i);
            let n = (0..basis.n_sites()).filter(|&s| basis.is_excited(e, s)).count();
            (n > 0).then_some((i, i, n as f64))
        })
        .collect();
    SparseOperator::from_real_triplets(basis.clone(), triplets)
}

/// Build the one-particle Holstein Hamiltonian twice, from the fermionic
/// hopping form and from explicit Pauli products over the `2^N` spin register
/// (with `a†a = (1 + σz)/2`), and return the largest entrywise deviation after
/// removing a common constant diagonal shift.
pub fn jordan_wigner_check(model: &HolsteinModel, trunc: &TruncationSpec) -> Result<f64> {
    if trunc.sector != Sector::SingleExcitation {
        return Err(Error::InvalidArgument(
            "Jordan-Wigner check runs in the single-excitation sector".into(),
        ));
    }
    let n = model.n_sites();
    let dims = trunc.resolve(n)?;
    let basis = BasisDescriptor::new(Sector::SingleExcitation, n, dims.clone(), trunc.dim_cap)?;
    let dim = basis.dim();
    if dim > 4096 {
        return Err(Error::DimensionCap { dim: dim as u128, cap: 4096 });
    }
    if n > 20 {
        return Err(Error::InvalidArgument("spin register too large".into()));
    }
    let fermionic = fermionic_one_particle(model, &basis);
    let spin = pauli_one_excitation(model, &basis);
    let diff = fermionic - spin;
    let offset = (0..dim).map(|i| diff[(i, i)].re).sum::<f64>() / dim as f64;
    let mut worst: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let mut d = diff[(r, c)];
            if r == c {
                d -= offset;
            }
            worst = worst.max(d.norm());
        }
    }
    Ok(worst)
}

fn fermionic_one_particle(model: &HolsteinModel, basis: &BasisDescriptor) -> DMatrix<Complex64> {
    let dim = basis.dim();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let fock = basis.fock_total();
    for site in 0..model.n_sites() {
        for f in 0..fock {
            let row = basis.index(site, f);
            // a_n† a_{n±1}
            if site + 1 < model.n_sites() {
                h[(basis.index(site + 1, f), row)] += model.hop()[site];
            }
            if site > 0 {
                h[(basis.index(site - 1, f), row)] += model.hop()[site - 1];
            }
            for k in 0..model.n_sites() {
                let occ = basis.occupation(f, k);
                h[(row, row)] += model.mode_freq()[k] * occ as f64;
            }
            // κ_n a_n† a_n (b_n + b_n†): only the occupied site's mode
            let k = site;
            let kappa = model.mode_coupling()[k];
            let occ = basis.occupation(f, k);
            let s = basis.stride(k);
            if occ + 1 < basis.fock_dims()[k] {
                h[(basis.index(site, f + s), row)] += kappa * ((occ + 1) as f64).sqrt();
            }
            if occ > 0 {
                h[(basis.index(site, f - s), row)] += kappa * (occ as f64).sqrt();
            }
        }
    }
    h
}

#[derive(Clone, Copy)]
enum Pauli {
    X,
    Y,
    Z,
}

/// Apply a single Pauli to bit `q` of a spin configuration (bit set = up).
fn apply_pauli(p: Pauli, q: usize, config: u32, amp: Complex64) -> (u32, Complex64) {
    let up = (config >> q) & 1 == 1;
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::X => (config ^ (1 << q), amp),
        // σy|up⟩ = i|down⟩, σy|down⟩ = −i|up⟩
        Pauli::Y => (config ^ (1 << q), if up { amp * i } else { -amp * i }),
        Pauli::Z => (config, if up { amp } else { -amp }),
    }
}

fn pauli_one_excitation(model: &HolsteinModel, basis: &BasisDescriptor) -> DMatrix<Complex64> {
    let n = model.n_sites();
    let dim = basis.dim();
    let fock = basis.fock_total();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let one_up = |config: u32| -> Option<usize> {
        (config.count_ones() == 1).then(|| config.trailing_zeros() as usize)
    };
    for site in 0..n {
        let config: u32 = 1 << site;
        for f in 0..fock {
            let col = basis.index(site, f);
            let one = Complex64::new(1.0, 0.0);
            // ½ V_m (σx σx + σy σy) on bonds (m, m+1)
            for (m, &v) in model.hop().iter().enumerate() {
                for p in [Pauli::X, Pauli::Y] {
                    let (c1, a1) = apply_pauli(p, m, config, one);
                    let (c2, a2) = apply_pauli(p, m + 1, c1, a1);
                    if let Some(target) = one_up(c2) {
                        h[(basis.index(target, f), col)] += a2 * (0.5 * v);
                    }
                }
            }
            for m in 0..n {
                // κ_m (1 + σz_m)/2 ⊗ (b_m + b_m†)
                let (c1, az) = apply_pauli(Pauli::Z, m, config, one);
                let number = (one + az) * 0.5;
                let target = one_up(c1).expect("σz preserves the configuration");
                let kappa = model.mode_coupling()[m];
                let occ = basis.occupation(f, m);
                let s = basis.stride(m);
                if occ + 1 < basis.fock_dims()[m] {
                    h[(basis.index(target, f + s), col)] += number * kappa * ((occ + 1) as f64).sqrt();
                }
                if occ > 0 {
                    h[(basis.index(target, f - s), col)] += number * kappa * (occ as f64).sqrt();
                }
                h[(col, col)] += model.mode_freq()[m] * occ as f64;
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mode;
    use nalgebra::SymmetricEigen;

    fn real_spectrum(op: &SparseOperator) -> Vec<f64> {
        let dense = op.to_dense().map(|z| z.re);
        let mut e: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn two_site_hopping() {
        let m = HolsteinModel::new(vec![1.0], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap().promote();
        let m = m.with_modes(vec![vec![], vec![]]).unwrap();
        let h = assemble_hamiltonian(&m, &TruncationSpec::uniform(3)).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.get(0, 1).re, 1.0);
        let e = real_spectrum(&h);
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn independent_boson_shift() {
        let mut j = DMatrix::zeros(1, 1);
        j[(0, 0)] = 0.0;
        let m = GeneralizedHolsteinModel::new(
            j,
            vec![0.0],
            vec![0.0],
            vec![vec![Mode { omega: 1.0, huang_rhys: 0.25 }]],
        )
        .unwrap();
        let h = assemble_hamiltonian(&m, &TruncationSpec::uniform(30)).unwrap();
        let e = real_spectrum(&h);
        assert!((e[0] + 0.25).abs() < 1e-8, "{}", e[0]);
        assert!((e[1] - 0.75).abs() < 1e-8, "{}", e[1]);
    }

    #[test]
    fn hermitian_and_conserving_in_full_sector() {
        let m = HolsteinModel::uniform(3, 0.5, 1.0, 0.3).unwrap().promote();
        let trunc = TruncationSpec::uniform(3).with_sector(Sector::FullTwoLevel);
        let h = assemble_hamiltonian(&m, &trunc).unwrap();
        assert!(h.hermiticity_error() < 1e-12);
        let n = excitation_number(h.basis()).unwrap();
        let (hd, nd) = (h.to_dense(), n.to_dense());
        let comm = &hd * &nd - &nd * &hd;
        assert!(comm.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn jw_pure_hopping_is_exact() {
        let m = HolsteinModel::new(vec![1.0, 0.3, -0.8], vec![1.0; 4], vec![0.0; 4]).unwrap();
        assert_eq!(jordan_wigner_check(&m, &TruncationSpec::uniform(2)).unwrap(), 0.0);
        let m = HolsteinModel::new(vec![1.0], vec![1.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(jordan_wigner_check(&m, &TruncationSpec::uniform(1)).unwrap(), 0.0);
    }

    #[test]
    fn jw_with_phonons() {
        let m = HolsteinModel::new(vec![1.0, 0.7], vec![1.0; 3], vec![0.2; 3]).unwrap();
        let dev = jordan_wigner_check(&m, &TruncationSpec::uniform(4)).unwrap();
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn jw_rejects_full_sector() {
        let m = HolsteinModel::uniform(2, 1.0, 1.0, 0.1).unwrap();
        let t = TruncationSpec::uniform(2).with_sector(Sector::FullTwoLevel);
        assert!(jordan_wigner_check(&m, &t).is_err());
    }

    #[test]
    fn truncation_length_mismatch() {
        let m = HolsteinModel::uniform(2, 1.0, 1.0, 0.1).unwrap().promote();
        assert!(matches!(
            assemble_hamiltonian(&m, &TruncationSpec::per_mode(vec![3])),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn chain_links_conserve_quanta() {
        let net = SpinBosonNetwork {
            n_sites: 1,
            exchange: vec![],
            site_energy: vec![],
            oscillators: vec![
                Oscillator { site: 0, omega: 1.0, coupling: 0.0 },
                Oscillator { site: 0, omega: 1.2, coupling: 0.0 },
            ],
            links: vec![(0, 1, 0.3)],
        };
        let h = net.assemble(&TruncationSpec::uniform(4)).unwrap();
        assert!(h.is_hermitian());
        // one quantum: 2x2 block [[1, .3], [.3, 1.2]]
        let b = h.basis();
        let i10 = b.fock_index(&[1, 0]).unwrap();
        let i01 = b.fock_index(&[0, 1]).unwrap();
        assert!((h.get(i10, i01).re - 0.3).abs() < 1e-15);
        assert!((h.get(i10, i10).re - 1.0).abs() < 1e-15);
    }
}
