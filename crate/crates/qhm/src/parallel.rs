//! Block-parallel drivers. Each block is independent; results are merged in
//! block-key order so the output does not depend on scheduling.

use qhm_core::dirac::{self, DiracBlocks, DixmierEstimate, MatrixElement, SpectralReport};
use qhm_core::ktheory::{self, ContinuityRow, HomotopyPath, IndexResult, Perturbation};
use qhm_core::Error;
use rayon::prelude::*;

type Result<T> = std::result::Result<T, Error>;

pub fn eigensolve(d: &DiracBlocks) -> Result<SpectralReport> {
    let blocks = d
        .block_keys()
        .into_par_iter()
        .map(|(m, k)| dirac::block_eigenvalues(d, m, k).map(|v| ((m, k), v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralReport::from_blocks(blocks))
}

/// Largest `|| S (T + i)^{-1} ||` over blocks.
pub fn relative_bound(d: &DiracBlocks) -> Result<f64> {
    if d.t_weight != 0.0 {
        return Err(Error::InvalidParams("relative_bound needs t_weight = 0".into()));
    }
    let v = d
        .block_keys()
        .into_par_iter()
        .map(|(m, k)| dirac::relative_bound_block(d, m, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

pub fn dixmier_ratio(a: &MatrixElement, d: &DiracBlocks) -> Result<DixmierEstimate> {
    dirac::check_margin(a, d)?;
    let per_block = d
        .block_keys()
        .into_par_iter()
        .map(|(m, k)| dirac::dixmier_block_terms(a, d, m, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(dirac::dixmier_from_terms(per_block.into_iter().flatten().collect()))
}

pub fn interpolation_bound(d: &DiracBlocks, kind: Perturbation, p: f64, kappa: f64) -> Result<f64> {
    if d.t_weight != 0.0 {
        return Err(Error::InvalidParams("homotopy base needs t_weight = 0".into()));
    }
    let v = d
        .block_keys()
        .into_par_iter()
        .filter(|&(_, k)| k != 0)
        .map(|(m, k)| ktheory::interpolation_bound_block(d, kind, p, kappa, m, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// Index pairing with the shift `kappa` fixed from the global spectral gap.
pub fn index_pairing(d: &DiracBlocks, steps: usize) -> Result<IndexResult> {
    let keys = d.block_keys();
    let gap = keys
        .par_iter()
        .map(|&(m, k)| ktheory::block_smallest_nonzero(d, m, k))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(std::f64::consts::TAU, f64::min);
    let kappa = ktheory::kappa_from_gap(gap);
    let blocks =
        keys.into_par_iter().map(|(m, k)| ktheory::index_block(d, m, k, kappa, steps)).collect::<Result<Vec<_>>>()?;
    Ok(IndexResult::from_blocks(d, kappa, blocks))
}

/// `max |[U_2, E]|` over blocks.
pub fn u2_commutator(d: &DiracBlocks, kappa: f64) -> Result<f64> {
    let v = d
        .block_keys()
        .into_par_iter()
        .map(|(m, k)| {
            let p = ktheory::spectral_projection(d, m, k, kappa)?;
            let u = ktheory::u2_phase(d, k);
            Ok(qhm_core::linalg::max_abs(&(p.map(|z| u * z) - p.map(|z| z * u))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

pub fn homotopy_continuity(path: &HomotopyPath) -> Result<Vec<ContinuityRow>> {
    path.kappa.verify(&path.base)?;
    let per_block: Vec<Vec<f64>> =
        path.base.block_keys().into_par_iter().map(|(m, k)| ktheory::continuity_block(path, m, k)).collect();
    let mut dev = vec![0.0f64; path.grid.len().saturating_sub(1)];
    for b in per_block {
        for (d, x) in dev.iter_mut().zip(b) {
            *d = d.max(x);
        }
    }
    Ok(ktheory::continuity_rows(path, &dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qhm_core::algebra::AlgebraElement;
    use qhm_core::{ModelParams, Window};

    // Each driver against its sequential counterpart in the core crate.
    #[test]
    fn matches_sequential() {
        let p = ModelParams::default();
        let d = DiracBlocks::build(p, Window::new(3, 5, 2), 1.0).unwrap();
        assert_eq!(eigensolve(&d).unwrap(), dirac::eigensolve(&d).unwrap());
        let a = MatrixElement::scalar(AlgebraElement::basis3(1, 0, 0));
        assert_eq!(dixmier_ratio(&a, &d).unwrap(), dirac::dixmier_ratio(&a, &d).unwrap());

        let d0 = DiracBlocks::build(p, Window::new(2, 6, 2), 0.0).unwrap();
        assert_eq!(relative_bound(&d0).unwrap(), dirac::relative_bound(&d0).unwrap());
        assert!(relative_bound(&d).is_err());
        for kind in [Perturbation::SPart, Perturbation::AlphaShift] {
            assert_eq!(
                interpolation_bound(&d0, kind, 0.5, 0.0).unwrap(),
                ktheory::interpolation_bound(&d0, kind, 0.5, 0.0).unwrap()
            );
            let path = HomotopyPath::uniform(d0.clone(), kind, 6).unwrap();
            assert_eq!(homotopy_continuity(&path).unwrap(), ktheory::homotopy_continuity(&path).unwrap());
        }
        assert_eq!(u2_commutator(&d0, 0.5).unwrap(), ktheory::u2_commutator(&d0, 0.5).unwrap());
        let seq = ktheory::index_pairing(&d0, 12).unwrap();
        let par = index_pairing(&d0, 12).unwrap();
        assert_eq!(par, seq);
    }
}
