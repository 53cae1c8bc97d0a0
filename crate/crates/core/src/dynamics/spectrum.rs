use crate::hamiltonian::{numerical_effective_block, ChainHamiltonian, ChainSpec, SubspaceCode, SubspaceKind};
use crate::linalg::BlockEigensystem;
use crate::{Error, Result, DENSE_CAP};

/// Lowest `count` eigenvalues (all when `None`) of the chain Hamiltonian,
/// ascending. Every connected block of the operator must fit the dense cap.
pub fn spectrum(spec: &ChainSpec, count: Option<usize>) -> Result<Vec<f64>> {
    spectrum_capped(spec, count, crate::DEFAULT_MAX_DIM)
}

pub fn spectrum_capped(spec: &ChainSpec, count: Option<usize>, max_dim: usize) -> Result<Vec<f64>> {
    let h = ChainHamiltonian::new(spec, max_dim)?.to_sparse();
    let mut values = BlockEigensystem::of(&h, DENSE_CAP)?.sorted_values();
    if let Some(c) = count {
        values.truncate(c);
    }
    Ok(values)
}

/// Splitting of the `|-S,+S>`, `|+S,-S>` pair of a two-site chain, read off
/// the numerically exact memory-band block: `4 J_mem` in the effective model.
pub fn memory_tunneling_splitting(spec: &ChainSpec) -> Result<f64> {
    if spec.n_sites != 2 {
        return Err(Error::InvalidSpec {
            field: "n_sites",
            reason: format!("tunneling splitting is defined for 2 sites, got {}", spec.n_sites),
        });
    }
    let h = ChainHamiltonian::new(spec, DENSE_CAP)?.to_sparse();
    let sub = SubspaceCode::for_spec(SubspaceKind::Memory, spec)?;
    let block = numerical_effective_block(&h, &sub)?;
    let a = sub.effective_index(&[1, 0])?;
    let b = sub.effective_index(&[0, 1])?;
    let gap = block[(a, a)].re - block[(b, b)].re;
    Ok((gap * gap + 4.0 * block[(a, b)].norm_sqr()).sqrt())
}
