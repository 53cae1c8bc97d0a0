//! Chain Hamiltonians: the full model, its long-range variant, the analytic
//! effective Hamiltonians of the memory and bus bands, and the numerical
//! block-diagonalization used to check them.

mod chain;
mod effective;
mod spec;

pub use chain::{
    build_chain_hamiltonian, build_long_range_hamiltonian, build_long_range_hamiltonian_capped,
    build_site_hamiltonian, build_total_hamiltonian, build_total_hamiltonian_capped, ChainHamiltonian, Sector,
};
pub use effective::{
    build_bus_effective, build_mem_effective, effective_couplings, numerical_effective_block, EffectiveCouplings,
    SubspaceCode, SubspaceKind, XI_BOUNDARY, XI_BULK,
};
pub use spec::{ChainSpec, CouplingRange};

#[cfg(test)]
mod tests;
