use serde::{Deserialize, Serialize};

use crate::hilbert::SpinQuantum;
use crate::{Error, Result};

/// Pairwise coupling pattern of the exchange term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingRange {
    NearestNeighbor,
    /// `J / |i - j|^exponent` between every pair; only exponent 3 is modelled.
    PowerLaw { exponent: u32 },
}

impl CouplingRange {
    pub const DIPOLAR: CouplingRange = CouplingRange::PowerLaw { exponent: 3 };
}

/// Physical description of a chain of identical half-integer spins.
///
/// `field` stores `mu_B * B` in energy units, so the Zeeman term on site `i`
/// is `g_i * field . S_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainSpecDoc")]
pub struct ChainSpec {
    pub n_sites: usize,
    pub spin: SpinQuantum,
    pub exchange_j: f64,
    pub zfs_d: f64,
    pub anisotropy_e: f64,
    pub g_factors: Vec<f64>,
    pub field: [f64; 3],
    pub range: CouplingRange,
}

/// Wire form of [`ChainSpec`]: every field optional, unknown keys rejected.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainSpecDoc {
    n_sites: Option<usize>,
    spin: Option<f64>,
    exchange_j: Option<f64>,
    zfs_d: Option<f64>,
    anisotropy_e: Option<f64>,
    g_factors: Option<Vec<f64>>,
    field: Option<[f64; 3]>,
    range: Option<CouplingRange>,
}

impl TryFrom<ChainSpecDoc> for ChainSpec {
    type Error = Error;

    fn try_from(doc: ChainSpecDoc) -> Result<Self> {
        let n_sites = doc.n_sites.unwrap_or(2);
        let spin = match doc.spin {
            Some(s) => SpinQuantum::try_from(s).map_err(|e| Error::InvalidSpec {
                field: "spin",
                reason: e.to_string(),
            })?,
            None => SpinQuantum::THREE_HALVES,
        };
        let spec = ChainSpec {
            n_sites,
            spin,
            exchange_j: doc.exchange_j.unwrap_or(1.0),
            zfs_d: doc.zfs_d.unwrap_or(-20.0),
            anisotropy_e: doc.anisotropy_e.unwrap_or(0.0),
            g_factors: doc.g_factors.unwrap_or_else(|| vec![2.0; n_sites]),
            field: doc.field.unwrap_or([0.0; 3]),
            range: doc.range.unwrap_or(CouplingRange::NearestNeighbor),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ChainSpec {
    /// Spin-3/2 chain with `D = -20 J`, `E = 0`, no field, nearest neighbours.
    pub fn reference(n_sites: usize) -> Self {
        Self {
            n_sites,
            spin: SpinQuantum::THREE_HALVES,
            exchange_j: 1.0,
            zfs_d: -20.0,
            anisotropy_e: 0.0,
            g_factors: vec![2.0; n_sites],
            field: [0.0; 3],
            range: CouplingRange::NearestNeighbor,
        }
    }

    pub fn with_spin(mut self, spin: SpinQuantum) -> Self {
        self.spin = spin;
        self
    }

    pub fn with_exchange(mut self, j: f64) -> Self {
        self.exchange_j = j;
        self
    }

    pub fn with_zfs(mut self, d: f64) -> Self {
        self.zfs_d = d;
        self
    }

    pub fn with_anisotropy(mut self, e: f64) -> Self {
        self.anisotropy_e = e;
        self
    }

    pub fn with_field(mut self, field: [f64; 3]) -> Self {
        self.field = field;
        self
    }

    pub fn with_range(mut self, range: CouplingRange) -> Self {
        self.range = range;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidSpec {
                field: "n_sites",
                reason: "must be at least 1".into(),
            });
        }
        if self.g_factors.len() != self.n_sites {
            return Err(Error::InvalidSpec {
                field: "g_factors",
                reason: format!("has {} entries, n_sites is {}", self.g_factors.len(), self.n_sites),
            });
        }
        if let CouplingRange::PowerLaw { exponent } = self.range {
            if exponent != 3 {
                return Err(Error::InvalidSpec {
                    field: "range",
                    reason: format!("power-law exponent must be 3, got {exponent}"),
                });
            }
        }
        let scalars = [
            ("exchange_j", self.exchange_j),
            ("zfs_d", self.zfs_d),
            ("anisotropy_e", self.anisotropy_e),
        ];
        for (field, v) in scalars {
            if !v.is_finite() {
                return Err(Error::InvalidSpec {
                    field,
                    reason: "must be finite".into(),
                });
            }
        }
        if self.g_factors.iter().chain(&self.field).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec {
                field: "g_factors",
                reason: "g-factors and field must be finite".into(),
            });
        }
        Ok(())
    }

    /// `d^N`, or a capacity error when it overflows or exceeds `max_dim`.
    pub fn hilbert_dim(&self, max_dim: usize) -> Result<usize> {
        let d = self.spin.multiplicity() as u128;
        let required = d.checked_pow(self.n_sites as u32).unwrap_or(u128::MAX);
        if required > max_dim as u128 {
            return Err(Error::Capacity {
                required,
                max: max_dim,
            });
        }
        Ok(required as usize)
    }

    /// Exchange pairs `(i, j, J_ij)` with `i < j` for the configured range.
    pub fn bonds(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_sites;
        match self.range {
            CouplingRange::NearestNeighbor => (0..n.saturating_sub(1))
                .map(|i| (i, i + 1, self.exchange_j))
                .collect(),
            CouplingRange::PowerLaw { exponent } => {
                let mut out = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        let r = (j - i) as f64;
                        out.push((i, j, self.exchange_j / r.powi(exponent as i32)));
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_defaults() {
        let spec = ChainSpec::reference(3).with_range(CouplingRange::DIPOLAR);
        let text = serde_json::to_string(&spec).unwrap();
        for key in ["n_sites", "spin", "exchange_j", "zfs_d", "anisotropy_e", "g_factors", "field", "range"] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
        let back: ChainSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);

        let minimal: ChainSpec = serde_json::from_str("{}").unwrap();
        assert_eq!(minimal, ChainSpec::reference(2));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = serde_json::from_str::<ChainSpec>(r#"{"n_sites": 2, "zfs": -20}"#).unwrap_err();
        assert!(err.to_string().contains("zfs"), "{err}");
    }

    #[test]
    fn integer_spin_rejected() {
        let err = serde_json::from_str::<ChainSpec>(r#"{"spin": 1.0}"#).unwrap_err();
        assert!(err.to_string().contains("integer spin"), "{err}");
    }

    #[test]
    fn g_factor_length_checked() {
        let err = serde_json::from_str::<ChainSpec>(r#"{"n_sites": 3, "g_factors": [2.0]}"#).unwrap_err();
        assert!(err.to_string().contains("g_factors"), "{err}");
    }

    #[test]
    fn power_law_exponent_fixed() {
        let err = serde_json::from_str::<ChainSpec>(r#"{"range": {"power_law": {"exponent": 6}}}"#).unwrap_err();
        assert!(err.to_string().contains("exponent"), "{err}");
        let ok: ChainSpec = serde_json::from_str(r#"{"range": {"power_law": {"exponent": 3}}}"#).unwrap();
        assert_eq!(ok.range, CouplingRange::DIPOLAR);
    }

    #[test]
    fn long_range_bond_strengths() {
        let s = ChainSpec::reference(4).with_range(CouplingRange::DIPOLAR);
        let bonds = s.bonds();
        assert_eq!(bonds.len(), 6);
        let find = |i, j| bonds.iter().find(|b| b.0 == i && b.1 == j).unwrap().2;
        assert_eq!(find(0, 2), 1.0 / 8.0);
        assert_eq!(find(0, 3), 1.0 / 27.0);
        assert_eq!(find(2, 3), 1.0);
    }

    #[test]
    fn capacity_guard() {
        let s = ChainSpec::reference(11);
        assert!(matches!(s.hilbert_dim(crate::DEFAULT_MAX_DIM), Err(Error::Capacity { .. })));
        assert_eq!(ChainSpec::reference(10).hilbert_dim(crate::DEFAULT_MAX_DIM).unwrap(), 1 << 20);
    }
}
