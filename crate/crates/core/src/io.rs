//! JSON file formats for kernels, decompositions and truth tables.

use serde::{Deserialize, Serialize};

use crate::chaos::{ChaosDecomposition, TruthTable};
use crate::error::{Error, Result};
use crate::kernel::{GeneralKernel, SymmetricKernel};

/// `{"order": q, "entries": [[[i1, …, iq], value], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub order: usize,
    pub entries: Vec<(Vec<u32>, f64)>,
}

impl KernelFile {
    pub fn from_symmetric(k: &SymmetricKernel<f64>) -> Self {
        KernelFile { order: k.order(), entries: k.entries().map(|(t, &v)| (t.to_vec(), v)).collect() }
    }

    pub fn from_general(k: &GeneralKernel<f64>) -> Self {
        KernelFile {
            order: k.order(),
            entries: k.sorted_entries().into_iter().map(|(t, v)| (t.to_vec(), v)).collect(),
        }
    }

    pub fn to_symmetric(&self) -> Result<SymmetricKernel<f64>> {
        if self.order == 0 {
            return Err(Error::Invalid("symmetric kernels have order >= 1".into()));
        }
        SymmetricKernel::new(self.order, self.entries.iter().map(|(t, v)| (t.clone(), *v)))
    }

    pub fn to_general(&self) -> Result<GeneralKernel<f64>> {
        GeneralKernel::new(self.order, self.entries.iter().map(|(t, v)| (t.clone(), *v)))
    }
}

/// `{"dimension": d, "mean": c, "kernels": [kernel, …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub dimension: usize,
    pub mean: f64,
    pub kernels: Vec<KernelFile>,
}

impl DecompositionFile {
    pub fn from_decomposition(dec: &ChaosDecomposition<f64>) -> Self {
        DecompositionFile {
            dimension: dec.dimension(),
            mean: *dec.mean(),
            kernels: dec.kernels().map(KernelFile::from_symmetric).collect(),
        }
    }

    pub fn to_decomposition(&self) -> Result<ChaosDecomposition<f64>> {
        let kernels = self.kernels.iter().map(KernelFile::to_symmetric).collect::<Result<Vec<_>>>()?;
        ChaosDecomposition::new(self.dimension, self.mean, kernels)
    }
}

/// `{"d": d, "values": [2^d reals]}`, indexed so that bit `k-1` of the
/// position is set iff `X_k = +1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub d: usize,
    pub values: Vec<f64>,
}

impl TableFile {
    pub fn from_table(t: &TruthTable<f64>) -> Self {
        TableFile { d: t.dimension(), values: t.values().to_vec() }
    }

    pub fn to_table(&self) -> Result<TruthTable<f64>> {
        TruthTable::new(self.d, self.values.clone())
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("JSON parse error: {e}")))
}

pub fn read_kernel(text: &str) -> Result<SymmetricKernel<f64>> {
    parse_json::<KernelFile>(text)?.to_symmetric()
}

pub fn read_decomposition(text: &str) -> Result<ChaosDecomposition<f64>> {
    parse_json::<DecompositionFile>(text)?.to_decomposition()
}

pub fn read_table(text: &str) -> Result<TruthTable<f64>> {
    parse_json::<TableFile>(text)?.to_table()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}
