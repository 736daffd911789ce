//! Seeded random models: problem instances, Gaussian dictionaries (dense
//! or block-diagonal, the latter held in a compact per-block layout),
//! isotropic Gaussian signals, and reproducible stream derivation so that
//! parallel experiments draw identical numbers regardless of scheduling.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// File magic for dictionary dumps ("OVCDICT1").
const DUMP_MAGIC: u64 = u64::from_le_bytes(*b"OVCDICT1");

/// Concrete experiment size: ambient dimension d, sparsity budget k,
/// atom count n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemInstance {
    pub d: usize,
    pub k: usize,
    pub n: usize,
}

impl ProblemInstance {
    pub fn new(d: usize, k: usize, n: usize) -> Result<Self> {
        if k < 1 || k >= d {
            return Err(Error::Config(format!("need 1 <= k < d, got k = {k}, d = {d}")));
        }
        if n < k {
            return Err(Error::Config(format!("need n >= k, got n = {n}, k = {k}")));
        }
        Ok(Self { d, k, n })
    }

    /// Sparsity factor k/d.
    pub fn s(&self) -> f64 {
        self.k as f64 / self.d as f64
    }

    /// Overcompleteness ratio n/d.
    pub fn o(&self) -> f64 {
        self.n as f64 / self.d as f64
    }

    /// Atoms per block n/k.
    pub fn m(&self) -> f64 {
        self.n as f64 / self.k as f64
    }

    /// Block experiments need k to divide both d and n.
    pub fn require_block_divisibility(&self) -> Result<()> {
        if self.d % self.k != 0 {
            return Err(Error::Config(format!(
                "k = {} does not divide d = {}",
                self.k, self.d
            )));
        }
        if self.n % self.k != 0 {
            return Err(Error::Config(format!(
                "k = {} does not divide n = {}",
                self.k, self.n
            )));
        }
        Ok(())
    }
}

/// Layout of a dictionary's nonzero pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictStructure {
    Dense,
    /// `blocks` diagonal blocks, each d/blocks rows by n/blocks columns.
    BlockDiagonal { blocks: usize },
}

/// A d-by-n real matrix whose columns are the atoms. Dense dictionaries
/// store all entries column-major; block-diagonal ones store only the
/// blocks (column-major within each block), since everything else is
/// exactly zero.
#[derive(Debug, Clone)]
pub struct Dictionary {
    d: usize,
    n: usize,
    structure: DictStructure,
    seed_provenance: (u64, u64),
    data: Vec<f64>,
    atom_norms: Vec<f64>,
}

impl Dictionary {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn structure(&self) -> DictStructure {
        self.structure
    }

    /// (master seed, stream id) the entries were drawn from.
    pub fn seed_provenance(&self) -> (u64, u64) {
        self.seed_provenance
    }

    /// Euclidean norm of each atom, cached at construction.
    pub fn atom_norms(&self) -> &[f64] {
        &self.atom_norms
    }

    /// Number of diagonal blocks, if block-structured.
    pub fn blocks(&self) -> Option<usize> {
        match self.structure {
            DictStructure::Dense => None,
            DictStructure::BlockDiagonal { blocks } => Some(blocks),
        }
    }

    /// (rows, columns) of one block, if block-structured.
    pub fn block_dims(&self) -> Option<(usize, usize)> {
        self.blocks().map(|k| (self.d / k, self.n / k))
    }

    /// The nonzero segment of atom j as (first row index, entries).
    /// Dense atoms span all d rows; block atoms span one block of rows.
    pub fn atom(&self, j: usize) -> (usize, &[f64]) {
        match self.structure {
            DictStructure::Dense => (0, &self.data[j * self.d..(j + 1) * self.d]),
            DictStructure::BlockDiagonal { blocks } => {
                let (dk, nk) = (self.d / blocks, self.n / blocks);
                let (b, c) = (j / nk, j % nk);
                let off = b * dk * nk + c * dk;
                (b * dk, &self.data[off..off + dk])
            }
        }
    }

    /// Single entry (row i, atom j), zeros included.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (start, seg) = self.atom(j);
        if i >= start && i < start + seg.len() {
            seg[i - start]
        } else {
            0.0
        }
    }

    /// Serializes as 7 little-endian u64 header words
    /// (magic, d, blocks-or-0, n, structure tag, seed, stream)
    /// followed by all d*n entries as little-endian f64, row-major.
    pub fn dump<W: Write>(&self, w: &mut W) -> Result<()> {
        let (tag, blocks) = match self.structure {
            DictStructure::Dense => (0u64, 0u64),
            DictStructure::BlockDiagonal { blocks } => (1, blocks as u64),
        };
        let header = [
            DUMP_MAGIC,
            self.d as u64,
            blocks,
            self.n as u64,
            tag,
            self.seed_provenance.0,
            self.seed_provenance.1,
        ];
        for word in header {
            w.write_all(&word.to_le_bytes())?;
        }
        for i in 0..self.d {
            for j in 0..self.n {
                w.write_all(&self.entry(i, j).to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a `dump` back; validates magic, structure, the block zero
    /// pattern, and the no-zero-atom invariant.
    pub fn load<R: Read>(r: &mut R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut header = [0u64; 7];
        for h in header.iter_mut() {
            r.read_exact(&mut word)?;
            *h = u64::from_le_bytes(word);
        }
        if header[0] != DUMP_MAGIC {
            return Err(Error::Format("magic number mismatch".into()));
        }
        let (d, blocks, n, tag) = (
            header[1] as usize,
            header[2] as usize,
            header[3] as usize,
            header[4],
        );
        if d == 0 || n == 0 {
            return Err(Error::Format("empty dimensions".into()));
        }
        let structure = match tag {
            0 => DictStructure::Dense,
            1 => {
                if blocks == 0 || d % blocks != 0 || n % blocks != 0 {
                    return Err(Error::Format(format!(
                        "block count {blocks} incompatible with {d} x {n}"
                    )));
                }
                DictStructure::BlockDiagonal { blocks }
            }
            _ => return Err(Error::Format(format!("unknown structure tag {tag}"))),
        };
        let mut rows = vec![0.0f64; d * n];
        for v in rows.iter_mut() {
            r.read_exact(&mut word)?;
            *v = f64::from_le_bytes(word);
        }
        if r.read(&mut word)? != 0 {
            return Err(Error::Format("trailing bytes after matrix".into()));
        }
        let data = match structure {
            DictStructure::Dense => {
                let mut data = vec![0.0f64; d * n];
                for i in 0..d {
                    for j in 0..n {
                        data[j * d + i] = rows[i * n + j];
                    }
                }
                data
            }
            DictStructure::BlockDiagonal { blocks } => {
                let (dk, nk) = (d / blocks, n / blocks);
                let mut data = vec![0.0f64; d * n / blocks];
                for i in 0..d {
                    for j in 0..n {
                        let v = rows[i * n + j];
                        let (bi, bj) = (i / dk, j / nk);
                        if bi == bj {
                            data[bi * dk * nk + (j % nk) * dk + (i % dk)] = v;
                        } else if v != 0.0 {
                            return Err(Error::Format(format!(
                                "nonzero entry ({i}, {j}) outside the diagonal blocks"
                            )));
                        }
                    }
                }
                data
            }
        };
        let dict = Self::assemble(d, n, structure, (header[5], header[6]), data)?;
        Ok(dict)
    }

    /// Builds a dense dictionary from explicit column-major entries
    /// (column j occupies data[j*d .. (j+1)*d]).
    pub fn from_dense_columns(d: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 || n == 0 || data.len() != d * n {
            return Err(Error::Config(format!(
                "need d*n = {} entries for a {d} x {n} dictionary, got {}",
                d * n,
                data.len()
            )));
        }
        Self::assemble(d, n, DictStructure::Dense, (0, 0), data)
    }

    fn assemble(
        d: usize,
        n: usize,
        structure: DictStructure,
        seed_provenance: (u64, u64),
        data: Vec<f64>,
    ) -> Result<Self> {
        let mut dict = Self {
            d,
            n,
            structure,
            seed_provenance,
            data,
            atom_norms: Vec::new(),
        };
        dict.atom_norms = (0..n)
            .map(|j| {
                let (_, seg) = dict.atom(j);
                seg.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect();
        if let Some(j) = dict.atom_norms.iter().position(|&nm| nm == 0.0) {
            return Err(Error::Format(format!("atom {j} is identically zero")));
        }
        Ok(dict)
    }
}

/// A nonzero signal with its Euclidean norm cached.
#[derive(Debug, Clone)]
pub struct Signal {
    values: Vec<f64>,
    norm: f64,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Domain("signal must have positive norm".into()));
        }
        Ok(Self { values, norm })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Deterministic, scheduling-independent generator for (seed, stream id).
/// Distinct ids give statistically independent streams; the same pair
/// always reproduces the same draws.
pub fn derive_stream(master_seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// Fills one atom with standard normal draws, rerolling the zero atom
/// (a probability-zero event kept out of band anyway).
fn fill_atom(rng: &mut ChaCha8Rng, col: &mut [f64]) -> f64 {
    loop {
        let mut sq = 0.0;
        for v in col.iter_mut() {
            *v = rng.sample(StandardNormal);
            sq += *v * *v;
        }
        if sq > 0.0 {
            return sq.sqrt();
        }
    }
}

/// Dense d-by-n dictionary of i.i.d. standard normal entries, drawn
/// column by column from the derived stream.
pub fn gen_gaussian_dict(inst: &ProblemInstance, master_seed: u64, stream_id: u64) -> Dictionary {
    let mut rng = derive_stream(master_seed, stream_id);
    let (d, n) = (inst.d, inst.n);
    let mut data = vec![0.0f64; d * n];
    let mut atom_norms = Vec::with_capacity(n);
    for j in 0..n {
        atom_norms.push(fill_atom(&mut rng, &mut data[j * d..(j + 1) * d]));
    }
    Dictionary {
        d,
        n,
        structure: DictStructure::Dense,
        seed_provenance: (master_seed, stream_id),
        data,
        atom_norms,
    }
}

/// Block-diagonal dictionary: k independent (d/k)-by-(n/k) Gaussian
/// blocks on the diagonal, zero elsewhere. Entries are drawn block by
/// block, column by column.
pub fn gen_blockdiag_dict(
    inst: &ProblemInstance,
    master_seed: u64,
    stream_id: u64,
) -> Result<Dictionary> {
    inst.require_block_divisibility()?;
    let mut rng = derive_stream(master_seed, stream_id);
    let (d, n, k) = (inst.d, inst.n, inst.k);
    let dk = d / k;
    let mut data = vec![0.0f64; dk * n];
    let mut atom_norms = Vec::with_capacity(n);
    for j in 0..n {
        atom_norms.push(fill_atom(&mut rng, &mut data[j * dk..(j + 1) * dk]));
    }
    Ok(Dictionary {
        d,
        n,
        structure: DictStructure::BlockDiagonal { blocks: k },
        seed_provenance: (master_seed, stream_id),
        data,
        atom_norms,
    })
}

/// One isotropic Gaussian signal: d i.i.d. standard normal coordinates
/// (redrawn in the probability-zero event of an exactly zero vector).
pub fn sample_isotropic_signal(d: usize, rng: &mut ChaCha8Rng) -> Signal {
    loop {
        let values: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(sig) = Signal::new(values) {
            return sig;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn instance_validation_and_ratios() {
        let inst = ProblemInstance::new(100, 20, 600).unwrap();
        assert_eq!(inst.s(), 0.2);
        assert_eq!(inst.o(), 6.0);
        assert_eq!(inst.m(), 30.0);
        assert!(inst.require_block_divisibility().is_ok());
        assert!(ProblemInstance::new(10, 0, 20).is_err());
        assert!(ProblemInstance::new(10, 10, 20).is_err());
        assert!(ProblemInstance::new(10, 2, 1).is_err());
        assert!(ProblemInstance::new(4, 3, 6)
            .unwrap()
            .require_block_divisibility()
            .is_err());
    }

    #[test]
    fn streams_are_deterministic_and_separated() {
        let draws = |seed, id| {
            let mut rng = derive_stream(seed, id);
            (0..100).map(|_| rng.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(draws(42, 0), draws(42, 0));
        assert_ne!(draws(42, 0), draws(42, 1));
        assert_ne!(draws(42, 7), draws(43, 7));
    }

    #[test]
    fn dense_dictionary_statistics_and_determinism() {
        let inst = ProblemInstance::new(1000, 2, 1000).unwrap();
        let dict = gen_gaussian_dict(&inst, 7, 0);
        let total = (inst.d * inst.n) as f64;
        let mean: f64 = dict.data.iter().sum::<f64>() / total;
        assert!(mean.abs() < 4.0 / total.sqrt(), "mean {mean} outside CLT band");
        let var: f64 = dict.data.iter().map(|v| v * v).sum::<f64>() / total - mean * mean;
        assert!((var - 1.0).abs() < 0.02, "variance {var} too far from 1");

        let again = gen_gaussian_dict(&inst, 7, 0);
        assert_eq!(dict.data, again.data);
        let other = gen_gaussian_dict(&inst, 7, 1);
        assert_ne!(dict.data, other.data);

        // Cached norms match a recomputation.
        for j in (0..inst.n).step_by(97) {
            let (_, seg) = dict.atom(j);
            let norm = seg.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - dict.atom_norms()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn block_dictionary_structure() {
        let inst = ProblemInstance::new(4, 2, 8).unwrap();
        let dict = gen_blockdiag_dict(&inst, 1, 0).unwrap();
        assert_eq!(dict.block_dims(), Some((2, 4)));
        for i in 0..4 {
            for j in 0..8 {
                let in_block = (i / 2) == (j / 4);
                if !in_block {
                    assert_eq!(dict.entry(i, j), 0.0, "({i},{j}) must be off-block zero");
                } else {
                    assert_ne!(dict.entry(i, j), 0.0);
                }
            }
        }

        let inst = ProblemInstance::new(100, 20, 600).unwrap();
        let dict = gen_blockdiag_dict(&inst, 1, 0).unwrap();
        assert_eq!(dict.block_dims(), Some((5, 30)));
        assert_eq!(dict.blocks(), Some(20));

        let bad = ProblemInstance::new(4, 3, 6).unwrap();
        let err = gen_blockdiag_dict(&bad, 1, 0).unwrap_err();
        assert!(err.to_string().contains("does not divide d"));
    }

    #[test]
    fn block_atom_views_match_entries() {
        let inst = ProblemInstance::new(6, 3, 9).unwrap();
        let dict = gen_blockdiag_dict(&inst, 5, 2).unwrap();
        for j in 0..9 {
            let (start, seg) = dict.atom(j);
            for (r, &v) in seg.iter().enumerate() {
                assert_eq!(dict.entry(start + r, j), v);
            }
            assert_eq!(seg.len(), 2);
        }
    }

    #[test]
    fn signals_concentrate_and_reproduce() {
        let mut rng = derive_stream(0, 3);
        let sig = sample_isotropic_signal(1600, &mut rng);
        let ratio = sig.norm() * sig.norm() / 1600.0;
        assert!((ratio - 1.0).abs() < 0.05, "norm^2/d = {ratio}");
        let recomputed: f64 = sig.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((sig.norm() - recomputed).abs() < 1e-12);

        let mut rng = derive_stream(0, 3);
        let again = sample_isotropic_signal(1600, &mut rng);
        assert_eq!(sig.values(), again.values());

        assert!(Signal::new(vec![0.0; 4]).is_err());
        assert!(Signal::new(vec![]).is_err());
    }

    #[test]
    fn dump_load_round_trip_dense() {
        let inst = ProblemInstance::new(6, 2, 9).unwrap();
        let dict = gen_gaussian_dict(&inst, 11, 4);
        let mut buf = Vec::new();
        dict.dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 7 * 8 + 6 * 9 * 8);
        let loaded = Dictionary::load(&mut buf.as_slice()).unwrap();
        assert_eq!(loaded.structure(), DictStructure::Dense);
        assert_eq!(loaded.seed_provenance(), (11, 4));
        assert_eq!(loaded.data, dict.data);
        assert_eq!(loaded.atom_norms, dict.atom_norms);
    }

    #[test]
    fn dump_load_round_trip_block() {
        let inst = ProblemInstance::new(6, 3, 9).unwrap();
        let dict = gen_blockdiag_dict(&inst, 11, 4).unwrap();
        let mut buf = Vec::new();
        dict.dump(&mut buf).unwrap();
        let loaded = Dictionary::load(&mut buf.as_slice()).unwrap();
        assert_eq!(loaded.structure(), DictStructure::BlockDiagonal { blocks: 3 });
        assert_eq!(loaded.data, dict.data);

        // Corrupt one off-block entry: row 0 belongs to block 0, so the
        // last column of the matrix must be zero there.
        let mut bad = buf.clone();
        let pos = 7 * 8 + 8 * 8;
        bad[pos..pos + 8].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(
            Dictionary::load(&mut bad.as_slice()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn load_rejects_garbage() {
        assert!(Dictionary::load(&mut &b"short"[..]).is_err());
        let mut buf = Vec::new();
        let inst = ProblemInstance::new(4, 2, 4).unwrap();
        gen_gaussian_dict(&inst, 0, 0).dump(&mut buf).unwrap();
        // Wrong magic.
        let mut bad = buf.clone();
        bad[0] ^= 0xff;
        assert!(matches!(
            Dictionary::load(&mut bad.as_slice()),
            Err(Error::Format(_))
        ));
        // Truncated payload.
        let cut = buf.len() - 8;
        assert!(Dictionary::load(&mut &buf[..cut]).is_err());
        // Trailing junk.
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(
            Dictionary::load(&mut long.as_slice()),
            Err(Error::Format(_))
        ));
    }
}
