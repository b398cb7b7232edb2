//! Binary serialization of [`LshIndex`].
//!
//! Layout (little-endian): magic `NPLSHIDX`, format version, the build
//! parameters, the cell vocabulary, the entry list, the sampled bit
//! positions of every hash function, and the table buckets. Loading
//! validates the magic, the version, and that the body echoes the declared
//! parameters.

use std::collections::HashMap;
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::datacube::PairFeature;
use crate::kernel::CubeKey;
use crate::{Error, Result};

use super::{HashSpec, LshIndex, LshParams};

const MAGIC: &[u8; 8] = b"NPLSHIDX";
const VERSION: u32 = 1;

impl LshIndex {
    /// Serialize the index.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.params.k_bits as u32)?;
        w.write_u32::<LittleEndian>(self.params.tables as u32)?;
        w.write_u32::<LittleEndian>(self.params.b1 as u32)?;
        w.write_u32::<LittleEndian>(self.params.b2 as u32)?;
        w.write_u64::<LittleEndian>(self.params.seed)?;

        w.write_u32::<LittleEndian>(self.vocab.len() as u32)?;
        for cell in &self.vocab {
            w.write_all(&[cell.deg_i_bin, cell.deg_j_bin, cell.cn_bin, cell.ll])?;
        }

        w.write_u32::<LittleEndian>(self.entries.len() as u32)?;
        for entry in &self.entries {
            w.write_u32::<LittleEndian>(entry.node)?;
            w.write_u64::<LittleEndian>(entry.t as u64)?;
        }

        for spec in &self.specs {
            for &pos in &spec.positions {
                w.write_u64::<LittleEndian>(pos)?;
            }
        }

        for table in &self.tables {
            // deterministic on-disk order
            let mut buckets: Vec<(&u64, &Vec<u32>)> = table.iter().collect();
            buckets.sort_unstable_by_key(|(key, _)| **key);
            w.write_u32::<LittleEndian>(buckets.len() as u32)?;
            for (key, entries) in buckets {
                w.write_u64::<LittleEndian>(*key)?;
                w.write_u32::<LittleEndian>(entries.len() as u32)?;
                for &e in entries {
                    w.write_u32::<LittleEndian>(e)?;
                }
            }
        }
        Ok(())
    }

    /// Deserialize and validate an index written by [`save`](Self::save).
    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::IndexFormat("bad magic; not an index file".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::IndexFormat(format!(
                "unsupported version {version}, expected {VERSION}"
            )));
        }
        let k_bits = r.read_u32::<LittleEndian>()? as usize;
        let tables = r.read_u32::<LittleEndian>()? as usize;
        let b1 = r.read_u32::<LittleEndian>()? as usize;
        let b2 = r.read_u32::<LittleEndian>()? as usize;
        let seed = r.read_u64::<LittleEndian>()?;
        let params = LshParams { k_bits, tables, b1, b2, seed };
        if k_bits == 0 || tables == 0 || b1 < 2 || b2 < 1 {
            return Err(Error::IndexFormat("parameter header fails validation".into()));
        }

        let vocab_len = r.read_u32::<LittleEndian>()? as usize;
        let mut vocab = Vec::with_capacity(vocab_len);
        for _ in 0..vocab_len {
            let mut cell = [0u8; 4];
            r.read_exact(&mut cell)?;
            vocab.push(PairFeature {
                deg_i_bin: cell[0],
                deg_j_bin: cell[1],
                cn_bin: cell[2],
                ll: cell[3],
            });
        }
        let total_bits = (vocab_len * b1 * b2) as u64;
        if k_bits as u64 > total_bits {
            return Err(Error::IndexFormat(format!(
                "k_bits {k_bits} exceeds bit layout {total_bits}"
            )));
        }

        let entry_count = r.read_u32::<LittleEndian>()? as usize;
        let mut entries = Vec::with_capacity(entry_count);
        for _ in 0..entry_count {
            let node = r.read_u32::<LittleEndian>()?;
            let t = r.read_u64::<LittleEndian>()? as usize;
            entries.push(CubeKey { node, t });
        }

        let bits_per_cell = b1 * b2;
        let mut specs = Vec::with_capacity(tables);
        for _ in 0..tables {
            let mut positions = Vec::with_capacity(k_bits);
            for _ in 0..k_bits {
                let pos = r.read_u64::<LittleEndian>()?;
                if pos >= total_bits {
                    return Err(Error::IndexFormat(format!(
                        "sampled position {pos} outside bit layout {total_bits}"
                    )));
                }
                positions.push(pos);
            }
            specs.push(HashSpec::from_positions(positions, bits_per_cell));
        }

        let mut table_maps = Vec::with_capacity(tables);
        for _ in 0..tables {
            let bucket_count = r.read_u32::<LittleEndian>()? as usize;
            let mut table: HashMap<u64, Vec<u32>> = HashMap::with_capacity(bucket_count);
            for _ in 0..bucket_count {
                let key = r.read_u64::<LittleEndian>()?;
                let len = r.read_u32::<LittleEndian>()? as usize;
                let mut bucket = Vec::with_capacity(len);
                for _ in 0..len {
                    let e = r.read_u32::<LittleEndian>()?;
                    if e as usize >= entry_count {
                        return Err(Error::IndexFormat(format!(
                            "bucket references entry {e} of {entry_count}"
                        )));
                    }
                    bucket.push(e);
                }
                if table.insert(key, bucket).is_some() {
                    return Err(Error::IndexFormat(format!("duplicate bucket key {key}")));
                }
            }
            table_maps.push(table);
        }

        let vocab_rank = vocab.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
        Ok(LshIndex { params, vocab, vocab_rank, specs, tables: table_maps, entries })
    }
}
