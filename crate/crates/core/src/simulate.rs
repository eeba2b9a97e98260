//! Byte-level broadcast simulation.
//!
//! Files are real pseudorandom bytes, caches and broadcast symbols are real
//! XORs of byte blocks, and every user decodes with its own Gauss-Jordan
//! elimination over (coefficient bitset, payload) rows. None of this shares
//! code with [`crate::gf2`], so agreement with
//! [`crate::verifier::verify_decodability`] is a genuine cross-check.
//!
//! File contents come from `ChaCha8Rng::seed_from_u64(seed)`, filling file 1
//! first, then file 2, and so on. The output is identical on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gf2::{Gf2Combo, SubfileId};
use crate::schemes::{DeliverySchedule, DemandVector, PlacementPlan, ProblemInstance};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserReconstruction {
    pub user: usize,
    pub file: usize,
    /// Parts of the requested file with no unit row after elimination.
    pub missing_parts: Vec<usize>,
    /// Parts that decoded but came out with the wrong bytes.
    pub corrupt_parts: Vec<usize>,
}

impl UserReconstruction {
    pub fn bit_exact(&self) -> bool {
        self.missing_parts.is_empty() && self.corrupt_parts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub instance: ProblemInstance,
    pub demand: DemandVector,
    pub seed: u64,
    pub file_size_bytes: usize,
    pub subfile_bytes: usize,
    pub bytes_broadcast: usize,
    pub users: Vec<UserReconstruction>,
}

impl ReconstructionReport {
    pub fn all_bit_exact(&self) -> bool {
        self.users.iter().all(UserReconstruction::bit_exact)
    }

    /// First user that failed, if any.
    pub fn first_failure(&self) -> Option<&UserReconstruction> {
        self.users.iter().find(|u| !u.bit_exact())
    }
}

struct Library {
    files: Vec<Vec<u8>>,
    subfile_bytes: usize,
    parts: usize,
}

impl Library {
    fn generate(seed: u64, n_files: usize, file_size: usize, parts: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..n_files)
            .map(|_| {
                let mut buf = vec![0u8; file_size];
                rng.fill_bytes(&mut buf);
                buf
            })
            .collect();
        Library {
            files,
            subfile_bytes: file_size / parts,
            parts,
        }
    }

    fn subfile(&self, id: SubfileId) -> &[u8] {
        let start = (id.part - 1) * self.subfile_bytes;
        &self.files[id.file - 1][start..start + self.subfile_bytes]
    }

    fn column(&self, id: SubfileId) -> usize {
        (id.file - 1) * self.parts + (id.part - 1)
    }

    /// Coefficient bitset and payload of one coded symbol.
    fn materialize(&self, combo: &Gf2Combo, words: usize) -> Packet {
        let mut coeffs = vec![0u64; words];
        let mut payload = vec![0u8; self.subfile_bytes];
        for &id in combo.terms() {
            let col = self.column(id);
            coeffs[col / 64] ^= 1 << (col % 64);
            for (dst, src) in payload.iter_mut().zip(self.subfile(id)) {
                *dst ^= src;
            }
        }
        Packet { coeffs, payload }
    }
}

#[derive(Clone)]
struct Packet {
    coeffs: Vec<u64>,
    payload: Vec<u8>,
}

impl Packet {
    fn bit(&self, col: usize) -> bool {
        self.coeffs[col / 64] >> (col % 64) & 1 == 1
    }

    fn lowest(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn is_unit(&self, col: usize) -> bool {
        self.coeffs.iter().enumerate().all(|(i, &w)| {
            if i == col / 64 {
                w == 1 << (col % 64)
            } else {
                w == 0
            }
        })
    }

    fn add(&mut self, other: &Packet) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a ^= b;
        }
        for (a, b) in self.payload.iter_mut().zip(&other.payload) {
            *a ^= b;
        }
    }
}

/// Reduced row-echelon decoder; rows stay fully back-substituted.
struct Decoder {
    rows: Vec<(usize, Packet)>,
}

impl Decoder {
    fn new() -> Self {
        Decoder { rows: Vec::new() }
    }

    fn absorb(&mut self, mut packet: Packet) {
        for (pivot, row) in &self.rows {
            if packet.bit(*pivot) {
                packet.add(row);
            }
        }
        let Some(pivot) = packet.lowest() else {
            return;
        };
        for (_, row) in &mut self.rows {
            if row.bit(pivot) {
                row.add(&packet);
            }
        }
        self.rows.push((pivot, packet));
    }

    fn solved(&self, col: usize) -> Option<&[u8]> {
        self.rows
            .iter()
            .find(|(p, row)| *p == col && row.is_unit(col))
            .map(|(_, row)| row.payload.as_slice())
    }
}

/// Runs the broadcast on random files and lets every user decode.
///
/// `file_size_bytes` must be a positive multiple of the instance's parts per
/// file. Decoding failures are reported per user, not as an error.
pub fn simulate_payload(
    seed: u64,
    file_size_bytes: usize,
    plan: &PlacementPlan,
    schedule: &DeliverySchedule,
    demand: &DemandVector,
) -> Result<ReconstructionReport> {
    let inst = plan.instance;
    let parts = inst.parts();
    if file_size_bytes == 0 || !file_size_bytes.is_multiple_of(parts) {
        return Err(Error::NotDivisible {
            bytes: file_size_bytes,
            parts,
        });
    }
    if schedule.instance != inst {
        return Err(Error::PlanMismatch(
            "schedule and plan instances differ".into(),
        ));
    }
    if demand.n_users() != inst.n_users() {
        return Err(Error::InvalidDemand(format!(
            "demand has {} entries but K = {}",
            demand.n_users(),
            inst.n_users()
        )));
    }

    let library = Library::generate(seed, inst.n_files(), file_size_bytes, parts);
    let words = (inst.n_files() * parts).div_ceil(64);
    let broadcast: Vec<Packet> = schedule
        .transmissions
        .iter()
        .map(|c| library.materialize(c, words))
        .collect();

    let users = (1..=inst.n_users())
        .map(|user| {
            let mut decoder = Decoder::new();
            for combo in plan.cache(user) {
                decoder.absorb(library.materialize(combo, words));
            }
            for packet in &broadcast {
                decoder.absorb(packet.clone());
            }
            let file = demand.file_of(user);
            let mut missing_parts = Vec::new();
            let mut corrupt_parts = Vec::new();
            for part in 1..=parts {
                let id = SubfileId::new(file, part);
                match decoder.solved(library.column(id)) {
                    None => missing_parts.push(part),
                    Some(bytes) if bytes != library.subfile(id) => corrupt_parts.push(part),
                    Some(_) => {}
                }
            }
            UserReconstruction {
                user,
                file,
                missing_parts,
                corrupt_parts,
            }
        })
        .collect();

    Ok(ReconstructionReport {
        instance: inst,
        demand: demand.clone(),
        seed,
        file_size_bytes,
        subfile_bytes: library.subfile_bytes,
        bytes_broadcast: schedule.len() * library.subfile_bytes,
        users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{deliver, place, place_equal_users};

    #[test]
    fn four_users_permutation_all_users_exact() {
        let plan = place_equal_users(4).unwrap();
        let d = DemandVector::new(vec![1, 2, 3, 4], 4).unwrap();
        let s = deliver(&plan, &d).unwrap();
        let report = simulate_payload(7, 4096, &plan, &s, &d).unwrap();
        assert!(report.all_bit_exact());
        assert_eq!(report.bytes_broadcast, 12_288);
        assert_eq!(report.subfile_bytes, 1024);
    }

    #[test]
    fn single_file_no_cache() {
        let plan = place(&ProblemInstance::uncached(1, 1).unwrap()).unwrap();
        let d = DemandVector::new(vec![1], 1).unwrap();
        let s = deliver(&plan, &d).unwrap();
        let report = simulate_payload(1, 10, &plan, &s, &d).unwrap();
        assert!(report.all_bit_exact());
        assert_eq!(report.bytes_broadcast, 10);
    }

    #[test]
    fn broken_schedule_fails_some_user() {
        let plan = place_equal_users(3).unwrap();
        let d = DemandVector::new(vec![1, 2, 3], 3).unwrap();
        let s = deliver(&plan, &d).unwrap().without(0);
        let report = simulate_payload(3, 300, &plan, &s, &d).unwrap();
        assert!(!report.all_bit_exact());
        assert!(report.first_failure().is_some());
    }

    #[test]
    fn divisibility_is_enforced() {
        let plan = place_equal_users(3).unwrap();
        let d = DemandVector::new(vec![1, 2, 3], 3).unwrap();
        let s = deliver(&plan, &d).unwrap();
        assert_eq!(
            simulate_payload(0, 100, &plan, &s, &d).unwrap_err(),
            Error::NotDivisible {
                bytes: 100,
                parts: 3
            }
        );
        assert!(simulate_payload(0, 0, &plan, &s, &d).is_err());
    }

    #[test]
    fn files_are_seed_deterministic() {
        let a = Library::generate(42, 2, 64, 2);
        let b = Library::generate(42, 2, 64, 2);
        let c = Library::generate(43, 2, 64, 2);
        assert_eq!(a.files, b.files);
        assert_ne!(a.files, c.files);
    }

    #[test]
    fn decoder_handles_wide_bitsets() {
        // 3 files x 30 parts = 90 columns, spanning two words
        let lib = Library::generate(5, 3, 90, 30);
        let mut dec = Decoder::new();
        let far = SubfileId::new(3, 30);
        let near = SubfileId::new(1, 1);
        dec.absorb(lib.materialize(&[far, near].into_iter().collect(), 2));
        assert!(dec.solved(lib.column(far)).is_none());
        dec.absorb(lib.materialize(&Gf2Combo::singleton(near), 2));
        assert_eq!(dec.solved(lib.column(far)), Some(lib.subfile(far)));
    }
}
