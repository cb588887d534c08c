use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Reproducible random substream addressed by a master seed and an integer path.
///
/// Runs use the path `(trial, block, agent rank within block, round)`, so the
/// same agent in the same round always sees the same noise regardless of how
/// trials or blocks are scheduled.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<u64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            path: Vec::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self {
            master_seed: self.master_seed,
            path,
        }
    }

    pub fn descend(&self, indices: &[u64]) -> Self {
        indices.iter().fold(self.clone(), |s, &i| s.child(i))
    }

    /// 256-bit ChaCha seed derived from the full address.
    fn seed_bytes(&self) -> [u8; 32] {
        let mut h = splitmix64(self.master_seed);
        for (depth, &p) in self.path.iter().enumerate() {
            h = splitmix64(h ^ splitmix64(p.wrapping_add((depth as u64 + 1) << 56)));
        }
        let mut seed = [0u8; 32];
        let mut s = h;
        for chunk in seed.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        seed
    }

    /// Fresh generator positioned at the start of this substream.
    pub fn generator(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.seed_bytes())
    }
}
