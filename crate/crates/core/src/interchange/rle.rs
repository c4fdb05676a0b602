use serde::{Deserialize, Serialize};

/// Run-length encoded row-major bitmap: alternating run lengths, starting
/// with a (possibly empty) run of `false`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    pub counts: Vec<u32>,
}

impl Rle {
    pub fn encode(bits: &[bool]) -> Self {
        let mut counts = Vec::new();
        let mut current = false;
        let mut run = 0u32;
        for &b in bits {
            if b != current {
                counts.push(run);
                run = 0;
                current = b;
            }
            run += 1;
        }
        counts.push(run);
        Self { counts }
    }

    /// Number of pixels covered.
    pub fn len(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of set pixels.
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }

    pub fn decode(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.len() as usize);
        let mut value = false;
        for &c in &self.counts {
            out.extend(std::iter::repeat_n(value, c as usize));
            value = !value;
        }
        out
    }

    /// Indices of set pixels in ascending order.
    pub fn set_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let mut start = 0usize;
        self.counts.iter().enumerate().flat_map(move |(i, &c)| {
            let range = start..start + c as usize;
            start += c as usize;
            let take = i % 2 == 1;
            range.filter(move |_| take)
        })
    }

    /// Inclusive pixel bounding box `(u_min, v_min, u_max, v_max)`.
    pub fn bbox(&self, width: usize) -> Option<(usize, usize, usize, usize)> {
        let mut it = self.set_indices();
        let first = it.next()?;
        let mut b = (first % width, first / width, first % width, first / width);
        for i in it {
            let (u, v) = (i % width, i / width);
            b = (b.0.min(u), b.1.min(v), b.2.max(u), b.3.max(v));
        }
        Some(b)
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.counts.iter().flat_map(|c| c.to_le_bytes()).collect()
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() % 4 != 0 {
            return None;
        }
        let counts = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Some(Self { counts })
    }
}
