//! Packed bit sequences for the statistical tests (MSB-first per byte).

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitSeqError {
    #[error("bit strings may only contain '0' and '1'")]
    BadCharacter,
}

#[derive(Clone, PartialEq, Eq)]
pub struct BitSequence {
    bytes: Vec<u8>,
    len: usize,
}

impl std::fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitSequence(len={})", self.len)
    }
}

impl BitSequence {
    pub fn from_bits(bits: &[bool]) -> BitSequence {
        let mut bytes = vec![0u8; bits.len().div_ceil(8)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (7 - i % 8);
            }
        }
        BitSequence {
            bytes,
            len: bits.len(),
        }
    }

    /// Every byte contributes 8 bits, most significant first.
    pub fn from_bytes(bytes: &[u8]) -> BitSequence {
        BitSequence {
            len: bytes.len() * 8,
            bytes: bytes.to_vec(),
        }
    }

    pub fn from_ascii(s: &str) -> Result<BitSequence, BitSeqError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                _ => return Err(BitSeqError::BadCharacter),
            }
        }
        Ok(Self::from_bits(&bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn ones(&self) -> usize {
        // mask the tail byte before popcount
        let full = self.len / 8;
        let mut count: usize = self.bytes[..full].iter().map(|b| b.count_ones() as usize).sum();
        let rem = self.len % 8;
        if rem > 0 {
            let mask = !0u8 << (8 - rem);
            count += (self.bytes[full] & mask).count_ones() as usize;
        }
        count
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// The +1/-1 mapping used by several statistics.
    pub fn to_pm1(&self) -> Vec<f64> {
        self.iter().map(|b| if b { 1.0 } else { -1.0 }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_round_trip() {
        let s = BitSequence::from_ascii("1011 0101\n01").unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.ones(), 6);
        let bits: Vec<bool> = s.iter().collect();
        assert_eq!(
            bits,
            [true, false, true, true, false, true, false, true, false, true]
        );
        assert!(BitSequence::from_ascii("102").is_err());
    }

    #[test]
    fn byte_packing_is_msb_first() {
        let s = BitSequence::from_bytes(&[0b1000_0001, 0xff]);
        assert_eq!(s.len(), 16);
        assert!(s.get(0));
        assert!(!s.get(1));
        assert!(s.get(7));
        assert_eq!(s.ones(), 10);
    }

    #[test]
    fn tail_bits_do_not_leak_into_ones() {
        let s = BitSequence::from_bits(&[true, true, true]);
        assert_eq!(s.ones(), 3);
        let t = BitSequence::from_bits(&[false; 9]);
        assert_eq!(t.ones(), 0);
    }
}
