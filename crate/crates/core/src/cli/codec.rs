//! Packetized occupancy bitfield.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "QRMB"
//! 4       4     W (u32)
//! 8       4     T (u32)
//! 12      4     popcount (u32)
//! 16      128*n packets, n = ceil(W*W / 1024)
//! ```
//!
//! Each packet is 16 little-endian `u64` words. Site `k` of the row-major
//! occupancy sits in packet `k / 1024`, word `(k % 1024) / 64`, bit `k % 64`
//! (bit 0 = least significant). Bits past `W*W` must be zero.

use crate::error::{Error, Result};
use crate::grid::{OccupancyGrid, TargetRegion};
use crate::latency::PACKET_BITS;

pub const MAGIC: [u8; 4] = *b"QRMB";
pub const HEADER_BYTES: usize = 16;
pub const WORDS_PER_PACKET: usize = (PACKET_BITS / 64) as usize;
pub const PACKET_BYTES: usize = WORDS_PER_PACKET * 8;

pub type Packet = [u64; WORDS_PER_PACKET];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketHeader {
    pub width: u32,
    pub target: u32,
    pub popcount: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketStream {
    pub header: PacketHeader,
    pub packets: Vec<Packet>,
}

fn packets_for(width: usize) -> usize {
    (width * width).div_ceil(PACKET_BITS as usize)
}

pub fn pack_bitfield(grid: &OccupancyGrid, target: &TargetRegion) -> Result<PacketStream> {
    if target.width() != grid.width() {
        return Err(Error::InvalidTarget {
            side: target.side(),
            width: grid.width(),
        });
    }
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| Error::Codec(format!("value {v} does not fit the header")))
    };
    let mut packets = vec![[0u64; WORDS_PER_PACKET]; packets_for(grid.width())];
    for (k, _) in grid.bits().iter().enumerate().filter(|(_, &b)| b) {
        let packet = k / PACKET_BITS as usize;
        let bit = k % PACKET_BITS as usize;
        packets[packet][bit / 64] |= 1u64 << (bit % 64);
    }
    Ok(PacketStream {
        header: PacketHeader {
            width: to_u32(grid.width())?,
            target: to_u32(target.side())?,
            popcount: to_u32(grid.popcount())?,
        },
        packets,
    })
}

pub fn unpack_bitfield(stream: &PacketStream) -> Result<(OccupancyGrid, TargetRegion)> {
    let width = stream.header.width as usize;
    let target = TargetRegion::new(width, stream.header.target as usize)?;
    let expected = packets_for(width);
    if stream.packets.len() != expected {
        return Err(Error::Codec(format!(
            "header says {width}x{width} ({expected} packets) but payload has {}",
            stream.packets.len()
        )));
    }
    let sites = width * width;
    let mut bits = Vec::with_capacity(sites);
    for (p, packet) in stream.packets.iter().enumerate() {
        for (w, &word) in packet.iter().enumerate() {
            for b in 0..64 {
                let k = p * PACKET_BITS as usize + w * 64 + b;
                let set = (word >> b) & 1 == 1;
                if k < sites {
                    bits.push(set);
                } else if set {
                    return Err(Error::Codec(format!("padding bit {k} is set")));
                }
            }
        }
    }
    let grid = OccupancyGrid::from_bits(width, bits)?;
    if grid.popcount() != stream.header.popcount as usize {
        return Err(Error::Codec(format!(
            "header popcount {} does not match payload popcount {}",
            stream.header.popcount,
            grid.popcount()
        )));
    }
    Ok((grid, target))
}

impl PacketStream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + self.packets.len() * PACKET_BYTES);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&self.header.width.to_le_bytes());
        out.extend_from_slice(&self.header.target.to_le_bytes());
        out.extend_from_slice(&self.header.popcount.to_le_bytes());
        for packet in &self.packets {
            for word in packet {
                out.extend_from_slice(&word.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_BYTES {
            return Err(Error::Codec(format!("truncated header: {} bytes", bytes.len())));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::Codec("bad magic".into()));
        }
        let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
        let header = PacketHeader {
            width: u32_at(4),
            target: u32_at(8),
            popcount: u32_at(12),
        };
        let payload = &bytes[HEADER_BYTES..];
        let expected = packets_for(header.width as usize);
        let want = expected * PACKET_BYTES;
        if payload.len() < want {
            return Err(Error::Codec(format!(
                "truncated payload: {} of {want} bytes",
                payload.len()
            )));
        }
        if payload.len() > want {
            return Err(Error::Codec(format!(
                "{} trailing bytes after {expected} packets",
                payload.len() - want
            )));
        }
        let packets = payload
            .chunks_exact(PACKET_BYTES)
            .map(|chunk| {
                let mut packet = [0u64; WORDS_PER_PACKET];
                for (word, raw) in packet.iter_mut().zip(chunk.chunks_exact(8)) {
                    *word = u64::from_le_bytes(raw.try_into().expect("8 bytes"));
                }
                packet
            })
            .collect();
        Ok(Self { header, packets })
    }
}

pub fn encode(grid: &OccupancyGrid, target: &TargetRegion) -> Result<Vec<u8>> {
    Ok(pack_bitfield(grid, target)?.to_bytes())
}

pub fn decode(bytes: &[u8]) -> Result<(OccupancyGrid, TargetRegion)> {
    unpack_bitfield(&PacketStream::from_bytes(bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{random_load, LoadConfig};

    #[test]
    fn fifty_wide_uses_three_packets() {
        let grid = random_load(50, LoadConfig::new(0.5, 1)).unwrap();
        let target = TargetRegion::new(50, 30).unwrap();
        let stream = pack_bitfield(&grid, &target).unwrap();
        assert_eq!(stream.packets.len(), 3);
        assert_eq!(stream.to_bytes().len(), HEADER_BYTES + 3 * PACKET_BYTES);
    }

    #[test]
    fn bit_layout_is_lsb_first() {
        // Sites 0, 65 and 1023 land in packet 0; site 1024 starts packet 1.
        let mut bits = vec![false; 34 * 34];
        for k in [0, 65, 1023, 1024] {
            bits[k] = true;
        }
        let grid = OccupancyGrid::from_bits(34, bits).unwrap();
        let stream = pack_bitfield(&grid, &TargetRegion::new(34, 2).unwrap()).unwrap();
        assert_eq!(stream.packets[0][0], 1);
        assert_eq!(stream.packets[0][1], 2);
        assert_eq!(stream.packets[0][15], 1 << 63);
        assert_eq!(stream.packets[1][0], 1);
        let bytes = stream.to_bytes();
        assert_eq!(&bytes[..4], b"QRMB");
        assert_eq!(&bytes[4..8], &34u32.to_le_bytes());
        assert_eq!(bytes[16], 1);
        assert_eq!(bytes[16 + 8], 2);
    }

    #[test]
    fn padding_must_be_zero() {
        let grid = OccupancyGrid::full(10).unwrap();
        let target = TargetRegion::new(10, 4).unwrap();
        let mut stream = pack_bitfield(&grid, &target).unwrap();
        stream.packets[0][15] |= 1 << 63;
        assert!(matches!(unpack_bitfield(&stream), Err(Error::Codec(_))));
    }

    #[test]
    fn truncated_and_mismatched_streams() {
        let grid = OccupancyGrid::full(10).unwrap();
        let target = TargetRegion::new(10, 4).unwrap();
        let bytes = encode(&grid, &target).unwrap();
        assert!(decode(&bytes[..10]).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(decode(&longer).is_err());

        let mut stream = pack_bitfield(&grid, &target).unwrap();
        stream.header.popcount -= 1;
        assert!(unpack_bitfield(&stream).is_err());

        let mut bad_magic = bytes;
        bad_magic[0] = b'X';
        assert!(decode(&bad_magic).is_err());
    }
}
