//! Flat access to uncompressed, single-sample, little-endian pixel data.

use super::{tags, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelGeometry {
    pub rows: usize,
    pub columns: usize,
    /// 8 or 16.
    pub bits_allocated: usize,
    pub frames: usize,
}

impl PixelGeometry {
    pub fn from_dataset(ds: &Dataset) -> Option<Self> {
        let rows = usize::try_from(ds.get(tags::ROWS)?.first_int()?).ok()?;
        let columns = usize::try_from(ds.get(tags::COLUMNS)?.first_int()?).ok()?;
        let bits_allocated = usize::try_from(ds.get(tags::BITS_ALLOCATED)?.first_int()?).ok()?;
        if bits_allocated != 8 && bits_allocated != 16 {
            return None;
        }
        let frames = ds
            .get(tags::NUMBER_OF_FRAMES)
            .and_then(|e| e.first_int())
            .map_or(1, |n| n.max(1) as usize);
        Some(PixelGeometry {
            rows,
            columns,
            bits_allocated,
            frames,
        })
    }

    pub fn bytes_per_sample(&self) -> usize {
        self.bits_allocated / 8
    }

    pub fn frame_samples(&self) -> usize {
        self.rows * self.columns
    }

    /// Byte length of the pixel data before even-length padding.
    pub fn expected_len(&self) -> usize {
        self.frame_samples() * self.frames * self.bytes_per_sample()
    }

    pub fn max_sample(&self) -> u16 {
        if self.bits_allocated == 8 {
            u8::MAX.into()
        } else {
            u16::MAX
        }
    }

    fn offset(&self, frame: usize, x: usize, y: usize) -> usize {
        ((frame * self.frame_samples()) + y * self.columns + x) * self.bytes_per_sample()
    }

    pub fn sample(&self, data: &[u8], frame: usize, x: usize, y: usize) -> u16 {
        let o = self.offset(frame, x, y);
        if self.bits_allocated == 8 {
            data[o].into()
        } else {
            u16::from_le_bytes([data[o], data[o + 1]])
        }
    }

    pub fn set_sample(&self, data: &mut [u8], frame: usize, x: usize, y: usize, value: u16) {
        let o = self.offset(frame, x, y);
        if self.bits_allocated == 8 {
            data[o] = value as u8;
        } else {
            data[o..o + 2].copy_from_slice(&value.to_le_bytes());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_bit_samples_are_little_endian() {
        let g = PixelGeometry {
            rows: 2,
            columns: 3,
            bits_allocated: 16,
            frames: 1,
        };
        let mut data = vec![0u8; g.expected_len()];
        g.set_sample(&mut data, 0, 2, 1, 0x1234);
        assert_eq!(&data[10..12], &[0x34, 0x12]);
        assert_eq!(g.sample(&data, 0, 2, 1), 0x1234);
    }
}
