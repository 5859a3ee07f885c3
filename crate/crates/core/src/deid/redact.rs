use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DeidError;
use crate::dicom::pixels::PixelGeometry;

/// A rectangle to blank, `[x0, x1) x [y0, y1)`, applied to every frame of
/// the instance with SOP Instance UID `instance_uid` (original UID).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedactionRegion {
    pub instance_uid: String,
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    #[serde(skip, default)]
    pub fill: u16,
}

impl RedactionRegion {
    pub fn new(instance_uid: &str, x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        RedactionRegion {
            instance_uid: instance_uid.to_string(),
            x0,
            y0,
            x1,
            y1,
            fill: 0,
        }
    }

    pub fn check_bounds(&self, geom: &PixelGeometry) -> Result<(), DeidError> {
        if self.x0 < self.x1 && self.x1 <= geom.columns && self.y0 < self.y1 && self.y1 <= geom.rows {
            Ok(())
        } else {
            Err(DeidError::RegionOutOfBounds {
                region: format!("{},{},{},{}", self.x0, self.y0, self.x1, self.y1),
                rows: geom.rows,
                columns: geom.columns,
            })
        }
    }

    pub fn area(&self) -> usize {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Fills every region with its fill value; samples outside all regions are
/// copied unchanged.
pub fn redact_pixels(
    pixels: &[u8],
    geom: &PixelGeometry,
    regions: &[&RedactionRegion],
) -> Result<Vec<u8>, DeidError> {
    if pixels.len() < geom.expected_len() {
        return Err(DeidError::PixelDataTooShort {
            expected: geom.expected_len(),
            found: pixels.len(),
        });
    }
    for r in regions {
        r.check_bounds(geom)?;
    }
    let mut out = pixels.to_vec();
    for r in regions {
        for frame in 0..geom.frames {
            for y in r.y0..r.y1 {
                for x in r.x0..r.x1 {
                    geom.set_sample(&mut out, frame, x, y, r.fill);
                }
            }
        }
    }
    Ok(out)
}

/// Reads a sidecar with header `instance_uid,x0,y0,x1,y1`.
pub fn load_regions(path: &Path) -> Result<Vec<RedactionRegion>, DeidError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| DeidError::csv(path, e))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| DeidError::csv(path, e)))
        .collect()
}

pub fn regions_csv(regions: &[RedactionRegion]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if regions.is_empty() {
        w.write_record(["instance_uid", "x0", "y0", "x1", "y1"])
            .expect("in-memory write");
    }
    for r in regions {
        w.serialize(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
