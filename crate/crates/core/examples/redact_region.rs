//! Fill burned-in text boxes in an 8-bit frame and count what changed.

use midib_deid::deid::{redact_pixels, RedactionRegion};
use midib_deid::dicom::PixelGeometry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geom = PixelGeometry { rows: 100, columns: 100, bits_allocated: 8, frames: 1 };
    let pixels: Vec<u8> = (0..10_000u32).map(|i| (i * 37 % 254 + 1) as u8).collect();
    let regions = [
        RedactionRegion::new("2.25.1", 10, 10, 20, 20),
        RedactionRegion::new("2.25.1", 15, 15, 30, 18),
    ];
    let refs: Vec<&RedactionRegion> = regions.iter().collect();
    let out = redact_pixels(&pixels, &geom, &refs)?;
    let changed = pixels.iter().zip(&out).filter(|(a, b)| a != b).count();
    println!("samples changed: {changed}");
    let again = redact_pixels(&out, &geom, &refs)?;
    println!("second pass changes nothing: {}", again == out);

    let outside = RedactionRegion::new("2.25.1", 90, 90, 101, 95);
    println!("out of bounds: {}", redact_pixels(&pixels, &geom, &[&outside]).unwrap_err());
    Ok(())
}
