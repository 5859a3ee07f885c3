//! Consistent UID and patient ID replacement, and the mapping files a run
//! exports.

use midib_deid::deid::{mapping_csv, IdentityVault};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vault = IdentityVault::new(42);
    let study = "1.2.840.113619.2.55.3";
    let first = vault.remap_uid(study)?;
    let again = vault.remap_uid(study)?;
    println!("{study} -> {first}");
    println!("same replacement on repeat: {}", first == again);

    let rooted = IdentityVault::with_root(42, "1.2.826.0.1.3680043.10.999")?;
    println!("with custom root: {}", rooted.remap_uid(study)?);

    for id in ["MRN100001", "MRN100008"] {
        println!("{id} -> {} (offset {} days)", vault.map_patient_id(id)?, vault.derive_offset(id));
    }
    print!("{}", String::from_utf8(mapping_csv(&vault.uid_map()))?);
    Ok(())
}
