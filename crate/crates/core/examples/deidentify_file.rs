//! De-identify one in-memory instance with the built-in policy and print
//! what happened to each attribute.

use midib_deid::deid::{deidentify, DeidPolicy, IdentityVault, ScrubberConfig};
use midib_deid::dicom::{tags, DataElement, Dataset, DicomFile, TransferSyntax, Vr};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds: Dataset = [
        DataElement::text(tags::SOP_CLASS_UID, Vr::UI, "1.2.840.10008.5.1.4.1.1.1.2"),
        DataElement::text(tags::SOP_INSTANCE_UID, Vr::UI, "1.2.826.0.1.3680043.2.1125.1"),
        DataElement::text(tags::STUDY_INSTANCE_UID, Vr::UI, "1.2.826.0.1.3680043.2.1125.2"),
        DataElement::text(tags::STUDY_DATE, Vr::DA, "20230415"),
        DataElement::text(tags::PATIENT_NAME, Vr::PN, "DOE^JANE"),
        DataElement::text(tags::PATIENT_ID, Vr::LO, "MRN100001"),
        DataElement::text(tags::PATIENT_BIRTH_DATE, Vr::DA, "19750412"),
        DataElement::text(tags::ACCESSION_NUMBER, Vr::SH, "ACC7712093"),
        DataElement::text(
            tags::STUDY_DESCRIPTION,
            Vr::LO,
            "BREAST^ROUTINE for MASS for 311-25-3722",
        ),
        DataElement::text(tags::MODALITY, Vr::CS, "MG"),
    ]
    .into_iter()
    .collect();
    let file = DicomFile::new(TransferSyntax::ExplicitVrLittleEndian, ds);

    let vault = IdentityVault::new(7);
    let (out, log) = deidentify(
        &file,
        &DeidPolicy::builtin(),
        &vault,
        &ScrubberConfig::default(),
        &[],
    )?;

    for a in &log {
        let before = file.dataset.get_path(&a.path).map(|e| e.to_text()).unwrap_or_default();
        let after = out.dataset.get_path(&a.path).map(|e| e.to_text());
        println!("{:<14} {:<22} {:?} -> {:?}", a.path.to_string(), a.action, before, after);
    }
    println!("date offset for MRN100001: {} days", vault.derive_offset("MRN100001"));
    Ok(())
}
