//! Build a dataset with a nested sequence, write it as Part-10 in both
//! transfer syntaxes and read it back.

use midib_deid::dicom::{
    parse_file, serialize, tags, DataElement, Dataset, DicomFile, TransferSyntax, Vr,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let item: Dataset = [DataElement::text(
        tags::REQUESTED_PROCEDURE_DESCRIPTION,
        Vr::LO,
        "CHEST^PA for NODULE",
    )]
    .into_iter()
    .collect();
    let ds: Dataset = [
        DataElement::text(tags::SOP_CLASS_UID, Vr::UI, "1.2.840.10008.5.1.4.1.1.2"),
        DataElement::text(tags::SOP_INSTANCE_UID, Vr::UI, "2.25.1234"),
        DataElement::text(tags::PATIENT_NAME, Vr::PN, "DOE^JANE"),
        DataElement::ints(tags::ROWS, Vr::US, vec![2]),
        DataElement::sequence(tags::REQUEST_ATTRIBUTES_SEQUENCE, vec![item]),
    ]
    .into_iter()
    .collect();

    for ts in [TransferSyntax::ExplicitVrLittleEndian, TransferSyntax::ImplicitVrLittleEndian] {
        let file = DicomFile::new(ts, ds.clone());
        let bytes = serialize(&file)?;
        let back = parse_file(&bytes)?;
        println!("{:?}: {} bytes, round trip equal: {}", ts, bytes.len(), back.dataset == ds);
        for (path, e) in back.dataset.walk() {
            println!("  {path:<32} {} {:?}", e.vr().code(), e.to_text());
        }
    }
    Ok(())
}
