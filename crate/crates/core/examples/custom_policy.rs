//! Write a policy in the text format and see how attributes resolve.

use midib_deid::deid::DeidPolicy;
use midib_deid::dicom::{tags, DataElement, Dataset, Tag, Vr};

const POLICY: &str = "
default_standard = keep
default_private  = remove
vr:UI = hash_uid
vr:DA = shift_date
(0010,0010) = replace ANONYMOUS
(0008,1030) = clean_text
(6000,3000)-(60FF,3000) = remove
private_keep = 0009,SYNTH_VENDOR,10
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let policy: DeidPolicy = POLICY.parse()?;
    let level: Dataset = [
        DataElement::text(Tag::new(0x0009, 0x0010), Vr::LO, "SYNTH_VENDOR"),
        DataElement::text(Tag::new(0x0009, 0x1010), Vr::LO, "PROTOCOL^STANDARD"),
        DataElement::text(Tag::new(0x0009, 0x1020), Vr::LO, "INTERNAL REF REC1234567"),
        DataElement::text(tags::PATIENT_NAME, Vr::PN, "DOE^JANE"),
        DataElement::text(tags::STUDY_DATE, Vr::DA, "20230415"),
        DataElement::text(tags::STUDY_INSTANCE_UID, Vr::UI, "1.2.3"),
        DataElement::text(tags::STUDY_DESCRIPTION, Vr::LO, "CHEST^PA"),
        DataElement::bytes(Tag::new(0x6000, 0x3000), Vr::OW, vec![0; 8]),
        DataElement::text(tags::MODALITY, Vr::CS, "CT"),
    ]
    .into_iter()
    .collect();
    for e in level.iter() {
        println!("{} -> {}", e.tag(), policy.resolve(e, &level));
    }
    match "(0010,0010) = shred".parse::<DeidPolicy>() {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
