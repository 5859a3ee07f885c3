//! Generate a corpus, de-identify it, damage one attribute and score the
//! result in both aggregation modes.

use midib_deid::answer_key::{load_mapping, MappingKind};
use midib_deid::corpus::{generate, CorpusSpec};
use midib_deid::deid::{deidentify_corpus, DeidPolicy, DeidRun, IdentityVault, ScrubberConfig};
use midib_deid::dicom::{read_file, tags, write_file, DataElement, Vr};
use midib_deid::reports::{discrepancy_csv, format_percent};
use midib_deid::scorer::{normalized_accuracy, score_submission, AggregationMode, ScoreOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let (orig, sub) = (tmp.path().join("orig"), tmp.path().join("sub"));

    let corpus = generate(&CorpusSpec { n_patients: 5, seed: 3, ..CorpusSpec::default() }, &orig)?;
    let regions = midib_deid::deid::load_regions(&orig.join("regions.csv"))?;
    let policy = DeidPolicy::builtin();
    let scrub = ScrubberConfig::default();
    let run = DeidRun { policy: &policy, scrub: &scrub, regions: &regions, lenient: false };
    let vault = IdentityVault::new(3);
    deidentify_corpus(&orig, &sub, &run, &vault, 2)?;

    let target = midib_deid::deid::list_dicom_files(&sub)?.remove(0);
    let mut file = read_file(&target, false)?;
    file.dataset.insert(DataElement::text(
        tags::STUDY_DESCRIPTION,
        Vr::LO,
        "damaged 311-25-3722",
    ));
    write_file(&target, &file)?;

    let patid = load_mapping(&sub.join("patid.csv"), MappingKind::PatientId)?;
    let uids = load_mapping(&sub.join("uid.csv"), MappingKind::Uid)?;
    for mode in [AggregationMode::Series, AggregationMode::Instance] {
        let options = ScoreOptions { mode, ..ScoreOptions::default() };
        let outcome = score_submission(&corpus.key, &orig, &sub, &patid, &uids, &options)?;
        let o = outcome.summary.overall();
        println!(
            "{:<8} checked={} errors={} overall={} normalized={}",
            mode.as_str(),
            outcome.checked,
            o.errors,
            format_percent(o.accuracy),
            format_percent(normalized_accuracy(&outcome.summary)),
        );
        if mode == AggregationMode::Series {
            print!("{}", discrepancy_csv(&outcome.failed));
        }
    }
    Ok(())
}
