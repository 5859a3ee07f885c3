//! One line per acceptance criterion, then a non-zero exit if any failed.

mod common;

use std::time::{Duration, Instant};

use common::{audit_explicit, random_dataset, seed_spec, team_counts, Pipeline, Restore};
use midib_deid::answer_key::{
    ActionType, AnswerKey, AnswerKeyEntry, Category, MappingKind, MappingTable,
};
use midib_deid::corpus::CorpusSpec;
use midib_deid::dicom::{
    parse_file, read_file, serialize, tags, write_file, DataElement, DicomFile, ElementPath,
    PixelGeometry, TransferSyntax, Vr,
};
use midib_deid::reports::discrepancy_csv;
use midib_deid::scorer::{
    check_entry, normalized_accuracy, AggregationMode, ScoreSummary,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Series summary, instance summary, discrepancy rows and failing labels.
type MutationResult = (ScoreSummary, ScoreSummary, usize, Vec<(ActionType, String)>);

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture_scores() -> Outcome {
    let series = |team| ScoreSummary::from_action_counts(AggregationMode::Series, &team_counts(team));
    let t02 = series("T-02").overall().accuracy / 100.0;
    let t07 = series("T-07").overall().accuracy / 100.0;
    let t05 = normalized_accuracy(&series("T-05"));
    ensure((t02 - 0.9993).abs() <= 0.0005, || format!("T-02 overall {t02:.5}"))?;
    ensure((t07 - 0.9791).abs() <= 0.0005, || format!("T-07 overall {t07:.5}"))?;
    ensure((t05 - 99.79).abs() <= 0.05, || format!("T-05 normalized {t05:.3}"))?;
    Ok(format!("T-02 {t02:.4}, T-07 {t07:.4}, T-05 normalized {t05:.2}%"))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let p = Pipeline::build(&CorpusSpec::default());
    let mut notes = Vec::new();
    for mode in [AggregationMode::Series, AggregationMode::Instance] {
        let out = p.score(mode);
        let overall = out.summary.overall();
        ensure(overall.errors == 0 && overall.accuracy == 100.0, || {
            format!("{} mode: {} errors, {:.4}%", mode.as_str(), overall.errors, overall.accuracy)
        })?;
        let report = discrepancy_csv(&out.failed);
        ensure(report.lines().count() == 1, || format!("{} discrepancy rows", report.lines().count() - 1))?;
        ensure(out.missing.is_empty(), || format!("{} missing files", out.missing.len()))?;
        notes.push(format!("{} {}", mode.as_str(), out.checked));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} files, checked {} in {:.1?}", p.corpus.files, notes.join(" / "), elapsed))
}

/// One corruption of the de-identified corpus and the failure it must cause.
struct Mutation {
    name: &'static str,
    action: ActionType,
    subcategory: &'static str,
    pick: fn(&AnswerKeyEntry) -> bool,
    apply: fn(&mut DicomFile, &DicomFile, &AnswerKeyEntry),
}

fn top(e: &AnswerKeyEntry, tag: midib_deid::dicom::Tag) -> bool {
    e.tag_ds == ElementPath::top(tag)
}

fn restore_from_original(sub: &mut DicomFile, orig: &DicomFile, tag: midib_deid::dicom::Tag) {
    sub.dataset.insert(orig.dataset.get(tag).unwrap().clone());
}

fn mutations() -> Vec<Mutation> {
    vec![
        Mutation {
            name: "restore Frame of Reference UID",
            action: ActionType::UidChanged,
            subcategory: "DICOM-P15-BASIC-U",
            pick: |e| top(e, tags::FRAME_OF_REFERENCE_UID),
            apply: |s, o, _| restore_from_original(s, o, tags::FRAME_OF_REFERENCE_UID),
        },
        Mutation {
            name: "fresh Study Instance UID",
            action: ActionType::UidConsistent,
            subcategory: "DICOM-P15-BASIC-U",
            pick: |e| top(e, tags::STUDY_INSTANCE_UID),
            apply: |s, _, _| {
                s.dataset.insert(DataElement::text(tags::STUDY_INSTANCE_UID, Vr::UI, "2.25.4242"));
            },
        },
        Mutation {
            name: "unshifted Content Date",
            action: ActionType::DateShifted,
            subcategory: "TCIA-P15-MOD-C",
            pick: |e| top(e, tags::CONTENT_DATE),
            apply: |s, o, _| restore_from_original(s, o, tags::CONTENT_DATE),
        },
        Mutation {
            name: "blank Image Type",
            action: ActionType::TextNotnull,
            subcategory: "DICOM-IOD-1",
            pick: |e| top(e, tags::IMAGE_TYPE),
            apply: |s, _, _| {
                s.dataset.insert(DataElement::empty(tags::IMAGE_TYPE, Vr::CS));
            },
        },
        Mutation {
            name: "SSN back in Study Description",
            action: ActionType::TextRemoved,
            subcategory: "HIPAA-G",
            pick: |e| {
                top(e, tags::STUDY_DESCRIPTION)
                    && e.action == ActionType::TextRemoved
                    && e.action_text.iter().any(|t| t == "311-25-3722")
            },
            apply: |s, _, _| {
                let kept = s.dataset.text(tags::STUDY_DESCRIPTION).unwrap_or("").to_string();
                let value = format!("{kept} 311-25-3722");
                s.dataset.insert(DataElement::text(tags::STUDY_DESCRIPTION, Vr::LO, value));
            },
        },
        Mutation {
            name: "filler dropped from Series Description",
            action: ActionType::TextRetained,
            subcategory: "TCIA-P15-DESC-C",
            pick: |e| top(e, tags::SERIES_DESCRIPTION) && e.action == ActionType::TextRetained,
            apply: |s, _, e| {
                let kept = s.dataset.text(tags::SERIES_DESCRIPTION).unwrap().to_string();
                let value = kept.replacen(e.action_text[0].as_str(), "", 1);
                s.dataset.insert(DataElement::text(tags::SERIES_DESCRIPTION, Vr::LO, value.trim()));
            },
        },
        Mutation {
            name: "Body Part Examined deleted",
            action: ActionType::TagRetained,
            subcategory: "DICOM-IOD-2",
            pick: |e| top(e, tags::BODY_PART_EXAMINED),
            apply: |s, _, _| {
                s.dataset.remove(tags::BODY_PART_EXAMINED);
            },
        },
        Mutation {
            name: "Patient ID altered",
            action: ActionType::PatidConsistent,
            subcategory: "HIPAA-H",
            pick: |e| top(e, tags::PATIENT_ID),
            apply: |s, _, _| {
                s.dataset.insert(DataElement::text(tags::PATIENT_ID, Vr::LO, "DEID000000000000"));
            },
        },
        Mutation {
            name: "burned-in box left unfilled",
            action: ActionType::PixelsHidden,
            subcategory: "TCIA-REV",
            pick: |e| e.action == ActionType::PixelsHidden,
            apply: |s, o, e| {
                let geom = PixelGeometry::from_dataset(&s.dataset).unwrap();
                let src = o.dataset.get(tags::PIXEL_DATA).unwrap().as_bytes().unwrap().to_vec();
                let mut dst = s.dataset.get(tags::PIXEL_DATA).unwrap().as_bytes().unwrap().to_vec();
                let b = &e.region[0];
                for y in b.y0..b.y1 {
                    for x in b.x0..b.x1 {
                        geom.set_sample(&mut dst, 0, x, y, geom.sample(&src, 0, x, y));
                    }
                }
                let vr = s.dataset.get(tags::PIXEL_DATA).unwrap().vr();
                s.dataset.insert(DataElement::bytes(tags::PIXEL_DATA, vr, dst));
            },
        },
        Mutation {
            name: "one retained pixel perturbed",
            action: ActionType::PixelsRetained,
            subcategory: "TCIA-P15-PIX-K",
            pick: |e| e.action == ActionType::PixelsRetained,
            apply: |s, _, _| {
                let el = s.dataset.get(tags::PIXEL_DATA).unwrap();
                let (vr, mut px) = (el.vr(), el.as_bytes().unwrap().to_vec());
                px[0] ^= 1;
                s.dataset.insert(DataElement::bytes(tags::PIXEL_DATA, vr, px));
            },
        },
    ]
}

/// Applies `m` to the first matching entry's file, scores, then restores it.
fn run_mutation(
    p: &Pipeline,
    files: &std::collections::HashMap<String, std::path::PathBuf>,
    m: &Mutation,
) -> Result<MutationResult, String> {
    let entry = p
        .corpus
        .key
        .entries()
        .iter()
        .find(|e| (m.pick)(e))
        .ok_or_else(|| format!("{}: no key entry to corrupt", m.name))?;
    let path = p.submitted_for(files, &entry.instance);
    let _restore = Restore::new(&path);
    let orig = read_file(p.original(&entry.file_name), false).unwrap();
    let mut sub = read_file(&path, false).unwrap();
    (m.apply)(&mut sub, &orig, entry);
    write_file(&path, &sub).unwrap();

    let series = p.score(AggregationMode::Series);
    let instance = p.score(AggregationMode::Instance);
    let rows = discrepancy_csv(&series.failed).lines().count() - 1;
    let labels = series
        .failed
        .iter()
        .map(|r| (r.entry.action, r.entry.subcategory.clone()))
        .collect();
    Ok((series.summary, instance.summary, rows, labels))
}

fn series_le_instance(series: &ScoreSummary, instance: &ScoreSummary) -> Result<(), String> {
    for a in ActionType::ALL {
        let (s, i) = (series.action(a).errors, instance.action(a).errors);
        ensure(s <= i, || format!("{a}: series {s} > instance {i}"))?;
    }
    Ok(())
}

fn mutation_suite(p: &Pipeline) -> Outcome {
    let files = p.submitted_files();
    let baseline = p.score(AggregationMode::Series).summary.overall().errors;
    ensure(baseline == 0, || format!("baseline has {baseline} errors"))?;
    let mut problems = Vec::new();
    for m in mutations() {
        let (series, instance, rows, labels) = run_mutation(p, &files, &m)?;
        let expected = vec![(m.action, m.subcategory.to_string())];
        if series.overall().errors != 1 || labels != expected || rows != 1 {
            problems.push(format!(
                "{}: {} errors {:?}, {rows} rows",
                m.name,
                series.overall().errors,
                labels
            ));
        }
        if let Err(e) = series_le_instance(&series, &instance) {
            problems.push(format!("{}: {e}", m.name));
        }
    }
    ensure(problems.is_empty(), || problems.join("; "))?;
    Ok(format!("{} single corruptions each caught once", mutations().len()))
}

fn replication() -> Outcome {
    let spec = CorpusSpec { instances_per_series: 5..=5, ..seed_spec(3, 11) };
    let p = Pipeline::build(&spec);
    let files = p.submitted_files();
    let key: &AnswerKey = &p.corpus.key;
    let station = key
        .entries()
        .iter()
        .find(|e| top(e, tags::STATION_NAME) && e.action == ActionType::TextRemoved)
        .unwrap();
    let siblings: Vec<_> = key
        .entries_for_series(&station.series)
        .into_iter()
        .filter(|e| top(e, tags::STATION_NAME) && e.action == ActionType::TextRemoved)
        .collect();
    ensure(siblings.len() == 5, || format!("series has {} instances", siblings.len()))?;

    let mut guards = Vec::new();
    let mut last = (0, 0);
    for (k, e) in siblings.iter().enumerate() {
        let path = p.submitted_for(&files, &e.instance);
        guards.push(Restore::new(&path));
        let mut sub = read_file(&path, false).unwrap();
        sub.dataset.insert(DataElement::text(tags::STATION_NAME, Vr::SH, e.answer_value.clone()));
        write_file(&path, &sub).unwrap();

        let series = p.score(AggregationMode::Series).summary;
        let instance = p.score(AggregationMode::Instance).summary;
        series_le_instance(&series, &instance)?;
        let counts = (
            series.action(ActionType::TextRemoved).errors,
            instance.action(ActionType::TextRemoved).errors,
        );
        ensure(counts == (1, k as u64 + 1), || format!("k={}: series/instance {counts:?}", k + 1))?;
        last = counts;
    }
    Ok(format!("k=5 gives instance {} and series {}", last.1, last.0))
}

fn partial_credit() -> Outcome {
    let entry = |action, tokens: &[&str]| AnswerKeyEntry {
        index: 0,
        tag_ds: ElementPath::top(tags::STUDY_DESCRIPTION),
        tag_name: "Study Description".into(),
        answer_value: "BREAST^ROUTINE for MASS for 311-25-3722".into(),
        action,
        action_text: tokens.iter().map(|t| t.to_string()).collect(),
        category: Category::Hipaa,
        subcategory: "HIPAA-G".into(),
        modality: "MG".into(),
        class: "1.2.840.10008.5.1.4.1.1.1.2".into(),
        patient: "P".into(),
        study: "1.1".into(),
        series: "1.1.1".into(),
        instance: "1.1.1.1".into(),
        file_name: "f.dcm".into(),
        region: Vec::new(),
    };
    let file = |value: &str| {
        let ds = [DataElement::text(tags::STUDY_DESCRIPTION, Vr::LO, value)].into_iter().collect();
        DicomFile::new(TransferSyntax::ExplicitVrLittleEndian, ds)
    };
    let empty = MappingTable::from_pairs(MappingKind::Uid, Vec::new()).unwrap();
    let orig = file("BREAST^ROUTINE for MASS for 311-25-3722");

    let retained = entry(ActionType::TextRetained, &["BREAST^ROUTINE", "for", "MASS"]);
    let sub = file("BREAST^ROUTINE for 311-25-3722");
    let r = check_entry(&retained, &orig, Some(&sub), &empty, &empty);
    ensure((r.check_score - 0.6667).abs() < 5e-5 && !r.check_passed, || {
        format!("text_retained scored {}", r.check_score)
    })?;

    let removed = entry(ActionType::TextRemoved, &["311-25-3722"]);
    let clean = file("BREAST^ROUTINE for MASS for");
    let r2 = check_entry(&removed, &orig, Some(&clean), &empty, &empty);
    ensure(r2.check_score == 1.0 && r2.check_passed, || format!("text_removed scored {}", r2.check_score))?;
    Ok(format!("text_retained {:.4}, text_removed {:.1}", r.check_score, r2.check_score))
}

fn parser_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..1000 {
        let mut ds = random_dataset(&mut rng, 0);
        ds.insert(DataElement::text(tags::SOP_CLASS_UID, Vr::UI, "1.2.840.10008.5.1.4.1.1.7"));
        ds.insert(DataElement::text(tags::SOP_INSTANCE_UID, Vr::UI, format!("2.25.{case}")));
        let file = DicomFile::new(TransferSyntax::ExplicitVrLittleEndian, ds);
        let bytes = serialize(&file).map_err(|e| format!("case {case}: {e}"))?;
        let back = parse_file(&bytes).map_err(|e| format!("case {case}: {e}"))?;
        ensure(back.dataset == file.dataset && back.meta == file.meta, || format!("case {case}: dataset differs"))?;
        ensure(serialize(&back).unwrap() == bytes, || format!("case {case}: bytes differ"))?;

        let group_length = u32::from_le_bytes(bytes[140..144].try_into().unwrap()) as usize;
        let body = 144 + group_length;
        let mut faults = Vec::new();
        audit_explicit(&bytes, 132, Some(body), &mut faults);
        let end = audit_explicit(&bytes, body, None, &mut faults);
        ensure(end == bytes.len(), || format!("case {case}: walk ended at {end}"))?;
        ensure(faults.is_empty(), || format!("case {case}: {}", faults.join(", ")))?;
        if rng.gen_bool(0.1) {
            let mut implicit = back.clone();
            implicit.set_transfer_syntax(TransferSyntax::ImplicitVrLittleEndian);
            let ib = serialize(&implicit).unwrap();
            ensure(serialize(&parse_file(&ib).unwrap()).unwrap() == ib, || {
                format!("case {case}: implicit encoding unstable")
            })?;
        }
    }
    Ok("1000 random datasets round-trip".into())
}

fn normalized_below_overall() -> Outcome {
    let counts: Vec<_> = ActionType::ALL
        .iter()
        .zip(common::TABLE_TOTALS)
        .map(|(&a, total)| {
            let errors = match a {
                ActionType::PixelsHidden => 3,
                ActionType::PatidConsistent => 20,
                _ => 0,
            };
            (a, errors, total)
        })
        .collect();
    let s = ScoreSummary::from_action_counts(AggregationMode::Series, &counts);
    let (n, o) = (normalized_accuracy(&s), s.overall().accuracy);
    ensure(n < o, || format!("normalized {n:.4} >= overall {o:.4}"))?;
    for team in common::TEAM_ERRORS.iter().map(|t| t.0) {
        let s = ScoreSummary::from_action_counts(AggregationMode::Series, &team_counts(team));
        let (tn, to) = (normalized_accuracy(&s), s.overall().accuracy);
        ensure(tn < to, || format!("{team}: normalized {tn:.2} >= overall {to:.2}"))?;
    }
    Ok(format!("normalized {n:.2}% < overall {o:.4}%"))
}

fn main() {
    let mutation_fixture = Pipeline::build(&seed_spec(10, 5));
    let criteria: Vec<Criterion<'_>> = vec![
        ("reference fixture scores", Box::new(fixture_scores)),
        ("end-to-end self-consistency", Box::new(end_to_end)),
        ("mutation suite", Box::new(|| mutation_suite(&mutation_fixture))),
        ("series vs instance aggregation", Box::new(replication)),
        ("partial credit", Box::new(partial_credit)),
        ("parser round trip", Box::new(parser_property)),
        ("normalized below overall", Box::new(normalized_below_overall)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
