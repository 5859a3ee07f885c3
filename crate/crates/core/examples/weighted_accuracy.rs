//! Weight action types by importance when combining per-type accuracy.

use std::collections::BTreeMap;

use midib_deid::answer_key::ActionType;
use midib_deid::scorer::{
    normalized_accuracy, parse_weights, weighted_accuracy, AggregationMode, ScoreSummary,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = ScoreSummary::from_action_counts(
        AggregationMode::Series,
        &[
            (ActionType::TextRemoved, 12, 400),
            (ActionType::TextRetained, 30, 9000),
            (ActionType::PixelsHidden, 1, 4),
            (ActionType::UidConsistent, 0, 1500),
        ],
    );
    println!("overall    {:.2}%", s.overall().accuracy);
    println!("normalized {:.2}%", normalized_accuracy(&s));

    let uniform: BTreeMap<_, _> = [
        (ActionType::TextRemoved, 0.25),
        (ActionType::TextRetained, 0.25),
        (ActionType::PixelsHidden, 0.25),
        (ActionType::UidConsistent, 0.25),
    ]
    .into();
    println!("uniform    {:.2}%", weighted_accuracy(&s, &uniform)?);

    let privacy_first = parse_weights(
        "action,weight\ntext_removed,0.5\npixels_hidden,0.3\ntext_retained,0.1\nuid_consistent,0.1\n",
    )?;
    println!("privacy    {:.2}%", weighted_accuracy(&s, &privacy_first)?);

    let bad: BTreeMap<_, _> = [(ActionType::TextRemoved, 0.9)].into();
    println!("rejected: {}", weighted_accuracy(&s, &bad).unwrap_err());
    Ok(())
}
