//! Series-based team scores, overall and normalized, computed from
//! per-action error counts.

use midib_deid::answer_key::ActionType;
use midib_deid::reports::{actions_csv, format_percent};
use midib_deid::scorer::{normalized_accuracy, AggregationMode, ScoreSummary};

const TOTALS: [u64; 10] = [2306, 429, 15, 29471, 121690, 85323, 5816, 254949, 40633, 40633];

const TEAM_ERRORS: [(&str, [u64; 10]); 10] = [
    ("T-01", [1, 93, 0, 32, 10, 74, 323, 208, 1, 1]),
    ("T-02", [3, 0, 11, 7, 0, 74, 142, 196, 0, 0]),
    ("T-03", [3, 35, 12, 259, 1069, 638, 420, 2526, 128, 268]),
    ("T-04", [16, 14, 1, 0, 545, 340, 386, 1131, 2, 203]),
    ("T-05", [1, 0, 0, 34, 0, 68, 103, 310, 1, 1]),
    ("T-06", [2, 0, 0, 0, 8, 12, 326, 131, 4, 4]),
    ("T-07", [18, 0, 8, 864, 187, 71, 245, 3587, 116, 7019]),
    ("T-08", [3, 0, 0, 69, 89, 74, 1338, 310, 0, 0]),
    ("T-09", [2, 0, 1, 0, 19, 106, 341, 201, 0, 0]),
    ("T-10", [2, 0, 3, 0, 89, 71, 421, 1863, 0, 0]),
];

fn main() {
    println!("team  errors  overall  normalized");
    for (team, errors) in TEAM_ERRORS {
        let counts: Vec<_> = ActionType::ALL
            .iter()
            .zip(errors.iter().zip(TOTALS))
            .map(|(&a, (&e, t))| (a, e, t))
            .collect();
        let s = ScoreSummary::from_action_counts(AggregationMode::Series, &counts);
        let o = s.overall();
        println!(
            "{team}  {:>6}  {:>7}  {:>10}",
            o.errors,
            format_percent(o.accuracy),
            format_percent(normalized_accuracy(&s))
        );
        if team == "T-02" {
            print!("{}", actions_csv(&s));
        }
    }
}
