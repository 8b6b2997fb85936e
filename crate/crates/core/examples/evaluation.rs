//! NMI of detected communities against the truth, per segment and overall,
//! plus a change-point frequency table.

use netseg::eval::{changepoint_frequency, frequency_csv};
use netseg::{builtin_setting, detect, fit_known, generate, overall_nmi, SearchConfig};

fn main() -> netseg::Result<()> {
    let spec = builtin_setting(2)?.with_node_range(80, 90).with_seed(4);
    let (seq, truth) = generate(&spec)?;
    let cfg = SearchConfig::default();

    let known = fit_known(&seq, &truth.change_points, 1, &cfg)?;
    let report = overall_nmi(&known, &truth)?;
    print!("{}", report.to_csv());

    let runs: Vec<Vec<usize>> = (0..3)
        .map(|s| detect(&seq, s, &cfg).map(|r| r.change_points))
        .collect::<netseg::Result<_>>()?;
    let table = changepoint_frequency(runs.iter().map(|r| r.as_slice()), seq.len());
    println!("\ntrue change points {:?}", truth.change_points);
    print!("{}", frequency_csv(&table));
    Ok(())
}
