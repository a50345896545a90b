//! Mean 84-step Mackey-Glass RMSE of the Wide(3) benchmark model as the
//! input-block norm varies.
//!
//! `cargo run --release -p deepesn --example input_scale -- [runs]`

use deepesn::experiment::{evaluate, prepare_split, DatasetSpec, ModelSpec, SplitSpec};
use deepesn::init::Scale;

fn main() -> deepesn::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let split = prepare_split(&DatasetSpec::MackeyGlass(Default::default()), &SplitSpec::mackey_glass())?;
    println!("sigma_in,rmse,nrmse");
    for sigma_in in [0.1, 0.3, 1.0, 3.0, 5.0, 10.0] {
        let mut spec = ModelSpec::mackey_glass_wide();
        spec.init.sigma_in = Scale::Value(sigma_in);
        let r = evaluate(&split, &spec, runs, 0)?;
        println!("{sigma_in},{:.5},{:.4}", r.rmse, r.nrmse);
    }
    Ok(())
}
