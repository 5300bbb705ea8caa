//! Builds the QRSE density for one parameter vector and prints the pieces that make it up.
//!
//! $ cargo run --example density -- 2.1 4.9 8.66 17.8

use qrse::model::{
    build_density, choice_difference, conditional_entropy, entry_probability, exit_probability, EvalGrid,
    QrseParams,
};

fn main() -> qrse::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let [t, s, mu, alpha] = match args.as_slice() {
        [t, s, mu, alpha] => [*t, *s, *mu, *alpha],
        _ => [2.1, 4.9, 8.66, 17.8],
    };
    let params = QrseParams::new(t, s, mu, alpha)?;
    let grid = EvalGrid::auto(&params);
    let table = build_density(&params, &grid)?;

    println!("grid [{:.2}, {:.2}] with {} points, dx = {:.4}", grid.first(), grid.last(), grid.len(), grid.spacing());
    println!("log Z = {:.6}, mass = {:.12}, mean = {:.4}", table.log_z, table.total_mass(), table.mean());
    println!();
    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "x", "entry", "exit", "tanh", "H", "pdf");
    for k in -4..=8 {
        let x = mu + k as f64 * t;
        let pdf = (qrse::model::log_kernel(x, &params) - table.log_z).exp();
        println!(
            "{:>8.2} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            x,
            entry_probability(x, &params),
            exit_probability(x, &params),
            choice_difference(x, &params),
            conditional_entropy(x, &params),
            pdf
        );
    }
    Ok(())
}
