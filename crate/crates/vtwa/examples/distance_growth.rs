//! The headline experiment: Hilbert-Schmidt distance between each classical
//! transport and the exact state, as a function of time. The truncated
//! Wigner error grows linearly from the start; the variational transport
//! starts quadratically and overtakes it only at the crossover t* = C1/C2.
//!
//! Uses a reduced grid so it finishes in well under a minute; the acceptance
//! suite runs the full-resolution version.
//!
//! Run with: cargo run --release --example distance_growth

use vtwa::config::RunConfig;
use vtwa::experiments::run_distance;
use vtwa::metrics::loglog_slope;

fn main() {
    let mut times = vec![0.0];
    for k in 0..12 {
        let f = k as f64 / 11.0;
        times.push(0.02 * (0.2f64 / 0.02).powf(f));
    }
    let cfg = RunConfig {
        grid_n_x: 128,
        grid_n_p: 192,
        output_times: Some(times),
        t_max: 0.2,
        ..Default::default()
    };

    let out = run_distance(&cfg).unwrap();
    println!("{:>8} {:>12} {:>12}", "t", "d2_twa", "d2_vtwa");
    let d2_twa = out.table.column("d2_twa").unwrap();
    let d2_vtwa = out.table.column("d2_vtwa").unwrap();
    for (i, t) in out.table.times().iter().enumerate() {
        println!("{t:>8.4} {:>12.5e} {:>12.5e}", d2_twa[i], d2_vtwa[i]);
    }

    println!("\nfitted log-log exponents:");
    println!(
        "  full window [0.02, 0.20]: twa {:.3}, vtwa {:.3}",
        out.slope_twa.unwrap(),
        out.slope_vtwa.unwrap()
    );
    println!(
        "  short-time  [0.02, 0.07]: twa {:.3}, vtwa {:.3}",
        loglog_slope(&out.table, "d2_twa", 0.02, 0.07).unwrap(),
        loglog_slope(&out.table, "d2_vtwa", 0.02, 0.07).unwrap()
    );
    let c1 = d2_twa[1] / out.table.times()[1];
    let c2 = d2_vtwa[1] / out.table.times()[1].powi(2);
    println!("\nshort-time coefficients: d2_twa ~ {c1:.2} t, d2_vtwa ~ {c2:.1} t^2");
    println!("crossover t* = C1/C2 = {:.3}: below it the variational transport wins", c1 / c2);
}
