//! Propagate a coherent state in the truncated oscillator basis and inspect
//! the conserved quantities, Ehrenfest derivatives, and the Wigner transform
//! of the evolved state.
//!
//! Run with: cargo run --release --example exact_reference

use vtwa::exact::{
    coherent_state, hamiltonian_matrix, observables, propagate, wigner_field, DEFAULT_DT,
    DEFAULT_N_LEVELS,
};
use vtwa::metrics::purity;
use vtwa::phase::{PhaseGrid, QuarticModel};

fn main() {
    let model = QuarticModel::new(1.0).unwrap();
    let h = hamiltonian_matrix(&model, DEFAULT_N_LEVELS).unwrap();
    let psi0 = coherent_state(1.0, 0.0, DEFAULT_N_LEVELS).unwrap();
    let times = [0.25, 0.5, 1.0, 1.5, 2.0];
    let snaps = propagate(&psi0, &h, &times, DEFAULT_DT).unwrap();

    let initial = observables(&psi0, &model);
    println!("basis: {DEFAULT_N_LEVELS} levels, dt = {DEFAULT_DT:.0e}");
    println!("t = 0.00: <x> = {:+.6}  <p> = {:+.6}  E = {:.8}", initial.mean_x, initial.mean_p, initial.energy);
    for (t, snap) in times.iter().zip(&snaps) {
        let obs = observables(snap, &model);
        println!(
            "t = {t:.2}: <x> = {:+.6}  <p> = {:+.6}  E = {:.8}  (E drift {:+.1e}, norm drift {:+.1e})",
            obs.mean_x,
            obs.mean_p,
            obs.energy,
            obs.energy - initial.energy,
            snap.norm_sq() - 1.0,
        );
    }

    let grid = PhaseGrid::new(-6.0, 6.0, 192, -12.0, 12.0, 288).unwrap();
    let field = wigner_field(snaps.last().unwrap(), &grid, 512).unwrap();
    println!(
        "\nWigner transform at t = 2: integral = {:.6}, purity = {:.6}, min value = {:+.4e}",
        field.integrate(),
        purity(&field),
        field.min_value(),
    );
    println!("(negative values are the quantum interference fringes the classical transports cannot produce)");
}
