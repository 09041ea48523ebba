//! The independent reference values used by the acceptance suite.

use semichan::scenarios::{bpsk_awgn_mi, gaussian_mi_closed_form, gaussian_mi_quadrature, poisson_count_mi};

fn main() {
    println!("Gaussian message, γT = σ² = 1:");
    println!("  closed form  {:.15}", gaussian_mi_closed_form(1.0, 1.0, 1.0));
    println!("  quadrature   {:.15}", gaussian_mi_quadrature(1.0, 1.0, 1.0, 2000));
    println!("Binary ±1 drift (Gauss-Hermite, 40 nodes):");
    for s in [0.25, 1.0, 4.0, 16.0] {
        println!("  γT = {s:>5}: {:.15}", bpsk_awgn_mi(s));
    }
    println!("Poisson means (1, 2), equiprobable: {:.15}", poisson_count_mi(&[1.0, 2.0], &[0.5, 0.5]));
}
