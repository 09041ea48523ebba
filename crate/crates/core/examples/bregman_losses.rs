//! The two losses and the mean decomposition that makes the conditional
//! mean their optimal estimator.

use semichan::losses::{bregman_mean_decomposition_check, gauss_loss, poisson_loss, LossKind};

fn main() -> semichan::Result<()> {
    println!("l_G(3, 1) = {}", gauss_loss(3.0, 1.0).value());
    println!("l_P(2, 1) = {:.6}", poisson_loss(2.0, 1.0)?.value());
    println!("l_P(0, 3) = {}", poisson_loss(0.0, 3.0)?.value());

    let samples = [0.5, 1.0, 2.5, 4.0];
    for kind in [LossKind::Gauss, LossKind::Poisson] {
        for u in [1.0, 2.0, 3.0] {
            let (lhs, rhs) = bregman_mean_decomposition_check(&samples, u, kind)?;
            println!("{kind:?}, u = {u}: mean loss {lhs:.6} = loss at mean + penalty {rhs:.6}");
        }
    }
    Ok(())
}
