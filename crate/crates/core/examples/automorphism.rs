//! Builds the order-k automorphism of so(n) and the decomposition g = h ⊕ m.
//!
//! Usage: `cargo run --example automorphism -- [n] [k]` (defaults 5 and 6).

use flagf::liealg::so_dim;
use flagf::phispace::{build_automorphism, build_phi_space};

fn main() -> flagf::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let n = args.next().transpose().ok().flatten().unwrap_or(5);
    let k = args.next().transpose().ok().flatten().unwrap_or(6);

    let spec = build_automorphism(n, 1, k)?;
    println!("B for n={n}, k={k}:{:.4}", spec.b());

    let ps = build_phi_space(spec)?;
    println!("dim so({n}) = {}", so_dim(n));
    println!("dim h = {}  dim m = {} (3n-7 = {})", ps.h().dim(), ps.m().dim(), 3 * n - 7);
    println!("‖θ^k − id‖ = {:.2e}", ps.theta_order_residual());
    println!("φ[X,Y] − [φX,φY] = {:.2e}", ps.homomorphism_residual()?);
    println!("[h, m] ⊄ m by {:.2e}", ps.reductivity_residual()?);

    let reg = ps.check_regularity();
    println!("regularity: {reg:?}");
    Ok(())
}
