//! Lists every canonical f-structure and almost product structure of a
//! Φ-space as a polynomial in θ, with its algebraic residuals.
//!
//! Usage: `cargo run --example canonical_structures -- [k]` (default 6, n = 5).

use flagf::canonical::{
    count_up_to_sign, generate_f_structures, generate_product_structures, verify_structure,
};
use flagf::phispace::{build_automorphism, build_phi_space};

fn poly(coeffs: &[f64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > 1e-12)
        .map(|(m, c)| match m {
            0 => format!("{c:+.4}"),
            1 => format!("{c:+.4}θ"),
            _ => format!("{c:+.4}θ^{m}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" ")
    }
}

fn main() -> flagf::Result<()> {
    let k = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    let ps = build_phi_space(build_automorphism(5, 1, k)?)?;
    let fs = generate_f_structures(&ps)?;
    let prods = generate_product_structures(&ps)?;
    let all: Vec<_> = fs.iter().chain(&prods).cloned().collect();

    println!("k = {k}: {} f-structures up to sign", count_up_to_sign(&fs));
    for f in &fs {
        let c = verify_structure(f, &ps, &all)?;
        println!(
            "  {:>10} {:?} sig {:?}  {}   ‖f³+f‖ {:.1e}",
            f.id(),
            f.kind(),
            f.signature(),
            poly(f.theta_polynomial()),
            c.identity_residual
        );
    }
    println!("{} almost product structures up to sign", count_up_to_sign(&prods));
    for p in &prods {
        let c = verify_structure(p, &ps, &all)?;
        println!(
            "  {:>10} sig {:?}  {}   ‖P²−id‖ {:.1e}  commutators {:.1e}",
            p.id(),
            p.signature(),
            poly(p.theta_polynomial()),
            c.identity_residual,
            c.commutator_residual
        );
    }
    Ok(())
}
