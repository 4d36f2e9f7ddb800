//! The splitting m = m1 ⊕ m2 ⊕ m3, the invariant metrics g(s,t), the tensor U
//! (closed form against the linear solve) and the Nomizu function.
//!
//! Usage: `cargo run --example invariant_metric -- [s] [t]` (defaults 2 and 0.5).

use flagf::metricgeom::{
    build_split, check_naturally_reductive, nomizu, u_tensor_closed, u_tensor_solved,
    BilinearMap, Block, MetricParams,
};
use flagf::phispace::{build_automorphism, build_phi_space};
use flagf::LieElement;

fn main() -> flagf::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let s = args.next().and_then(|r| r.ok()).unwrap_or(2.0);
    let t = args.next().and_then(|r| r.ok()).unwrap_or(0.5);
    let n = 6;

    let ps = build_phi_space(build_automorphism(n, 1, 4)?)?;
    let split = build_split(&ps)?;
    println!("block dims {:?}", split.dims());
    println!("[m_i, m_j]_m relations violated by {:.1e}", split.bracket_relation_residual()?);
    println!("blocks mutually orthogonal up to {:.1e}", split.orthogonality_residual()?);

    let params = MetricParams::with_default_kappa(n, s, t)?;
    for b in Block::ALL {
        println!("weight on {b:?}: {}", params.weight(b));
    }

    let closed = BilinearMap::u_closed(&split, &params)?;
    let solved = BilinearMap::u_solved(&split, &params)?;
    println!("U closed vs solved, all basis pairs: {:.1e}", closed.max_diff(&solved));

    let x = &LieElement::elementary(n, 0, 1) + &LieElement::elementary(n, 1, 3);
    let y = &LieElement::elementary(n, 0, 4) + &LieElement::elementary(n, 2, 5).scale(2.0);
    let uc = u_tensor_closed(&split, &params, &x, &y)?;
    let us = u_tensor_solved(&split, &params, &x, &y)?;
    println!("U(X,Y) ={:.4}", uc.matrix());
    println!("closed − solved: {:.1e}", (&uc - &us).amax());
    let alpha = nomizu(&split, &params, &x, &y, flagf::UMethod::Closed)?;
    println!("α(X,Y) ={:.4}", alpha.matrix());

    for (s, t) in [(1.0, 1.0), (s, t)] {
        let p = MetricParams::with_default_kappa(n, s, t)?;
        let nr = check_naturally_reductive(&split, &p)?;
        println!("naturally reductive at ({s}, {t}): {} (residual {:.1e})", nr.holds, nr.residual);
    }
    Ok(())
}
