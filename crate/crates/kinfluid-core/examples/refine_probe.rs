use std::time::Instant;

use kinfluid_core::burnett::{
    build_burnett, solve_inverses, transport_coefficients, verify_gamma_bridge, verify_isotropy,
    verify_super_burnett,
};
use kinfluid_core::collision::{CollisionOperator, CollisionParams};
use kinfluid_core::gap::estimate_spectral_gap;
use kinfluid_core::grid::{build_velocity_grid, norm};
use kinfluid_core::oracle::transport_oracle;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(12);
    let cutoff: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(6.0);
    let p: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(3);
    let skip_gap = args.get(4).map(|s| s == "nogap").unwrap_or(false);

    println!("== n={n} R={cutoff} interp_order={p} ==");
    let grid = build_velocity_grid::<f64>(n, cutoff).unwrap();
    let params = CollisionParams {
        interp_order: p,
        ..CollisionParams::default()
    };
    let t0 = Instant::now();
    let op = CollisionOperator::assemble(&grid, params).unwrap();
    println!("assemble: {:.1?}", t0.elapsed());

    let t0 = Instant::now();
    op.prepare_solver().unwrap();
    println!("factorize: {:.1?}", t0.elapsed());

    if !skip_gap {
        let t0 = Instant::now();
        let gap = estimate_spectral_gap(&op).unwrap();
        println!("delta0 = {:.9}  ({:.1?})", gap.delta0, t0.elapsed());
    }

    let bt = build_burnett(&grid);
    for (label, entry) in [("a00", bt.a_entry(0, 0)), ("b0", bt.b_entry(0))] {
        let total = norm(&grid, entry);
        let (_, pr) = op.projector().project(&grid, entry);
        println!("invariant fraction {label}: {:e}", norm(&grid, &pr) / total);
    }

    let t0 = Instant::now();
    let bt = solve_inverses(&op, bt).unwrap();
    println!("12 inverse solves: {:.1?}", t0.elapsed());

    let tc = transport_coefficients(&op, &bt).unwrap();
    let reference = transport_oracle(6);
    println!(
        "mu* {:.9} (oracle {:.9}, rel gap {:.3e})",
        tc.mu_star,
        reference.mu_star,
        (tc.mu_star - reference.mu_star).abs() / reference.mu_star
    );
    println!(
        "kappa* {:.9} (oracle {:.9}, rel gap {:.3e})",
        tc.kappa_star,
        reference.kappa_star,
        (tc.kappa_star - reference.kappa_star).abs() / reference.kappa_star
    );

    let t0 = Instant::now();
    let iso = verify_isotropy(&op, &bt).unwrap();
    println!(
        "isotropy devs: aa {:.3e} bb {:.3e} asym {:.3e} cross {:.3e} (scalar {:.6e})  ({:.1?})",
        iso.aa_max_dev,
        iso.bb_max_dev,
        iso.asym_max_dev,
        iso.cross_max_dev,
        iso.cross_scalar,
        t0.elapsed()
    );

    let t0 = Instant::now();
    let bridge = verify_gamma_bridge(&op, &bt).unwrap();
    println!(
        "bridge max_dev {:.3e}  lhs0101 {:.6} rhs0101 {:.6}  ({:.1?})",
        bridge.max_dev,
        bridge.lhs_table[10],
        bridge.rhs_table[10],
        t0.elapsed()
    );

    let t0 = Instant::now();
    let sb = verify_super_burnett(&grid).unwrap();
    println!("super ratios {:?}  ({:.1?})", sb.max_ratios, t0.elapsed());
}
