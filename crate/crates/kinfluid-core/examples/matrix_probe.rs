//! Diagnostic dump of the symmetrized similarity matrix at a given
//! resolution: entry magnitudes by location, Gershgorin data, and the most
//! negative eigenpair by shifted power iteration.

use kinfluid_core::collision::{CollisionOperator, CollisionParams};
use kinfluid_core::grid::build_velocity_grid;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(12);
    let cutoff: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(6.0);
    let order: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(3);

    let grid = build_velocity_grid::<f64>(n, cutoff).unwrap();
    let params = CollisionParams {
        interp_order: order,
        ..CollisionParams::default()
    };
    let op = CollisionOperator::assemble(&grid, params).unwrap();
    let nn = grid.len();

    let ksym = op.k_matrix();
    let kraw = op.k_matrix_raw();
    let sqrt_w: Vec<f64> = grid.w.iter().map(|w| w.sqrt()).collect();

    let mut h = vec![0.0f64; nn * nn];
    for i in 0..nn {
        for j in 0..nn {
            h[i * nn + j] = if i == j {
                op.nu[i] - ksym[i * nn + i]
            } else {
                -(sqrt_w[i] * ksym[i * nn + j]) / sqrt_w[j]
            };
        }
    }

    let mut max_raw = (0.0f64, 0usize, 0usize);
    let mut max_sym = (0.0f64, 0usize, 0usize);
    for i in 0..nn {
        for j in 0..nn {
            if i == j {
                continue;
            }
            let a = kraw[i * nn + j].abs();
            if a > max_raw.0 {
                max_raw = (a, i, j);
            }
            let b = ksym[i * nn + j].abs();
            if b > max_sym.0 {
                max_sym = (b, i, j);
            }
        }
    }
    let loc = |i: usize| {
        let v = grid.node(i);
        format!(
            "node {i} v=({:.2},{:.2},{:.2}) vsq={:.1}",
            v[0], v[1], v[2], grid.vsq[i]
        )
    };
    println!("max |k_raw| offdiag = {:.3e} at [{} ; {}]", max_raw.0, loc(max_raw.1), loc(max_raw.2));
    println!("max |k_sym| offdiag = {:.3e} at [{} ; {}]", max_sym.0, loc(max_sym.1), loc(max_sym.2));

    let mut dmin = (f64::INFINITY, 0usize);
    let mut dmax = (f64::NEG_INFINITY, 0usize);
    let mut gmin = (f64::INFINITY, 0usize);
    for i in 0..nn {
        let d = h[i * nn + i];
        if d < dmin.0 {
            dmin = (d, i);
        }
        if d > dmax.0 {
            dmax = (d, i);
        }
        let mut off = 0.0;
        for j in 0..nn {
            if j != i {
                off += h[i * nn + j].abs();
            }
        }
        let g = d - off;
        if g < gmin.0 {
            gmin = (g, i);
        }
    }
    println!("H diag min = {:.4e} at {}", dmin.0, loc(dmin.1));
    println!("H diag max = {:.4e} at {}", dmax.0, loc(dmax.1));
    println!("H gershgorin min = {:.4e} at {}", gmin.0, loc(gmin.1));

    // Shifted power iteration for the extreme lower eigenpair of H.
    let shift = dmax.0 * 2.0;
    let mut z: Vec<f64> = (0..nn).map(|i| ((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5).collect();
    let mut lam = 0.0;
    for it in 0..600 {
        let nrm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in z.iter_mut() {
            *x /= nrm;
        }
        let mut y = vec![0.0f64; nn];
        for i in 0..nn {
            let row = &h[i * nn..(i + 1) * nn];
            let mut s = 0.0;
            for (j, &r) in row.iter().enumerate() {
                s += r * z[j];
            }
            y[i] = shift * z[i] - s;
        }
        lam = z.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        z = y;
        if it % 200 == 199 {
            println!("  iter {}: lambda_min(H) ~ {:.6e}", it + 1, shift - lam);
        }
    }
    let nrm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in z.iter_mut() {
        *x /= nrm;
    }
    println!("lambda_min(H) = {:.6e}", shift - lam);
    let mut idx: Vec<usize> = (0..nn).collect();
    idx.sort_by(|&a, &b| z[b].abs().partial_cmp(&z[a].abs()).unwrap());
    println!("largest eigenvector components:");
    for &i in idx.iter().take(8) {
        println!("  z={:+.4} at {}", z[i], loc(i));
    }

    // Rayleigh quotients of H on the invariant directions.
    for (m, e) in op.invariants_basis().iter().enumerate() {
        let b: Vec<f64> = e.values.iter().zip(&sqrt_w).map(|(v, s)| v * s).collect();
        let bn = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut hb = vec![0.0f64; nn];
        for i in 0..nn {
            let row = &h[i * nn..(i + 1) * nn];
            hb[i] = row.iter().zip(&b).map(|(r, x)| r * x).sum::<f64>();
        }
        let quad = b.iter().zip(&hb).map(|(a, c)| a * c).sum::<f64>();
        let hbn = hb.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!("invariant {m}: |b|={:.3e} <b,Hb>={:+.3e} |Hb|={:.3e}", bn, quad, hbn);
    }
}
