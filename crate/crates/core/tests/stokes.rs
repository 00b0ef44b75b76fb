use std::collections::HashMap;
use std::sync::Arc;

use brinkman::analysis::{l2_norm, l2_norm_region};
use brinkman::assembly::{apply_dirichlet, assemble_stokes, LinearSystem};
use brinkman::io::presets::{Preset, CHANNEL};
use brinkman::mesh::{generate_channel_mesh, AxisRect, BoundaryFacet, BoundaryTag, Mesh, Point2, RegionTag};
use brinkman::penalty::{ObstacleSet, PenaltyField};
use brinkman::solver::{solve_stokes, sparse_lu_solve, Discretization, Scenario, SolverConfig};
use brinkman::spaces::{collect_dirichlet, BcScenario, InflowProfile, OutflowCondition, TaylorHoodSpace};
use brinkman::Execution;

/// Polynomial in the barycentric coordinates: exponent triple -> coefficient.
type Poly = HashMap<[u32; 3], f64>;

fn mono(c: f64, e: [u32; 3]) -> Poly {
    HashMap::from([(e, c)])
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(*k).or_insert(0.0) += v;
    }
    out
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
            *out.entry(k).or_insert(0.0) += va * vb;
        }
    }
    out
}

fn derivative(p: &Poly, k: usize) -> Poly {
    let mut out = Poly::new();
    for (e, v) in p {
        if e[k] > 0 {
            let mut d = *e;
            d[k] -= 1;
            *out.entry(d).or_insert(0.0) += v * e[k] as f64;
        }
    }
    out
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `int_T l0^a l1^b l2^c = 2|T| a! b! c! / (a + b + c + 2)!`
fn integrate(p: &Poly, area: f64) -> f64 {
    p.iter()
        .map(|(e, v)| v * 2.0 * area * factorial(e[0]) * factorial(e[1]) * factorial(e[2]) / factorial(e[0] + e[1] + e[2] + 2))
        .sum()
}

fn unit(k: usize) -> [u32; 3] {
    let mut e = [0; 3];
    e[k] = 1;
    e
}

/// Vertex functions `l_i (2 l_i - 1)` then edge functions `4 l_a l_b` for
/// edges (0,1), (1,2), (2,0).
fn p2_basis() -> Vec<Poly> {
    let mut basis = Vec::new();
    for i in 0..3 {
        let l = mono(1.0, unit(i));
        basis.push(mul(&l, &add(&mono(2.0, unit(i)), &mono(-1.0, [0, 0, 0]))));
    }
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        basis.push(mul(&mono(4.0, unit(a)), &mono(1.0, unit(b))));
    }
    basis
}

fn single_triangle(p: [Point2; 3]) -> Arc<Mesh> {
    let facets = vec![
        BoundaryFacet { edge: [0, 1], tag: BoundaryTag::Wall },
        BoundaryFacet { edge: [1, 2], tag: BoundaryTag::Outflow },
        BoundaryFacet { edge: [2, 0], tag: BoundaryTag::Inflow },
    ];
    Arc::new(Mesh::new(p.to_vec(), vec![[0, 1, 2]], facets, vec![RegionTag::Fluid]).unwrap())
}

#[test]
fn element_matrices_match_barycentric_integration() {
    let pts = [Point2::new(0.3, -0.2), Point2::new(1.7, 0.4), Point2::new(0.1, 1.3)];
    let space = TaylorHoodSpace::new(single_triangle(pts));
    let geo = space.geometry(0);
    let grad_l = geo.grad_lambda;
    let nodes = space.velocity_nodes(0);
    let pdofs = space.pressure_dofs(0);
    let basis = p2_basis();
    let nu = 0.7;

    let k0 = assemble_stokes(&space, nu, &PenaltyField::from_indicator(0.0, vec![true]), Execution::Sequential)
        .unwrap()
        .matrix;
    let k1 = assemble_stokes(&space, nu, &PenaltyField::from_indicator(1.0, vec![true]), Execution::Sequential)
        .unwrap()
        .matrix;

    let scale = k0.max_abs();
    for a in 0..6 {
        for b in 0..6 {
            let mass = integrate(&mul(&basis[a], &basis[b]), geo.area);
            // grad phi = sum_k d phi / d l_k grad l_k
            let mut stiff = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    let dot = grad_l[k][0] * grad_l[l][0] + grad_l[k][1] * grad_l[l][1];
                    stiff += dot * integrate(&mul(&derivative(&basis[a], k), &derivative(&basis[b], l)), geo.area);
                }
            }
            for c in 0..2 {
                let (i, j) = (2 * nodes[a] + c, 2 * nodes[b] + c);
                assert!((k1.get(i, j) - k0.get(i, j) - mass).abs() < 1e-14, "mass {a} {b}");
                assert!((k0.get(i, j) - nu * stiff).abs() < 1e-13 * scale, "stiffness {a} {b}");
                let cross = 2 * nodes[b] + 1 - c;
                assert_eq!(k1.get(i, cross) - k0.get(i, cross), 0.0);
            }
        }
    }
    // B = -int q div phi
    for (q, &pq) in pdofs.iter().enumerate() {
        for b in 0..6 {
            for c in 0..2 {
                let mut div = 0.0;
                for k in 0..3 {
                    div += grad_l[k][c] * integrate(&mul(&mono(1.0, unit(q)), &derivative(&basis[b], k)), geo.area);
                }
                let j = 2 * nodes[b] + c;
                assert!((k0.get(pq, j) + div).abs() < 1e-14, "divergence {q} {b} {c}");
                assert_eq!(k0.get(j, pq), k0.get(pq, j));
            }
        }
    }
}

/// Gaussian elimination with partial pivoting on a dense copy.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

#[test]
fn sparse_solve_matches_dense_oracle_on_two_by_two_grid() {
    let block = AxisRect::new(0.0, 1.0, 0.0, 1.0);
    let mesh = Arc::new(generate_channel_mesh(AxisRect::new(-1.0, 1.0, -1.0, 1.0), &[block], 1.0).unwrap());
    let space = TaylorHoodSpace::new(mesh.clone());
    let psi = PenaltyField::from_indicator(10.0, mesh.regions().iter().map(|r| r.is_obstacle()).collect());
    let full = assemble_stokes(&space, 1.0, &psi, Execution::Sequential).unwrap();
    let bc = collect_dirichlet(&space, BcScenario::Penalized, InflowProfile::new(3.0), OutflowCondition::DoNothing)
        .unwrap();
    let x = sparse_lu_solve(&apply_dirichlet(&full, &bc).unwrap()).unwrap();

    // independent elimination: keep free rows/columns, move known values right
    let k = full.matrix.to_dense();
    let n = k.len();
    let free: Vec<usize> = (0..n).filter(|&i| !bc.contains(i)).collect();
    let a: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| k[i][j]).collect()).collect();
    let b: Vec<f64> = free.iter().map(|&i| -bc.iter().map(|(j, g)| k[i][j] * g).sum::<f64>()).collect();
    let y = dense_solve(a, b);
    for (idx, &i) in free.iter().enumerate() {
        assert!((x[i] - y[idx]).abs() < 1e-10, "dof {i}: {} vs {}", x[i], y[idx]);
    }
    for (d, g) in bc.iter() {
        assert_eq!(x[d], g);
    }
}

#[test]
fn poiseuille_is_reproduced_exactly() {
    let mesh = Arc::new(generate_channel_mesh(CHANNEL, &[], 0.25).unwrap());
    for (nu, u) in [(1.0, 100.0), (0.5, 2.0)] {
        let cfg = SolverConfig { nu, peak_speed: u, ..Default::default() };
        let sol = solve_stokes(&mesh, &ObstacleSet::MeshRegions, &cfg, Scenario::Penalized).unwrap();
        let space = sol.space();
        let mut worst: f64 = 0.0;
        for node in 0..space.num_velocity_nodes() {
            let p = space.node_point(node);
            let exact = [u * (1.0 - p.y * p.y), 0.0];
            let got = sol.node_velocity(node);
            worst = worst.max((got[0] - exact[0]).abs()).max((got[1] - exact[1]).abs());
        }
        assert!(worst < 1e-8 * u, "max nodal error {worst}");
        for t in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.triangles()[t];
            let geo = space.geometry(t);
            let p = sol.pressure();
            let g = [0, 1].map(|d| p[a] * geo.grad_lambda[0][d] + p[b] * geo.grad_lambda[1][d] + p[c] * geo.grad_lambda[2][d]);
            assert!((g[0] + 2.0 * nu * u).abs() < 1e-6, "dp/dx = {}", g[0]);
            assert!(g[1].abs() < 1e-6);
        }
        // do-nothing outflow: p = 0 at x = 2
        for (v, p) in mesh.vertices().iter().zip(sol.pressure()) {
            if v.x == 2.0 {
                assert!(p.abs() < 1e-6);
            }
        }
    }
}

#[test]
fn reference_velocity_vanishes_on_obstacle_boundaries() {
    let problem = Preset::PaperChannel.build(0.2).unwrap();
    let disc = Discretization::new(&problem.mesh, &problem.obstacles, &SolverConfig::default(), Scenario::Reference)
        .unwrap();
    let sol = disc.solve_stokes(0.0).unwrap();
    let space = sol.space();
    let mesh = space.mesh();
    let table = mesh.edge_table();
    let mut seen = 0;
    for f in mesh.boundary_facets() {
        if let BoundaryTag::ObstacleBoundary(_) = f.tag {
            let mid = space.edge_node(table.find(f.edge[0], f.edge[1]).unwrap());
            for node in [f.edge[0], f.edge[1], mid] {
                assert_eq!(sol.node_velocity(node), [0.0, 0.0]);
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
    assert!(sol.velocity().iter().any(|v| v.abs() > 1.0));
}

#[test]
fn large_penalty_empties_the_obstacles() {
    let problem = Preset::PaperChannel.build(0.05).unwrap();
    let cfg = SolverConfig { penalty: 1e10, ..Default::default() };
    let sol = solve_stokes(&problem.mesh, &problem.obstacles, &cfg, Scenario::Penalized).unwrap();
    let inside = l2_norm_region(&sol, &problem.mesh.obstacle_triangles());
    let total = l2_norm(&sol);
    assert!(inside < 1e-4 * total, "{inside} vs {total}");
}

#[test]
fn zero_penalty_ignores_obstacles() {
    let mesh = Arc::new(generate_channel_mesh(CHANNEL, &[AxisRect::new(-1.0, -0.5, 0.5, 1.0)], 0.25).unwrap());
    let plain = Arc::new(mesh.with_regions(vec![RegionTag::Fluid; mesh.num_triangles()]).unwrap());
    let cfg = SolverConfig::default();
    let a = solve_stokes(&mesh, &ObstacleSet::MeshRegions, &cfg, Scenario::Penalized).unwrap();
    let b = solve_stokes(&plain, &ObstacleSet::MeshRegions, &cfg, Scenario::Penalized).unwrap();
    assert_eq!(a.velocity(), b.velocity());
}

#[test]
fn assembled_system_shape_and_penalty_size_check() {
    let mesh = Arc::new(generate_channel_mesh(CHANNEL, &[], 1.0).unwrap());
    let nt = mesh.num_triangles();
    let space = TaylorHoodSpace::new(mesh);
    let sys: LinearSystem =
        assemble_stokes(&space, 1.0, &PenaltyField::from_indicator(0.0, vec![false; nt]), Execution::Parallel).unwrap();
    assert_eq!(sys.matrix.nrows(), space.num_dofs());
    assert!(sys.rhs.iter().all(|&v| v == 0.0));
    assert!(!sys.is_eliminated());
    let short = PenaltyField::from_indicator(1.0, vec![false; nt - 1]);
    assert!(assemble_stokes(&space, 1.0, &short, Execution::Parallel).is_err());
}
