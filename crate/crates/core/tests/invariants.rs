use std::sync::Arc;

use brinkman::analysis::{energy_balance, flux, max_divergence_moment};
use brinkman::assembly::{assemble_convection, assemble_stokes};
use brinkman::io::presets::CHANNEL;
use brinkman::mesh::{extract_fluid_submesh, generate_channel_mesh, AxisRect, Mesh};
use brinkman::penalty::{build_penalty_field, ObstacleSet};
use brinkman::solver::{Discretization, Scenario, SolverConfig};
use brinkman::spaces::{collect_dirichlet, BcScenario, InflowProfile, OutflowCondition, TaylorHoodSpace};
use brinkman::{BoundaryTag, Execution};
use proptest::prelude::*;

/// Channel mesh with one grid-aligned rectangle obstacle that leaves a gap
/// to at least one wall.
fn channel_with_block() -> impl Strategy<Value = (Arc<Mesh>, AxisRect)> {
    (prop_oneof![Just(0.25), Just(0.5)], 1usize..15, 1usize..15, 0usize..8, 1usize..9).prop_filter_map(
        "non-empty block",
        |(h, a, b, c, d)| {
            let n = (4.0 / h) as usize;
            let m = (2.0 / h) as usize;
            let (i0, i1) = (a.min(b) % n, a.max(b) % n);
            let (j0, j1) = (c.min(d) % m, c.max(d).min(m));
            if i0 == 0 || i1 <= i0 || j1 <= j0 || (j0 == 0 && j1 == m) {
                return None;
            }
            let block = AxisRect::new(-2.0 + i0 as f64 * h, -2.0 + i1 as f64 * h, -1.0 + j0 as f64 * h, -1.0 + j1 as f64 * h);
            Some((Arc::new(generate_channel_mesh(CHANNEL, &[block], h).ok()?), block))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn generated_meshes_satisfy_euler((mesh, block) in channel_with_block()) {
        prop_assert!(mesh.check_euler().is_ok());
        let (fluid, map) = extract_fluid_submesh(&mesh);
        prop_assert!(fluid.check_euler().is_ok());
        let removed: f64 = mesh.obstacle_triangles().iter().map(|&t| mesh.triangle_area(t)).sum();
        prop_assert!((removed - block.area()).abs() < 1e-12);
        let kept: f64 = (0..fluid.num_triangles()).map(|t| fluid.triangle_area(t)).sum();
        prop_assert!((kept + removed - 8.0).abs() < 1e-12);
        for (t, &p) in map.triangle_to_parent.iter().enumerate() {
            prop_assert_eq!(fluid.triangle_points(t), mesh.triangle_points(p));
        }
    }

    #[test]
    fn assembly_is_symmetric_and_policy_independent((mesh, _) in channel_with_block(), exp in 0.0f64..10.0, nu in 0.1f64..10.0) {
        let space = TaylorHoodSpace::new(mesh.clone());
        let psi = build_penalty_field(&mesh, &ObstacleSet::MeshRegions, 10f64.powf(exp)).unwrap();
        let seq = assemble_stokes(&space, nu, &psi, Execution::Sequential).unwrap();
        let par = assemble_stokes(&space, nu, &psi, Execution::Parallel).unwrap();
        prop_assert_eq!(&seq.matrix, &par.matrix);
        prop_assert!(seq.matrix.asymmetry() <= 1e-12 * seq.matrix.max_abs());

        let u = space.interpolate(|p| [p.y.sin() + 2.0, p.x * p.y]);
        let (rs, js) = assemble_convection(&space, &u, Execution::Sequential).unwrap();
        let (rp, jp) = assemble_convection(&space, &u, Execution::Parallel).unwrap();
        prop_assert_eq!(rs, rp);
        prop_assert_eq!(js, jp);
    }

    #[test]
    fn dirichlet_collection_is_deterministic((mesh, _) in channel_with_block(), u in 0.1f64..500.0) {
        let space = TaylorHoodSpace::new(mesh);
        let a = collect_dirichlet(&space, BcScenario::Penalized, InflowProfile::new(u), OutflowCondition::DoNothing).unwrap();
        let b = collect_dirichlet(&space, BcScenario::Penalized, InflowProfile::new(u), OutflowCondition::DoNothing).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn penalty_scales_linearly((mesh, _) in channel_with_block(), r in 0.0f64..1e9) {
        let a = build_penalty_field(&mesh, &ObstacleSet::MeshRegions, r).unwrap();
        let b = build_penalty_field(&mesh, &ObstacleSet::MeshRegions, 2.0 * r).unwrap();
        for t in 0..a.len() {
            prop_assert_eq!(b.value(t), 2.0 * a.value(t));
            prop_assert_eq!(a.value(t) != 0.0, r != 0.0 && mesh.regions()[t].is_obstacle());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn penalized_stokes_conserves_mass_and_energy(
        (mesh, _) in channel_with_block(),
        exp in 0.0f64..10.0,
        nu in 0.1f64..5.0,
        u in 1.0f64..200.0,
        pure_dirichlet in any::<bool>(),
    ) {
        let outflow = if pure_dirichlet { OutflowCondition::Poiseuille } else { OutflowCondition::DoNothing };
        let cfg = SolverConfig { nu, peak_speed: u, outflow, ..Default::default() };
        let disc = Discretization::new(&mesh, &ObstacleSet::MeshRegions, &cfg, Scenario::Penalized).unwrap();
        let r = 10f64.powf(exp);
        let sol = disc.solve_stokes(r).unwrap();
        prop_assert!(max_divergence_moment(&sol) < 1e-9);
        let inflow = flux(&sol, BoundaryTag::Inflow);
        let outflow = flux(&sol, BoundaryTag::Outflow);
        prop_assert!((inflow + outflow).abs() < 1e-8 * inflow.abs());
        prop_assert!(flux(&sol, BoundaryTag::Wall).abs() < 1e-12 * inflow.abs());
        let energy = energy_balance(&disc, r, &sol).unwrap();
        prop_assert!(energy.relative_defect() < 1e-8, "{:?}", energy);
    }
}
