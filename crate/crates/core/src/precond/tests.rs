use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::discretization::{
    assemble_mixed_mass, assemble_p1_mass, bubble_trial_mass, dof_layout, realize_bubbles, BubbleKind,
};
use crate::mesh::{make_structured, nvb_refine, uniform_refine, DirichletSpec, Geometry};

fn square_curve() -> SimplicialMesh {
    make_structured(Geometry::ClosedPolygon { sides: 4, radius: FRAC_1_SQRT_2 }, 1, DirichletSpec::None).unwrap()
}

fn mass_bs(mesh: &SimplicialMesh, comb: &MeshCombinatorics) -> Arc<dyn LinearOperator> {
    Arc::new(assemble_p1_mass(mesh, comb))
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn disc0_square_curve_by_hand() {
    let m = square_curve();
    let comb = MeshCombinatorics::new(&m);
    let f = build_disc0(&comb, mass_bs(&m, &comb), 0.5, 1.25).unwrap();
    for c in 0..4 {
        assert!((f.d[c] - 1.0).abs() < 1e-14);
        for v in m.cell(c) {
            assert_eq!(f.p.get(comb.free_index[*v].unwrap(), c), 0.5);
        }
        for c2 in 0..4 {
            let want = if c == c2 {
                0.5
            } else if comb.neighbors(c).contains(&c2) {
                -0.25
            } else {
                0.0
            };
            assert_eq!(f.q.get(c2, c), want);
        }
    }
    // closed manifold: every q column sums to zero
    assert!(f.q.col_sums().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn disc0_without_free_vertices() {
    let m = SimplicialMesh::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2], vec![
        vec![0, 1],
        vec![1, 2],
        vec![2, 0],
    ])
    .unwrap();
    let comb = MeshCombinatorics::new(&m);
    let f = build_disc0(&comb, Arc::new(CsrMatrix::zeros(0, 0)), 0.5, 1.0).unwrap();
    assert_eq!((f.p.nrows(), f.p.ncols()), (0, 1));
    assert_eq!(f.q.to_dense()[(0, 0)], 1.0);
    assert_eq!(f.d, vec![0.5]);
    let g = f.assemble_dense(10).unwrap();
    // G = |T|⁻² β |T|^{1/2}
    assert!((g[(0, 0)] - 0.5f64.powf(0.5) / 0.25).abs() < 1e-14);
}

#[test]
fn bubble_diagonal_exponent() {
    let m = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
    let comb = MeshCombinatorics::new(&m);
    let f = build_disc0(&comb, mass_bs(&m, &comb), 0.5, 1.25).unwrap();
    for c in 0..m.n_cells() {
        assert!((f.bb[c] - 1.25 * comb.volume[c].sqrt()).abs() < 1e-15);
    }
}

#[test]
fn q_column_sums() {
    let m = uniform_refine(&make_structured(Geometry::UnitSquare, 2, DirichletSpec::Boundary).unwrap());
    let comb = MeshCombinatorics::new(&m);
    let f = build_disc0(&comb, mass_bs(&m, &comb), 1.0, 1.0).unwrap();
    let sums = f.q.col_sums();
    for c in 0..m.n_cells() {
        let k = comb.free_vertices_of(c).count() as f64;
        assert!((sums[c] - (1.0 - k / 3.0)).abs() < 1e-14);
    }
}

#[test]
fn cont1_uniform_polygon_by_hand() {
    let m = make_structured(Geometry::closed_polygon(6), 2, DirichletSpec::None).unwrap();
    let comb = MeshCombinatorics::new(&m);
    let h = comb.volume[0];
    let f = build_cont1(&comb, mass_bs(&m, &comb), 0.5, 1.0).unwrap();
    for v in 0..m.n_vertices() {
        assert!((f.d[v] - h).abs() < 1e-14);
        assert!((f.q.get(v, v) - 1.0 / 6.0).abs() < 1e-15);
        for w in comb.vertex_neighbors(v) {
            if w != v {
                assert!((f.q.get(w, v) + 1.0 / 12.0).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn cont1_gamma_vertex_columns() {
    let m = make_structured(Geometry::interval(), 4, DirichletSpec::Boundary).unwrap();
    let comb = MeshCombinatorics::new(&m);
    let f = build_cont1(&comb, mass_bs(&m, &comb), 1.0, 1.0).unwrap();
    let q = f.q.to_dense();
    let p = f.p.to_dense();
    for v in 0..m.n_vertices() {
        if comb.free_index[v].is_none() {
            for w in 0..m.n_vertices() {
                assert_eq!(q[(w, v)], if w == v { 0.5 } else { 0.0 });
            }
            assert!(p.column(v).iter().all(|x| *x == 0.0));
        }
    }
}

fn all_variants() -> Vec<(SimplicialMesh, DofLayout, PrecondFactors)> {
    let mut out = Vec::new();
    let curve = uniform_refine(&make_structured(Geometry::closed_polygon(5), 1, DirichletSpec::None).unwrap());
    let square = uniform_refine(&make_structured(Geometry::UnitSquare, 2, DirichletSpec::Boundary).unwrap());
    let graded = nvb_refine(&square, &[0, 1, 2]);
    for m in [curve, square, graded] {
        let comb = MeshCombinatorics::new(&m);
        let bs = mass_bs(&m, &comb);
        let cases = [
            (SpaceKind::DiscPoly, 0, Variant::Disc0),
            (SpaceKind::ContLinear, 1, Variant::Cont1),
            (SpaceKind::DiscPoly, 2, Variant::DiscHighOpp),
            (SpaceKind::DiscPoly, 2, Variant::DiscHighSsc),
            (SpaceKind::ContPoly, 3, Variant::ContHighOpp),
            (SpaceKind::ContPoly, 2, Variant::ContHighSsc),
            (SpaceKind::DiscPoly, 1, Variant::Jacobi),
        ];
        for (kind, deg, variant) in cases {
            let l = dof_layout(&m, kind, deg).unwrap();
            let a = crate::discretization::assemble_mass(&m, &l).to_dense();
            let spec = PrecondSpec { variant, s: 0.5, beta: 1.25 };
            let f = build(&spec, &m, &comb, &l, &a, bs.clone()).unwrap();
            out.push((m.clone(), l, f));
        }
    }
    out
}

#[test]
fn apply_matches_dense_assembly() {
    for (k, (_, l, f)) in all_variants().into_iter().enumerate() {
        let g = f.assemble_dense(4096).unwrap();
        assert!(crate::linalg::max_asymmetry(&g) <= 1e-12 * crate::linalg::max_abs(&g), "{:?}", f.variant);
        let r = random_vec(l.n_dofs(), k as u64);
        let y = f.apply(&r).unwrap();
        let mut yd = vec![0.0; r.len()];
        crate::linalg::dense_matvec(&g, &r, &mut yd);
        let err: f64 = y.iter().zip(&yd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let nrm: f64 = yd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * nrm, "{:?}: {err:e}", f.variant);
        assert!(f.apply(&vec![0.0; r.len()]).unwrap().iter().all(|v| *v == 0.0));
        assert!(f.apply(&r[1..]).is_err());
    }
}

#[test]
fn apply_cost_is_linear() {
    let mut m = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
    for _ in 0..3 {
        let comb = MeshCombinatorics::new(&m);
        for (kind, deg, variant) in [
            (SpaceKind::DiscPoly, 0, Variant::Disc0),
            (SpaceKind::ContLinear, 1, Variant::Cont1),
            (SpaceKind::DiscPoly, 2, Variant::DiscHighOpp),
            (SpaceKind::ContPoly, 2, Variant::ContHighSsc),
        ] {
            let l = dof_layout(&m, kind, deg).unwrap();
            let a = DMatrix::identity(l.n_dofs(), l.n_dofs());
            let spec = PrecondSpec { variant, s: 0.5, beta: 1.0 };
            let f = build(&spec, &m, &comb, &l, &a, mass_bs(&m, &comb)).unwrap();
            let (_, st) = f.apply_with_stats(&vec![1.0; l.n_dofs()]).unwrap();
            assert_eq!(st.bs_applications, 1);
            assert!(st.total() <= 60 * l.n_dofs(), "{variant:?}: {} for n = {}", st.total(), l.n_dofs());
        }
        m = uniform_refine(&m);
    }
}

#[test]
fn sparsity_bounded_by_adjacency() {
    let m = nvb_refine(&make_structured(Geometry::CubeSurface, 2, DirichletSpec::None).unwrap(), &[0, 5, 9]);
    let comb = MeshCombinatorics::new(&m);
    let f = build_disc0(&comb, mass_bs(&m, &comb), 0.5, 1.0).unwrap();
    let maxval = *comb.valence.iter().max().unwrap();
    assert!(f.p.max_col_nnz() <= 3 * maxval);
    assert!(f.q.max_col_nnz() <= 3 * maxval);
}

#[test]
fn disc_ssc_is_opp_without_r() {
    let m = uniform_refine(&make_structured(Geometry::closed_polygon(4), 2, DirichletSpec::None).unwrap());
    let comb = MeshCombinatorics::new(&m);
    let l = dof_layout(&m, SpaceKind::DiscPoly, 2).unwrap();
    let mixed = assemble_mixed_mass(&m, &comb, &l).unwrap();
    let opp = build_high_opp(&comb, &l, &mixed, mass_bs(&m, &comb), 0.5, 1.25).unwrap();
    let ssc = build_high_ssc(&m, &comb, &l, &mixed, mass_bs(&m, &comb), 0.5, 1.25).unwrap();
    assert!(opp.r().unwrap().nnz() > 0);
    assert_eq!(opp.without_r().assemble_dense(1000).unwrap(), ssc.assemble_dense(1000).unwrap());
}

#[test]
fn ssc_higher_block_on_surfaces() {
    let m = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
    let comb = MeshCombinatorics::new(&m);
    let l = dof_layout(&m, SpaceKind::DiscPoly, 2).unwrap();
    let mixed = assemble_mixed_mass(&m, &comb, &l).unwrap();
    let f = build_high_ssc(&m, &comb, &l, &mixed, mass_bs(&m, &comb), 0.5, 1.25).unwrap();
    let g = f.assemble_dense(100).unwrap();
    for h in l.n_lowest()..l.n_dofs() {
        let t = comb.volume[l.support(h)[0]];
        assert!((g[(h, h)] - 1.25 * t.powf(-1.5)).abs() < 1e-13 * g[(h, h)]);
        for j in 0..l.n_dofs() {
            if j != h {
                assert_eq!(g[(h, j)], 0.0);
            }
        }
    }
}

#[test]
fn ssc_rejects_non_orthogonal_basis() {
    let m = make_structured(Geometry::closed_polygon(4), 2, DirichletSpec::None).unwrap();
    let comb = MeshCombinatorics::new(&m);
    let mono = crate::discretization::LocalPolyBasis::monomials(1, 2);
    let l = crate::discretization::disc_layout_with_basis(&m, mono).unwrap();
    let mixed = assemble_mixed_mass(&m, &comb, &l).unwrap();
    assert!(build_high_ssc(&m, &comb, &l, &mixed, mass_bs(&m, &comb), 0.5, 1.0).is_err());
    assert!(build_high_opp(&comb, &l, &mixed, mass_bs(&m, &comb), 0.5, 1.0).is_ok());
}

#[test]
fn r_zero_for_functions_orthogonal_to_hats() {
    // the linear Legendre function is odd on its panel, so it is orthogonal
    // to the sum of the two panel hats
    let m = make_structured(Geometry::closed_polygon(4), 1, DirichletSpec::None).unwrap();
    let comb = MeshCombinatorics::new(&m);
    let l = dof_layout(&m, SpaceKind::DiscPoly, 1).unwrap();
    let mixed = assemble_mixed_mass(&m, &comb, &l).unwrap();
    let f = build_high_opp(&comb, &l, &mixed, mass_bs(&m, &comb), 0.5, 1.0).unwrap();
    let r = f.r().unwrap().to_dense();
    // own-cell column: both panel vertices have valence 2, so the entry is
    // −|T|⁻¹ (1/2)(⟨φ_0, ξ_1⟩ + ⟨φ_1, ξ_1⟩) = −|T|⁻¹ (1/2)⟨1, ξ_1⟩ = 0
    for c in 0..4 {
        assert!(r[(c, c)].abs() < 1e-15);
    }
}

#[test]
fn r_matches_bubble_oracle() {
    let m = make_structured(Geometry::closed_polygon(4), 1, DirichletSpec::None).unwrap();
    let comb = MeshCombinatorics::new(&m);
    let l = dof_layout(&m, SpaceKind::DiscPoly, 1).unwrap();
    let mixed = assemble_mixed_mass(&m, &comb, &l).unwrap();
    let f = build_high_opp(&comb, &l, &mixed, mass_bs(&m, &comb), 0.5, 1.0).unwrap();
    let r = f.r().unwrap().to_dense();
    // ψ⁰_T = Σ p φ + Σ q θ_{T',0}; R = −⟨ψ⁰_T, ξ_h⟩ / ⟨θ_h, ξ_h⟩
    let bubbles = realize_bubbles(&m, &comb, &l, BubbleKind::ElementPoly).unwrap();
    let mtheta = bubble_trial_mass(&m, &l, &bubbles).to_dense();
    let p = f.p.to_dense();
    let q = f.q.to_dense();
    let n0 = l.n_lowest();
    let pair = mixed.to_dense().transpose() * &p + mtheta.rows(0, n0).transpose() * &q;
    for hi in n0..l.n_dofs() {
        for t in 0..n0 {
            let want = -pair[(hi, t)] / bubbles.normalization[hi];
            assert!((r[(hi - n0, t)] - want).abs() < 1e-13, "{hi},{t}");
            // reference-orthonormal Legendre basis: entries are ±√3/12 or zero
            let mag = 3f64.sqrt() / 12.0;
            assert!(r[(hi - n0, t)].abs() < 1e-14 || (r[(hi - n0, t)].abs() - mag).abs() < 1e-13);
        }
    }
}

#[test]
fn cont_ssc_s_column_without_free_support() {
    let m = make_structured(Geometry::UnitSquare, 1, DirichletSpec::Boundary).unwrap();
    let comb = MeshCombinatorics::new(&m);
    assert!(comb.free_vertices.is_empty());
    let l = dof_layout(&m, SpaceKind::ContPoly, 2).unwrap();
    let mixed = assemble_mixed_mass(&m, &comb, &l).unwrap();
    let f = build_high_ssc(&m, &comb, &l, &mixed, Arc::new(CsrMatrix::zeros(0, 0)), 1.0, 1.0).unwrap();
    assert_eq!(f.s().unwrap().nnz(), 0);
}

#[test]
fn trial_scaling_conjugates_g() {
    for (k, (_, l, f)) in all_variants().into_iter().enumerate() {
        let c: Vec<f64> = random_vec(l.n_dofs(), 100 + k as u64).iter().map(|v| 1.5 + v).collect();
        let g = f.assemble_dense(4096).unwrap();
        let gs = f.with_trial_scaling(&c).unwrap().assemble_dense(4096).unwrap();
        let n = l.n_dofs();
        let want = DMatrix::from_fn(n, n, |i, j| g[(i, j)] / (c[i] * c[j]));
        assert!((&gs - &want).abs().max() <= 1e-12 * want.abs().max(), "{:?}", f.variant);
    }
}

#[test]
fn jacobi_basics() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 5.0, 0.25]));
    let f = build_jacobi(&a).unwrap();
    let g = f.assemble_dense(10).unwrap();
    assert_eq!(&g * &a, DMatrix::identity(3, 3));
    let id = build_jacobi(&DMatrix::identity(4, 4)).unwrap().assemble_dense(10).unwrap();
    assert_eq!(id, DMatrix::identity(4, 4));
    assert!(build_jacobi(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0]))).is_err());
}

#[test]
fn dimension_and_argument_errors() {
    let m = square_curve();
    let comb = MeshCombinatorics::new(&m);
    assert!(build_disc0(&comb, Arc::new(CsrMatrix::identity(3)), 0.5, 1.0).is_err());
    assert!(build_disc0(&comb, mass_bs(&m, &comb), 0.5, 0.0).is_err());
    assert!(build_cont1(&comb, mass_bs(&m, &comb), 1.5, 1.0).is_err());
    let f = build_disc0(&comb, mass_bs(&m, &comb), 0.5, 1.0).unwrap();
    assert!(matches!(f.assemble_dense(2), Err(Error::SizeLimit { .. })));
    assert_eq!(f.export().len(), 4);
}
