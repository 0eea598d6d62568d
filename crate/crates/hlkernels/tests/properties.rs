//! Property tests for the algebraic invariants of forms, kernels, geometry,
//! the type calculus, the Z-operator rewriter and the quadrature norms.

use approx::assert_relative_eq;
use hlkernels::domain::DomainModel;
use hlkernels::forms::{DoubleForm, Metric, MultiIndex, Slot, Var};
use hlkernels::kernels;
use hlkernels::quad::{weighted_lp_norm, FormField, Grid};
use hlkernels::typecalc::AdmissibleDescriptor;
use hlkernels::verify::slope_fit;
use hlkernels::zalg::{self, Arg, ArgKind, Op, PairKernel, Term, ZExpr};
use hlkernels::Complex64 as C;
use proptest::prelude::*;
use std::sync::Arc;

const SLOTS: [Slot; 4] = [Slot::HoloZeta, Slot::AntiZeta, Slot::HoloZ, Slot::AntiZ];

fn complex() -> impl Strategy<Value = C> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C::new(re, im))
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(complex(), n)
}

fn one_form(n: usize) -> impl Strategy<Value = DoubleForm> {
    (0..4usize, coeffs(n)).prop_map(move |(s, c)| DoubleForm::one_form(n, SLOTS[s], &c))
}

/// Sum of wedges of `p` holomorphic and `q` antiholomorphic `zeta` one-forms.
fn zeta_form(n: usize, p: usize, q: usize) -> impl Strategy<Value = DoubleForm> {
    let product = prop::collection::vec(coeffs(n), p + q).prop_map(move |cs| {
        cs.iter().enumerate().fold(DoubleForm::scalar(n, C::new(1.0, 0.0)), |acc, (i, c)| {
            let slot = if i < p { Slot::HoloZeta } else { Slot::AntiZeta };
            acc.wedge(&DoubleForm::one_form(n, slot, c)).unwrap()
        })
    });
    prop::collection::vec(product, 1..4)
        .prop_map(move |ts| ts.iter().fold(DoubleForm::zero(n), |acc, t| acc.add(t).unwrap()))
}

/// A point of the ball model inside the collar `|r| < 0.2`.
fn ball_point(n: usize) -> impl Strategy<Value = Vec<C>> {
    (prop::collection::vec(complex(), n), 0.9..1.1f64).prop_filter_map("nonzero direction", |(v, rad)| {
        let len = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        (len > 1e-3).then(|| v.iter().map(|c| c * (rad / len)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_forms_anticommute(a in one_form(3), b in one_form(3)) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn wedge_is_associative(a in one_form(3), b in one_form(3), c in one_form(3), s in complex()) {
        let a = a.add(&DoubleForm::scalar(3, s)).unwrap();
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert!(left.dist(&right) < 1e-13);
    }

    #[test]
    fn conjugation_is_an_involution(a in one_form(3), b in one_form(3)) {
        let f = a.wedge(&b).unwrap();
        prop_assert_eq!(f.conj().conj(), f.clone());
        prop_assert!(f.conj().dist(&b.conj().wedge(&a.conj()).unwrap().scale_re(-1.0)) < 1e-14);
    }

    #[test]
    fn star_star_sign(((p, q), f) in (0..=2usize, 0..=2usize).prop_flat_map(|(p, q)| (Just((p, q)), zeta_form(2, p, q)))) {
        let g = Metric::identity(2);
        let ss = f.hodge_star(&g, Var::Zeta).unwrap().hodge_star(&g, Var::Zeta).unwrap();
        let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(ss.dist(&f.scale_re(sign)) < 1e-12 * (1.0 + f.norm()));
    }

    #[test]
    fn multi_index_mask_roundtrip(mask in 0u32..64) {
        let idx: Vec<usize> = (0..6).filter(|j| mask >> j & 1 == 1).map(|j| j + 1).collect();
        let m = MultiIndex::new(idx.clone(), 6).unwrap();
        prop_assert_eq!(m.indices(), idx.as_slice());
        prop_assert_eq!(m.len(), mask.count_ones() as usize);
    }

    #[test]
    fn adjoint_is_an_involution(zeta in ball_point(2), z in ball_point(2)) {
        let dom = Arc::new(DomainModel::ball(2));
        let k = kernels::gamma0q(&dom, 1);
        let kss = k.adjoint().adjoint();
        if let (Ok(a), Ok(b)) = (k.eval(&zeta, &z), kss.eval(&zeta, &z)) {
            prop_assert!(a.dist(&b) <= 1e-12 * a.norm());
        }
        prop_assert_eq!(kss.id.name.as_str(), k.id.name.as_str());
    }

    #[test]
    fn slope_fit_recovers_power_laws(c in 1e-3..1e3f64, k in -8.0..8.0f64) {
        let ts = hlkernels::verify::t_grid(3, 10);
        let vals: Vec<f64> = ts.iter().map(|t| c * t.powf(k)).collect();
        let fit = slope_fit(&ts, &vals).unwrap();
        assert_relative_eq!(fit.slope, k, epsilon = 1e-9);
        prop_assert!(fit.residual < 1e-9);
    }

    #[test]
    fn descriptor_display_parse_roundtrip(
        nm in (0..3i64, 0..3i64), j in 0..4i64, t0 in 0..6i64,
        ts in (-3..=0i64, -3..=0i64, -3..=0i64, -3..=0i64),
        lm in (0..3i64, 0..3i64), ig in (0..4i64, 0..4i64),
    ) {
        let d = AdmissibleDescriptor {
            big_n: nm.0, big_m: nm.1, j, t0,
            t1: ts.0, t2: ts.1, t3: ts.2, t4: ts.3,
            l: lm.0, m: lm.1, inv_gamma: ig.0, inv_gamma_star: ig.1,
        };
        let back: AdmissibleDescriptor = d.to_string().parse().unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn simplify_is_idempotent_and_order_independent(
        chains in prop::collection::vec((prop::collection::vec(op(), 0..4), 0..9usize), 1..5),
        seed in any::<u64>(),
    ) {
        let e = ZExpr::new(chains.into_iter().map(|(ops, k)| Term::new(ops, Arg::new("f", ARGS[k]))).collect());
        let s = zalg::simplify(&e);
        prop_assert_eq!(zalg::simplify(&s), s.clone());
        prop_assert_eq!(zalg::simplify_randomized(&e, seed), s);
    }

    #[test]
    fn frame_is_orthonormal_with_normal_last(p in ball_point(3)) {
        let dom = DomainModel::ball(3);
        let fr = dom.frame(&p).unwrap();
        let g = dom.levi(&p).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let ip = g.covector_inner(&fr.row(a), &fr.row(b));
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((ip - C::new(want, 0.0)).norm() < 1e-12);
            }
        }
        let grad = dom.grad(&p);
        for (j, gj) in grad.iter().enumerate() {
            prop_assert!((fr.a[(2, j)] * fr.gamma - gj).norm() < 1e-12);
        }
    }

    #[test]
    fn geometric_functions_are_consistent(zeta in ball_point(3), z in ball_point(3)) {
        let dom = DomainModel::ball(3);
        let r2 = dom.rho2(&zeta, &z).unwrap();
        let d2: f64 = zeta.iter().zip(&z).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert_relative_eq!(r2, 2.0 * d2, max_relative = 1e-12, epsilon = 1e-15);
        let phi_star = dom.phi_star(&zeta, &z).unwrap();
        prop_assert!((phi_star - dom.phi(&z, &zeta).unwrap().conj()).norm() == 0.0);
        prop_assert!((dom.phi(&zeta, &zeta).unwrap() + dom.r(&zeta)).norm() < 1e-14);
    }
}

const ARGS: [ArgKind; 9] = [
    ArgKind::F,
    ArgKind::BoxF,
    ArgKind::DbarF,
    ArgKind::DbarStarF,
    ArgKind::NF,
    ArgKind::BoxNF,
    ArgKind::DbarNF,
    ArgKind::DbarStarNF,
    ArgKind::HF,
];

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (1..4u32).prop_map(Op::Gamma),
        (0..3u32).prop_map(Op::Z),
        prop_oneof![Just(PairKernel::N), Just(PairKernel::T), Just(PairKernel::TStar)].prop_map(Op::Pair),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lp_norm_is_homogeneous(s in complex(), p in 1.0..4.0f64, a in 0.0..2.0f64, seed in 0..1000u64) {
        let dom = DomainModel::ball(2);
        let grid = Grid::new(&dom, 6, Some(0.1)).unwrap();
        let field = hlkernels::quad::RandomField::new(2, 1, vec![C::new(0.9, 0.0), C::new(0.0, 0.0)], 0.5, seed);
        let f = FormField::from_fn(&grid, |p| field.eval(p)).unwrap();
        let sf = FormField::from_fn(&grid, |p| field.eval(p).scale(s)).unwrap();
        let zero = FormField::from_fn(&grid, |_| DoubleForm::zero(2)).unwrap();
        let nf = weighted_lp_norm(&grid, &dom, &f, a, p).unwrap();
        let nsf = weighted_lp_norm(&grid, &dom, &sf, a, p).unwrap();
        assert_relative_eq!(nsf, s.norm() * nf, max_relative = 1e-10, epsilon = 1e-300);
        prop_assert_eq!(weighted_lp_norm(&grid, &dom, &zero, a, p).unwrap(), 0.0);
    }
}
