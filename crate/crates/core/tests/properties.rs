use nalgebra::DVector;
use proptest::prelude::*;

use zener_beam::beam_fem::{coercivity_constants, BeamMesh, BeamSystem};
use zener_beam::coefficients::{
    BeamMaterial, CoefficientFamily, Constant, FamilyRules, FnField, SpaceField, SpaceTimeField,
};
use zener_beam::energy::constants;
use zener_beam::fractional_kernel::{riemann_liouville, FractionalKernel, GammaRule, MollifierSpec};
use zener_beam::harness::{RunConfig, Scenario};
use zener_beam::quadrature::tanh_sinh;
use zener_beam::time_integration::{
    solve_direct, solve_picard, BeamProblem, HorizonPlan, NewmarkParams, PicardOptions, Trajectory,
};

const N_STEPS: usize = 64;
const DT: f64 = 1.0 / 64.0;

fn samples(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, len)
}

fn rule() -> impl Strategy<Value = GammaRule> {
    prop_oneof![Just(GammaRule::log()), (0.25..2.0f64).prop_map(GammaRule::power)]
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn system() -> BeamSystem {
    BeamSystem::assemble(&BeamMesh::new(8).unwrap(), &Constant(1.0), None).unwrap()
}

/// Bubble initial data `s·16x²(1−x)²` on the mesh.
fn bubble(sys: &BeamSystem, s: f64) -> DVector<f64> {
    sys.mesh().interpolate(
        |x| s * 16.0 * x * x * (1.0 - x) * (1.0 - x) + 0.0,
        |x| s * 32.0 * x * (1.0 - x) * (1.0 - 2.0 * x) + 0.0,
    )
}

/// Pulse load `a·sin(πx)·cos(ωt)`, zero after `cut`.
fn pulse(a: f64, omega: f64, cut: f64) -> FnField<impl Fn(f64, f64) -> f64 + Send + Sync> {
    FnField::new(
        move |x: f64, t: f64| {
            if t > cut {
                0.0
            } else {
                a * (std::f64::consts::PI * x).sin() * (omega * t).cos()
            }
        },
        a.abs(),
    )
}

fn solve(
    sys: &BeamSystem,
    kernel: Option<&FractionalKernel>,
    load: &dyn SpaceTimeField,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
) -> Trajectory {
    solve_direct(BeamProblem {
        system: sys,
        axial: &Constant(0.5),
        load,
        kernel,
        u0,
        v0,
        dt: DT,
        n_steps: N_STEPS,
        newmark: NewmarkParams::default(),
    })
    .unwrap()
}

fn flat(t: &Trajectory) -> Vec<f64> {
    t.u.iter()
        .chain(&t.v)
        .chain(&t.a)
        .flat_map(|x| x.iter().copied())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_convolution_is_causal(
        alpha in 0.1..1.0f64,
        theta in 0.05..1.0f64,
        u in samples(65),
        tail in samples(65),
        cut in 0usize..64,
    ) {
        let k = FractionalKernel::build(alpha, theta, 1.0, DT).unwrap();
        let mut w = u.clone();
        w[cut + 1..].copy_from_slice(&tail[cut + 1..]);
        let a = k.convolve_scalar(&u).unwrap();
        let b = k.convolve_scalar(&w).unwrap();
        prop_assert_eq!(&a[..=cut], &b[..=cut]);
    }

    #[test]
    fn kernel_convolution_is_linear(
        alpha in 0.1..1.0f64,
        theta in 0.05..1.0f64,
        u in samples(65),
        w in samples(65),
        c in -4.0..4.0f64,
        k2 in -8i32..8,
    ) {
        let k = FractionalKernel::build(alpha, theta, 1.0, DT).unwrap();
        let lu = k.convolve_scalar(&u).unwrap();
        let lw = k.convolve_scalar(&w).unwrap();
        let sum: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + c * b).collect();
        let lsum = k.convolve_scalar(&sum).unwrap();
        let scale = max_abs(&lu).max(max_abs(&lw) * c.abs()).max(1.0);
        for i in 0..lu.len() {
            prop_assert!((lsum[i] - lu[i] - c * lw[i]).abs() <= 1e-12 * scale);
        }
        // power-of-two scaling is exact
        let s = 2f64.powi(k2);
        let scaled: Vec<f64> = u.iter().map(|x| s * x).collect();
        let ls = k.convolve_scalar(&scaled).unwrap();
        prop_assert!(ls.iter().zip(&lu).all(|(a, b)| a.to_bits() == (s * b).to_bits()));
    }

    #[test]
    fn theta_one_is_the_identity(alpha in 0.05..1.0f64, u in samples(33)) {
        let k = FractionalKernel::build(alpha, 1.0, 1.0, 1.0 / 32.0).unwrap();
        prop_assert!(k.values().iter().all(|v| *v == 0.0));
        prop_assert_eq!(k.convolve_scalar(&u).unwrap(), u);
    }

    #[test]
    fn riemann_liouville_is_linear(alpha in 0.05..1.0f64, u in samples(65), w in samples(65), c in -4.0..4.0f64) {
        let du = riemann_liouville(alpha, &u, DT).unwrap();
        let dw = riemann_liouville(alpha, &w, DT).unwrap();
        let sum: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + c * b).collect();
        let ds = riemann_liouville(alpha, &sum, DT).unwrap();
        let scale = (max_abs(&u) + c.abs() * max_abs(&w)).max(1.0) * DT.powf(-alpha) * u.len() as f64;
        for i in 0..du.len() {
            if du[i].is_finite() && dw[i].is_finite() {
                prop_assert!((ds[i] - du[i] - c * dw[i]).abs() <= 1e-14 * scale);
            }
        }
    }

    #[test]
    fn mollifiers_have_unit_mass(rule in rule(), log_eps in -12.0..0.0f64, causal in any::<bool>()) {
        let spec = if causal { MollifierSpec::causal(rule) } else { MollifierSpec::new(rule) };
        let rho = spec.scaled(2f64.powf(log_eps)).unwrap();
        let (a, b) = rho.support();
        prop_assert!(a < b);
        let mass = tanh_sinh(|t| rho.eval(t), a, b, 1e-14);
        prop_assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn stiffness_bounds_are_uniform_in_eps(
        ei1 in 0.1..5.0f64,
        ei2 in -0.09..5.0f64,
        x0 in 0.2..0.8f64,
        log_eps in -12.0..0.0f64,
    ) {
        let material = BeamMaterial { ei1, ei2, x0, ..BeamMaterial::default() };
        let fam = CoefficientFamily::new(&material, &FamilyRules::default(), 2f64.powf(log_eps)).unwrap();
        let (lo, hi) = (ei1.min(ei1 + ei2), ei1.max(ei1 + ei2));
        prop_assert!(fam.c0() <= lo * (1.0 + 1e-12) && fam.c1() >= hi * (1.0 - 1e-12));
        for i in 0..=200 {
            let c = fam.stiffness.value(i as f64 / 200.0);
            prop_assert!(c >= fam.c0() * (1.0 - 1e-12) && c <= fam.c1() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn axial_form_is_continuous(
        u in samples(28),
        v in samples(28),
        log_eps in -10.0..0.0f64,
        t in 0.0..1.0f64,
    ) {
        let material = BeamMaterial { p0: 0.3, p1: 1.0, ..BeamMaterial::default() };
        let fam = CoefficientFamily::new(&material, &FamilyRules::default(), 2f64.powf(log_eps)).unwrap();
        let sys = BeamSystem::assemble(&BeamMesh::new(15).unwrap(), &fam.stiffness, None).unwrap();
        let k = coercivity_constants(&sys, fam.c0(), fam.c1(), fam.axial.sup_norm()).unwrap();
        let (u, v) = (DVector::from_vec(u), DVector::from_vec(v));
        let k1 = sys.k1(&fam.axial, t).unwrap();
        let form = k1.bilinear(&u, &v);
        let (norm_v, _) = sys.norms(&u, &v).unwrap();
        let (_, norm_h) = sys.norms(&v, &v).unwrap();
        prop_assert!(form.abs() <= k.c1_cap * norm_v * norm_h * (1.0 + 1e-10));
    }

    #[test]
    fn energy_constants_are_pure_and_bound_is_monotone(
        c0 in 0.1..3.0f64,
        spread in 1.0..3.0f64,
        b_inf in 0.0..20.0f64,
        c_l in 0.0..10.0f64,
        horizon in 0.1..4.0f64,
        data in (0.0..1.0f64, 0.0..1.0f64),
        h_steps in prop::collection::vec(0.0..1.0f64, 1..20),
    ) {
        let sys = system();
        let k = coercivity_constants(&sys, c0, c0 * spread, b_inf).unwrap();
        let a = constants(&k, c_l, horizon);
        let b = constants(&k, c_l, horizon);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let mut h = 0.0;
        let mut last = 0.0;
        for (i, dh) in h_steps.iter().enumerate() {
            h += dh;
            let t = horizon * (i + 1) as f64 / h_steps.len() as f64;
            let bound = a.bound(data.0, data.1, h, t);
            prop_assert!(bound >= last);
            last = bound;
        }
    }

    #[test]
    fn config_round_trips(alpha in 0.05..1.0f64, theta in 0.05..1.0f64, n_elems in 2usize..200) {
        let mut cfg = RunConfig::preset(Scenario::AxialImpulse);
        cfg.model.alpha = alpha;
        cfg.model.theta = theta;
        cfg.mesh.n_elems = n_elems;
        let back = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stepper_is_causal(alpha in 0.2..1.0f64, a in -5.0..5.0f64, omega in 0.0..30.0f64, cut_step in 1usize..63) {
        let sys = system();
        let k = FractionalKernel::build(alpha, 0.5, 1.0, DT).unwrap();
        let u0 = bubble(&sys, 1e-3);
        let v0 = DVector::zeros(sys.n_dofs());
        let cut = cut_step as f64 * DT;
        let full = solve(&sys, Some(&k), &pulse(a, omega, 2.0), &u0, &v0);
        let cut_run = solve(&sys, Some(&k), &pulse(a, omega, cut), &u0, &v0);
        prop_assert_eq!(&full.u[..=cut_step], &cut_run.u[..=cut_step]);
        prop_assert_eq!(&full.v[..=cut_step], &cut_run.v[..=cut_step]);
    }

    #[test]
    fn trajectories_are_linear_in_the_data(
        alpha in 0.2..1.0f64,
        theta in 0.1..1.0f64,
        s1 in -2.0..2.0f64,
        s2 in -2.0..2.0f64,
        a1 in -5.0..5.0f64,
        a2 in -5.0..5.0f64,
    ) {
        let sys = system();
        let k = FractionalKernel::build(alpha, theta, 1.0, DT).unwrap();
        let v0 = bubble(&sys, 0.3);
        let z = DVector::zeros(sys.n_dofs());
        let one = solve(&sys, Some(&k), &pulse(a1, 7.0, 2.0), &bubble(&sys, s1), &z);
        let two = solve(&sys, Some(&k), &pulse(a2, 7.0, 2.0), &bubble(&sys, s2), &v0);
        let both = solve(&sys, Some(&k), &pulse(a1 + a2, 7.0, 2.0), &bubble(&sys, s1 + s2), &v0);
        let (x, y, xy) = (flat(&one), flat(&two), flat(&both));
        let scale = max_abs(&x).max(max_abs(&y)).max(1e-300);
        for i in 0..x.len() {
            prop_assert!((xy[i] - x[i] - y[i]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn scaling_the_data_scales_the_trajectory(
        alpha in 0.2..1.0f64,
        amp in -2.0..2.0f64,
        load in -5.0..5.0f64,
        k2 in -6i32..6,
        s in -3.0..3.0f64,
    ) {
        let sys = system();
        let k = FractionalKernel::build(alpha, 0.4, 1.0, DT).unwrap();
        let base = solve(&sys, Some(&k), &pulse(load, 5.0, 2.0), &bubble(&sys, amp), &bubble(&sys, amp));
        let base = flat(&base);
        let p = 2f64.powi(k2);
        let exact = flat(&solve(&sys, Some(&k), &pulse(p * load, 5.0, 2.0), &bubble(&sys, p * amp), &bubble(&sys, p * amp)));
        prop_assert!(exact.iter().zip(&base).all(|(a, b)| a.to_bits() == (p * b).to_bits()));
        let general = flat(&solve(&sys, Some(&k), &pulse(s * load, 5.0, 2.0), &bubble(&sys, s * amp), &bubble(&sys, s * amp)));
        let scale = max_abs(&base).max(1e-300) * s.abs().max(1.0);
        prop_assert!(general.iter().zip(&base).all(|(a, b)| (a - s * b).abs() <= 1e-10 * scale));
    }

    #[test]
    fn picard_differences_contract(alpha in 0.2..1.0f64, theta in 0.2..1.0f64, amp in 0.1..2.0f64) {
        let sys = system();
        let k = FractionalKernel::build(alpha, theta, 1.0, DT).unwrap();
        let u0 = bubble(&sys, amp);
        let z = DVector::zeros(sys.n_dofs());
        let load = pulse(1.0, 3.0, 2.0);
        let problem = BeamProblem {
            system: &sys,
            axial: &Constant(0.0),
            load: &load,
            kernel: Some(&k),
            u0: &u0,
            v0: &z,
            dt: DT,
            n_steps: N_STEPS,
            newmark: NewmarkParams::default(),
        };
        let c_l = k.c_l().unwrap().young;
        let plan = HorizonPlan::single(N_STEPS, DT, c_l);
        let (traj, diag) = solve_picard(problem, &PicardOptions::default(), &plan).unwrap();
        let floor = 1e-13 * traj.e_v_norm(&sys);
        for seg in &diag.segments {
            for w in seg.differences[1..].windows(2) {
                prop_assert!(w[1] <= w[0] + floor, "{:?}", seg.differences);
            }
        }
    }
}
