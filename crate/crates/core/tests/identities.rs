use km_core::fourier::{dft, inverse};
use km_core::func::{conv, diffconv, inner_wrt, lp_norm_wrt};
use km_core::rng::{below, seeded, unit};
use km_core::{FuncR, GSet, Group, ProbMeasure};

fn random_func(g: &Group, seed: u64) -> FuncR {
    let mut r = seeded(seed, 1);
    FuncR::new(g, (0..g.size()).map(|_| 2.0 * unit(&mut r) - 1.0).collect()).unwrap()
}

fn random_set(g: &Group, density: f64, seed: u64) -> GSet {
    let mut r = seeded(seed, 2);
    GSet::from_fn(g, |_| unit(&mut r) < density)
}

fn delta(g: &Group, i: usize) -> FuncR {
    FuncR::indicator(&GSet::from_indices(g, [i]))
}

#[test]
fn adjoint_on_point_masses() {
    let g = Group::cyclic(7).unwrap();
    for a in 0..7 {
        for b in 0..7 {
            for c in 0..7 {
                let (f, gg, h) = (delta(&g, a), delta(&g, b), delta(&g, c));
                let lhs = inner_wrt(&f, &conv(&gg, &h).unwrap(), None).unwrap();
                let rhs = inner_wrt(&diffconv(&h, &f).unwrap(), &gg, None).unwrap();
                assert_eq!(lhs, rhs, "{a} {b} {c}");
            }
        }
    }
}

#[test]
fn adjoint_on_random_functions() {
    for (spec, seed) in [("Z12", 1), ("Z3xZ4", 2), ("F3^3", 3)] {
        let g = Group::parse(spec).unwrap();
        let f = random_func(&g, seed);
        let gg = random_func(&g, seed + 10);
        let h = random_func(&g, seed + 20);
        let lhs = inner_wrt(&f, &conv(&gg, &h).unwrap(), None).unwrap();
        let rhs = inner_wrt(&diffconv(&h, &f).unwrap(), &gg, None).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "{spec}");
    }
}

#[test]
fn exact_and_float_convolutions_agree() {
    let g = Group::parse("Z5xZ6").unwrap();
    for seed in 0..5 {
        let a = FuncR::indicator(&random_set(&g, 0.4, seed));
        let b = FuncR::indicator(&random_set(&g, 0.6, seed + 100));
        let exact = conv(&a, &b).unwrap();
        assert!(exact.is_exact());
        let float = conv(&a.to_float(), &b.to_float()).unwrap();
        assert!(exact.max_abs_diff(&float) < 1e-12);
        let exact = diffconv(&a, &b).unwrap();
        let float = diffconv(&a.to_float(), &b.to_float()).unwrap();
        assert!(exact.max_abs_diff(&float) < 1e-12);
    }
}

#[test]
fn convolution_theorem_and_parseval() {
    for spec in ["Z33", "Z8xZ5", "F5^2"] {
        let g = Group::parse(spec).unwrap();
        let f = random_func(&g, 4);
        let h = random_func(&g, 5);
        let lhs = dft(&conv(&f, &h).unwrap());
        let rhs = dft(&f).pointwise_mul(&dft(&h)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12, "{spec}");

        let energy: f64 = f.values().iter().map(|v| v * v).sum::<f64>() / g.size() as f64;
        let spec_energy: f64 = dft(&f).values().iter().map(|c| c.norm_sqr()).sum();
        assert!((energy - spec_energy).abs() < 1e-12);

        let back = inverse(&dft(&f)).real_part();
        assert!(back.max_abs_diff(&f) < 1e-12);
    }
}

#[test]
fn lp_norms_grow_with_p() {
    let g = Group::cyclic(40).unwrap();
    let f = random_func(&g, 9);
    let nu = ProbMeasure::of_set(&random_set(&g, 0.3, 9)).unwrap();
    for m in [None, Some(&nu)] {
        let mut prev = 0.0;
        for p in [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0, f64::INFINITY] {
            let n = lp_norm_wrt(&f, p, m).unwrap();
            assert!(n + 1e-12 >= prev, "p = {p}");
            prev = n;
        }
    }
}

fn brute_3aps(a: &GSet) -> u64 {
    let g = a.group();
    let mut n = 0;
    for x in 0..g.size() {
        for d in 0..g.size() {
            let y = g.add(x, d);
            if a.contains(x) && a.contains(y) && a.contains(g.add(y, d)) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn three_ap_count_matches_brute_force_and_fourier() {
    for (spec, seed) in [("Z13", 1u64), ("Z12", 2), ("F3^3", 3), ("Z4xZ6", 4)] {
        let g = Group::parse(spec).unwrap();
        for s in 0..4 {
            let a = random_set(&g, 0.5, seed * 10 + s);
            let count = a.count_3aps();
            assert_eq!(count, brute_3aps(&a), "{spec}");
            // for odd |G|: count = |G|² Σ_γ f̂(γ)² f̂(-2γ)
            if g.size() % 2 == 1 {
                let spec_a = dft(&FuncR::indicator(&a));
                let mut total = 0.0;
                for gamma in 0..g.size() {
                    let m2 = g.mul(-2, gamma);
                    let (x, y) = (spec_a.value(gamma), spec_a.value(m2));
                    total += (x * x * y).re;
                }
                let n = g.size() as f64;
                assert!((total * n * n - count as f64).abs() < 1e-6, "{spec}");
            }
        }
    }
}

#[test]
fn sampling_helpers_stay_in_range() {
    let mut r = seeded(3, 0);
    for n in [1usize, 2, 7, 1 << 40] {
        for _ in 0..100 {
            assert!(below(&mut r, n) < n);
        }
    }
}
