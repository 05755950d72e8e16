//! Every example runs to completion; the full verification example is left to the acceptance suite.

macro_rules! example {
    ($($name:ident = $path:literal),* $(,)?) => {
        $(
            #[allow(dead_code)]
            #[path = $path]
            mod $name;

            #[test]
            fn $name() {
                $name::run().unwrap();
            }
        )*
    };
}

example!(
    b_sobolev_norms = "../examples/b_sobolev_norms.rs",
    config_roundtrip = "../examples/config_roundtrip.rs",
    constraint_residual = "../examples/constraint_residual.rs",
    decay_fit = "../examples/decay_fit.rs",
    field_dumps = "../examples/field_dumps.rs",
    fixed_point_solve = "../examples/fixed_point_solve.rs",
    kernel_identities = "../examples/kernel_identities.rs",
    outgoing_support = "../examples/outgoing_support.rs",
    seed_profile = "../examples/seed_profile.rs",
    sharpness_scan = "../examples/sharpness_scan.rs",
    solution_operator = "../examples/solution_operator.rs",
    weight_admissibility = "../examples/weight_admissibility.rs",
);
