// Every example doubles as a test.

macro_rules! example_test {
    ($module:ident, $test:ident) => {
        mod $module {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($module),
                ".rs"
            ));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!(stringify!($module), " example should run"));
        }
    };
}

example_test!(analyze_text, analyze_text_runs);
example_test!(build_and_search, build_and_search_runs);
example_test!(nearest_neighbors, nearest_neighbors_runs);
example_test!(expand_query, expand_query_runs);
example_test!(rm3_feedback, rm3_feedback_runs);
example_test!(evaluate_runs, evaluate_runs_runs);
example_test!(parameter_sweep, parameter_sweep_runs);
example_test!(synthetic_experiment, synthetic_experiment_runs);
