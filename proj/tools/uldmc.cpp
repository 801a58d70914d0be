// Command-line front end: tune, plan, sample, compare, validate-kernel, w2.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "uldmc/experiment.hpp"
#include "uldmc/metrics.hpp"
#include "uldmc/oracle.hpp"
#include "uldmc/sample_io.hpp"

namespace {

using namespace uldmc;

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format = "csv";
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
    auto* opt = cmd->add_option("--config", f.config_path, "experiment config file");
    if (needs_config) opt->required();
    cmd->add_option("--seed", f.seed, "base random seed (overrides config)");
    cmd->add_option("--out", f.out_dir, "output directory (overrides config)");
    cmd->add_option("--format", f.format, "sample file format")->check(CLI::IsMember({"csv", "bin"}));
    cmd->add_option("--threads", f.threads, "worker threads, 0 = all cores (overrides config)");
}

ExperimentConfig load_with_overrides(const CommonFlags& f) {
    ExperimentConfig cfg = load_config(f.config_path);
    if (f.seed) cfg.seed = *f.seed;
    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    if (f.threads) cfg.threads = *f.threads;
    return cfg;
}

std::string join_path(const std::string& dir, const std::string& file) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / file).string();
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_tune(const CommonFlags& f) {
    const auto cfg = load_with_overrides(f);
    const auto target = build_target(cfg.target);
    const auto est = tune_target(cfg, target);
    const auto scaling = scaled_params(target, est);
    const auto spectrum = sym_eig(scaling.A).values;
    std::printf("target     %s (d = %ld)\n", target.name.c_str(), static_cast<long>(target.dim));
    std::printf("m          %.9g\nL          %.9g\nkappa      %.9g\n", target.m, target.L, target.kappa());
    std::printf("theta      %.9g\nm_hat      %.9g\nkappa_hat  %.9g\nu          %.9g\ngamma      %.9g\n", est.theta,
                est.m_hat, scaling.kappa_hat, scaling.u, scaling.gamma);
    std::printf("y_hat     ");
    for (Eigen::Index i = 0; i < est.y_hat.size(); ++i) std::printf(" %.9g", est.y_hat(i));
    std::printf("\nA spectrum");
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) std::printf(" %.9g", spectrum(i));
    std::printf("\n");
    print_warnings(scaling.warnings);
    return 0;
}

int cmd_plan(const CommonFlags& f) {
    const auto cfg = load_with_overrides(f);
    const auto target = build_target(cfg.target);
    const auto init = build_init(cfg.target, target);
    const auto est = tune_target(cfg, target);
    std::printf("%-9s %-10s %-16s %-12s %s\n", "method", "epsilon", "delta", "n", "applicable");
    for (double eps : cfg.epsilons) {
        for (Method m : {Method::Scaled, Method::Unscaled}) {
            ExperimentConfig plain = cfg;
            plain.delta.reset();
            plain.n_steps.reset();
            const auto cell = plan_cell(plain, target, init, m, eps, est);
            std::printf("%-9s %-10.6g %-16.9g %-12llu %s\n", to_string(m).c_str(), eps, cell.plan.delta,
                        static_cast<unsigned long long>(cell.plan.n_steps), cell.plan.applicable ? "yes" : "no");
            print_warnings(cell.plan.warnings);
        }
    }
    return 0;
}

int cmd_sample(const CommonFlags& f, const std::string& method_name, std::optional<double> epsilon, bool trace,
               std::optional<std::uint64_t> trace_every, int trace_chains) {
    const auto cfg = load_with_overrides(f);
    const auto target = build_target(cfg.target);
    const auto init = build_init(cfg.target, target);
    const Method method = method_name == "unscaled" ? Method::Unscaled : Method::Scaled;
    std::optional<ThetaEstimate> est;
    if (method == Method::Scaled) est = tune_target(cfg, target);
    const double eps = epsilon.value_or(cfg.epsilons.front());
    const auto cell = plan_cell(cfg, target, init, method, eps, est);
    print_warnings(cell.plan.warnings);

    ChainOptions opts;
    opts.thin = cfg.thin;
    opts.burn_in = cfg.burn_in.value_or(0);
    Rng rng(chain_seed(cfg.seed, 0, 0));
    const auto run = run_chain(init, target, cell.scaling, cell.plan.delta, cell.plan.n_steps, rng, opts);

    SampleSet samples{target.dim, run.steps, run.samples};
    const bool binary = f.format == "bin";
    const auto path = join_path(cfg.output_dir, binary ? "samples.bin" : "samples.csv");
    write_samples(path, samples, binary ? SampleFormat::Binary : SampleFormat::Csv);
    std::printf("method %s  delta %.9g  n %llu  retained %ld  -> %s\n", to_string(method).c_str(), cell.plan.delta,
                static_cast<unsigned long long>(cell.plan.n_steps), static_cast<long>(samples.count()), path.c_str());

    if (trace) {
        const std::uint64_t every = trace_every.value_or(std::max<std::uint64_t>(1, cell.plan.n_steps / 100));
        const auto curve = trace_w2(target, init, cell.scaling, cell.plan.delta, cell.plan.n_steps, trace_chains,
                                    every, cfg.seed, cfg.threads);
        const auto trace_path = join_path(cfg.output_dir, "trace.csv");
        std::FILE* out = std::fopen(trace_path.c_str(), "wb");
        if (!out) fail(Errc::IoError, "cannot open '" + trace_path + "'");
        std::fprintf(out, "step,time,w2_gauss\n");
        for (const auto& p : curve) {
            std::fprintf(out, "%llu,%.9g,%.9g\n", static_cast<unsigned long long>(p.step), p.time, p.w2_gauss);
        }
        std::fclose(out);
        std::printf("trace (%zu points) -> %s\n", curve.size(), trace_path.c_str());
    }
    return 0;
}

int cmd_compare(const CommonFlags& f) {
    const auto cfg = load_with_overrides(f);
    const auto rows = run_experiment(cfg);
    const auto path = join_path(cfg.output_dir, "results.csv");
    emit_csv(rows, path);
    std::printf("%-9s %-9s %-12s %-12s %-10s %-12s %-12s %-10s\n", "method", "epsilon", "kappa_hat", "delta", "n",
                "w2_gauss", "w2_emp", "vel_ratio");
    for (const auto& r : rows) {
        std::printf("%-9s %-9.4g %-12.6g %-12.6g %-10llu %-12.6g %-12.6g %-10.4g\n", r.method.c_str(), r.epsilon,
                    r.kappa_hat, r.delta, static_cast<unsigned long long>(r.n), r.w2_gauss, r.w2_empirical,
                    r.vel_ratio);
        print_warnings(r.warnings);
    }
    std::printf("-> %s\n", path.c_str());
    return 0;
}

int cmd_validate(const CommonFlags& f, int cases, int replicas, int substeps) {
    const auto report = validate_kernel(f.seed.value_or(0), cases, replicas, substeps, 5.0, f.threads.value_or(0));
    for (std::size_t i = 0; i < report.cases.size(); ++i) {
        const auto& c = report.cases[i];
        std::printf("case %2zu  d=%ld  delta=%.2f  alpha in [%.2f, %.2f]  max|z| mean %.2f cov %.2f  %s\n", i,
                    static_cast<long>(c.dim), c.delta, c.alpha_min, c.alpha_max, c.agreement.worst_mean_z,
                    c.agreement.worst_cov_z, c.passed ? "ok" : "FAIL");
    }
    std::printf("%s\n", report.passed() ? "kernel moments agree with the Euler oracle" : "kernel validation FAILED");
    return report.passed() ? 0 : kExitNumerical;
}

int cmd_w2(const std::string& a_path, const std::string& b_path, int max_points) {
    const auto a = read_samples(a_path);
    const auto b = read_samples(b_path);
    if (a.dim != b.dim) fail(Errc::InvalidInput, "sample files have different dimensions");
    const Eigen::Index n = std::min({a.count(), b.count(), static_cast<Eigen::Index>(max_points)});
    if (n < 1) fail(Errc::InvalidInput, "sample files are empty");
    if (a.count() != b.count()) {
        std::cerr << "warning: unequal sample counts; both subsampled to " << n << " points\n";
    }
    const SampleCloud ca(even_subsample(a.positions(), n));
    const SampleCloud cb(even_subsample(b.positions(), n));
    std::printf("w2_empirical %.9g\n", empirical_w2(ca, cb));
    if (n >= 2) std::printf("w2_gauss     %.9g\n", gaussian_w2(moment_summary(ca), moment_summary(cb)));
    return 0;
}

int exit_code_for(Errc code) {
    switch (code) {
    case Errc::ConfigError:
    case Errc::IoError:
    case Errc::InvalidInput:
    case Errc::TheoremInapplicable: return kExitConfig;
    default: return kExitNumerical;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scaled underdamped Langevin sampler"};
    app.require_subcommand(1);

    CommonFlags tune_f, plan_f, sample_f, compare_f, validate_f;
    auto* tune = app.add_subcommand("tune", "estimate theta and print the scaling");
    add_common(tune, tune_f, true);
    auto* plan = app.add_subcommand("plan", "print (delta, n) for both methods");
    add_common(plan, plan_f, true);

    auto* sample = app.add_subcommand("sample", "run one chain and write its samples");
    add_common(sample, sample_f, true);
    std::string method = "scaled";
    std::optional<double> sample_eps;
    bool trace = false;
    std::optional<std::uint64_t> trace_every;
    int trace_chains = 256;
    sample->add_option("--method", method)->check(CLI::IsMember({"scaled", "unscaled"}));
    sample->add_option("--epsilon", sample_eps, "accuracy (default: first epsilon of the config)");
    sample->add_flag("--trace", trace, "also write an ensemble W2-to-target curve");
    sample->add_option("--trace-every", trace_every, "steps between trace points (default n/100)");
    sample->add_option("--trace-chains", trace_chains, "ensemble size for --trace")->check(CLI::Range(2, 1 << 20));

    auto* compare = app.add_subcommand("compare", "run the experiment matrix and write results.csv");
    add_common(compare, compare_f, true);

    auto* validate = app.add_subcommand("validate-kernel", "check kernel moments against the Euler oracle");
    add_common(validate, validate_f, false);
    int cases = 10, replicas = 100000, substeps = 1024;
    validate->add_option("--cases", cases)->check(CLI::PositiveNumber);
    validate->add_option("--replicas", replicas)->check(CLI::Range(2, 100000000));
    validate->add_option("--substeps", substeps)->check(CLI::Range(16, 1 << 20));

    auto* w2 = app.add_subcommand("w2", "W2 distance between the positions of two sample files");
    std::string file_a, file_b;
    int max_points = static_cast<int>(kMaxCloudSize);
    w2->add_option("a", file_a)->required()->check(CLI::ExistingFile);
    w2->add_option("b", file_b)->required()->check(CLI::ExistingFile);
    w2->add_option("--max-points", max_points)->check(CLI::Range(1, static_cast<int>(kMaxCloudSize)));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*tune) return cmd_tune(tune_f);
        if (*plan) return cmd_plan(plan_f);
        if (*sample) return cmd_sample(sample_f, method, sample_eps, trace, trace_every, trace_chains);
        if (*compare) return cmd_compare(compare_f);
        if (*validate) return cmd_validate(validate_f, cases, replicas, substeps);
        if (*w2) return cmd_w2(file_a, file_b, max_points);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}
