#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uldmc/experiment.hpp"

using namespace uldmc;
using Eigen::VectorXd;

namespace {

const char* kGaussianConfig = R"(# two-dimensional Gaussian
[target]
kind = gaussian
precision_diag = 1, 4

[run]
methods = scaled
epsilon = 0.5
seed = 3
chains = 4
)";

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config defaults and full parse") {
    const auto c = parse_config("[target]\nkind = gaussian\nprecision = 2 1; 1 2\n");
    CHECK(c.methods.size() == 2);
    CHECK(c.epsilons == std::vector<double>{0.5});
    CHECK(c.chains == 4);
    CHECK(c.seed == 0);
    CHECK(c.thin == 1);
    CHECK_FALSE(c.delta.has_value());
    CHECK_FALSE(c.timing);
    REQUIRE(c.target.precision.has_value());
    CHECK((*c.target.precision)(0, 1) == 1.0);

    const auto f = parse_config(R"(
[target]
kind = logistic
synthetic_rows = 50
synthetic_dim = 3
ridge = 0.5   # trailing comment
x0 = 1 2 3
D = 10
[run]
methods = unscaled, scaled
epsilon = 0.5, 0.25
seed = 11
chains = 8
threads = 2
delta = 0.01
n = 1000
burn_in = 100
thin = 2
w2_points = 64
timing = true
output = out
[tuner]
probes_per_radius = 5
probe_seed = 3
)");
    CHECK(f.target.kind == "logistic");
    CHECK(f.target.synthetic_rows == 50);
    CHECK(f.target.ridge == 0.5);
    CHECK(*f.target.D == 10.0);
    CHECK(f.methods == std::vector<Method>{Method::Unscaled, Method::Scaled});
    CHECK(f.epsilons == std::vector<double>{0.5, 0.25});
    CHECK(*f.delta == 0.01);
    CHECK(*f.n_steps == 1000);
    CHECK(*f.burn_in == 100);
    CHECK(f.thin == 2);
    CHECK(f.w2_points == 64);
    CHECK(f.timing);
    CHECK(f.output_dir == "out");
    CHECK(f.probes_per_radius == 5);
}

TEST_CASE("config errors name the offending line") {
    CHECK_THROWS_WITH_AS(parse_config("[target]\nkind = gaussian\ncolour = red\n"),
                         doctest::Contains("line 3: unknown key 'colour'"), Error);
    CHECK_THROWS_WITH_AS(parse_config("[target]\nkind = gaussian\n[run]\nmethods =\n"),
                         doctest::Contains("ConfigError"), Error);
    CHECK_THROWS_WITH_AS(parse_config("[run]\nchains = 2\n"), doctest::Contains("kind"), Error);
    CHECK_THROWS_AS(parse_config("[target]\nkind = cauchy\n"), Error);
    CHECK_THROWS_AS(parse_config("[target]\nkind = gaussian\nprecision = 1 2; 3\n"), Error);
    CHECK_THROWS_AS(parse_config("[oops]\n"), Error);
    CHECK_THROWS_AS(parse_config("[run]\nepsilon = abc\n"), Error);
    CHECK_THROWS_AS(parse_config("kind = gaussian\n"), Error);
    try {
        parse_config("[target]\nkind = gaussian\ncolour = red\n");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ConfigError);
    }
}

TEST_CASE("targets from config") {
    const auto g = build_target(parse_config(kGaussianConfig).target);
    CHECK(g.kappa() == doctest::Approx(4.0));
    const auto cfg = parse_config("[target]\nkind = logistic\nsynthetic_rows = 40\nsynthetic_dim = 2\nridge = 1\n");
    const auto a = build_target(cfg.target), b = build_target(cfg.target);
    CHECK(a.minimizer == b.minimizer);
    CHECK(a.m == 1.0);
    CHECK_THROWS_AS(build_target(parse_config("[target]\nkind = gaussian\n").target), Error);
    CHECK_THROWS_AS(build_target(parse_config("[target]\nkind = logistic\n").target), Error);

    auto spec = parse_config(kGaussianConfig).target;
    spec.x0 = VectorXd{{3.0, 4.0}};
    CHECK(build_init(spec, g).D == doctest::Approx(5.0));
    spec.D = 1.0;
    CHECK_THROWS_AS(build_init(spec, g), Error);
}

TEST_CASE("end-to-end scaled run lands within the accuracy target") {
    auto cfg = parse_config(kGaussianConfig);
    cfg.chains = 64;
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 1);
    const auto& r = rows[0];
    MESSAGE("w2_gauss = " << r.w2_gauss << ", w2_empirical = " << r.w2_empirical << ", vel_ratio = " << r.vel_ratio);
    CHECK(r.method == "scaled");
    CHECK(r.n == 3333);
    CHECK(r.delta == doctest::Approx(7.278867114257129e-4).epsilon(1e-12));
    CHECK(r.grad_calls == 64 * 3333);
    CHECK(r.kappa_hat == doctest::Approx(4.0));
    CHECK(r.theta == 0.0);
    CHECK(r.w2_gauss <= 0.5);
    CHECK(r.wall_ms == 0.0);
}

TEST_CASE("rows follow methods then epsilons, overrides apply") {
    auto cfg = parse_config(kGaussianConfig);
    cfg.methods = {Method::Scaled, Method::Unscaled};
    cfg.epsilons = {0.5, 0.25, 0.1};
    cfg.delta = 0.05;
    cfg.n_steps = 400;
    cfg.chains = 2;
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].method == "scaled");
    CHECK(rows[2].epsilon == 0.1);
    CHECK(rows[3].method == "unscaled");
    CHECK(rows[3].epsilon == 0.5);
    for (const auto& r : rows) {
        CHECK(r.delta == 0.05);
        CHECK(r.n == 400);
        CHECK(r.grad_calls == 800);
        CHECK(r.warnings.size() >= 2);
    }
}

TEST_CASE("logistic rows report missing W2") {
    auto cfg = parse_config("[target]\nkind = logistic\nsynthetic_rows = 30\nsynthetic_dim = 2\n[run]\nn = 300\nchains = 2\n"
                            "delta = 0.05\n[tuner]\nprobes_per_radius = 4\n");
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(std::isnan(rows[0].w2_gauss));
    CHECK(std::isnan(rows[0].w2_empirical));
    CHECK(rows[0].kappa_hat <= rows[0].kappa);
    CHECK(std::isfinite(rows[0].vel_ratio));
}

TEST_CASE("same config gives byte-identical CSV across thread counts") {
    auto cfg = parse_config(kGaussianConfig);
    cfg.methods = {Method::Scaled, Method::Unscaled};
    cfg.n_steps = 2000;
    cfg.delta = 0.01;
    cfg.chains = 6;
    cfg.threads = 1;
    const auto a = format_csv(run_experiment(cfg));
    cfg.threads = 4;
    const auto b = format_csv(run_experiment(cfg));
    CHECK(a == b);
    cfg.seed = 4;
    CHECK(format_csv(run_experiment(cfg)) != a);
}

TEST_CASE("result CSV emit and parse") {
    ResultRow r;
    r.target = "gaussian";
    r.method = "scaled";
    r.kappa = 100.0;
    r.kappa_hat = 1.0 / 3.0;
    r.epsilon = 0.5;
    r.delta = 7.278867114257129e-4;
    r.n = 3333;
    r.grad_calls = 13332;
    r.w2_gauss = 0.123456789123;
    r.w2_empirical = std::nan("");
    r.vel_ratio = 1.01;
    const auto path = (std::filesystem::temp_directory_path() / "uldmc_results.csv").string();
    emit_csv({r}, path);
    const auto text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.rfind(std::string(kResultHeader) + "\n", 0) == 0);
    CHECK(text.find("0.333333333,") != std::string::npos);
    const auto back = parse_result_csv(text);
    REQUIRE(back.size() == 1);
    CHECK(back[0].kappa_hat == doctest::Approx(r.kappa_hat).epsilon(1e-8));
    CHECK(back[0].delta == doctest::Approx(r.delta).epsilon(1e-8));
    CHECK(back[0].n == 3333);
    CHECK(back[0].grad_calls == 13332);
    CHECK(std::isnan(back[0].w2_empirical));
    std::remove(path.c_str());

    CHECK_THROWS_WITH_AS(emit_csv({}, path), doctest::Contains("InvalidInput"), Error);
    CHECK_THROWS_WITH_AS(emit_csv({r}, "/nonexistent-dir/r.csv"), doctest::Contains("IoError"), Error);
    CHECK_THROWS_AS(parse_result_csv("bad header\n"), Error);
}

TEST_CASE("convergence trace") {
    const auto cfg = parse_config(kGaussianConfig);
    const auto t = build_target(cfg.target);
    const auto init = make_init(t, VectorXd{{3.0, 3.0}});
    const auto scaling = scaled_params(t, tune_target(cfg, t));
    const auto trace = trace_w2(t, init, scaling, 0.05, 400, 256, 40, 1, 1);
    REQUIRE(trace.size() == 11);
    CHECK(trace.front().step == 0);
    CHECK(trace.back().step == 400);
    CHECK(trace.back().time == doctest::Approx(20.0));
    CHECK(trace.front().w2_gauss > 3.0);
    CHECK(trace.back().w2_gauss < 0.3);
    CHECK(trace_w2(t, init, scaling, 0.05, 400, 256, 40, 1, 3).back().w2_gauss == trace.back().w2_gauss);
    CHECK_THROWS_AS(trace_w2(t, init, scaling, 0.05, 10, 1, 5, 1, 1), Error);
}
