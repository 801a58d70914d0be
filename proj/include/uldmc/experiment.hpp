#pragma once

// Experiment configuration, execution and result tables.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uldmc/sampler.hpp"
#include "uldmc/targets.hpp"
#include "uldmc/tuner.hpp"

namespace uldmc {

enum class Method { Scaled, Unscaled };

std::string to_string(Method m);

struct TargetSpec {
    std::string kind;  // "gaussian" or "logistic"
    // gaussian
    std::optional<Eigen::VectorXd> mean;
    std::optional<Eigen::MatrixXd> precision;
    // logistic: either a dataset file or a synthetic draw
    std::string data_path;
    double ridge = 1.0;
    int synthetic_rows = 0;
    int synthetic_dim = 2;
    std::uint64_t synthetic_seed = 1;
    // initial point (defaults to the minimizer) and distance bound
    std::optional<Eigen::VectorXd> x0;
    std::optional<double> D;
};

struct ExperimentConfig {
    TargetSpec target;
    std::vector<Method> methods{Method::Scaled, Method::Unscaled};
    std::vector<double> epsilons{0.5};
    std::uint64_t seed = 0;
    int chains = 4;
    unsigned threads = 1;  // 0 = hardware concurrency
    std::optional<double> delta;           // overrides the planner
    std::optional<std::uint64_t> n_steps;  // overrides the planner
    std::optional<std::uint64_t> burn_in;  // default n / 2
    std::uint64_t thin = 1;
    int w2_points = 512;
    bool timing = false;  // wall_ms is 0 unless enabled, keeping output reproducible
    std::string output_dir = ".";
    int probes_per_radius = 32;
    std::uint64_t probe_seed = 7;
};

/// Flat sections with `key = value` lines and `#` comments. Sections:
/// [target], [run], [tuner]. Vectors are comma or space separated; matrix
/// rows are separated by ';'. Throws ConfigError naming the offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

TargetModel build_target(const TargetSpec& spec);
InitSpec build_init(const TargetSpec& spec, const TargetModel& target);

struct ResultRow {
    std::string target;
    std::string method;
    double kappa = 0.0;
    double kappa_hat = 0.0;
    double theta = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    std::uint64_t n = 0;
    std::uint64_t grad_calls = 0;
    double w2_gauss = 0.0;
    double w2_empirical = 0.0;
    double vel_ratio = 0.0;
    double wall_ms = 0.0;
    std::vector<std::string> warnings;
};

/// Scaling configuration and plan for one (method, epsilon) cell, with config
/// overrides applied.
struct CellPlan {
    ScalingConfig scaling;
    PlanOutput plan;
};

CellPlan plan_cell(const ExperimentConfig& config, const TargetModel& target, const InitSpec& init, Method method,
                   double epsilon, const std::optional<ThetaEstimate>& theta);

ThetaEstimate tune_target(const ExperimentConfig& config, const TargetModel& target);

/// One row per (method, epsilon), methods outer. Deterministic given the
/// config; chain c of cell i uses seed chain_seed(seed, i, c).
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

inline constexpr const char* kResultHeader =
    "target,method,kappa,kappa_hat,theta,epsilon,delta,n,grad_calls,w2_gauss,w2_empirical,vel_ratio,wall_ms";

std::string format_csv(const std::vector<ResultRow>& rows);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> parse_result_csv(const std::string& text);

struct TracePoint {
    std::uint64_t step = 0;
    double time = 0.0;
    double w2_gauss = 0.0;
};

/// Ensemble convergence curve: `chains` independent chains advance in
/// lockstep; every `every` steps the Gaussian-summary W2 between their
/// current positions and the target's exact law is recorded (step 0 included).
std::vector<TracePoint> trace_w2(const TargetModel& target, const InitSpec& init, const ScalingConfig& scaling,
                                 double delta, std::uint64_t n_steps, int chains, std::uint64_t every,
                                 std::uint64_t seed, unsigned threads);

} // namespace uldmc
