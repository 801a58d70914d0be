#include "uldmc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "uldmc/metrics.hpp"
#include "uldmc/parallel.hpp"

namespace uldmc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(std::size_t line, const std::string& what) {
    fail(Errc::ConfigError, "line " + std::to_string(line) + ": " + what);
}

std::vector<double> parse_numbers(const std::string& text, std::size_t line) {
    std::string s = text;
    for (char& ch : s) {
        if (ch == ',') ch = ' ';
    }
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            config_error(line, "'" + tok + "' is not a number");
        }
    }
    return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double parse_scalar(const std::string& text, std::size_t line) {
    const auto v = parse_numbers(text, line);
    if (v.size() != 1) config_error(line, "expected a single number");
    return v.front();
}

std::uint64_t parse_count(const std::string& text, std::size_t line) {
    const double v = parse_scalar(text, line);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19) config_error(line, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& text, std::size_t line) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    config_error(line, "expected true or false");
}

Eigen::MatrixXd parse_matrix(const std::string& text, std::size_t line) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string row;
    while (std::getline(ss, row, ';')) rows.push_back(parse_numbers(row, line));
    const auto n = rows.size();
    for (const auto& r : rows) {
        if (r.size() != n) config_error(line, "matrix must be square with rows separated by ';'");
    }
    Eigen::MatrixXd M(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) M(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    }
    return M;
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"target",
         {"kind", "mean", "precision", "precision_diag", "data", "ridge", "synthetic_rows", "synthetic_dim",
          "synthetic_seed", "x0", "D"}},
        {"run",
         {"methods", "epsilon", "seed", "chains", "threads", "delta", "n", "burn_in", "thin", "w2_points", "timing",
          "output"}},
        {"tuner", {"probes_per_radius", "probe_seed"}},
    };
    return keys;
}

} // namespace

std::string to_string(Method m) { return m == Method::Scaled ? "scaled" : "unscaled"; }

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t lineno = 0;
    bool have_kind = false;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_error(lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_keys().count(section)) config_error(lineno, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) config_error(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) config_error(lineno, "key '" + key + "' appears before any section");
        if (!known_keys().at(section).count(key)) {
            config_error(lineno, "unknown key '" + key + "' in section [" + section + "]");
        }

        auto& t = cfg.target;
        if (section == "target") {
            if (key == "kind") {
                if (value != "gaussian" && value != "logistic") config_error(lineno, "kind must be gaussian or logistic");
                t.kind = value;
                have_kind = true;
            } else if (key == "mean") {
                t.mean = to_vector(parse_numbers(value, lineno));
            } else if (key == "precision") {
                t.precision = parse_matrix(value, lineno);
            } else if (key == "precision_diag") {
                t.precision = Eigen::MatrixXd(to_vector(parse_numbers(value, lineno)).asDiagonal());
            } else if (key == "data") {
                t.data_path = value;
            } else if (key == "ridge") {
                t.ridge = parse_scalar(value, lineno);
            } else if (key == "synthetic_rows") {
                t.synthetic_rows = static_cast<int>(parse_count(value, lineno));
            } else if (key == "synthetic_dim") {
                t.synthetic_dim = static_cast<int>(parse_count(value, lineno));
            } else if (key == "synthetic_seed") {
                t.synthetic_seed = parse_count(value, lineno);
            } else if (key == "x0") {
                t.x0 = to_vector(parse_numbers(value, lineno));
            } else if (key == "D") {
                t.D = parse_scalar(value, lineno);
            }
        } else if (section == "run") {
            if (key == "methods") {
                cfg.methods.clear();
                std::string s = value;
                for (char& ch : s) {
                    if (ch == ',') ch = ' ';
                }
                std::istringstream ms(s);
                std::string name;
                while (ms >> name) {
                    if (name == "scaled") cfg.methods.push_back(Method::Scaled);
                    else if (name == "unscaled") cfg.methods.push_back(Method::Unscaled);
                    else config_error(lineno, "unknown method '" + name + "'");
                }
                if (cfg.methods.empty()) config_error(lineno, "method list is empty");
            } else if (key == "epsilon") {
                cfg.epsilons = parse_numbers(value, lineno);
                if (cfg.epsilons.empty()) config_error(lineno, "epsilon list is empty");
                for (double e : cfg.epsilons) {
                    if (!(e > 0.0)) config_error(lineno, "epsilon must be > 0");
                }
            } else if (key == "seed") {
                cfg.seed = parse_count(value, lineno);
            } else if (key == "chains") {
                cfg.chains = static_cast<int>(parse_count(value, lineno));
                if (cfg.chains < 1) config_error(lineno, "chains must be >= 1");
            } else if (key == "threads") {
                cfg.threads = static_cast<unsigned>(parse_count(value, lineno));
            } else if (key == "delta") {
                cfg.delta = parse_scalar(value, lineno);
                if (!(*cfg.delta > 0.0)) config_error(lineno, "delta must be > 0");
            } else if (key == "n") {
                cfg.n_steps = parse_count(value, lineno);
                if (*cfg.n_steps < 1) config_error(lineno, "n must be >= 1");
            } else if (key == "burn_in") {
                cfg.burn_in = parse_count(value, lineno);
            } else if (key == "thin") {
                cfg.thin = parse_count(value, lineno);
                if (cfg.thin < 1) config_error(lineno, "thin must be >= 1");
            } else if (key == "w2_points") {
                cfg.w2_points = static_cast<int>(parse_count(value, lineno));
                if (cfg.w2_points < 2 || cfg.w2_points > kMaxCloudSize) config_error(lineno, "w2_points must be in [2, 4096]");
            } else if (key == "timing") {
                cfg.timing = parse_bool(value, lineno);
            } else if (key == "output") {
                cfg.output_dir = value;
            }
        } else if (section == "tuner") {
            if (key == "probes_per_radius") {
                cfg.probes_per_radius = static_cast<int>(parse_count(value, lineno));
                if (cfg.probes_per_radius < 1) config_error(lineno, "probes_per_radius must be >= 1");
            } else if (key == "probe_seed") {
                cfg.probe_seed = parse_count(value, lineno);
            }
        }
    }
    if (!have_kind) fail(Errc::ConfigError, "missing target: [target] section needs 'kind'");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

TargetModel build_target(const TargetSpec& spec) {
    if (spec.kind == "gaussian") {
        if (!spec.precision) fail(Errc::ConfigError, "gaussian target needs 'precision' or 'precision_diag'");
        const auto d = spec.precision->rows();
        const Eigen::VectorXd mean = spec.mean.value_or(Eigen::VectorXd::Zero(d));
        if (mean.size() != d) fail(Errc::ConfigError, "mean and precision dimensions differ");
        return make_gaussian(mean, SymMatrixd(*spec.precision));
    }
    if (spec.kind == "logistic") {
        if (!spec.data_path.empty()) {
            const auto data = load_logistic_csv(spec.data_path);
            return make_logistic_ridge(data.features, data.labels, spec.ridge);
        }
        if (spec.synthetic_rows < 1 || spec.synthetic_dim < 1) {
            fail(Errc::ConfigError, "logistic target needs 'data' or synthetic_rows/synthetic_dim");
        }
        Rng rng(spec.synthetic_seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const Eigen::VectorXd w = standard_normal(spec.synthetic_dim, rng);
        Eigen::MatrixXd features(spec.synthetic_rows, spec.synthetic_dim);
        Eigen::VectorXd labels(spec.synthetic_rows);
        for (int i = 0; i < spec.synthetic_rows; ++i) {
            features.row(i) = standard_normal(spec.synthetic_dim, rng).transpose();
            const double p = 1.0 / (1.0 + std::exp(-features.row(i).dot(w)));
            labels(i) = unif(rng) < p ? 1.0 : -1.0;
        }
        return make_logistic_ridge(features, labels, spec.ridge);
    }
    fail(Errc::ConfigError, "unknown target kind '" + spec.kind + "'");
}

InitSpec build_init(const TargetSpec& spec, const TargetModel& target) {
    const Eigen::VectorXd x0 = spec.x0.value_or(target.minimizer);
    if (x0.size() != target.dim) fail(Errc::ConfigError, "x0 has the wrong dimension");
    return make_init(target, x0, spec.D);
}

ThetaEstimate tune_target(const ExperimentConfig& config, const TargetModel& target) {
    const auto sets = default_theta_sets(target, config.probes_per_radius, config.probe_seed);
    return estimate_theta(target, sets.candidates, sets.probes, config.threads);
}

CellPlan plan_cell(const ExperimentConfig& config, const TargetModel& target, const InitSpec& init, Method method,
                   double epsilon, const std::optional<ThetaEstimate>& theta) {
    CellPlan cell;
    if (method == Method::Scaled) {
        cell.scaling = scaled_params(target, theta ? *theta : tune_target(config, target));
        try {
            cell.plan = plan_scaled(epsilon, cell.scaling, target.dim, target.m, init.D);
        } catch (const Error& e) {
            if (e.code() != Errc::TheoremInapplicable || !config.delta || !config.n_steps) throw;
            cell.plan.epsilon = epsilon;
            cell.plan.applicable = false;
            cell.plan.warnings.push_back(e.what());
        }
    } else {
        cell.scaling = unscaled_config(target);
        cell.plan = plan_unscaled(epsilon, target.kappa(), target.dim, target.m, init.D);
    }
    for (const auto& w : cell.scaling.warnings) cell.plan.warnings.push_back(w);
    if (config.delta) {
        cell.plan.delta = *config.delta;
        cell.plan.warnings.push_back("step size overridden by config");
    }
    if (config.n_steps) {
        cell.plan.n_steps = *config.n_steps;
        cell.plan.n_real = static_cast<double>(*config.n_steps);
        cell.plan.warnings.push_back("iteration count overridden by config");
    }
    return cell;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    if (config.methods.empty()) fail(Errc::ConfigError, "empty method list");
    if (config.epsilons.empty()) fail(Errc::ConfigError, "empty epsilon list");
    if (config.chains < 1) fail(Errc::ConfigError, "chains must be >= 1");

    const TargetModel target = build_target(config.target);
    const InitSpec init = build_init(config.target, target);
    std::optional<ThetaEstimate> theta;
    for (Method m : config.methods) {
        if (m == Method::Scaled && !theta) theta = tune_target(config, target);
    }

    std::vector<ResultRow> rows;
    std::uint64_t cell_index = 0;
    for (Method method : config.methods) {
        for (double epsilon : config.epsilons) {
            const auto start = std::chrono::steady_clock::now();
            const CellPlan cell = plan_cell(config, target, init, method, epsilon, theta);
            const std::uint64_t n = cell.plan.n_steps;
            ChainOptions opts;
            opts.thin = config.thin;
            opts.burn_in = config.burn_in.value_or(n / 2);
            if (opts.burn_in >= n) fail(Errc::ConfigError, "burn_in must be smaller than the number of steps");

            std::vector<ChainRun> runs(static_cast<std::size_t>(config.chains));
            parallel_for(runs.size(), config.threads, [&](std::size_t c) {
                Rng rng(chain_seed(config.seed, cell_index, c));
                runs[c] = run_chain(init, target, cell.scaling, cell.plan.delta, n, rng, opts);
            });

            Eigen::Index total = 0;
            for (const auto& r : runs) total += r.samples.rows();
            if (total < 2) fail(Errc::ConfigError, "fewer than two retained samples; lower burn_in or thin");
            Eigen::MatrixXd pooled(total, 2 * target.dim);
            Eigen::Index at = 0;
            std::uint64_t grad_calls = 0;
            for (const auto& r : runs) {
                pooled.middleRows(at, r.samples.rows()) = r.samples;
                at += r.samples.rows();
                grad_calls += r.grad_calls;
            }

            ResultRow row;
            row.target = target.name;
            row.method = to_string(method);
            row.kappa = target.kappa();
            row.kappa_hat = cell.scaling.kappa_hat;
            row.theta = cell.scaling.theta;
            row.epsilon = epsilon;
            row.delta = cell.plan.delta;
            row.n = n;
            row.grad_calls = grad_calls;
            row.warnings = cell.plan.warnings;

            const Eigen::MatrixXd positions = pooled.leftCols(target.dim);
            if (target.exact_law) {
                row.w2_gauss = gaussian_w2(moment_summary(SampleCloud(positions)), *target.exact_law);
                const Eigen::MatrixXd sub = even_subsample(positions, config.w2_points);
                Rng ref_rng(chain_seed(config.seed, cell_index, 0xFFFF));
                row.w2_empirical = empirical_w2(SampleCloud(sub), SampleCloud(draw_exact(target, sub.rows(), ref_rng)));
            } else {
                row.w2_gauss = std::numeric_limits<double>::quiet_NaN();
                row.w2_empirical = std::numeric_limits<double>::quiet_NaN();
            }
            const double mean_v2 = pooled.rightCols(target.dim).rowwise().squaredNorm().mean();
            row.vel_ratio = mean_v2 / (cell.scaling.u * static_cast<double>(target.dim));
            if (config.timing) {
                row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            }
            rows.push_back(std::move(row));
            ++cell_index;
        }
    }
    return rows;
}

std::string format_csv(const std::vector<ResultRow>& rows) {
    std::string out = kResultHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.target + ',' + r.method + ',' + fmt9(r.kappa) + ',' + fmt9(r.kappa_hat) + ',' + fmt9(r.theta) + ',' +
               fmt9(r.epsilon) + ',' + fmt9(r.delta) + ',' + std::to_string(r.n) + ',' + std::to_string(r.grad_calls) +
               ',' + fmt9(r.w2_gauss) + ',' + fmt9(r.w2_empirical) + ',' + fmt9(r.vel_ratio) + ',' + fmt9(r.wall_ms) +
               '\n';
    }
    return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty()) fail(Errc::InvalidInput, "refusing to write an empty result table");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot open '" + path + "' for writing");
    out << format_csv(rows);
    if (!out) fail(Errc::IoError, "write to '" + path + "' failed");
}

std::vector<ResultRow> parse_result_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kResultHeader) fail(Errc::InvalidInput, "unexpected result header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 13) fail(Errc::InvalidInput, "result row has " + std::to_string(f.size()) + " fields");
        ResultRow r;
        r.target = f[0];
        r.method = f[1];
        r.kappa = std::stod(f[2]);
        r.kappa_hat = std::stod(f[3]);
        r.theta = std::stod(f[4]);
        r.epsilon = std::stod(f[5]);
        r.delta = std::stod(f[6]);
        r.n = std::stoull(f[7]);
        r.grad_calls = std::stoull(f[8]);
        r.w2_gauss = std::stod(f[9]);
        r.w2_empirical = std::stod(f[10]);
        r.vel_ratio = std::stod(f[11]);
        r.wall_ms = std::stod(f[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<TracePoint> trace_w2(const TargetModel& target, const InitSpec& init, const ScalingConfig& scaling,
                                 double delta, std::uint64_t n_steps, int chains, std::uint64_t every,
                                 std::uint64_t seed, unsigned threads) {
    if (!target.exact_law) fail(Errc::InvalidInput, "trace needs a target with an exact law");
    require(chains >= 2, "trace needs at least two chains");
    require(every >= 1, "trace interval must be >= 1");
    const StepCache cache = make_step_cache(scaling, delta);
    const auto d = target.dim;
    std::vector<ChainState> states(static_cast<std::size_t>(chains), ChainState{init.x0, Eigen::VectorXd::Zero(d)});
    std::vector<Rng> rngs;
    for (int c = 0; c < chains; ++c) rngs.emplace_back(chain_seed(seed, 0, std::uint64_t(c)));

    std::vector<TracePoint> out;
    const auto record = [&](std::uint64_t i) {
        Eigen::MatrixXd pos(chains, d);
        for (int c = 0; c < chains; ++c) pos.row(c) = states[std::size_t(c)].x.transpose();
        out.push_back({i, static_cast<double>(i) * delta,
                       gaussian_w2(moment_summary(SampleCloud(pos)), *target.exact_law)});
    };
    record(0);
    for (std::uint64_t done = 0; done < n_steps;) {
        const std::uint64_t block = std::min(every, n_steps - done);
        parallel_for(states.size(), threads, [&](std::size_t c) {
            for (std::uint64_t k = 0; k < block; ++k) states[c] = step(states[c], target, cache, rngs[c]);
        });
        done += block;
        record(done);
    }
    return out;
}

} // namespace uldmc
