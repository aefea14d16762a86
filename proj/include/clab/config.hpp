#pragma once

// Declarative run configuration. Every section is optional and falls back to
// defaults; unknown keys and non-positive tolerances raise ConfigError. The
// resolved configuration (defaults filled in) is echoed back by to_json.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clab/calderon.hpp"
#include "clab/funcalc.hpp"
#include "clab/manifold.hpp"

namespace clab {

inline constexpr int kSchemaVersion = 1;

struct ModelBlock {
    std::string kind = "torus";  // circle, torus, sphere
    std::string label;
    double radius = 1.0;
    int dim = 2;
    std::vector<double> metric;  // row-major; identity if empty
    std::optional<double> cutoff;
    std::optional<std::size_t> max_modes;
    std::size_t hard_limit = 400000;
    int resolution = 0;  // 0 picks the smallest exact resolution
    std::optional<std::uint64_t> remix_seed;

    ManifoldModel build_model() const;
    BasisRequest request() const;
};

struct FieldSpec {
    std::string kind = "random";  // random, mode
    std::optional<std::uint64_t> seed;
    double max_lambda = -1.0;
    std::size_t index = 0;
};

struct MultiplierSpec {
    std::string name = "L_half";
    MultiplierParams params;
};

struct KernelSpec {
    std::string generator = "bilaplace";
    double m = 0.0;
    std::vector<double> ts;  // empty: log-spaced from the truncation threshold to 1
    int t_points = 6;
    double c = 0.1;
};

struct BoundSpec {
    std::string generator = "bilaplace";
    double m = 0.0;
    std::vector<double> ts;
    int t_points = 6;
    double c = 0.1;
    std::vector<double> cs{0.02, 0.05, 0.1, 0.2, 0.4};
    bool refine = false;  // rerun with doubled grid and cutoff
    double stability_tol = 0.1;
};

struct SubcheckSpec {
    std::vector<double> alphas{0.25, 0.5, 0.75};
    double mu_min = 1.0;
    double mu_max = 1e4;
    int points = 20;
    double tol = 1e-10;
    double threshold = 1e-8;
    std::size_t max_nodes = 200;
};

struct TransmuteSpec {
    double t_min = 0.01, t_max = 10.0;
    int t_points = 25;
    double lambda_min = 0.0, lambda_max = 10.0;
    int lambda_points = 25;
    double threshold = 1e-6;
};

struct CalderonSpec {
    double m = 1.0;
    Ball O, omega1, omega2;
    std::vector<Ball> sources;
    std::optional<std::vector<std::vector<double>>> map;
    std::optional<std::vector<double>> center_b;
    int s_points = 160;
    double s_min = 1e-2;
    int K = 10;
    double null_floor = 1e-10;
    double leakage_bound = 1.0;
    std::vector<double> hardy_ys{1.0, 0.3, 0.1, 0.03, 0.01};
    bool diagnostics = true;
    std::optional<std::string> expected_verdict;
};

struct Config {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    ModelBlock model;
    ModelBlock model_a, model_b;
    FieldSpec field;
    MultiplierSpec multiplier;
    KernelSpec kernel;
    BoundSpec boundcheck;
    SubcheckSpec subcheck;
    TransmuteSpec transmute;
    CalderonSpec calderon;
};

Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);
nlohmann::json to_json(const Config& c);

/// 64-bit FNV-1a of the compact dump of the resolved configuration, out_dir excluded.
std::string config_digest(const nlohmann::json& resolved);

ExperimentSpec experiment_spec(const Config& c);

}  // namespace clab
