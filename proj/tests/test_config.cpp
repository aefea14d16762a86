#include <doctest.h>

#include <json.hpp>

#include "clab/config.hpp"
#include "clab/errors.hpp"

using namespace clab;
using nlohmann::json;

TEST_CASE("schema version is required") {
    CHECK_THROWS_WITH_AS(parse_config(json::object()), doctest::Contains("schema_version"), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 2}}), ConfigError);
    CHECK_NOTHROW(parse_config(json{{"schema_version", 1}}));
}

TEST_CASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_WITH_AS(parse_config(json{{"schema_version", 1}, {"modle", json::object()}}), doctest::Contains("modle"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(json{{"schema_version", 1}, {"subcheck", {{"tolerance", 1e-8}}}}),
                         doctest::Contains("tolerance"), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 1}, {"subcheck", {{"points", "many"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 1}, {"model", {{"kind", "klein"}}}}), ConfigError);
}

TEST_CASE("non-positive tolerances are rejected") {
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 1}, {"subcheck", {{"tol", -1e-8}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 1}, {"transmute", {{"threshold", 0.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 1}, {"calderon", {{"null_floor", -1.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 1}, {"model", {{"cutoff", 10.0}, {"max_modes", 10}}}}),
                    ConfigError);
}

TEST_CASE("defaults are filled in") {
    const Config c = parse_config(json{{"schema_version", 1}});
    CHECK(c.model.kind == "torus");
    CHECK(c.model.metric.size() == 4);
    CHECK(c.model_a.label == "square");
    CHECK(c.model_b.metric[3] == 1.21);
    CHECK(c.subcheck.alphas.size() == 3);
    CHECK(c.calderon.sources.size() >= 1);
}

TEST_CASE("resolved config round trips") {
    const json in{{"schema_version", 1},
                  {"seed", 5},
                  {"model", {{"kind", "sphere"}, {"radius", 2.0}, {"cutoff", 30.0}}},
                  {"multiplier", {{"name", "heat"}, {"params", {{"t", 0.2}}}}},
                  {"calderon", {{"hardy_ys", {1.0, 0.5}}, {"expected_verdict", "indistinguishable"}}}};
    const json a = to_json(parse_config(in));
    const json b = to_json(parse_config(a));
    CHECK(a.dump() == b.dump());
    CHECK(config_digest(a) == config_digest(b));
    CHECK(config_digest(a).size() == 16);
    CHECK(config_digest(a) != config_digest(to_json(parse_config(json{{"schema_version", 1}}))));
}

TEST_CASE("digest is FNV-1a of the compact dump") {
    // FNV-1a 64 of "{}"
    CHECK(config_digest(json::object()) == "08f44b07b5901a25");
}

TEST_CASE("experiment spec from config") {
    const Config c = parse_config(json{{"schema_version", 1}, {"calderon", {{"K", 4}, {"s_points", 50}}}});
    const ExperimentSpec e = experiment_spec(c);
    CHECK(e.K == 4);
    CHECK(e.s_points == 50);
    CHECK(e.a.request.max_modes.has_value());
}

TEST_CASE("digest ignores the output directory") {
    json a = to_json(parse_config(json{{"schema_version", 1}}));
    json b = a;
    b["out_dir"] = "elsewhere";
    CHECK(config_digest(a) == config_digest(b));
    b["seed"] = 4;
    CHECK(config_digest(a) != config_digest(b));
}
