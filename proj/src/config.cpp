#include "clab/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "clab/errors.hpp"

namespace clab {

using nlohmann::json;

namespace {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    template <class T>
    T get(const std::string& key, const T& fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        return convert<T>(key);
    }

    template <class T>
    std::optional<T> maybe(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return std::nullopt;
        return convert<T>(key);
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(has(key) ? j_.at(key) : empty, path_ + "." + key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError("unknown key '" + k + "' in " + where());
    }

    std::string where() const { return path_.empty() ? "config" : path_; }
    std::string key_path(const std::string& key) const { return where() + "." + key; }

private:
    template <class T>
    T convert(const std::string& key) const {
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("wrong type for " + key_path(key));
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void positive(double v, const std::string& name) {
    if (!(v > 0.0)) throw ConfigError(name + " must be positive");
}

Point point_from(const std::vector<double>& v, const std::string& name) {
    if (v.empty() || v.size() > 3) throw ConfigError(name + " must have 1 to 3 coordinates");
    Point p;
    for (std::size_t i = 0; i < v.size(); ++i) p.x[i] = v[i];
    return p;
}

std::vector<double> point_to(const Point& p, int dim) { return {p.x.begin(), p.x.begin() + dim}; }

Ball parse_ball(Section s, const Ball& fallback, int dim) {
    Ball b = fallback;
    const auto c = s.get<std::vector<double>>("center", point_to(fallback.center, dim));
    b.center = point_from(c, s.key_path("center"));
    b.radius = s.get<double>("radius", fallback.radius);
    positive(b.radius, s.key_path("radius"));
    s.finish();
    return b;
}

json ball_json(const Ball& b, int dim) { return {{"center", point_to(b.center, dim)}, {"radius", b.radius}}; }

ModelBlock parse_model(Section s, const ModelBlock& fallback) {
    ModelBlock m;
    m.kind = s.get<std::string>("kind", fallback.kind);
    if (m.kind != "circle" && m.kind != "torus" && m.kind != "sphere")
        throw ConfigError(s.key_path("kind") + " must be circle, torus or sphere");
    m.label = s.get<std::string>("label", m.kind == fallback.kind && !fallback.label.empty() ? fallback.label : m.kind);
    m.radius = s.get<double>("radius", fallback.radius);
    m.dim = s.get<int>("dim", fallback.dim);
    m.metric = s.get<std::vector<double>>("metric", m.kind == fallback.kind && m.dim == fallback.dim
                                                        ? fallback.metric
                                                        : std::vector<double>{});
    m.cutoff = s.maybe<double>("cutoff");
    m.max_modes = s.maybe<std::size_t>("max_modes");
    if (!m.cutoff && !m.max_modes) {
        m.cutoff = fallback.cutoff;
        m.max_modes = fallback.max_modes;
    }
    if (m.cutoff && m.max_modes) throw ConfigError(s.where() + ": give either cutoff or max_modes, not both");
    if (m.cutoff && *m.cutoff < 0.0) throw ConfigError(s.key_path("cutoff") + " must be nonnegative");
    if (m.max_modes && *m.max_modes == 0) throw ConfigError(s.key_path("max_modes") + " must be positive");
    m.hard_limit = s.get<std::size_t>("hard_limit", fallback.hard_limit);
    m.resolution = s.get<int>("resolution", fallback.resolution);
    if (m.resolution < 0) throw ConfigError(s.key_path("resolution") + " must be nonnegative");
    m.remix_seed = s.maybe<std::uint64_t>("remix_seed");
    if (!m.remix_seed) m.remix_seed = fallback.remix_seed;
    s.finish();
    if (m.kind == "torus" && m.metric.empty()) {
        m.metric.assign(static_cast<std::size_t>(m.dim * m.dim), 0.0);
        for (int i = 0; i < m.dim; ++i) m.metric[static_cast<std::size_t>(i * m.dim + i)] = 1.0;
    }
    return m;
}

json model_json(const ModelBlock& m) {
    json j{{"kind", m.kind}, {"label", m.label}, {"hard_limit", m.hard_limit}, {"resolution", m.resolution}};
    if (m.kind == "torus") {
        j["dim"] = m.dim;
        j["metric"] = m.metric;
    } else {
        j["radius"] = m.radius;
    }
    if (m.cutoff) j["cutoff"] = *m.cutoff;
    if (m.max_modes) j["max_modes"] = *m.max_modes;
    if (m.remix_seed) j["remix_seed"] = *m.remix_seed;
    return j;
}

ModelBlock default_model(const std::string& label, std::vector<double> metric) {
    ModelBlock m;
    m.label = label;
    m.metric = std::move(metric);
    m.max_modes = 2000;
    m.resolution = 64;
    return m;
}

std::vector<double> require_positive_list(Section& s, const std::string& key, const std::vector<double>& fallback) {
    auto v = s.get<std::vector<double>>(key, fallback);
    for (double x : v) positive(x, s.key_path(key) + " entries");
    return v;
}

}  // namespace

ManifoldModel ModelBlock::build_model() const {
    std::string name = label.empty() ? kind : label;
    if (kind == "circle") return ManifoldModel::circle(radius, name);
    if (kind == "sphere") return ManifoldModel::sphere(radius, name);
    return ManifoldModel::flat_torus(dim, metric, name);
}

BasisRequest ModelBlock::request() const {
    BasisRequest r;
    r.cutoff = cutoff;
    r.max_modes = max_modes;
    r.hard_limit = hard_limit;
    return r;
}

Config parse_config(const json& j) {
    Section root(j, "");
    Config c;
    if (!root.has("schema_version")) throw ConfigError("config is missing schema_version");
    c.schema_version = root.get<int>("schema_version", 0);
    if (c.schema_version != kSchemaVersion)
        throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    c.seed = root.get<std::uint64_t>("seed", 0);
    c.out_dir = root.get<std::string>("out_dir", c.out_dir);

    ModelBlock base = default_model("torus", {1.0, 0.0, 0.0, 1.0});
    base.max_modes.reset();
    base.cutoff = 400.0;
    c.model = parse_model(root.child("model"), base);
    {
        Section models = root.child("models");
        c.model_a = parse_model(models.child("a"), default_model("square", {1.0, 0.0, 0.0, 1.0}));
        c.model_b = parse_model(models.child("b"), default_model("stretched", {1.0, 0.0, 0.0, 1.21}));
        models.finish();
    }
    {
        Section s = root.child("field");
        c.field.kind = s.get<std::string>("kind", c.field.kind);
        if (c.field.kind != "random" && c.field.kind != "mode") throw ConfigError("field.kind must be random or mode");
        c.field.seed = s.maybe<std::uint64_t>("seed");
        c.field.max_lambda = s.get<double>("max_lambda", c.field.max_lambda);
        c.field.index = s.get<std::size_t>("index", c.field.index);
        s.finish();
    }
    {
        Section s = root.child("multiplier");
        c.multiplier.name = s.get<std::string>("name", c.multiplier.name);
        Section p = s.child("params");
        auto& mp = c.multiplier.params;
        mp.m = p.get<double>("m", mp.m);
        mp.alpha = p.get<double>("alpha", mp.alpha);
        mp.t = p.get<double>("t", mp.t);
        mp.sigma = p.get<double>("sigma", mp.sigma);
        p.finish();
        s.finish();
    }
    {
        Section s = root.child("kernel");
        auto& k = c.kernel;
        k.generator = s.get<std::string>("generator", k.generator);
        k.m = s.get<double>("m", k.m);
        k.ts = require_positive_list(s, "ts", k.ts);
        k.t_points = s.get<int>("t_points", k.t_points);
        k.c = s.get<double>("c", k.c);
        positive(k.c, "kernel.c");
        if (k.t_points < 1) throw ConfigError("kernel.t_points must be at least 1");
        s.finish();
    }
    {
        Section s = root.child("boundcheck");
        auto& b = c.boundcheck;
        b.generator = s.get<std::string>("generator", b.generator);
        b.m = s.get<double>("m", b.m);
        b.ts = require_positive_list(s, "ts", b.ts);
        b.t_points = s.get<int>("t_points", b.t_points);
        b.c = s.get<double>("c", b.c);
        positive(b.c, "boundcheck.c");
        b.cs = require_positive_list(s, "cs", b.cs);
        b.refine = s.get<bool>("refine", b.refine);
        b.stability_tol = s.get<double>("stability_tol", b.stability_tol);
        positive(b.stability_tol, "boundcheck.stability_tol");
        if (b.t_points < 1) throw ConfigError("boundcheck.t_points must be at least 1");
        s.finish();
    }
    {
        Section s = root.child("subcheck");
        auto& q = c.subcheck;
        q.alphas = s.get<std::vector<double>>("alphas", q.alphas);
        for (double a : q.alphas)
            if (!(a > 0.0 && a < 1.0)) throw ConfigError("subcheck.alphas must lie in (0, 1)");
        q.mu_min = s.get<double>("mu_min", q.mu_min);
        q.mu_max = s.get<double>("mu_max", q.mu_max);
        positive(q.mu_min, "subcheck.mu_min");
        if (!(q.mu_max >= q.mu_min)) throw ConfigError("subcheck.mu_max must be at least mu_min");
        q.points = s.get<int>("points", q.points);
        if (q.points < 1) throw ConfigError("subcheck.points must be at least 1");
        q.tol = s.get<double>("tol", q.tol);
        positive(q.tol, "subcheck.tol");
        q.threshold = s.get<double>("threshold", q.threshold);
        positive(q.threshold, "subcheck.threshold");
        q.max_nodes = s.get<std::size_t>("max_nodes", q.max_nodes);
        s.finish();
    }
    {
        Section s = root.child("transmute");
        auto& t = c.transmute;
        t.t_min = s.get<double>("t_min", t.t_min);
        t.t_max = s.get<double>("t_max", t.t_max);
        positive(t.t_min, "transmute.t_min");
        if (!(t.t_max >= t.t_min)) throw ConfigError("transmute.t_max must be at least t_min");
        t.t_points = s.get<int>("t_points", t.t_points);
        t.lambda_min = s.get<double>("lambda_min", t.lambda_min);
        t.lambda_max = s.get<double>("lambda_max", t.lambda_max);
        if (!(t.lambda_min >= 0.0 && t.lambda_max >= t.lambda_min))
            throw ConfigError("transmute needs 0 <= lambda_min <= lambda_max");
        t.lambda_points = s.get<int>("lambda_points", t.lambda_points);
        if (t.t_points < 2 || t.lambda_points < 1) throw ConfigError("transmute grid needs t_points >= 2");
        t.threshold = s.get<double>("threshold", t.threshold);
        positive(t.threshold, "transmute.threshold");
        s.finish();
    }
    {
        Section s = root.child("calderon");
        auto& k = c.calderon;
        const ExperimentSpec d = default_experiment();
        const int dim = c.model_a.kind == "circle" ? 1 : c.model_a.dim;
        k.m = s.get<double>("m", d.m);
        if (k.m == 0.0) throw ConfigError("calderon.m must be nonzero");
        k.O = parse_ball(s.child("O"), d.O, dim);
        k.omega1 = parse_ball(s.child("omega1"), d.omega1, dim);
        k.omega2 = parse_ball(s.child("omega2"), d.omega2, dim);
        if (s.has("sources")) {
            const json& src = s.raw("sources");
            if (!src.is_array() || src.empty()) throw ConfigError("calderon.sources must be a nonempty array");
            for (std::size_t i = 0; i < src.size(); ++i)
                k.sources.push_back(parse_ball(Section(src[i], "calderon.sources[" + std::to_string(i) + "]"),
                                               Ball{d.omega1.center, 0.025}, dim));
        } else {
            k.sources = d.sources;
        }
        k.map = s.maybe<std::vector<std::vector<double>>>("map");
        if (k.map) {
            if (static_cast<int>(k.map->size()) != dim) throw ConfigError("calderon.map must be dim x dim");
            for (const auto& row : *k.map)
                if (static_cast<int>(row.size()) != dim) throw ConfigError("calderon.map must be dim x dim");
        }
        k.center_b = s.maybe<std::vector<double>>("center_b");
        if (k.center_b) point_from(*k.center_b, "calderon.center_b");
        k.s_points = s.get<int>("s_points", d.s_points);
        if (k.s_points < 3) throw ConfigError("calderon.s_points must be at least 3");
        k.s_min = s.get<double>("s_min", d.s_min);
        positive(k.s_min, "calderon.s_min");
        k.K = s.get<int>("K", d.K);
        if (k.K < 0) throw ConfigError("calderon.K must be nonnegative");
        k.null_floor = s.get<double>("null_floor", d.null_floor);
        positive(k.null_floor, "calderon.null_floor");
        k.leakage_bound = s.get<double>("leakage_bound", d.leakage_bound);
        positive(k.leakage_bound, "calderon.leakage_bound");
        k.hardy_ys = require_positive_list(s, "hardy_ys", d.hardy_ys);
        if (k.hardy_ys.empty()) throw ConfigError("calderon.hardy_ys must be nonempty");
        k.diagnostics = s.get<bool>("diagnostics", k.diagnostics);
        k.expected_verdict = s.maybe<std::string>("expected_verdict");
        if (k.expected_verdict && *k.expected_verdict != "indistinguishable" &&
            *k.expected_verdict != "distinguishable" && *k.expected_verdict != "inconclusive")
            throw ConfigError("calderon.expected_verdict must be indistinguishable, distinguishable or inconclusive");
        s.finish();
    }
    root.finish();
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const Config& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["model"] = model_json(c.model);
    j["models"] = {{"a", model_json(c.model_a)}, {"b", model_json(c.model_b)}};
    json f{{"kind", c.field.kind}, {"max_lambda", c.field.max_lambda}, {"index", c.field.index}};
    if (c.field.seed) f["seed"] = *c.field.seed;
    j["field"] = f;
    const auto& mp = c.multiplier.params;
    j["multiplier"] = {{"name", c.multiplier.name},
                       {"params", {{"m", mp.m}, {"alpha", mp.alpha}, {"t", mp.t}, {"sigma", mp.sigma}}}};
    j["kernel"] = {{"generator", c.kernel.generator}, {"m", c.kernel.m},        {"ts", c.kernel.ts},
                   {"t_points", c.kernel.t_points},   {"c", c.kernel.c}};
    const auto& b = c.boundcheck;
    j["boundcheck"] = {{"generator", b.generator}, {"m", b.m},   {"ts", b.ts},         {"t_points", b.t_points},
                       {"c", b.c},                 {"cs", b.cs}, {"refine", b.refine}, {"stability_tol", b.stability_tol}};
    const auto& q = c.subcheck;
    j["subcheck"] = {{"alphas", q.alphas}, {"mu_min", q.mu_min},       {"mu_max", q.mu_max},      {"points", q.points},
                     {"tol", q.tol},       {"threshold", q.threshold}, {"max_nodes", q.max_nodes}};
    const auto& t = c.transmute;
    j["transmute"] = {{"t_min", t.t_min},           {"t_max", t.t_max},           {"t_points", t.t_points},
                      {"lambda_min", t.lambda_min}, {"lambda_max", t.lambda_max}, {"lambda_points", t.lambda_points},
                      {"threshold", t.threshold}};
    const auto& k = c.calderon;
    const int dim = c.model_a.kind == "circle" ? 1 : c.model_a.dim;
    json cal{{"m", k.m},
             {"O", ball_json(k.O, dim)},
             {"omega1", ball_json(k.omega1, dim)},
             {"omega2", ball_json(k.omega2, dim)},
             {"s_points", k.s_points},
             {"s_min", k.s_min},
             {"K", k.K},
             {"null_floor", k.null_floor},
             {"leakage_bound", k.leakage_bound},
             {"hardy_ys", k.hardy_ys},
             {"diagnostics", k.diagnostics}};
    json src = json::array();
    for (const auto& s : k.sources) src.push_back(ball_json(s, dim));
    cal["sources"] = src;
    if (k.map) cal["map"] = *k.map;
    if (k.center_b) cal["center_b"] = *k.center_b;
    if (k.expected_verdict) cal["expected_verdict"] = *k.expected_verdict;
    j["calderon"] = cal;
    return j;
}

std::string config_digest(const json& resolved) {
    json keyed = resolved;
    if (keyed.is_object()) keyed.erase("out_dir");
    const std::string s = keyed.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentSpec experiment_spec(const Config& c) {
    ExperimentSpec s;
    auto setup = [](const ModelBlock& m) {
        ModelSetup out;
        out.model = m.build_model();
        out.request = m.request();
        out.resolution = m.resolution;
        out.remix_seed = m.remix_seed;
        return out;
    };
    s.a = setup(c.model_a);
    s.b = setup(c.model_b);
    const auto& k = c.calderon;
    s.m = k.m;
    s.O = k.O;
    s.omega1 = k.omega1;
    s.omega2 = k.omega2;
    s.sources = k.sources;
    if (k.map) {
        const auto n = static_cast<Eigen::Index>(k.map->size());
        Eigen::MatrixXd M(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index jj = 0; jj < n; ++jj) M(i, jj) = (*k.map)[i][jj];
        s.map = M;
    }
    if (k.center_b) s.center_b = point_from(*k.center_b, "calderon.center_b");
    s.s_points = k.s_points;
    s.s_min = k.s_min;
    s.K = k.K;
    s.null_floor = k.null_floor;
    s.leakage_bound = k.leakage_bound;
    s.hardy_ys = k.hardy_ys;
    return s;
}

}  // namespace clab
