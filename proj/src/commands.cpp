#include "clab/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "clab/calderon.hpp"
#include "clab/errors.hpp"
#include "clab/heat.hpp"
#include "clab/quadrature.hpp"
#include "clab/subordinate.hpp"
#include "clab/transmute.hpp"

namespace clab {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string coords(const Point& p, int dim) {
    std::string s;
    for (int i = 0; i < dim; ++i) {
        if (i) s += ' ';
        s += num(p.x[i]);
    }
    return s;
}

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) { row(header); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Run {
public:
    Run(std::string command, const Config& cfg, const RunOptions& opt)
        : command_(std::move(command)), cfg_(cfg), opt_(opt), dir_(cfg.out_dir) {
        std::filesystem::create_directories(dir_);
        start_ = last_ = std::chrono::steady_clock::now();
    }

    void stage(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        timings_[name] = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        if (opt_.verbose) std::cerr << "[" << command_ << "] " << name << " " << timings_[name] << " s\n";
    }

    void write(const std::string& file, const Csv& csv) {
        std::ofstream f(dir_ / file, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir_ / file).string());
        f << csv.str();
        outputs_.push_back(file);
    }

    void check(const std::string& name, bool ok, json value = nullptr, json threshold = nullptr) {
        checks_.push_back({{"name", name}, {"pass", ok}, {"value", value}, {"threshold", threshold}});
        if (!ok) pass_ = false;
    }

    json& results() { return results_; }

    RunResult finish() {
        const json resolved = to_json(cfg_);
        json report{{"tool", "clab"},
                    {"version", kToolVersion},
                    {"command", command_},
                    {"config_digest", config_digest(resolved)},
                    {"config", resolved},
                    {"seed", cfg_.seed},
                    {"threads", default_threads()},
                    {"results", results_},
                    {"checks", checks_},
                    {"pass", pass_}};
        timings_["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        report["timings"] = timings_;
        report["outputs"] = outputs_;
        std::ofstream f(dir_ / "report.json", std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir_ / "report.json").string());
        f << report.dump(2) << '\n';
        return {report, pass_, outputs_};
    }

private:
    std::string command_;
    const Config& cfg_;
    RunOptions opt_;
    std::filesystem::path dir_;
    std::chrono::steady_clock::time_point start_, last_;
    std::map<std::string, double> timings_;
    json results_ = json::object();
    json checks_ = json::array();
    std::vector<std::string> outputs_;
    bool pass_ = true;
};

struct Setup {
    ManifoldModel model;
    BasisPtr basis;
    QuadratureGrid grid;
};

Setup setup_model(const ModelBlock& block, bool exact_grid) {
    const ManifoldModel model = block.build_model();
    auto basis = build_basis(model, block.request());
    if (block.remix_seed) basis = basis.remixed(*block.remix_seed);
    auto ptr = std::make_shared<const SpectralBasis>(std::move(basis));
    const int res = block.resolution > 0 ? block.resolution : ptr->min_resolution();
    QuadratureGrid grid = exact_grid ? build_grid(model, res, *ptr) : build_grid(model, res);
    return {model, ptr, std::move(grid)};
}

json basis_json(const SpectralBasis& b) {
    return {{"model", b.model().label()},
            {"kind", b.model().kind_name()},
            {"modes", b.size()},
            {"eigenspaces", b.eigenspaces().size()},
            {"cutoff", b.cutoff()},
            {"max_eigenvalue", b.max_eigenvalue()}};
}

std::vector<double> time_samples(const std::vector<double>& ts, int points, const SpectralBasis& basis,
                                 const Generator& gen) {
    if (!ts.empty()) return ts;
    const double lo = minimum_time(basis, gen) * (1.0 + 1e-12);
    return points == 1 ? std::vector<double>{lo} : logspace(lo, std::max(1.0, 2.0 * lo), points);
}

void bound_csv(Run& run, const std::string& file, const BoundFit& fit, int dim) {
    Csv csv({"t", "x", "y", "d", "K", "bound", "ratio"});
    for (const auto& r : fit.rows)
        csv.row({num(r.t), coords(r.x, dim), coords(r.y, dim), num(r.d), num(r.K), num(r.bound), num(r.ratio)});
    run.write(file, csv);
}

json fit_json(const BoundFit& fit, int dim) {
    return {{"c", fit.c},
            {"C", finite_or_null(fit.C)},
            {"n", fit.n},
            {"log_C", finite_or_null(fit.sup_ratio_log)},
            {"argmax", {{"t", fit.argmax.t}, {"x", coords(fit.argmax.x, dim)}, {"y", coords(fit.argmax.y, dim)}}},
            {"argmax_distance", fit.argmax_distance},
            {"samples", fit.sample_count}};
}

// ---------------------------------------------------------------- commands

RunResult cmd_spectrum(const Config& cfg, const RunOptions& opt) {
    Run run("spectrum", cfg, opt);
    const ManifoldModel model = cfg.model.build_model();
    const auto basis = make_basis(model, cfg.model.request());
    run.stage("basis");
    Csv csv({"k", "lambda", "multiplicity"});
    bool sorted = true;
    const auto& sp = basis->eigenspaces();
    for (std::size_t k = 0; k < sp.size(); ++k) {
        csv.row({std::to_string(k), num(sp[k].eigenvalue), std::to_string(sp[k].multiplicity)});
        if (k && !(sp[k].eigenvalue > sp[k - 1].eigenvalue)) sorted = false;
    }
    run.write("spectrum.csv", csv);
    run.results()["basis"] = basis_json(*basis);
    run.results()["weyl_estimate"] = weyl_count(model, basis->cutoff());
    run.check("eigenvalues strictly increasing", sorted);
    run.stage("output");
    return run.finish();
}

RunResult cmd_apply(const Config& cfg, const RunOptions& opt) {
    Run run("apply", cfg, opt);
    const Setup s = setup_model(cfg.model, true);
    const auto mult = SpectralMultiplier::named(cfg.multiplier.name, cfg.multiplier.params);
    run.stage("setup");
    const Field u = cfg.field.kind == "mode" ? Field::mode(s.basis, cfg.field.index)
                                             : Field::random(s.basis, cfg.field.seed.value_or(cfg.seed),
                                                             cfg.field.max_lambda);
    Field out_re = Field::zero(s.basis), out_im = Field::zero(s.basis);
    if (mult.is_complex()) {
        const ComplexField c = apply_complex(u, mult);
        out_re = c.real();
        out_im = c.imag();
    } else {
        out_re = apply_multiplier(u, mult);
    }
    run.stage("apply");
    const int dim = s.model.dimension();
    const auto vin = synthesize(u, s.grid);
    const auto vre = synthesize(out_re, s.grid);
    const auto vim = mult.is_complex() ? synthesize(out_im, s.grid) : std::vector<double>{};
    std::vector<std::string> head{"node", "x", "input", "output"};
    if (mult.is_complex()) head.push_back("output_imag");
    Csv nodal(head);
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        std::vector<std::string> r{std::to_string(i), coords(s.grid.nodes[i], dim), num(vin[i]), num(vre[i])};
        if (mult.is_complex()) r.push_back(num(vim[i]));
        nodal.row(r);
    }
    run.write("field.csv", nodal);
    head = {"j", "lambda", "input", "output"};
    if (mult.is_complex()) head.push_back("output_imag");
    Csv coef(head);
    bool finite = true;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const auto J = static_cast<Eigen::Index>(j);
        std::vector<std::string> r{std::to_string(j), num(s.basis->mode_eigenvalues()[j]), num(u.coeffs[J]),
                                   num(out_re.coeffs[J])};
        finite = finite && std::isfinite(out_re.coeffs[J]);
        if (mult.is_complex()) r.push_back(num(out_im.coeffs[J]));
        coef.row(r);
    }
    run.write("coefficients.csv", coef);
    run.results()["basis"] = basis_json(*s.basis);
    run.results()["multiplier"] = mult.name();
    run.results()["input_norm"] = u.norm();
    run.results()["output_norm"] = std::hypot(out_re.norm(), out_im.norm());
    run.results()["grid_nodes"] = s.grid.size();
    run.check("output coefficients finite", finite);
    run.stage("output");
    return run.finish();
}

RunResult bound_run(const std::string& name, const Config& cfg, const RunOptions& opt, bool full) {
    Run run(name, cfg, opt);
    const std::string gname = full ? cfg.boundcheck.generator : cfg.kernel.generator;
    const double m = full ? cfg.boundcheck.m : cfg.kernel.m;
    const double c = full ? cfg.boundcheck.c : cfg.kernel.c;
    const Generator gen = Generator::parse(gname, m);
    const Setup s = setup_model(cfg.model, false);
    const int dim = s.model.dimension();
    const auto ts = time_samples(full ? cfg.boundcheck.ts : cfg.kernel.ts,
                                 full ? cfg.boundcheck.t_points : cfg.kernel.t_points, *s.basis, gen);
    run.stage("setup");
    const auto samples = bound_samples(s.grid, ts);
    const BoundFit fit = fit_bound(*s.basis, samples, c, gen);
    run.stage("fit");
    bound_csv(run, name == "kernel" ? "kernel.csv" : "bound.csv", fit, dim);
    run.results()["basis"] = basis_json(*s.basis);
    run.results()["generator"] = gen.name();
    run.results()["ts"] = ts;
    run.results()["fit"] = fit_json(fit, dim);
    run.check("fitted constant finite", std::isfinite(fit.C), finite_or_null(fit.C));
    if (full) {
        const auto sweep = bound_sweep(*s.basis, samples, cfg.boundcheck.cs, gen);
        Csv csv({"c", "C"});
        for (std::size_t i = 0; i < sweep.cs.size(); ++i) csv.row({num(sweep.cs[i]), num(sweep.Cs[i])});
        run.write("sweep.csv", csv);
        run.results()["sweep_nondecreasing"] = sweep.nondecreasing;
        run.stage("sweep");
        if (cfg.boundcheck.refine) {
            ModelBlock fine = cfg.model;
            if (fine.cutoff) *fine.cutoff *= 2.0;
            if (fine.max_modes) *fine.max_modes *= 2;
            fine.resolution = 2 * s.grid.resolution;
            const Setup f = setup_model(fine, false);
            const BoundFit ffit = fit_bound(*f.basis, bound_samples(f.grid, ts), c, gen);
            const double change = std::abs(ffit.C - fit.C) / fit.C;
            run.results()["refined"] = {{"basis", basis_json(*f.basis)},
                                        {"grid_resolution", f.grid.resolution},
                                        {"fit", fit_json(ffit, dim)},
                                        {"relative_change", finite_or_null(change)}};
            run.check("C stable under doubled grid and cutoff", change < cfg.boundcheck.stability_tol,
                      finite_or_null(change), cfg.boundcheck.stability_tol);
            run.stage("refine");
        }
    }
    return run.finish();
}

RunResult cmd_subcheck(const Config& cfg, const RunOptions& opt) {
    Run run("subcheck", cfg, opt);
    const auto& q = cfg.subcheck;
    const auto mus = q.points == 1 ? std::vector<double>{q.mu_min} : logspace(q.mu_min, q.mu_max, q.points);
    Csv csv({"mu", "alpha", "exact", "quadrature", "rel_err", "nodes"});
    double worst = 0.0;
    std::size_t most = 0;
    json schemes = json::array();
    for (double alpha : q.alphas) {
        const auto scheme = build_scheme(alpha, q.mu_min, q.mu_max, q.tol);
        most = std::max(most, scheme.size());
        schemes.push_back({{"alpha", alpha},
                           {"nodes", scheme.size()},
                           {"nodes_per_panel", scheme.nodes_per_panel},
                           {"self_check_error", scheme.self_check_error}});
        for (double mu : mus) {
            const double exact = std::pow(mu, -alpha);
            const double quad = scalar_subordinate(mu, alpha, scheme);
            const double err = std::abs(quad - exact) / exact;
            worst = std::max(worst, err);
            csv.row({num(mu), num(alpha), num(exact), num(quad), num(err), std::to_string(scheme.size())});
        }
    }
    run.stage("schemes");
    run.write("subcheck.csv", csv);
    run.results()["schemes"] = schemes;
    run.results()["max_rel_err"] = worst;
    run.check("relative error within threshold", worst <= q.threshold, worst, q.threshold);
    run.check("node count within limit", most <= q.max_nodes, most, q.max_nodes);
    return run.finish();
}

RunResult cmd_transmute(const Config& cfg, const RunOptions& opt) {
    Run run("transmute", cfg, opt);
    const auto& t = cfg.transmute;
    const auto ts = logspace(t.t_min, t.t_max, t.t_points);
    const auto ls = t.lambda_points == 1 ? std::vector<double>{t.lambda_min}
                                         : linspace(t.lambda_min, t.lambda_max, t.lambda_points);
    const auto sweep = transmute_sweep(ts, ls);
    run.stage("sweep");
    Csv csv({"identity", "t", "lambda", "lhs", "log_lhs", "log_integral", "realline", "derived_prefactor",
             "residual"});
    for (const auto& r : sweep.rows)
        csv.row({r.identity, num(r.t), num(r.lambda), num(r.lhs), num(r.log_lhs), num(r.log_integral),
                 num(r.realline), num(r.derived_prefactor), num(r.residual)});
    run.write("transmute.csv", csv);
    const Prefactor printed = Prefactor::printed();
    Csv fit({"a", "p", "printed_a", "printed_p", "max_residual", "max_printed_residual"});
    fit.row({num(sweep.fit.a), num(sweep.fit.p), num(printed.a), num(printed.p), num(sweep.max_residual),
             num(sweep.max_printed_residual)});
    run.write("prefactor.csv", fit);
    const bool matches = std::abs(sweep.fit.p - printed.p) < 1e-3;
    run.results()["fit"] = {{"a", sweep.fit.a}, {"p", sweep.fit.p}};
    run.results()["printed"] = {{"a", printed.a}, {"p", printed.p}};
    run.results()["exponent_matches_printed"] = matches;
    run.results()["max_residual"] = sweep.max_residual;
    run.results()["max_printed_residual"] = sweep.max_printed_residual;
    run.results()["max_realline_deviation"] = finite_or_null(sweep.max_realline_deviation);
    run.results()["realline_checked"] = sweep.realline_checked;
    run.results()["local_exponent_spread"] = sweep.local_exponent_spread;
    run.check("fitted prefactor satisfies both identities", sweep.max_residual <= t.threshold, sweep.max_residual,
              t.threshold);
    return run.finish();
}

RunResult cmd_calderon(const Config& cfg, const RunOptions& opt) {
    Run run("calderon", cfg, opt);
    const ExperimentSpec spec = experiment_spec(cfg);
    const ExperimentReport rep = distinguish(spec, cfg.calderon.diagnostics);
    run.stage("distinguish");
    const int dim = spec.a.model.dimension();
    Csv d({"source", "center", "radius", "absolute", "relative", "leakage_a", "leakage_b"});
    json sources = json::array();
    for (std::size_t i = 0; i < rep.sources.size(); ++i) {
        const auto& s = rep.sources[i];
        d.row({std::to_string(i), coords(s.ball.center, dim), num(s.ball.radius), num(s.discrepancy.absolute),
               num(s.discrepancy.relative), num(s.leakage_a), num(s.leakage_b)});
        sources.push_back({{"absolute", s.discrepancy.absolute},
                           {"relative", s.discrepancy.relative},
                           {"leakage_a", s.leakage_a},
                           {"leakage_b", s.leakage_b}});
    }
    run.write("discrepancies.csv", d);
    auto& r = run.results();
    r["model_a"] = {{"label", rep.model_a}, {"modes", rep.modes_a}, {"cutoff", rep.cutoff_a}};
    r["model_b"] = {{"label", rep.model_b}, {"modes", rep.modes_b}, {"cutoff", rep.cutoff_b}};
    r["observation_nodes"] = rep.observation_nodes;
    r["isometry_defect"] = rep.isometry_defect;
    r["separation"] = rep.separation;
    r["sources"] = sources;
    r["null_residual"] = rep.null_residual;
    r["null_threshold"] = rep.null_threshold;
    r["max_discrepancy"] = rep.max_discrepancy;
    r["verdict"] = rep.verdict;
    if (cfg.calderon.diagnostics) {
        Csv phi({"node", "s", "phi"});
        for (Eigen::Index i = 0; i < rep.phi.values.rows(); ++i)
            for (std::size_t j = 0; j < rep.phi.s.size(); ++j)
                phi.row({std::to_string(i), num(rep.phi.s[j]), num(rep.phi.values(i, static_cast<Eigen::Index>(j)))});
        run.write("phi.csv", phi);
        Csv mom({"node", "k", "moment", "error"});
        for (Eigen::Index i = 0; i < rep.moments.values.rows(); ++i)
            for (int k = 0; k <= rep.moments.K; ++k)
                mom.row({std::to_string(i), std::to_string(k), num(rep.moments.values(i, k)),
                         num(rep.moments.errors(i, k))});
        run.write("moments.csv", mom);
        Csv ln({"y", "line_norm"});
        for (std::size_t i = 0; i < rep.hardy.ys.size(); ++i) ln.row({num(rep.hardy.ys[i]), num(rep.hardy.line_norms[i])});
        run.write("line_norms.csv", ln);
        Csv hz({"re_z", "im_z", "re_f", "im_f"});
        for (std::size_t i = 0; i < rep.hardy.z.size(); ++i)
            hz.row({num(rep.hardy.z[i].real()), num(rep.hardy.z[i].imag()), num(rep.hardy.f[i].real()),
                    num(rep.hardy.f[i].imag())});
        run.write("hardy.csv", hz);
        std::vector<json> mmax;
        for (double v : rep.moments.max_abs) mmax.push_back(finite_or_null(v));
        r["s_max"] = rep.s_max;
        r["moments"] = {{"K", rep.moments.K},
                        {"max_abs", mmax},
                        {"max_admissible_K", rep.moments.max_admissible},
                        {"decay_rate_c1", rep.moments.c1},
                        {"K_admissible", rep.moments.K <= rep.moments.max_admissible}};
        r["hardy"] = {{"morera_max", rep.hardy.morera_max},
                      {"line_norms_monotone", rep.hardy.line_norms_monotone},
                      {"phi_norm", rep.hardy.phi_norm}};
        r["paley_wiener"] = {{"sup_line_norm", rep.paley_wiener.sup_line_norm},
                             {"phi_norm", rep.paley_wiener.phi_norm},
                             {"relative_gap", rep.paley_wiener.relative_gap},
                             {"monotone", rep.paley_wiener.monotone},
                             {"y_range_ok", rep.paley_wiener.y_range_ok},
                             {"warning", rep.paley_wiener.warning}};
        run.stage("output");
    }
    run.check("verdict is not inconclusive", rep.verdict != "inconclusive", rep.verdict);
    if (cfg.calderon.expected_verdict)
        run.check("verdict matches expectation", rep.verdict == *cfg.calderon.expected_verdict, rep.verdict,
                  *cfg.calderon.expected_verdict);
    return run.finish();
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"spectrum", "apply",     "kernel",  "boundcheck",
                                                "subcheck", "transmute", "calderon"};
    return names;
}

RunResult run_command(const std::string& name, Config config, const RunOptions& options) {
    if (options.out_dir) config.out_dir = *options.out_dir;
    if (options.seed) config.seed = *options.seed;
    if (options.threads > 0) set_default_threads(options.threads);
    if (name == "spectrum") return cmd_spectrum(config, options);
    if (name == "apply") return cmd_apply(config, options);
    if (name == "kernel") return bound_run("kernel", config, options, false);
    if (name == "boundcheck") return bound_run("boundcheck", config, options, true);
    if (name == "subcheck") return cmd_subcheck(config, options);
    if (name == "transmute") return cmd_transmute(config, options);
    if (name == "calderon") return cmd_calderon(config, options);
    throw ValidationError("unknown command '" + name + "'");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const ResourceError*>(&e) || dynamic_cast<const ConfigError*>(&e))
        return 2;
    return 3;
}

}  // namespace clab
