#include "holoseries/cli_commands.hpp"

#include "holoseries/errors.hpp"
#include "holoseries/log_affine.hpp"
#include "holoseries/mc.hpp"
#include "holoseries/model_json.hpp"
#include "holoseries/riccati.hpp"
#include "holoseries/series.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace holoseries::cli {

using nlohmann::json;

std::vector<double> parse_axis(const std::string& spec) {
    if (spec.empty()) throw ConfigError("grid axis: empty spec");
    if (spec.find(':') != std::string::npos) {
        double start = 0, stop = 0;
        long count = 0;
        char extra = 0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%ld%c", &start, &stop, &count, &extra) != 3 ||
            count < 1) {
            throw ConfigError("grid axis: expected start:stop:count, got \"" + spec + "\"");
        }
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i) {
            out.push_back(count == 1 ? start
                                     : start + (stop - start) * static_cast<double>(i) /
                                                   static_cast<double>(count - 1));
        }
        return out;
    }
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("grid axis: cannot parse \"" + item + "\"");
        }
    }
    if (out.empty()) throw ConfigError("grid axis: empty spec");
    return out;
}

std::vector<std::vector<double>> parse_points(const std::string& spec, int n) {
    std::vector<std::vector<double>> axes;
    std::stringstream ss(spec);
    std::string axis;
    while (std::getline(ss, axis, ';')) axes.push_back(parse_axis(axis));
    if (static_cast<int>(axes.size()) != n) {
        throw ConfigError("grid: got " + std::to_string(axes.size()) + " axes for dimension " +
                          std::to_string(n));
    }
    std::vector<std::vector<double>> points{{}};
    for (const auto& ax : axes) {
        std::vector<std::vector<double>> next;
        next.reserve(points.size() * ax.size());
        for (const auto& p : points) {
            for (double v : ax) {
                auto q = p;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

Method parse_method(const std::string& name) {
    if (name == "taylor") return Method::taylor;
    if (name == "qseries") return Method::qseries;
    if (name == "logaffine") return Method::logaffine;
    if (name == "riccati") return Method::riccati;
    if (name == "mc") return Method::mc;
    throw ConfigError("unknown method \"" + name +
                      "\" (expected taylor|qseries|logaffine|riccati|mc)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::taylor: return "taylor";
        case Method::qseries: return "qseries";
        case Method::logaffine: return "logaffine";
        case Method::riccati: return "riccati";
        case Method::mc: return "mc";
    }
    return "?";
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct OutputSink {
    std::ofstream file;
    std::ostream* stream = nullptr;

    OutputSink(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            stream = &fallback;
        } else {
            file.open(path);
            if (!file) throw ConfigError("cannot open output file: " + path);
            stream = &file;
        }
    }
    std::ostream& get() { return *stream; }
};

struct Row {
    double s = 0.0;
    std::size_t x_index = 0;
    std::size_t u_index = 0;
    cplx value{0.0, 0.0};
    long n_terms = 0;
    double tail = 0.0;
    bool failed = false;
    std::string note;
};

struct GridEval {
    std::vector<double> s_values;
    std::vector<std::vector<double>> x_points;
    std::vector<std::vector<double>> u_points;
    std::vector<Row> rows;  // ordered s-major, then x, then u
};

struct EngineParams {
    std::optional<double> eta;
    int r_max = 40;
    double tol = 1e-10;
    std::uint64_t seed = 12345;
    std::size_t n_paths = 200000;
    std::optional<double> dt;
};

double resolve_eta(const GeneratorSpec& gen, const std::vector<double>& u,
                   const std::optional<double>& override_eta, double s_horizon, std::ostream& err,
                   std::string* provenance = nullptr) {
    if (override_eta) {
        if (!(*override_eta > 0.0)) throw ConfigError("eta must be > 0");
        if (provenance) *provenance = "user";
        return *override_eta;
    }
    RiccatiSolution sol = solve_riccati(gen, u, std::max(5.0, 2.0 * s_horizon), 1e-9);
    if (sol.blow_up_time) {
        err << "warning: Riccati trajectory blow-up near s = " << *sol.blow_up_time
            << "; d_star taken over the resolved range only\n";
    }
    const EtaSelection sel = select_eta(gen, sol);
    if (provenance) {
        *provenance = "oracle(d_star=" + fmt17(sel.d_star) + ", r_u=" + fmt17(sel.r_u) + ")";
    }
    return sel.eta;
}

void parallel_rows(std::size_t count, const std::function<void(std::size_t)>& body) {
    const int workers = std::min<int>(thread_budget(0), static_cast<int>(count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

cplx plane_wave(const std::vector<double>& u, const std::vector<double>& x) {
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * x[i];
    return std::polar(1.0, dot);
}

GridEval evaluate_grid(const ModelSpec& spec, Method method, const std::string& s_spec,
                       const std::string& x_spec, const std::string& u_spec,
                       const EngineParams& params, std::ostream& err) {
    const GeneratorSpec gen = to_generator(spec);
    const int n = gen.dim();

    GridEval grid;
    grid.s_values = parse_axis(s_spec);
    grid.x_points = parse_points(x_spec, n);
    grid.u_points = parse_points(u_spec, n);
    for (double s : grid.s_values) {
        if (s < 0.0) throw ConfigError("s grid: times must be >= 0");
    }

    const double s_max = *std::max_element(grid.s_values.begin(), grid.s_values.end());
    const std::size_t n_rows = grid.s_values.size() * grid.x_points.size() * grid.u_points.size();
    grid.rows.resize(n_rows);
    auto row_at = [&](std::size_t si, std::size_t xi, std::size_t ui) -> Row& {
        return grid.rows[(si * grid.x_points.size() + xi) * grid.u_points.size() + ui];
    };
    for (std::size_t si = 0; si < grid.s_values.size(); ++si) {
        for (std::size_t xi = 0; xi < grid.x_points.size(); ++xi) {
            for (std::size_t ui = 0; ui < grid.u_points.size(); ++ui) {
                Row& r = row_at(si, xi, ui);
                r.s = grid.s_values[si];
                r.x_index = xi;
                r.u_index = ui;
            }
        }
    }

    // truncation-tail sanity at the largest requested |u|
    double u_norm_max = 0.0;
    for (const auto& u : grid.u_points) {
        for (double v : u) u_norm_max = std::max(u_norm_max, std::abs(v));
    }
    const double tail = moment_tail_proxy(gen, u_norm_max);
    if (tail > 1e-6) {
        err << "warning: moment-series tail proxy " << fmt17(tail) << " at |u| = " << u_norm_max
            << " exceeds 1e-6; k_max = " << gen.k_max() << " may truncate too early\n";
    }

    EvalOptions eopts;
    eopts.tol = params.tol;
    eopts.max_terms = std::max(params.r_max, 16);

    switch (method) {
        case Method::taylor: {
            for (std::size_t ui = 0; ui < grid.u_points.size(); ++ui) {
                const SeriesExpansion g_seq = g_sequence(gen, grid.u_points[ui], params.r_max);
                if (g_seq.truncated) {
                    err << "warning: taylor coefficients truncated by the overflow guard at order "
                        << g_seq.coeffs.size() - 1 << "\n";
                }
                parallel_rows(grid.s_values.size() * grid.x_points.size(), [&](std::size_t i) {
                    const std::size_t si = i / grid.x_points.size();
                    const std::size_t xi = i % grid.x_points.size();
                    Row& r = row_at(si, xi, ui);
                    const EvalResult res =
                        taylor_eval(g_seq, gen, grid.x_points[xi], cplx(r.s, 0.0), eopts);
                    r.value = res.value;
                    r.n_terms = res.n_terms;
                    r.tail = res.tail_estimate;
                    if (!res.converged) r.note = "nonconverged";
                    if (res.radius_warning) r.note += (r.note.empty() ? "" : "+") + std::string("radius");
                });
            }
            break;
        }
        case Method::qseries:
        case Method::logaffine: {
            for (std::size_t ui = 0; ui < grid.u_points.size(); ++ui) {
                const double eta = resolve_eta(gen, grid.u_points[ui], params.eta, s_max, err);
                const SeriesExpansion h_seq = h_sequence(gen, grid.u_points[ui], eta, params.r_max);
                if (h_seq.truncated) {
                    err << "warning: series coefficients truncated by the overflow guard at order "
                        << h_seq.coeffs.size() - 1 << "\n";
                }
                std::optional<RhoSeries> rho;
                if (method == Method::logaffine) {
                    rho = rho_sequence(h_seq, static_cast<int>(h_seq.coeffs.size()) - 1);
                }
                parallel_rows(grid.s_values.size() * grid.x_points.size(), [&](std::size_t i) {
                    const std::size_t si = i / grid.x_points.size();
                    const std::size_t xi = i % grid.x_points.size();
                    Row& r = row_at(si, xi, ui);
                    const EvalResult res =
                        method == Method::qseries
                            ? q_series_eval(h_seq, grid.x_points[xi], r.s, eopts)
                            : log_affine_eval(*rho, grid.x_points[xi], r.s, eopts);
                    r.value = res.value;
                    r.n_terms = res.n_terms;
                    r.tail = res.tail_estimate;
                    if (res.diverging) { r.failed = true; r.note = "diverging"; }
                    else if (!res.converged) r.note = "nonconverged";
                });
            }
            break;
        }
        case Method::riccati: {
            for (std::size_t ui = 0; ui < grid.u_points.size(); ++ui) {
                const RiccatiSolution sol =
                    solve_riccati(gen, grid.u_points[ui], std::max(s_max, 1e-6), std::min(params.tol, 1e-9));
                parallel_rows(grid.s_values.size() * grid.x_points.size(), [&](std::size_t i) {
                    const std::size_t si = i / grid.x_points.size();
                    const std::size_t xi = i % grid.x_points.size();
                    Row& r = row_at(si, xi, ui);
                    try {
                        r.value = char_fn_riccati(sol, grid.x_points[xi], r.s);
                        r.n_terms = static_cast<long>(sol.grid.size());
                        r.tail = 0.0;
                    } catch (const NumericError& e) {
                        r.failed = true;
                        r.note = e.what();
                    }
                });
            }
            break;
        }
        case Method::mc: {
            const SdeModel sde = to_sde_model(spec);
            bool clamp_warned = false;
            for (std::size_t si = 0; si < grid.s_values.size(); ++si) {
                const double s = grid.s_values[si];
                for (std::size_t xi = 0; xi < grid.x_points.size(); ++xi) {
                    if (s == 0.0) {
                        for (std::size_t ui = 0; ui < grid.u_points.size(); ++ui) {
                            Row& r = row_at(si, xi, ui);
                            r.value = plane_wave(grid.u_points[ui], grid.x_points[xi]);
                            r.n_terms = 0;
                            r.tail = 0.0;
                        }
                        continue;
                    }
                    const double dt = params.dt ? *params.dt : s / 512.0;
                    const PathEnsemble paths = simulate_paths(sde, grid.x_points[xi], s,
                                                              params.n_paths, dt, params.seed);
                    if (paths.clamp_fraction > 0.01 && !clamp_warned) {
                        err << "warning: intensity/variance clamped on " << paths.clamp_fraction * 100.0
                            << "% of steps (reported once)\n";
                        clamp_warned = true;
                    }
                    for (std::size_t ui = 0; ui < grid.u_points.size(); ++ui) {
                        Row& r = row_at(si, xi, ui);
                        const MCEstimate est = mc_char_fn(paths, grid.u_points[ui]);
                        r.value = est.value;
                        r.n_terms = static_cast<long>(est.n_paths);
                        r.tail = est.se;
                    }
                }
            }
            break;
        }
    }
    return grid;
}

void write_result_header(std::ostream& os, int n, const std::vector<std::string>& value_cols) {
    os << "s";
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    for (int i = 1; i <= n; ++i) os << ",u_" << i;
    for (const auto& c : value_cols) os << "," << c;
    os << "\n";
}

void write_point_prefix(std::ostream& os, const GridEval& grid, const Row& r) {
    os << fmt17(r.s);
    for (double v : grid.x_points[r.x_index]) os << "," << fmt17(v);
    for (double v : grid.u_points[r.u_index]) os << "," << fmt17(v);
}

} // namespace

int run_expand(const ExpandOptions& opts, std::ostream& out, std::ostream& err) {
    const ModelSpec spec = parse_model_file(opts.model_file);
    const GeneratorSpec gen = to_generator(spec);
    const std::vector<double> u = parse_axis(opts.u_spec);
    if (static_cast<int>(u.size()) != gen.dim()) {
        throw ConfigError("expand: --u needs " + std::to_string(gen.dim()) +
                          " comma-separated components");
    }

    std::string provenance;
    const double eta = resolve_eta(gen, u, opts.eta, 1.0, err, &provenance);
    const SeriesExpansion g_seq = g_sequence(gen, u, opts.r_max);
    const SeriesExpansion h_seq = h_sequence(gen, u, eta, opts.r_max);
    const RhoSeries rho = rho_sequence(h_seq, static_cast<int>(h_seq.coeffs.size()) - 1);

    auto poly_json = [](const SeriesExpansion& seq) {
        json arr = json::array();
        for (std::size_t r = 0; r < seq.coeffs.size(); ++r) {
            json terms = json::array();
            for (const auto& [gamma, c] : seq.coeffs[r].terms()) {
                terms.push_back({{"gamma", gamma.exponents()}, {"re", c.real()}, {"im", c.imag()}});
            }
            arr.push_back({{"order", r}, {"terms", std::move(terms)}});
        }
        return arr;
    };

    json doc;
    doc["u"] = u;
    doc["eta"] = eta;
    doc["eta_provenance"] = provenance;
    doc["g"] = poly_json(g_seq);
    doc["h"] = poly_json(h_seq);
    json rho0 = json::array(), rho1 = json::array();
    for (std::size_t k = 0; k < rho.rho0.size(); ++k) {
        rho0.push_back({{"re", rho.rho0[k].real()}, {"im", rho.rho0[k].imag()}});
        json comps = json::array();
        for (const cplx& c : rho.rho1[k]) comps.push_back({{"re", c.real()}, {"im", c.imag()}});
        rho1.push_back(std::move(comps));
    }
    doc["rho0"] = std::move(rho0);
    doc["rho1"] = std::move(rho1);
    doc["truncated"] = g_seq.truncated || h_seq.truncated;

    OutputSink sink(opts.out_file, out);
    sink.get() << doc.dump(2) << "\n";
    return 0;
}

int run_eval(const EvalOptionsCli& opts, std::ostream& out, std::ostream& err) {
    const ModelSpec spec = parse_model_file(opts.model_file);
    EngineParams params{opts.eta, opts.r_max, opts.tol, opts.seed, opts.n_paths, opts.dt};
    const GridEval grid =
        evaluate_grid(spec, opts.method, opts.s_spec, opts.x_spec, opts.u_spec, params, err);

    OutputSink sink(opts.out_file, out);
    std::ostream& os = sink.get();
    write_result_header(os, spec.parts.n, {"re_phat", "im_phat", "method", "n_terms", "tail_estimate"});
    std::size_t failures = 0;
    for (const Row& r : grid.rows) {
        write_point_prefix(os, grid, r);
        if (r.failed) {
            ++failures;
            os << ",nan,nan," << method_name(opts.method) << ",0,nan\n";
        } else {
            os << "," << fmt17(r.value.real()) << "," << fmt17(r.value.imag()) << ","
               << method_name(opts.method) << "," << r.n_terms << "," << fmt17(r.tail) << "\n";
        }
        if (!r.note.empty()) {
            err << "note: row s=" << r.s << " x#" << r.x_index << " u#" << r.u_index << ": "
                << r.note << "\n";
        }
    }
    if (failures) err << failures << " row(s) failed\n";
    return 0;
}

int run_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.methods.size() < 2) throw ConfigError("compare: need at least two methods");
    const ModelSpec base = parse_model_file(opts.model_file);
    EngineParams params{opts.eta, opts.r_max, opts.tol, opts.seed, opts.n_paths, opts.dt};

    std::vector<GridEval> evals;
    evals.reserve(opts.methods.size());
    for (Method m : opts.methods) {
        ModelSpec spec = base;
        if (opts.skew_drift && *opts.skew_drift == m) {
            for (double& v : spec.parts.drift_const) v = -v;
            for (auto& row : spec.parts.drift_linear) {
                for (double& v : row) v = -v;
            }
        }
        evals.push_back(evaluate_grid(spec, m, opts.s_spec, opts.x_spec, opts.u_spec, params, err));
    }

    OutputSink sink(opts.out_file, out);
    std::ostream& os = sink.get();
    std::vector<std::string> cols;
    for (Method m : opts.methods) {
        cols.push_back("re_" + method_name(m));
        cols.push_back("im_" + method_name(m));
    }
    for (std::size_t m = 1; m < opts.methods.size(); ++m) {
        cols.push_back("absdiff_" + method_name(opts.methods[m]));
    }
    write_result_header(os, base.parts.n, cols);

    std::vector<double> max_diff(opts.methods.size(), 0.0);
    bool any_failed = false;
    const GridEval& ref = evals.front();
    for (std::size_t i = 0; i < ref.rows.size(); ++i) {
        write_point_prefix(os, ref, ref.rows[i]);
        for (const GridEval& ev : evals) {
            const Row& r = ev.rows[i];
            if (r.failed) os << ",nan,nan";
            else os << "," << fmt17(r.value.real()) << "," << fmt17(r.value.imag());
        }
        for (std::size_t m = 1; m < evals.size(); ++m) {
            const Row& a = ref.rows[i];
            const Row& b = evals[m].rows[i];
            if (a.failed || b.failed) {
                any_failed = true;
                os << ",nan";
            } else {
                const double d = std::abs(a.value - b.value);
                max_diff[m] = std::max(max_diff[m], d);
                os << "," << fmt17(d);
            }
        }
        os << "\n";
    }

    bool violated = any_failed;
    for (std::size_t m = 1; m < opts.methods.size(); ++m) {
        err << "max |" << method_name(opts.methods.front()) << " - " << method_name(opts.methods[m])
            << "| = " << fmt17(max_diff[m]) << (max_diff[m] > opts.compare_tol ? "  EXCEEDS " : "  within ")
            << fmt17(opts.compare_tol) << "\n";
        if (max_diff[m] > opts.compare_tol) violated = true;
    }
    if (any_failed) err << "comparison contains failed rows\n";
    return violated ? 1 : 0;
}

int run_identities(const IdentitiesOptions& opts, std::ostream& out, std::ostream& err) {
    (void)err;
    if (opts.k_max < 0) throw ConfigError("identities: k_max must be >= 0");
    bool all_pass = true;
    auto report = [&](const std::string& name, bool pass, const std::string& detail) {
        out << (pass ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : "  (" + detail + ")")
            << "\n";
        all_pass = all_pass && pass;
    };

    if (opts.k_max == 0) {
        out << "PASS (vacuous: k_max = 0)\n";
        return 0;
    }

    StirlingTable table(opts.k_max);
    if (opts.perturb_stirling) table.perturb(std::min(3, opts.k_max), 1, 1);

    {
        bool ok = true;
        int bad_k = -1;
        for (int k = 0; k <= opts.k_max && ok; ++k) {
            BigInt fact = 1;
            for (int i = 2; i <= k; ++i) fact *= i;
            if (table.row_sum(k) != fact) { ok = false; bad_k = k; }
        }
        report("stirling-row-sums", ok, ok ? "k <= " + std::to_string(opts.k_max)
                                           : "first failure at k = " + std::to_string(bad_k));
    }
    {
        std::mt19937_64 rng(916151);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        double worst = 0.0;
        for (int k = 1; k <= opts.k_max; ++k) {
            double k_fact = 1.0;
            for (int i = 2; i <= k; ++i) k_fact *= i;
            for (int trial = 0; trial < 20; ++trial) {
                const double z = dist(rng);
                double prod = 1.0, horner = 0.0;
                for (int r = 0; r < k; ++r) prod *= (z + r);
                for (int r = k; r >= 0; --r) horner = horner * z + table.entry_double(k, r);
                worst = std::max(worst, std::abs(prod - horner) / k_fact);
            }
        }
        report("stirling-product-identity", worst <= 1e-9, "max residual/k! = " + fmt17(worst));
    }
    {
        bool ok = true;
        for (int k = 0; k <= std::min(opts.k_max, 15); ++k) ok = ok && check_derivative_identity(k);
        report("derivative-identity", ok, "exact, k <= " + std::to_string(std::min(opts.k_max, 15)));
    }
    {
        bool exact_ok = true;
        double worst = 0.0;
        std::mt19937_64 rng(405060);
        std::uniform_real_distribution<double> dist(-5.0, 5.0);
        for (int k = 1; k <= std::min(opts.k_max, 8); ++k) {
            for (int m = -k; m <= 0; ++m) {
                if (check_factorial_shift_identity(k, static_cast<double>(m)) != 0.0) exact_ok = false;
            }
            double kp1_fact = 1.0;
            for (int i = 2; i <= k + 1; ++i) kp1_fact *= i;
            for (int trial = 0; trial < 50; ++trial) {
                worst = std::max(worst, check_factorial_shift_identity(k, dist(rng)) / kp1_fact);
            }
        }
        report("factorial-shift-identity", exact_ok && worst <= 1e-9,
               "integer nodes exact, max random residual/(k+1)! = " + fmt17(worst));
    }
    {
        // derivative-matching system on two built-in diffusion models
        const int k_chk = std::min(opts.k_max, 20);
        double worst = 0.0;
        auto run_model = [&](const GeneratorSpec& gen, double eta) {
            const std::vector<double> u{1.0};
            const SeriesExpansion g_seq = g_sequence(gen, u, k_chk);
            const SeriesExpansion h_seq = h_sequence(gen, u, eta, k_chk);
            const std::vector<std::vector<double>> probes{{-0.5}, {0.0}, {0.5}};
            worst = std::max(worst, verify_qsys(h_seq, g_seq, gen, k_chk, probes));
        };
        ModelParts bm;
        bm.n = 1;
        bm.drift_const = {0.0};
        bm.drift_linear = {{0.0}};
        bm.diff_const = {{1.0}};
        bm.diff_linear = {{{0.0}}};
        bm.domain = Box{{-1.0}, {1.0}};
        bm.k_max = 2;
        run_model(build_generator(bm), 1.0);
        ModelParts ou = bm;
        ou.drift_linear = {{-1.0}};
        ou.diff_const = {{2.0}};
        run_model(build_generator(ou), 1.0);
        report("derivative-system", worst <= 1e-10, "max normalized residual = " + fmt17(worst));
    }
    return all_pass ? 0 : 1;
}

} // namespace holoseries::cli
