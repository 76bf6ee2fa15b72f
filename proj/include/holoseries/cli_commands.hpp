#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace holoseries::cli {

/// One grid axis: "start:stop:count", a comma list, or a single number.
std::vector<double> parse_axis(const std::string& spec);

/// Semicolon-separated per-axis specs, expanded to the cartesian product
/// (last axis fastest). A single axis spec is accepted for n = 1.
std::vector<std::vector<double>> parse_points(const std::string& spec, int n);

enum class Method { taylor, qseries, logaffine, riccati, mc };
Method parse_method(const std::string& name);
std::string method_name(Method m);

struct ExpandOptions {
    std::string model_file;
    std::string u_spec = "1";  // one point: comma-separated components
    std::optional<double> eta;
    int r_max = 10;
    std::string out_file;  // empty = stdout
};

struct EvalOptionsCli {
    std::string model_file;
    Method method = Method::qseries;
    std::string s_spec = "1";
    std::string x_spec = "0";
    std::string u_spec = "1";
    std::optional<double> eta;
    int r_max = 40;
    double tol = 1e-10;
    std::uint64_t seed = 12345;
    std::size_t n_paths = 200000;
    std::optional<double> dt;
    std::string out_file;
};

struct CompareOptions {
    std::string model_file;
    std::vector<Method> methods;
    double compare_tol = 1e-6;
    std::string s_spec = "1";
    std::string x_spec = "0";
    std::string u_spec = "1";
    std::optional<double> eta;
    int r_max = 40;
    double tol = 1e-10;
    std::uint64_t seed = 12345;
    std::size_t n_paths = 200000;
    std::optional<double> dt;
    std::string out_file;
    /// Test hook: negate the drift in the model handed to this one method.
    std::optional<Method> skew_drift;
};

struct IdentitiesOptions {
    int k_max = 15;
    /// Test hook: corrupt one Stirling entry before running the suite.
    bool perturb_stirling = false;
};

int run_expand(const ExpandOptions& opts, std::ostream& out, std::ostream& err);
int run_eval(const EvalOptionsCli& opts, std::ostream& out, std::ostream& err);
int run_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err);
int run_identities(const IdentitiesOptions& opts, std::ostream& out, std::ostream& err);

} // namespace holoseries::cli
