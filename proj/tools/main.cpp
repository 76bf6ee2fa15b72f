#include "holoseries/cli_commands.hpp"
#include "holoseries/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cli = holoseries::cli;

int main(int argc, char** argv) {
    CLI::App app{"holoseries: characteristic functions of affine jump-diffusions by series expansion"};
    app.require_subcommand(1);

    cli::ExpandOptions expand;
    auto* cmd_expand = app.add_subcommand("expand", "dump g/h/rho coefficient tables as JSON");
    cmd_expand->add_option("--model", expand.model_file, "model JSON file")->required();
    cmd_expand->add_option("--u", expand.u_spec, "transform point (comma-separated components)");
    double expand_eta = 0.0;
    auto* expand_eta_opt = cmd_expand->add_option("--eta", expand_eta, "series scale override");
    cmd_expand->add_option("--rmax", expand.r_max, "number of coefficient orders");
    cmd_expand->add_option("--out", expand.out_file, "output file (default stdout)");

    cli::EvalOptionsCli eval;
    std::string eval_method = "qseries";
    auto* cmd_eval = app.add_subcommand("eval", "evaluate the transform on an (s, x, u) grid");
    cmd_eval->add_option("--model", eval.model_file, "model JSON file")->required();
    cmd_eval->add_option("--method", eval_method, "taylor|qseries|logaffine|riccati|mc");
    cmd_eval->add_option("--s", eval.s_spec, "time axis: start:stop:count or comma list");
    cmd_eval->add_option("--x", eval.x_spec, "state grid, ';' between axes");
    cmd_eval->add_option("--u", eval.u_spec, "transform grid, ';' between axes");
    double eval_eta = 0.0;
    auto* eval_eta_opt = cmd_eval->add_option("--eta", eval_eta, "series scale override");
    cmd_eval->add_option("--rmax", eval.r_max, "coefficient orders");
    cmd_eval->add_option("--tol", eval.tol, "series stopping tolerance / ODE rtol");
    cmd_eval->add_option("--seed", eval.seed, "Monte Carlo seed");
    cmd_eval->add_option("--paths", eval.n_paths, "Monte Carlo path count");
    double eval_dt = 0.0;
    auto* eval_dt_opt = cmd_eval->add_option("--dt", eval_dt, "Monte Carlo step (default s/512)");
    cmd_eval->add_option("--out", eval.out_file, "output CSV file (default stdout)");

    cli::CompareOptions cmp;
    std::vector<std::string> cmp_methods{"qseries", "riccati"};
    std::string cmp_skew;
    auto* cmd_compare = app.add_subcommand("compare", "evaluate several methods and diff them");
    cmd_compare->add_option("--model", cmp.model_file, "model JSON file")->required();
    cmd_compare->add_option("--methods", cmp_methods, "two or more methods")->delimiter(',');
    cmd_compare->add_option("--compare-tol", cmp.compare_tol, "max allowed |difference|");
    cmd_compare->add_option("--s", cmp.s_spec, "time axis");
    cmd_compare->add_option("--x", cmp.x_spec, "state grid");
    cmd_compare->add_option("--u", cmp.u_spec, "transform grid");
    double cmp_eta = 0.0;
    auto* cmp_eta_opt = cmd_compare->add_option("--eta", cmp_eta, "series scale override");
    cmd_compare->add_option("--rmax", cmp.r_max, "coefficient orders");
    cmd_compare->add_option("--tol", cmp.tol, "series stopping tolerance / ODE rtol");
    cmd_compare->add_option("--seed", cmp.seed, "Monte Carlo seed");
    cmd_compare->add_option("--paths", cmp.n_paths, "Monte Carlo path count");
    double cmp_dt = 0.0;
    auto* cmp_dt_opt = cmd_compare->add_option("--dt", cmp_dt, "Monte Carlo step");
    cmd_compare->add_option("--out", cmp.out_file, "output CSV file");
    cmd_compare->add_option("--skew-drift", cmp_skew,
                            "test hook: negate the drift for this one method (negative control)");

    cli::IdentitiesOptions ident;
    auto* cmd_ident = app.add_subcommand("identities", "run the exact combinatorial identity suite");
    cmd_ident->add_option("--kmax", ident.k_max, "largest order checked");
    cmd_ident->add_flag("--perturb-stirling", ident.perturb_stirling,
                        "test hook: corrupt one table entry (negative control)");

    cli::EvalOptionsCli mc = eval;
    mc.method = cli::Method::mc;
    auto* cmd_mc = app.add_subcommand("mc", "Monte Carlo estimate of the transform");
    cmd_mc->add_option("--model", mc.model_file, "model JSON file")->required();
    cmd_mc->add_option("--s", mc.s_spec, "time axis");
    cmd_mc->add_option("--x", mc.x_spec, "state grid");
    cmd_mc->add_option("--u", mc.u_spec, "transform grid");
    cmd_mc->add_option("--seed", mc.seed, "seed");
    cmd_mc->add_option("--paths", mc.n_paths, "path count");
    double mc_dt = 0.0;
    auto* mc_dt_opt = cmd_mc->add_option("--dt", mc_dt, "step size (default s/512)");
    cmd_mc->add_option("--out", mc.out_file, "output CSV file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_expand->parsed()) {
            if (*expand_eta_opt) expand.eta = expand_eta;
            return cli::run_expand(expand, std::cout, std::cerr);
        }
        if (cmd_eval->parsed()) {
            eval.method = cli::parse_method(eval_method);
            if (*eval_eta_opt) eval.eta = eval_eta;
            if (*eval_dt_opt) eval.dt = eval_dt;
            return cli::run_eval(eval, std::cout, std::cerr);
        }
        if (cmd_compare->parsed()) {
            cmp.methods.clear();
            for (const auto& m : cmp_methods) cmp.methods.push_back(cli::parse_method(m));
            if (*cmp_eta_opt) cmp.eta = cmp_eta;
            if (*cmp_dt_opt) cmp.dt = cmp_dt;
            if (!cmp_skew.empty()) cmp.skew_drift = cli::parse_method(cmp_skew);
            return cli::run_compare(cmp, std::cout, std::cerr);
        }
        if (cmd_ident->parsed()) {
            return cli::run_identities(ident, std::cout, std::cerr);
        }
        if (cmd_mc->parsed()) {
            if (*mc_dt_opt) mc.dt = mc_dt;
            return cli::run_eval(mc, std::cout, std::cerr);
        }
    } catch (const holoseries::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const holoseries::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
