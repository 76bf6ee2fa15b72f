#pragma once

#include "holoseries/generator.hpp"
#include "holoseries/series.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace holoseries {

/// Numerically integrated log-affine exponent trajectories C(s,u), D(s,u).
/// Derivatives are stored per grid point so dense output is cubic Hermite.
struct RiccatiSolution {
    std::vector<double> u;
    std::vector<double> grid;                    // strictly increasing from 0
    std::vector<cplx> C_vals;
    std::vector<std::vector<cplx>> D_vals;
    std::vector<cplx> dC_vals;
    std::vector<std::vector<cplx>> dD_vals;
    std::optional<double> blow_up_time;
    double d_star = 0.0;                         // max over grid of ||D||_inf

    double s_max() const { return grid.empty() ? 0.0 : grid.back(); }
};

/// Right-hand side of the generalized Riccati system:
///   dC = sum_alpha c_alpha D^alpha,  dD_j = sum_alpha d_alpha^(j) D^alpha,
/// power sums truncated at the generator's k_max.
std::pair<cplx, std::vector<cplx>> riccati_rhs(const GeneratorSpec& gen, std::span<const cplx> D);

/// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) integration from
/// C(0) = 0, D(0) = iu. Integration stops early with blow_up_time set when
/// the state passes the explosion threshold or the step size underflows.
/// max_step caps the grid spacing so the cubic Hermite dense output stays
/// at the integration-error scale.
RiccatiSolution solve_riccati(const GeneratorSpec& gen, std::span<const double> u, double s_max,
                              double rtol, double explosion_threshold = 1e8,
                              double max_step = 0.01);

/// Interpolated exponent (C, D) at time s.
std::pair<cplx, std::vector<cplx>> interpolate_cd(const RiccatiSolution& sol, double s);

/// exp(C(s,u) + x.D(s,u)) from the stored trajectories.
/// Throws NumericError at or beyond the blow-up estimate or past the grid.
cplx char_fn_riccati(const RiccatiSolution& sol, std::span<const double> x, double s);

/// Scale selection with the oracle-derived bound d_star = max_s ||D(s,u)||.
EtaSelection select_eta(const GeneratorSpec& gen, const RiccatiSolution& sol);

} // namespace holoseries
