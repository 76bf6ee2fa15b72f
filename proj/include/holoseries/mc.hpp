#pragma once

#include "holoseries/generator.hpp"
#include "holoseries/multiindex.hpp"
#include "holoseries/polynomial.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace holoseries {

/// Jump-size distribution of the normalized measure mu: a point mass or a
/// normal with independent components. Enough to sample and to produce the
/// raw moments the generator path consumes.
struct JumpLaw {
    enum class Type { dirac, normal };
    Type type = Type::dirac;
    std::vector<double> point;       // dirac
    std::vector<double> mean, sd;    // normal, per component

    int dim() const;
    std::vector<double> mean_jump() const;
    /// E[z^alpha] (independent components).
    double raw_moment(const MultiIndex& alpha) const;
};

/// Simulatable affine jump-diffusion: drift b0 + Bx, squared diffusion
/// a(x) = a0 + sum_i x_i a_i (PSD-clamped per step), finite-activity jumps
/// with affine intensity lambda0 + lambda1.x.
struct SdeModel {
    struct Jumps {
        double lambda0 = 0.0;
        std::vector<double> lambda1;
        JumpLaw law;
    };

    int n = 1;
    std::vector<double> drift_const;
    std::vector<std::vector<double>> drift_linear;
    std::vector<std::vector<double>> diff_const;
    std::vector<std::vector<std::vector<double>>> diff_linear;
    std::optional<Jumps> jumps;
};

struct PathEnsemble {
    int n = 1;
    std::size_t n_paths = 0;
    double s = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> terminals;   // n_paths * n, path-major
    /// Fraction of steps where intensity or variance had to be clamped at 0.
    double clamp_fraction = 0.0;
};

/// Euler-Maruyama with per-step jump thinning and compensator drift.
/// Paths derive independent RNG streams from (seed, path index), so serial
/// and parallel runs agree bit-exactly. threads <= 0 means automatic
/// (HOLOSERIES_THREADS caps it).
PathEnsemble simulate_paths(const SdeModel& model, std::span<const double> x0, double s,
                            std::size_t n_paths, double dt, std::uint64_t seed, int threads = 0);

struct MCEstimate {
    cplx value{0.0, 0.0};
    double se = 0.0;     // sample sd of e^{iu.X} over paths / sqrt(n_paths)
    double se_re = 0.0;
    double se_im = 0.0;
    std::size_t n_paths = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double clamp_fraction = 0.0;
};

MCEstimate mc_char_fn(const PathEnsemble& paths, std::span<const double> u);

/// Effective worker count: requested if > 0, else hardware concurrency,
/// always capped by the HOLOSERIES_THREADS environment variable.
int thread_budget(int requested = 0);

} // namespace holoseries
