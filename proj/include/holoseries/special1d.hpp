#pragma once

#include "holoseries/generator.hpp"
#include "holoseries/multiindex.hpp"
#include "holoseries/polynomial.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace holoseries {

/// One-dimensional model whose drift, squared diffusion and jump kernel all
/// share the common affine factor lambda0 + lambda1 x:
///   b(x) = (lambda0 + lambda1 x) drift_scale,
///   a(x) = (lambda0 + lambda1 x) diff_scale,
///   v(x, dz) = (lambda0 + lambda1 x) mu(dz).
/// Its generator coefficients collapse to a_l = (lambda0 + lambda1 x) eta_l
/// with a fixed weight table eta_l, which makes a fully explicit closed
/// combinatorial expansion possible.
struct Special1DModel {
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double drift_scale = 0.0;  // drift constant multiplying the affine factor
    double diff_scale = 0.0;   // squared-diffusion constant
    /// Raw moments integral z^l mu(dz), index l (entries 0 and 1 are unused).
    std::vector<double> jump_moments;
    int k_max = 20;

    /// eta_0 = 0, eta_1 = drift_scale, eta_2 = (diff_scale + M_2)/2,
    /// eta_l = M_l / l! beyond.
    double eta_weight(int l) const;

    GeneratorSpec to_generator(Box domain) const;
    static Box default_domain() { return Box{{-1.0}, {1.0}}; }
};

/// Moment-series derivative family of the symbol:
///   frak_h^(r)(u) = sum_l eta_{l+r} ((l+r)!/l!) (iu)^l, truncated at k_max.
/// (This is the series the recursions consume; the literal d^r/du^r would
/// carry an extra factor i^r.)
cplx frak_h(const Special1DModel& model, double u, int deriv_order);

using PiPairs = std::vector<std::pair<int, int>>;  // (n_j, m_j)

enum class PiNormalization { as_printed, calibrated };

/// Exact integer coefficients pi^(p)_{(n_1,m_1),...} of the closed expansion,
/// built by the two reduction rules from pi^(p) = 1, pi^(0)_{...} = 0.
/// Entries are memoized under a canonical key (m = 0 pairs dropped, n
/// ascending). In calibrated mode a per-order scalar factor fitted against
/// the general recursion is recorded; it is applied by g_r_explicit and
/// reported, never silently folded into the integers.
class PiTable {
public:
    PiTable(int r_max, PiNormalization mode, std::vector<double> calibration);

    int r_max() const { return r_max_; }
    PiNormalization mode() const { return mode_; }

    /// Entry lookup; the key is canonicalized first (reduction rule I).
    const BigInt& entry(int p, PiPairs pairs) const;

    /// Scalar applied at order r in calibrated mode (1 otherwise).
    double calibration_factor(int r) const;
    std::string calibration_report() const;

private:
    int r_max_;
    PiNormalization mode_;
    std::vector<double> calibration_;
    std::map<std::vector<int>, BigInt> entries_;
    BigInt one_{1};
    BigInt zero_{0};

    friend PiTable pi_table(int, PiNormalization);
};

/// Build the table for all configurations with p + sum n_j m_j <= r_max.
/// Calibrated mode fits the per-order factor on a mixed reference model
/// against the general coefficient recursion.
PiTable pi_table(int r_max, PiNormalization mode = PiNormalization::calibrated);

/// All (p, pairs) with p > 0, 0 < n_1 < ... < n_q, m_j >= 1 and
/// r = p + sum n_j m_j: the index set of the closed expansion.
std::vector<std::pair<int, PiPairs>> gr_partitions(int r);

/// Closed combinatorial evaluation of the r-th Taylor coefficient:
///   sum over partitions of (1/r!) pi * lambda1^{r-p} (lambda0+lambda1 x)^p
///       * frak_h^p * prod_j (frak_h^{n_j-1} frak_h^(n_j))^{m_j},
/// times the calibration factor when the table is calibrated.
cplx g_r_explicit(const Special1DModel& model, double u, double x, int r, const PiTable& table);

} // namespace holoseries
