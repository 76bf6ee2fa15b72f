#include "holoseries/generator.hpp"

#include "holoseries/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace holoseries {

namespace {
constexpr double kSymTol = 1e-12;
constexpr double kPsdTol = 1e-10;
} // namespace

double Box::sup_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        m = std::max(m, std::max(std::abs(lo[i]), std::abs(hi[i])));
    }
    return m;
}

void Box::validate(int n) const {
    if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n) {
        throw ConfigError("domain box: dimension mismatch");
    }
    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!(lo[idx] <= hi[idx])) throw ConfigError("domain box: lo > hi");
        if (!(lo[idx] <= 0.0 && 0.0 <= hi[idx])) {
            throw ConfigError("domain box must contain the origin");
        }
        if (!std::isfinite(lo[idx]) || !std::isfinite(hi[idx])) {
            throw ConfigError("domain box must be bounded; supply finite lo/hi");
        }
    }
}

bool AffinePair::is_zero() const {
    if (c != 0.0) return false;
    return std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; });
}

double AffinePair::eval(std::span<const double> x) const {
    double v = c;
    for (std::size_t i = 0; i < d.size(); ++i) v += d[i] * x[i];
    return v;
}

GeneratorSpec::GeneratorSpec(int n, int k_max, Box domain,
                             std::map<MultiIndex, AffinePair, GradedLexLess> coeffs)
    : n_(n), k_max_(k_max), domain_(std::move(domain)), coeffs_(std::move(coeffs)) {
    if (n_ < 1) throw ConfigError("GeneratorSpec: dimension must be >= 1");
    if (k_max_ < 1) throw ConfigError("GeneratorSpec: k_max must be >= 1");
    domain_.validate(n_);
    for (const auto& [alpha, pair] : coeffs_) {
        if (alpha.dim() != n_) throw ConfigError("GeneratorSpec: coefficient index dimension mismatch");
        const int o = alpha.order();
        if (o < 1 || o > k_max_) {
            throw ConfigError("GeneratorSpec: coefficient order " + std::to_string(o) +
                              " outside [1, k_max]");
        }
        if (static_cast<int>(pair.d.size()) != n_) {
            throw ConfigError("GeneratorSpec: d-vector dimension mismatch at " + alpha.to_string());
        }
    }
}

AffinePair GeneratorSpec::at(const MultiIndex& alpha) const {
    auto it = coeffs_.find(alpha);
    if (it != coeffs_.end()) return it->second;
    AffinePair zero;
    zero.d.assign(static_cast<std::size_t>(n_), 0.0);
    return zero;
}

namespace {

void check_symmetric(const std::vector<std::vector<double>>& m, int n, const char* what) {
    if (static_cast<int>(m.size()) != n) throw ConfigError(std::string(what) + ": wrong row count");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(m[static_cast<std::size_t>(i)].size()) != n) {
            throw ConfigError(std::string(what) + ": wrong column count");
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double a = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            const double b = m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            const double scale = std::max({1.0, std::abs(a), std::abs(b)});
            if (std::abs(a - b) > kSymTol * scale) {
                throw ConfigError(std::string(what) + ": matrix is not symmetric");
            }
        }
    }
}

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& m, int n) {
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return out;
}

void check_psd(const Eigen::MatrixXd& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -kPsdTol * scale) {
        throw ConfigError(std::string(what) + ": matrix is not positive semidefinite");
    }
}

/// a(x) at a box vertex picked by bit mask.
Eigen::MatrixXd diffusion_at_vertex(const ModelParts& model, unsigned mask) {
    const int n = model.n;
    Eigen::MatrixXd a = to_eigen(model.diff_const, n);
    for (int i = 0; i < n; ++i) {
        const double xi = (mask >> i) & 1u ? model.domain.hi[static_cast<std::size_t>(i)]
                                           : model.domain.lo[static_cast<std::size_t>(i)];
        a += xi * to_eigen(model.diff_linear[static_cast<std::size_t>(i)], n);
    }
    return a;
}

} // namespace

GeneratorSpec build_generator(const ModelParts& model) {
    const int n = model.n;
    if (n < 1) throw ConfigError("build_generator: dimension must be >= 1");
    model.domain.validate(n);
    if (static_cast<int>(model.drift_const.size()) != n ||
        static_cast<int>(model.drift_linear.size()) != n) {
        throw ConfigError("build_generator: drift dimension mismatch");
    }
    for (const auto& row : model.drift_linear) {
        if (static_cast<int>(row.size()) != n) throw ConfigError("build_generator: drift matrix shape");
    }
    check_symmetric(model.diff_const, n, "diffusion const");
    if (static_cast<int>(model.diff_linear.size()) != n) {
        throw ConfigError("build_generator: diffusion linear part needs one matrix per state axis");
    }
    for (const auto& m : model.diff_linear) check_symmetric(m, n, "diffusion linear");
    if (n <= 20) {
        // affine + vertex-PSD implies PSD on the whole box
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            check_psd(diffusion_at_vertex(model, mask), "diffusion on domain box");
        }
    }

    std::map<MultiIndex, AffinePair, GradedLexLess> coeffs;
    auto accumulate = [&](const MultiIndex& alpha, double c, const std::vector<double>& d) {
        auto [it, inserted] = coeffs.try_emplace(alpha);
        AffinePair& p = it->second;
        if (inserted) p.d.assign(static_cast<std::size_t>(n), 0.0);
        p.c += c;
        for (int j = 0; j < n; ++j) p.d[static_cast<std::size_t>(j)] += d[static_cast<std::size_t>(j)];
    };

    // drift: order-1 coefficients
    for (int i = 0; i < n; ++i) {
        accumulate(MultiIndex::unit(n, i), model.drift_const[static_cast<std::size_t>(i)],
                   model.drift_linear[static_cast<std::size_t>(i)]);
    }
    // diffusion: (1/2) sum a_ij d_i d_j collected per multi-index
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double factor = (i == j) ? 0.5 : 1.0;  // off-diagonal pair i<j counted once
            double c = factor * model.diff_const[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            std::vector<double> d(static_cast<std::size_t>(n), 0.0);
            for (int k = 0; k < n; ++k) {
                d[static_cast<std::size_t>(k)] =
                    factor *
                    model.diff_linear[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
            MultiIndex alpha = MultiIndex::unit(n, i).plus(MultiIndex::unit(n, j));
            if (c != 0.0 || std::any_of(d.begin(), d.end(), [](double v) { return v != 0.0; })) {
                accumulate(alpha, c, d);
            }
        }
    }
    // jumps: m_alpha(x)/alpha! for every |alpha| >= 2; order 1 is compensated away
    if (model.jumps) {
        const JumpSpec& js = *model.jumps;
        if (static_cast<int>(js.lambda1.size()) != n) {
            throw ConfigError("build_generator: lambda1 dimension mismatch");
        }
        if (js.lambda0 < 0.0) throw ConfigError("build_generator: lambda0 must be >= 0");
        // intensity nonnegative on the box: minimize the affine form
        double min_int = js.lambda0;
        for (int i = 0; i < n; ++i) {
            const double l = js.lambda1[static_cast<std::size_t>(i)];
            min_int += std::min(l * model.domain.lo[static_cast<std::size_t>(i)],
                                l * model.domain.hi[static_cast<std::size_t>(i)]);
        }
        if (min_int < -kPsdTol) {
            throw ConfigError("build_generator: jump intensity is negative somewhere on the domain box");
        }

        // second-moment matrix of mu must be PSD
        Eigen::MatrixXd m2(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                MultiIndex alpha = MultiIndex::unit(n, i).plus(MultiIndex::unit(n, j));
                auto it = js.moments.find(alpha);
                if (it == js.moments.end()) {
                    throw ConfigError("build_generator: jump moment missing at " + alpha.to_string());
                }
                m2(i, j) = it->second;
            }
        }
        check_psd(m2, "jump second-moment matrix");

        for (const MultiIndex& alpha : enumerate_multiindices(n, model.k_max)) {
            if (alpha.order() < 2) continue;
            auto it = js.moments.find(alpha);
            if (it == js.moments.end()) {
                throw ConfigError("build_generator: jump moment missing at " + alpha.to_string() +
                                  " (required up to k_max)");
            }
            const double w = it->second / alpha.factorial();
            if (w == 0.0) continue;
            std::vector<double> d(static_cast<std::size_t>(n), 0.0);
            for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = js.lambda1[static_cast<std::size_t>(j)] * w;
            accumulate(alpha, js.lambda0 * w, d);
        }
    }

    // drop exact zeros
    for (auto it = coeffs.begin(); it != coeffs.end();) {
        it = it->second.is_zero() ? coeffs.erase(it) : std::next(it);
    }
    return GeneratorSpec(n, model.k_max, model.domain, std::move(coeffs));
}

cplx SymbolCoefficients::b0_at(const MultiIndex& beta) const {
    auto it = b0.find(beta);
    return it == b0.end() ? cplx(0.0) : it->second;
}

cplx SymbolCoefficients::b1_at(const MultiIndex& beta, int axis) const {
    auto it = b1.find(beta);
    return it == b1.end() ? cplx(0.0) : it->second[static_cast<std::size_t>(axis)];
}

SymbolCoefficients symbol_coefficients(const GeneratorSpec& gen, std::span<const double> u) {
    const int n = gen.dim();
    if (static_cast<int>(u.size()) != n) throw ConfigError("symbol_coefficients: u dimension mismatch");
    SymbolCoefficients out;
    out.u.assign(u.begin(), u.end());

    // divisors beta <= alpha, recursively
    std::vector<int> beta(static_cast<std::size_t>(n), 0);
    for (const auto& [alpha, pair] : gen.coeffs()) {
        auto visit = [&](auto&& self, int pos) -> void {
            if (pos == n) {
                MultiIndex b(beta);
                // (alpha! / (alpha-beta)!) (iu)^{alpha-beta}
                MultiIndex rest = alpha.minus(b);
                double falling = 1.0;
                for (int i = 0; i < n; ++i) {
                    for (int v = alpha[i]; v > rest[i]; --v) falling *= static_cast<double>(v);
                }
                cplx mono = 1.0;
                for (int i = 0; i < n; ++i) {
                    mono *= ipow(cplx(0.0, u[static_cast<std::size_t>(i)]), rest[i]);
                }
                const cplx f = falling * mono;
                if (pair.c != 0.0) {
                    auto [it, ins] = out.b0.emplace(b, pair.c * f);
                    if (!ins) it->second += pair.c * f;
                }
                bool any_d = std::any_of(pair.d.begin(), pair.d.end(), [](double v) { return v != 0.0; });
                if (any_d) {
                    auto [it, ins] = out.b1.try_emplace(b, std::vector<cplx>(static_cast<std::size_t>(n), cplx(0.0)));
                    for (int j = 0; j < n; ++j) {
                        it->second[static_cast<std::size_t>(j)] += pair.d[static_cast<std::size_t>(j)] * f;
                    }
                }
                return;
            }
            for (int v = 0; v <= alpha[pos]; ++v) {
                beta[static_cast<std::size_t>(pos)] = v;
                self(self, pos + 1);
            }
            beta[static_cast<std::size_t>(pos)] = 0;
        };
        visit(visit, 0);
    }
    return out;
}

GrowthProfile::GrowthProfile(std::vector<double> d_k) : d_k_(std::move(d_k)) {
    for (double v : d_k_) {
        if (v < 0.0) throw ConfigError("GrowthProfile: negative entry");
    }
}

double GrowthProfile::dk(int k) const {
    if (k < 1 || k > k_max()) return 0.0;
    return d_k_[static_cast<std::size_t>(k)];
}

double GrowthProfile::theta(double v) const {
    double acc = 0.0;
    double factor = 1.0;  // 2^k (1+v)^k
    for (int k = 1; k <= k_max(); ++k) {
        factor *= 2.0 * (1.0 + v);
        acc += factor * d_k_[static_cast<std::size_t>(k)];
    }
    return acc;
}

bool GrowthProfile::is_zero() const {
    return std::all_of(d_k_.begin(), d_k_.end(), [](double v) { return v == 0.0; });
}

namespace {

/// max over {x in box, ||x||_inf <= t} of |c + d.x| (affine: sub-box vertices).
double abs_max_at_radius(const AffinePair& p, const Box& box, double t) {
    double hi = p.c, lo = p.c;
    for (std::size_t i = 0; i < p.d.size(); ++i) {
        const double a = std::max(box.lo[i], -t);
        const double b = std::min(box.hi[i], t);
        hi += std::max(p.d[i] * a, p.d[i] * b);
        lo += std::min(p.d[i] * a, p.d[i] * b);
    }
    return std::max(std::abs(hi), std::abs(lo));
}

} // namespace

GrowthProfile growth_profile(const GeneratorSpec& gen) {
    const Box& box = gen.domain();
    box.validate(gen.dim());

    // candidate radii where m(t)/(1+t) can peak
    std::set<double> radii{0.0, box.sup_norm()};
    for (std::size_t i = 0; i < box.lo.size(); ++i) {
        radii.insert(std::abs(box.lo[i]));
        radii.insert(std::abs(box.hi[i]));
    }

    std::vector<double> d_k(static_cast<std::size_t>(gen.k_max()) + 1, 0.0);
    for (const auto& [alpha, pair] : gen.coeffs()) {
        double best = 0.0;
        for (double t : radii) {
            best = std::max(best, abs_max_at_radius(pair, box, t) / (1.0 + t));
        }
        for (double dj : pair.d) best = std::max(best, std::abs(dj));  // |beta| = 1, peak at x = 0
        auto& slot = d_k[static_cast<std::size_t>(alpha.order())];
        slot = std::max(slot, best);
    }
    return GrowthProfile(std::move(d_k));
}

double coefficient_bound(const GrowthProfile& profile, int n, std::span<const double> x,
                         std::span<const double> u, int r) {
    if (r < 0) throw ConfigError("coefficient_bound: r must be >= 0");
    if (r == 0) return 1.0;
    double xn = 0.0, un = 0.0;
    for (double v : x) xn = std::max(xn, std::abs(v));
    for (double v : u) un = std::max(un, std::abs(v));
    const double th = profile.theta(un);
    if (th == 0.0) return 0.0;
    double logv = std::lgamma(static_cast<double>(r) + 2.0);
    logv += r * (n * std::log(2.0) + std::log1p(xn) + std::log(th));
    return std::exp(logv);
}

double coefficient_bound(const GeneratorSpec& gen, std::span<const double> x,
                         std::span<const double> u, int r) {
    return coefficient_bound(growth_profile(gen), gen.dim(), x, u, r);
}

double moment_tail_proxy(const GeneratorSpec& gen, double u_norm) {
    double acc = 0.0;
    const double T = gen.domain().sup_norm();
    for (const auto& [alpha, pair] : gen.coeffs()) {
        if (alpha.order() != gen.k_max()) continue;
        acc += abs_max_at_radius(pair, gen.domain(), T);
    }
    return acc * ipow(1.0 + u_norm, gen.k_max());
}

} // namespace holoseries
