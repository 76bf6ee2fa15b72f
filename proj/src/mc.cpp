#include "holoseries/mc.hpp"

#include "holoseries/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace holoseries {

int JumpLaw::dim() const {
    return static_cast<int>(type == Type::dirac ? point.size() : mean.size());
}

std::vector<double> JumpLaw::mean_jump() const {
    return type == Type::dirac ? point : mean;
}

double JumpLaw::raw_moment(const MultiIndex& alpha) const {
    double m = 1.0;
    if (type == Type::dirac) {
        for (int i = 0; i < alpha.dim(); ++i) m *= ipow(point[static_cast<std::size_t>(i)], alpha[i]);
        return m;
    }
    for (int i = 0; i < alpha.dim(); ++i) {
        // raw moments of N(mu, sd^2): M_k = mu M_{k-1} + (k-1) sd^2 M_{k-2}
        const double mu = mean[static_cast<std::size_t>(i)];
        const double v = sd[static_cast<std::size_t>(i)] * sd[static_cast<std::size_t>(i)];
        double m0 = 1.0, m1 = mu;
        if (alpha[i] == 0) continue;
        for (int k = 2; k <= alpha[i]; ++k) {
            const double m2 = mu * m1 + (k - 1) * v * m0;
            m0 = m1;
            m1 = m2;
        }
        m *= m1;
    }
    return m;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_index) {
    std::uint64_t st = seed ^ (0xd1342543de82ef95ULL * (path_index + 1));
    const std::uint64_t a = splitmix64(st);
    const std::uint64_t b = splitmix64(st);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

struct StepWorkspace {
    std::vector<double> x;
    std::vector<double> bx;
    std::vector<double> noise;
    std::vector<double> jump_add;
    Eigen::MatrixXd a;
    Eigen::MatrixXd sigma;
};

} // namespace

PathEnsemble simulate_paths(const SdeModel& model, std::span<const double> x0, double s,
                            std::size_t n_paths, double dt, std::uint64_t seed, int threads) {
    const int n = model.n;
    if (static_cast<int>(x0.size()) != n) throw ConfigError("simulate_paths: x0 dimension mismatch");
    if (!(s > 0.0)) throw ConfigError("simulate_paths: s must be > 0");
    if (!(dt > 0.0) || dt > s) throw ConfigError("simulate_paths: need 0 < dt <= s");
    if (n_paths == 0) throw ConfigError("simulate_paths: n_paths must be > 0");

    const long n_steps = std::max(1L, std::lround(s / dt));
    const double h = s / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);
    const std::vector<double> jump_mean = model.jumps ? model.jumps->law.mean_jump()
                                                      : std::vector<double>();

    PathEnsemble out;
    out.n = n;
    out.n_paths = n_paths;
    out.s = s;
    out.dt = h;
    out.seed = seed;
    out.terminals.assign(n_paths * static_cast<std::size_t>(n), 0.0);

    std::atomic<long> clamped_total{0};

    auto run_range = [&](std::size_t begin, std::size_t end) {
        StepWorkspace ws;
        ws.x.resize(static_cast<std::size_t>(n));
        ws.bx.resize(static_cast<std::size_t>(n));
        ws.noise.resize(static_cast<std::size_t>(n));
        ws.jump_add.resize(static_cast<std::size_t>(n));
        ws.a.resize(n, n);
        long clamped = 0;

        for (std::size_t p = begin; p < end; ++p) {
            auto rng = path_rng(seed, p);
            std::normal_distribution<double> gauss(0.0, 1.0);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::copy(x0.begin(), x0.end(), ws.x.begin());

            for (long step = 0; step < n_steps; ++step) {
                bool step_clamped = false;

                // coefficients frozen at the step-start state
                for (int i = 0; i < n; ++i) {
                    double b = model.drift_const[static_cast<std::size_t>(i)];
                    for (int j = 0; j < n; ++j) {
                        b += model.drift_linear[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                             ws.x[static_cast<std::size_t>(j)];
                    }
                    ws.bx[static_cast<std::size_t>(i)] = b;
                }

                double diff_term_1d = 0.0;
                if (n == 1) {
                    double a = model.diff_const[0][0] + model.diff_linear[0][0][0] * ws.x[0];
                    if (a < 0.0) { a = 0.0; step_clamped = true; }
                    diff_term_1d = std::sqrt(a) * sqrt_h * gauss(rng);
                } else {
                    for (int i = 0; i < n; ++i) {
                        for (int j = 0; j < n; ++j) {
                            double a = model.diff_const[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                            for (int k = 0; k < n; ++k) {
                                a += model.diff_linear[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                                     ws.x[static_cast<std::size_t>(k)];
                            }
                            ws.a(i, j) = a;
                        }
                    }
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ws.a);
                    Eigen::VectorXd ev = es.eigenvalues();
                    for (int i = 0; i < n; ++i) {
                        if (ev(i) < 0.0) { ev(i) = 0.0; step_clamped = true; }
                        ev(i) = std::sqrt(ev(i));
                    }
                    ws.sigma = es.eigenvectors() * ev.asDiagonal();
                    for (int i = 0; i < n; ++i) ws.noise[static_cast<std::size_t>(i)] = gauss(rng);
                }

                // thinned jumps against the step-start intensity
                std::fill(ws.jump_add.begin(), ws.jump_add.end(), 0.0);
                double lambda_bar = 0.0;
                if (model.jumps) {
                    lambda_bar = model.jumps->lambda0;
                    for (int j = 0; j < n; ++j) {
                        lambda_bar += model.jumps->lambda1[static_cast<std::size_t>(j)] * ws.x[static_cast<std::size_t>(j)];
                    }
                    if (lambda_bar < 0.0) { lambda_bar = 0.0; step_clamped = true; }
                    if (lambda_bar > 0.0) {
                        std::poisson_distribution<int> pois(lambda_bar * h);
                        const int candidates = pois(rng);
                        for (int c = 0; c < candidates; ++c) {
                            double lambda_now = model.jumps->lambda0;
                            for (int j = 0; j < n; ++j) {
                                lambda_now += model.jumps->lambda1[static_cast<std::size_t>(j)] *
                                              (ws.x[static_cast<std::size_t>(j)] + ws.jump_add[static_cast<std::size_t>(j)]);
                            }
                            lambda_now = std::max(lambda_now, 0.0);
                            if (unif(rng) * lambda_bar <= lambda_now) {
                                if (model.jumps->law.type == JumpLaw::Type::dirac) {
                                    for (int j = 0; j < n; ++j) {
                                        ws.jump_add[static_cast<std::size_t>(j)] += model.jumps->law.point[static_cast<std::size_t>(j)];
                                    }
                                } else {
                                    for (int j = 0; j < n; ++j) {
                                        ws.jump_add[static_cast<std::size_t>(j)] += model.jumps->law.mean[static_cast<std::size_t>(j)] +
                                                       model.jumps->law.sd[static_cast<std::size_t>(j)] * gauss(rng);
                                    }
                                }
                            }
                        }
                    }
                }

                for (int i = 0; i < n; ++i) {
                    double dx = ws.bx[static_cast<std::size_t>(i)] * h;
                    if (model.jumps) {
                        dx += ws.jump_add[static_cast<std::size_t>(i)] -
                              lambda_bar * jump_mean[static_cast<std::size_t>(i)] * h;
                    }
                    if (n == 1) {
                        dx += diff_term_1d;
                    } else {
                        for (int j = 0; j < n; ++j) dx += ws.sigma(i, j) * ws.noise[static_cast<std::size_t>(j)] * sqrt_h;
                    }
                    ws.x[static_cast<std::size_t>(i)] += dx;
                }
                if (step_clamped) ++clamped;
            }
            std::copy(ws.x.begin(), ws.x.end(),
                      out.terminals.begin() + static_cast<std::ptrdiff_t>(p * static_cast<std::size_t>(n)));
        }
        clamped_total += clamped;
    };

    const int workers = std::max(1, std::min<int>(thread_budget(threads),
                                                  static_cast<int>(std::min<std::size_t>(n_paths, 64))));
    if (workers == 1) {
        run_range(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_paths + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
        for (int t = 0; t < workers; ++t) {
            const std::size_t b = static_cast<std::size_t>(t) * chunk;
            const std::size_t e = std::min(n_paths, b + chunk);
            if (b >= e) break;
            pool.emplace_back(run_range, b, e);
        }
        for (auto& th : pool) th.join();
    }

    out.clamp_fraction = static_cast<double>(clamped_total.load()) /
                         (static_cast<double>(n_steps) * static_cast<double>(n_paths));
    return out;
}

MCEstimate mc_char_fn(const PathEnsemble& paths, std::span<const double> u) {
    if (paths.n_paths == 0) throw ConfigError("mc_char_fn: empty ensemble");
    if (static_cast<int>(u.size()) != paths.n) throw ConfigError("mc_char_fn: u dimension mismatch");

    const std::size_t N = paths.n_paths;
    cplx mean = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
        double dot = 0.0;
        for (int i = 0; i < paths.n; ++i) {
            dot += u[static_cast<std::size_t>(i)] * paths.terminals[p * static_cast<std::size_t>(paths.n) + static_cast<std::size_t>(i)];
        }
        mean += std::polar(1.0, dot);
    }
    mean /= static_cast<double>(N);

    double var = 0.0, var_re = 0.0, var_im = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
        double dot = 0.0;
        for (int i = 0; i < paths.n; ++i) {
            dot += u[static_cast<std::size_t>(i)] * paths.terminals[p * static_cast<std::size_t>(paths.n) + static_cast<std::size_t>(i)];
        }
        const cplx d = std::polar(1.0, dot) - mean;
        var += std::norm(d);
        var_re += d.real() * d.real();
        var_im += d.imag() * d.imag();
    }
    const double denom = N > 1 ? static_cast<double>(N - 1) : 1.0;

    MCEstimate est;
    est.value = mean;
    est.se = std::sqrt(var / denom / static_cast<double>(N));
    est.se_re = std::sqrt(var_re / denom / static_cast<double>(N));
    est.se_im = std::sqrt(var_im / denom / static_cast<double>(N));
    est.n_paths = N;
    est.dt = paths.dt;
    est.seed = paths.seed;
    est.clamp_fraction = paths.clamp_fraction;
    return est;
}

int thread_budget(int requested) {
    int budget = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (budget < 1) budget = 1;
    if (const char* env = std::getenv("HOLOSERIES_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) budget = std::min(budget, cap);
    }
    return budget;
}

} // namespace holoseries
