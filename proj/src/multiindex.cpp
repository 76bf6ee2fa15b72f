#include "holoseries/multiindex.hpp"

#include "holoseries/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace holoseries {

MultiIndex::MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
    for (int v : e_) {
        if (v < 0) throw ConfigError("MultiIndex: negative exponent");
    }
}

MultiIndex MultiIndex::zero(int n) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(n), 0)); }

MultiIndex MultiIndex::unit(int n, int axis) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e.at(static_cast<std::size_t>(axis)) = 1;
    return MultiIndex(std::move(e));
}

int MultiIndex::order() const { return std::accumulate(e_.begin(), e_.end(), 0); }

double MultiIndex::factorial() const {
    double f = 1.0;
    for (int v : e_) {
        for (int i = 2; i <= v; ++i) f *= static_cast<double>(i);
    }
    return f;
}

bool MultiIndex::leq(const MultiIndex& o) const {
    if (dim() != o.dim()) throw ConfigError("MultiIndex: dimension mismatch");
    for (std::size_t i = 0; i < e_.size(); ++i) {
        if (e_[i] > o.e_[i]) return false;
    }
    return true;
}

MultiIndex MultiIndex::plus(const MultiIndex& o) const {
    if (dim() != o.dim()) throw ConfigError("MultiIndex: dimension mismatch");
    std::vector<int> e(e_);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += o.e_[i];
    return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::minus(const MultiIndex& o) const {
    if (!o.leq(*this)) throw ConfigError("MultiIndex: subtraction would go negative");
    std::vector<int> e(e_);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= o.e_[i];
    return MultiIndex(std::move(e));
}

std::string MultiIndex::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < e_.size(); ++i) {
        if (i) os << ',';
        os << e_[i];
    }
    os << ')';
    return os.str();
}

bool GradedLexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
    const int oa = a.order(), ob = b.order();
    if (oa != ob) return oa < ob;
    for (int i = 0; i < a.dim(); ++i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return false;
}

std::vector<MultiIndex> enumerate_multiindices(int n, int d_max, std::size_t count_limit) {
    if (n < 1) throw ConfigError("enumerate_multiindices: dimension must be >= 1");
    if (d_max < 0) throw ConfigError("enumerate_multiindices: d_max must be >= 0");
    const double count = binomial(n + d_max, n);
    if (count > static_cast<double>(count_limit)) {
        throw ConfigError("enumerate_multiindices: " + std::to_string(count) +
                          " indices exceed the configured limit");
    }
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    // Compositions of d into n parts, first component descending.
    auto emit = [&](auto&& self, int pos, int rem) -> void {
        if (pos == n - 1) {
            e[static_cast<std::size_t>(pos)] = rem;
            out.emplace_back(e);
            return;
        }
        for (int v = rem; v >= 0; --v) {
            e[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, rem - v);
        }
    };
    for (int d = 0; d <= d_max; ++d) emit(emit, 0, d);
    return out;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (n <= 62) {
        k = std::min(k, n - k);
        unsigned __int128 r = 1;
        for (int i = 1; i <= k; ++i) {
            r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        }
        return static_cast<double>(r);
    }
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                               std::lgamma(n - k + 1.0)));
}

double multi_binomial(const MultiIndex& top, const MultiIndex& bottom) {
    double r = 1.0;
    for (int i = 0; i < top.dim(); ++i) r *= binomial(top[i], bottom[i]);
    return r;
}

StirlingTable::StirlingTable(int k_max) {
    if (k_max < 0) throw ConfigError("StirlingTable: k_max must be >= 0");
    rows_.resize(static_cast<std::size_t>(k_max) + 1);
    rows_[0] = {BigInt(1)};
    for (int k = 0; k < k_max; ++k) {
        auto& next = rows_[static_cast<std::size_t>(k) + 1];
        next.assign(static_cast<std::size_t>(k) + 2, BigInt(0));
        const auto& cur = rows_[static_cast<std::size_t>(k)];
        for (int j = 1; j <= k + 1; ++j) {
            BigInt v = (j <= k) ? BigInt(k) * cur[static_cast<std::size_t>(j)] : BigInt(0);
            v += cur[static_cast<std::size_t>(j) - 1];
            next[static_cast<std::size_t>(j)] = v;
        }
    }
}

const BigInt& StirlingTable::entry(int k, int r) const {
    if (k < 0 || k > k_max() || r < 0 || r > k) {
        throw ConfigError("StirlingTable: entry (" + std::to_string(k) + "," + std::to_string(r) +
                          ") out of range");
    }
    return rows_[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)];
}

double StirlingTable::entry_double(int k, int r) const {
    return entry(k, r).convert_to<double>();
}

BigInt StirlingTable::row_sum(int k) const {
    BigInt s = 0;
    for (int r = 0; r <= k; ++r) s += entry(k, r);
    return s;
}

void StirlingTable::perturb(int k, int r, long delta) {
    entry(k, r);  // bounds check
    rows_[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] += delta;
}

namespace {

BigInt bigint_pow(long base, int exp) {
    if (exp == 0) return BigInt(1);  // includes 0^0 = 1
    BigInt r = 1, b = base;
    for (int i = 0; i < exp; ++i) r *= b;
    return r;
}

BigInt bigint_binom(int n, int k) {
    if (k < 0 || k > n) return BigInt(0);
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

BigInt bigint_factorial(int n) {
    BigInt r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

} // namespace

bool check_derivative_identity(int k) {
    if (k < 0) throw ConfigError("check_derivative_identity: k must be >= 0");
    BigInt sum = 0;
    for (int j = 0; j <= k; ++j) {
        BigInt term = bigint_binom(k, j) * bigint_pow(j, k);
        if (j % 2 == 1) term = -term;
        sum += term;
    }
    if (k % 2 == 1) sum = -sum;
    return sum == bigint_factorial(k);
}

double check_factorial_shift_identity(int k, double x) {
    if (k < 1) throw ConfigError("check_factorial_shift_identity: k must be >= 1");
    double lhs = 1.0;
    for (int i = 0; i <= k; ++i) lhs *= x;  // x^{k+1}
    double correction = 0.0;
    for (int l = 1; l <= k; ++l) {
        double inner = 0.0;
        for (int j = 1; j <= l; ++j) {
            double t = binomial(l, j) * bigint_pow(j, k + 1).convert_to<double>();
            inner += (j % 2 == 1) ? -t : t;
        }
        double rising = 1.0;  // (1/l!) prod_{r=0}^{l-1}(x+r)
        for (int r = 0; r < l; ++r) rising *= (x + r) / static_cast<double>(r + 1);
        correction += inner * rising;
    }
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k+1}
    lhs -= sign * correction;
    double rhs = 1.0;
    for (int r = 0; r <= k; ++r) rhs *= (x + r);
    return std::abs(lhs - rhs);
}

} // namespace holoseries
