#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace holoseries {

using BigInt = boost::multiprecision::cpp_int;

/// Exponent vector in N_0^n. Used to index monomials x^alpha, partial
/// derivatives, moment tables and series coefficients alike.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> exponents);

    static MultiIndex zero(int n);
    /// Unit index e_axis (a first-order derivative / linear monomial).
    static MultiIndex unit(int n, int axis);

    int dim() const { return static_cast<int>(e_.size()); }
    /// |alpha| = sum of exponents.
    int order() const;
    int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& exponents() const { return e_; }

    /// alpha! as a double. Exact up to 18!, correctly rounded beyond.
    double factorial() const;

    bool leq(const MultiIndex& o) const;  // component-wise <=
    MultiIndex plus(const MultiIndex& o) const;
    /// Component-wise difference; requires o.leq(*this).
    MultiIndex minus(const MultiIndex& o) const;

    bool operator==(const MultiIndex&) const = default;

    std::string to_string() const;

private:
    std::vector<int> e_;
};

/// Canonical multi-index order: by total order first, then first differing
/// exponent descending, so that for n=2 the sequence runs
/// (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
struct GradedLexLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// All alpha with |alpha| <= d_max, each exactly once, in graded-lex order.
/// Throws ConfigError for n < 1 or when binomial(n+d_max, n) exceeds the limit.
std::vector<MultiIndex> enumerate_multiindices(int n, int d_max,
                                               std::size_t count_limit = 2000000);

/// binomial(n, k); exact for n <= 62 (128-bit integer path), correctly
/// rounded via lgamma beyond.
double binomial(int n, int k);

/// Product of per-component binomials binom(top_i, bottom_i).
double multi_binomial(const MultiIndex& top, const MultiIndex& bottom);

/// Unsigned Stirling numbers of the first kind c[k][r]:
/// prod_{r=0}^{k-1}(z+r) = sum_r c[k][r] z^r. Entries are exact integers;
/// they pass 2^63 near k = 21, hence arbitrary precision.
class StirlingTable {
public:
    explicit StirlingTable(int k_max);

    int k_max() const { return static_cast<int>(rows_.size()) - 1; }
    const BigInt& entry(int k, int r) const;
    double entry_double(int k, int r) const;
    BigInt row_sum(int k) const;

    /// Test hook: add delta to one entry (negative control for the identity suite).
    void perturb(int k, int r, long delta);

private:
    std::vector<std::vector<BigInt>> rows_;
};

inline StirlingTable stirling_unsigned(int k_max) { return StirlingTable(k_max); }

/// Exact check of (-1)^k sum_j binom(k,j)(-1)^j j^k == k!  (0^0 := 1).
bool check_derivative_identity(int k);

/// |LHS - RHS| of the factorial shift identity at real x:
///   x^{k+1} - (-1)^{k+1} sum_{l=1}^{k} sum_{j=1}^{l} binom(l,j)(-1)^j j^{k+1}
///       * (1/l!) prod_{r=0}^{l-1}(x+r)   vs   prod_{r=0}^{k}(x+r).
/// Zero up to rounding for every real x; exactly zero at integer nodes -k..0.
double check_factorial_shift_identity(int k, double x);

} // namespace holoseries
