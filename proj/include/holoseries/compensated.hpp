#pragma once

namespace holoseries {

enum class SumMode { plain, compensated };

/// Kahan compensated accumulator; works for double and std::complex<double>
/// (addition is component-wise).
template <class T>
struct KahanSum {
    T sum{};
    T comp{};

    void add(const T& value) {
        const T y = value - comp;
        const T t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    const T& get() const { return sum; }
};

} // namespace holoseries
