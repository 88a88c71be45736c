#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace acore {

inline constexpr std::size_t kMaxDim = 2;

/// Fixed-capacity vector for parameter points and observations. Every model in
/// the zoo has at most two parameters and two data components.
class SmallVec {
public:
    SmallVec() = default;

    explicit SmallVec(std::size_t n, double fill = 0.0) : size_(n) {
        assert(n <= kMaxDim);
        values_.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) values_[i] = fill;
    }

    SmallVec(std::initializer_list<double> init) : size_(init.size()) {
        assert(init.size() <= kMaxDim);
        std::size_t i = 0;
        for (double v : init) values_[i++] = v;
    }

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    const double* data() const noexcept { return values_.data(); }
    double* data() noexcept { return values_.data(); }

    const double* begin() const noexcept { return values_.data(); }
    const double* end() const noexcept { return values_.data() + size_; }

    std::span<const double> span() const noexcept { return {values_.data(), size_}; }

    friend bool operator==(const SmallVec& a, const SmallVec& b) noexcept {
        if (a.size_ != b.size_) return false;
        for (std::size_t i = 0; i < a.size_; ++i)
            if (a.values_[i] != b.values_[i]) return false;
        return true;
    }

private:
    std::array<double, kMaxDim> values_{};
    std::size_t size_ = 0;
};

using ParamPoint = SmallVec;
using Observation = SmallVec;
using Dataset = std::vector<Observation>;

} // namespace acore
