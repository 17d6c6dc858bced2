#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace scofo {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b))
inline double log_add(double a, double b) {
    if (a == kLogZero) return b;
    if (b == kLogZero) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

// log(exp(a) - exp(b)), clamped to -inf when b >= a. The clamp matters:
// the two pools entering this routine are computed independently and
// rounding can push the subtrahend a hair above the minuend.
inline double log_sub(double a, double b) {
    if (b == kLogZero) return a;
    if (b >= a) return kLogZero;
    return a + std::log1p(-std::exp(b - a));
}

// Online log-sum-exp accumulator. Terms below max-kDrop contribute less
// than 1 ulp of the running sum and are skipped without the exp call.
class LogSum {
public:
    static constexpr double kDrop = 45.0;

    void add(double x) {
        if (x == kLogZero) return;
        if (x <= max_) {
            if (x > max_ - kDrop) sum_ += std::exp(x - max_);
            return;
        }
        sum_ = sum_ * std::exp(max_ - x) + 1.0;
        max_ = x;
    }
    double value() const {
        if (max_ == kLogZero) return kLogZero;
        return max_ + std::log(sum_);
    }

private:
    double max_ = kLogZero;
    double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
    LogSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

// Deterministic block-wise log-sum-exp of term(i), i in [0, n). Blocks are
// reduced in index order and combined in block order, so the result does
// not depend on the thread count; the serial path runs the identical block
// structure and therefore matches the parallel path bit for bit.
template <typename F>
double blocked_log_sum_exp(std::size_t n, F&& term, bool parallel) {
    constexpr std::size_t kBlock = 2048;
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    if (nblocks <= 1) {
        LogSum acc;
        for (std::size_t i = 0; i < n; ++i) acc.add(term(i));
        return acc.value();
    }
    std::vector<double> partial(nblocks);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
            LogSum acc;
            const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
            const std::size_t hi = std::min(n, lo + kBlock);
            for (std::size_t i = lo; i < hi; ++i) acc.add(term(i));
            partial[static_cast<std::size_t>(b)] = acc.value();
        }
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) {
            LogSum acc;
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(n, lo + kBlock);
            for (std::size_t i = lo; i < hi; ++i) acc.add(term(i));
            partial[b] = acc.value();
        }
    }
    LogSum total;
    for (double v : partial) total.add(v);
    return total.value();
}

}  // namespace scofo
