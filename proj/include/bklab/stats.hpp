#ifndef BKLAB_STATS_HPP
#define BKLAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace bklab {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// Sample mean with the standard error of the mean.
struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::uint64_t count = 0;
};

class MeanAccumulator {
public:
    void add(double x) noexcept {
        sum_.add(x);
        sum_sq_.add(x * x);
        ++count_;
    }
    void merge(const MeanAccumulator& o) noexcept {
        sum_.merge(o.sum_);
        sum_sq_.merge(o.sum_sq_);
        count_ += o.count_;
    }
    std::uint64_t count() const noexcept { return count_; }

    MeanEstimate estimate() const noexcept {
        MeanEstimate e;
        e.count = count_;
        if (count_ == 0) return e;
        const double n = static_cast<double>(count_);
        e.mean = sum_.value() / n;
        if (count_ > 1) {
            const double var = std::max(0.0, (sum_sq_.value() - n * e.mean * e.mean) / (n - 1.0));
            e.se = std::sqrt(var / n);
        }
        return e;
    }

private:
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
    std::uint64_t count_ = 0;
};

// Binomial proportion with its standard error.
inline MeanEstimate proportion(std::uint64_t hits, std::uint64_t trials) noexcept {
    MeanEstimate e;
    e.count = trials;
    if (trials == 0) return e;
    const double n = static_cast<double>(trials);
    e.mean = static_cast<double>(hits) / n;
    e.se = std::sqrt(e.mean * (1.0 - e.mean) / n);
    return e;
}

// Work is cut into a fixed number of batches that depends only on the problem
// size. Threads pick batches by index; callers fold per-batch results in batch
// order, so output is identical for any thread count.
struct BatchPlan {
    std::uint64_t total = 0;
    std::size_t batches = 0;

    std::uint64_t begin(std::size_t b) const noexcept { return total * b / batches; }
    std::uint64_t end(std::size_t b) const noexcept { return total * (b + 1) / batches; }
};

inline BatchPlan plan_batches(std::uint64_t total, std::size_t max_batches = 64) noexcept {
    BatchPlan p;
    p.total = total;
    p.batches = static_cast<std::size_t>(std::min<std::uint64_t>(total, max_batches));
    if (p.batches == 0) p.batches = 1;
    return p;
}

inline void run_batches(const BatchPlan& plan, unsigned threads,
                        const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, plan.batches);
    if (workers == 1) {
        for (std::size_t b = 0; b < plan.batches; ++b) body(b);
        return;
    }
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t b = w; b < plan.batches; b += workers) body(b);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

} // namespace bklab

#endif
