#pragma once

#include <cstddef>
#include <vector>

namespace rtspn {

/// Per-frame series summarised by batch means. Frame k of K goes to batch
/// floor(k * B / K); the standard error is sd(batch means) / sqrt(B).
class BatchSeries {
public:
    BatchSeries() = default;
    explicit BatchSeries(std::size_t total, std::size_t batches = 100);

    void add(std::size_t index, double value);

    double sum() const;
    double mean() const;
    double standard_error() const;

    std::size_t total() const { return total_; }
    std::size_t batch_count() const { return sums_.size(); }

    /// a * x + b * y, batch by batch. Both series must share the layout.
    friend BatchSeries combine(double a, const BatchSeries& x, double b, const BatchSeries& y);

private:
    std::size_t total_{0};
    std::vector<double> sums_;
    std::vector<std::size_t> counts_;
};

/// Running mean and variance of i.i.d. draws (Welford).
class RunningStats {
public:
    void add(double x);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;
    double standard_error() const;

private:
    std::size_t n_{0};
    double mean_{0.0};
    double m2_{0.0};
};

}  // namespace rtspn
