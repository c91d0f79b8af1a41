#include "rtspn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rtspn {

BatchSeries::BatchSeries(std::size_t total, std::size_t batches) : total_(total) {
    const std::size_t b = std::max<std::size_t>(1, std::min(batches, total));
    sums_.assign(b, 0.0);
    counts_.assign(b, 0);
}

void BatchSeries::add(std::size_t index, double value) {
    const std::size_t b = index * sums_.size() / total_;
    sums_[b] += value;
    ++counts_[b];
}

double BatchSeries::sum() const { return std::accumulate(sums_.begin(), sums_.end(), 0.0); }

double BatchSeries::mean() const {
    const auto n = std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
    return n == 0 ? 0.0 : sum() / static_cast<double>(n);
}

double BatchSeries::standard_error() const {
    const std::size_t b = sums_.size();
    if (b < 2) return 0.0;
    std::vector<double> means(b);
    for (std::size_t i = 0; i < b; ++i)
        means[i] = counts_[i] == 0 ? 0.0 : sums_[i] / static_cast<double>(counts_[i]);
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(b);
    double ss = 0.0;
    for (double x : means) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
}

BatchSeries combine(double a, const BatchSeries& x, double b, const BatchSeries& y) {
    if (x.total_ != y.total_ || x.sums_.size() != y.sums_.size())
        throw std::invalid_argument("batch layouts differ");
    BatchSeries out = x;
    for (std::size_t i = 0; i < out.sums_.size(); ++i) out.sums_[i] = a * x.sums_[i] + b * y.sums_[i];
    return out;
}

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double RunningStats::variance() const { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

double RunningStats::standard_error() const {
    return n_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

}  // namespace rtspn
