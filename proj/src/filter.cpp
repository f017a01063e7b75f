#include "parkloc/filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parkloc/error.hpp"

namespace parkloc {

namespace {

constexpr std::size_t kMaxDigits = 18;

// Assumes `sorted` is ascending and non-empty.
double quantile_sorted(std::span<const std::int64_t> sorted, double fraction) {
    const double rank = fraction * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(std::floor(rank));
    const double weight = rank - static_cast<double>(lower);
    const double a = static_cast<double>(sorted[lower]);
    if (weight == 0.0) return a;
    const double b = static_cast<double>(sorted[lower + 1]);
    return a + weight * (b - a);
}

BoxplotBounds bounds_of_sorted(std::span<const std::int64_t> sorted) {
    BoxplotBounds b;
    b.lower_quartile = quantile_sorted(sorted, 0.25);
    b.median = quantile_sorted(sorted, 0.5);
    b.upper_quartile = quantile_sorted(sorted, 0.75);
    b.iqr = b.upper_quartile - b.lower_quartile;
    b.lo = b.median - 1.5 * b.iqr;
    b.hi = b.median + 1.5 * b.iqr;
    return b;
}

}  // namespace

std::optional<std::int64_t> extract_number(std::string_view text) {
    std::int64_t value = 0;
    std::size_t digits = 0;
    for (const char c : text) {
        if (c < '0' || c > '9') continue;
        if (++digits > kMaxDigits) {
            throw Error(ErrorKind::Overflow, "more than 18 digits in '" + std::string(text) + "'");
        }
        value = value * 10 + (c - '0');
    }
    if (digits == 0) return std::nullopt;
    return value;
}

BoxplotBounds boxplot_bounds(std::span<const std::int64_t> values) {
    if (values.empty()) {
        throw Error(ErrorKind::EmptyInput, "box plot of an empty sample");
    }
    std::vector<std::int64_t> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return bounds_of_sorted(sorted);
}

FilterState::FilterState(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw Error(ErrorKind::InvalidConfig, "filter capacity must be positive");
    }
    scratch_.reserve(capacity);
}

BoxplotBounds FilterState::bounds() const {
    if (queue_.empty()) {
        throw Error(ErrorKind::EmptyInput, "box plot of an empty queue");
    }
    scratch_.assign(queue_.begin(), queue_.end());
    std::sort(scratch_.begin(), scratch_.end());
    return bounds_of_sorted(scratch_);
}

Decision FilterState::step(std::int64_t value) {
    if (!warm_up() && !bounds().contains(static_cast<double>(value))) {
        return Decision::Rejected;
    }
    if (queue_.size() == capacity_) queue_.pop_front();
    queue_.push_back(value);
    return Decision::Accepted;
}

}  // namespace parkloc
