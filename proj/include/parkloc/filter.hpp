#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace parkloc {

/// Concatenates every decimal digit run of `text` in order and parses it as
/// base 10 ("B2-117" -> 2117). Empty when there is no digit; throws
/// Error{Overflow} past 18 digits.
std::optional<std::int64_t> extract_number(std::string_view text);

struct BoxplotBounds {
    double lower_quartile = 0.0;
    double median = 0.0;
    double upper_quartile = 0.0;
    double iqr = 0.0;
    double lo = 0.0;  // median - 1.5 * iqr
    double hi = 0.0;  // median + 1.5 * iqr

    bool contains(double value) const noexcept { return lo <= value && value <= hi; }
};

/// Quartiles by linear interpolation at rank f * (n - 1). Throws
/// Error{EmptyInput} on an empty sample.
BoxplotBounds boxplot_bounds(std::span<const std::int64_t> values);

enum class Decision { Accepted, Rejected };

/// FIFO of the most recently accepted parking numbers. While the queue is
/// filling (warm-up) every value is accepted; afterwards a value is accepted
/// only if it falls inside the box-plot range of the queue.
class FilterState {
public:
    static constexpr std::size_t kDefaultCapacity = 30;

    explicit FilterState(std::size_t capacity = kDefaultCapacity);

    std::size_t capacity() const noexcept { return capacity_; }
    bool warm_up() const noexcept { return queue_.size() < capacity_; }
    const std::deque<std::int64_t>& queue() const noexcept { return queue_; }

    /// Rejected values leave the state untouched.
    Decision step(std::int64_t value);

    void reset() noexcept { queue_.clear(); }

    /// Bounds over the current queue; requires a non-empty queue.
    BoxplotBounds bounds() const;

private:
    std::size_t capacity_;
    std::deque<std::int64_t> queue_;
    mutable std::vector<std::int64_t> scratch_;
};

inline Decision filter_step(FilterState& state, std::int64_t value) { return state.step(value); }

inline FilterState reset(FilterState state) {
    state.reset();
    return state;
}

}  // namespace parkloc
