#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vwm/error.hpp"

namespace vwm {

/// Row-major 2D sample array. Addressed as `at(x, y)` with x the column.
template <typename T>
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(checked_size(width, height), fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& at(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& at(int x, int y) const noexcept { return data_[index(x, y)]; }

    std::span<T> row(int y) noexcept {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<const T> row(int y) const noexcept {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }

    std::span<T> samples() noexcept { return data_; }
    std::span<const T> samples() const noexcept { return data_; }

    bool same_shape(const Plane& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    static std::size_t checked_size(int width, int height) {
        if (width < 0 || height < 0)
            throw ShapeError("plane dimensions must be non-negative, got " + std::to_string(width) +
                             "x" + std::to_string(height));
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using RealPlane = Plane<double>;

/// Whole-sample symmetric reflection of index `i` into [0, n).
inline int mirror_index(int i, int n) noexcept {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

}  // namespace vwm
