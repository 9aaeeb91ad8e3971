#pragma once

// Block-matching motion estimation with a predicted start (modified
// one-at-a-time search), motion-block classification and center-nearest
// block selection.
//
// Motion vectors give the displacement of content from the reference frame
// to the current frame: the block at (x, y) in `cur` is compared with the
// block at (x - dx, y - dy) in `ref`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vwm/error.hpp"
#include "vwm/plane.hpp"
#include "vwm/video_io.hpp"

namespace vwm::motion {

struct MotionVector {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const MotionVector&, const MotionVector&) = default;
};

/// Pixel-space square block.
struct Block {
    int x = 0;
    int y = 0;
    int size = 8;
};

struct BlockCoord {
    int grid_i = 0;  // row
    int grid_j = 0;  // column
    friend bool operator==(const BlockCoord&, const BlockCoord&) = default;
    friend auto operator<=>(const BlockCoord&, const BlockCoord&) = default;
};

struct BlockRecord {
    int grid_i = 0;
    int grid_j = 0;
    int origin_x = 0;
    int origin_y = 0;
    MotionVector mv;
    double distortion = 0.0;
    bool is_motion = false;

    BlockCoord coord() const noexcept { return {grid_i, grid_j}; }
    friend bool operator==(const BlockRecord&, const BlockRecord&) = default;
};

struct SearchParams {
    int block_size = 8;
    double threshold = 4.0;
    int range = 7;
};

struct MotionField {
    std::size_t ref_index = 0;
    std::size_t cur_index = 0;
    int block_size = 8;
    double threshold = 4.0;
    int rows = 0;
    int cols = 0;
    std::vector<BlockRecord> records;  // raster order, rows * cols

    const BlockRecord& at(int grid_i, int grid_j) const { return records[static_cast<std::size_t>(grid_i) * cols + grid_j]; }
    BlockRecord& at(int grid_i, int grid_j) { return records[static_cast<std::size_t>(grid_i) * cols + grid_j]; }

    std::size_t motion_block_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(records.begin(), records.end(), [](const BlockRecord& r) { return r.is_motion; }));
    }

    friend bool operator==(const MotionField&, const MotionField&) = default;
};

/// True when the mv-displaced reference block lies inside `ref`.
inline bool displacement_in_bounds(const RealPlane& ref, const Block& block, MotionVector mv) noexcept {
    const int rx = block.x - mv.dx;
    const int ry = block.y - mv.dy;
    return rx >= 0 && ry >= 0 && rx + block.size <= ref.width() && ry + block.size <= ref.height();
}

/// Mean absolute luma difference between the current block and its
/// mv-displaced counterpart in the reference.
inline double block_distortion(const RealPlane& ref, const RealPlane& cur, const Block& block, MotionVector mv) {
    if (block.x < 0 || block.y < 0 || block.x + block.size > cur.width() || block.y + block.size > cur.height())
        throw BoundsError("block at (" + std::to_string(block.x) + "," + std::to_string(block.y) +
                          ") lies outside the current frame");
    if (!displacement_in_bounds(ref, block, mv))
        throw BoundsError("displacement (" + std::to_string(mv.dx) + "," + std::to_string(mv.dy) +
                          ") moves block at (" + std::to_string(block.x) + "," + std::to_string(block.y) +
                          ") outside the reference frame");
    double sad = 0.0;
    for (int v = 0; v < block.size; ++v) {
        const auto c = cur.row(block.y + v).subspan(static_cast<std::size_t>(block.x), static_cast<std::size_t>(block.size));
        const auto r = ref.row(block.y - mv.dy + v)
                           .subspan(static_cast<std::size_t>(block.x - mv.dx), static_cast<std::size_t>(block.size));
        for (int u = 0; u < block.size; ++u) sad += std::abs(c[u] - r[u]);
    }
    return sad / (static_cast<double>(block.size) * block.size);
}

/// Start vector from the already-solved top-left, top and left neighbors:
/// component-wise sum / 3 (missing neighbors count as zero), rounded half
/// away from zero and clamped to +-range.
inline MotionVector predict_initial_mv(const MotionField& field, int grid_i, int grid_j, int range) {
    int sx = 0;
    int sy = 0;
    const auto add = [&](int i, int j) {
        if (i < 0 || j < 0) return;
        sx += field.at(i, j).mv.dx;
        sy += field.at(i, j).mv.dy;
    };
    add(grid_i - 1, grid_j - 1);
    add(grid_i, grid_j - 1);
    add(grid_i - 1, grid_j);
    const auto mean = [range](int s) {
        return std::clamp(static_cast<int>(std::round(static_cast<double>(s) / 3.0)), -range, range);
    };
    return {mean(sx), mean(sy)};
}

struct SearchResult {
    MotionVector mv;
    double distortion = 0.0;
};

/// One-at-a-time descent: horizontal scan to a local minimum, then vertical
/// from there. Each phase probes +1 and -1, moves toward the lower strictly
/// improving neighbor (+1 on ties) and keeps stepping that way while the
/// distortion strictly decreases. Candidates outside the range or the frame
/// are never selected. A start outside the feasible window is projected
/// into it first.
inline SearchResult mots_search(const RealPlane& ref, const RealPlane& cur, const Block& block, MotionVector start,
                                int range) {
    if (range < 1) throw ConfigError("search range must be >= 1");
    // dx feasible iff 0 <= x - dx and x - dx + m <= W.
    const int dx_lo = std::max(-range, block.x + block.size - ref.width());
    const int dx_hi = std::min(range, block.x);
    const int dy_lo = std::max(-range, block.y + block.size - ref.height());
    const int dy_hi = std::min(range, block.y);
    if (dx_lo > dx_hi || dy_lo > dy_hi)
        throw BoundsError("block at (" + std::to_string(block.x) + "," + std::to_string(block.y) +
                          ") has no admissible displacement");

    MotionVector best{std::clamp(start.dx, dx_lo, dx_hi), std::clamp(start.dy, dy_lo, dy_hi)};
    double best_d = block_distortion(ref, cur, block, best);

    const auto cost = [&](MotionVector mv) -> std::optional<double> {
        if (mv.dx < dx_lo || mv.dx > dx_hi || mv.dy < dy_lo || mv.dy > dy_hi) return std::nullopt;
        return block_distortion(ref, cur, block, mv);
    };
    const auto scan = [&](int MotionVector::*axis) {
        const auto moved = [&](MotionVector from, int step) {
            from.*axis += step;
            return from;
        };
        const auto plus = cost(moved(best, +1));
        const auto minus = cost(moved(best, -1));
        int dir = 0;
        if (plus && *plus < best_d) dir = +1;
        if (minus && *minus < best_d && (!dir || *minus < *plus)) dir = -1;
        if (!dir) return;
        best = moved(best, dir);
        best_d = dir > 0 ? *plus : *minus;
        for (;;) {
            const auto next = cost(moved(best, dir));
            if (!next || !(*next < best_d)) return;
            best = moved(best, dir);
            best_d = *next;
        }
    };
    scan(&MotionVector::dx);
    scan(&MotionVector::dy);
    return {best, best_d};
}

/// Raster-order MOTS over the whole block grid of `cur` against `ref`.
inline MotionField compute_motion_field(const RealPlane& ref, const RealPlane& cur, const SearchParams& params,
                                        std::size_t ref_index = 0, std::size_t cur_index = 1) {
    const int m = params.block_size;
    if (m < 1) throw ConfigError("block size must be >= 1");
    if (!ref.same_shape(cur))
        throw ConfigError("reference is " + std::to_string(ref.width()) + "x" + std::to_string(ref.height()) +
                          " but current frame is " + std::to_string(cur.width()) + "x" + std::to_string(cur.height()));
    if (cur.width() % m != 0 || cur.height() % m != 0 || cur.empty())
        throw ConfigError("frame size " + std::to_string(cur.width()) + "x" + std::to_string(cur.height()) +
                          " is not a positive multiple of block size " + std::to_string(m));
    MotionField field;
    field.ref_index = ref_index;
    field.cur_index = cur_index;
    field.block_size = m;
    field.threshold = params.threshold;
    field.rows = cur.height() / m;
    field.cols = cur.width() / m;
    field.records.resize(static_cast<std::size_t>(field.rows) * field.cols);
    for (int i = 0; i < field.rows; ++i) {
        for (int j = 0; j < field.cols; ++j) {
            BlockRecord& rec = field.at(i, j);
            rec.grid_i = i;
            rec.grid_j = j;
            rec.origin_x = j * m;
            rec.origin_y = i * m;
            const MotionVector start = predict_initial_mv(field, i, j, params.range);
            const SearchResult found = mots_search(ref, cur, {rec.origin_x, rec.origin_y, m}, start, params.range);
            rec.mv = found.mv;
            rec.distortion = found.distortion;
            rec.is_motion = found.distortion >= params.threshold;
        }
    }
    return field;
}

inline MotionField compute_motion_field(const Frame& ref, const Frame& cur, const SearchParams& params) {
    return compute_motion_field(ref.luma, cur.luma, params, ref.index, cur.index);
}

/// Squared distance between block center and frame center, in doubled
/// pixel units so that it stays integral.
inline std::int64_t center_distance2(const MotionField& field, const BlockRecord& rec) {
    const std::int64_t w = static_cast<std::int64_t>(field.cols) * field.block_size;
    const std::int64_t h = static_cast<std::int64_t>(field.rows) * field.block_size;
    const std::int64_t ex = 2 * rec.origin_x + field.block_size - w;
    const std::int64_t ey = 2 * rec.origin_y + field.block_size - h;
    return ex * ex + ey * ey;
}

/// Motion blocks nearest the frame center, ties broken by raster order.
inline std::vector<BlockRecord> select_blocks(const MotionField& field, std::size_t count) {
    if (count < 1) throw ConfigError("block count must be >= 1");
    std::vector<BlockRecord> motion;
    std::copy_if(field.records.begin(), field.records.end(), std::back_inserter(motion),
                 [](const BlockRecord& r) { return r.is_motion; });
    if (motion.size() < count) throw InsufficientMotion(motion.size(), count);
    std::stable_sort(motion.begin(), motion.end(), [&](const BlockRecord& a, const BlockRecord& b) {
        return center_distance2(field, a) < center_distance2(field, b);
    });
    motion.resize(count);
    return motion;
}

}  // namespace vwm::motion
