#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nav/lidar.hpp"

namespace nav {

inline constexpr int kNumSectors = 48;   // n_s
inline constexpr int kMapSize = 48;      // output image side
inline constexpr float kFree = 0.0f;
inline constexpr float kUnknown = 0.5f;
inline constexpr float kOccupied = 1.0f;

/// Per-sector minimum range, one value per `a = fov/n_s` degrees.
struct DownsampledScan {
    std::array<double, kNumSectors> sectors{};
    double sector_width_deg{180.0 / kNumSectors};
};

inline DownsampledScan downsample(const Scan& scan, int n_s = kNumSectors) {
    const int n = static_cast<int>(scan.ranges.size());
    if (n % n_s != 0) {
        throw std::invalid_argument("downsample: beam count not divisible by sector count");
    }
    const int per = n / n_s;
    DownsampledScan out;
    out.sector_width_deg = 180.0 / n_s;
    for (int k = 0; k < n_s; ++k) {
        double m = scan.max_range;
        for (int j = per * k; j < per * (k + 1); ++j) m = std::min(m, scan.ranges[j]);
        out.sectors[k] = m;
    }
    return out;
}

/// Ring boundaries equally spaced in log(1 + r): ring k spans
/// [e^{g k} - 1, e^{g (k+1)} - 1) with g = ln(max_range + 1) / n_s.
struct RingTable {
    int n_s{kNumSectors};
    double max_range{kMaxRange};
    double g{0.0};
    std::vector<std::pair<double, double>> bounds;  // [lower, upper) in meters

    /// Ring index containing `d`, or n_s if d >= max_range.
    int ring_of(double d) const {
        if (d >= max_range) return n_s;
        const int k = static_cast<int>(std::log1p(std::max(d, 0.0)) / g);
        return std::min(k, n_s - 1);
    }
};

inline RingTable ring_table(int n_s = kNumSectors, double max_range = kMaxRange) {
    if (n_s < 1 || max_range <= 0.0) {
        throw std::invalid_argument("ring_table: need n_s >= 1 and max_range > 0");
    }
    RingTable t;
    t.n_s = n_s;
    t.max_range = max_range;
    t.g = std::log(max_range + 1.0) / n_s;
    t.bounds.resize(n_s);
    for (int k = 0; k < n_s; ++k) {
        t.bounds[k] = {std::expm1(t.g * k), std::expm1(t.g * (k + 1))};
    }
    return t;
}

/// Ring-by-sector occupancy, cells[ring * n_s + sector] in {0, 0.5, 1}.
struct PolarOccupancy {
    std::vector<float> cells = std::vector<float>(kNumSectors * kNumSectors, kFree);

    float& at(int ring, int sector) { return cells[ring * kNumSectors + sector]; }
    float at(int ring, int sector) const { return cells[ring * kNumSectors + sector]; }
};

/// Fills one sector column: rings below the measurement are free, the ring
/// containing it occupied, rings behind it unknown. A max-range measurement
/// leaves the whole column free.
inline void classify_sector(double distance, const RingTable& table, PolarOccupancy& polar,
                            int sector) {
    const int hit = table.ring_of(distance);
    for (int k = 0; k < table.n_s; ++k) {
        polar.at(k, sector) = (k < hit) ? kFree : (k == hit) ? kOccupied : kUnknown;
    }
}

/// 48x48 egocentric image with {0, 0.5, 1} values.
struct LogMap {
    std::vector<float> image = std::vector<float>(kMapSize * kMapSize, kUnknown);

    float& at(int row, int col) { return image[row * kMapSize + col]; }
    float at(int row, int col) const { return image[row * kMapSize + col]; }
};

namespace detail {

/// Polar coordinates of an output pixel about the anchor (bottom-edge
/// midpoint, forward pointing up). rho in pixel units, theta in [0, pi]
/// measured from image-right toward image-left.
inline void pixel_polar(int row, int col, double& rho, double& theta) {
    const double dy = kMapSize - (row + 0.5);   // forward
    const double dx = (col + 0.5) - kMapSize / 2.0;
    rho = std::hypot(dx, dy);
    theta = std::atan2(dy, dx);
}

}  // namespace detail

/// Inverse polar warp: nearest-neighbor sampling of the ring/sector grid.
/// Rings map linearly onto [0, kMapSize) pixels of radius; sectors onto the
/// 180-degree fan. Pixels outside the fan footprint stay unknown.
inline LogMap polar_to_cartesian(const PolarOccupancy& polar) {
    LogMap map;
    constexpr double rho_max = kMapSize;
    for (int r = 0; r < kMapSize; ++r) {
        for (int c = 0; c < kMapSize; ++c) {
            double rho, theta;
            detail::pixel_polar(r, c, rho, theta);
            if (rho >= rho_max || theta < 0.0 || theta > pi) continue;  // unknown fill
            const int ring = static_cast<int>(rho / rho_max * kNumSectors);
            const int sector =
                std::min(static_cast<int>(theta / pi * kNumSectors), kNumSectors - 1);
            map.at(r, c) = polar.at(ring, sector);
        }
    }
    return map;
}

inline LogMap build_logmap(const Scan& scan, const RingTable& table) {
    const DownsampledScan ds = downsample(scan, table.n_s);
    PolarOccupancy polar;
    for (int s = 0; s < table.n_s; ++s) classify_sector(ds.sectors[s], table, polar, s);
    return polar_to_cartesian(polar);
}

inline LogMap build_logmap(const Scan& scan) {
    static const RingTable table = ring_table();
    return build_logmap(scan, table);
}

/// Linear-resolution baseline: 0.25 m cells, robot at the image center,
/// forward half-plane traced with Bresenham, rear half never sensed.
inline LogMap build_gridmap(const Scan& scan) {
    constexpr double cell = 2.0 * kMaxRange / kMapSize;  // 0.25 m
    constexpr int center = kMapSize / 2;
    LogMap map;

    const auto to_cell = [&](double fwd, double left, int& row, int& col) {
        row = static_cast<int>(std::floor(center - fwd / cell));
        col = static_cast<int>(std::floor(center - left / cell));
    };

    const int n = static_cast<int>(scan.ranges.size());
    std::vector<std::pair<int, int>> hits;
    for (int j = 0; j < n; ++j) {
        const double a = -scan.fov / 2.0 + j * scan.fov / (n - 1);  // body frame
        const double d = scan.ranges[j];
        int r1, c1;
        to_cell(d * std::cos(a), d * std::sin(a), r1, c1);
        // Bresenham from the robot cell to the beam endpoint.
        int r0 = center, c0 = center;
        const int dr = std::abs(r1 - r0), dc = std::abs(c1 - c0);
        const int sr = r0 < r1 ? 1 : -1, sc = c0 < c1 ? 1 : -1;
        int err = dc - dr;
        while (true) {
            if (r0 >= 0 && r0 < kMapSize && c0 >= 0 && c0 < kMapSize) map.at(r0, c0) = kFree;
            if (r0 == r1 && c0 == c1) break;
            const int e2 = 2 * err;
            if (e2 > -dr) { err -= dr; c0 += sc; }
            if (e2 < dc) { err += dc; r0 += sr; }
        }
        if (d < scan.max_range) hits.emplace_back(r1, c1);
    }
    for (auto [r, c] : hits) {
        if (r >= 0 && r < kMapSize && c >= 0 && c < kMapSize) map.at(r, c) = kOccupied;
    }
    return map;
}

/// Ablation baseline: down-sampled scan normalized to [0, 1].
inline std::array<float, kNumSectors> build_angularmap(const Scan& scan) {
    const DownsampledScan ds = downsample(scan);
    std::array<float, kNumSectors> out{};
    for (int k = 0; k < kNumSectors; ++k) {
        out[k] = static_cast<float>(ds.sectors[k] / scan.max_range);
    }
    return out;
}

/// FIFO of the three most recent frames, newest last. On reset all slots
/// hold the first frame.
struct FrameStack {
    static constexpr int kFrames = 3;
    std::array<std::vector<float>, kFrames> frames;

    void reset(std::vector<float> first) {
        for (auto& f : frames) f = first;
    }
    void push(std::vector<float> frame) {
        for (int i = 0; i + 1 < kFrames; ++i) frames[i] = std::move(frames[i + 1]);
        frames[kFrames - 1] = std::move(frame);
    }
    /// Frames concatenated newest-last into one flat vector.
    std::vector<float> flat() const {
        std::vector<float> out;
        out.reserve(frames[0].size() * kFrames);
        for (const auto& f : frames) out.insert(out.end(), f.begin(), f.end());
        return out;
    }
};

}  // namespace nav
