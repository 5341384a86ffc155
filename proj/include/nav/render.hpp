#pragma once

#include <array>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nav/encoders.hpp"
#include "nav/harness.hpp"
#include "nav/scenarios.hpp"

namespace nav {

struct Rgb {
    std::uint8_t r{255}, g{255}, b{255};
};

/// Simple RGB raster with a meters-to-pixels mapping.
class Canvas {
public:
    Canvas(const Bounds& bounds, int pixels_per_meter)
        : bounds_(bounds), ppm_(pixels_per_meter),
          width_(static_cast<int>(bounds.width() * pixels_per_meter)),
          height_(static_cast<int>(bounds.height() * pixels_per_meter)),
          pixels_(static_cast<std::size_t>(width_) * height_) {}

    int width() const { return width_; }
    int height() const { return height_; }

    void to_pixel(Vec2 p, int& px, int& py) const {
        px = static_cast<int>((p.x - bounds_.x_min) * ppm_);
        py = height_ - 1 - static_cast<int>((p.y - bounds_.y_min) * ppm_);
    }

    void set(int px, int py, Rgb c) {
        if (px >= 0 && px < width_ && py >= 0 && py < height_) {
            pixels_[static_cast<std::size_t>(py) * width_ + px] = c;
        }
    }

    void draw_line(Vec2 a, Vec2 b, Rgb c) {
        int x0, y0, x1, y1;
        to_pixel(a, x0, y0);
        to_pixel(b, x1, y1);
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            set(x0, y0, c);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) { err += dy; x0 += sx; }
            if (e2 <= dx) { err += dx; y0 += sy; }
        }
    }

    void fill_disc(Vec2 center, double radius, Rgb c) {
        int cx, cy;
        to_pixel(center, cx, cy);
        const int r = std::max(1, static_cast<int>(radius * ppm_));
        for (int y = -r; y <= r; ++y) {
            for (int x = -r; x <= r; ++x) {
                if (x * x + y * y <= r * r) set(cx + x, cy + y, c);
            }
        }
    }

    void fill_polygon(const PolygonObstacle& poly, Rgb c) {
        double x0 = poly.vertices[0].x, x1 = x0, y0 = poly.vertices[0].y, y1 = y0;
        for (const auto& v : poly.vertices) {
            x0 = std::min(x0, v.x); x1 = std::max(x1, v.x);
            y0 = std::min(y0, v.y); y1 = std::max(y1, v.y);
        }
        int px0, py1, px1, py0;
        to_pixel({x0, y0}, px0, py1);
        to_pixel({x1, y1}, px1, py0);
        for (int py = py0; py <= py1; ++py) {
            for (int px = px0; px <= px1; ++px) {
                const Vec2 p{bounds_.x_min + (px + 0.5) / ppm_,
                             bounds_.y_min + (height_ - py - 0.5) / ppm_};
                if (point_in_convex_polygon(poly, p)) set(px, py, c);
            }
        }
    }

    void write_ppm(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for write: " + path);
        os << "P6\n" << width_ << " " << height_ << "\n255\n";
        os.write(reinterpret_cast<const char*>(pixels_.data()),
                 static_cast<std::streamsize>(pixels_.size() * 3));
        if (!os) throw std::runtime_error("image write failed: " + path);
    }

private:
    Bounds bounds_;
    int ppm_;
    int width_, height_;
    std::vector<Rgb> pixels_;
};

inline Rgb robot_color(int id) {
    static constexpr std::array<Rgb, 8> palette{{{200, 30, 30},
                                                 {30, 110, 200},
                                                 {30, 160, 60},
                                                 {220, 140, 20},
                                                 {140, 40, 180},
                                                 {20, 170, 170},
                                                 {170, 120, 70},
                                                 {220, 60, 140}}};
    return palette[static_cast<std::size_t>(id) % palette.size()];
}

/// Obstacles, start markers, goals and per-robot colored paths.
inline void render_trajectories(const TrajectoryLog& log, const WorldState& world,
                                const std::string& out_path, int pixels_per_meter = 40) {
    if (log.records.empty()) throw std::invalid_argument("render_trajectories: empty log");
    Canvas canvas(world.bounds, pixels_per_meter);
    const Rgb obstacle_color{60, 60, 60};
    for (const auto& obs : world.obstacles) {
        if (const auto* c = std::get_if<CircleObstacle>(&obs)) {
            canvas.fill_disc(c->center, c->radius, obstacle_color);
        } else {
            canvas.fill_polygon(std::get<PolygonObstacle>(obs), obstacle_color);
        }
    }
    for (const auto& r : world.robots) {
        canvas.fill_disc(r.goal, 0.12, {250, 200, 40});
    }
    // First-episode paths only; one polyline per robot.
    std::vector<std::vector<Vec2>> paths;
    for (const auto& rec : log.records) {
        if (rec.episode != log.records.front().episode) break;
        if (rec.robot_id >= static_cast<int>(paths.size())) paths.resize(rec.robot_id + 1);
        paths[rec.robot_id].push_back(rec.pose.position());
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const Rgb c = robot_color(static_cast<int>(i));
        if (paths[i].empty()) continue;
        canvas.fill_disc(paths[i].front(), 0.12, c);
        for (std::size_t k = 1; k < paths[i].size(); ++k) {
            canvas.draw_line(paths[i][k - 1], paths[i][k], c);
        }
    }
    canvas.write_ppm(out_path);
}

/// Scenario layout preview (no trajectories).
inline void render_scenario(const WorldState& world, const std::string& out_path,
                            int pixels_per_meter = 40) {
    Canvas canvas(world.bounds, pixels_per_meter);
    const Rgb obstacle_color{60, 60, 60};
    for (const auto& obs : world.obstacles) {
        if (const auto* c = std::get_if<CircleObstacle>(&obs)) {
            canvas.fill_disc(c->center, c->radius, obstacle_color);
        } else {
            canvas.fill_polygon(std::get<PolygonObstacle>(obs), obstacle_color);
        }
    }
    for (const auto& r : world.robots) {
        canvas.fill_disc(r.pose.position(), r.radius, robot_color(r.id));
        canvas.fill_disc(r.goal, 0.12, {250, 200, 40});
        canvas.draw_line(r.pose.position(), r.goal, {210, 210, 210});
    }
    canvas.write_ppm(out_path);
}

/// Ternary occupancy image as a portable graymap (0 -> 0, 0.5 -> 128, 1 -> 255).
inline void write_pgm(const LogMap& map, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << "P5\n" << kMapSize << " " << kMapSize << "\n255\n";
    for (float v : map.image) {
        const std::uint8_t byte = v >= 1.0f ? 255 : (v >= 0.5f ? 128 : 0);
        os.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!os) throw std::runtime_error("image write failed: " + path);
}

}  // namespace nav
