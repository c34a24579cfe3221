/**
 * @file geometry.hpp
 * @brief Small 2D point / color value types shared across the library.
 */
#pragma once

#include <cmath>
#include <cstdint>

namespace cephforge {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }

/// Real-valued RGB, channels in [0, 255]. Color math happens at full
/// precision; quantization to 8-bit is deferred to raster write time.
struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

inline Rgb operator+(Rgb a, Rgb b) { return {a.r + b.r, a.g + b.g, a.b + b.b}; }
inline Rgb operator-(Rgb a, Rgb b) { return {a.r - b.r, a.g - b.g, a.b - b.b}; }
inline Rgb operator*(double s, Rgb c) { return {s * c.r, s * c.g, s * c.b}; }

struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(Rgb8, Rgb8) = default;
};

/// Round half to even per channel (IEEE default rounding), clamped to [0, 255].
inline std::uint8_t quantize_channel(double v) {
    double q = std::nearbyint(v);
    if (q < 0.0) q = 0.0;
    if (q > 255.0) q = 255.0;
    return static_cast<std::uint8_t>(q);
}

inline Rgb8 quantize(const Rgb& c) {
    return {quantize_channel(c.r), quantize_channel(c.g), quantize_channel(c.b)};
}

inline Rgb to_real(Rgb8 c) {
    return {static_cast<double>(c.r), static_cast<double>(c.g), static_cast<double>(c.b)};
}

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace cephforge
