#pragma once

namespace cftrack {

/// Continuous frame coordinate. Pixel (r, c) covers [c, c+1) x [r, r+1).
struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend constexpr bool operator==(const Point2&, const Point2&) = default;
};

struct Size2 {
    double width = 0.0;
    double height = 0.0;
    friend constexpr bool operator==(const Size2&, const Size2&) = default;
};

/// Axis-aligned box, top-left origin.
struct BoxRect {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;

    constexpr Point2 center() const noexcept { return {x + width / 2.0, y + height / 2.0}; }
    constexpr Size2 size() const noexcept { return {width, height}; }

    static constexpr BoxRect from_center(Point2 c, Size2 s) noexcept {
        return {c.x - s.width / 2.0, c.y - s.height / 2.0, s.width, s.height};
    }

    friend constexpr bool operator==(const BoxRect&, const BoxRect&) = default;
};

}  // namespace cftrack
