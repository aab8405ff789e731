#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lincntk {

enum class GeometryKind { OneD, TwoD };
enum class Padding { Zero, Circular };
enum class Architecture { Flattening, Pooling };

/// Spatial layout of a single-channel input plus the filter support.
///
/// A 1-D input of length p is treated as a 1 x p grid whose first axis has no
/// filter extent, and a 2-D input of side s as an s x s grid with pixel (i, j)
/// stored at index i * s + j. Only halfwidth-1 filters (3 taps / 3x3) are
/// supported.
class ConvGeometry {
public:
    ConvGeometry(GeometryKind kind, std::size_t size, std::size_t filter_halfwidth = 1);

    static ConvGeometry one_d(std::size_t p) { return {GeometryKind::OneD, p}; }
    static ConvGeometry two_d(std::size_t side) { return {GeometryKind::TwoD, side}; }

    GeometryKind kind() const { return kind_; }
    std::size_t pixels() const { return pixels_; }
    /// p for 1-D, s for 2-D.
    std::size_t side() const { return side_; }
    std::size_t filter_halfwidth() const { return halfwidth_; }

    /// Grid extents (rows, cols).
    std::array<std::size_t, 2> extents() const;

    /// Filter offsets along each axis. Axis 0 of a 1-D geometry only has {0}.
    std::array<std::vector<int>, 2> axis_offsets() const;

    bool operator==(const ConvGeometry&) const = default;

private:
    GeometryKind kind_;
    std::size_t side_;
    std::size_t pixels_;
    std::size_t halfwidth_;
};

std::string to_string(GeometryKind kind);
std::string to_string(Padding padding);
std::string to_string(Architecture architecture);

}  // namespace lincntk
