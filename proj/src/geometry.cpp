#include <lincntk/geometry.hpp>

#include <stdexcept>

namespace lincntk {

ConvGeometry::ConvGeometry(GeometryKind kind, std::size_t size, std::size_t filter_halfwidth)
    : kind_(kind), side_(size), pixels_(0), halfwidth_(filter_halfwidth)
{
    if (size == 0)
        throw std::invalid_argument("geometry size must be positive");
    if (filter_halfwidth != 1)
        throw std::invalid_argument("only filter halfwidth 1 is supported, got " +
                                    std::to_string(filter_halfwidth));
    switch (kind) {
    case GeometryKind::OneD:
        pixels_ = size;
        break;
    case GeometryKind::TwoD:
        pixels_ = size * size;
        break;
    default:
        throw std::invalid_argument("unsupported geometry kind");
    }
}

std::array<std::size_t, 2> ConvGeometry::extents() const
{
    if (kind_ == GeometryKind::OneD)
        return {1, side_};
    return {side_, side_};
}

std::array<std::vector<int>, 2> ConvGeometry::axis_offsets() const
{
    const std::vector<int> full{-1, 0, 1};
    if (kind_ == GeometryKind::OneD)
        return {std::vector<int>{0}, full};
    return {full, full};
}

std::string to_string(GeometryKind kind)
{
    return kind == GeometryKind::OneD ? "1d" : "2d";
}

std::string to_string(Padding padding)
{
    return padding == Padding::Zero ? "zero" : "circular";
}

std::string to_string(Architecture architecture)
{
    return architecture == Architecture::Flattening ? "flattening" : "pooling";
}

}  // namespace lincntk
