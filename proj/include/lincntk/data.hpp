#pragma once

#include <lincntk/linalg.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lincntk {

/// m flattened examples with one label each.
struct Dataset {
    Matrix x;
    Vector y;
    std::string source;

    Eigen::Index size() const { return x.rows(); }
    /// Throws std::invalid_argument on a row/label count mismatch or a
    /// non-finite entry.
    void validate() const;
};

struct GaussianSample {
    Matrix x;
    Vector y;
};

/// Rows iid N(0, sigma) via sigma^1/2 times standard normals; y = x beta + eta
/// with eta ~ N(0, noise_var I). Throws std::invalid_argument for a non-PSD
/// sigma, shape mismatch, negative noise_var or n = 0.
GaussianSample gaussian_problem(const Matrix& sigma, const Vector& beta, double noise_var,
                                std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// IDX container (MNIST layout): big-endian magic 0x000008TT with TT the
// element type and the low byte the number of dimensions, then one 32-bit
// big-endian size per dimension, then the raw unsigned bytes.

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxHeader {
    std::uint32_t magic = 0;
    std::vector<std::uint32_t> dims;

    std::size_t header_bytes() const { return 4 + 4 * dims.size(); }
    std::size_t payload_bytes() const;
};

class IdxError : public std::runtime_error {
public:
    IdxError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Parses and checks the header against the buffer length. `expected_magic`
/// must match exactly.
IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes, std::uint32_t expected_magic);

/// Reads image and label IDX files into a Dataset: pixels scaled by 1/255,
/// 28x28 images flattened row-major, raw digit labels in y.
Dataset load_idx_images(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Writers for the same layout, used to produce fixtures and subsets.
void write_idx_images(const std::filesystem::path& path, std::span<const std::uint8_t> pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

/// First `count_per_class` examples of each digit in file order (or after a
/// seeded shuffle); positives labelled +1 come first, then negatives -1.
Dataset binary_digit_subset(const Dataset& ds, int digit_pos, int digit_neg,
                            std::size_t count_per_class, std::uint64_t seed, bool shuffle = false);

/// k distinct indices from [0, m), uniformly, via a partial Fisher-Yates on
/// the Subsample stream of (seed, trial). Returned in draw order.
std::vector<Eigen::Index> sample_without_replacement(Eigen::Index m, Eigen::Index k,
                                                     std::uint64_t seed, std::uint64_t trial);

/// Minimum-norm interpolant beta = X^T (X X^T)^+ y. Throws std::runtime_error
/// reporting the residual when ||X beta - y|| > 1e-8 ||y||.
Vector min_norm_solve(const Matrix& x, const Vector& y);

/// CSV with header `label,p0,...,p{p-1}` and 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
Dataset read_dataset_csv(std::istream& in, std::string source = "csv");

}  // namespace lincntk
