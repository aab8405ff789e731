#pragma once

#include <lincntk/cntk.hpp>
#include <lincntk/geometry.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace lincntk {

enum class Family { Cntk, AlignedRidge };
enum class SigmaSource { Identity, InverseTheta, File };
enum class BetaSource { Synthetic, File };

/// Everything an experiment run needs. Keys in the config file match the
/// field names; see README for the full table.
struct SweepConfig {
    GeometryKind geometry = GeometryKind::OneD;
    std::size_t size = 0;
    Padding padding = Padding::Zero;
    Architecture architecture = Architecture::Pooling;
    Route route = Route::Stencil;
    std::vector<std::size_t> depths;

    // Theta_D = beta beta^T + |D - family_center| I instead of the CNTK
    Family family = Family::Cntk;
    std::size_t family_center = 10;

    SigmaSource sigma = SigmaSource::Identity;
    std::size_t sigma_depth = 50;
    std::filesystem::path sigma_file;
    BetaSource beta = BetaSource::Synthetic;
    std::filesystem::path beta_file;
    double noise_var = 0.01;
    std::size_t n = 10;

    std::size_t bias_trials = 500;
    std::size_t variance_trials = 2000;
    std::size_t risk_trials = 500;
    std::size_t test_points = 100;

    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    unsigned threads = 1;

    std::filesystem::path images;
    std::filesystem::path labels;
    std::size_t mnist_trials = 20;
    std::size_t count_per_class = 50;
    int digit_pos = 0;
    int digit_neg = 1;
    bool shuffle = false;

    bool gallery_limit = false;

    ConvGeometry conv_geometry() const { return {geometry, size}; }
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::string key, const std::string& message);
    std::size_t line() const { return line_; }  // 0 when not tied to a line
    const std::string& key() const { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

/// Relative paths inside the text resolve against `base_dir`.
SweepConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
SweepConfig parse_config(const std::filesystem::path& path);

/// Log-spaced integer grid over [start, stop]: `count` points, rounded and
/// deduplicated. A start of 0 contributes depth 0 and the rest is spaced
/// over [1, stop]. A single point is `stop`.
std::vector<std::size_t> log_spaced_depths(std::size_t start, std::size_t stop, std::size_t count);

}  // namespace lincntk
