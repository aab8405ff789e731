#pragma once

#include <lincntk/config.hpp>
#include <lincntk/linreg.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lincntk {

using Meta = std::vector<std::pair<std::string, std::string>>;

struct DepthSweepRecord {
    std::size_t depth = 0;
    double bias_mean = 0.0, bias_se = 0.0;
    double var_mean = 0.0, var_se = 0.0;
    double risk_mean = 0.0, risk_se = 0.0;
    double g = 0.0;
};

/// Matched-seed contrast of one depth against the argmin depth of each
/// column: mean and standard error of the per-trial differences.
struct PairedRecord {
    std::size_t depth = 0;
    double bias_diff = 0.0, bias_diff_se = 0.0;
    double var_diff = 0.0, var_diff_se = 0.0;
    double risk_diff = 0.0, risk_diff_se = 0.0;
};

struct SweepResult {
    std::vector<DepthSweepRecord> records;
    std::vector<PairedRecord> paired;
    double sigma_ridge = 0.0;  // epsilon added before inverting Theta, 0 if unused
    Meta meta;
};

/// Theta_D for each configured depth, then bias/variance/risk Monte Carlo on
/// one shared seed. Throws on invalid input; nothing is written.
SweepResult run_depth_sweep(const SweepConfig& cfg);
/// sweep.csv, sweep_paired.csv, sweep_meta.txt
void write_sweep(const SweepResult& result, const std::filesystem::path& dir);

struct EigvecImage {
    std::optional<std::size_t> depth;  // empty for the infinite-depth limit
    Vector eigenvector;
    std::vector<std::uint8_t> pixels;
    double participation = 0.0;
    double leading_eigenvalue = 0.0;
    double spectral_gap = 0.0;

    std::string file_name() const;
};

struct GalleryResult {
    std::size_t side = 0;
    std::vector<EigvecImage> images;
};

/// Leading eigenvector of Theta_D per depth as an s x s grayscale image.
/// With gallery_limit the infinite-depth limit is appended as eigvec_Dinf.
/// Throws std::invalid_argument for 1-D geometry.
GalleryResult run_eigvec_gallery(const SweepConfig& cfg);
/// eigvec_D{d}.pgm per image plus eigvec_summary.csv
void write_gallery(const GalleryResult& result, const std::filesystem::path& dir);

struct MnistRecord {
    std::size_t depth = 0;
    double loss_mean = 0.0, loss_se = 0.0;
    double g = 0.0;
};

struct MnistPaired {
    std::size_t depth = 0;
    double loss_diff = 0.0, loss_diff_se = 0.0;
};

struct MnistResult {
    std::vector<MnistRecord> records;
    std::vector<MnistPaired> paired;
    RiskEstimate baseline;  // Theta = I
    Meta meta;
};

/// Binary digit regression: ground truth beta interpolates the selected
/// examples; each trial fits on a fresh subsample of n of them and scores
/// the squared loss on all of them.
MnistResult run_mnist_experiment(const SweepConfig& cfg);
/// mnist.csv, mnist_paired.csv, mnist_meta.txt
void write_mnist(const MnistResult& result, const std::filesystem::path& dir);

struct UShape {
    std::size_t argmin = 0;
    bool interior = false;
    double left_gap = 0.0, left_se = 0.0;
    double right_gap = 0.0, right_se = 0.0;

    bool holds(double k = 3.0) const
    {
        return interior && left_gap > k * left_se && right_gap > k * right_se;
    }
};

/// Endpoints against the minimum with summed standard errors.
UShape u_shape(const std::vector<double>& mean, const std::vector<double>& se);
/// Endpoints against the minimum using paired differences already taken
/// relative to the argmin entry.
UShape u_shape_paired(const std::vector<double>& mean, const std::vector<double>& diff,
                      const std::vector<double>& diff_se);

/// Index of the first minimum.
std::size_t argmin_index(const std::vector<double>& v);

}  // namespace lincntk
