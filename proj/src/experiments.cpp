#include <lincntk/cntk.hpp>
#include <lincntk/data.hpp>
#include <lincntk/experiments.hpp>
#include <lincntk/output.hpp>
#include <lincntk/parallel.hpp>
#include <lincntk/rng.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lincntk {

namespace {

// Yields Theta_D for non-decreasing depths: one incremental stencil run, or
// an independent spectral evaluation per depth.
class DepthTransforms {
public:
    explicit DepthTransforms(const SweepConfig& cfg)
        : cfg_(cfg), sequence_(cfg.conv_geometry(), cfg.padding, cfg.architecture)
    {
    }

    FeatureTransform at(std::size_t depth)
    {
        if (cfg_.route == Route::Spectral)
            return feature_transform(depth, cfg_.conv_geometry(), cfg_.padding, cfg_.architecture,
                                     Route::Spectral);
        return sequence_.advance_to(depth);
    }

private:
    const SweepConfig& cfg_;
    TransformSequence sequence_;
};

std::string to_string(Family f) { return f == Family::Cntk ? "cntk" : "aligned_ridge"; }
std::string to_string(Route r) { return r == Route::Stencil ? "stencil" : "spectral"; }
std::string to_string(SigmaSource s)
{
    switch (s) {
    case SigmaSource::Identity: return "identity";
    case SigmaSource::InverseTheta: return "inverse_theta";
    case SigmaSource::File: return "file";
    }
    return "?";
}

std::string meta_text(const Meta& meta)
{
    std::string out;
    for (const auto& [k, v] : meta)
        out += k + "=" + v + "\n";
    return out;
}

Vector load_beta(const SweepConfig& cfg, Eigen::Index p)
{
    if (cfg.beta == BetaSource::Synthetic) {
        const Vector b = make_normal_stream(cfg.seed, 0, Stream::Beta).vector(p);
        return b / b.norm();
    }
    const Matrix m = read_matrix_csv(cfg.beta_file);
    if (m.size() != p || (m.rows() != 1 && m.cols() != 1))
        throw std::invalid_argument("beta_file must hold " + std::to_string(p) + " values as a row or column");
    return Eigen::Map<const Vector>(m.data(), p);
}

// Sigma and the ridge used to invert Theta (0 when not applicable).
std::pair<Matrix, double> load_sigma(const SweepConfig& cfg, Eigen::Index p)
{
    switch (cfg.sigma) {
    case SigmaSource::Identity:
        return {Matrix::Identity(p, p), 0.0};
    case SigmaSource::File: {
        Matrix s = read_matrix_csv(cfg.sigma_file);
        if (s.rows() != p || s.cols() != p)
            throw std::invalid_argument("sigma_file must be " + std::to_string(p) + "x" + std::to_string(p));
        require_psd(s, "sigma_file");
        return {s, 0.0};
    }
    case SigmaSource::InverseTheta: {
        const Matrix theta = feature_transform(cfg.sigma_depth, cfg.conv_geometry(), cfg.padding,
                                               cfg.architecture, cfg.route)
                                 .theta();
        const double ridge = 1e-10 * Eigen::SelfAdjointEigenSolver<Matrix>(theta).eigenvalues().maxCoeff();
        Matrix s = (theta + ridge * Matrix::Identity(p, p)).inverse();
        s = 0.5 * (s + s.transpose());
        s *= static_cast<double>(p) / s.trace();
        return {s, ridge};
    }
    }
    throw std::logic_error("unhandled sigma source");
}

std::pair<double, double> paired_diff(const std::vector<double>& a, const std::vector<double>& ref)
{
    std::vector<double> d(a.size());
    for (std::size_t t = 0; t < a.size(); ++t)
        d[t] = a[t] - ref[t];
    const RiskEstimate est = summarize(d, 0);
    return {est.mean, est.std_error};
}

void common_meta(Meta& meta, const SweepConfig& cfg)
{
    meta.emplace_back("geometry", to_string(cfg.geometry));
    meta.emplace_back("size", std::to_string(cfg.size));
    meta.emplace_back("padding", to_string(cfg.padding));
    meta.emplace_back("architecture", to_string(cfg.architecture));
    meta.emplace_back("route", to_string(cfg.route));
    meta.emplace_back("seed", std::to_string(cfg.seed));
}

std::string depth_list(const std::vector<std::size_t>& depths)
{
    std::string out;
    for (std::size_t d : depths)
        out += (out.empty() ? "" : ",") + std::to_string(d);
    return out;
}

}  // namespace

std::size_t argmin_index(const std::vector<double>& v)
{
    if (v.empty())
        throw std::invalid_argument("argmin of an empty column");
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

UShape u_shape(const std::vector<double>& mean, const std::vector<double>& se)
{
    UShape u;
    u.argmin = argmin_index(mean);
    u.interior = u.argmin > 0 && u.argmin + 1 < mean.size();
    u.left_gap = mean.front() - mean[u.argmin];
    u.left_se = se.front() + se[u.argmin];
    u.right_gap = mean.back() - mean[u.argmin];
    u.right_se = se.back() + se[u.argmin];
    return u;
}

UShape u_shape_paired(const std::vector<double>& mean, const std::vector<double>& diff,
                      const std::vector<double>& diff_se)
{
    UShape u;
    u.argmin = argmin_index(mean);
    u.interior = u.argmin > 0 && u.argmin + 1 < mean.size();
    u.left_gap = diff.front();
    u.left_se = diff_se.front();
    u.right_gap = diff.back();
    u.right_se = diff_se.back();
    return u;
}

SweepResult run_depth_sweep(const SweepConfig& cfg)
{
    const ConvGeometry geometry = cfg.conv_geometry();
    const auto p = static_cast<Eigen::Index>(geometry.pixels());
    const Vector beta = load_beta(cfg, p);
    auto [sigma, ridge] = load_sigma(cfg, p);
    const RegressionProblem problem = make_problem(std::move(sigma), beta, cfg.noise_var, cfg.n);

    DepthTransforms transforms(cfg);
    std::vector<std::vector<double>> bias, var, risk;
    SweepResult result;
    result.sigma_ridge = ridge;
    for (std::size_t depth : cfg.depths) {
        Matrix theta;
        if (cfg.family == Family::Cntk) {
            theta = transforms.at(depth).theta();
        } else {
            const double shift = std::abs(static_cast<double>(depth) - static_cast<double>(cfg.family_center));
            theta = beta * beta.transpose() + shift * Matrix::Identity(p, p);
        }
        bias.push_back(bias_samples(theta, problem, cfg.bias_trials, cfg.seed, cfg.threads));
        var.push_back(variance_samples(theta, problem, cfg.variance_trials, cfg.seed, cfg.threads));
        risk.push_back(risk_samples(theta, problem, cfg.risk_trials, cfg.seed, cfg.threads, cfg.test_points));

        DepthSweepRecord rec;
        rec.depth = depth;
        const RiskEstimate b = summarize(bias.back(), cfg.seed);
        const RiskEstimate v = summarize(var.back(), cfg.seed);
        const RiskEstimate r = summarize(risk.back(), cfg.seed);
        rec.bias_mean = b.mean;
        rec.bias_se = b.std_error;
        rec.var_mean = v.mean;
        rec.var_se = v.std_error;
        rec.risk_mean = r.mean;
        rec.risk_se = r.std_error;
        rec.g = alignment_g(theta, beta);
        result.records.push_back(rec);
    }

    auto column = [&](double DepthSweepRecord::*field) {
        std::vector<double> out;
        for (const auto& rec : result.records)
            out.push_back(rec.*field);
        return out;
    };
    const std::size_t ib = argmin_index(column(&DepthSweepRecord::bias_mean));
    const std::size_t iv = argmin_index(column(&DepthSweepRecord::var_mean));
    const std::size_t ir = argmin_index(column(&DepthSweepRecord::risk_mean));
    for (std::size_t i = 0; i < cfg.depths.size(); ++i) {
        PairedRecord pr;
        pr.depth = cfg.depths[i];
        std::tie(pr.bias_diff, pr.bias_diff_se) = paired_diff(bias[i], bias[ib]);
        std::tie(pr.var_diff, pr.var_diff_se) = paired_diff(var[i], var[iv]);
        std::tie(pr.risk_diff, pr.risk_diff_se) = paired_diff(risk[i], risk[ir]);
        result.paired.push_back(pr);
    }

    Meta& meta = result.meta;
    common_meta(meta, cfg);
    meta.emplace_back("depths", depth_list(cfg.depths));
    meta.emplace_back("family", to_string(cfg.family));
    if (cfg.family == Family::AlignedRidge)
        meta.emplace_back("family_center", std::to_string(cfg.family_center));
    meta.emplace_back("p", std::to_string(p));
    meta.emplace_back("n", std::to_string(cfg.n));
    meta.emplace_back("noise_var", format_g17(cfg.noise_var));
    meta.emplace_back("sigma", to_string(cfg.sigma));
    if (cfg.sigma == SigmaSource::InverseTheta) {
        meta.emplace_back("sigma_depth", std::to_string(cfg.sigma_depth));
        meta.emplace_back("sigma_ridge", format_g17(ridge));
    }
    meta.emplace_back("beta", cfg.beta == BetaSource::Synthetic ? "synthetic" : "file");
    meta.emplace_back("bias_trials", std::to_string(cfg.bias_trials));
    meta.emplace_back("variance_trials", std::to_string(cfg.variance_trials));
    meta.emplace_back("risk_trials", std::to_string(cfg.risk_trials));
    meta.emplace_back("test_points", std::to_string(cfg.test_points));
    if (static_cast<std::size_t>(p) > cfg.n + 1)
        meta.emplace_back("variance_lower_bound", format_g17(variance_lower_bound(cfg.noise_var, cfg.n, static_cast<std::size_t>(p))));
    meta.emplace_back("argmin_bias_depth", std::to_string(cfg.depths[ib]));
    meta.emplace_back("argmin_var_depth", std::to_string(cfg.depths[iv]));
    meta.emplace_back("argmin_risk_depth", std::to_string(cfg.depths[ir]));
    return result;
}

void write_sweep(const SweepResult& result, const std::filesystem::path& dir)
{
    std::string csv = "depth,bias_mean,bias_se,var_mean,var_se,risk_mean,risk_se,g\n";
    for (const auto& r : result.records)
        csv += std::to_string(r.depth) + "," + format_g17(r.bias_mean) + "," + format_g17(r.bias_se) + "," +
               format_g17(r.var_mean) + "," + format_g17(r.var_se) + "," + format_g17(r.risk_mean) + "," +
               format_g17(r.risk_se) + "," + format_g17(r.g) + "\n";
    std::string paired = "depth,bias_diff,bias_diff_se,var_diff,var_diff_se,risk_diff,risk_diff_se\n";
    for (const auto& r : result.paired)
        paired += std::to_string(r.depth) + "," + format_g17(r.bias_diff) + "," + format_g17(r.bias_diff_se) +
                  "," + format_g17(r.var_diff) + "," + format_g17(r.var_diff_se) + "," +
                  format_g17(r.risk_diff) + "," + format_g17(r.risk_diff_se) + "\n";
    write_file_atomic(dir / "sweep.csv", csv);
    write_file_atomic(dir / "sweep_paired.csv", paired);
    write_file_atomic(dir / "sweep_meta.txt", meta_text(result.meta));
}

std::string EigvecImage::file_name() const
{
    return "eigvec_D" + (depth ? std::to_string(*depth) : std::string("inf")) + ".pgm";
}

GalleryResult run_eigvec_gallery(const SweepConfig& cfg)
{
    if (cfg.geometry != GeometryKind::TwoD)
        throw std::invalid_argument("eigenvector gallery needs 2-D geometry");
    GalleryResult result;
    result.side = cfg.size;

    auto render = [](EigvecImage& img, const SpectralSummary& s) {
        img.leading_eigenvalue = s.eigenvalues.front();
        img.spectral_gap = s.spectral_gap;
        img.participation = participation_ratio(img.eigenvector);
        img.pixels = to_gray(img.eigenvector);
    };

    DepthTransforms transforms(cfg);
    for (std::size_t depth : cfg.depths) {
        EigvecImage img;
        img.depth = depth;
        const SpectralSummary s = spectral_summary(transforms.at(depth));
        img.eigenvector = s.leading_eigenvector;
        render(img, s);
        result.images.push_back(std::move(img));
    }
    if (cfg.gallery_limit) {
        // Under zero padding Theta* is diagonal, so its top eigenvalue is
        // shared by every pixel tied for the largest sine weight (the four
        // central pixels for even s). The leading eigenvectors of Theta_D
        // tend to the uniform vector on that tie set.
        const FeatureTransform limit = limiting_transform(cfg.conv_geometry(), cfg.padding, cfg.architecture);
        const SpectralSummary s = spectral_summary(limit);
        EigvecImage img;
        if (cfg.padding == Padding::Zero) {
            const Vector d = limit.theta().diagonal();
            const double top = d.maxCoeff();
            img.eigenvector = (d.array() >= top * (1.0 - 1e-12)).cast<double>().matrix();
            img.eigenvector.normalize();
        } else {
            img.eigenvector = s.leading_eigenvector;
        }
        render(img, s);
        result.images.push_back(std::move(img));
    }
    return result;
}

void write_gallery(const GalleryResult& result, const std::filesystem::path& dir)
{
    std::string summary = "depth,participation_ratio,leading_eigenvalue,spectral_gap\n";
    for (const auto& img : result.images)
        summary += (img.depth ? std::to_string(*img.depth) : std::string("inf")) + "," +
                   format_g17(img.participation) + "," + format_g17(img.leading_eigenvalue) + "," +
                   format_g17(img.spectral_gap) + "\n";
    for (const auto& img : result.images)
        write_file_atomic(dir / img.file_name(), pgm_bytes(img.pixels, result.side, result.side));
    write_file_atomic(dir / "eigvec_summary.csv", summary);
}

MnistResult run_mnist_experiment(const SweepConfig& cfg)
{
    if (cfg.images.empty() || cfg.labels.empty())
        throw ConfigError(0, cfg.images.empty() ? "images" : "labels",
                          "the mnist experiment needs images and labels");
    const Dataset all = load_idx_images(cfg.images, cfg.labels);
    const auto p = static_cast<Eigen::Index>(cfg.conv_geometry().pixels());
    if (all.x.cols() != p)
        throw std::invalid_argument("images have " + std::to_string(all.x.cols()) +
                                    " pixels but the configured geometry has " + std::to_string(p));
    const Dataset truth = binary_digit_subset(all, cfg.digit_pos, cfg.digit_neg, cfg.count_per_class,
                                              cfg.seed, cfg.shuffle);
    const Eigen::Index m = truth.size();
    const auto n = static_cast<Eigen::Index>(cfg.n);
    if (n >= m)
        throw std::invalid_argument("need n < " + std::to_string(m) + " selected examples");
    const Vector beta = min_norm_solve(truth.x, truth.y);

    // same subsamples at every depth
    std::vector<std::vector<Eigen::Index>> subsets;
    for (std::size_t t = 0; t < cfg.mnist_trials; ++t)
        subsets.push_back(sample_without_replacement(m, n, cfg.seed, t));

    auto losses = [&](const FeatureTransform& ft) {
        return parallel_indexed<double>(cfg.mnist_trials, cfg.threads, [&](std::size_t t) {
            Matrix x(n, p);
            Vector y(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                x.row(i) = truth.x.row(subsets[t][static_cast<std::size_t>(i)]);
                y(i) = truth.y(subsets[t][static_cast<std::size_t>(i)]);
            }
            const PredictorFit fit = fit_ridgeless(ft, x, y);
            return (truth.x * fit.weights() - truth.y).squaredNorm() / static_cast<double>(m);
        });
    };

    MnistResult result;
    const FeatureTransform identity(Matrix::Identity(p, p), cfg.conv_geometry(), cfg.padding,
                                    Architecture::Flattening, std::size_t{0}, false);
    result.baseline = summarize(losses(identity), cfg.seed);

    DepthTransforms transforms(cfg);
    std::vector<std::vector<double>> per_depth;
    for (std::size_t depth : cfg.depths) {
        const FeatureTransform ft = transforms.at(depth);
        ft.check_psd();
        per_depth.push_back(losses(ft));
        const RiskEstimate est = summarize(per_depth.back(), cfg.seed);
        result.records.push_back({depth, est.mean, est.std_error, alignment_g(ft.theta(), beta)});
    }

    std::vector<double> means, gs;
    for (const auto& r : result.records) {
        means.push_back(r.loss_mean);
        gs.push_back(r.g);
    }
    const std::size_t best = argmin_index(means);
    for (std::size_t i = 0; i < cfg.depths.size(); ++i) {
        const auto [d, se] = paired_diff(per_depth[i], per_depth[best]);
        result.paired.push_back({cfg.depths[i], d, se});
    }

    Meta& meta = result.meta;
    common_meta(meta, cfg);
    meta.emplace_back("depths", depth_list(cfg.depths));
    meta.emplace_back("source", truth.source);
    meta.emplace_back("examples", std::to_string(m));
    meta.emplace_back("n", std::to_string(n));
    meta.emplace_back("trials", std::to_string(cfg.mnist_trials));
    meta.emplace_back("shuffle", cfg.shuffle ? "true" : "false");
    meta.emplace_back("beta_norm", format_g17(beta.norm()));
    meta.emplace_back("baseline_identity_loss_mean", format_g17(result.baseline.mean));
    meta.emplace_back("baseline_identity_loss_se", format_g17(result.baseline.std_error));
    meta.emplace_back("argmin_loss_depth", std::to_string(cfg.depths[best]));
    meta.emplace_back("argmin_g_depth", std::to_string(cfg.depths[argmin_index(gs)]));
    return result;
}

void write_mnist(const MnistResult& result, const std::filesystem::path& dir)
{
    std::string csv = "depth,loss_mean,loss_se,g\n";
    for (const auto& r : result.records)
        csv += std::to_string(r.depth) + "," + format_g17(r.loss_mean) + "," + format_g17(r.loss_se) + "," +
               format_g17(r.g) + "\n";
    std::string paired = "depth,loss_diff,loss_diff_se\n";
    for (const auto& r : result.paired)
        paired += std::to_string(r.depth) + "," + format_g17(r.loss_diff) + "," + format_g17(r.loss_diff_se) + "\n";
    write_file_atomic(dir / "mnist.csv", csv);
    write_file_atomic(dir / "mnist_paired.csv", paired);
    write_file_atomic(dir / "mnist_meta.txt", meta_text(result.meta));
}

}  // namespace lincntk
