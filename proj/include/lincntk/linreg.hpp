#pragma once

#include <lincntk/cntk.hpp>
#include <lincntk/linalg.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lincntk {

/// x ~ N(0, sigma), y = x^T beta + eps with eps ~ N(0, noise_var), and n
/// training samples with n < p.
struct RegressionProblem {
    Matrix sigma;
    Vector beta;
    double noise_var = 0.0;
    std::size_t n = 0;

    Eigen::Index dim() const { return beta.size(); }
};

/// Validating constructor: sigma symmetric PSD and p x p, noise_var >= 0,
/// 1 <= n < p. Throws std::invalid_argument.
RegressionProblem make_problem(Matrix sigma, Vector beta, double noise_var, std::size_t n);

struct RiskEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(trials)
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

/// Mean and standard error of per-trial values, summed in index order.
RiskEstimate summarize(std::span<const double> samples, std::uint64_t seed);

/// Kernel ridgeless regression with the linear kernel K(x, x') = x^T Theta x'.
class PredictorFit {
public:
    PredictorFit(Matrix x_train, Vector y_train, Vector dual_weights, Vector weights,
                 Eigen::Index effective_rank);

    /// x^T Theta X^T alpha
    double predict(const Vector& x) const { return x.dot(weights_); }
    /// One prediction per row.
    Vector predict_rows(const Matrix& xs) const { return xs * weights_; }

    const Matrix& x_train() const { return x_train_; }
    const Vector& y_train() const { return y_train_; }
    /// alpha = (X Theta X^T)^+ Y
    const Vector& dual_weights() const { return dual_weights_; }
    /// Theta X^T alpha, the equivalent primal predictor.
    const Vector& weights() const { return weights_; }
    Eigen::Index effective_rank() const { return effective_rank_; }

private:
    Matrix x_train_;
    Vector y_train_;
    Vector dual_weights_;
    Vector weights_;
    Eigen::Index effective_rank_;
};

/// Throws std::invalid_argument if theta is not PSD, shapes disagree or n >= p.
PredictorFit fit_ridgeless(const Matrix& theta, const Matrix& x_train, const Vector& y_train);
/// Same, trusting the transform to be PSD (the CNTK recursion preserves it).
PredictorFit fit_ridgeless(const FeatureTransform& ft, const Matrix& x_train, const Vector& y_train);

/// ||P_perp beta||^2_Sigma with P_perp = I - Theta X^T (X Theta X^T)^+ X.
double bias_conditional(const Matrix& theta, const Vector& beta, const Matrix& sigma,
                        const Matrix& x_train);

/// Per-trial values behind the Monte Carlo estimators. Trial t draws its
/// design from stream (seed, t), so the same seed gives matched designs
/// across bias, variance and risk and across different Theta.
std::vector<double> bias_samples(const Matrix& theta, const RegressionProblem& problem,
                                 std::size_t trials, std::uint64_t seed, unsigned threads = 1);
std::vector<double> variance_samples(const Matrix& theta, const RegressionProblem& problem,
                                     std::size_t trials, std::uint64_t seed, unsigned threads = 1);
std::vector<double> risk_samples(const Matrix& theta, const RegressionProblem& problem,
                                 std::size_t trials, std::uint64_t seed, unsigned threads = 1,
                                 std::size_t test_points = 100);

RiskEstimate bias_mc(const Matrix& theta, const RegressionProblem& problem, std::size_t trials,
                     std::uint64_t seed, unsigned threads = 1);

/// sigma^2 E Tr[(Z S Z^T)^-2 Z S^2 Z^T] with S = Sigma^1/2 Theta Sigma^1/2.
RiskEstimate variance_mc(const Matrix& theta, const RegressionProblem& problem, std::size_t trials,
                         std::uint64_t seed, unsigned threads = 1);

/// Squared error of fitted predictors on fresh test points, averaged over
/// `test_points` draws per trial.
RiskEstimate excess_risk_mc(const Matrix& theta, const RegressionProblem& problem,
                            std::size_t trials, std::uint64_t seed, unsigned threads = 1,
                            std::size_t test_points = 100);

/// sigma^2 n / (p - n - 1); requires p > n + 1.
double variance_lower_bound(double noise_var, std::size_t n, std::size_t p);

/// 1 - (u^T Theta u)^2 / ||Theta||_F^2 with u = beta / ||beta||.
double alignment_g(const Matrix& theta, const Vector& beta);

}  // namespace lincntk
