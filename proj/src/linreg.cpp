#include <lincntk/linreg.hpp>
#include <lincntk/parallel.hpp>
#include <lincntk/rng.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lincntk {

namespace {

void require_shapes(const Matrix& theta, const Matrix& x_train, Eigen::Index rhs_size,
                    const char* rhs_name)
{
    if (theta.rows() != theta.cols())
        throw std::invalid_argument("theta must be square");
    if (x_train.cols() != theta.rows())
        throw std::invalid_argument("x_train has " + std::to_string(x_train.cols()) +
                                    " columns but theta is " + std::to_string(theta.rows()) + "x" +
                                    std::to_string(theta.cols()));
    if (rhs_size != x_train.rows() && rhs_size >= 0)
        throw std::invalid_argument(std::string(rhs_name) + " length does not match x_train rows");
}

struct KernelSolve {
    Matrix theta_xt;  // Theta X^T, p x n
    SpectralPinv kernel_pinv;
};

KernelSolve solve_kernel(const Matrix& theta, const Matrix& x)
{
    Matrix theta_xt = theta * x.transpose();
    Matrix k = x * theta_xt;
    k = 0.5 * (k + k.transpose());
    return {std::move(theta_xt), SpectralPinv(k)};
}

PredictorFit fit_unchecked(const Matrix& theta, const Matrix& x_train, const Vector& y_train)
{
    const auto solved = solve_kernel(theta, x_train);
    Vector alpha = solved.kernel_pinv.solve(y_train);
    Vector weights = solved.theta_xt * alpha;
    return {x_train, y_train, std::move(alpha), std::move(weights), solved.kernel_pinv.rank()};
}

double bias_unchecked(const Matrix& theta, const Vector& beta, const Matrix& sigma, const Matrix& x)
{
    const auto solved = solve_kernel(theta, x);
    const Vector residual = beta - solved.theta_xt * solved.kernel_pinv.solve(Vector(x * beta));
    return std::max(0.0, residual.dot(sigma * residual));
}

void validate_for_mc(const Matrix& theta, const RegressionProblem& problem, std::size_t trials)
{
    if (trials == 0)
        throw std::invalid_argument("Monte Carlo needs at least one trial");
    if (theta.rows() != problem.dim() || theta.cols() != problem.dim())
        throw std::invalid_argument("theta does not match the problem dimension");
    if (problem.noise_var < 0.0)
        throw std::invalid_argument("noise variance must be non-negative");
    require_psd(theta, "theta");
}

Matrix draw_design(const Matrix& sigma_root, std::size_t n, std::uint64_t seed, std::size_t trial)
{
    NormalSampler normal = make_normal_stream(seed, trial, Stream::Design);
    return normal.matrix(static_cast<Eigen::Index>(n), sigma_root.rows()) * sigma_root;
}

}  // namespace

RegressionProblem make_problem(Matrix sigma, Vector beta, double noise_var, std::size_t n)
{
    const Eigen::Index p = beta.size();
    if (sigma.rows() != p || sigma.cols() != p)
        throw std::invalid_argument("sigma must be p x p with p = beta length");
    require_psd(sigma, "sigma");
    if (!(noise_var >= 0.0))
        throw std::invalid_argument("noise variance must be non-negative");
    if (n < 1 || static_cast<Eigen::Index>(n) >= p)
        throw std::invalid_argument("need 1 <= n < p (over-parameterized), got n = " +
                                    std::to_string(n) + ", p = " + std::to_string(p));
    return {std::move(sigma), std::move(beta), noise_var, n};
}

RiskEstimate summarize(std::span<const double> samples, std::uint64_t seed)
{
    RiskEstimate est;
    est.trials = samples.size();
    est.seed = seed;
    if (samples.empty())
        return est;
    double sum = 0.0;
    for (double v : samples)
        sum += v;
    est.mean = sum / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double v : samples)
            ss += (v - est.mean) * (v - est.mean);
        const double var = ss / static_cast<double>(samples.size() - 1);
        est.std_error = std::sqrt(var / static_cast<double>(samples.size()));
    }
    return est;
}

PredictorFit::PredictorFit(Matrix x_train, Vector y_train, Vector dual_weights, Vector weights,
                           Eigen::Index effective_rank)
    : x_train_(std::move(x_train)),
      y_train_(std::move(y_train)),
      dual_weights_(std::move(dual_weights)),
      weights_(std::move(weights)),
      effective_rank_(effective_rank)
{
}

PredictorFit fit_ridgeless(const Matrix& theta, const Matrix& x_train, const Vector& y_train)
{
    require_shapes(theta, x_train, y_train.size(), "y_train");
    if (x_train.rows() >= x_train.cols())
        throw std::invalid_argument("ridgeless regression expects n < p");
    require_psd(theta, "theta");
    return fit_unchecked(theta, x_train, y_train);
}

PredictorFit fit_ridgeless(const FeatureTransform& ft, const Matrix& x_train, const Vector& y_train)
{
    require_shapes(ft.theta(), x_train, y_train.size(), "y_train");
    if (x_train.rows() >= x_train.cols())
        throw std::invalid_argument("ridgeless regression expects n < p");
    return fit_unchecked(ft.theta(), x_train, y_train);
}

double bias_conditional(const Matrix& theta, const Vector& beta, const Matrix& sigma,
                        const Matrix& x_train)
{
    require_shapes(theta, x_train, -1, "");
    if (beta.size() != theta.rows())
        throw std::invalid_argument("beta length does not match theta");
    if (sigma.rows() != theta.rows() || sigma.cols() != theta.cols())
        throw std::invalid_argument("sigma shape does not match theta");
    require_psd(theta, "theta");
    return bias_unchecked(theta, beta, sigma, x_train);
}

std::vector<double> bias_samples(const Matrix& theta, const RegressionProblem& problem,
                                 std::size_t trials, std::uint64_t seed, unsigned threads)
{
    validate_for_mc(theta, problem, trials);
    const Matrix root = sym_sqrt_psd(problem.sigma);
    return parallel_indexed<double>(trials, threads, [&](std::size_t t) {
        const Matrix x = draw_design(root, problem.n, seed, t);
        return bias_unchecked(theta, problem.beta, problem.sigma, x);
    });
}

std::vector<double> variance_samples(const Matrix& theta, const RegressionProblem& problem,
                                     std::size_t trials, std::uint64_t seed, unsigned threads)
{
    validate_for_mc(theta, problem, trials);
    if (problem.noise_var == 0.0)
        return std::vector<double>(trials, 0.0);
    const Matrix root = sym_sqrt_psd(problem.sigma);
    Matrix whitened = root * theta * root;
    whitened = 0.5 * (whitened + whitened.transpose());
    const auto n = static_cast<Eigen::Index>(problem.n);

    return parallel_indexed<double>(trials, threads, [&](std::size_t t) {
        NormalSampler normal = make_normal_stream(seed, t, Stream::Design);
        const Matrix z = normal.matrix(n, problem.dim());
        const Matrix w = z * whitened;  // Z S
        Matrix m = w * z.transpose();   // Z S Z^T
        m = 0.5 * (m + m.transpose());
        // Tr[M^-2 W W^T] = ||M^+ W||_F^2
        return problem.noise_var * SpectralPinv(m).solve(w).squaredNorm();
    });
}

std::vector<double> risk_samples(const Matrix& theta, const RegressionProblem& problem,
                                 std::size_t trials, std::uint64_t seed, unsigned threads,
                                 std::size_t test_points)
{
    validate_for_mc(theta, problem, trials);
    if (test_points == 0)
        throw std::invalid_argument("need at least one test point per trial");
    const Matrix root = sym_sqrt_psd(problem.sigma);
    const double noise_sd = std::sqrt(problem.noise_var);
    const auto n = static_cast<Eigen::Index>(problem.n);

    return parallel_indexed<double>(trials, threads, [&](std::size_t t) {
        const Matrix x = draw_design(root, problem.n, seed, t);
        const Vector noise = noise_sd * make_normal_stream(seed, t, Stream::Noise).vector(n);
        const Vector y = x * problem.beta + noise;
        const PredictorFit fit = fit_unchecked(theta, x, y);

        NormalSampler normal = make_normal_stream(seed, t, Stream::TestPoints);
        const Matrix x_test = normal.matrix(static_cast<Eigen::Index>(test_points), problem.dim()) * root;
        const Vector err = x_test * (problem.beta - fit.weights());
        return err.squaredNorm() / static_cast<double>(test_points);
    });
}

RiskEstimate bias_mc(const Matrix& theta, const RegressionProblem& problem, std::size_t trials,
                     std::uint64_t seed, unsigned threads)
{
    return summarize(bias_samples(theta, problem, trials, seed, threads), seed);
}

RiskEstimate variance_mc(const Matrix& theta, const RegressionProblem& problem, std::size_t trials,
                         std::uint64_t seed, unsigned threads)
{
    return summarize(variance_samples(theta, problem, trials, seed, threads), seed);
}

RiskEstimate excess_risk_mc(const Matrix& theta, const RegressionProblem& problem,
                            std::size_t trials, std::uint64_t seed, unsigned threads,
                            std::size_t test_points)
{
    return summarize(risk_samples(theta, problem, trials, seed, threads, test_points), seed);
}

double variance_lower_bound(double noise_var, std::size_t n, std::size_t p)
{
    if (p <= n + 1)
        throw std::invalid_argument("variance bound needs p > n + 1");
    if (noise_var < 0.0)
        throw std::invalid_argument("noise variance must be non-negative");
    return noise_var * static_cast<double>(n) / static_cast<double>(p - n - 1);
}

double alignment_g(const Matrix& theta, const Vector& beta)
{
    if (theta.rows() != theta.cols() || theta.rows() != beta.size())
        throw std::invalid_argument("alignment_g: theta must be p x p with p = beta length");
    const double beta_norm = beta.norm();
    if (beta_norm == 0.0)
        throw std::invalid_argument("alignment_g: beta is zero");
    const double theta_norm_sq = theta.squaredNorm();
    if (theta_norm_sq == 0.0)
        throw std::invalid_argument("alignment_g: theta is zero");
    const Vector u = beta / beta_norm;
    const double q = u.dot(theta * u);
    return std::clamp(1.0 - q * q / theta_norm_sq, 0.0, 1.0);
}

}  // namespace lincntk
