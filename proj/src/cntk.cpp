#include <lincntk/cntk.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace lincntk {

namespace {

using Index = Eigen::Index;

struct Shift {
    int row;
    int col;
};

std::vector<Shift> filter_shifts(const ConvGeometry& geometry)
{
    const auto offsets = geometry.axis_offsets();
    std::vector<Shift> shifts;
    for (int k0 : offsets[0])
        for (int k1 : offsets[1])
            shifts.push_back({k0, k1});
    return shifts;
}

// Pixel reached from `pixel` by moving (k0, k1) on the grid; -1 when the move
// leaves the grid under zero padding.
std::vector<Index> shifted_pixels(const ConvGeometry& geometry, Padding padding, Shift shift)
{
    const auto [rows, cols] = geometry.extents();
    const auto nr = static_cast<long>(rows);
    const auto nc = static_cast<long>(cols);
    std::vector<Index> target(rows * cols, -1);
    for (long i = 0; i < nr; ++i) {
        for (long j = 0; j < nc; ++j) {
            long ti = i + shift.row;
            long tj = j + shift.col;
            if (padding == Padding::Circular) {
                ti = ((ti % nr) + nr) % nr;
                tj = ((tj % nc) + nc) % nc;
            } else if (ti < 0 || ti >= nr || tj < 0 || tj >= nc) {
                continue;
            }
            target[i * nc + j] = ti * nc + tj;
        }
    }
    return target;
}

struct Run {
    Index start;
    Index length;
    Index source;
};

// Maximal stretches where the shifted index advances in step with the pixel
// index, so each can be copied as one contiguous block.
std::vector<Run> contiguous_runs(const std::vector<Index>& target)
{
    std::vector<Run> runs;
    const auto n = static_cast<Index>(target.size());
    Index r = 0;
    while (r < n) {
        if (target[r] < 0) {
            ++r;
            continue;
        }
        Run run{r, 1, target[r]};
        while (r + run.length < n && target[r + run.length] == run.source + run.length)
            ++run.length;
        runs.push_back(run);
        r += run.length;
    }
    return runs;
}

void normalize_frobenius(Matrix& m)
{
    const double norm = m.norm();
    if (norm == 0.0)
        throw std::domain_error("feature transform collapsed to zero");
    m /= norm;
}

Matrix symmetrize(const Matrix& m)
{
    return 0.5 * (m + m.transpose());
}

// Closed-form eigenpairs of the tridiagonal stencil along one grid axis.
// An axis without filter extent contributes the 1 x 1 identity.
struct AxisModes {
    std::vector<Matrix> vectors;  // indexed by block dimension q
    std::vector<Vector> values;
};

AxisModes axis_modes(std::size_t extent, bool active)
{
    AxisModes modes;
    modes.vectors.resize(extent + 1);
    modes.values.resize(extent + 1);
    for (std::size_t q = 1; q <= extent; ++q) {
        Matrix v(q, q);
        Vector lambda(q);
        for (std::size_t h = 1; h <= q; ++h) {
            v.col(h - 1) = toeplitz_eigenvector(q, h);
            lambda(h - 1) = active ? toeplitz_eigenvalue(q, h) : 1.0;
        }
        modes.vectors[q] = std::move(v);
        modes.values[q] = std::move(lambda);
    }
    return modes;
}

Matrix spectral_power(const Matrix& theta0, const ConvGeometry& geometry, std::size_t depth)
{
    const auto [rows, cols] = geometry.extents();
    const bool row_active = geometry.kind() == GeometryKind::TwoD;
    const AxisModes row_modes = axis_modes(rows, row_active);
    const AxisModes col_modes = axis_modes(cols, true);
    const double top = row_modes.values[rows](0) * col_modes.values[cols](0);
    const double power = static_cast<double>(depth);
    const auto nr = static_cast<long>(rows);
    const auto nc = static_cast<long>(cols);

    Matrix out = Matrix::Zero(theta0.rows(), theta0.cols());
    for (long a = -(nr - 1); a <= nr - 1; ++a) {
        for (long b = -(nc - 1); b <= nc - 1; ++b) {
            const long q0 = nr - std::abs(a);
            const long q1 = nc - std::abs(b);
            const long i0 = std::max(0L, -a);
            const long j0 = std::max(0L, -b);

            Matrix block(q0, q1);
            for (long u = 0; u < q0; ++u)
                for (long w = 0; w < q1; ++w)
                    block(u, w) = theta0((i0 + u) * nc + (j0 + w), (i0 + u + a) * nc + (j0 + w + b));
            if (block.isZero(0.0))
                continue;

            const Matrix& v0 = row_modes.vectors[q0];
            const Matrix& v1 = col_modes.vectors[q1];
            Matrix coeff = v0.transpose() * block * v1;
            for (long h0 = 0; h0 < q0; ++h0)
                for (long h1 = 0; h1 < q1; ++h1)
                    coeff(h0, h1) *=
                        std::pow(row_modes.values[q0](h0) * col_modes.values[q1](h1) / top, power);
            block = v0 * coeff * v1.transpose();

            for (long u = 0; u < q0; ++u)
                for (long w = 0; w < q1; ++w)
                    out((i0 + u) * nc + (j0 + w), (i0 + u + a) * nc + (j0 + w + b)) = block(u, w);
        }
    }
    return out;
}

void sign_normalize(Vector& v)
{
    const double scale = v.cwiseAbs().maxCoeff();
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-10 * scale) {
            if (v(i) < 0.0)
                v = -v;
            return;
        }
    }
}

}  // namespace

FeatureTransform::FeatureTransform(Matrix theta, ConvGeometry geometry, Padding padding,
                                   Architecture architecture, std::optional<std::size_t> depth,
                                   bool normalized)
    : theta_(std::move(theta)),
      geometry_(geometry),
      padding_(padding),
      architecture_(architecture),
      depth_(depth),
      normalized_(normalized)
{
    const auto p = static_cast<Index>(geometry_.pixels());
    if (theta_.rows() != p || theta_.cols() != p)
        throw std::invalid_argument("theta must be " + std::to_string(p) + "x" + std::to_string(p));
    if (!is_symmetric(theta_))
        throw std::invalid_argument("theta is not symmetric");
    // summing p^2 squares drifts by ~1e-12 at p = 784
    if (normalized_ && std::abs(theta_.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("theta marked normalized but ||theta||_F != 1");
}

void FeatureTransform::check_psd() const
{
    require_psd(theta_, "theta");
}

std::vector<Matrix> basis_matrices(const ConvGeometry& geometry, Padding padding)
{
    const auto p = static_cast<Index>(geometry.pixels());
    std::vector<Matrix> basis;
    for (const Shift& shift : filter_shifts(geometry)) {
        const auto target = shifted_pixels(geometry, padding, shift);
        Matrix b = Matrix::Zero(p, p);
        for (Index i = 0; i < p; ++i)
            if (target[i] >= 0)
                b(i, target[i]) = 1.0;
        basis.push_back(std::move(b));
    }
    return basis;
}

Matrix apply_a(const Matrix& x, const ConvGeometry& geometry, Padding padding)
{
    const auto p = static_cast<Index>(geometry.pixels());
    if (x.rows() != p || x.cols() != p)
        throw std::invalid_argument("apply_a: expected " + std::to_string(p) + "x" +
                                    std::to_string(p) + " matrix, got " +
                                    std::to_string(x.rows()) + "x" + std::to_string(x.cols()));

    // A(X)_{rc} = sum_k X_{r+k, c+k}; shifts accumulate in row-major order
    Matrix out = Matrix::Zero(p, p);
    for (const Shift& shift : filter_shifts(geometry)) {
        const auto target = shifted_pixels(geometry, padding, shift);
        const auto runs = contiguous_runs(target);
        for (Index c = 0; c < p; ++c) {
            const Index src_col = target[c];
            if (src_col < 0)
                continue;
            const double* in = x.data() + src_col * p;
            double* dst = out.data() + c * p;
            for (const Run& run : runs)
                for (Index t = 0; t < run.length; ++t)
                    dst[run.start + t] += in[run.source + t];
        }
    }
    return out;
}

Matrix initial_theta(const ConvGeometry& geometry, Architecture architecture)
{
    const auto p = static_cast<Index>(geometry.pixels());
    if (architecture == Architecture::Flattening)
        return Matrix::Identity(p, p);
    return Matrix::Ones(p, p);
}

FeatureTransform feature_transform(std::size_t depth, const ConvGeometry& geometry,
                                   Padding padding, Architecture architecture, Route route)
{
    if (route == Route::Stencil) {
        TransformSequence sequence(geometry, padding, architecture);
        return sequence.advance_to(depth);
    }

    Matrix theta = initial_theta(geometry, architecture);
    // Under circular padding every shift is a permutation, so both I and J
    // are fixed points of A up to the factor r.
    if (padding == Padding::Zero && depth > 0)
        theta = symmetrize(spectral_power(theta, geometry, depth));
    normalize_frobenius(theta);
    return {std::move(theta), geometry, padding, architecture, depth, true};
}

TransformSequence::TransformSequence(const ConvGeometry& geometry, Padding padding,
                                     Architecture architecture)
    : geometry_(geometry),
      padding_(padding),
      architecture_(architecture),
      theta_(initial_theta(geometry, architecture))
{
    normalize_frobenius(theta_);
}

FeatureTransform TransformSequence::advance_to(std::size_t depth)
{
    if (depth < depth_)
        throw std::invalid_argument("TransformSequence cannot move to a smaller depth (" +
                                    std::to_string(depth) + " < " + std::to_string(depth_) + ")");
    while (depth_ < depth) {
        Matrix next = apply_a(theta_, geometry_, padding_);
        normalize_frobenius(next);
        last_step_ = (next - theta_).norm();
        theta_ = std::move(next);
        ++depth_;
    }
    return {symmetrize(theta_), geometry_, padding_, architecture_, depth_, true};
}

ConvergedTransform iterate_to_convergence(const ConvGeometry& geometry, Padding padding,
                                          Architecture architecture, double tolerance,
                                          std::size_t max_iterations)
{
    TransformSequence sequence(geometry, padding, architecture);
    for (std::size_t d = 1; d <= max_iterations; ++d) {
        sequence.advance_to(d);
        if (sequence.last_step() < tolerance)
            return {sequence.advance_to(d), d, sequence.last_step(), true};
    }
    return {sequence.advance_to(max_iterations), max_iterations, sequence.last_step(), false};
}

Matrix tridiagonal_ones(std::size_t dim)
{
    const auto n = static_cast<Index>(dim);
    Matrix t = Matrix::Identity(n, n);
    for (Index i = 0; i + 1 < n; ++i) {
        t(i, i + 1) = 1.0;
        t(i + 1, i) = 1.0;
    }
    return t;
}

double toeplitz_eigenvalue(std::size_t dim, std::size_t h)
{
    if (dim == 0 || h == 0 || h > dim)
        throw std::invalid_argument("toeplitz_eigenvalue: need 1 <= h <= dim");
    return 1.0 + 2.0 * std::cos(std::numbers::pi * static_cast<double>(h) /
                                static_cast<double>(dim + 1));
}

Vector toeplitz_eigenvector(std::size_t dim, std::size_t h)
{
    if (dim == 0 || h == 0 || h > dim)
        throw std::invalid_argument("toeplitz_eigenvector: need 1 <= h <= dim");
    const double scale = std::sqrt(2.0 / static_cast<double>(dim + 1));
    Vector v(static_cast<Index>(dim));
    for (std::size_t j = 1; j <= dim; ++j)
        v(static_cast<Index>(j - 1)) =
            scale * std::sin(std::numbers::pi * static_cast<double>(h * j) /
                             static_cast<double>(dim + 1));
    return v;
}

SpectralSummary toeplitz_spectrum(std::size_t dim)
{
    if (dim == 0)
        throw std::invalid_argument("toeplitz_spectrum: dim must be positive");
    SpectralSummary summary;
    // cos is decreasing on (0, pi), so ascending h gives descending eigenvalues
    for (std::size_t h = 1; h <= dim; ++h)
        summary.eigenvalues.push_back(toeplitz_eigenvalue(dim, h));
    summary.leading_eigenvector = toeplitz_eigenvector(dim, 1);
    summary.spectral_gap = dim > 1 ? summary.eigenvalues[0] - summary.eigenvalues[1] : 0.0;
    return summary;
}

double operator_leading_eigenvalue(const ConvGeometry& geometry, Padding padding)
{
    const bool two_d = geometry.kind() == GeometryKind::TwoD;
    if (padding == Padding::Circular)
        return two_d ? 9.0 : 3.0;
    const double axis = toeplitz_eigenvalue(geometry.side(), 1);
    return two_d ? axis * axis : axis;
}

FeatureTransform limiting_transform(const ConvGeometry& geometry, Padding padding,
                                    Architecture architecture)
{
    Matrix theta;
    if (padding == Padding::Circular) {
        theta = initial_theta(geometry, architecture);
    } else {
        const auto [rows, cols] = geometry.extents();
        const bool two_d = geometry.kind() == GeometryKind::TwoD;
        const auto sine = [](std::size_t i, std::size_t n) {
            return std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n + 1));
        };
        Vector weights(static_cast<Index>(rows * cols));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                weights(static_cast<Index>(i * cols + j)) =
                    (two_d ? sine(i + 1, rows) : 1.0) * sine(j + 1, cols);
        theta = weights.asDiagonal();
    }
    normalize_frobenius(theta);
    return {std::move(theta), geometry, padding, architecture, std::nullopt, true};
}

SpectralSummary spectral_summary(const Matrix& sym)
{
    if (sym.rows() != sym.cols() || sym.rows() == 0)
        throw std::invalid_argument("spectral_summary needs a non-empty square matrix");
    if (!is_symmetric(sym))
        throw std::invalid_argument("spectral_summary: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    const Vector& values = solver.eigenvalues();
    const Index n = values.size();

    SpectralSummary summary;
    summary.eigenvalues.reserve(static_cast<std::size_t>(n));
    for (Index i = n - 1; i >= 0; --i)
        summary.eigenvalues.push_back(values(i));
    summary.leading_eigenvector = solver.eigenvectors().col(n - 1).normalized();
    sign_normalize(summary.leading_eigenvector);
    summary.spectral_gap = n > 1 ? values(n - 1) - values(n - 2) : 0.0;
    return summary;
}

SpectralSummary spectral_summary(const FeatureTransform& ft)
{
    return spectral_summary(ft.theta());
}

double participation_ratio(const Vector& v)
{
    const double sq = v.squaredNorm();
    const double quartic = v.array().pow(4).sum();
    if (quartic == 0.0)
        return 0.0;
    return sq * sq / quartic;
}

void write_matrix_csv(std::ostream& out, const Matrix& m)
{
    char buf[32];
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j > 0)
                out << ',';
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace lincntk
