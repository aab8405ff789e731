#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <lincntk/cntk.hpp>
#include <lincntk/rng.hpp>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

using namespace lincntk;

namespace {

Matrix oracle_apply(const Matrix& x, const std::vector<Matrix>& basis)
{
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (const Matrix& b : basis)
        out += b.transpose() * x * b;
    return out;
}

Matrix random_symmetric(NormalSampler& normal, Eigen::Index p)
{
    Matrix g = normal.matrix(p, p);
    return 0.5 * (g + g.transpose());
}

std::vector<ConvGeometry> small_geometries()
{
    std::vector<ConvGeometry> out;
    for (std::size_t p = 1; p <= 10; ++p)
        out.push_back(ConvGeometry::one_d(p));
    for (std::size_t s = 1; s <= 3; ++s)
        out.push_back(ConvGeometry::two_d(s));
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("geometry validation")
{
    CHECK_THROWS_AS(ConvGeometry(GeometryKind::OneD, 0), std::invalid_argument);
    CHECK_THROWS_AS(ConvGeometry(GeometryKind::OneD, 5, 2), std::invalid_argument);
    CHECK_THROWS_AS(ConvGeometry(static_cast<GeometryKind>(7), 5), std::invalid_argument);
    const auto g = ConvGeometry::two_d(28);
    CHECK(g.pixels() == 784);
    CHECK(g.side() == 28);
    CHECK(ConvGeometry::one_d(9).extents() == std::array<std::size_t, 2>{1, 9});
}

TEST_CASE("basis matrices for zero padding, p = 4")
{
    const auto basis = basis_matrices(ConvGeometry::one_d(4), Padding::Zero);
    REQUIRE(basis.size() == 3);
    Matrix sub = Matrix::Zero(4, 4), super = Matrix::Zero(4, 4);
    for (int i = 0; i < 3; ++i) {
        super(i, i + 1) = 1.0;
        sub(i + 1, i) = 1.0;
    }
    // ordered by offset -1, 0, +1
    CHECK(basis[0] == sub);
    CHECK(basis[1] == Matrix::Identity(4, 4));
    CHECK(basis[2] == super);
}

TEST_CASE("basis matrices for p = 1 under zero padding")
{
    const auto basis = basis_matrices(ConvGeometry::one_d(1), Padding::Zero);
    REQUIRE(basis.size() == 3);
    CHECK(basis[0](0, 0) == 0.0);
    CHECK(basis[1](0, 0) == 1.0);
    CHECK(basis[2](0, 0) == 0.0);
}

TEST_CASE("circular basis matrices are cyclic shifts")
{
    const auto basis = basis_matrices(ConvGeometry::one_d(3), Padding::Circular);
    const int offsets[] = {-1, 0, 1};
    for (int b = 0; b < 3; ++b) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(basis[b](i, j) == ((((j - i - offsets[b]) % 3) + 3) % 3 == 0 ? 1.0 : 0.0));
        const Matrix& m = basis[b];
        CHECK((m * m.transpose()).isIdentity(0.0));
    }
}

TEST_CASE("row occupancy of basis matrices")
{
    for (const auto& g : small_geometries()) {
        CHECK(basis_matrices(g, Padding::Zero).size() == (g.kind() == GeometryKind::OneD ? 3u : 9u));
        for (const Matrix& b : basis_matrices(g, Padding::Circular))
            CHECK(b.rowwise().sum().isOnes(0.0));
        for (const Matrix& b : basis_matrices(g, Padding::Zero))
            CHECK(b.rowwise().sum().maxCoeff() <= 1.0);
    }
}

TEST_CASE("apply_a on identity and all-ones, p = 4")
{
    const auto g = ConvGeometry::one_d(4);
    const Matrix id = Matrix::Identity(4, 4);
    Vector expected_diag(4);
    expected_diag << 2, 3, 3, 2;
    CHECK(apply_a(id, g, Padding::Zero) == Matrix(expected_diag.asDiagonal()));
    CHECK(apply_a(id, g, Padding::Circular) == 3.0 * id);

    // entry (i, j) counts k in {-1, 0, 1} with i + k and j + k both in range
    const Matrix ones = Matrix::Ones(4, 4);
    const Matrix out = apply_a(ones, g, Padding::Zero);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            int count = 0;
            for (int k = -1; k <= 1; ++k)
                count += (i + k >= 0 && i + k < 4 && j + k >= 0 && j + k < 4) ? 1 : 0;
            CHECK(out(i, j) == count);
        }
    }
    CHECK(out == oracle_apply(ones, basis_matrices(g, Padding::Zero)));
}

TEST_CASE("apply_a rejects mismatched dimensions")
{
    CHECK_THROWS_AS(apply_a(Matrix::Identity(3, 3), ConvGeometry::one_d(4), Padding::Zero),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_a(Matrix::Zero(4, 3), ConvGeometry::one_d(4), Padding::Zero),
                    std::invalid_argument);
}

TEST_CASE("property: stencil equals the basis-matrix sum")
{
    NormalSampler normal = make_normal_stream(2024, 0, Stream::Perturbation);
    for (const auto& g : small_geometries()) {
        for (auto padding : {Padding::Zero, Padding::Circular}) {
            const auto basis = basis_matrices(g, padding);
            const auto p = static_cast<Eigen::Index>(g.pixels());
            for (int trial = 0; trial < 100; ++trial) {
                const Matrix x = random_symmetric(normal, p);
                REQUIRE(max_abs_diff(apply_a(x, g, padding), oracle_apply(x, basis)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("property: apply_a is linear")
{
    NormalSampler normal = make_normal_stream(7, 0, Stream::Perturbation);
    for (const auto& g : {ConvGeometry::one_d(7), ConvGeometry::two_d(3)}) {
        const auto p = static_cast<Eigen::Index>(g.pixels());
        for (auto padding : {Padding::Zero, Padding::Circular}) {
            for (int trial = 0; trial < 50; ++trial) {
                const Matrix x = random_symmetric(normal, p);
                const Matrix y = random_symmetric(normal, p);
                const double a = normal(), b = normal();
                const Matrix lhs = apply_a(a * x + b * y, g, padding);
                const Matrix rhs = a * apply_a(x, g, padding) + b * apply_a(y, g, padding);
                REQUIRE(max_abs_diff(lhs, rhs) <= 1e-12);
            }
        }
    }
}

TEST_CASE("property: apply_a keeps symmetric PSD matrices PSD")
{
    NormalSampler normal = make_normal_stream(8, 0, Stream::Perturbation);
    for (const auto& g : {ConvGeometry::one_d(6), ConvGeometry::one_d(9), ConvGeometry::two_d(3)}) {
        const auto p = static_cast<Eigen::Index>(g.pixels());
        for (auto padding : {Padding::Zero, Padding::Circular}) {
            for (int trial = 0; trial < 30; ++trial) {
                const Matrix f = normal.matrix(p, p / 2 + 1);
                const Matrix out = apply_a(f * f.transpose(), g, padding);
                REQUIRE(is_symmetric(out));
                REQUIRE(min_eigenvalue(out) >= -1e-10 * out.norm());
            }
        }
    }
}

TEST_CASE("property: zero padding keeps each diagonal separate in 1-D")
{
    const std::size_t p = 8;
    const auto g = ConvGeometry::one_d(p);
    NormalSampler normal = make_normal_stream(9, 0, Stream::Perturbation);
    for (int m = -7; m <= 7; ++m) {
        Matrix x = Matrix::Zero(p, p);
        for (int i = 0; i < static_cast<int>(p); ++i)
            if (i + m >= 0 && i + m < static_cast<int>(p))
                x(i, i + m) = normal();
        const Matrix out = apply_a(x, g, Padding::Zero);
        for (int i = 0; i < static_cast<int>(p); ++i)
            for (int j = 0; j < static_cast<int>(p); ++j)
                if (j - i != m)
                    REQUIRE(out(i, j) == 0.0);
    }
}

TEST_CASE("restricted to diagonal m the operator has the Toeplitz spectrum")
{
    for (std::size_t p : {4u, 7u, 10u}) {
        const auto g = ConvGeometry::one_d(p);
        const int ip = static_cast<int>(p);
        for (int m = -(ip - 1); m <= ip - 1; ++m) {
            const int q = ip - std::abs(m);
            const int i0 = std::max(0, -m);
            Matrix restricted(q, q);
            for (int col = 0; col < q; ++col) {
                Matrix e = Matrix::Zero(ip, ip);
                e(i0 + col, i0 + col + m) = 1.0;
                const Matrix out = apply_a(e, g, Padding::Zero);
                for (int row = 0; row < q; ++row)
                    restricted(row, col) = out(i0 + row, i0 + row + m);
            }
            const auto numeric = spectral_summary(restricted);
            const auto closed = toeplitz_spectrum(static_cast<std::size_t>(q));
            for (int h = 0; h < q; ++h)
                REQUIRE(std::abs(numeric.eigenvalues[h] - closed.eigenvalues[h]) <= 1e-10);
        }
    }
}

TEST_CASE("feature_transform initial conditions")
{
    const auto g = ConvGeometry::one_d(5);
    const auto pooled = feature_transform(0, g, Padding::Zero, Architecture::Pooling);
    CHECK(max_abs_diff(pooled.theta(), Matrix::Ones(5, 5) / 5.0) <= 1e-15);
    CHECK(pooled.normalized());
    CHECK(pooled.depth() == std::optional<std::size_t>(0));

    const auto flat = feature_transform(0, g, Padding::Zero, Architecture::Flattening);
    CHECK(max_abs_diff(flat.theta(), Matrix::Identity(5, 5) / std::sqrt(5.0)) <= 1e-15);
}

TEST_CASE("circular flattening never changes with depth")
{
    const auto g = ConvGeometry::one_d(4);
    for (std::size_t d : {0u, 1u, 2u, 7u, 50u}) {
        const auto ft = feature_transform(d, g, Padding::Circular, Architecture::Flattening);
        CHECK(max_abs_diff(ft.theta(), 0.5 * Matrix::Identity(4, 4)) <= 1e-12);
    }
}

TEST_CASE("property: circular padding fixes both initial conditions")
{
    for (const auto& g : {ConvGeometry::one_d(3), ConvGeometry::one_d(10), ConvGeometry::two_d(4)}) {
        for (auto arch : {Architecture::Flattening, Architecture::Pooling}) {
            Matrix theta0 = initial_theta(g, arch);
            theta0 /= theta0.norm();
            TransformSequence seq(g, Padding::Circular, arch);
            for (std::size_t d = 1; d <= 40; ++d)
                REQUIRE(max_abs_diff(seq.advance_to(d).theta(), theta0) <= 1e-12);
        }
    }
}

TEST_CASE("stencil iteration matches the basis-matrix recursion")
{
    for (const auto& g : {ConvGeometry::one_d(6), ConvGeometry::two_d(3)}) {
        for (auto padding : {Padding::Zero, Padding::Circular}) {
            for (auto arch : {Architecture::Flattening, Architecture::Pooling}) {
                const auto basis = basis_matrices(g, padding);
                Matrix theta = initial_theta(g, arch);
                theta /= theta.norm();
                for (int d = 0; d < 12; ++d) {
                    theta = oracle_apply(theta, basis);
                    theta /= theta.norm();
                }
                const auto ft = feature_transform(12, g, padding, arch);
                CHECK(max_abs_diff(ft.theta(), theta) <= 1e-12);
            }
        }
    }
}

TEST_CASE("spectral route agrees with the stencil")
{
    for (const auto& g : {ConvGeometry::one_d(1), ConvGeometry::one_d(7), ConvGeometry::one_d(20),
                          ConvGeometry::two_d(2), ConvGeometry::two_d(5)}) {
        for (auto padding : {Padding::Zero, Padding::Circular}) {
            for (auto arch : {Architecture::Flattening, Architecture::Pooling}) {
                TransformSequence seq(g, padding, arch);
                for (std::size_t d : {0u, 1u, 2u, 3u, 17u, 100u, 400u}) {
                    const auto stencil = seq.advance_to(d);
                    const auto spectral = feature_transform(d, g, padding, arch, Route::Spectral);
                    REQUIRE(max_abs_diff(stencil.theta(), spectral.theta()) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("TransformSequence refuses to go backwards")
{
    TransformSequence seq(ConvGeometry::one_d(4), Padding::Zero, Architecture::Pooling);
    seq.advance_to(3);
    CHECK_THROWS_AS(seq.advance_to(2), std::invalid_argument);
    CHECK(seq.advance_to(3).depth() == std::optional<std::size_t>(3));
}

TEST_CASE("toeplitz spectrum closed form")
{
    const auto one = toeplitz_spectrum(1);
    REQUIRE(one.eigenvalues.size() == 1);
    CHECK(one.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(one.spectral_gap == 0.0);

    const auto four = toeplitz_spectrum(4);
    const double expected[] = {2.618034, 1.618034, 0.381966, -0.618034};
    for (int h = 0; h < 4; ++h)
        CHECK(std::abs(four.eigenvalues[h] - expected[h]) < 5e-7);
    Vector sines(4);
    for (int j = 0; j < 4; ++j)
        sines(j) = std::sin((j + 1) * std::numbers::pi / 5.0);
    CHECK((four.leading_eigenvector - sines.normalized()).norm() < 1e-14);

    CHECK_THROWS_AS(toeplitz_spectrum(0), std::invalid_argument);
}

TEST_CASE("closed-form Toeplitz eigenpairs satisfy T v = lambda v")
{
    for (std::size_t dim = 1; dim <= 30; ++dim) {
        const Matrix t = tridiagonal_ones(dim);
        for (std::size_t h = 1; h <= dim; ++h) {
            const Vector v = toeplitz_eigenvector(dim, h);
            CHECK(std::abs(v.norm() - 1.0) < 1e-13);
            REQUIRE((t * v - toeplitz_eigenvalue(dim, h) * v).norm() < 1e-12);
        }
    }
}

TEST_CASE("limiting transforms")
{
    SUBCASE("1-D zero padding, p = 3")
    {
        const auto lim = limiting_transform(ConvGeometry::one_d(3), Padding::Zero, Architecture::Pooling);
        Vector d(3);
        d << 1.0 / std::sqrt(2.0), 1.0, 1.0 / std::sqrt(2.0);
        d /= std::sqrt(2.0);
        CHECK(max_abs_diff(lim.theta(), Matrix(d.asDiagonal())) <= 1e-15);
        CHECK(lim.is_limit());
    }
    SUBCASE("2-D zero padding, s = 2 is uniform on the diagonal")
    {
        const auto lim = limiting_transform(ConvGeometry::two_d(2), Padding::Zero, Architecture::Flattening);
        CHECK(max_abs_diff(lim.theta(), 0.5 * Matrix::Identity(4, 4)) <= 1e-15);
    }
    SUBCASE("2-D zero padding is a product of sines")
    {
        const std::size_t s = 6;
        const auto lim = limiting_transform(ConvGeometry::two_d(s), Padding::Zero, Architecture::Pooling);
        const double ratio = std::sin(2 * std::numbers::pi / 7) / std::sin(std::numbers::pi / 7);
        // pixel (1, 0) vs pixel (0, 0)
        CHECK(lim.theta()(s, s) / lim.theta()(0, 0) == doctest::Approx(ratio).epsilon(1e-14));
        CHECK(lim.theta()(0, 1) == 0.0);
    }
    SUBCASE("circular padding keeps the initial condition")
    {
        const auto lim = limiting_transform(ConvGeometry::one_d(4), Padding::Circular, Architecture::Pooling);
        CHECK(max_abs_diff(lim.theta(), Matrix::Ones(4, 4) / 4.0) <= 1e-15);
    }
}

TEST_CASE("property: zero padding converges geometrically to the limit")
{
    for (std::size_t p : {5u, 6u, 9u}) {
        const auto g = ConvGeometry::one_d(p);
        const double lambda1 = toeplitz_eigenvalue(p, 1);
        const double lambda2 = toeplitz_eigenvalue(p - 1, 1);  // offset +-1, h = 1
        const double ratio = lambda2 / lambda1;
        for (auto arch : {Architecture::Flattening, Architecture::Pooling}) {
            const Matrix limit = limiting_transform(g, Padding::Zero, arch).theta();
            TransformSequence seq(g, Padding::Zero, arch);
            const Matrix theta0 = seq.advance_to(0).theta();
            // normalized power iteration: ||T_D - T*|| <= 2 ||R|| / c1 * ratio^D
            const double c1 = (theta0.array() * limit.array()).sum();
            REQUIRE(c1 > 0.0);
            const double bound = 2.0 * std::sqrt(1.0 - c1 * c1) / c1;
            double previous = (theta0 - limit).norm();
            for (std::size_t d = 1; d <= 300; ++d) {
                const double dist = (seq.advance_to(d).theta() - limit).norm();
                REQUIRE(dist <= bound * std::pow(ratio, d) + 1e-14);
                REQUIRE(dist <= previous + 1e-15);
                previous = dist;
            }
        }
    }
}

TEST_CASE("iterate_to_convergence reaches the sine limit")
{
    const auto g = ConvGeometry::one_d(5);
    for (auto arch : {Architecture::Flattening, Architecture::Pooling}) {
        const auto result = iterate_to_convergence(g, Padding::Zero, arch);
        CHECK(result.converged);
        CHECK(result.last_step < 1e-12);
        const Matrix limit = limiting_transform(g, Padding::Zero, arch).theta();
        CHECK((result.transform.theta() - limit).norm() < 1e-8);
    }
    const auto capped = iterate_to_convergence(g, Padding::Zero, Architecture::Pooling, 1e-12, 3);
    CHECK_FALSE(capped.converged);
    CHECK(capped.iterations == 3);
}

TEST_CASE("operator leading eigenvalue")
{
    const double one_d = 1.0 + 2.0 * std::cos(std::numbers::pi / 11.0);
    CHECK(operator_leading_eigenvalue(ConvGeometry::one_d(10), Padding::Zero) == doctest::Approx(one_d));
    const double two_d = 1.0 + 2.0 * std::cos(std::numbers::pi / 29.0);
    CHECK(operator_leading_eigenvalue(ConvGeometry::two_d(28), Padding::Zero) ==
          doctest::Approx(two_d * two_d));
    CHECK(operator_leading_eigenvalue(ConvGeometry::two_d(3), Padding::Circular) == 9.0);
}

TEST_CASE("spectral summaries")
{
    SUBCASE("scaled identity")
    {
        const auto s = spectral_summary(Matrix(0.5 * Matrix::Identity(4, 4)));
        for (double v : s.eigenvalues)
            CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(std::abs(s.spectral_gap) < 1e-14);
        CHECK(s.leading_eigenvector.norm() == doctest::Approx(1.0));
    }
    SUBCASE("rank one all-ones")
    {
        const auto s = spectral_summary(Matrix(Matrix::Ones(4, 4) / 4.0));
        CHECK(s.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-14));
        for (int i = 1; i < 4; ++i)
            CHECK(std::abs(s.eigenvalues[i]) < 1e-14);
        CHECK((s.leading_eigenvector - Vector::Constant(4, 0.5)).norm() < 1e-14);
    }
    SUBCASE("sign convention puts the first nonzero entry positive")
    {
        Matrix m = Matrix::Zero(3, 3);
        m(1, 1) = 2.0;
        m(2, 2) = 1.0;
        m(1, 2) = m(2, 1) = -0.5;
        const auto s = spectral_summary(m);
        CHECK(std::abs(s.leading_eigenvector(0)) < 1e-12);
        CHECK(s.leading_eigenvector(1) > 0.0);
    }
    SUBCASE("descending order")
    {
        NormalSampler normal = make_normal_stream(1, 0, Stream::Perturbation);
        const auto s = spectral_summary(random_symmetric(normal, 9));
        for (std::size_t i = 1; i < s.eigenvalues.size(); ++i)
            CHECK(s.eigenvalues[i - 1] >= s.eigenvalues[i]);
    }
    SUBCASE("non-symmetric input is rejected")
    {
        Matrix m = Matrix::Identity(3, 3);
        m(0, 1) = 1.0;
        CHECK_THROWS_AS(spectral_summary(m), std::invalid_argument);
    }
}

TEST_CASE("FeatureTransform invariants")
{
    const auto g = ConvGeometry::one_d(3);
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 2) = 0.1;
    CHECK_THROWS_AS(FeatureTransform(asym, g, Padding::Zero, Architecture::Pooling, 0, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(FeatureTransform(Matrix::Identity(3, 3), g, Padding::Zero, Architecture::Pooling, 0, true),
                    std::invalid_argument);
    CHECK_THROWS_AS(FeatureTransform(Matrix::Identity(4, 4), g, Padding::Zero, Architecture::Pooling, 0, false),
                    std::invalid_argument);

    Matrix indefinite = Matrix::Identity(3, 3);
    indefinite(2, 2) = -1.0;
    const FeatureTransform ft(indefinite, g, Padding::Zero, Architecture::Pooling, 0, false);
    CHECK_THROWS_AS(ft.check_psd(), std::invalid_argument);
    CHECK_NOTHROW(feature_transform(9, g, Padding::Zero, Architecture::Pooling).check_psd());
}

TEST_CASE("participation ratio")
{
    CHECK(participation_ratio(Vector::Ones(16)) == doctest::Approx(16.0));
    CHECK(participation_ratio(Vector::Unit(16, 3)) == doctest::Approx(1.0));
}

TEST_CASE("matrix csv keeps every bit")
{
    const auto ft = feature_transform(5, ConvGeometry::one_d(6), Padding::Zero, Architecture::Pooling);
    std::ostringstream out;
    write_matrix_csv(out, ft.theta());
    std::istringstream in(out.str());
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string cell;
        int col = 0;
        while (std::getline(cells, cell, ','))
            REQUIRE(std::strtod(cell.c_str(), nullptr) == ft.theta()(row, col++));
        CHECK(col == 6);
        ++row;
    }
    CHECK(row == 6);
}
