#include <lincntk/data.hpp>
#include <lincntk/output.hpp>
#include <lincntk/rng.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <sstream>

namespace lincntk {

namespace {

std::uint32_t read_be32(const std::uint8_t* p)
{
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
}

void put_be32(std::ostream& out, std::uint32_t v)
{
    const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                           static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(bytes, 4);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path, const std::string& field)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IdxError(field, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string magic_hex(std::uint32_t magic)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", magic);
    return buf;
}

}  // namespace

void Dataset::validate() const
{
    if (x.rows() != y.size())
        throw std::invalid_argument("dataset has " + std::to_string(x.rows()) + " rows but " +
                                    std::to_string(y.size()) + " labels");
    if (!x.allFinite() || !y.allFinite())
        throw std::invalid_argument("dataset contains NaN or Inf");
}

GaussianSample gaussian_problem(const Matrix& sigma, const Vector& beta, double noise_var,
                                std::size_t n, std::uint64_t seed)
{
    const Eigen::Index p = beta.size();
    if (sigma.rows() != p || sigma.cols() != p)
        throw std::invalid_argument("sigma must be p x p with p = beta length");
    require_psd(sigma, "sigma");
    if (!(noise_var >= 0.0))
        throw std::invalid_argument("noise variance must be non-negative");
    if (n == 0)
        throw std::invalid_argument("need n >= 1");

    const auto rows = static_cast<Eigen::Index>(n);
    GaussianSample out;
    out.x = make_normal_stream(seed, 0, Stream::Design).matrix(rows, p) * sym_sqrt_psd(sigma);
    out.y = out.x * beta + std::sqrt(noise_var) * make_normal_stream(seed, 0, Stream::Noise).vector(rows);
    return out;
}

std::size_t IdxHeader::payload_bytes() const
{
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t a, std::uint32_t d) { return a * d; });
}

IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes, std::uint32_t expected_magic)
{
    if (bytes.size() < 4)
        throw IdxError("magic", "file shorter than the 4-byte magic");
    IdxHeader h;
    h.magic = read_be32(bytes.data());
    if (h.magic != kIdxImagesMagic && h.magic != kIdxLabelsMagic)
        throw IdxError("magic", "unsupported magic " + magic_hex(h.magic));
    if (h.magic != expected_magic)
        throw IdxError("magic", "expected " + magic_hex(expected_magic) + ", found " +
                                    magic_hex(h.magic));

    const std::size_t ndims = h.magic & 0xFF;
    if (bytes.size() < 4 + 4 * ndims)
        throw IdxError("dims", "header truncated");
    for (std::size_t i = 0; i < ndims; ++i)
        h.dims.push_back(read_be32(bytes.data() + 4 + 4 * i));

    const std::size_t have = bytes.size() - h.header_bytes();
    if (have < h.payload_bytes())
        throw IdxError("payload", "truncated payload: " + std::to_string(have) + " of " +
                                      std::to_string(h.payload_bytes()) + " bytes");
    if (have > h.payload_bytes())
        throw IdxError("payload", "trailing bytes after payload: " + std::to_string(have) +
                                      " present, " + std::to_string(h.payload_bytes()) + " expected");
    return h;
}

Dataset load_idx_images(const std::filesystem::path& images, const std::filesystem::path& labels)
{
    const auto img_bytes = read_file(images, "images");
    const auto lbl_bytes = read_file(labels, "labels");
    const IdxHeader ih = parse_idx_header(img_bytes, kIdxImagesMagic);
    const IdxHeader lh = parse_idx_header(lbl_bytes, kIdxLabelsMagic);

    if (ih.dims[1] != 28 || ih.dims[2] != 28)
        throw IdxError("dims", "expected 28x28 images, found " + std::to_string(ih.dims[1]) + "x" +
                                   std::to_string(ih.dims[2]));
    if (ih.dims[0] != lh.dims[0])
        throw IdxError("count", "count mismatch: " + std::to_string(ih.dims[0]) + " images, " +
                                    std::to_string(lh.dims[0]) + " labels");

    const auto m = static_cast<Eigen::Index>(ih.dims[0]);
    const Eigen::Index p = 28 * 28;
    Dataset ds;
    ds.x.resize(m, p);
    ds.y.resize(m);
    const std::uint8_t* px = img_bytes.data() + ih.header_bytes();
    const std::uint8_t* lb = lbl_bytes.data() + lh.header_bytes();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < p; ++j)
            ds.x(i, j) = px[i * p + j] / 255.0;
        ds.y(i) = lb[i];
    }
    ds.source = images.string();
    return ds;
}

void write_idx_images(const std::filesystem::path& path, std::span<const std::uint8_t> pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols)
{
    if (pixels.size() != std::size_t{count} * rows * cols)
        throw std::invalid_argument("pixel buffer does not match count x rows x cols");
    std::ostringstream out;
    put_be32(out, kIdxImagesMagic);
    put_be32(out, count);
    put_be32(out, rows);
    put_be32(out, cols);
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    write_file_atomic(path, out.str());
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels)
{
    std::ostringstream out;
    put_be32(out, kIdxLabelsMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
    write_file_atomic(path, out.str());
}

Dataset binary_digit_subset(const Dataset& ds, int digit_pos, int digit_neg,
                            std::size_t count_per_class, std::uint64_t seed, bool shuffle)
{
    ds.validate();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ds.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    if (shuffle) {
        // Fisher-Yates with our own stream; std::shuffle is implementation-defined.
        Philox4x64 gen = make_stream(seed, 0, Stream::Shuffle);
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_open_closed(gen) * static_cast<double>(i)) % i;
            std::swap(order[i - 1], order[j]);
        }
    }

    auto pick = [&](int digit) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i : order) {
            if (rows.size() == count_per_class)
                break;
            if (ds.y(i) == digit)
                rows.push_back(i);
        }
        if (rows.size() < count_per_class)
            throw std::invalid_argument("digit " + std::to_string(digit) + ": need " +
                                        std::to_string(count_per_class) + " examples, found " +
                                        std::to_string(rows.size()));
        return rows;
    };
    const auto pos = pick(digit_pos);
    const auto neg = pick(digit_neg);

    const auto m = static_cast<Eigen::Index>(2 * count_per_class);
    Dataset out;
    out.x.resize(m, ds.x.cols());
    out.y.resize(m);
    Eigen::Index r = 0;
    for (Eigen::Index i : pos) {
        out.x.row(r) = ds.x.row(i);
        out.y(r++) = 1.0;
    }
    for (Eigen::Index i : neg) {
        out.x.row(r) = ds.x.row(i);
        out.y(r++) = -1.0;
    }
    out.source = ds.source + " digits " + std::to_string(digit_pos) + "/" + std::to_string(digit_neg);
    return out;
}

std::vector<Eigen::Index> sample_without_replacement(Eigen::Index m, Eigen::Index k,
                                                     std::uint64_t seed, std::uint64_t trial)
{
    if (k < 0 || k > m)
        throw std::invalid_argument("cannot draw " + std::to_string(k) + " of " + std::to_string(m));
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(m));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    Philox4x64 gen = make_stream(seed, trial, Stream::Subsample);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto left = static_cast<std::size_t>(m - i);
        const auto j = static_cast<std::size_t>(i) +
                       static_cast<std::size_t>(uniform_open_closed(gen) * static_cast<double>(left)) % left;
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

Vector min_norm_solve(const Matrix& x, const Vector& y)
{
    if (x.rows() != y.size())
        throw std::invalid_argument("min_norm_solve: x rows do not match y length");
    if (x.rows() > x.cols())
        throw std::invalid_argument("min_norm_solve: need m <= p");
    Matrix gram = x * x.transpose();
    gram = 0.5 * (gram + gram.transpose());
    const Vector beta = x.transpose() * SpectralPinv(gram).solve(y);
    const double residual = (x * beta - y).norm();
    if (residual > 1e-8 * y.norm())
        throw std::runtime_error("min_norm_solve: system inconsistent, residual " +
                                 std::to_string(residual) + " vs |y| " + std::to_string(y.norm()));
    return beta;
}

void write_dataset_csv(std::ostream& out, const Dataset& ds)
{
    ds.validate();
    out << "label";
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j)
        out << ",p" << j;
    out << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", ds.y(i));
        out << buf;
        for (Eigen::Index j = 0; j < ds.x.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.x(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

Dataset read_dataset_csv(std::istream& in, std::string source)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("label", 0) != 0)
        throw std::runtime_error("dataset csv: missing header");
    const auto cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));

    std::vector<double> values;
    Eigen::Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const char* p = line.data();
        const char* end = p + line.size();
        Eigen::Index fields = 0;
        while (true) {
            double v = 0.0;
            const auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{})
                throw std::runtime_error("dataset csv: bad number on data row " + std::to_string(rows + 1));
            values.push_back(v);
            ++fields;
            if (next == end)
                break;
            if (*next != ',')
                throw std::runtime_error("dataset csv: bad separator on data row " + std::to_string(rows + 1));
            p = next + 1;
        }
        if (fields != cols + 1)
            throw std::runtime_error("dataset csv: row " + std::to_string(rows + 1) + " has " +
                                     std::to_string(fields) + " fields, header has " +
                                     std::to_string(cols + 1));
        ++rows;
    }

    Dataset ds;
    ds.x.resize(rows, cols);
    ds.y.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double* row = values.data() + i * (cols + 1);
        ds.y(i) = row[0];
        for (Eigen::Index j = 0; j < cols; ++j)
            ds.x(i, j) = row[j + 1];
    }
    ds.source = std::move(source);
    ds.validate();
    return ds;
}

}  // namespace lincntk
