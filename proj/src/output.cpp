#include <lincntk/output.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace lincntk {

std::string format_g17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::vector<std::uint8_t> to_gray(const Vector& v)
{
    std::vector<std::uint8_t> out(static_cast<std::size_t>(v.size()), 128);
    if (v.size() == 0)
        return out;
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    if (!(hi - lo > 1e-9 * v.cwiseAbs().maxCoeff()))
        return out;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(std::lround(255.0 * (v(i) - lo) / (hi - lo)));
    return out;
}

std::string pgm_bytes(const std::vector<std::uint8_t>& pixels, std::size_t width, std::size_t height)
{
    if (pixels.size() != width * height)
        throw std::invalid_argument("pgm: pixel count does not match width x height");
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(pixels.begin(), pixels.end());
    return out;
}

Matrix read_matrix_csv(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = p + line.size();
        while (true) {
            while (p < end && *p == ' ')
                ++p;
            double v = 0.0;
            const auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{})
                throw std::runtime_error("matrix csv: bad number on row " + std::to_string(rows.size() + 1));
            row.push_back(v);
            p = next;
            while (p < end && *p == ' ')
                ++p;
            if (p == end)
                break;
            if (*p != ',')
                throw std::runtime_error("matrix csv: bad separator on row " + std::to_string(rows.size() + 1));
            ++p;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("matrix csv: ragged row " + std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
    }
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return read_matrix_csv(in);
}

}  // namespace lincntk
