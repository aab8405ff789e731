#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace lincntk {

/// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
///
/// A (key, counter) pair maps to four 64-bit outputs through ten rounds of a
/// bijection, so any block of the stream can be produced without generating
/// the blocks before it. The engine form below walks counter word 0 and
/// hands out the four words of each block in order.
class Philox4x64 {
public:
    using result_type = std::uint64_t;
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static constexpr int kRounds = 10;

    Philox4x64(Key key, Counter counter) : key_(key), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    static Counter block(Counter ctr, Key key)
    {
        for (int round = 0; round < kRounds; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const auto [hi0, lo0] = mulhilo(kMul0, ctr[0]);
            const auto [hi1, lo1] = mulhilo(kMul1, ctr[2]);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

    result_type operator()()
    {
        if (next_ == 4) {
            buffer_ = block(counter_, key_);
            ++counter_[0];
            next_ = 0;
        }
        return buffer_[next_++];
    }

    const Counter& counter() const { return counter_; }
    const Key& key() const { return key_; }

private:
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static std::array<std::uint64_t, 2> mulhilo(std::uint64_t a, std::uint64_t b)
    {
        __extension__ using u128 = unsigned __int128;
        const u128 product = static_cast<u128>(a) * b;
        return {static_cast<std::uint64_t>(product >> 64), static_cast<std::uint64_t>(product)};
    }

    Key key_;
    Counter counter_;
    Counter buffer_{};
    int next_ = 4;
};

/// Independent sub-streams of one master seed. Each purpose gets its own key
/// word, and the trial index sits in counter word 1, so trial t of a Monte
/// Carlo run draws the same numbers no matter which thread evaluates it.
enum class Stream : std::uint64_t {
    Design = 1,
    Noise = 2,
    TestPoints = 3,
    Beta = 4,
    Subsample = 5,
    Perturbation = 6,
    Shuffle = 7,
};

inline Philox4x64 make_stream(std::uint64_t seed, std::uint64_t trial, Stream purpose)
{
    return Philox4x64({seed, static_cast<std::uint64_t>(purpose)}, {0, trial, 0, 0});
}

/// Uniform in (0, 1], 53 bits.
inline double uniform_open_closed(Philox4x64& gen)
{
    return static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
}

/// Box-Muller normals. The std:: distributions are implementation-defined,
/// which would make outputs differ between standard libraries.
class NormalSampler {
public:
    explicit NormalSampler(Philox4x64 gen) : gen_(gen) {}

    double operator()()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_open_closed(gen_)));
        const double angle = 2.0 * std::numbers::pi * uniform_open_closed(gen_);
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Row-major fill: draw k lands at (k / cols, k % cols).
    Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols)
    {
        Eigen::MatrixXd out(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                out(i, j) = (*this)();
        return out;
    }

    Eigen::VectorXd vector(Eigen::Index size)
    {
        Eigen::VectorXd out(size);
        for (Eigen::Index i = 0; i < size; ++i)
            out(i) = (*this)();
        return out;
    }

    Philox4x64& engine() { return gen_; }

private:
    Philox4x64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline NormalSampler make_normal_stream(std::uint64_t seed, std::uint64_t trial, Stream purpose)
{
    return NormalSampler(make_stream(seed, trial, purpose));
}

}  // namespace lincntk
