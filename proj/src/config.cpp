#include <lincntk/config.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lincntk {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

struct Entry {
    std::string value;
    std::size_t line;
};

class Reader {
public:
    Reader(std::map<std::string, Entry> entries, std::filesystem::path base)
        : entries_(std::move(entries)), base_(std::move(base))
    {
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const
    {
        const auto it = entries_.find(key);
        throw ConfigError(it == entries_.end() ? 0 : it->second.line, key, message);
    }

    const std::string& raw(const std::string& key) const { return entries_.at(key).value; }

    template <class T>
    T integer(const std::string& key, T fallback) const
    {
        if (!has(key))
            return fallback;
        return parse_integer<T>(key, raw(key));
    }

    template <class T>
    T parse_integer(const std::string& key, const std::string& text) const
    {
        T v{};
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || end != text.data() + text.size())
            fail(key, "expected a non-negative integer, got '" + text + "'");
        return v;
    }

    double real(const std::string& key, double fallback) const
    {
        if (!has(key))
            return fallback;
        const std::string& text = raw(key);
        double v = 0.0;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v))
            fail(key, "expected a finite number, got '" + text + "'");
        return v;
    }

    bool boolean(const std::string& key, bool fallback) const
    {
        if (!has(key))
            return fallback;
        const std::string& v = raw(key);
        if (v == "true" || v == "yes" || v == "1")
            return true;
        if (v == "false" || v == "no" || v == "0")
            return false;
        fail(key, "expected true or false, got '" + v + "'");
    }

    template <class E>
    E choice(const std::string& key, E fallback, const std::map<std::string, E>& options,
             const std::string& what) const
    {
        if (!has(key))
            return fallback;
        const auto it = options.find(raw(key));
        if (it == options.end())
            fail(key, "unknown " + what + " '" + raw(key) + "'");
        return it->second;
    }

    std::filesystem::path existing_file(const std::string& key) const
    {
        std::filesystem::path p = raw(key);
        if (p.is_relative() && !base_.empty())
            p = (base_ / p).lexically_normal();
        if (!std::filesystem::is_regular_file(p))
            fail(key, "file not found: " + p.string());
        return p;
    }

    std::filesystem::path path(const std::string& key, const std::filesystem::path& fallback) const
    {
        if (!has(key))
            return fallback;
        std::filesystem::path p = raw(key);
        if (p.is_relative() && !base_.empty())
            p = (base_ / p).lexically_normal();
        return p;
    }

private:
    std::map<std::string, Entry> entries_;
    std::filesystem::path base_;
};

const std::set<std::string> kKnownKeys = {
    "geometry",      "size",         "padding",      "architecture",    "route",
    "depths",        "depth_range",  "family",       "family_center",   "sigma",
    "sigma_depth",   "sigma_file",   "beta",         "beta_file",       "noise_var",
    "n",             "bias_trials",  "variance_trials", "risk_trials",  "test_points",
    "seed",          "output_dir",   "threads",      "images",          "labels",
    "mnist_trials",  "count_per_class", "digits",    "shuffle",         "gallery_limit",
};

std::vector<std::size_t> parse_depth_list(const Reader& r)
{
    std::vector<std::size_t> depths;
    std::stringstream items(r.raw("depths"));
    std::string item;
    while (std::getline(items, item, ','))
        depths.push_back(r.parse_integer<std::size_t>("depths", trim(item)));
    if (depths.empty())
        r.fail("depths", "depth list is empty");
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (depths[i] <= depths[i - 1])
            r.fail("depths", "depths must be strictly increasing");
    return depths;
}

std::vector<std::size_t> parse_depth_range(const Reader& r)
{
    std::stringstream parts(r.raw("depth_range"));
    std::vector<std::size_t> nums;
    std::string item;
    while (std::getline(parts, item, ':'))
        nums.push_back(r.parse_integer<std::size_t>("depth_range", trim(item)));
    if (nums.size() != 3)
        r.fail("depth_range", "expected start:stop:count");
    if (nums[0] > nums[1] || nums[2] == 0)
        r.fail("depth_range", "need start <= stop and count >= 1");
    return log_spaced_depths(nums[0], nums[1], nums[2]);
}

}  // namespace

ConfigError::ConfigError(std::size_t line, std::string key, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : key + ": ") + message),
      line_(line),
      key_(std::move(key))
{
}

std::vector<std::size_t> log_spaced_depths(std::size_t start, std::size_t stop, std::size_t count)
{
    std::vector<std::size_t> out;
    if (count == 0 || start > stop)
        return out;
    if (start == 0) {
        out.push_back(0);
        if (--count == 0 || stop == 0)
            return out;
        start = 1;
    }
    const double lo = std::log(static_cast<double>(start));
    const double hi = std::log(static_cast<double>(stop));
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        const auto d = static_cast<std::size_t>(std::llround(std::exp(lo + t * (hi - lo))));
        if (out.empty() || d > out.back())
            out.push_back(d);
    }
    return out;
}

SweepConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir)
{
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(lineno, "", "expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty())
            throw ConfigError(lineno, "", "empty key");
        if (!kKnownKeys.count(key))
            throw ConfigError(lineno, key, "unknown key");
        if (entries.count(key))
            throw ConfigError(lineno, key, "duplicate key (first set on line " +
                                               std::to_string(entries[key].line) + ")");
        if (value.empty())
            throw ConfigError(lineno, key, "missing value");
        entries[key] = {value, lineno};
    }

    const Reader r(std::move(entries), base_dir);
    SweepConfig cfg;

    for (const char* key : {"geometry", "size"})
        if (!r.has(key))
            throw ConfigError(0, key, "missing required key");
    cfg.geometry = r.choice<GeometryKind>("geometry", cfg.geometry,
                                          {{"1d", GeometryKind::OneD}, {"2d", GeometryKind::TwoD}},
                                          "geometry");
    cfg.size = r.integer<std::size_t>("size", 0);
    if (cfg.size == 0)
        r.fail("size", "size must be positive");

    cfg.padding = r.choice<Padding>("padding", cfg.padding,
                                    {{"zero", Padding::Zero}, {"circular", Padding::Circular}},
                                    "padding");
    cfg.architecture = r.choice<Architecture>(
        "architecture", cfg.architecture,
        {{"pooling", Architecture::Pooling}, {"flattening", Architecture::Flattening}}, "architecture");
    cfg.route = r.choice<Route>("route", cfg.route,
                                {{"stencil", Route::Stencil}, {"spectral", Route::Spectral}}, "route");

    if (r.has("depths") && r.has("depth_range"))
        r.fail("depth_range", "give either depths or depth_range, not both");
    if (r.has("depths"))
        cfg.depths = parse_depth_list(r);
    else if (r.has("depth_range"))
        cfg.depths = parse_depth_range(r);
    else
        throw ConfigError(0, "depths", "missing required key (depths or depth_range)");

    cfg.family = r.choice<Family>("family", cfg.family,
                                  {{"cntk", Family::Cntk}, {"aligned_ridge", Family::AlignedRidge}},
                                  "family");
    cfg.family_center = r.integer<std::size_t>("family_center", cfg.family_center);

    cfg.sigma = r.choice<SigmaSource>("sigma", cfg.sigma,
                                      {{"identity", SigmaSource::Identity},
                                       {"inverse_theta", SigmaSource::InverseTheta},
                                       {"file", SigmaSource::File}},
                                      "sigma source");
    cfg.sigma_depth = r.integer<std::size_t>("sigma_depth", cfg.sigma_depth);
    if (cfg.sigma == SigmaSource::InverseTheta && cfg.family != Family::Cntk)
        r.fail("sigma", "inverse_theta needs family = cntk");
    if (cfg.sigma == SigmaSource::File) {
        if (!r.has("sigma_file"))
            r.fail("sigma", "sigma = file needs sigma_file");
        cfg.sigma_file = r.existing_file("sigma_file");
    }
    cfg.beta = r.choice<BetaSource>("beta", cfg.beta,
                                    {{"synthetic", BetaSource::Synthetic}, {"file", BetaSource::File}},
                                    "beta source");
    if (cfg.beta == BetaSource::File) {
        if (!r.has("beta_file"))
            r.fail("beta", "beta = file needs beta_file");
        cfg.beta_file = r.existing_file("beta_file");
    }

    cfg.noise_var = r.real("noise_var", cfg.noise_var);
    if (cfg.noise_var < 0.0)
        r.fail("noise_var", "noise variance must be non-negative");
    cfg.n = r.integer<std::size_t>("n", cfg.n);
    const std::size_t p = cfg.conv_geometry().pixels();
    if (cfg.n == 0 || cfg.n >= p)
        r.fail("n", "need 1 <= n < p = " + std::to_string(p));

    for (auto [key, field] : {std::pair{"bias_trials", &cfg.bias_trials},
                              std::pair{"variance_trials", &cfg.variance_trials},
                              std::pair{"risk_trials", &cfg.risk_trials},
                              std::pair{"test_points", &cfg.test_points},
                              std::pair{"mnist_trials", &cfg.mnist_trials}}) {
        *field = r.integer<std::size_t>(key, *field);
        if (*field == 0)
            r.fail(key, "must be at least 1");
    }
    cfg.count_per_class = r.integer<std::size_t>("count_per_class", cfg.count_per_class);

    cfg.seed = r.integer<std::uint64_t>("seed", cfg.seed);
    cfg.output_dir = r.path("output_dir", cfg.output_dir);
    cfg.threads = r.integer<unsigned>("threads", cfg.threads);
    if (cfg.threads == 0)
        r.fail("threads", "must be at least 1");

    if (r.has("images"))
        cfg.images = r.existing_file("images");
    if (r.has("labels"))
        cfg.labels = r.existing_file("labels");
    if (r.has("digits")) {
        std::stringstream parts(r.raw("digits"));
        std::vector<int> digits;
        std::string item;
        while (std::getline(parts, item, ','))
            digits.push_back(r.parse_integer<int>("digits", trim(item)));
        if (digits.size() != 2 || digits[0] == digits[1] || digits[0] > 9 || digits[1] > 9)
            r.fail("digits", "expected two distinct digits, e.g. 0,1");
        cfg.digit_pos = digits[0];
        cfg.digit_neg = digits[1];
    }
    cfg.shuffle = r.boolean("shuffle", cfg.shuffle);
    cfg.gallery_limit = r.boolean("gallery_limit", cfg.gallery_limit);
    return cfg;
}

SweepConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(0, "", "cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.parent_path());
}

}  // namespace lincntk
