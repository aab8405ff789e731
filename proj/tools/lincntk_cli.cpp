#include <lincntk/config.hpp>
#include <lincntk/experiments.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace lincntk;

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Options {
    std::string config;
    unsigned threads = 0;  // 0 keeps the config value
    std::string output_dir;
};

SweepConfig load(const Options& opt)
{
    SweepConfig cfg = parse_config(opt.config);
    if (opt.threads > 0)
        cfg.threads = opt.threads;
    if (!opt.output_dir.empty())
        cfg.output_dir = opt.output_dir;
    return cfg;
}

void print_sweep(const SweepResult& r)
{
    std::printf("%8s %12s %12s %12s %10s\n", "depth", "bias", "variance", "risk", "g");
    for (const auto& rec : r.records)
        std::printf("%8zu %12.6g %12.6g %12.6g %10.6g\n", rec.depth, rec.bias_mean, rec.var_mean,
                    rec.risk_mean, rec.g);
}

int run(const std::string& command, const Options& opt)
{
    const SweepConfig cfg = load(opt);
    if (command == "validate") {
        std::printf("ok: %s %zu, %zu depths (%zu..%zu), output %s\n", to_string(cfg.geometry).c_str(),
                    cfg.size, cfg.depths.size(), cfg.depths.front(), cfg.depths.back(),
                    cfg.output_dir.string().c_str());
        return 0;
    }
    if (command == "sweep") {
        const SweepResult r = run_depth_sweep(cfg);
        write_sweep(r, cfg.output_dir);
        print_sweep(r);
    } else if (command == "eigvec") {
        const GalleryResult r = run_eigvec_gallery(cfg);
        write_gallery(r, cfg.output_dir);
        for (const auto& img : r.images)
            std::printf("%s  participation %.4g\n", img.file_name().c_str(), img.participation);
    } else if (command == "mnist") {
        const MnistResult r = run_mnist_experiment(cfg);
        write_mnist(r, cfg.output_dir);
        std::printf("identity baseline loss %.6g (se %.3g)\n", r.baseline.mean, r.baseline.std_error);
        std::printf("%8s %12s %12s %10s\n", "depth", "loss", "se", "g");
        for (const auto& rec : r.records)
            std::printf("%8zu %12.6g %12.3g %10.6g\n", rec.depth, rec.loss_mean, rec.loss_se, rec.g);
    }
    std::printf("wrote %s\n", cfg.output_dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Linear CNTK depth experiments"};
    app.require_subcommand(1);
    Options opt;

    const std::pair<const char*, const char*> commands[] = {
        {"sweep", "bias/variance/risk depth sweep -> sweep.csv"},
        {"eigvec", "leading-eigenvector images -> eigvec_D*.pgm"},
        {"mnist", "binary MNIST regression over depth -> mnist.csv"},
        {"validate", "parse and check a config file"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", opt.config, "key = value config file")->required();
        if (std::string(name) != "validate") {
            sub->add_option("--threads", opt.threads, "worker threads (overrides config)")
                ->check(CLI::PositiveNumber);
            sub->add_option("-o,--output-dir", opt.output_dir, "output directory (overrides config)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}
